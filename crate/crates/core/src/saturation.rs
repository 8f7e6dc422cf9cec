//! DPI saturation diagnostics: Petz recovery maps, the necessary-condition
//! residual for general channels, the sandwiched special case, the
//! algebraic sufficient condition with its additive constant, and the
//! recovery-map error bound for the Umegaki relative entropy.
//!
//! All residuals are reported as dimensionless ratios: operator infinity
//! norm for Hermitian comparisons, Frobenius norm for the non-Hermitian
//! alpha-Renyi condition, each normalized by the left-hand side's norm.

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::divergences::{alpha_z, umegaki, AlphaZParams};
use crate::error::{Error, Result};
use crate::linalg::{kron, schatten_norm, ComplexMatrix, HermitianOperator, POSITIVITY_FLOOR};
use crate::scalar::{real, Scalar};
use crate::states::{DensityOperator, PositiveOperator};

/// Which outer exponent the reported condition residual used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionVariant {
    /// Outer exponent `(1-z)/2z`: the necessary condition for saturation.
    Necessary,
    /// Outer exponent `(1-alpha)/2z`: the hypothesis of the algebraic
    /// sufficient condition.
    Sufficient,
}

/// One saturation measurement. `necessary_residual` holds the residual of
/// whichever condition `condition_exponent_variant` names; `k_rho` and the
/// entropy-identity residual are present for the product-state sufficient
/// check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaturationReport {
    pub gap: f64,
    pub necessary_residual: f64,
    pub condition_exponent_variant: ConditionVariant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_identity_residual: Option<f64>,
}

/// Gap and lower bound of the recovery-map error inequality, with
/// `slack = gap - bound`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorBoundCheck<T> {
    pub gap: T,
    pub bound: T,
    pub slack: T,
}

fn require_strictly_positive<T: Scalar>(op: &PositiveOperator<T>, what: &str) -> Result<()> {
    if !op.is_strictly_positive() {
        return Err(Error::SingularSigma {
            min: op
                .herm()
                .min_eigenvalue()
                .map(|m| m.to_f64_lossy())
                .unwrap_or(f64::NAN),
        });
    }
    let _ = what;
    Ok(())
}

/// The Petz recovery map `X -> sigma^{1/2} Lambda^*(Lambda(sigma)^{-1/2} X
/// Lambda(sigma)^{-1/2}) sigma^{1/2}` in Kraus form; trace preserving, and
/// recovers `sigma` from `Lambda(sigma)` exactly.
pub fn petz_recovery<T: Scalar>(
    sigma: &PositiveOperator<T>,
    channel: &KrausChannel<T>,
) -> Result<KrausChannel<T>> {
    require_strictly_positive(sigma, "sigma")?;
    if sigma.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "sigma dimension {} does not match channel input {}",
            sigma.dim(),
            channel.dim_in()
        )));
    }
    let mapped = PositiveOperator::from_matrix(channel.apply(sigma.matrix())?)?;
    require_strictly_positive(&mapped, "Lambda(sigma)")?;
    let half = real::<T>(0.5);
    let sigma_half = sigma.herm().power(half)?;
    let mapped_inv_half = mapped.herm().power(-half)?;
    let kraus = channel
        .kraus()
        .iter()
        .map(|k| {
            sigma_half
                .matrix()
                .matmul(&k.adjoint())
                .matmul(mapped_inv_half.matrix())
        })
        .collect();
    KrausChannel::new(kraus)
}

/// The saturation condition operator
/// `sigma^{outer} (sigma^{(1-alpha)/2z} rho^{alpha/z}
/// sigma^{(1-alpha)/2z})^{z-1} sigma^{outer}`.
fn condition_operator<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    alpha: T,
    z: T,
    outer: T,
) -> Result<HermitianOperator<T>> {
    let two = T::one() + T::one();
    let rho_p = rho.herm().power(alpha / z)?;
    let s_in = sigma.herm().power((T::one() - alpha) / (two * z))?;
    let core = HermitianOperator::from_symmetric_parts(
        s_in.matrix().matmul(rho_p.matrix()).matmul(s_in.matrix()),
    )
    .power(z - T::one())?;
    let s_out = sigma.herm().power(outer)?;
    Ok(HermitianOperator::from_symmetric_parts(
        s_out.matrix().matmul(core.matrix()).matmul(s_out.matrix()),
    ))
}

fn hermitian_rel_residual<T: Scalar>(
    lhs: &HermitianOperator<T>,
    rhs: &ComplexMatrix<T>,
) -> Result<T> {
    let diff = HermitianOperator::from_symmetric_parts(lhs.matrix().sub(rhs));
    let denom = lhs.op_norm()?.max(real::<T>(1e-300));
    Ok(diff.op_norm()? / denom)
}

fn necessary_core<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    channel: &KrausChannel<T>,
    alpha: T,
    z: T,
) -> Result<T> {
    require_strictly_positive(sigma, "sigma")?;
    let sigma_out = PositiveOperator::from_matrix(channel.apply(sigma.matrix())?)?;
    require_strictly_positive(&sigma_out, "Lambda(sigma)")?;
    let rho_out = channel.apply_density(rho)?;
    let two = T::one() + T::one();
    let outer = (T::one() - z) / (two * z);
    let lhs = condition_operator(rho, sigma, alpha, z, outer)?;
    let mapped = condition_operator(&rho_out, &sigma_out, alpha, z, outer)?;
    let rhs = channel.adjoint_apply(mapped.matrix())?;
    hermitian_rel_residual(&lhs, &rhs)
}

/// Residual of the necessary condition for DPI saturation,
/// `sigma^{(1-z)/2z} (sigma^{(1-alpha)/2z} rho^{alpha/z}
/// sigma^{(1-alpha)/2z})^{z-1} sigma^{(1-z)/2z} = Lambda^*(same expression
/// in Lambda(rho), Lambda(sigma))`, valid for `1 < alpha <= 2`,
/// `alpha/2 <= z <= alpha`. Zero (to tolerance) whenever the DPI is
/// saturated.
pub fn necessary_residual<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    channel: &KrausChannel<T>,
    params: &AlphaZParams<T>,
) -> Result<T> {
    let (alpha, z) = (params.alpha(), params.z());
    let one = T::one();
    let two = one + one;
    if !(alpha > one && alpha <= two && z >= alpha / two && z <= alpha) {
        return Err(Error::InvalidParams(format!(
            "the necessary condition is stated for 1 < alpha <= 2 and alpha/2 <= z <= alpha; got ({alpha}, {z})"
        )));
    }
    necessary_core(rho, sigma, channel, alpha, z)
}

/// Residual of the sandwiched-divergence saturation condition (`alpha >
/// 1/2`, `alpha != 1`); coincides with [`necessary_residual`] at `z =
/// alpha`.
pub fn sandwiched_residual<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    channel: &KrausChannel<T>,
    alpha: T,
) -> Result<T> {
    let half = real::<T>(0.5);
    if !(alpha > half) || alpha == T::one() {
        return Err(Error::InvalidParams(format!(
            "the sandwiched condition is stated for alpha > 1/2, alpha != 1; got {alpha}"
        )));
    }
    necessary_core(rho, sigma, channel, alpha, alpha)
}

/// DPI gap together with the necessary-condition residual for one instance.
pub fn necessary_report<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    channel: &KrausChannel<T>,
    params: &AlphaZParams<T>,
) -> Result<SaturationReport> {
    let gap = crate::divergences::dpi_gap(rho, sigma, channel, params)?;
    let residual = necessary_residual(rho, sigma, channel, params)?;
    Ok(SaturationReport {
        gap: gap.to_f64_lossy(),
        necessary_residual: residual.to_f64_lossy(),
        condition_exponent_variant: ConditionVariant::Necessary,
        k_rho: None,
        entropy_identity_residual: None,
    })
}

/// Declared structure of the bipartite state handed to
/// [`sufficient_condition_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BipartiteStructure {
    /// `rho_AB = rho_A (x) rho_B`; the identity carries the constant
    /// `k_rho = log(Tr rho_B^{alpha/z}) / (alpha - 1)`.
    Product,
    /// A convex mixture of product pure states; the identity is exact.
    Separable,
}

/// Measures the algebraic sufficient condition for saturation under the
/// partial trace over B.
///
/// Reports (i) the residual of the hypothesis
/// `sigma_AB^{(1-alpha)/2z} (...)^{z-1} sigma_AB^{(1-alpha)/2z} =
/// [same on the A marginals] (x) I_B`, (ii) the constant `k_rho` for
/// product states, and (iii) the entropy-identity residual
/// `|D_AB - D_A - k_rho|` (product) or `|D_AB - D_A|` (separable). The
/// `gap` field carries `D_AB - D_A` itself.
pub fn sufficient_condition_check<T: Scalar>(
    rho_ab: &DensityOperator<T>,
    sigma_ab: &PositiveOperator<T>,
    dims: (usize, usize),
    params: &AlphaZParams<T>,
    structure: BipartiteStructure,
) -> Result<SaturationReport> {
    let (da, db) = dims;
    if rho_ab.dim() != da * db || sigma_ab.dim() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "states must live on {da}x{db} = {}, got {} and {}",
            da * db,
            rho_ab.dim(),
            sigma_ab.dim()
        )));
    }
    require_strictly_positive(sigma_ab, "sigma_AB")?;
    let (alpha, z) = (params.alpha(), params.z());
    let two = T::one() + T::one();
    let outer = (T::one() - alpha) / (two * z);

    let full_dims = [da, db];
    let rho_a = rho_ab.partial_trace(&full_dims, &[0])?;
    let sigma_a = PositiveOperator::from_matrix(crate::linalg::partial_trace(
        sigma_ab.matrix(),
        &full_dims,
        &[0],
    )?)?;

    let t_ab = condition_operator(rho_ab, sigma_ab, alpha, z, outer)?;
    let t_a = condition_operator(&rho_a, &sigma_a, alpha, z, outer)?;
    let lifted = kron(t_a.matrix(), &ComplexMatrix::identity(db));
    let hypothesis_residual = hermitian_rel_residual(&t_ab, &lifted)?;

    let d_ab = alpha_z(rho_ab, sigma_ab, params)?;
    let d_a = alpha_z(&rho_a, &sigma_a, params)?;
    if !d_ab.is_finite() || !d_a.is_finite() {
        return Err(Error::InvalidParams(
            "the sufficient check needs finite divergences".into(),
        ));
    }
    let gap = d_ab.value() - d_a.value();

    let (k_rho, identity_residual) = match structure {
        BipartiteStructure::Product => {
            let rho_b = rho_ab.partial_trace(&full_dims, &[1])?;
            let tr_power = rho_b
                .herm()
                .eig()?
                .eigenvalues
                .iter()
                .map(|&l| {
                    let l = l.max(T::zero());
                    if l > T::zero() {
                        l.powf(alpha / z)
                    } else {
                        T::zero()
                    }
                })
                .fold(T::zero(), |a, b| a + b);
            let k = tr_power.ln() / (alpha - T::one());
            (Some(k), (gap - k).abs())
        }
        BipartiteStructure::Separable => (None, gap.abs()),
    };

    Ok(SaturationReport {
        gap: gap.to_f64_lossy(),
        necessary_residual: hypothesis_residual.to_f64_lossy(),
        condition_exponent_variant: ConditionVariant::Sufficient,
        k_rho: k_rho.map(|k| k.to_f64_lossy()),
        entropy_identity_residual: Some(identity_residual.to_f64_lossy()),
    })
}

/// Recovery-map error bound for the Umegaki relative entropy under a
/// partial trace `N = Tr_B`:
/// `D(rho||sigma) - D(N rho||N sigma) >= (pi/8)^4 ||rho^{-1}||^{-2}
/// ||R_rho(N(sigma)) - sigma||_1^4`, with `R_rho` the Petz map built from
/// `rho` (the recovery map is indexed by `rho`, applied to `N(sigma)`, and
/// compared against `sigma`).
pub fn umegaki_error_bound_check<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
    dims: (usize, usize),
) -> Result<ErrorBoundCheck<T>> {
    let (da, db) = dims;
    if rho.dim() != da * db || sigma.dim() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "states must live on {da}x{db} = {}, got {} and {}",
            da * db,
            rho.dim(),
            sigma.dim()
        )));
    }
    let rho_pos = PositiveOperator::from_density(rho);
    require_strictly_positive(&rho_pos, "rho")?;
    let sigma_pos = PositiveOperator::from_density(sigma);

    let trace_b = KrausChannel::partial_trace_channel(&[da, db], &[0])?;
    let rho_a = rho.partial_trace(&[da, db], &[0])?;
    let sigma_a = PositiveOperator::from_matrix(trace_b.apply(sigma.matrix())?)?;

    let d_full = umegaki(rho, &sigma_pos)?;
    let d_reduced = umegaki(&rho_a, &sigma_a)?;
    if !d_full.is_finite() || !d_reduced.is_finite() {
        return Err(Error::InvalidParams(
            "the error bound needs finite relative entropies".into(),
        ));
    }
    let gap = d_full.value() - d_reduced.value();

    let recovery = petz_recovery(&rho_pos, &trace_b)?;
    let recovered = recovery.apply(sigma_a.matrix())?;
    let diff_norm = schatten_norm(&recovered.sub(sigma.matrix()), T::one())?;

    let min_eig = rho.herm().min_eigenvalue()?;
    if min_eig <= real::<T>(POSITIVITY_FLOOR) {
        return Err(Error::SingularMatrix {
            min: min_eig.to_f64_lossy(),
        });
    }
    let quarter_pi_over_8 = {
        let pi = T::PI();
        let eighth = pi / real::<T>(8.0);
        eighth * eighth * eighth * eighth
    };
    let bound = quarter_pi_over_8 * min_eig * min_eig * diff_norm.powi(4);
    Ok(ErrorBoundCheck {
        gap,
        bound,
        slack: gap - bound,
    })
}

/// Residual of the (sign-symmetric, real-exponent) alpha-Renyi saturation
/// condition `Lambda^*(Lambda(sigma)^{-t} Lambda(rho)^{t}) = sigma^{-t}
/// rho^{t}`, as a normalized Frobenius norm (the compared operators are
/// generally non-Hermitian).
///
/// This fixes one concrete variant of the condition: real exponent `t`,
/// with matching signs on the two sides. Treat the residual as a
/// diagnostic of that variant only, not of formulations with complex
/// exponents or other sign conventions.
pub fn alpha_rre_residual<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    channel: &KrausChannel<T>,
    t: T,
) -> Result<T> {
    let rho_pos = PositiveOperator::from_density(rho);
    require_strictly_positive(&rho_pos, "rho")?;
    require_strictly_positive(sigma, "sigma")?;
    let rho_out = PositiveOperator::from_matrix(channel.apply(rho.matrix())?)?;
    let sigma_out = PositiveOperator::from_matrix(channel.apply(sigma.matrix())?)?;
    require_strictly_positive(&rho_out, "Lambda(rho)")?;
    require_strictly_positive(&sigma_out, "Lambda(sigma)")?;

    let lhs_inner = sigma_out
        .herm()
        .power(-t)?
        .matrix()
        .matmul(rho_out.herm().power(t)?.matrix());
    let lhs = channel.adjoint_apply(&lhs_inner)?;
    let rhs = sigma
        .herm()
        .power(-t)?
        .matrix()
        .matmul(rho.herm().power(t)?.matrix());
    let denom = rhs.frobenius_norm().max(real::<T>(1e-300));
    Ok(lhs.sub(&rhs).frobenius_norm() / denom)
}
