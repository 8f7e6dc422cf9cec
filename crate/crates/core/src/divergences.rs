//! The divergence family: Umegaki relative entropy, alpha-Renyi, sandwiched,
//! and the two-parameter alpha-z form, together with the trace functional
//! behind it, the (alpha, z) monotonicity-region classifier, and DPI gaps.
//!
//! Conventions. Logarithms are natural throughout. `sigma` is expected
//! strictly positive (the standing invertibility assumption); passing a
//! singular `sigma` opts into the permissive mode in which every power of
//! `sigma` is restricted to its support and a violated support condition
//! returns the `+infinity` sentinel rather than an error.

use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;
use crate::scalar::{real, Scalar};
use crate::states::{DensityOperator, PositiveOperator};
use crate::channels::KrausChannel;

/// Eigenvalue cutoff defining the support of `sigma`.
pub const SUPPORT_EIG_CUTOFF: f64 = 1e-10;
/// The support condition fails when the kernel-compressed state has
/// operator norm above this.
pub const SUPPORT_VIOLATION_TOL: f64 = 1e-9;
/// `alpha` must stay this far from 1; the Umegaki operation covers the
/// limit point.
pub const ALPHA_ONE_GAP: f64 = 1e-9;

/// The pair `(alpha, z)` with `alpha != 1` and `z > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaZParams<T> {
    alpha: T,
    z: T,
}

impl<T: Scalar> AlphaZParams<T> {
    pub fn new(alpha: T, z: T) -> Result<Self> {
        if !alpha.is_finite() || !z.is_finite() {
            return Err(Error::InvalidParams("alpha and z must be finite".into()));
        }
        if (alpha - T::one()).abs() < real::<T>(ALPHA_ONE_GAP) {
            return Err(Error::InvalidParams(
                "alpha = 1 is excluded; use the Umegaki relative entropy".into(),
            ));
        }
        if z <= T::zero() {
            return Err(Error::InvalidParams(format!("z must be positive, got {z}")));
        }
        Ok(Self { alpha, z })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn z(&self) -> T {
        self.z
    }
}

/// Where `(alpha, z)` falls in the DPI monotonicity classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RegionClass {
    /// `0 < alpha < 1` and `z >= max(alpha, 1 - alpha)`.
    MonotoneCase1,
    /// `1 < alpha <= 2` and `alpha/2 <= z <= alpha`.
    MonotoneCase2,
    /// `alpha >= 2` and `alpha - 1 <= z <= alpha`.
    MonotoneCase3,
    /// Everywhere else in the quarter plane: the DPI can fail.
    NotMonotone,
}

impl RegionClass {
    pub fn is_monotone(&self) -> bool {
        !matches!(self, RegionClass::NotMonotone)
    }

    /// Stable token used in CSV/JSON output.
    pub fn token(&self) -> &'static str {
        match self {
            RegionClass::MonotoneCase1 => "case1",
            RegionClass::MonotoneCase2 => "case2",
            RegionClass::MonotoneCase3 => "case3",
            RegionClass::NotMonotone => "not_monotone",
        }
    }
}

impl std::fmt::Display for RegionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// Classifies `(alpha, z)` into its monotonicity region. Boundaries are
/// closed exactly as the region conditions are written, so ties resolve to
/// the monotone case.
pub fn classify_region<T: Scalar>(alpha: T, z: T) -> Result<RegionClass> {
    if !(alpha > T::zero()) || alpha == T::one() || !(z > T::zero()) {
        return Err(Error::InvalidParams(format!(
            "classification needs alpha > 0, alpha != 1, z > 0; got alpha = {alpha}, z = {z}"
        )));
    }
    let one = T::one();
    let two = one + one;
    if alpha < one {
        if z >= alpha.max(one - alpha) {
            return Ok(RegionClass::MonotoneCase1);
        }
    } else if alpha <= two {
        if z >= alpha / two && z <= alpha {
            return Ok(RegionClass::MonotoneCase2);
        }
    } else if z >= alpha - one && z <= alpha {
        return Ok(RegionClass::MonotoneCase3);
    }
    Ok(RegionClass::NotMonotone)
}

/// Finite divergence value or the `+infinity` support-violation sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceValue<T> {
    value: T,
    support_violated: bool,
}

impl<T: Scalar> DivergenceValue<T> {
    pub fn finite(value: T) -> Self {
        Self { value, support_violated: false }
    }

    pub fn infinite() -> Self {
        Self { value: T::infinity(), support_violated: true }
    }

    /// The value; `+infinity` exactly when the support condition failed.
    pub fn value(&self) -> T {
        self.value
    }

    pub fn is_finite(&self) -> bool {
        !self.support_violated
    }

    pub fn support_violated(&self) -> bool {
        self.support_violated
    }
}

/// Operator norm of `rho` compressed to the kernel of `sigma`; the support
/// condition `supp(rho) <= supp(sigma)` fails when this exceeds
/// [`SUPPORT_VIOLATION_TOL`].
pub fn support_violation<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "rho is {}-dimensional, sigma {}-dimensional",
            rho.dim(),
            sigma.dim()
        )));
    }
    if sigma.is_strictly_positive() {
        return Ok(T::zero());
    }
    let proj = sigma.herm().kernel_projector(real::<T>(SUPPORT_EIG_CUTOFF))?;
    let compressed = proj.matrix().matmul(rho.matrix()).matmul(proj.matrix());
    HermitianOperator::from_symmetric_parts(compressed).op_norm()
}

fn support_ok<T: Scalar>(rho: &DensityOperator<T>, sigma: &PositiveOperator<T>) -> Result<bool> {
    Ok(support_violation(rho, sigma)? <= real::<T>(SUPPORT_VIOLATION_TOL))
}

/// `sigma^e`, support-restricted when `sigma` was not validated strictly
/// positive.
fn sigma_power<T: Scalar>(sigma: &PositiveOperator<T>, e: T) -> Result<HermitianOperator<T>> {
    if sigma.is_strictly_positive() {
        sigma.herm().power(e)
    } else {
        sigma.herm().power_restricted(e, real::<T>(SUPPORT_EIG_CUTOFF))
    }
}

/// Umegaki relative entropy `Tr(rho log rho - rho log sigma)` with the
/// `0 log 0 := 0` convention on the kernel of `rho`.
pub fn umegaki<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
) -> Result<DivergenceValue<T>> {
    if !support_ok(rho, sigma)? {
        return Ok(DivergenceValue::infinite());
    }
    let rho_eigs = rho.herm().eig()?;
    let entropy_term = rho_eigs
        .eigenvalues
        .iter()
        .map(|&l| if l > T::zero() { l * l.ln() } else { T::zero() })
        .fold(T::zero(), |a, b| a + b);
    let log_sigma = if sigma.is_strictly_positive() {
        sigma.herm().log()?
    } else {
        sigma.herm().log_restricted(real::<T>(SUPPORT_EIG_CUTOFF))?
    };
    let cross_term = crate::linalg::hs_inner(rho.matrix(), log_sigma.matrix())?.re;
    Ok(DivergenceValue::finite(entropy_term - cross_term))
}

/// Shared core: `Psi = Tr[(sigma^{(1-alpha)/2z} rho^{alpha/z}
/// sigma^{(1-alpha)/2z})^z]`, or `None` on support violation.
fn psi_core<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    alpha: T,
    z: T,
) -> Result<Option<T>> {
    if !support_ok(rho, sigma)? {
        return Ok(None);
    }
    let p = alpha / z;
    let e = (T::one() - alpha) / (z + z);
    let rho_p = rho.herm().power(p)?;
    let s = sigma_power(sigma, e)?;
    let inner = s.matrix().matmul(rho_p.matrix()).matmul(s.matrix());
    let m = HermitianOperator::from_symmetric_parts(inner);
    let psi = m
        .eig()?
        .eigenvalues
        .iter()
        .map(|&l| {
            let l = l.max(T::zero());
            if l > T::zero() {
                l.powf(z)
            } else {
                T::zero()
            }
        })
        .fold(T::zero(), |a, b| a + b);
    Ok(Some(psi))
}

/// The trace functional `Psi_{alpha,z}(rho||sigma)`; the alpha-z divergence
/// is `log(Psi) / (alpha - 1)`.
pub fn psi_functional<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    params: &AlphaZParams<T>,
) -> Result<T> {
    match psi_core(rho, sigma, params.alpha, params.z)? {
        Some(psi) => Ok(psi),
        None => Err(Error::InvalidParams(
            "support condition violated; Psi is evaluated only on supp(rho) <= supp(sigma)".into(),
        )),
    }
}

/// The alpha-z Renyi relative entropy.
pub fn alpha_z<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    params: &AlphaZParams<T>,
) -> Result<DivergenceValue<T>> {
    match psi_core(rho, sigma, params.alpha, params.z)? {
        None => Ok(DivergenceValue::infinite()),
        Some(psi) => {
            if psi <= T::zero() {
                return Ok(DivergenceValue::infinite());
            }
            Ok(DivergenceValue::finite(psi.ln() / (params.alpha - T::one())))
        }
    }
}

/// The alpha-Renyi relative entropy
/// `log(Tr(rho^alpha sigma^{1-alpha})) / (alpha - 1)`.
pub fn renyi_alpha<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    alpha: T,
) -> Result<DivergenceValue<T>> {
    if (alpha - T::one()).abs() < real::<T>(ALPHA_ONE_GAP) {
        return Err(Error::InvalidParams("alpha = 1 is the Umegaki case".into()));
    }
    if !support_ok(rho, sigma)? {
        return Ok(DivergenceValue::infinite());
    }
    let rho_a = rho.herm().power(alpha)?;
    let sigma_b = sigma_power(sigma, T::one() - alpha)?;
    let trace = crate::linalg::hs_inner(rho_a.matrix(), sigma_b.matrix())?.re;
    if trace <= T::zero() {
        return Ok(DivergenceValue::infinite());
    }
    Ok(DivergenceValue::finite(trace.ln() / (alpha - T::one())))
}

/// The sandwiched Renyi divergence
/// `log(Tr[(sigma^{(1-alpha)/2alpha} rho sigma^{(1-alpha)/2alpha})^alpha]) / (alpha - 1)`.
pub fn sandwiched<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    alpha: T,
) -> Result<DivergenceValue<T>> {
    if (alpha - T::one()).abs() < real::<T>(ALPHA_ONE_GAP) {
        return Err(Error::InvalidParams("alpha = 1 is the Umegaki case".into()));
    }
    if alpha == T::zero() {
        return Err(Error::InvalidParams("alpha = 0 is excluded".into()));
    }
    let params = AlphaZParams { alpha, z: alpha };
    alpha_z(rho, sigma, &params)
}

/// `D(rho||sigma) - D(Lambda rho || Lambda sigma)`; nonnegative (up to
/// tolerance) whenever `(alpha, z)` classifies monotone.
pub fn dpi_gap<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    channel: &KrausChannel<T>,
    params: &AlphaZParams<T>,
) -> Result<T> {
    let d_in = alpha_z(rho, sigma, params)?;
    let rho_out = channel.apply_density(rho)?;
    let sigma_out = PositiveOperator::from_matrix(channel.apply(sigma.matrix())?)?;
    let d_out = alpha_z(&rho_out, &sigma_out, params)?;
    if !d_in.is_finite() || !d_out.is_finite() {
        return Err(Error::InvalidParams(
            "DPI gap needs finite divergences on both sides".into(),
        ));
    }
    Ok(d_in.value() - d_out.value())
}
