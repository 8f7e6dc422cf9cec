//! The property suite: every documented invariant run as a seeded
//! campaign, with one result row per property and a process-level
//! pass/fail verdict.
//!
//! Setting `RENYI_DPI_INJECT_BUG=psi-sign` flips an exponent sign inside
//! this suite's trace-functional evaluation path (never inside the
//! library), which the reduction-identity property must catch; it exists
//! so the harness can prove it actually fails on wrong numbers.

use renyi_dpi_core::channels::{pauli_twirl_b, KrausChannel};
use renyi_dpi_core::divergences::{
    alpha_z, classify_region, dpi_gap, renyi_alpha, sandwiched, umegaki, AlphaZParams,
};
use renyi_dpi_core::linalg::{
    hs_inner, kron, partial_trace, schatten_norm, ComplexMatrix, HermitianOperator,
};
use renyi_dpi_core::rng::{derive_seed, SplitMix64};
use renyi_dpi_core::saturation::{
    necessary_residual, petz_recovery, sandwiched_residual, sufficient_condition_check,
    umegaki_error_bound_check, BipartiteStructure,
};
use renyi_dpi_core::states::{ginibre, haar_unitary, DensityOperator, PositiveOperator};
use renyi_dpi_core::variational::{
    convexity_probe, f_functional, general_trace_functional, optimal_h, verify_supremum,
    young_trace_check, zhang_lower_bound, ProbeTarget, TraceFunctionalParams,
};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult, INJECT_BUG_ENV_VAR};

type D = DensityOperator<f64>;
type P = PositiveOperator<f64>;
type M = ComplexMatrix<f64>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub trials: u64,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOutput {
    pub seed: u64,
    pub trials: u64,
    pub dims_max: usize,
    pub results: Vec<PropertyResult>,
    pub all_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl SuiteOutput {
    pub fn failing_names(&self) -> Vec<&str> {
        self.results
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.as_str())
            .collect()
    }
}

struct Ctx {
    seed: u64,
    trials: u64,
    dim: usize,
    bug_psi_sign: bool,
}

impl Ctx {
    fn pair(&self, salt: u64, t: u64) -> (D, P) {
        let s = derive_seed(self.seed, &[salt, t]);
        let rho = D::random(self.dim, self.dim, derive_seed(s, &[1]))
            .unwrap()
            .regularize(0.08)
            .unwrap();
        let sigma = D::random(self.dim, self.dim, derive_seed(s, &[2]))
            .unwrap()
            .regularize(0.08)
            .unwrap();
        (rho, PositiveOperator::from_density(&sigma))
    }

    /// The trace functional as this suite evaluates it; the injected bug
    /// flips the sign of the sigma exponent.
    fn psi(&self, rho: &D, sigma: &P, params: &AlphaZParams<f64>) -> CliResult<f64> {
        let (alpha, z) = (params.alpha(), params.z());
        let q = if self.bug_psi_sign {
            (alpha - 1.0) / z
        } else {
            (1.0 - alpha) / z
        };
        let tf = TraceFunctionalParams::new(alpha / z, q, z, M::identity(rho.dim()))?;
        Ok(general_trace_functional(&P::from_density(rho), sigma, &tf)?)
    }

    fn alpha_z_via_psi(&self, rho: &D, sigma: &P, params: &AlphaZParams<f64>) -> CliResult<f64> {
        Ok(self.psi(rho, sigma, params)?.ln() / (params.alpha() - 1.0))
    }
}

type PropertyFn = fn(&Ctx) -> CliResult<f64>;

fn property_table() -> Vec<(&'static str, f64, PropertyFn)> {
    vec![
        ("linalg_eig_reconstruction", 1e-9, p_eig_reconstruction),
        ("linalg_power_composition", 1e-8, p_power_composition),
        ("linalg_holder_inequality", 1e-10, p_holder),
        ("linalg_partial_trace_duality", 1e-10, p_pt_duality),
        ("states_constructor_validation", 1e-10, p_state_validation),
        ("states_sampler_determinism", 0.0, p_sampler_determinism),
        ("states_regularize_unitary_covariance", 1e-12, p_regularize_covariance),
        ("channels_adjoint_pairing", 1e-10, p_adjoint_pairing),
        ("channels_twirl_identity", 1e-9, p_twirl_identity),
        ("channels_unitary_inverse", 1e-10, p_unitary_inverse),
        ("channels_composition_cptp", 1e-9, p_composition_cptp),
        ("div_unitary_invariance", 1e-9, p_unitary_invariance),
        ("div_tensor_property", 1e-9, p_tensor_property),
        ("div_reduction_identity", 1e-10, p_reduction_identity),
        ("div_umegaki_limit", 1e-3, p_umegaki_limit),
        ("div_nonnegativity_monotone", 1e-9, p_nonnegativity),
        ("div_dpi_monotone", 1e-8, p_dpi_monotone),
        ("var_supremum_attainment", 1e-8, p_supremum_attainment),
        ("var_f_upper_bound", 1e-8, p_f_upper_bound),
        ("var_psi_midpoint_convexity", 1e-8, p_psi_convexity),
        ("var_psi_midpoint_concavity", 1e-8, p_psi_concavity),
        ("var_young_nonnegative_slack", 1e-10, p_young_nonneg),
        ("var_young_equality_cases", 1e-9, p_young_equality),
        ("var_zhang_nonnegative_slack", 1e-9, p_zhang_nonneg),
        ("var_general_functional_specializes", 1e-12, p_general_specializes),
        ("sat_petz_cptp", 1e-9, p_petz_cptp),
        ("sat_petz_recovers_sigma", 1e-10, p_petz_recovers),
        ("sat_tensor_gap", 1e-9, p_tensor_gap),
        ("sat_tensor_necessary_residual", 1e-7, p_tensor_residual),
        ("sat_coincidence_z_alpha", 1e-10, p_coincidence),
        ("sat_sufficient_entropy_identity", 1e-7, p_sufficient_identity),
        ("sat_umegaki_error_bound", 1e-8, p_umegaki_bound),
    ]
}

/// Test-only fault the suite can be asked to run under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign of the sigma exponent in the suite's trace-functional
    /// evaluation; the reduction-identity property must then fail.
    PsiSignFlip,
}

/// Reads `RENYI_DPI_INJECT_BUG` (command-layer only; the library never
/// consults the environment).
pub fn fault_from_env() -> CliResult<Option<Fault>> {
    match std::env::var(INJECT_BUG_ENV_VAR) {
        Err(_) => Ok(None),
        Ok(v) if v == "psi-sign" => Ok(Some(Fault::PsiSignFlip)),
        Ok(v) => Err(CliError::InvalidParams(format!(
            "unknown {INJECT_BUG_ENV_VAR} value {v:?}"
        ))),
    }
}

/// Runs the whole table. `trials = 0` skips every campaign and warns.
pub fn run_suite(
    seed: u64,
    trials: u64,
    dims_max: usize,
    fault: Option<Fault>,
) -> CliResult<SuiteOutput> {
    if dims_max < 2 {
        return Err(CliError::InvalidParams("dims-max must be at least 2".into()));
    }
    if trials == 0 {
        return Ok(SuiteOutput {
            seed,
            trials,
            dims_max,
            results: Vec::new(),
            all_pass: true,
            warning: Some("trials = 0: no property was exercised".into()),
        });
    }
    let ctx = Ctx {
        seed,
        trials,
        dim: dims_max.min(4),
        bug_psi_sign: fault == Some(Fault::PsiSignFlip),
    };
    let mut results = Vec::new();
    for (name, tolerance, f) in property_table() {
        let max_violation = f(&ctx)?;
        results.push(PropertyResult {
            name: name.to_string(),
            trials,
            max_violation,
            tolerance,
            pass: max_violation <= tolerance,
        });
    }
    let all_pass = results.iter().all(|r| r.pass);
    Ok(SuiteOutput {
        seed,
        trials,
        dims_max,
        results,
        all_pass,
        warning: None,
    })
}

fn fold_max(acc: f64, v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        acc.max(v)
    }
}

fn p_eig_reconstruction(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let mut g = SplitMix64::new(derive_seed(ctx.seed, &[10, t]));
        let h = HermitianOperator::from_symmetric_parts(ginibre::<f64>(ctx.dim, ctx.dim, &mut g));
        let e = h.eig()?;
        let rec = e.map_eigenvalues(|l| l);
        let rel =
            rec.sub(h.matrix()).frobenius_norm() / h.matrix().frobenius_norm().max(1e-300);
        worst = fold_max(worst, rel);
    }
    Ok(worst)
}

fn p_power_composition(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let mut g = SplitMix64::new(derive_seed(ctx.seed, &[11, t]));
        let a = P::random_strictly_positive(ctx.dim, g.next_u64());
        let p = -2.0 + 4.0 * g.next_f64();
        let q = -2.0 + 4.0 * g.next_f64();
        let lhs = a.herm().power(p)?.power(q)?;
        let rhs = a.herm().power(p * q)?;
        let scale = rhs.matrix().max_abs_entry().max(1.0);
        worst = fold_max(worst, lhs.matrix().sub(rhs.matrix()).max_abs_entry() / scale);
    }
    Ok(worst)
}

fn p_holder(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = f64::NEG_INFINITY;
    for t in 0..ctx.trials {
        let mut g = SplitMix64::new(derive_seed(ctx.seed, &[12, t]));
        let x = P::random_strictly_positive(ctx.dim, g.next_u64());
        let y = P::random_strictly_positive(ctx.dim, g.next_u64());
        let p = 1.05 + 6.0 * g.next_f64();
        let q = p / (p - 1.0);
        let lhs = schatten_norm(&x.matrix().matmul(y.matrix()), 1.0)?;
        let rhs = schatten_norm(x.matrix(), p)? * schatten_norm(y.matrix(), q)?;
        worst = fold_max(worst, (lhs - rhs) / rhs.max(1.0));
    }
    Ok(worst)
}

fn p_pt_duality(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let mut g = SplitMix64::new(derive_seed(ctx.seed, &[13, t]));
        let x = ginibre::<f64>(6, 6, &mut g);
        let h_a = ginibre::<f64>(2, 2, &mut g);
        let lhs = hs_inner(&partial_trace(&x, &[2, 3], &[0])?, &h_a)?;
        let rhs = hs_inner(&x, &kron(&h_a, &M::identity(3)))?;
        worst = fold_max(worst, (lhs - rhs).norm());
    }
    Ok(worst)
}

fn p_state_validation(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let s = derive_seed(ctx.seed, &[14, t]);
        let rho = D::random(ctx.dim, 1 + (t as usize % ctx.dim), s)?;
        let trace_err = (rho.matrix().trace().re - 1.0).abs();
        let min_eig = rho.min_eigenvalue()?;
        worst = fold_max(worst, trace_err.max(-min_eig));
        let sep = D::separable(2, 2, 2, s)?;
        worst = fold_max(worst, (sep.matrix().trace().re - 1.0).abs());
    }
    Ok(worst)
}

fn p_sampler_determinism(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials.min(16) {
        let s = derive_seed(ctx.seed, &[15, t]);
        let a = D::random(ctx.dim, ctx.dim, s)?;
        let b = D::random(ctx.dim, ctx.dim, s)?;
        worst = fold_max(worst, a.matrix().sub(b.matrix()).max_abs_entry());
        let ca = KrausChannel::random(ctx.dim, ctx.dim, 2, s)?;
        let cb = KrausChannel::random(ctx.dim, ctx.dim, 2, s)?;
        for (ka, kb) in ca.kraus().iter().zip(cb.kraus()) {
            worst = fold_max(worst, ka.sub(kb).max_abs_entry());
        }
    }
    Ok(worst)
}

fn p_regularize_covariance(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let s = derive_seed(ctx.seed, &[16, t]);
        let rho = D::random(ctx.dim, ctx.dim.max(2) - 1, s)?;
        let u = haar_unitary::<f64>(ctx.dim, derive_seed(s, &[1]));
        let eps = 0.03;
        let lhs = D::from_matrix(u.matmul(rho.matrix()).matmul(&u.adjoint()))?
            .regularize(eps)?;
        let reg = rho.regularize(eps)?;
        let rhs = u.matmul(reg.matrix()).matmul(&u.adjoint());
        worst = fold_max(worst, lhs.matrix().sub(&rhs).max_abs_entry());
    }
    Ok(worst)
}

fn p_adjoint_pairing(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let s = derive_seed(ctx.seed, &[17, t]);
        let mut g = SplitMix64::new(s);
        let chan = KrausChannel::random(ctx.dim, 2, 2, g.next_u64())?;
        let x = ginibre::<f64>(ctx.dim, ctx.dim, &mut g);
        let y = ginibre::<f64>(2, 2, &mut g);
        let lhs = hs_inner(&chan.apply(&x)?, &y)?;
        let rhs = hs_inner(&x, &chan.adjoint_apply(&y)?)?;
        worst = fold_max(worst, (lhs - rhs).norm());
    }
    Ok(worst)
}

fn p_twirl_identity(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let s = derive_seed(ctx.seed, &[18, t]);
        let (da, db) = (2usize, 2 + (t as usize % 2));
        let rho = D::random(da * db, da * db, s)?;
        let twirled = pauli_twirl_b(&rho, (da, db))?;
        let expected = kron(
            rho.partial_trace(&[da, db], &[0])?.matrix(),
            &M::identity(db).scale_re(1.0 / db as f64),
        );
        worst = fold_max(worst, twirled.matrix().sub(&expected).max_abs_entry());
    }
    Ok(worst)
}

fn p_unitary_inverse(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let s = derive_seed(ctx.seed, &[19, t]);
        let u = haar_unitary::<f64>(ctx.dim, s);
        let fwd = KrausChannel::unitary(u.clone())?;
        let bwd = KrausChannel::unitary(u.adjoint())?;
        let rho = D::random(ctx.dim, ctx.dim, derive_seed(s, &[1]))?;
        let roundtrip = bwd.apply(&fwd.apply(rho.matrix())?)?;
        worst = fold_max(worst, roundtrip.sub(rho.matrix()).max_abs_entry());
    }
    Ok(worst)
}

fn p_composition_cptp(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let s = derive_seed(ctx.seed, &[20, t]);
        let inner = KrausChannel::<f64>::random(ctx.dim, 3, 2, derive_seed(s, &[1]))?;
        let outer = KrausChannel::random(3, 2, 2, derive_seed(s, &[2]))?;
        let rep = inner.compose(&outer)?.validate_cptp();
        worst = fold_max(worst, rep.tp_residual.max(-rep.choi_min_eig));
    }
    Ok(worst)
}

fn p_unitary_invariance(ctx: &Ctx) -> CliResult<f64> {
    let params = AlphaZParams::new(1.6, 1.1).unwrap();
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let (rho, sigma) = ctx.pair(21, t);
        let u = haar_unitary::<f64>(ctx.dim, derive_seed(ctx.seed, &[21, t, 5]));
        let base = alpha_z(&rho, &sigma, &params)?.value();
        let rho_u = D::from_matrix(u.matmul(rho.matrix()).matmul(&u.adjoint()))?;
        let sigma_u = P::from_matrix(u.matmul(sigma.matrix()).matmul(&u.adjoint()))?;
        let rot = alpha_z(&rho_u, &sigma_u, &params)?.value();
        worst = fold_max(worst, (base - rot).abs());
    }
    Ok(worst)
}

fn p_tensor_property(ctx: &Ctx) -> CliResult<f64> {
    let params = AlphaZParams::new(1.4, 1.2).unwrap();
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let (rho, sigma) = ctx.pair(22, t);
        let tau = D::random(2, 2, derive_seed(ctx.seed, &[22, t, 9]))?.regularize(0.1)?;
        let base = alpha_z(&rho, &sigma, &params)?.value();
        let lifted = alpha_z(
            &rho.tensor(&tau),
            &P::from_matrix(kron(sigma.matrix(), tau.matrix()))?,
            &params,
        )?
        .value();
        worst = fold_max(worst, (base - lifted).abs());
    }
    Ok(worst)
}

fn p_reduction_identity(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let (rho, sigma) = ctx.pair(23, t);
        for alpha in [0.5, 1.5, 2.0] {
            let z1 = AlphaZParams::new(alpha, 1.0).unwrap();
            let za = AlphaZParams::new(alpha, alpha).unwrap();
            let via_psi_z1 = ctx.alpha_z_via_psi(&rho, &sigma, &z1)?;
            let via_renyi = renyi_alpha(&rho, &sigma, alpha)?.value();
            worst = fold_max(worst, (via_psi_z1 - via_renyi).abs());
            let via_psi_za = ctx.alpha_z_via_psi(&rho, &sigma, &za)?;
            let via_sandwich = sandwiched(&rho, &sigma, alpha)?.value();
            worst = fold_max(worst, (via_psi_za - via_sandwich).abs());
        }
    }
    Ok(worst)
}

fn p_umegaki_limit(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let (rho, sigma) = ctx.pair(24, t);
        let u = umegaki(&rho, &sigma)?.value();
        for da in [1e-4, -1e-4] {
            let params = AlphaZParams::new(1.0 + da, 1.0).unwrap();
            let d = alpha_z(&rho, &sigma, &params)?.value();
            worst = fold_max(worst, (d - u).abs());
        }
    }
    Ok(worst)
}

fn p_nonnegativity(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = f64::NEG_INFINITY;
    let points = [(0.5, 0.8), (1.5, 1.2), (2.5, 2.0)];
    for t in 0..ctx.trials {
        let (rho, sigma) = ctx.pair(25, t);
        for (alpha, z) in points {
            let params = AlphaZParams::new(alpha, z).unwrap();
            let d = alpha_z(&rho, &sigma, &params)?.value();
            worst = fold_max(worst, -d);
        }
    }
    Ok(worst)
}

fn p_dpi_monotone(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = f64::NEG_INFINITY;
    let points = [(0.5, 0.8), (1.5, 1.2), (2.5, 2.0)];
    for t in 0..ctx.trials {
        let s = derive_seed(ctx.seed, &[26, t]);
        let (da, db) = (2usize, 2usize);
        let dim = da * db;
        let rho = D::random(dim, dim, derive_seed(s, &[1]))?.regularize(0.05)?;
        let sigma = P::from_density(&D::random(dim, dim, derive_seed(s, &[2]))?.regularize(0.05)?);
        let chan = match t % 3 {
            0 => KrausChannel::partial_trace_channel(&[da, db], &[0])?,
            1 => KrausChannel::random(dim, dim, 2, derive_seed(s, &[3]))?,
            _ => KrausChannel::unitary(haar_unitary::<f64>(dim, derive_seed(s, &[4])))?,
        };
        for (alpha, z) in points {
            let params = AlphaZParams::new(alpha, z).unwrap();
            debug_assert!(classify_region(alpha, z).unwrap().is_monotone());
            worst = fold_max(worst, -dpi_gap(&rho, &sigma, &chan, &params)?);
        }
    }
    Ok(worst)
}

fn p_supremum_attainment(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let (rho, sigma) = ctx.pair(27, t);
        for (alpha, z) in [(1.8, 1.4), (2.0, 1.6)] {
            let params = AlphaZParams::new(alpha, z).unwrap();
            let h = optimal_h(&rho, &sigma, &params)?;
            let f = f_functional(&h, &rho, &sigma, &params)?;
            let psi = ctx.psi(&rho, &sigma, &params)?;
            worst = fold_max(worst, (f - psi).abs() / psi.abs().max(1.0));
        }
    }
    Ok(worst)
}

fn p_f_upper_bound(ctx: &Ctx) -> CliResult<f64> {
    let params = AlphaZParams::new(1.8, 1.4).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for t in 0..ctx.trials.min(24) {
        let (rho, sigma) = ctx.pair(28, t);
        let report = verify_supremum(&rho, &sigma, &params, 16, derive_seed(ctx.seed, &[28, t]))?;
        worst = fold_max(worst, report.max_violation);
    }
    Ok(worst)
}

fn p_psi_convexity(ctx: &Ctx) -> CliResult<f64> {
    let target = ProbeTarget::PsiJointConvex(AlphaZParams::new(1.5, 1.2).unwrap());
    let report = convexity_probe(&target, ctx.dim.min(3), ctx.trials, derive_seed(ctx.seed, &[29]))?;
    Ok(report.max_violation)
}

fn p_psi_concavity(ctx: &Ctx) -> CliResult<f64> {
    let target = ProbeTarget::PsiJointConcave(AlphaZParams::new(0.5, 0.7).unwrap());
    let report = convexity_probe(&target, ctx.dim.min(3), ctx.trials, derive_seed(ctx.seed, &[30]))?;
    Ok(report.max_violation)
}

fn p_young_nonneg(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = f64::NEG_INFINITY;
    for t in 0..ctx.trials {
        let mut g = SplitMix64::new(derive_seed(ctx.seed, &[31, t]));
        let x = P::random_strictly_positive(ctx.dim, g.next_u64());
        let y = P::random_strictly_positive(ctx.dim, g.next_u64());
        let p = 1.1 + 2.5 * g.next_f64();
        worst = fold_max(worst, -young_trace_check(&x, &y, p)?.slack);
    }
    Ok(worst)
}

fn p_young_equality(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let mut g = SplitMix64::new(derive_seed(ctx.seed, &[32, t]));
        let x = P::random_strictly_positive(ctx.dim, g.next_u64());
        let p = 1.2 + 1.6 * g.next_f64();
        let q = p / (p - 1.0);
        let y = P::from_matrix(x.herm().power(p / q)?.into_matrix())?;
        worst = fold_max(worst, young_trace_check(&x, &y, p)?.slack.abs());
    }
    Ok(worst)
}

fn p_zhang_nonneg(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = f64::NEG_INFINITY;
    for t in 0..ctx.trials {
        let mut g = SplitMix64::new(derive_seed(ctx.seed, &[33, t]));
        let dim = 2;
        let draw = |g: &mut SplitMix64| loop {
            let m = ginibre::<f64>(dim, dim, g);
            let sv = m.singular_values();
            if sv[dim - 1] > 1e-2 * sv[0].max(1.0) {
                return m;
            }
        };
        let x = draw(&mut g);
        let y = draw(&mut g);
        let z = draw(&mut g);
        let r1 = 1.2 + 1.3 * g.next_f64();
        let r2 = 1.1 + 1.5 * g.next_f64();
        let r0 = 1.0 / (1.0 / r1 + 1.0 / r2);
        worst = fold_max(worst, -zhang_lower_bound(&x, &y, &z, r0, r1, r2)?.slack);
    }
    Ok(worst)
}

fn p_general_specializes(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let (rho, sigma) = ctx.pair(34, t);
        let params = AlphaZParams::new(1.7, 1.25).unwrap();
        let (alpha, z) = (params.alpha(), params.z());
        let tf =
            TraceFunctionalParams::new(alpha / z, (1.0 - alpha) / z, z, M::identity(ctx.dim))?;
        let via_general = general_trace_functional(&P::from_density(&rho), &sigma, &tf)?;
        let via_psi = renyi_dpi_core::divergences::psi_functional(&rho, &sigma, &params)?;
        worst = fold_max(worst, (via_general - via_psi).abs());
    }
    Ok(worst)
}

fn p_petz_cptp(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let s = derive_seed(ctx.seed, &[35, t]);
        let sigma = P::from_density(&D::random(4, 4, s)?.regularize(0.1)?);
        let chan = if t % 2 == 0 {
            KrausChannel::partial_trace_channel(&[2, 2], &[0])?
        } else {
            KrausChannel::random(4, 4, 2, derive_seed(s, &[1]))?
        };
        let rep = petz_recovery(&sigma, &chan)?.validate_cptp();
        worst = fold_max(worst, rep.tp_residual.max(-rep.choi_min_eig));
    }
    Ok(worst)
}

fn p_petz_recovers(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let s = derive_seed(ctx.seed, &[36, t]);
        let sigma = P::from_density(&D::random(4, 4, s)?.regularize(0.1)?);
        let chan = if t % 2 == 0 {
            KrausChannel::partial_trace_channel(&[2, 2], &[0])?
        } else {
            KrausChannel::random(4, 4, 2, derive_seed(s, &[1]))?
        };
        let petz = petz_recovery(&sigma, &chan)?;
        let recovered = petz.apply(&chan.apply(sigma.matrix())?)?;
        let err = HermitianOperator::from_symmetric_parts(recovered.sub(sigma.matrix()))
            .op_norm()?;
        worst = fold_max(worst, err);
    }
    Ok(worst)
}

fn tensor_instance(ctx: &Ctx, salt: u64, t: u64) -> CliResult<(D, P)> {
    let s = derive_seed(ctx.seed, &[salt, t]);
    let rho_a = D::random(2, 2, derive_seed(s, &[1]))?.regularize(0.1)?;
    let sigma_a = D::random(2, 2, derive_seed(s, &[2]))?.regularize(0.1)?;
    let tau = D::random(2, 2, derive_seed(s, &[3]))?.regularize(0.1)?;
    Ok((
        rho_a.tensor(&tau),
        P::from_matrix(kron(sigma_a.matrix(), tau.matrix()))?,
    ))
}

fn p_tensor_gap(ctx: &Ctx) -> CliResult<f64> {
    let trace_b = KrausChannel::partial_trace_channel(&[2, 2], &[0])?;
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let (rho_ab, sigma_ab) = tensor_instance(ctx, 37, t)?;
        for (alpha, z) in [(1.5, 1.2), (1.9, 1.5)] {
            let params = AlphaZParams::new(alpha, z).unwrap();
            worst = fold_max(worst, dpi_gap(&rho_ab, &sigma_ab, &trace_b, &params)?.abs());
        }
    }
    Ok(worst)
}

fn p_tensor_residual(ctx: &Ctx) -> CliResult<f64> {
    let trace_b = KrausChannel::partial_trace_channel(&[2, 2], &[0])?;
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let (rho_ab, sigma_ab) = tensor_instance(ctx, 38, t)?;
        for (alpha, z) in [(1.5, 1.2), (1.9, 1.5)] {
            let params = AlphaZParams::new(alpha, z).unwrap();
            worst = fold_max(
                worst,
                necessary_residual(&rho_ab, &sigma_ab, &trace_b, &params)?,
            );
        }
    }
    Ok(worst)
}

fn p_coincidence(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let (rho, sigma) = ctx.pair(39, t);
        let chan = KrausChannel::random(ctx.dim, ctx.dim, 2, derive_seed(ctx.seed, &[39, t, 1]))?;
        for alpha in [1.4, 1.9] {
            let params = AlphaZParams::new(alpha, alpha).unwrap();
            let a = necessary_residual(&rho, &sigma, &chan, &params)?;
            let b = sandwiched_residual(&rho, &sigma, &chan, alpha)?;
            worst = fold_max(worst, (a - b).abs());
        }
    }
    Ok(worst)
}

fn p_sufficient_identity(ctx: &Ctx) -> CliResult<f64> {
    // z = alpha instances satisfy the hypothesis; the entropy identity with
    // k_rho must then hold.
    let mut worst = 0.0f64;
    for t in 0..ctx.trials {
        let (rho_ab, sigma_ab) = tensor_instance(ctx, 40, t)?;
        let params = AlphaZParams::new(1.7, 1.7).unwrap();
        let report = sufficient_condition_check(
            &rho_ab,
            &sigma_ab,
            (2, 2),
            &params,
            BipartiteStructure::Product,
        )?;
        if report.necessary_residual <= 1e-8 {
            worst = fold_max(worst, report.entropy_identity_residual.unwrap_or(f64::NAN));
        } else {
            worst = fold_max(worst, f64::INFINITY);
        }
    }
    Ok(worst)
}

fn p_umegaki_bound(ctx: &Ctx) -> CliResult<f64> {
    let mut worst = f64::NEG_INFINITY;
    for t in 0..ctx.trials {
        let s = derive_seed(ctx.seed, &[41, t]);
        let rho = D::random(4, 4, derive_seed(s, &[1]))?.regularize(0.05)?;
        let sigma = D::random(4, 4, derive_seed(s, &[2]))?.regularize(0.05)?;
        let check = umegaki_error_bound_check(&rho, &sigma, (2, 2))?;
        worst = fold_max(worst, -check.slack);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_default_seed() {
        let out = run_suite(0, 6, 3, None).unwrap();
        assert!(
            out.all_pass,
            "failing: {:?}",
            out.failing_names()
                .iter()
                .map(|n| {
                    let r = out.results.iter().find(|r| r.name == *n).unwrap();
                    format!("{} ({} > {})", r.name, r.max_violation, r.tolerance)
                })
                .collect::<Vec<_>>()
        );
        assert_eq!(out.results.len(), property_table().len());
    }

    #[test]
    fn zero_trials_warns_and_passes() {
        let out = run_suite(0, 0, 3, None).unwrap();
        assert!(out.all_pass);
        assert!(out.results.is_empty());
        assert!(out.warning.is_some());
    }

    #[test]
    fn injected_bug_trips_reduction_identity() {
        let out = run_suite(0, 4, 3, Some(Fault::PsiSignFlip)).unwrap();
        assert!(!out.all_pass);
        let failing = out.failing_names();
        assert!(
            failing.contains(&"div_reduction_identity"),
            "failing set: {failing:?}"
        );
    }
}
