//! Variational machinery behind the DPI: the general convex/concave trace
//! functional, the variational form of the trace functional with its
//! closed-form maximizer, trace inequalities (Young, Zhang), and randomized
//! midpoint convexity/concavity probes for every claim in that family.
//!
//! Probes never prove anything; they search for counterexamples at a fixed
//! tolerance and report. Violations are measured relative to
//! `max(1, |values|)` so that verdicts are comparable across parameter
//! ranges where the functionals span orders of magnitude.

use serde::{Deserialize, Serialize};

use crate::divergences::{classify_region, psi_functional, AlphaZParams, RegionClass};
use crate::error::{Error, Result};
use crate::linalg::{abs_power_trace, ComplexMatrix, HermitianOperator};
use crate::rng::{derive_seed, SplitMix64};
use crate::scalar::{real, Scalar};
use crate::states::{ginibre, DensityOperator, PositiveOperator};

/// Probe verdict threshold: normalized violations above this falsify.
pub const PROBE_TOL: f64 = 1e-8;
/// Smallest admissible singular value for "invertible" inputs.
pub const INVERTIBILITY_FLOOR: f64 = 1e-10;

/// Parameters of the general trace functional
/// `(A, B) -> Tr[(B^{q/2} K^dagger A^p K B^{q/2})^s]`.
#[derive(Debug, Clone)]
pub struct TraceFunctionalParams<T> {
    pub p: T,
    pub q: T,
    pub s: T,
    k: ComplexMatrix<T>,
}

impl<T: Scalar> TraceFunctionalParams<T> {
    pub fn new(p: T, q: T, s: T, k: ComplexMatrix<T>) -> Result<Self> {
        if !(s > T::zero()) {
            return Err(Error::InvalidParams(format!("s must be positive, got {s}")));
        }
        let _ = k.dim()?;
        let smin = k.singular_values().last().copied().unwrap_or(T::zero());
        if smin <= real::<T>(INVERTIBILITY_FLOOR) {
            return Err(Error::SingularMatrix {
                min: smin.to_f64_lossy(),
            });
        }
        Ok(Self { p, q, s, k })
    }

    pub fn k(&self) -> &ComplexMatrix<T> {
        &self.k
    }
}

/// `Tr[(B^{q/2} K^dagger A^p K B^{q/2})^s]`.
pub fn general_trace_functional<T: Scalar>(
    a: &PositiveOperator<T>,
    b: &PositiveOperator<T>,
    tf: &TraceFunctionalParams<T>,
) -> Result<T> {
    if a.dim() != b.dim() || a.dim() != tf.k.rows() {
        return Err(Error::DimensionMismatch(format!(
            "operands must share the K dimension {}, got {} and {}",
            tf.k.rows(),
            a.dim(),
            b.dim()
        )));
    }
    let a_p = a.herm().power(tf.p)?;
    let b_q2 = b.herm().power(tf.q / (T::one() + T::one()))?;
    let inner = b_q2
        .matrix()
        .matmul(&tf.k.adjoint())
        .matmul(a_p.matrix())
        .matmul(&tf.k)
        .matmul(b_q2.matrix());
    let m = HermitianOperator::from_symmetric_parts(inner);
    let value = m
        .eig()?
        .eigenvalues
        .iter()
        .map(|&l| {
            let l = l.max(T::zero());
            if l > T::zero() {
                l.powf(tf.s)
            } else {
                T::zero()
            }
        })
        .fold(T::zero(), |acc, v| acc + v);
    Ok(value)
}

fn require_variational_regime<T: Scalar>(params: &AlphaZParams<T>) -> Result<()> {
    if params.alpha() <= T::one() || params.z() <= T::one() {
        return Err(Error::InvalidParams(format!(
            "the variational form needs alpha > 1 and z > 1, got alpha = {}, z = {}",
            params.alpha(),
            params.z()
        )));
    }
    Ok(())
}

/// The variational lower bound
/// `f(H, rho, sigma) = z Tr(sigma^{(z-alpha)/2z} rho^{alpha/z}
/// sigma^{(z-alpha)/2z} H) - (z-1) Tr[(sigma^{(z-1)/2z} H
/// sigma^{(z-1)/2z})^{z/(z-1)}]`, defined for `alpha > 1`, `z > 1`.
///
/// Its supremum over positive `H` is the trace functional, attained at
/// [`optimal_h`].
pub fn f_functional<T: Scalar>(
    h: &PositiveOperator<T>,
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    params: &AlphaZParams<T>,
) -> Result<T> {
    require_variational_regime(params)?;
    let (alpha, z) = (params.alpha(), params.z());
    let two = T::one() + T::one();
    let rho_p = rho.herm().power(alpha / z)?;
    let s_mid = sigma.herm().power((z - alpha) / (two * z))?;
    let first = crate::linalg::hs_inner(
        &s_mid.matrix().matmul(rho_p.matrix()).matmul(s_mid.matrix()),
        h.matrix(),
    )?
    .re;

    let s_edge = sigma.herm().power((z - T::one()) / (two * z))?;
    let sandwiched_h = HermitianOperator::from_symmetric_parts(
        s_edge.matrix().matmul(h.matrix()).matmul(s_edge.matrix()),
    );
    let second = sandwiched_h
        .eig()?
        .eigenvalues
        .iter()
        .map(|&l| {
            let l = l.max(T::zero());
            if l > T::zero() {
                l.powf(z / (z - T::one()))
            } else {
                T::zero()
            }
        })
        .fold(T::zero(), |acc, v| acc + v);
    Ok(z * first - (z - T::one()) * second)
}

/// Closed-form maximizer `H = sigma^{(1-z)/2z} (sigma^{(1-alpha)/2z}
/// rho^{alpha/z} sigma^{(1-alpha)/2z})^{z-1} sigma^{(1-z)/2z}`.
pub fn optimal_h<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    params: &AlphaZParams<T>,
) -> Result<PositiveOperator<T>> {
    require_variational_regime(params)?;
    let (alpha, z) = (params.alpha(), params.z());
    let two = T::one() + T::one();
    let rho_p = rho.herm().power(alpha / z)?;
    let s_in = sigma.herm().power((T::one() - alpha) / (two * z))?;
    let core = HermitianOperator::from_symmetric_parts(
        s_in.matrix().matmul(rho_p.matrix()).matmul(s_in.matrix()),
    )
    .power(z - T::one())?;
    let s_out = sigma.herm().power((T::one() - z) / (two * z))?;
    let m = s_out.matrix().matmul(core.matrix()).matmul(s_out.matrix());
    PositiveOperator::from_matrix(m)
}

/// Whether a probe found a violation beyond tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
}

/// Outcome of a randomized probe campaign. `max_violation` is the largest
/// signed violation seen, normalized by instance scale; negative numbers
/// mean the inequality held with margin everywhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub trials: u64,
    pub max_violation: f64,
    pub verdict: Verdict,
    pub worst_instance_seed: u64,
}

impl<T: Scalar> ProbeTarget<T> {
    /// Stable name and parameter map for reports.
    pub fn describe(&self) -> (&'static str, serde_json::Value) {
        use serde_json::json;
        match self {
            ProbeTarget::PsiJointConvex(p) => (
                "psi_joint_convex",
                json!({"alpha": p.alpha().to_f64_lossy(), "z": p.z().to_f64_lossy()}),
            ),
            ProbeTarget::PsiJointConcave(p) => (
                "psi_joint_concave",
                json!({"alpha": p.alpha().to_f64_lossy(), "z": p.z().to_f64_lossy()}),
            ),
            ProbeTarget::GeneralFunctional { p, q, s } => (
                "general_trace_functional",
                json!({
                    "p": p.to_f64_lossy(),
                    "q": q.to_f64_lossy(),
                    "s": s.to_f64_lossy()
                }),
            ),
            ProbeTarget::FixedB { p } => ("fixed_b_power_trace", json!({"p": p.to_f64_lossy()})),
            ProbeTarget::PickTrace { p } => ("conjugated_power_trace", json!({"p": p.to_f64_lossy()})),
            ProbeTarget::FJointConvex(p) => (
                "variational_bound_joint_convex",
                json!({"alpha": p.alpha().to_f64_lossy(), "z": p.z().to_f64_lossy()}),
            ),
        }
    }
}

/// The probe-report JSON shape:
/// `{target, params, trials, max_violation, verdict, worst_instance_seed}`.
pub fn probe_report_json<T: Scalar>(
    target: &ProbeTarget<T>,
    report: &ProbeReport,
) -> serde_json::Value {
    let (name, params) = target.describe();
    serde_json::json!({
        "target": name,
        "params": params,
        "trials": report.trials,
        "max_violation": report.max_violation,
        "verdict": report.verdict,
        "worst_instance_seed": report.worst_instance_seed,
    })
}

impl ProbeReport {
    fn from_trials(trials: u64, max_violation: f64, worst_instance_seed: u64) -> Self {
        let verdict = if max_violation > PROBE_TOL {
            Verdict::Violated
        } else {
            Verdict::Consistent
        };
        Self {
            trials,
            max_violation,
            verdict,
            worst_instance_seed,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }
}

/// Checks that `f(H) <= Psi` over random positive `H` (globally sampled and
/// perturbations of the maximizer), and that the closed-form maximizer
/// attains `Psi`.
pub fn verify_supremum<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &PositiveOperator<T>,
    params: &AlphaZParams<T>,
    trials: u64,
    seed: u64,
) -> Result<ProbeReport> {
    require_variational_regime(params)?;
    let psi = psi_functional(rho, sigma, params)?;
    let scale = T::one().max(psi.abs());
    let h_star = optimal_h(rho, sigma, params)?;
    let f_star = f_functional(&h_star, rho, sigma, params)?;

    let mut max_violation = ((f_star - psi).abs() / scale).to_f64_lossy();
    let mut worst = seed;
    let dim = rho.dim();
    for t in 0..trials {
        let trial_seed = derive_seed(seed, &[t]);
        let mut g = SplitMix64::new(trial_seed);
        let h = if t % 2 == 0 {
            PositiveOperator::random_strictly_positive(dim, trial_seed)
        } else {
            perturb_positive(&h_star, real::<T>(0.25), &mut g)?
        };
        let f = f_functional(&h, rho, sigma, params)?;
        let violation = ((f - psi) / scale).to_f64_lossy();
        if violation > max_violation {
            max_violation = violation;
            worst = trial_seed;
        }
    }
    Ok(ProbeReport::from_trials(trials, max_violation, worst))
}

/// Positive perturbation of `base`, shifted back to strict positivity if the
/// noise pushes an eigenvalue down to the floor.
fn perturb_positive<T: Scalar>(
    base: &PositiveOperator<T>,
    relative: T,
    g: &mut SplitMix64,
) -> Result<PositiveOperator<T>> {
    let dim = base.dim();
    let noise = ginibre::<T>(dim, dim, g);
    let noise = HermitianOperator::from_symmetric_parts(noise);
    let amp = relative * base.herm().op_norm()?.max(real::<T>(1e-3));
    let m = base.matrix().add(&noise.matrix().scale_re(amp));
    let h = HermitianOperator::from_symmetric_parts(m);
    let min = h.min_eigenvalue()?;
    let floor = real::<T>(1e-6);
    let shifted = if min <= floor {
        h.matrix().add(&ComplexMatrix::identity(dim).scale_re(floor - min + floor))
    } else {
        h.into_matrix()
    };
    PositiveOperator::from_matrix(shifted)
}

/// Lhs/rhs of a trace inequality, with `slack = rhs side that must dominate
/// minus the dominated side` as documented per operation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InequalityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub slack: T,
}

/// Young-type trace inequality `p Tr(XY) - (p/q) Tr(Y^q) <= Tr(X^p)` with
/// `q = p/(p-1)`; `slack = rhs - lhs >= 0`, vanishing iff `X^p = Y^q`.
pub fn young_trace_check<T: Scalar>(
    x: &PositiveOperator<T>,
    y: &PositiveOperator<T>,
    p: T,
) -> Result<InequalityCheck<T>> {
    if !(p > T::one()) {
        return Err(Error::InvalidP { p: p.to_f64_lossy() });
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch("Young check needs equal dimensions".into()));
    }
    let q = p / (p - T::one());
    let tr_xy = crate::linalg::hs_inner(x.matrix(), y.matrix())?.re;
    let tr_yq = trace_power(y, q)?;
    let tr_xp = trace_power(x, p)?;
    let lhs = p * tr_xy - (p / q) * tr_yq;
    let rhs = tr_xp;
    Ok(InequalityCheck { lhs, rhs, slack: rhs - lhs })
}

fn trace_power<T: Scalar>(x: &PositiveOperator<T>, p: T) -> Result<T> {
    Ok(x.herm()
        .eig()?
        .eigenvalues
        .iter()
        .map(|&l| {
            let l = l.max(T::zero());
            if l > T::zero() {
                l.powf(p)
            } else {
                T::zero()
            }
        })
        .fold(T::zero(), |a, b| a + b))
}

fn ensure_invertible<T: Scalar>(m: &ComplexMatrix<T>) -> Result<()> {
    let sv = m.singular_values();
    let smax = sv.first().copied().unwrap_or(T::zero());
    let smin = sv.last().copied().unwrap_or(T::zero());
    if smin <= real::<T>(INVERTIBILITY_FLOOR) * smax.max(T::one()) {
        return Err(Error::SingularMatrix {
            min: smin.to_f64_lossy(),
        });
    }
    Ok(())
}

/// The variational trace inequality
/// `Tr|XY|^{r1} >= (r1/r0) Tr|XZ|^{r0} - (r1/r2) Tr|Y^{-1}Z|^{r2}` for
/// exponents with `1/r0 = 1/r1 + 1/r2`; `slack = lhs - rhs >= 0`, and the
/// maximum over invertible `Z` attains equality.
pub fn zhang_lower_bound<T: Scalar>(
    x: &ComplexMatrix<T>,
    y: &ComplexMatrix<T>,
    z: &ComplexMatrix<T>,
    r0: T,
    r1: T,
    r2: T,
) -> Result<InequalityCheck<T>> {
    check_zhang_exponents(r0, r1, r2)?;
    for m in [x, y, z] {
        let _ = m.dim()?;
        ensure_invertible(m)?;
    }
    let lhs = abs_power_trace(&x.matmul(y), r1);
    let rhs = zhang_objective(x, &y.inverse()?, z, r0, r1, r2);
    Ok(InequalityCheck { lhs, rhs, slack: lhs - rhs })
}

fn check_zhang_exponents<T: Scalar>(r0: T, r1: T, r2: T) -> Result<()> {
    if !(r0 > T::zero() && r1 > T::zero() && r2 > T::zero()) {
        return Err(Error::InvalidParams("Zhang exponents must be positive".into()));
    }
    let residual = (T::one() / r0 - T::one() / r1 - T::one() / r2).abs();
    if residual > real::<T>(1e-12) {
        return Err(Error::ExponentMismatch {
            residual: residual.to_f64_lossy(),
        });
    }
    Ok(())
}

fn zhang_objective<T: Scalar>(
    x: &ComplexMatrix<T>,
    y_inv: &ComplexMatrix<T>,
    z: &ComplexMatrix<T>,
    r0: T,
    r1: T,
    r2: T,
) -> T {
    (r1 / r0) * abs_power_trace(&x.matmul(z), r0) - (r1 / r2) * abs_power_trace(&y_inv.matmul(z), r2)
}

/// The `Z` attaining equality in [`zhang_lower_bound`], built from the
/// singular value decomposition of `XY`: with `XY = U S V^dagger`,
/// `Z = Y V S^{r0/(r2-r0)} V^dagger`.
pub fn zhang_optimal_z<T: Scalar>(
    x: &ComplexMatrix<T>,
    y: &ComplexMatrix<T>,
    r0: T,
    r2: T,
) -> Result<ComplexMatrix<T>> {
    let xy = x.matmul(y);
    ensure_invertible(&xy)?;
    // Right singular vectors and singular values from the Gram matrix.
    let gram = HermitianOperator::from_symmetric_parts(xy.adjoint().matmul(&xy));
    let eig = gram.eig()?;
    let exponent = r0 / (r2 - r0);
    let n = xy.dim()?;
    let mut scaled = eig.basis.clone();
    for j in 0..n {
        let s = eig.eigenvalues[j].max(T::zero()).sqrt();
        let g = s.powf(exponent);
        for i in 0..n {
            scaled[(i, j)] = scaled[(i, j)].scale(g);
        }
    }
    let spectral = scaled.matmul(&eig.basis.adjoint());
    Ok(y.matmul(&spectral))
}

/// Coordinate-ascent search for the maximizing `Z` in
/// [`zhang_lower_bound`]. Each step perturbs one real coordinate of `Z`,
/// keeping improvements; the step size adapts. Returns the best objective
/// and the best `Z`. Best effort: a maximizer exists (see
/// [`zhang_optimal_z`]), but the search is only guaranteed to find a local
/// one; on 2x2 inputs it reaches the global value in practice.
pub fn zhang_attainment_search<T: Scalar>(
    x: &ComplexMatrix<T>,
    y: &ComplexMatrix<T>,
    r0: T,
    r1: T,
    r2: T,
    steps: usize,
    seed: u64,
) -> Result<(T, ComplexMatrix<T>)> {
    check_zhang_exponents(r0, r1, r2)?;
    ensure_invertible(x)?;
    ensure_invertible(y)?;
    let n = x.dim()?;
    let y_inv = y.inverse()?;
    let mut g = SplitMix64::new(seed);
    // Start at Y (so Y^{-1} Z = I) plus a small random kick.
    let mut z = y.add(&ginibre::<T>(n, n, &mut g).scale_re(real::<T>(0.05)));
    let mut best = zhang_objective(x, &y_inv, &z, r0, r1, r2);
    let mut step = real::<T>(0.5) * y.max_abs_entry().max(T::one());

    for _ in 0..steps {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                for comp in 0..2 {
                    for dir in [T::one(), -T::one()] {
                        let mut cand = z.clone();
                        let delta = step * dir;
                        let cur = cand[(i, j)];
                        cand[(i, j)] = if comp == 0 {
                            num_complex::Complex::new(cur.re + delta, cur.im)
                        } else {
                            num_complex::Complex::new(cur.re, cur.im + delta)
                        };
                        if ensure_invertible(&cand).is_err() {
                            continue;
                        }
                        let val = zhang_objective(x, &y_inv, &cand, r0, r1, r2);
                        if val > best {
                            best = val;
                            z = cand;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            step *= real::<T>(0.5);
            if step < real::<T>(1e-10) {
                break;
            }
        }
    }
    Ok((best, z))
}

/// A functional whose claimed convexity or concavity a probe exercises.
#[derive(Debug, Clone)]
pub enum ProbeTarget<T> {
    /// Joint convexity of the trace functional for `1 < alpha <= 2`,
    /// `alpha/2 <= z <= alpha`.
    PsiJointConvex(AlphaZParams<T>),
    /// Joint concavity of the trace functional for `0 < alpha < 1`,
    /// `z >= max(alpha, 1 - alpha)`.
    PsiJointConcave(AlphaZParams<T>),
    /// The general functional `(A, B) -> Tr[(B^{q/2} K^dagger A^p K
    /// B^{q/2})^s]` in its three known joint convexity/concavity regimes;
    /// `K` is drawn fresh per trial.
    GeneralFunctional { p: T, q: T, s: T },
    /// `A -> Tr[(B^dagger A^p B)^{1/p}]`: concave on `0 < p <= 1`, convex
    /// on `1 <= p <= 2`.
    FixedB { p: T },
    /// `X -> Tr[{Z^dagger X^{p/2} Z A Z^dagger X^{p/2} Z}^{1/p}]` for
    /// `0 < p < 1`: claimed concave in `X` for positive `A`, under a
    /// hypothesis on `X` that is not a checkable predicate. The probe
    /// samples unrestricted positive `X` (and non-unitary `Z`), so a
    /// `Violated` verdict is an expected, reportable outcome rather than a
    /// contradiction; for unitary `Z` the map reduces to the fixed-B
    /// functional and concavity is unconditional.
    PickTrace { p: T },
    /// Joint convexity of the variational lower bound in `(rho, sigma)` at
    /// fixed positive `H`, for `1 < z <= alpha <= 2z`.
    FJointConvex(AlphaZParams<T>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Curvature {
    Convex,
    Concave,
}

fn general_functional_curvature<T: Scalar>(p: T, q: T, s: T) -> Result<Curvature> {
    let (zero, one) = (T::zero(), T::one());
    let two = one + one;
    if !(p >= q) || !(s > zero) {
        return Err(Error::InvalidRegime(format!(
            "the general functional needs p >= q and s > 0, got p = {p}, q = {q}, s = {s}"
        )));
    }
    if q >= zero && p <= one && p + q > zero && s <= one / (p + q) {
        return Ok(Curvature::Concave);
    }
    if q >= -one && p <= zero && s > zero {
        return Ok(Curvature::Convex);
    }
    if (-one <= q && q <= zero)
        && (one <= p && p <= two)
        && !(p == one && q == -one)
        && p + q > zero
        && s >= one / (p + q)
    {
        return Ok(Curvature::Convex);
    }
    Err(Error::InvalidRegime(format!(
        "(p, q, s) = ({p}, {q}, {s}) is outside the three known regimes"
    )))
}

/// Randomized midpoint convexity/concavity probe.
///
/// For `trials` seeded instance pairs the probe compares the functional at
/// convex combinations (`lambda` in `{1/4, 1/2, 3/4}`) against the chord,
/// reporting the largest signed violation normalized by the instance scale.
/// A `Violated` verdict means a genuine counterexample at tolerance
/// [`PROBE_TOL`]; `Consistent` means the claim survived this campaign.
pub fn convexity_probe<T: Scalar>(
    target: &ProbeTarget<T>,
    dim: usize,
    trials: u64,
    seed: u64,
) -> Result<ProbeReport> {
    validate_probe_regime(target)?;
    let lambdas = [real::<T>(0.25), real::<T>(0.5), real::<T>(0.75)];
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst = seed;
    for t in 0..trials {
        let trial_seed = derive_seed(seed, &[t]);
        let violation = probe_trial(target, dim, trial_seed, &lambdas)?;
        if violation > max_violation {
            max_violation = violation;
            worst = trial_seed;
        }
    }
    if trials == 0 {
        max_violation = 0.0;
    }
    Ok(ProbeReport::from_trials(trials, max_violation, worst))
}

fn validate_probe_regime<T: Scalar>(target: &ProbeTarget<T>) -> Result<()> {
    let one = T::one();
    match target {
        ProbeTarget::PsiJointConvex(params) => {
            if classify_region(params.alpha(), params.z())? != RegionClass::MonotoneCase2 {
                return Err(Error::InvalidRegime(format!(
                    "joint convexity is claimed for 1 < alpha <= 2, alpha/2 <= z <= alpha; got ({}, {})",
                    params.alpha(),
                    params.z()
                )));
            }
        }
        ProbeTarget::PsiJointConcave(params) => {
            if classify_region(params.alpha(), params.z())? != RegionClass::MonotoneCase1 {
                return Err(Error::InvalidRegime(format!(
                    "joint concavity is claimed for 0 < alpha < 1, z >= max(alpha, 1-alpha); got ({}, {})",
                    params.alpha(),
                    params.z()
                )));
            }
        }
        ProbeTarget::GeneralFunctional { p, q, s } => {
            let _ = general_functional_curvature(*p, *q, *s)?;
        }
        ProbeTarget::FixedB { p } => {
            if !(*p > T::zero() && *p <= one + one) {
                return Err(Error::InvalidRegime(format!(
                    "the fixed-B functional is classified on 0 < p <= 2 with p != 0, got {p}"
                )));
            }
        }
        ProbeTarget::PickTrace { p } => {
            if !(*p > T::zero() && *p < one) {
                return Err(Error::InvalidRegime(format!(
                    "the conjugated trace map is claimed concave for 0 < p < 1, got {p}"
                )));
            }
        }
        ProbeTarget::FJointConvex(params) => {
            let (alpha, z) = (params.alpha(), params.z());
            if !(z > one && z <= alpha && alpha <= z + z) {
                return Err(Error::InvalidRegime(format!(
                    "joint convexity of the variational bound needs 1 < z <= alpha <= 2z, got ({alpha}, {z})"
                )));
            }
        }
    }
    Ok(())
}

fn probe_trial<T: Scalar>(
    target: &ProbeTarget<T>,
    dim: usize,
    trial_seed: u64,
    lambdas: &[T],
) -> Result<f64> {
    match target {
        ProbeTarget::PsiJointConvex(params) | ProbeTarget::PsiJointConcave(params) => {
            let curvature = if matches!(target, ProbeTarget::PsiJointConvex(_)) {
                Curvature::Convex
            } else {
                Curvature::Concave
            };
            let (rho1, sigma1) = density_pair(dim, derive_seed(trial_seed, &[1]));
            let (rho2, sigma2) = density_pair(dim, derive_seed(trial_seed, &[2]));
            let eval = |rho: &DensityOperator<T>, sigma: &PositiveOperator<T>| {
                psi_functional(rho, sigma, params)
            };
            jensen_violation_pairs(
                curvature,
                lambdas,
                (&rho1, &sigma1),
                (&rho2, &sigma2),
                eval,
            )
        }
        ProbeTarget::GeneralFunctional { p, q, s } => {
            let curvature = general_functional_curvature(*p, *q, *s)?;
            let mut g = SplitMix64::new(derive_seed(trial_seed, &[3]));
            let k = invertible_matrix(dim, &mut g);
            let tf = TraceFunctionalParams::new(*p, *q, *s, k)?;
            let a1 = PositiveOperator::random_strictly_positive(dim, derive_seed(trial_seed, &[4]));
            let b1 = PositiveOperator::random_strictly_positive(dim, derive_seed(trial_seed, &[5]));
            let a2 = PositiveOperator::random_strictly_positive(dim, derive_seed(trial_seed, &[6]));
            let b2 = PositiveOperator::random_strictly_positive(dim, derive_seed(trial_seed, &[7]));
            let eval =
                |a: &PositiveOperator<T>, b: &PositiveOperator<T>| general_trace_functional(a, b, &tf);
            jensen_violation_pairs(curvature, lambdas, (&a1, &b1), (&a2, &b2), eval)
        }
        ProbeTarget::FixedB { p } => {
            let curvature = if *p < T::one() {
                Curvature::Concave
            } else {
                Curvature::Convex
            };
            let mut g = SplitMix64::new(derive_seed(trial_seed, &[8]));
            let b = invertible_matrix(dim, &mut g);
            let a1 = PositiveOperator::random_strictly_positive(dim, derive_seed(trial_seed, &[9]));
            let a2 = PositiveOperator::random_strictly_positive(dim, derive_seed(trial_seed, &[10]));
            let eval = |a: &PositiveOperator<T>| -> Result<T> {
                let a_p = a.herm().power(*p)?;
                let inner = b.adjoint().matmul(a_p.matrix()).matmul(&b);
                let m = HermitianOperator::from_symmetric_parts(inner);
                trace_power(&PositiveOperator::from_matrix(clip_psd(&m))?, T::one() / *p)
            };
            jensen_violation_single(curvature, lambdas, &a1, &a2, eval)
        }
        ProbeTarget::PickTrace { p } => {
            let mut g = SplitMix64::new(derive_seed(trial_seed, &[11]));
            let z = invertible_matrix(dim, &mut g);
            let a = PositiveOperator::random_strictly_positive(dim, derive_seed(trial_seed, &[12]));
            let x1 = PositiveOperator::random_strictly_positive(dim, derive_seed(trial_seed, &[13]));
            let x2 = PositiveOperator::random_strictly_positive(dim, derive_seed(trial_seed, &[14]));
            let eval = |x: &PositiveOperator<T>| -> Result<T> {
                let phi = z
                    .adjoint()
                    .matmul(x.herm().power(*p / (T::one() + T::one()))?.matrix())
                    .matmul(&z);
                let inner = phi.matmul(a.matrix()).matmul(&phi);
                let m = HermitianOperator::from_symmetric_parts(inner);
                trace_power(&PositiveOperator::from_matrix(clip_psd(&m))?, T::one() / *p)
            };
            jensen_violation_single(Curvature::Concave, lambdas, &x1, &x2, eval)
        }
        ProbeTarget::FJointConvex(params) => {
            let h = PositiveOperator::random_strictly_positive(dim, derive_seed(trial_seed, &[15]));
            let (rho1, sigma1) = density_pair(dim, derive_seed(trial_seed, &[16]));
            let (rho2, sigma2) = density_pair(dim, derive_seed(trial_seed, &[17]));
            let eval = |rho: &DensityOperator<T>, sigma: &PositiveOperator<T>| {
                f_functional(&h, rho, sigma, params)
            };
            jensen_violation_pairs(
                Curvature::Convex,
                lambdas,
                (&rho1, &sigma1),
                (&rho2, &sigma2),
                eval,
            )
        }
    }
}

fn clip_psd<T: Scalar>(m: &HermitianOperator<T>) -> ComplexMatrix<T> {
    // Congruences of PSD matrices can dip an eigenvalue a few ulps below
    // zero; clip before re-validating.
    m.eig()
        .expect("Hermitian by construction")
        .map_eigenvalues(|l| l.max(T::zero()))
}

fn density_pair<T: Scalar>(dim: usize, seed: u64) -> (DensityOperator<T>, PositiveOperator<T>) {
    let rho = DensityOperator::random(dim, dim, derive_seed(seed, &[100]))
        .expect("valid rank")
        .regularize(real::<T>(0.05))
        .expect("valid epsilon");
    let sigma = DensityOperator::random(dim, dim, derive_seed(seed, &[101]))
        .expect("valid rank")
        .regularize(real::<T>(0.05))
        .expect("valid epsilon");
    (rho, PositiveOperator::from_density(&sigma))
}

fn invertible_matrix<T: Scalar>(dim: usize, g: &mut SplitMix64) -> ComplexMatrix<T> {
    loop {
        let m = ginibre::<T>(dim, dim, g);
        if ensure_invertible(&m).is_ok() {
            let sv = m.singular_values();
            let (smax, smin) = (sv[0], sv[sv.len() - 1]);
            if smin > real::<T>(1e-2) * smax {
                return m;
            }
        }
    }
}

fn jensen_violation_pairs<T: Scalar, A, B>(
    curvature: Curvature,
    lambdas: &[T],
    first: (&A, &B),
    second: (&A, &B),
    eval: impl Fn(&A, &B) -> Result<T>,
) -> Result<f64>
where
    A: Mixable<T>,
    B: Mixable<T>,
{
    let v1 = eval(first.0, first.1)?;
    let v2 = eval(second.0, second.1)?;
    let mut worst = f64::NEG_INFINITY;
    for &lam in lambdas {
        let a = first.0.mix(second.0, lam)?;
        let b = first.1.mix(second.1, lam)?;
        let mid = eval(&a, &b)?;
        let chord = lam * v1 + (T::one() - lam) * v2;
        let scale = T::one().max(v1.abs()).max(v2.abs()).max(mid.abs());
        let violation = match curvature {
            Curvature::Convex => (mid - chord) / scale,
            Curvature::Concave => (chord - mid) / scale,
        };
        worst = worst.max(violation.to_f64_lossy());
    }
    Ok(worst)
}

fn jensen_violation_single<T: Scalar, A>(
    curvature: Curvature,
    lambdas: &[T],
    first: &A,
    second: &A,
    eval: impl Fn(&A) -> Result<T>,
) -> Result<f64>
where
    A: Mixable<T>,
{
    let v1 = eval(first)?;
    let v2 = eval(second)?;
    let mut worst = f64::NEG_INFINITY;
    for &lam in lambdas {
        let a = first.mix(second, lam)?;
        let mid = eval(&a)?;
        let chord = lam * v1 + (T::one() - lam) * v2;
        let scale = T::one().max(v1.abs()).max(v2.abs()).max(mid.abs());
        let violation = match curvature {
            Curvature::Convex => (mid - chord) / scale,
            Curvature::Concave => (chord - mid) / scale,
        };
        worst = worst.max(violation.to_f64_lossy());
    }
    Ok(worst)
}

/// Convex combination `lam * self + (1 - lam) * other` within a type that
/// stays in its class under mixing.
trait Mixable<T>: Sized {
    fn mix(&self, other: &Self, lam: T) -> Result<Self>;
}

impl<T: Scalar> Mixable<T> for DensityOperator<T> {
    fn mix(&self, other: &Self, lam: T) -> Result<Self> {
        let m = self
            .matrix()
            .scale_re(lam)
            .add(&other.matrix().scale_re(T::one() - lam));
        DensityOperator::from_matrix(m)
    }
}

impl<T: Scalar> Mixable<T> for PositiveOperator<T> {
    fn mix(&self, other: &Self, lam: T) -> Result<Self> {
        let m = self
            .matrix()
            .scale_re(lam)
            .add(&other.matrix().scale_re(T::one() - lam));
        PositiveOperator::from_matrix(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;

    type M = ComplexMatrix<f64>;
    type P = PositiveOperator<f64>;
    type D = DensityOperator<f64>;

    fn full_rank_pair(dim: usize, seed: u64) -> (D, P) {
        let rho = D::random(dim, dim, seed).unwrap().regularize(0.08).unwrap();
        let sigma = D::random(dim, dim, seed.wrapping_add(31))
            .unwrap()
            .regularize(0.08)
            .unwrap();
        (rho, P::from_density(&sigma))
    }

    #[test]
    fn general_functional_identity_inputs() {
        let tf = TraceFunctionalParams::new(0.5, 0.3, 1.1, M::identity(3)).unwrap();
        let id = P::identity(3);
        let v = general_trace_functional(&id, &id, &tf).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn general_functional_diagonal_scalar_formula() {
        let a = P::from_matrix(M::diag(&[0.4, 1.7])).unwrap();
        let b = P::from_matrix(M::diag(&[2.0, 0.3])).unwrap();
        let (p, q, s) = (0.8, 0.4, 0.9);
        let tf = TraceFunctionalParams::new(p, q, s, M::identity(2)).unwrap();
        let got = general_trace_functional(&a, &b, &tf).unwrap();
        let expect: f64 = [(0.4f64, 2.0f64), (1.7, 0.3)]
            .iter()
            .map(|&(ai, bi)| (ai.powf(p) * bi.powf(q)).powf(s))
            .sum();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn general_functional_specializes_to_psi() {
        let (rho, sigma) = full_rank_pair(3, 2);
        let params = AlphaZParams::new(1.7, 1.25).unwrap();
        let (alpha, z) = (params.alpha(), params.z());
        let tf = TraceFunctionalParams::new(alpha / z, (1.0 - alpha) / z, z, M::identity(3)).unwrap();
        let via_general =
            general_trace_functional(&P::from_density(&rho), &sigma, &tf).unwrap();
        let via_psi = psi_functional(&rho, &sigma, &params).unwrap();
        assert!((via_general - via_psi).abs() < 1e-12);
    }

    #[test]
    fn trace_functional_params_require_invertible_k() {
        let singular = M::from_rows(vec![
            vec![num_complex::Complex::new(1.0, 0.0), num_complex::Complex::new(1.0, 0.0)],
            vec![num_complex::Complex::new(1.0, 0.0), num_complex::Complex::new(1.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(
            TraceFunctionalParams::new(1.0, 0.5, 1.0, singular),
            Err(Error::SingularMatrix { .. })
        ));
        assert!(TraceFunctionalParams::new(1.0, 0.5, 0.0, M::identity(2)).is_err());
    }

    #[test]
    fn f_functional_on_equal_states_with_identity_h() {
        let rho = D::random(3, 3, 4).unwrap().regularize(0.1).unwrap();
        let sigma = P::from_density(&rho);
        let params = AlphaZParams::new(1.8, 1.4).unwrap();
        let h = P::identity(3);
        let f = f_functional(&h, &rho, &sigma, &params).unwrap();
        assert!((f - 1.0).abs() < 1e-10, "f = {f}");
    }

    #[test]
    fn f_functional_rejects_bad_regime() {
        let (rho, sigma) = full_rank_pair(2, 5);
        let h = P::identity(2);
        for (alpha, z) in [(0.5, 1.5), (1.5, 0.9), (0.5, 0.5)] {
            let params = AlphaZParams::new(alpha, z).unwrap();
            assert!(matches!(
                f_functional(&h, &rho, &sigma, &params),
                Err(Error::InvalidParams(_))
            ));
        }
    }

    #[test]
    fn optimal_h_attains_psi() {
        for seed in 0..8u64 {
            let (rho, sigma) = full_rank_pair(3, seed);
            for (alpha, z) in [(1.8, 1.4), (2.0, 1.6), (1.3, 1.2)] {
                let params = AlphaZParams::new(alpha, z).unwrap();
                let h = optimal_h(&rho, &sigma, &params).unwrap();
                assert!(h.is_strictly_positive());
                let f = f_functional(&h, &rho, &sigma, &params).unwrap();
                let psi = psi_functional(&rho, &sigma, &params).unwrap();
                let rel = (f - psi).abs() / psi.abs().max(1.0);
                assert!(rel < 1e-8, "relative gap {rel} at ({alpha}, {z})");
            }
        }
    }

    #[test]
    fn optimal_h_identity_when_states_match() {
        let rho = D::random(2, 2, 12).unwrap().regularize(0.2).unwrap();
        let params = AlphaZParams::new(1.6, 1.3).unwrap();
        let h = optimal_h(&rho, &P::from_density(&rho), &params).unwrap();
        assert!(h.matrix().sub(&M::identity(2)).max_abs_entry() < 1e-9);
    }

    #[test]
    fn optimal_h_commuting_scalar_formula() {
        let rho_d = [0.7, 0.3];
        let sig_d = [0.4, 0.6];
        let rho = D::from_matrix(M::diag(&rho_d)).unwrap();
        let sigma = P::from_matrix(M::diag(&sig_d)).unwrap();
        let (alpha, z) = (1.9, 1.5);
        let params = AlphaZParams::new(alpha, z).unwrap();
        let h = optimal_h(&rho, &sigma, &params).unwrap();
        for i in 0..2 {
            let expect = sig_d[i].powf((1.0 - z) / z)
                * (sig_d[i].powf((1.0 - alpha) / z) * rho_d[i].powf(alpha / z)).powf(z - 1.0);
            assert!((h.matrix()[(i, i)].re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_optimal_h_is_strictly_suboptimal() {
        let (rho, sigma) = full_rank_pair(3, 3);
        let params = AlphaZParams::new(1.8, 1.4).unwrap();
        let h = optimal_h(&rho, &sigma, &params).unwrap();
        let psi = psi_functional(&rho, &sigma, &params).unwrap();
        let scaled = h.scale(1.1).unwrap();
        let f = f_functional(&scaled, &rho, &sigma, &params).unwrap();
        assert!(f < psi - 1e-6, "f = {f}, psi = {psi}");
    }

    #[test]
    fn verify_supremum_campaign() {
        let (rho, sigma) = full_rank_pair(2, 6);
        let params = AlphaZParams::new(1.8, 1.4).unwrap();
        let report = verify_supremum(&rho, &sigma, &params, 60, 99).unwrap();
        assert!(report.is_consistent(), "violation {}", report.max_violation);

        let self_report =
            verify_supremum(&rho, &P::from_density(&rho), &params, 20, 7).unwrap();
        assert!(self_report.max_violation <= 1e-10);
    }

    #[test]
    fn young_equality_and_strictness() {
        let id = P::identity(2);
        let check = young_trace_check(&id, &id, 2.0).unwrap();
        assert!((check.lhs - 2.0).abs() < 1e-12);
        assert!((check.rhs - 2.0).abs() < 1e-12);
        assert!(check.slack.abs() < 1e-12);

        // Equality case Y = X^{p/q}.
        let mut g = SplitMix64::new(8);
        for _ in 0..10 {
            let x = P::random_strictly_positive(3, g.next_u64());
            let p = 1.3 + 1.5 * g.next_f64();
            let q = p / (p - 1.0);
            let y = P::from_matrix(x.herm().power(p / q).unwrap().into_matrix()).unwrap();
            let check = young_trace_check(&x, &y, p).unwrap();
            assert!(check.slack.abs() <= 1e-9, "slack {}", check.slack);
        }

        // Independent draws sit strictly inside.
        let x = P::random_strictly_positive(3, 100);
        let y = P::random_strictly_positive(3, 101);
        let check = young_trace_check(&x, &y, 1.7).unwrap();
        assert!(check.slack > 1e-6);
        assert!(matches!(
            young_trace_check(&x, &y, 1.0),
            Err(Error::InvalidP { .. })
        ));
    }

    #[test]
    fn zhang_identity_instance() {
        let id = M::identity(2);
        let check = zhang_lower_bound(&id, &id, &id, 1.0, 2.0, 2.0).unwrap();
        assert!((check.lhs - 2.0).abs() < 1e-12);
        assert!((check.rhs - 2.0).abs() < 1e-12);
        assert!(check.slack.abs() < 1e-12);
    }

    #[test]
    fn zhang_exponent_validation() {
        let id = M::identity(2);
        assert!(matches!(
            zhang_lower_bound(&id, &id, &id, 1.0, 2.0, 2.5),
            Err(Error::ExponentMismatch { .. })
        ));
    }

    #[test]
    fn zhang_slack_nonnegative_and_optimal_z_attains() {
        let mut g = SplitMix64::new(55);
        for trial in 0..20 {
            let x = invertible_matrix::<f64>(2, &mut g);
            let y = invertible_matrix::<f64>(2, &mut g);
            let r1 = 1.2 + 1.3 * g.next_f64();
            let r2 = 1.1 + 1.5 * g.next_f64();
            let r0 = 1.0 / (1.0 / r1 + 1.0 / r2);
            let z = invertible_matrix::<f64>(2, &mut g);
            let check = zhang_lower_bound(&x, &y, &z, r0, r1, r2).unwrap();
            assert!(check.slack >= -1e-9, "trial {trial}: slack {}", check.slack);

            let z_star = zhang_optimal_z(&x, &y, r0, r2).unwrap();
            let at_opt = zhang_lower_bound(&x, &y, &z_star, r0, r1, r2).unwrap();
            let rel = at_opt.slack.abs() / at_opt.lhs.abs().max(1.0);
            assert!(rel < 1e-9, "trial {trial}: optimal-Z slack {rel}");
        }
    }

    #[test]
    fn zhang_coordinate_ascent_reaches_the_maximum() {
        let mut g = SplitMix64::new(77);
        let x = invertible_matrix::<f64>(2, &mut g);
        let y = invertible_matrix::<f64>(2, &mut g);
        let (r1, r2) = (2.0, 3.0);
        let r0 = 1.0 / (1.0 / r1 + 1.0 / r2);
        let lhs = abs_power_trace(&x.matmul(&y), r1);
        let (best, _z) = zhang_attainment_search(&x, &y, r0, r1, r2, 500, 4242).unwrap();
        let rel = (lhs - best).abs() / lhs.abs().max(1.0);
        assert!(rel < 1e-4, "search reached {best}, lhs {lhs}, rel {rel}");
        assert!(best <= lhs + 1e-9);
    }

    #[test]
    fn probe_regime_validation() {
        let bad = ProbeTarget::PsiJointConvex(AlphaZParams::new(3.0, 1.0).unwrap());
        assert!(matches!(
            convexity_probe(&bad, 2, 1, 0),
            Err(Error::InvalidRegime(_))
        ));
        let bad = ProbeTarget::GeneralFunctional { p: 0.5, q: 0.4, s: 3.0 };
        assert!(matches!(
            convexity_probe(&bad, 2, 1, 0),
            Err(Error::InvalidRegime(_))
        ));
        let bad = ProbeTarget::PickTrace { p: 1.5 };
        assert!(matches!(
            convexity_probe(&bad, 2, 1, 0),
            Err(Error::InvalidRegime(_))
        ));
    }

    #[test]
    fn probe_campaigns_stay_consistent() {
        let cases: Vec<ProbeTarget<f64>> = vec![
            ProbeTarget::PsiJointConvex(AlphaZParams::new(1.5, 1.2).unwrap()),
            ProbeTarget::PsiJointConcave(AlphaZParams::new(0.5, 0.7).unwrap()),
            ProbeTarget::GeneralFunctional { p: 0.7, q: 0.2, s: 1.0 },
            ProbeTarget::GeneralFunctional { p: -0.3, q: -0.6, s: 1.5 },
            ProbeTarget::GeneralFunctional { p: 1.5, q: -0.5, s: 1.2 },
            ProbeTarget::FixedB { p: 0.5 },
            ProbeTarget::FixedB { p: 1.5 },
            ProbeTarget::FJointConvex(AlphaZParams::new(1.8, 1.4).unwrap()),
        ];
        for target in &cases {
            let report = convexity_probe(target, 2, 40, 1234).unwrap();
            assert!(
                report.is_consistent(),
                "{target:?} violated: {}",
                report.max_violation
            );
        }
    }

    #[test]
    fn pick_trace_probe_reports_without_asserting() {
        // The concavity claim for this map carries a hypothesis on X that
        // the probe cannot check, so it samples unrestricted positives and
        // only reports. Non-unitary Z does produce genuine violations; the
        // campaign must finish and say so.
        let report = convexity_probe(&ProbeTarget::PickTrace { p: 0.5 }, 2, 40, 1234).unwrap();
        assert_eq!(report.trials, 40);
        assert!(report.max_violation.is_finite());
    }

    #[test]
    fn degenerate_identical_pairs_mix_exactly() {
        let params = AlphaZParams::new(1.5, 1.2).unwrap();
        let (rho, sigma) = full_rank_pair(3, 9);
        let psi = psi_functional(&rho, &sigma, &params).unwrap();
        for lam in [0.25, 0.5, 0.75] {
            let mixed_rho = rho.mix(&rho, lam).unwrap();
            let mixed_sigma = sigma.mix(&sigma, lam).unwrap();
            let v = psi_functional(&mixed_rho, &mixed_sigma, &params).unwrap();
            assert!((v - psi).abs() < 1e-12);
        }
    }

    #[test]
    fn probe_report_serializes() {
        let report = ProbeReport::from_trials(10, 1e-12, 42);
        let s = serde_json::to_string(&report).unwrap();
        assert!(s.contains("\"verdict\":\"consistent\""));
        assert!(s.contains("\"worst_instance_seed\":42"));

        let target = ProbeTarget::PsiJointConvex(AlphaZParams::new(1.5, 1.2).unwrap());
        let v = probe_report_json(&target, &report);
        assert_eq!(v["target"], "psi_joint_convex");
        assert_eq!(v["params"]["alpha"], 1.5);
        assert_eq!(v["trials"], 10);
    }
}
