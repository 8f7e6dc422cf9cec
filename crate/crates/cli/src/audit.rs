//! Saturation audits: batches of instances with their DPI gaps and
//! condition residuals, plus an aggregate relating the two.

use renyi_dpi_core::channels::KrausChannel;
use renyi_dpi_core::divergences::AlphaZParams;
use renyi_dpi_core::linalg::kron;
use renyi_dpi_core::rng::derive_seed;
use renyi_dpi_core::saturation::{
    necessary_report, sufficient_condition_check, BipartiteStructure, SaturationReport,
};
use renyi_dpi_core::states::{DensityOperator, PositiveOperator};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

/// Instance families the audit can generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditMode {
    /// `rho_A (x) tau` against `sigma_A (x) tau` through `Tr_B`:
    /// saturating by the tensor property, so gap and residual both vanish.
    Tensor,
    /// Unstructured full-rank pairs through `Tr_B`: generically
    /// non-saturating; gaps and residuals are reported for correlation.
    Random,
    /// Product instances fed to the algebraic sufficient condition.
    ProductSufficient,
}

impl std::str::FromStr for AuditMode {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "tensor" => Ok(AuditMode::Tensor),
            "random" => Ok(AuditMode::Random),
            "product-sufficient" => Ok(AuditMode::ProductSufficient),
            other => Err(CliError::Parse(format!(
                "unknown audit mode {other:?}; expected tensor | random | product-sufficient"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditInstance {
    pub trial_seed: u64,
    #[serde(flatten)]
    pub report: SaturationReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditAggregate {
    /// Largest condition residual among instances whose gap is at most
    /// 1e-9 (`null` when no instance saturates).
    pub max_residual_among_saturating: Option<f64>,
    pub saturating_instances: u64,
    /// Pearson correlation between gap and residual (`null` if degenerate).
    pub gap_residual_correlation: Option<f64>,
    pub max_gap: f64,
    pub min_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditOutput {
    pub mode: AuditMode,
    pub alpha: f64,
    pub z: f64,
    pub dims: (usize, usize),
    pub trials: u64,
    pub seed: u64,
    pub instances: Vec<AuditInstance>,
    pub aggregate: AuditAggregate,
}

fn regularized(dim: usize, seed: u64) -> CliResult<DensityOperator<f64>> {
    Ok(DensityOperator::random(dim, dim, seed)?.regularize(0.1)?)
}

/// Runs the audit campaign. In `tensor` and `random` mode the necessary
/// condition demands `1 < alpha <= 2`, `alpha/2 <= z <= alpha`, which maps
/// to exit code 3 at the command layer.
pub fn run_audit(
    mode: AuditMode,
    alpha: f64,
    z: f64,
    dims: (usize, usize),
    trials: u64,
    seed: u64,
) -> CliResult<AuditOutput> {
    let params = AlphaZParams::new(alpha, z)?;
    let (da, db) = dims;
    if da == 0 || db == 0 {
        return Err(CliError::InvalidParams("dimensions must be positive".into()));
    }
    let trace_b = KrausChannel::partial_trace_channel(&[da, db], &[0])?;

    let mut instances = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let trial_seed = derive_seed(seed, &[t]);
        let report = match mode {
            AuditMode::Tensor => {
                let rho_a = regularized(da, derive_seed(trial_seed, &[1]))?;
                let sigma_a = regularized(da, derive_seed(trial_seed, &[2]))?;
                let tau = regularized(db, derive_seed(trial_seed, &[3]))?;
                let rho_ab = rho_a.tensor(&tau);
                let sigma_ab =
                    PositiveOperator::from_matrix(kron(sigma_a.matrix(), tau.matrix()))?;
                necessary_report(&rho_ab, &sigma_ab, &trace_b, &params)?
            }
            AuditMode::Random => {
                let rho = regularized(da * db, derive_seed(trial_seed, &[4]))?;
                let sigma = PositiveOperator::from_density(&regularized(
                    da * db,
                    derive_seed(trial_seed, &[5]),
                )?);
                necessary_report(&rho, &sigma, &trace_b, &params)?
            }
            AuditMode::ProductSufficient => {
                let rho_a = regularized(da, derive_seed(trial_seed, &[6]))?;
                let sigma_a = regularized(da, derive_seed(trial_seed, &[7]))?;
                let tau = regularized(db, derive_seed(trial_seed, &[8]))?;
                let rho_ab = rho_a.tensor(&tau);
                let sigma_ab =
                    PositiveOperator::from_matrix(kron(sigma_a.matrix(), tau.matrix()))?;
                sufficient_condition_check(
                    &rho_ab,
                    &sigma_ab,
                    dims,
                    &params,
                    BipartiteStructure::Product,
                )?
            }
        };
        instances.push(AuditInstance { trial_seed, report });
    }

    let aggregate = aggregate(&instances);
    Ok(AuditOutput {
        mode,
        alpha,
        z,
        dims,
        trials,
        seed,
        instances,
        aggregate,
    })
}

fn aggregate(instances: &[AuditInstance]) -> AuditAggregate {
    let mut max_sat_residual: Option<f64> = None;
    let mut saturating = 0u64;
    let (mut min_gap, mut max_gap) = (f64::INFINITY, f64::NEG_INFINITY);
    for inst in instances {
        min_gap = min_gap.min(inst.report.gap);
        max_gap = max_gap.max(inst.report.gap);
        if inst.report.gap.abs() <= 1e-9 {
            saturating += 1;
            let r = inst.report.necessary_residual;
            max_sat_residual = Some(max_sat_residual.map_or(r, |m: f64| m.max(r)));
        }
    }
    AuditAggregate {
        max_residual_among_saturating: max_sat_residual,
        saturating_instances: saturating,
        gap_residual_correlation: pearson(
            instances.iter().map(|i| i.report.gap),
            instances.iter().map(|i| i.report.necessary_residual),
        ),
        max_gap,
        min_gap,
    }
}

fn pearson(
    xs: impl Iterator<Item = f64>,
    ys: impl Iterator<Item = f64>,
) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = xs.zip(ys).filter(|(a, b)| a.is_finite() && b.is_finite()).collect();
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return None;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in &pairs {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
