//! Best-effort falsification outside the monotone region: random search
//! over (rho, sigma, channel) for a DPI gap below `-1e-6`, refined by
//! Gaussian perturbation of the best instance found so far.
//!
//! Not finding a violation is a valid outcome; the region characterization
//! gives no counterexample construction, only existence of *some* instance
//! on *some* dimension.

use renyi_dpi_core::channels::KrausChannel;
use renyi_dpi_core::divergences::{classify_region, dpi_gap, AlphaZParams};
use renyi_dpi_core::linalg::ComplexMatrix;
use renyi_dpi_core::rng::{derive_seed, SplitMix64};
use renyi_dpi_core::states::{ginibre, DensityOperator, PositiveOperator};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

/// A gap this negative counts as a found violation.
pub const FALSIFY_TOL: f64 = -1e-6;
/// Gaussian perturbations tried around each new best instance.
const REFINEMENTS_PER_IMPROVEMENT: u64 = 50;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FalsifyOutput {
    pub alpha: f64,
    pub z: f64,
    pub region: String,
    pub dims: (usize, usize),
    pub budget: u64,
    pub evaluations: u64,
    pub best_gap: f64,
    /// Seed of the random instance the best candidate descends from.
    pub best_lineage_seed: Option<u64>,
    /// Perturbation steps applied after that seed's instance.
    pub best_refinement_depth: u64,
    pub found: bool,
}

struct Instance {
    rho: DensityOperator<f64>,
    sigma: PositiveOperator<f64>,
    channel: KrausChannel<f64>,
}

fn base_instance(dims: (usize, usize), seed: u64) -> CliResult<Instance> {
    let (da, db) = dims;
    let dim = da * db;
    let mut g = SplitMix64::new(derive_seed(seed, &[0]));
    // Vary the rank and mixing to reach boundary-of-state-space structure;
    // violations, where they exist, tend to live near low rank.
    let rank = 1 + (g.next_below(dim as u64) as usize);
    let eps = 1e-4 + 0.2 * g.next_f64();
    let rho = DensityOperator::random(dim, rank, derive_seed(seed, &[1]))?.regularize(eps)?;
    let rank_s = 1 + (g.next_below(dim as u64) as usize);
    let eps_s = 1e-4 + 0.2 * g.next_f64();
    let sigma = PositiveOperator::from_density(
        &DensityOperator::random(dim, rank_s, derive_seed(seed, &[2]))?.regularize(eps_s)?,
    );
    let channel = match g.next_below(3) {
        0 => KrausChannel::partial_trace_channel(&[da, db], &[0])?,
        1 => KrausChannel::random(dim, dim, 2, derive_seed(seed, &[3]))?,
        _ => KrausChannel::random(dim, da.max(2), 2, derive_seed(seed, &[4]))?,
    };
    Ok(Instance { rho, sigma, channel })
}

fn perturb_instance(base: &Instance, seed: u64, scale: f64) -> CliResult<Instance> {
    let dim = base.rho.dim();
    let mut g = SplitMix64::new(seed);
    let perturb = |m: &ComplexMatrix<f64>, g: &mut SplitMix64| -> ComplexMatrix<f64> {
        let noise = ginibre::<f64>(dim, dim, g);
        let sym = noise.add(&noise.adjoint()).scale_re(0.5 * scale);
        m.add(&sym)
    };
    let rho_m = perturb(base.rho.matrix(), &mut g);
    let sigma_m = perturb(base.sigma.matrix(), &mut g);
    // Project back onto states: clip negatives, renormalize the trace.
    let rho = project_to_density(&rho_m)?;
    let sigma_d = project_to_density(&sigma_m)?;
    Ok(Instance {
        rho,
        sigma: PositiveOperator::from_density(&sigma_d),
        channel: base.channel.clone(),
    })
}

fn project_to_density(m: &ComplexMatrix<f64>) -> CliResult<DensityOperator<f64>> {
    let herm = renyi_dpi_core::linalg::HermitianOperator::from_symmetric_parts(m.clone());
    let clipped = herm.eig()?.map_eigenvalues(|l| l.max(1e-8));
    let tr = clipped.trace().re;
    Ok(DensityOperator::from_matrix(clipped.scale_re(1.0 / tr))?)
}

fn evaluate(inst: &Instance, params: &AlphaZParams<f64>) -> Option<f64> {
    dpi_gap(&inst.rho, &inst.sigma, &inst.channel, params).ok()
}

/// Random search with refinement. Errors with invalid parameters when
/// `(alpha, z)` classifies monotone (there is nothing to falsify there).
pub fn run_falsify(
    alpha: f64,
    z: f64,
    dims: (usize, usize),
    budget: u64,
    seed: u64,
) -> CliResult<FalsifyOutput> {
    let region = classify_region(alpha, z)?;
    if region.is_monotone() {
        return Err(CliError::InvalidParams(format!(
            "({alpha}, {z}) lies in monotone region {region}; the DPI holds there"
        )));
    }
    let params = AlphaZParams::new(alpha, z)?;

    let mut best_gap = f64::INFINITY;
    let mut best_lineage: Option<u64> = None;
    let mut best_depth = 0u64;
    let mut evaluations = 0u64;
    let mut t = 0u64;

    while evaluations < budget {
        let lineage_seed = derive_seed(seed, &[t]);
        t += 1;
        let Ok(inst) = base_instance(dims, lineage_seed) else {
            continue;
        };
        evaluations += 1;
        let Some(gap) = evaluate(&inst, &params) else {
            continue;
        };
        if gap < best_gap {
            best_gap = gap;
            best_lineage = Some(lineage_seed);
            best_depth = 0;

            // Refinement: Gaussian perturbations of the new best, with
            // shrinking amplitude, budget permitting.
            let mut current = inst;
            let mut r = 0u64;
            while r < REFINEMENTS_PER_IMPROVEMENT && evaluations < budget {
                let scale = 0.2 / (1.0 + r as f64 / 10.0);
                let pseed = derive_seed(lineage_seed, &[1000, r]);
                if let Ok(cand) = perturb_instance(&current, pseed, scale) {
                    evaluations += 1;
                    if let Some(g) = evaluate(&cand, &params) {
                        if g < best_gap {
                            best_gap = g;
                            best_depth += 1;
                            current = cand;
                        }
                    }
                }
                r += 1;
            }
        }
    }

    Ok(FalsifyOutput {
        alpha,
        z,
        region: region.token().to_string(),
        dims,
        budget,
        evaluations,
        best_gap: if best_gap.is_finite() { best_gap } else { f64::NAN },
        best_lineage_seed: best_lineage,
        best_refinement_depth: best_depth,
        found: best_gap < FALSIFY_TOL,
    })
}
