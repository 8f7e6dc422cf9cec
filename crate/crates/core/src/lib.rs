//! Numerical toolkit for the alpha-z Renyi relative entropy family on
//! finite-dimensional quantum states: divergence evaluation, data-processing
//! inequality (DPI) gap measurement across the monotonicity regions, and the
//! algebraic saturation conditions measured as operator residuals, with the
//! variational trace-functional machinery behind them.
//!
//! Everything is generic over the real scalar type via [`Scalar`]
//! (`f32`/`f64`); the `*64` aliases at the crate root fix `f64`, which is
//! the precision the documented tolerances assume.
//!
//! Module map:
//! - [`linalg`]: dense complex matrices, Hermitian eigendecomposition
//!   (cyclic Jacobi), functional calculus, Schatten norms, tensor algebra.
//! - [`states`]: density/positive operators, seeded Ginibre sampling, JSON
//!   schema.
//! - [`channels`]: Kraus-form CPTP maps, adjoints, Choi diagnostics,
//!   partial-trace channels, Pauli twirls, Stinespring isometries.
//! - [`divergences`]: Umegaki, alpha-Renyi, sandwiched, and alpha-z
//!   divergences, the trace functional, region classification, DPI gaps.
//! - [`variational`]: the general trace functional, the variational lower
//!   bound with its closed-form maximizer, trace inequalities, and
//!   randomized convexity probes.
//! - [`saturation`]: Petz recovery, the necessary/sufficient saturation
//!   residuals, and the recovery-map error bound check.
//!
//! All randomness flows through the named SplitMix64 generator in [`rng`],
//! so every campaign is reproducible from `(seed, parameters)` alone.

// Validation uses `!(x > y)` style comparisons so that NaN inputs fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod divergences;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod saturation;
pub mod states;
pub mod variational;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` complex matrix.
pub type ComplexMatrix64 = linalg::ComplexMatrix<f64>;
/// `f64` Hermitian operator.
pub type HermitianOperator64 = linalg::HermitianOperator<f64>;
/// `f64` eigendecomposition.
pub type EigenDecomposition64 = linalg::EigenDecomposition<f64>;
/// `f64` density operator.
pub type DensityOperator64 = states::DensityOperator<f64>;
/// `f64` positive operator.
pub type PositiveOperator64 = states::PositiveOperator<f64>;
/// `f64` Kraus channel.
pub type KrausChannel64 = channels::KrausChannel<f64>;
/// `f64` alpha-z parameter pair.
pub type AlphaZParams64 = divergences::AlphaZParams<f64>;
/// `f64` divergence value.
pub type DivergenceValue64 = divergences::DivergenceValue<f64>;
/// `f64` complex scalar.
pub type C64 = num_complex::Complex<f64>;
