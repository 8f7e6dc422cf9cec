//! Density operators and strictly positive operators: construction,
//! validation, and seeded random sampling.
//!
//! Random states come from the Ginibre ensemble: `rho = G G^dagger / Tr`,
//! with `G` a `dim x rank` matrix of i.i.d. complex Gaussians drawn from the
//! SplitMix64 stream (see [`crate::rng`]); real and imaginary parts are each
//! standard normal. The quotient makes the normalization irrelevant. Every
//! sampler is a pure function of `(dims, rank, seed)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, partial_trace, ComplexMatrix, HermitianOperator, POSITIVITY_FLOOR};
use crate::rng::{derive_seed, SplitMix64};
use crate::scalar::{real, Scalar};

/// PSD-drift tolerance when validating a density operator.
pub const DENSITY_EIG_TOL: f64 = 1e-10;
/// Trace-one tolerance.
pub const DENSITY_TRACE_TOL: f64 = 1e-10;

/// PSD, trace-one quantum state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T> {
    op: HermitianOperator<T>,
}

/// Positive semidefinite operator; `strictly_positive` records that the
/// minimum eigenvalue clears [`POSITIVITY_FLOOR`], which is what the
/// divergence formulas assume of `sigma` by default.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveOperator<T> {
    op: HermitianOperator<T>,
    strictly_positive: bool,
}

impl<T: Scalar> DensityOperator<T> {
    /// Validates Hermiticity (symmetrizing), positivity, and unit trace.
    pub fn from_matrix(m: ComplexMatrix<T>) -> Result<Self> {
        let op = HermitianOperator::new(m)?;
        let min = op.min_eigenvalue()?;
        if min < -real::<T>(DENSITY_EIG_TOL) {
            return Err(Error::NotPsd {
                min_eig: min.to_f64_lossy(),
            });
        }
        let tr = op.trace_re();
        if (tr - T::one()).abs() > real::<T>(DENSITY_TRACE_TOL) {
            return Err(Error::TraceNotOne {
                trace: tr.to_f64_lossy(),
            });
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        assert!(dim >= 1);
        let m = ComplexMatrix::identity(dim).scale_re(T::one() / T::from_usize(dim).unwrap());
        Self {
            op: HermitianOperator::from_symmetric_parts(m),
        }
    }

    /// Ginibre state of the given rank, deterministic per seed.
    pub fn random(dim: usize, rank: usize, seed: u64) -> Result<Self> {
        if rank == 0 || rank > dim {
            return Err(Error::InvalidRank { rank, dim });
        }
        let mut g = SplitMix64::new(seed);
        let factor = ginibre::<T>(dim, rank, &mut g);
        let gram = factor.matmul(&factor.adjoint());
        let tr = gram.trace().re;
        let m = gram.scale_re(T::one() / tr);
        Self::from_matrix(m)
    }

    /// `(1 - eps) rho + eps I/dim`: full-rank regularization with the
    /// maximally mixed state as fixed point.
    pub fn regularize(&self, eps: T) -> Result<Self> {
        if !(eps > T::zero() && eps < T::one()) {
            return Err(Error::InvalidEpsilon {
                eps: eps.to_f64_lossy(),
            });
        }
        let dim = self.dim();
        let mixed = ComplexMatrix::identity(dim).scale_re(eps / T::from_usize(dim).unwrap());
        let m = self.matrix().scale_re(T::one() - eps).add(&mixed);
        Ok(Self {
            op: HermitianOperator::from_symmetric_parts(m),
        })
    }

    /// Random separable state `sum_i lambda_i |psi_i><psi_i| (x)
    /// |phi_i><phi_i|` with Dirichlet-uniform weights and Haar-random pure
    /// factors.
    pub fn separable(dim_a: usize, dim_b: usize, terms: usize, seed: u64) -> Result<Self> {
        if terms == 0 {
            return Err(Error::InvalidParams("separable sample needs terms >= 1".into()));
        }
        let mut g = SplitMix64::new(seed);
        // Dirichlet(1,...,1) via normalized exponentials.
        let mut weights: Vec<T> = (0..terms)
            .map(|_| real::<T>(-g.next_open01().ln()))
            .collect();
        let total = weights.iter().copied().fold(T::zero(), |a, b| a + b);
        for w in &mut weights {
            *w /= total;
        }
        let mut acc = ComplexMatrix::<T>::zeros(dim_a * dim_b, dim_a * dim_b);
        for &w in &weights {
            let pa = haar_pure_projector::<T>(dim_a, &mut g);
            let pb = haar_pure_projector::<T>(dim_b, &mut g);
            acc = acc.add(&kron(&pa, &pb).scale_re(w));
        }
        Self::from_matrix(acc)
    }

    /// Pure state `|v><v| / <v|v>` from an unnormalized vector.
    pub fn pure_from_vector(v: &[Complex<T>]) -> Result<Self> {
        let dim = v.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch("empty state vector".into()));
        }
        let norm_sq = v.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if norm_sq <= T::zero() {
            return Err(Error::InvalidParams("zero state vector".into()));
        }
        let m = ComplexMatrix::from_fn(dim, dim, |i, j| v[i] * v[j].conj() / norm_sq);
        Self::from_matrix(m)
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn herm(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.op.matrix()
    }

    /// Marginal on the kept factors.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let m = partial_trace(self.matrix(), dims, keep)?;
        Self::from_matrix(m)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            op: HermitianOperator::from_symmetric_parts(kron(self.matrix(), other.matrix())),
        }
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        self.op.min_eigenvalue()
    }

    pub fn purity(&self) -> T {
        self.matrix().matmul(self.matrix()).trace().re
    }
}

impl<T: Scalar> PositiveOperator<T> {
    /// Validates Hermiticity and positivity; records strict positivity.
    pub fn from_matrix(m: ComplexMatrix<T>) -> Result<Self> {
        let op = HermitianOperator::new(m)?;
        let min = op.min_eigenvalue()?;
        if min < -real::<T>(DENSITY_EIG_TOL) {
            return Err(Error::NotPsd {
                min_eig: min.to_f64_lossy(),
            });
        }
        let strictly_positive = min > real::<T>(POSITIVITY_FLOOR);
        Ok(Self { op, strictly_positive })
    }

    pub fn from_density(rho: &DensityOperator<T>) -> Self {
        let min = rho
            .op
            .min_eigenvalue()
            .expect("validated density has an eigendecomposition");
        Self {
            op: rho.op.clone(),
            strictly_positive: min > real::<T>(POSITIVITY_FLOOR),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim),
            strictly_positive: true,
        }
    }

    /// Full-rank Wishart sample `G G^dagger` with `G` square Ginibre.
    /// The seed is bumped in the (measure-zero, but finite-precision)
    /// event the draw is not strictly positive.
    pub fn random_strictly_positive(dim: usize, seed: u64) -> Self {
        let mut s = seed;
        loop {
            let mut g = SplitMix64::new(s);
            let factor = ginibre::<T>(dim, dim, &mut g);
            let gram = factor.matmul(&factor.adjoint());
            if let Ok(op) = Self::from_matrix(gram) {
                if op.strictly_positive {
                    return op;
                }
            }
            s = derive_seed(s, &[0x5EED]);
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    pub fn herm(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.op.matrix()
    }

    pub fn scale(&self, factor: T) -> Result<Self> {
        if factor <= T::zero() {
            return Err(Error::InvalidParams("scale factor must be positive".into()));
        }
        Self::from_matrix(self.matrix().scale_re(factor))
    }
}

/// `dim x rank` matrix of i.i.d. complex Gaussians.
pub fn ginibre<T: Scalar>(dim: usize, rank: usize, g: &mut SplitMix64) -> ComplexMatrix<T> {
    // Row-major fill order is part of the reproducibility contract.
    let mut m = ComplexMatrix::zeros(dim, rank);
    for i in 0..dim {
        for j in 0..rank {
            m[(i, j)] = Complex::new(real::<T>(g.next_gaussian()), real::<T>(g.next_gaussian()));
        }
    }
    m
}

/// Haar-random pure-state projector `|psi><psi|`.
pub fn haar_pure_projector<T: Scalar>(dim: usize, g: &mut SplitMix64) -> ComplexMatrix<T> {
    let v: Vec<Complex<T>> = (0..dim)
        .map(|_| Complex::new(real::<T>(g.next_gaussian()), real::<T>(g.next_gaussian())))
        .collect();
    let norm_sq = v.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b);
    ComplexMatrix::from_fn(dim, dim, |i, j| v[i] * v[j].conj() / norm_sq)
}

/// Haar-random unitary: QR of a square Ginibre matrix via modified
/// Gram-Schmidt with the phase convention fixed by positive diagonal R.
pub fn haar_unitary<T: Scalar>(dim: usize, seed: u64) -> ComplexMatrix<T> {
    let mut g = SplitMix64::new(seed);
    let m = ginibre::<T>(dim, dim, &mut g);
    orthonormalize_columns(&m).expect("square Ginibre is almost surely full rank")
}

/// Modified Gram-Schmidt on the columns; errors if the columns are not
/// numerically independent.
pub fn orthonormalize_columns<T: Scalar>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows < cols {
        return Err(Error::InvalidShape(format!(
            "cannot orthonormalize {cols} columns in dimension {rows}"
        )));
    }
    let mut q = m.clone();
    for j in 0..cols {
        for k in 0..j {
            // proj = <q_k, q_j>
            let mut proj = Complex::new(T::zero(), T::zero());
            for i in 0..rows {
                proj += q[(i, k)].conj() * q[(i, j)];
            }
            for i in 0..rows {
                let qik = q[(i, k)];
                q[(i, j)] -= proj * qik;
            }
        }
        let norm = (0..rows)
            .map(|i| q[(i, j)].norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        if norm <= real::<T>(1e-12) {
            return Err(Error::SingularMatrix {
                min: norm.to_f64_lossy(),
            });
        }
        for i in 0..rows {
            q[(i, j)] /= norm;
        }
    }
    Ok(q)
}

/// JSON schema for matrices: `{"dim": n, "re": [[...]], "im": [[...]]}`.
///
/// `dim` is written for square matrices. Rectangular matrices (Kraus
/// operators of dimension-changing channels) omit it; the shape is carried
/// by the nested arrays either way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix<T: Scalar>(m: &ComplexMatrix<T>) -> Self {
        let re = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m[(i, j)].re.to_f64_lossy()).collect())
            .collect();
        let im = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m[(i, j)].im.to_f64_lossy()).collect())
            .collect();
        Self {
            dim: m.is_square().then_some(m.rows()),
            re,
            im,
        }
    }

    pub fn to_matrix<T: Scalar>(&self) -> Result<ComplexMatrix<T>> {
        let rows = self.re.len();
        if rows == 0 || self.im.len() != rows {
            return Err(Error::Malformed("re and im must be equally sized, nonempty grids".into()));
        }
        let cols = self.re[0].len();
        if cols == 0 {
            return Err(Error::Malformed("matrix rows must be nonempty".into()));
        }
        for (r, i) in self.re.iter().zip(&self.im) {
            if r.len() != cols || i.len() != cols {
                return Err(Error::Malformed("ragged matrix rows".into()));
            }
        }
        if let Some(d) = self.dim {
            if d != rows || d != cols {
                return Err(Error::Malformed(format!(
                    "declared dim {d} does not match {rows}x{cols} grid"
                )));
            }
        }
        let m = ComplexMatrix::from_fn(rows, cols, |i, j| {
            Complex::new(real::<T>(self.re[i][j]), real::<T>(self.im[i][j]))
        });
        m.check_finite()?;
        Ok(m)
    }
}

/// Parses a matrix from its JSON schema text.
pub fn matrix_from_json_str<T: Scalar>(s: &str) -> Result<ComplexMatrix<T>> {
    let schema: MatrixJson =
        serde_json::from_str(s).map_err(|e| Error::Malformed(format!("matrix JSON: {e}")))?;
    schema.to_matrix()
}

/// Serializes a matrix to its JSON schema text.
pub fn matrix_to_json_string<T: Scalar>(m: &ComplexMatrix<T>) -> String {
    serde_json::to_string_pretty(&MatrixJson::from_matrix(m)).expect("matrix schema serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = DensityOperator<f64>;
    type M = ComplexMatrix<f64>;

    #[test]
    fn from_matrix_validates() {
        assert!(D::from_matrix(M::diag(&[0.5, 0.5])).is_ok());
        assert!(D::from_matrix(M::diag(&[0.75, 0.25])).is_ok());
        assert!(matches!(
            D::from_matrix(M::diag(&[0.75, 0.35])),
            Err(Error::TraceNotOne { .. })
        ));
        assert!(matches!(
            D::from_matrix(M::diag(&[1.5, -0.5])),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn random_density_is_deterministic() {
        let a = D::random(2, 2, 42).unwrap();
        let b = D::random(2, 2, 42).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = D::random(2, 2, 43).unwrap();
        assert!(a.matrix().sub(c.matrix()).max_abs_entry() > 1e-6);
    }

    #[test]
    fn random_density_rank_one_is_pure() {
        let rho = D::random(3, 1, 7).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn random_density_full_rank_qualities() {
        let rho = D::random(4, 4, 11).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue().unwrap() > 0.0);
    }

    #[test]
    fn random_density_rejects_bad_rank() {
        assert!(matches!(D::random(2, 0, 1), Err(Error::InvalidRank { .. })));
        assert!(matches!(D::random(2, 3, 1), Err(Error::InvalidRank { .. })));
    }

    #[test]
    fn maximally_mixed_values() {
        let m2 = D::maximally_mixed(2);
        assert!((m2.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        let m1 = D::maximally_mixed(1);
        assert!((m1.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        let m3 = D::maximally_mixed(3);
        for l in m3.herm().eig().unwrap().eigenvalues {
            assert!((l - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn regularize_examples() {
        let pure = D::pure_from_vector(&[Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]).unwrap();
        let reg = pure.regularize(0.01).unwrap();
        assert!((reg.matrix()[(0, 0)].re - 0.995).abs() < 1e-12);
        assert!((reg.matrix()[(1, 1)].re - 0.005).abs() < 1e-12);

        let mixed = D::maximally_mixed(3);
        let reg = mixed.regularize(0.37).unwrap();
        assert!(reg.matrix().sub(mixed.matrix()).max_abs_entry() < 1e-14);

        assert!(matches!(pure.regularize(0.0), Err(Error::InvalidEpsilon { .. })));
        assert!(matches!(pure.regularize(1.0), Err(Error::InvalidEpsilon { .. })));
    }

    #[test]
    fn separable_single_term_is_product_pure() {
        let rho = D::separable(2, 2, 1, 5).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-10);
        let (tr, _) = (rho.matrix().trace().re, ());
        assert!((tr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separable_is_ppt_for_two_qubits() {
        // Positive partial transpose is necessary for separability; at 2x2
        // it certifies the construction numerically.
        for seed in 0..5u64 {
            let rho = D::separable(2, 2, 3, seed).unwrap();
            let m = rho.matrix();
            let pt = M::from_fn(4, 4, |r, c| {
                let (ra, rb) = (r / 2, r % 2);
                let (ca, cb) = (c / 2, c % 2);
                m[(ra * 2 + cb, ca * 2 + rb)]
            });
            let min = HermitianOperator::new(pt).unwrap().min_eigenvalue().unwrap();
            assert!(min >= -1e-9, "PPT violated: {min}");
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary::<f64>(4, 99);
        let prod = u.adjoint().matmul(&u);
        assert!(prod.sub(&M::identity(4)).max_abs_entry() < 1e-12);
    }

    #[test]
    fn regularize_commutes_with_unitary_conjugation() {
        let rho = D::random(3, 2, 21).unwrap();
        let u = haar_unitary::<f64>(3, 22);
        let eps = 0.05;
        let lhs = {
            let conj = u.matmul(rho.matrix()).matmul(&u.adjoint());
            D::from_matrix(conj).unwrap().regularize(eps).unwrap()
        };
        let rhs = {
            let reg = rho.regularize(eps).unwrap();
            u.matmul(reg.matrix()).matmul(&u.adjoint())
        };
        assert!(lhs.matrix().sub(&rhs).max_abs_entry() < 1e-12);
    }

    #[test]
    fn matrix_json_roundtrip() {
        let rho = D::random(3, 3, 8).unwrap();
        let s = matrix_to_json_string(rho.matrix());
        let back: M = matrix_from_json_str(&s).unwrap();
        assert!(back.sub(rho.matrix()).max_abs_entry() < 1e-15);
        assert!(s.contains("\"dim\": 3"));
    }

    #[test]
    fn matrix_json_rejects_malformed() {
        assert!(matrix_from_json_str::<f64>("{\"re\": [[1.0]], \"im\": [[0.0, 1.0]]}").is_err());
        assert!(matrix_from_json_str::<f64>("{\"dim\": 3, \"re\": [[1.0]], \"im\": [[0.0]]}").is_err());
        assert!(matrix_from_json_str::<f64>("not json").is_err());
    }

    #[test]
    fn positive_operator_strictness() {
        let p = PositiveOperator::<f64>::from_matrix(M::diag(&[1.0, 2.0])).unwrap();
        assert!(p.is_strictly_positive());
        let q = PositiveOperator::<f64>::from_matrix(M::diag(&[0.0, 1.0])).unwrap();
        assert!(!q.is_strictly_positive());
        let w = PositiveOperator::<f64>::random_strictly_positive(3, 77);
        assert!(w.is_strictly_positive());
    }
}
