//! Dense complex-matrix substrate: Hermitian eigendecomposition and the
//! functional calculus every divergence formula is built from.
//!
//! Matrices are stored row-major. Tensor products follow the same
//! convention: in `kron(a, b)` the first factor is the most significant
//! index, and [`partial_trace`] assumes that ordering.
//!
//! The eigensolver is a cyclic Jacobi iteration for complex Hermitian
//! matrices. At the dimensions this crate targets (products of factors of
//! size 2-4, at most a few dozen overall) Jacobi is accurate to close to
//! machine precision and needs no external backend.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues in `[-EIG_CLIP_TOL, 0)` are treated as numerical PSD drift
/// and clipped to zero before non-negative powers.
pub const EIG_CLIP_TOL: f64 = 1e-10;
/// Minimum eigenvalue required before a negative power or a strict
/// logarithm is allowed.
pub const POSITIVITY_FLOOR: f64 = 1e-12;
/// Jacobi sweep termination: off-diagonal Frobenius norm below
/// `JACOBI_TOL * ||A||_F`.
pub const JACOBI_TOL: f64 = 1e-13;
/// Jacobi sweep budget. Quadratic convergence makes this generous.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from nested rows, checking rectangularity and
    /// finiteness.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let nr = rows.len();
        if nr == 0 {
            return Err(Error::DimensionMismatch("matrix needs at least one row".into()));
        }
        let nc = rows[0].len();
        if nc == 0 {
            return Err(Error::DimensionMismatch("matrix needs at least one column".into()));
        }
        let mut data = Vec::with_capacity(nr * nc);
        for r in &rows {
            if r.len() != nc {
                return Err(Error::DimensionMismatch(format!(
                    "ragged rows: expected {nc} columns, found {}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        let m = Self { rows: nr, cols: nc, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::DimensionMismatch(format!(
                "expected square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteEntry)
        }
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Complex<T> {
        debug_assert!(self.is_square());
        let mut t = Complex::new(T::zero(), T::zero());
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)];
        }
        t
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&c| c * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: T) -> Self {
        self.scale(Complex::new(factor, T::zero()))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.re == T::zero() && aik.im == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Largest entry magnitude; used for scale-relative residuals.
    pub fn max_abs_entry(&self) -> T {
        self.data
            .iter()
            .map(|c| c.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Entrywise residual `max_ij |M_ij - conj(M_ji)|`.
    pub fn hermiticity_residual(&self) -> T {
        debug_assert!(self.is_square());
        let mut r = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    /// `(M + M^dagger) / 2`.
    pub fn symmetrize(&self) -> Self {
        debug_assert!(self.is_square());
        let half = Complex::new(real::<T>(0.5), T::zero());
        self.add(&self.adjoint()).scale(half)
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim()?;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs_entry().max(T::one());
        let pivot_floor = scale * real::<T>(1e-14);
        for col in 0..n {
            let mut best = col;
            let mut best_mag = a[(col, col)].norm();
            for r in col + 1..n {
                let mag = a[(r, col)].norm();
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best_mag <= pivot_floor {
                return Err(Error::SingularMatrix {
                    min: best_mag.to_f64_lossy(),
                });
            }
            if best != col {
                for j in 0..n {
                    let tmp = a[(col, j)];
                    a[(col, j)] = a[(best, j)];
                    a[(best, j)] = tmp;
                    let tmp = inv[(col, j)];
                    inv[(col, j)] = inv[(best, j)];
                    inv[(best, j)] = tmp;
                }
            }
            let piv = a[(col, col)];
            let piv_inv = Complex::new(T::one(), T::zero()) / piv;
            for j in 0..n {
                a[(col, j)] *= piv_inv;
                inv[(col, j)] *= piv_inv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor.re == T::zero() && factor.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let acj = a[(col, j)];
                    let icj = inv[(col, j)];
                    a[(r, j)] -= factor * acj;
                    inv[(r, j)] -= factor * icj;
                }
            }
        }
        Ok(inv)
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<T> {
        let gram = self.adjoint().matmul(self).symmetrize();
        let herm = HermitianOperator { mat: gram };
        let mut sv: Vec<T> = herm
            .eig_unchecked()
            .eigenvalues
            .iter()
            .map(|&l| l.max(T::zero()).sqrt())
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }
}

impl<T: Scalar> std::ops::Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> std::ops::IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Hilbert-Schmidt inner product `Tr(X^dagger Y)`.
pub fn hs_inner<T: Scalar>(x: &ComplexMatrix<T>, y: &ComplexMatrix<T>) -> Result<Complex<T>> {
    if (x.rows, x.cols) != (y.rows, y.cols) {
        return Err(Error::DimensionMismatch(format!(
            "hs_inner: {}x{} vs {}x{}",
            x.rows, x.cols, y.rows, y.cols
        )));
    }
    let mut acc = Complex::new(T::zero(), T::zero());
    for (a, b) in x.data.iter().zip(&y.data) {
        acc += a.conj() * b;
    }
    Ok(acc)
}

/// Kronecker product; the first factor is the most significant index.
pub fn kron<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let mut out = ComplexMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij.re == T::zero() && aij.im == T::zero() {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Partial trace over the factors *not* listed in `keep`.
///
/// `x` must be square of size `prod(dims)` with row-major tensor ordering.
/// The kept factors stay in their original relative order, and the trace is
/// preserved when `keep` is nonempty.
pub fn partial_trace<T: Scalar>(
    x: &ComplexMatrix<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix<T>> {
    let total: usize = dims.iter().product();
    if total == 0 || dims.contains(&0) {
        return Err(Error::DimensionMismatch("factor dimensions must be positive".into()));
    }
    if x.rows != total || x.cols != total {
        return Err(Error::DimensionMismatch(format!(
            "partial_trace: matrix is {}x{} but dims multiply to {total}",
            x.rows, x.cols
        )));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "keep index out of range for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let keep_dim: usize = keep_sorted.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();

    // Map (kept multi-index, traced multi-index) back to a flat index.
    let flat = |kept: usize, tr: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut k = kept;
        for &pos in keep_sorted.iter().rev() {
            digits[pos] = k % dims[pos];
            k /= dims[pos];
        }
        let mut t = tr;
        for &pos in traced.iter().rev() {
            digits[pos] = t % dims[pos];
            t /= dims[pos];
        }
        let mut idx = 0usize;
        for (pos, &d) in dims.iter().enumerate() {
            idx = idx * d + digits[pos];
        }
        idx
    };

    let mut out = ComplexMatrix::zeros(keep_dim.max(1), keep_dim.max(1));
    for r in 0..keep_dim.max(1) {
        for c in 0..keep_dim.max(1) {
            let mut acc = Complex::new(T::zero(), T::zero());
            for t in 0..traced_dim.max(1) {
                acc += x[(flat(r, t), flat(c, t))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Schatten p-norm `(Tr[(X^dagger X)^{p/2}])^{1/p}`; `p = infinity` gives the
/// largest singular value.
pub fn schatten_norm<T: Scalar>(x: &ComplexMatrix<T>, p: T) -> Result<T> {
    x.check_finite()?;
    let sv = x.singular_values();
    if p == T::infinity() {
        return Ok(sv.first().copied().unwrap_or(T::zero()));
    }
    if !(p >= T::one()) {
        return Err(Error::InvalidP { p: p.to_f64_lossy() });
    }
    let sum = sv
        .iter()
        .map(|&s| s.powf(p))
        .fold(T::zero(), |a, b| a + b);
    Ok(sum.powf(T::one() / p))
}

/// Sum of `|s_i|^r` over singular values; `Tr|X|^r` for arbitrary `r > 0`.
pub fn abs_power_trace<T: Scalar>(x: &ComplexMatrix<T>, r: T) -> T {
    x.singular_values()
        .iter()
        .map(|&s| if s > T::zero() { s.powf(r) } else { T::zero() })
        .fold(T::zero(), |a, b| a + b)
}

/// Square complex matrix that is Hermitian within [`HERMITICITY_TOL`];
/// stored symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T> {
    mat: ComplexMatrix<T>,
}

/// Eigendecomposition `A = U diag(lambda) U^dagger` with ascending
/// eigenvalues and unitary `basis` columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub basis: ComplexMatrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    /// `U diag(f(lambda)) U^dagger`.
    pub fn map_eigenvalues(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.eigenvalues.len();
        let mut scaled = self.basis.clone();
        // scaled = U diag(f(lambda))
        for j in 0..n {
            let fj = Complex::new(f(self.eigenvalues[j]), T::zero());
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled.matmul(&self.basis.adjoint())
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or(T::zero())
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or(T::zero())
    }
}

impl<T: Scalar> HermitianOperator<T> {
    /// Accepts a square matrix that is Hermitian within tolerance and stores
    /// its symmetrization `(M + M^dagger)/2`.
    pub fn new(mat: ComplexMatrix<T>) -> Result<Self> {
        mat.check_finite()?;
        let _ = mat.dim()?;
        let scale = mat.max_abs_entry().max(T::one());
        let residual = mat.hermiticity_residual();
        let tol = real::<T>(HERMITICITY_TOL) * scale;
        if residual > tol {
            return Err(Error::NonHermitian {
                residual: residual.to_f64_lossy(),
                tolerance: tol.to_f64_lossy(),
            });
        }
        Ok(Self { mat: mat.symmetrize() })
    }

    /// Wraps a matrix already known Hermitian (e.g. assembled symmetrically).
    pub fn from_symmetric_parts(mat: ComplexMatrix<T>) -> Self {
        debug_assert!(mat.is_square());
        Self { mat: mat.symmetrize() }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: ComplexMatrix::identity(dim) }
    }

    pub fn diag(values: &[T]) -> Self {
        Self { mat: ComplexMatrix::diag(values) }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.mat
    }

    pub fn trace_re(&self) -> T {
        self.mat.trace().re
    }

    /// Cyclic Jacobi eigendecomposition. Eigenvalues ascend; the basis is
    /// unitary and reconstructs the input to roughly `1e-15 * ||A||`.
    pub fn eig(&self) -> Result<EigenDecomposition<T>> {
        let n = self.dim();
        let mut a = self.mat.clone();
        let mut u = ComplexMatrix::<T>::identity(n);

        let fro = a.frobenius_norm();
        let threshold = real::<T>(JACOBI_TOL) * fro;
        if n > 1 && fro > T::zero() {
            let mut converged = false;
            for _sweep in 0..JACOBI_MAX_SWEEPS {
                if off_diag_norm(&a) <= threshold {
                    converged = true;
                    break;
                }
                for p in 0..n - 1 {
                    for q in p + 1..n {
                        jacobi_rotate(&mut a, &mut u, p, q);
                    }
                }
            }
            if !converged && off_diag_norm(&a) > threshold {
                return Err(Error::ConvergenceFailure(format!(
                    "Jacobi sweeps exhausted at off-diagonal norm {:e}",
                    off_diag_norm(&a).to_f64_lossy()
                )));
            }
        }

        let mut pairs: Vec<(T, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let eigenvalues: Vec<T> = pairs.iter().map(|&(l, _)| l).collect();
        let basis = ComplexMatrix::from_fn(n, n, |i, j| u[(i, pairs[j].1)]);
        Ok(EigenDecomposition { eigenvalues, basis })
    }

    fn eig_unchecked(&self) -> EigenDecomposition<T> {
        self.eig().expect("Jacobi iteration failed on a Hermitian matrix")
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eig()?.min_eigenvalue())
    }

    /// Operator norm (largest eigenvalue magnitude).
    pub fn op_norm(&self) -> Result<T> {
        let e = self.eig()?;
        Ok(e.min_eigenvalue().abs().max(e.max_eigenvalue().abs()))
    }

    /// `A^p` by functional calculus on a PSD operator.
    ///
    /// Eigenvalues in `[-EIG_CLIP_TOL, 0)` are clipped to zero first; more
    /// negative ones are a genuine PSD violation. Negative powers demand a
    /// minimum eigenvalue above [`POSITIVITY_FLOOR`], scaled by the operator
    /// norm.
    pub fn power(&self, p: T) -> Result<Self> {
        if p == T::one() {
            return Ok(self.clone());
        }
        let e = self.eig()?;
        let scale = e.max_eigenvalue().abs().max(e.min_eigenvalue().abs()).max(T::one());
        let clip = real::<T>(EIG_CLIP_TOL) * scale;
        let min = e.min_eigenvalue();
        if min < -clip {
            return Err(Error::NegativeEigenvalue {
                value: min.to_f64_lossy(),
                tolerance: clip.to_f64_lossy(),
            });
        }
        if p < T::zero() {
            let floor = real::<T>(POSITIVITY_FLOOR) * scale;
            if min <= floor {
                return Err(Error::SingularMatrix { min: min.to_f64_lossy() });
            }
        }
        let mat = e.map_eigenvalues(|l| {
            let l = l.max(T::zero());
            if l == T::zero() && p > T::zero() {
                T::zero()
            } else {
                l.powf(p)
            }
        });
        Ok(Self { mat: mat.symmetrize() })
    }

    /// `A^p` restricted to the support: eigenvalues at or below `cutoff`
    /// (relative to the largest) map to zero instead of being powered.
    /// This is the permissive mode used when a formula is evaluated on the
    /// support of a singular operator.
    pub fn power_restricted(&self, p: T, cutoff: T) -> Result<Self> {
        let e = self.eig()?;
        let scale = e.max_eigenvalue().abs().max(e.min_eigenvalue().abs()).max(T::one());
        let cut = cutoff * scale;
        let mat = e.map_eigenvalues(|l| if l <= cut { T::zero() } else { l.powf(p) });
        Ok(Self { mat: mat.symmetrize() })
    }

    /// Natural-log functional calculus; requires strict positivity.
    pub fn log(&self) -> Result<Self> {
        let e = self.eig()?;
        let scale = e.max_eigenvalue().abs().max(T::one());
        let floor = real::<T>(POSITIVITY_FLOOR) * scale;
        if e.min_eigenvalue() <= floor {
            return Err(Error::SingularMatrix {
                min: e.min_eigenvalue().to_f64_lossy(),
            });
        }
        Ok(Self {
            mat: e.map_eigenvalues(|l| l.ln()).symmetrize(),
        })
    }

    /// Support-restricted logarithm: `log(lambda)` on eigenvalues above
    /// `cutoff`, zero on the kernel (the `0 log 0 := 0` convention).
    pub fn log_restricted(&self, cutoff: T) -> Result<Self> {
        let e = self.eig()?;
        let mat = e.map_eigenvalues(|l| if l <= cutoff { T::zero() } else { l.ln() });
        Ok(Self { mat: mat.symmetrize() })
    }

    /// Projector onto the eigenspace with eigenvalues at or below `cutoff`.
    pub fn kernel_projector(&self, cutoff: T) -> Result<Self> {
        let e = self.eig()?;
        let mat = e.map_eigenvalues(|l| if l <= cutoff { T::one() } else { T::zero() });
        Ok(Self { mat: mat.symmetrize() })
    }
}

fn off_diag_norm<T: Scalar>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One complex Jacobi rotation zeroing `A[p][q]`, accumulated into `u`.
fn jacobi_rotate<T: Scalar>(a: &mut ComplexMatrix<T>, u: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == T::zero() {
        return;
    }
    let phase = apq / Complex::new(r, T::zero());
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (r + r);
    let t = if tau == T::zero() {
        T::one()
    } else {
        let s = if tau > T::zero() { T::one() } else { -T::one() };
        s / (tau.abs() + (tau * tau + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let cs = Complex::new(c, T::zero());
    let s_phase = phase * Complex::new(s, T::zero());
    let s_phase_conj = s_phase.conj();

    let n = a.rows();
    // Column update A <- A G.
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = cs * akp - s_phase_conj * akq;
        a[(k, q)] = s_phase * akp + cs * akq;
    }
    // Row update A <- G^dagger A.
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = cs * apk - s_phase * aqk;
        a[(q, k)] = s_phase_conj * apk + cs * aqk;
    }
    // Clean the rotated pair against rounding drift.
    a[(p, q)] = Complex::new(T::zero(), T::zero());
    a[(q, p)] = Complex::new(T::zero(), T::zero());
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
    // Accumulate U <- U G.
    for k in 0..n {
        let ukp = u[(k, p)];
        let ukq = u[(k, q)];
        u[(k, p)] = cs * ukp - s_phase_conj * ukq;
        u[(k, q)] = s_phase * ukp + cs * ukq;
    }
}

/// Free-function spelling of [`HermitianOperator::eig`].
pub fn hermitian_eig<T: Scalar>(a: &HermitianOperator<T>) -> Result<EigenDecomposition<T>> {
    a.eig()
}

/// Free-function spelling of [`HermitianOperator::power`].
pub fn matrix_power<T: Scalar>(a: &HermitianOperator<T>, p: T) -> Result<HermitianOperator<T>> {
    a.power(p)
}

/// Free-function spelling of [`HermitianOperator::log`].
pub fn matrix_log<T: Scalar>(a: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    a.log()
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;
    type H = HermitianOperator<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eig_diagonal_is_trivial() {
        let h = H::diag(&[1.0, 3.0]);
        let e = h.eig().unwrap();
        assert!(approx(e.eigenvalues[0], 1.0, 1e-14));
        assert!(approx(e.eigenvalues[1], 3.0, 1e-14));
        // identity basis up to phase/permutation: reconstruct instead
        let rec = e.map_eigenvalues(|l| l);
        assert!(rec.sub(h.matrix()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn eig_pauli_x_spectrum() {
        let m = M::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        let e = H::new(m).unwrap().eig().unwrap();
        assert!(approx(e.eigenvalues[0], -1.0, 1e-14));
        assert!(approx(e.eigenvalues[1], 1.0, 1e-14));
    }

    #[test]
    fn eig_two_by_two_hand_computed() {
        // [[2,1],[1,2]] has characteristic polynomial (2-l)^2 - 1, roots 1 and 3.
        let m = M::from_rows(vec![vec![c(2.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(2.0, 0.0)]])
            .unwrap();
        let e = H::new(m).unwrap().eig().unwrap();
        assert!(approx(e.eigenvalues[0], 1.0, 1e-13));
        assert!(approx(e.eigenvalues[1], 3.0, 1e-13));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = M::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        assert!(matches!(H::new(m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn eig_unitary_basis_and_reconstruction() {
        let mut g = crate::rng::SplitMix64::new(31337);
        for dim in [2usize, 3, 5, 8] {
            let m = M::from_fn(dim, dim, |_, _| c(g.next_gaussian(), g.next_gaussian()));
            let h = H::from_symmetric_parts(m);
            let e = h.eig().unwrap();
            let u = &e.basis;
            let udu = u.adjoint().matmul(u);
            assert!(
                udu.sub(&M::identity(dim)).max_abs_entry() < 1e-10,
                "basis not unitary at dim {dim}"
            );
            let rec = e.map_eigenvalues(|l| l);
            let rel = rec.sub(h.matrix()).frobenius_norm() / h.matrix().frobenius_norm();
            assert!(rel < 1e-9, "reconstruction residual {rel} at dim {dim}");
            for w in e.eigenvalues.windows(2) {
                assert!(w[0] <= w[1], "eigenvalues not ascending");
            }
        }
    }

    #[test]
    fn power_sqrt_of_diagonal() {
        let h = H::diag(&[4.0, 9.0]);
        let s = h.power(0.5).unwrap();
        assert!(approx(s.matrix()[(0, 0)].re, 2.0, 1e-12));
        assert!(approx(s.matrix()[(1, 1)].re, 3.0, 1e-12));
    }

    #[test]
    fn power_identity_fixed_point() {
        for p in [-1.5, -0.3, 0.0, 0.7, 2.0] {
            let h = H::identity(3);
            let r = h.power(p).unwrap();
            assert!(r.matrix().sub(&M::identity(3)).max_abs_entry() < 1e-13);
        }
    }

    #[test]
    fn power_squared_matches_direct_multiplication() {
        let m = M::from_rows(vec![vec![c(2.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(2.0, 0.0)]])
            .unwrap();
        let h = H::new(m.clone()).unwrap();
        let sq = h.power(2.0).unwrap();
        let direct = m.matmul(&m);
        assert!(sq.matrix().sub(&direct).max_abs_entry() < 1e-12);
        assert!(approx(sq.matrix()[(0, 0)].re, 5.0, 1e-12));
        assert!(approx(sq.matrix()[(0, 1)].re, 4.0, 1e-12));
    }

    #[test]
    fn power_negative_rejects_singular() {
        let h = H::diag(&[0.0, 1.0]);
        assert!(matches!(h.power(-1.0), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn power_rejects_genuinely_negative() {
        let h = H::diag(&[-0.5, 1.0]);
        assert!(matches!(h.power(0.5), Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn power_clips_tiny_negative_drift() {
        let h = H::diag(&[-5e-11, 1.0]);
        let r = h.power(0.5).unwrap();
        assert!(approx(r.matrix()[(0, 0)].re, 0.0, 1e-12));
        assert!(approx(r.matrix()[(1, 1)].re, 1.0, 1e-12));
    }

    #[test]
    fn log_identity_is_zero() {
        let h = H::identity(4);
        let l = h.log().unwrap();
        assert!(l.matrix().max_abs_entry() < 1e-13);
    }

    #[test]
    fn log_diagonal_exponentials() {
        let e = std::f64::consts::E;
        let h = H::diag(&[e, e * e]);
        let l = h.log().unwrap();
        assert!(approx(l.matrix()[(0, 0)].re, 1.0, 1e-12));
        assert!(approx(l.matrix()[(1, 1)].re, 2.0, 1e-12));
    }

    #[test]
    fn log_two_by_two_spectral_form() {
        // log [[2,1],[1,2]] = (log 3 / 2) [[1,1],[1,1]] since log 1 = 0.
        let m = M::from_rows(vec![vec![c(2.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(2.0, 0.0)]])
            .unwrap();
        let l = H::new(m).unwrap().log().unwrap();
        let half_log3 = 3.0f64.ln() / 2.0;
        for i in 0..2 {
            for j in 0..2 {
                assert!(approx(l.matrix()[(i, j)].re, half_log3, 1e-12));
                assert!(approx(l.matrix()[(i, j)].im, 0.0, 1e-12));
            }
        }
    }

    #[test]
    fn log_strict_rejects_singular() {
        let h = H::diag(&[0.0, 1.0]);
        assert!(matches!(h.log(), Err(Error::SingularMatrix { .. })));
        let l = h.log_restricted(1e-10).unwrap();
        assert!(approx(l.matrix()[(0, 0)].re, 0.0, 1e-13));
    }

    #[test]
    fn schatten_norm_examples() {
        let id = M::identity(2);
        assert!(approx(schatten_norm(&id, 2.0).unwrap(), 2f64.sqrt(), 1e-12));
        let d = M::diag(&[3.0, -4.0]);
        assert!(approx(schatten_norm(&d, 1.0).unwrap(), 7.0, 1e-12));
        assert!(approx(schatten_norm(&d, f64::INFINITY).unwrap(), 4.0, 1e-12));
        assert!(matches!(schatten_norm(&d, 0.5), Err(Error::InvalidP { .. })));
    }

    #[test]
    fn kron_diagonals() {
        let a = M::diag(&[1.0, 2.0]);
        let b = M::diag(&[3.0, 4.0]);
        let k = kron(&a, &b);
        for (i, expect) in [3.0, 4.0, 6.0, 8.0].iter().enumerate() {
            assert!(approx(k[(i, i)].re, *expect, 1e-14));
        }
        let id4 = kron(&M::identity(2), &M::identity(2));
        assert!(id4.sub(&M::identity(4)).max_abs_entry() == 0.0);
    }

    #[test]
    fn kron_trace_multiplicative() {
        let mut g = crate::rng::SplitMix64::new(11);
        for _ in 0..5 {
            let a = M::from_fn(2, 2, |_, _| c(g.next_gaussian(), g.next_gaussian()));
            let b = M::from_fn(2, 2, |_, _| c(g.next_gaussian(), g.next_gaussian()));
            let lhs = kron(&a, &b).trace();
            let rhs = a.trace() * b.trace();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        // rho_A (x) rho_B traced over B gives rho_A.
        let ra = M::diag(&[0.25, 0.75]);
        let rb = M::diag(&[0.5, 0.5]);
        let prod = kron(&ra, &rb);
        let got = partial_trace(&prod, &[2, 2], &[0]).unwrap();
        assert!(got.sub(&ra).max_abs_entry() < 1e-14);

        // Bell state marginal is I/2.
        let mut bell = M::zeros(4, 4);
        for &i in &[0usize, 3] {
            for &j in &[0usize, 3] {
                bell[(i, j)] = c(0.5, 0.0);
            }
        }
        let marg = partial_trace(&bell, &[2, 2], &[0]).unwrap();
        assert!(marg.sub(&M::diag(&[0.5, 0.5])).max_abs_entry() < 1e-14);

        // keep everything: unchanged.
        let same = partial_trace(&prod, &[2, 2], &[0, 1]).unwrap();
        assert!(same.sub(&prod).max_abs_entry() == 0.0);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut g = crate::rng::SplitMix64::new(5);
        let x = M::from_fn(6, 6, |_, _| c(g.next_gaussian(), g.next_gaussian()));
        let t = partial_trace(&x, &[2, 3], &[1]).unwrap();
        assert!((t.trace() - x.trace()).norm() < 1e-12);
        assert_eq!(t.rows(), 3);
    }

    #[test]
    fn partial_trace_keeps_the_second_factor() {
        // Tracing out A from rho_A (x) rho_B must return rho_B exactly,
        // pinning the index convention for non-prefix keep sets.
        let ra = M::diag(&[0.25, 0.75]);
        let mut rb = M::diag(&[0.1, 0.4, 0.5]);
        rb[(0, 1)] = c(0.05, 0.02);
        rb[(1, 0)] = c(0.05, -0.02);
        let prod = kron(&ra, &rb);
        let got = partial_trace(&prod, &[2, 3], &[1]).unwrap();
        assert!(got.sub(&rb).max_abs_entry() < 1e-14);
    }

    #[test]
    fn hs_inner_examples() {
        let id = M::identity(2);
        assert!((hs_inner(&id, &id).unwrap() - c(2.0, 0.0)).norm() < 1e-14);
        let x = M::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        let z = M::diag(&[1.0, -1.0]);
        assert!(hs_inner(&x, &z).unwrap().norm() < 1e-14);
        let mut g = crate::rng::SplitMix64::new(3);
        let a = M::from_fn(3, 3, |_, _| c(g.next_gaussian(), g.next_gaussian()));
        let self_inner = hs_inner(&a, &a).unwrap();
        let n2 = schatten_norm(&a, 2.0).unwrap();
        assert!(approx(self_inner.re, n2 * n2, 1e-10));
        assert!(self_inner.im.abs() < 1e-12);
    }

    #[test]
    fn inverse_roundtrip() {
        let mut g = crate::rng::SplitMix64::new(17);
        let a = M::from_fn(4, 4, |i, j| {
            let d = if i == j { 3.0 } else { 0.0 };
            c(g.next_gaussian() * 0.5 + d, g.next_gaussian() * 0.5)
        });
        let inv = a.inverse().unwrap();
        let prod = a.matmul(&inv);
        assert!(prod.sub(&M::identity(4)).max_abs_entry() < 1e-11);
    }

    #[test]
    fn inverse_rejects_singular() {
        let m = M::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]])
            .unwrap();
        assert!(matches!(m.inverse(), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn f32_instantiation_works() {
        let m = ComplexMatrix::<f32>::from_rows(vec![
            vec![Complex::new(2.0f32, 0.0), Complex::new(1.0, 0.0)],
            vec![Complex::new(1.0, 0.0), Complex::new(2.0, 0.0)],
        ])
        .unwrap();
        let e = HermitianOperator::new(m).unwrap().eig().unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-5);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-5);
    }
}
