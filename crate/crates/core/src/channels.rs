//! CPTP maps in Kraus form: application, Hilbert-Schmidt adjoint, CPTP
//! diagnostics, partial-trace channels, generalized Pauli twirling, and
//! Stinespring isometries.
//!
//! Channels are stored as Kraus families only; the Choi matrix is computed
//! on demand for the complete-positivity diagnostic.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, HermitianOperator};
use crate::rng::SplitMix64;
use crate::scalar::{real, Scalar};
use crate::states::{ginibre, orthonormalize_columns, DensityOperator, MatrixJson};

/// Trace-preservation tolerance for a valid channel.
pub const TP_TOL: f64 = 1e-9;
/// Choi-positivity tolerance for a valid channel.
pub const CP_TOL: f64 = 1e-9;

/// Quantum channel as a list of `dim_out x dim_in` Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel<T> {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix<T>>,
}

/// CPTP diagnostic: `tp_residual = ||sum K^dagger K - I||_max` and the
/// minimum eigenvalue of the Choi matrix.
#[derive(Debug, Clone, Copy)]
pub struct CptpReport<T> {
    pub tp_residual: T,
    pub choi_min_eig: T,
}

impl<T: Scalar> CptpReport<T> {
    pub fn is_cptp(&self) -> bool {
        self.tp_residual <= real::<T>(TP_TOL) && self.choi_min_eig >= -real::<T>(CP_TOL)
    }
}

impl<T: Scalar> KrausChannel<T> {
    /// Builds a channel from Kraus operators, checking shapes only; use
    /// [`KrausChannel::validate_cptp`] to diagnose trace preservation and
    /// complete positivity.
    pub fn new(kraus: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidShape("channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        for k in &kraus {
            k.check_finite()?;
            if (k.rows(), k.cols()) != (dim_out, dim_in) {
                return Err(Error::InvalidShape(format!(
                    "Kraus operators disagree on shape: {}x{} vs {}x{}",
                    k.rows(),
                    k.cols(),
                    dim_out,
                    dim_in
                )));
            }
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Unitary conjugation channel `X -> U X U^dagger`.
    pub fn unitary(u: ComplexMatrix<T>) -> Result<Self> {
        let dim = u.dim()?;
        let res = u.adjoint().matmul(&u).sub(&ComplexMatrix::identity(dim)).max_abs_entry();
        if res > real::<T>(1e-8) {
            return Err(Error::InvalidParams(format!(
                "matrix is not unitary: residual {:e}",
                res.to_f64_lossy()
            )));
        }
        Self::new(vec![u])
    }

    /// The full trace as a channel onto a one-dimensional output.
    pub fn full_trace(dim: usize) -> Self {
        let kraus = (0..dim)
            .map(|j| ComplexMatrix::from_fn(1, dim, |_, c| {
                if c == j {
                    Complex::new(T::one(), T::zero())
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            }))
            .collect();
        Self { dim_in: dim, dim_out: 1, kraus }
    }

    /// Partial trace over the factors not in `keep`, with Kraus operators
    /// that match [`crate::linalg::partial_trace`] exactly.
    pub fn partial_trace_channel(dims: &[usize], keep: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total == 0 {
            return Err(Error::DimensionMismatch("factor dimensions must be positive".into()));
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
        let keep_dim: usize = keep_sorted.iter().map(|&i| dims[i]).product::<usize>().max(1);
        let traced_dim: usize = traced.iter().map(|&i| dims[i]).product::<usize>().max(1);

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

        let kraus = (0..traced_dim)
            .map(|j| {
                ComplexMatrix::from_fn(keep_dim, total, |r, c| {
                    if flat(r, j) == c {
                        Complex::new(T::one(), T::zero())
                    } else {
                        Complex::new(T::zero(), T::zero())
                    }
                })
            })
            .collect();
        Ok(Self { dim_in: total, dim_out: keep_dim, kraus })
    }

    /// Haar-flavored random channel: the Kraus operators are carved from a
    /// column-orthonormalized `(dim_out * kraus_count) x dim_in` Gaussian
    /// matrix, so trace preservation holds by construction.
    pub fn random(dim_in: usize, dim_out: usize, kraus_count: usize, seed: u64) -> Result<Self> {
        if kraus_count == 0 || dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidShape("dimensions and kraus_count must be positive".into()));
        }
        if dim_out * kraus_count < dim_in {
            return Err(Error::InvalidShape(format!(
                "dim_out * kraus_count = {} cannot host an isometry from dimension {dim_in}",
                dim_out * kraus_count
            )));
        }
        let mut g = SplitMix64::new(seed);
        let gaussian = ginibre::<T>(dim_out * kraus_count, dim_in, &mut g);
        let isometry = orthonormalize_columns(&gaussian)?;
        let kraus = (0..kraus_count)
            .map(|b| {
                ComplexMatrix::from_fn(dim_out, dim_in, |r, c| isometry[(b * dim_out + r, c)])
            })
            .collect();
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix<T>] {
        &self.kraus
    }

    /// `Lambda(X) = sum K X K^dagger`.
    pub fn apply(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if x.rows() != self.dim_in || x.cols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel expects {0}x{0} input, got {1}x{2}",
                self.dim_in,
                x.rows(),
                x.cols()
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            acc = acc.add(&k.matmul(x).matmul(&k.adjoint()));
        }
        Ok(acc)
    }

    /// Hilbert-Schmidt adjoint `Lambda^*(Y) = sum K^dagger Y K`; unital
    /// whenever the channel is trace preserving.
    pub fn adjoint_apply(&self, y: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if y.rows() != self.dim_out || y.cols() != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "adjoint expects {0}x{0} input, got {1}x{2}",
                self.dim_out,
                y.rows(),
                y.cols()
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc = acc.add(&k.adjoint().matmul(y).matmul(k));
        }
        Ok(acc)
    }

    pub fn apply_density(&self, rho: &DensityOperator<T>) -> Result<DensityOperator<T>> {
        DensityOperator::from_matrix(self.apply(rho.matrix())?)
    }

    /// `sum K^dagger K` compared against the identity, plus the minimum Choi
    /// eigenvalue. Purely diagnostic; never fails.
    pub fn validate_cptp(&self) -> CptpReport<T> {
        let mut acc = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc = acc.add(&k.adjoint().matmul(k));
        }
        let tp_residual = acc.sub(&ComplexMatrix::identity(self.dim_in)).max_abs_entry();
        let choi_min_eig = self
            .choi()
            .min_eigenvalue()
            .expect("Choi matrix is Hermitian by construction");
        CptpReport { tp_residual, choi_min_eig }
    }

    /// Choi matrix `sum_ij |i><j| (x) Lambda(|i><j|)` on input (x) output.
    pub fn choi(&self) -> HermitianOperator<T> {
        let d = self.dim_in;
        let mut c = ComplexMatrix::zeros(d * self.dim_out, d * self.dim_out);
        for i in 0..d {
            for j in 0..d {
                let mut eij = ComplexMatrix::zeros(d, d);
                eij[(i, j)] = Complex::new(T::one(), T::zero());
                let mapped = self.apply(&eij).expect("shape fixed above");
                for r in 0..self.dim_out {
                    for s in 0..self.dim_out {
                        c[(i * self.dim_out + r, j * self.dim_out + s)] = mapped[(r, s)];
                    }
                }
            }
        }
        HermitianOperator::from_symmetric_parts(c)
    }

    /// Stinespring isometry `V = sum_i K_i (x) |i>_env` with
    /// `Tr_env(V X V^dagger) = Lambda(X)` and `V^dagger V = I`.
    pub fn stinespring_isometry(&self) -> ComplexMatrix<T> {
        let env = self.kraus.len();
        ComplexMatrix::from_fn(self.dim_out * env, self.dim_in, |r, c| {
            let (out_idx, env_idx) = (r / env, r % env);
            self.kraus[env_idx][(out_idx, c)]
        })
    }

    /// Composition `other after self`: Kraus products `L_j K_i`.
    pub fn compose(&self, outer: &Self) -> Result<Self> {
        if outer.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose: inner output {} vs outer input {}",
                self.dim_out, outer.dim_in
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * outer.kraus.len());
        for l in &outer.kraus {
            for k in &self.kraus {
                kraus.push(l.matmul(k));
            }
        }
        Ok(Self {
            dim_in: self.dim_in,
            dim_out: outer.dim_out,
            kraus,
        })
    }
}

/// JSON schema for channels:
/// `{"dim_in": n, "dim_out": m, "kraus": [matrix schema, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelJson {
    pub fn from_channel<T: Scalar>(chan: &KrausChannel<T>) -> Self {
        Self {
            dim_in: chan.dim_in,
            dim_out: chan.dim_out,
            kraus: chan.kraus.iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_channel<T: Scalar>(&self) -> Result<KrausChannel<T>> {
        let kraus: Vec<ComplexMatrix<T>> = self
            .kraus
            .iter()
            .map(|m| m.to_matrix())
            .collect::<Result<_>>()?;
        let chan = KrausChannel::new(kraus)?;
        if chan.dim_in != self.dim_in || chan.dim_out != self.dim_out {
            return Err(Error::Malformed(format!(
                "declared {}x{} channel but Kraus operators are {}x{}",
                self.dim_out, self.dim_in, chan.dim_out, chan.dim_in
            )));
        }
        Ok(chan)
    }
}

/// Parses a channel from its JSON schema text.
pub fn channel_from_json_str<T: Scalar>(s: &str) -> Result<KrausChannel<T>> {
    let schema: ChannelJson =
        serde_json::from_str(s).map_err(|e| Error::Malformed(format!("channel JSON: {e}")))?;
    schema.to_channel()
}

/// Serializes a channel to its JSON schema text.
pub fn channel_to_json_string<T: Scalar>(chan: &KrausChannel<T>) -> String {
    serde_json::to_string_pretty(&ChannelJson::from_channel(chan))
        .expect("channel schema serializes")
}

/// The `d^2` Heisenberg-Weyl unitaries `X^a Z^b` on dimension `d`, with
/// `X|k> = |k+1 mod d>` and `Z|k> = w^k |k>`, `w = exp(2 pi i / d)`.
/// Uniform twirling over the family maps any operator to `Tr(M)/d * I`.
#[derive(Debug, Clone)]
pub struct PauliFamily<T> {
    dim: usize,
    ops: Vec<ComplexMatrix<T>>,
}

impl<T: Scalar> PauliFamily<T> {
    pub fn generalized(d: usize) -> Self {
        assert!(d >= 1);
        let two_pi = T::PI() + T::PI();
        let mut ops = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                // (X^a Z^b)|k> = w^{bk} |k+a mod d>
                let m = ComplexMatrix::from_fn(d, d, |r, c| {
                    if r == (c + a) % d {
                        let angle = two_pi * T::from_usize(b * c).unwrap() / T::from_usize(d).unwrap();
                        Complex::new(angle.cos(), angle.sin())
                    } else {
                        Complex::new(T::zero(), T::zero())
                    }
                });
                ops.push(m);
            }
        }
        Self { dim: d, ops }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[ComplexMatrix<T>] {
        &self.ops
    }

    /// `(1/d^2) sum_i v_i M v_i^dagger`.
    pub fn twirl(&self, m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "twirl expects {0}x{0}, got {1}x{2}",
                self.dim,
                m.rows(),
                m.cols()
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for v in &self.ops {
            acc = acc.add(&v.matmul(m).matmul(&v.adjoint()));
        }
        Ok(acc.scale_re(T::one() / T::from_usize(self.dim * self.dim).unwrap()))
    }
}

/// Twirls the B factor of a bipartite state over the generalized Pauli
/// family: `(1/d_B^2) sum_i (I (x) v_i) rho (I (x) v_i^dagger)`, which
/// equals `rho_A (x) I/d_B`.
pub fn pauli_twirl_b<T: Scalar>(
    rho_ab: &DensityOperator<T>,
    dims: (usize, usize),
) -> Result<DensityOperator<T>> {
    let (da, db) = dims;
    if rho_ab.dim() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} is not {da}x{db}",
            rho_ab.dim()
        )));
    }
    let family = PauliFamily::<T>::generalized(db);
    let ida = ComplexMatrix::identity(da);
    let mut acc = ComplexMatrix::zeros(da * db, da * db);
    for v in family.ops() {
        let lifted = kron(&ida, v);
        acc = acc.add(&lifted.matmul(rho_ab.matrix()).matmul(&lifted.adjoint()));
    }
    let m = acc.scale_re(T::one() / T::from_usize(db * db).unwrap());
    DensityOperator::from_matrix(m)
}
