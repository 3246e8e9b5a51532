//! Dense complex Hermitian linear algebra.
//!
//! Matrices are small (d ≤ 2¹⁰, in practice d ≤ 16) and stored row-major as
//! `Vec<Complex64>`. The eigensolver is a cyclic complex Jacobi method, which
//! converges quadratically and produces orthonormal eigenvectors to working
//! precision. Every spectral formula in the crate (matrix exp/log, projections,
//! entropies) goes through [`eigh`].

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Deref, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Asymmetry absorbed by symmetrization at construction, relative to the
/// largest entry magnitude (floored at 1).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated in a density matrix.
pub const DENSITY_EIG_TOL: f64 = 1e-10;
/// Allowed deviation of a density matrix trace from 1.
pub const DENSITY_TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor applied before taking a matrix logarithm.
pub const LOG_FLOOR: f64 = 1e-14;

const MAX_SWEEPS: usize = 64;

/// d×d complex Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Builds a Hermitian matrix from row-major entries, symmetrizing via
    /// (A + A†)/2. Asymmetry above [`HERMITIAN_TOL`] is rejected.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        let mut scale: f64 = 1.0;
        let mut asym: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite matrix entry".into()));
                }
                scale = scale.max(a.norm());
                asym = asym.max((a - b.conj()).norm());
            }
        }
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(asym));
        }
        let mut m = Self { dim, data };
        m.symmetrize();
        Ok(m)
    }

    /// Builds a Hermitian matrix from a closure over (row, column) that is
    /// evaluated on the upper triangle only; the lower triangle is mirrored.
    pub(crate) fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            let diag = f(i, i);
            data[i * dim + i] = Complex64::new(diag.re, 0.0);
            for j in i + 1..dim {
                let z = f(i, j);
                data[i * dim + j] = z;
                data[j * dim + i] = z.conj();
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; dim])
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        Self::from_upper(dim, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Real symmetric matrix from row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Rank-one operator |v⟩⟨v| (not normalized).
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_upper(v.len(), |i, j| v[i] * v[j].conj())
    }

    /// Orthogonal projector onto the span of the given orthonormal vectors.
    pub fn projector<'a>(dim: usize, vectors: impl IntoIterator<Item = &'a [Complex64]>) -> Self {
        let mut p = Self::zeros(dim);
        for v in vectors {
            p += &Self::outer(v);
        }
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Product with another matrix; the result is generally not Hermitian.
    pub fn matmul(&self, other: &Self) -> Vec<Complex64> {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        out
    }

    /// Quadratic form ⟨v|A|v⟩.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let d = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..d {
                row += self.data[i * d + j] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc.re
    }

    fn symmetrize(&mut self) {
        let d = self.dim;
        for i in 0..d {
            self.data[i * d + i].im = 0.0;
            for j in i + 1..d {
                let avg = (self.data[i * d + j] + self.data[j * d + i].conj()) * 0.5;
                self.data[i * d + j] = avg;
                self.data[j * d + i] = avg.conj();
            }
        }
    }

    pub(crate) fn content_hash(&self) -> u64 {
        let mut hasher = DefaultHasher::new();
        self.dim.hash(&mut hasher);
        for z in &self.data {
            z.re.to_bits().hash(&mut hasher);
            z.im.to_bits().hash(&mut hasher);
        }
        hasher.finish()
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }
}

impl AddAssign<&HermitianMatrix> for HermitianMatrix {
    fn add_assign(&mut self, rhs: &HermitianMatrix) {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        HermitianMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    base: HermitianMatrix,
}

impl DensityMatrix {
    /// Validates eigenvalues ≥ −[`DENSITY_EIG_TOL`] and unit trace.
    pub fn new(base: HermitianMatrix) -> Result<Self> {
        let tr = base.trace();
        if (tr - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {tr}")));
        }
        let eig = eigh(&base)?;
        if eig.eigenvalues[0] < -DENSITY_EIG_TOL {
            return Err(Error::NotDensity(format!("eigenvalue {:e}", eig.eigenvalues[0])));
        }
        Ok(Self { base })
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn new_unchecked(base: HermitianMatrix) -> Self {
        Self { base }
    }

    /// I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { base: HermitianMatrix::from_real_diagonal(&vec![1.0 / dim as f64; dim]) }
    }

    /// |ψ⟩⟨ψ| for the normalized version of `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidArgument("state vector has zero or non-finite norm".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self { base: HermitianMatrix::outer(&v) })
    }

    /// Diagonal density matrix from a probability vector.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(p))
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.base
    }

    /// tr(ρ²).
    pub fn purity(&self) -> f64 {
        frobenius_norm(&self.base).powi(2)
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.base
    }
}

/// Spectral decomposition with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column-major: eigenvector `k` occupies `[k*d, (k+1)*d)`.
    eigenvectors: Vec<Complex64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> &[Complex64] {
        let d = self.dim();
        &self.eigenvectors[k * d..(k + 1) * d]
    }

    /// V·diag(values)·V†.
    pub fn compose(&self, values: &[f64]) -> HermitianMatrix {
        let d = self.dim();
        assert_eq!(values.len(), d);
        let v = &self.eigenvectors;
        HermitianMatrix::from_upper(d, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &w) in values.iter().enumerate() {
                if w != 0.0 {
                    acc += v[k * d + i] * v[k * d + j].conj() * w;
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.compose(&self.eigenvalues)
    }

    /// V·diag(f(λ))·V†, failing if `f` is not finite at some eigenvalue.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        let mut values = Vec::with_capacity(self.dim());
        for &l in &self.eigenvalues {
            let y = f(l);
            if !y.is_finite() {
                return Err(Error::Domain(l));
            }
            values.push(y);
        }
        Ok(self.compose(&values))
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn eigh(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    let d = h.dim;
    let mut a = h.data.clone();
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = Complex64::new(1.0, 0.0);
    }
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let target = (f64::EPSILON * f64::EPSILON) * total;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                off += a[p * d + q].norm_sqr();
            }
        }
        if off <= target || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[p * d + p].re;
                let aqq = a[q * d + q].re;
                if mag < f64::EPSILON * 1e-3 * (app.abs().min(aqq.abs())) {
                    a[p * d + q] = Complex64::new(0.0, 0.0);
                    a[q * d + p] = Complex64::new(0.0, 0.0);
                    continue;
                }
                // Phase-rotate the pair to a real symmetric 2×2 block, then apply
                // the classical Jacobi rotation. J = diag(1, e^{-iφ})·[[c, s], [-s, c]].
                let phase_conj = (apq / mag).conj();
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = phase_conj * (-s);
                let jqq = phase_conj * c;

                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = akp * jpp + akq * jqp;
                    a[k * d + q] = akp * jpq + akq * jqq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * d + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * d + q] = Complex64::new(0.0, 0.0);
                a[q * d + p] = Complex64::new(0.0, 0.0);
                a[p * d + p].im = 0.0;
                a[q * d + q].im = 0.0;
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = vkp * jpp + vkq * jqp;
                    v[k * d + q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, hash: h.content_hash() });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[i * d + i].re.total_cmp(&a[j * d + j].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * d + i].re).collect();
    let mut eigenvectors = Vec::with_capacity(d * d);
    for &col in &order {
        let mut vec: Vec<Complex64> = (0..d).map(|k| v[k * d + col]).collect();
        // Fix the phase: largest-magnitude component becomes real positive.
        let (mut best, mut best_mag) = (0, -1.0);
        for (k, z) in vec.iter().enumerate() {
            let m = z.norm();
            if m > best_mag {
                best = k;
                best_mag = m;
            }
        }
        let phase = vec[best].conj() / best_mag;
        for z in vec.iter_mut() {
            *z *= phase;
        }
        vec[best] = Complex64::new(vec[best].re, 0.0);
        eigenvectors.extend(vec);
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Applies a scalar function through the spectrum: V·diag(f(λ))·V†.
pub fn mat_fn(h: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    eigh(h)?.map(f)
}

pub fn mat_exp(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    mat_fn(h, f64::exp)
}

/// Matrix logarithm of a positive semidefinite matrix with eigenvalues
/// floored at [`LOG_FLOOR`]. Eigenvalues below −[`DENSITY_EIG_TOL`] are a
/// domain error.
pub fn mat_log_floored(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = eigh(h)?;
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -DENSITY_EIG_TOL) {
        return Err(Error::Domain(bad));
    }
    eig.map(|l| l.max(LOG_FLOOR).ln())
}

/// ‖A‖₂ = √tr(A†A).
pub fn frobenius_norm(a: &HermitianMatrix) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨A, B⟩ = tr(A†B), real for Hermitian arguments.
pub fn trace_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    a.check_dim(b)?;
    Ok(trace_inner_unchecked(a, b))
}

#[inline]
pub(crate) fn trace_inner_unchecked(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    // tr(A†B) = Σ conj(a_ij)·b_ij; the imaginary part cancels for Hermitian pairs.
    a.data.iter().zip(&b.data).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Which subsystem a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of a bipartite state on C^{dim_a} ⊗ C^{dim_b}.
pub fn partial_trace(
    rho: &DensityMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<DensityMatrix> {
    let d = rho.dim();
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != d {
        return Err(Error::DimensionMismatch { expected: d, got: dim_a * dim_b });
    }
    let m = &rho.data;
    let out = match keep {
        Subsystem::A => HermitianMatrix::from_upper(dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k) * d + j * dim_b + k]).sum()
        }),
        Subsystem::B => HermitianMatrix::from_upper(dim_b, |i, j| {
            (0..dim_a).map(|k| m[(k * dim_b + i) * d + k * dim_b + j]).sum()
        }),
    };
    Ok(DensityMatrix::new_unchecked(out))
}

/// Quantum Tsallis entropy S_q(ρ) = (tr ρ^q − 1)/(1 − q).
pub fn tsallis_entropy(rho: &DensityMatrix, q: f64) -> Result<f64> {
    if !(q > 0.0) || q == 1.0 || !q.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tsallis index must lie in (0,1)∪(1,∞), got {q}"
        )));
    }
    if q == 2.0 {
        return Ok(1.0 - rho.purity());
    }
    let eig = eigh(rho)?;
    let s: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).powf(q)).sum();
    Ok((s - 1.0) / (1.0 - q))
}

/// tr(X ln X) with 0·ln 0 = 0.
pub fn neg_von_neumann_entropy(x: &DensityMatrix) -> Result<f64> {
    let eig = eigh(x)?;
    Ok(eig.eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| l * l.ln()).sum())
}

/// Quantum relative entropy B(X‖Y) = tr(X ln X − X ln Y), the Bregman
/// divergence of the von Neumann entropy.
pub fn bregman_vn(x: &DensityMatrix, y: &DensityMatrix) -> Result<f64> {
    x.check_dim(y)?;
    let log_y = mat_log_floored(y)?;
    Ok(neg_von_neumann_entropy(x)? - trace_inner_unchecked(x, &log_y))
}

/// Trace distance ½‖ρ − σ‖₁.
pub fn trace_distance(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    rho.check_dim(sigma)?;
    let eig = eigh(&(rho - sigma))?;
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// Kronecker product of two Hermitian matrices.
pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    let (da, db) = (a.dim, b.dim);
    HermitianMatrix::from_upper(da * db, |r, c| {
        a.get(r / db, c / db) * b.get(r % db, c % db)
    })
}

/// Hermitian matrix with i.i.d. complex Gaussian entries (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::from_upper(dim, |i, j| {
        let re: f64 = rng.sample(StandardNormal);
        if i == j {
            Complex64::new(re, 0.0)
        } else {
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
    })
}

/// Random Hermitian matrix rescaled so its spectrum lies in [−r, r].
pub fn random_hermitian_bounded<R: Rng + ?Sized>(dim: usize, r: f64, rng: &mut R) -> Result<HermitianMatrix> {
    let h = random_hermitian(dim, rng);
    let eig = eigh(&h)?;
    let spread = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    if spread == 0.0 {
        return Ok(h);
    }
    let u: f64 = rng.random_range(0.1..=1.0);
    Ok(h.scale(u * r / spread))
}
