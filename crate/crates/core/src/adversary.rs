//! The environment side of the game: target states, measurement choice,
//! feedback.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{eigh, trace_inner_unchecked, DensityMatrix, HermitianMatrix};

/// Largest qubit count accepted anywhere in the crate.
pub const MAX_QUBITS: usize = 10;

/// Eigenvalues of ω − ρ at or below this magnitude count as zero when the
/// worst-case measurement picks an eigenspace.
const EIG_ZERO: f64 = 1e-12;
/// Sign comparison slack; ties go to the positive eigenspace.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purity {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub rho: DensityMatrix,
    pub purity: Purity,
}

fn check_qubits(n_qubits: usize) -> Result<usize> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qubit count must lie in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(1 << n_qubits)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-random pure state |v⟩⟨v| with v a normalized complex Gaussian vector.
pub fn haar_random_pure<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<TargetState> {
    let d = check_qubits(n_qubits)?;
    let v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    Ok(TargetState { rho: DensityMatrix::pure(&v)?, purity: Purity::Pure })
}

/// Normalized complex Wishart state GG†/tr(GG†) (Hilbert–Schmidt measure).
pub fn random_mixed<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<TargetState> {
    let d = check_qubits(n_qubits)?;
    let g: Vec<Complex64> = (0..d * d).map(|_| complex_gaussian(rng)).collect();
    let ggt = HermitianMatrix::from_upper(d, |i, j| {
        (0..d).map(|k| g[i * d + k] * g[j * d + k].conj()).sum()
    });
    let tr = ggt.trace();
    Ok(TargetState { rho: DensityMatrix::new_unchecked(ggt.scale(1.0 / tr)), purity: Purity::Mixed })
}

pub fn random_target<R: Rng + ?Sized>(n_qubits: usize, purity: Purity, rng: &mut R) -> Result<TargetState> {
    match purity {
        Purity::Pure => haar_random_pure(n_qubits, rng),
        Purity::Mixed => random_mixed(n_qubits, rng),
    }
}

/// Projector onto a Haar-random rank-`rank` subspace of C^d.
pub fn random_projector<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<HermitianMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::InvalidArgument(format!("projector rank {rank} outside 1..={d}")));
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(rank);
    while basis.len() < rank {
        let mut v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        // Two passes of Gram–Schmidt for numerical orthogonality.
        for _ in 0..2 {
            for b in &basis {
                let dot: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        basis.push(v);
    }
    Ok(HermitianMatrix::projector(d, basis.iter().map(|v| v.as_slice())))
}

/// Measurement-rank restriction M; `None` is unlimited.
pub type RankLimit = Option<usize>;

/// E = argmax over 0 ≤ E ≤ I with rank(E) ≤ M of (tr E(ω − ρ))².
///
/// The maximizer is a projector onto same-signed eigenvectors of Δ = ω − ρ:
/// the best M positive ones or the best M negative ones, whichever sum is
/// larger in magnitude. Ties go to the positive side. When Δ has no nonzero
/// eigenvalue the projector onto the first eigenvector is returned.
pub fn worst_case_measurement(
    omega: &HermitianMatrix,
    rho: &HermitianMatrix,
    rank_limit: RankLimit,
) -> Result<HermitianMatrix> {
    let d = omega.dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: rho.dim() });
    }
    let m = match rank_limit {
        Some(m) if m == 0 || m > d => {
            return Err(Error::InvalidArgument(format!("rank limit {m} outside 1..={d}")))
        }
        Some(m) => m,
        None => d,
    };
    let eig = eigh(&(omega - rho))?;
    let l = &eig.eigenvalues;
    let pos: Vec<usize> = (0..d).rev().filter(|&k| l[k] > EIG_ZERO).take(m).collect();
    let neg: Vec<usize> = (0..d).filter(|&k| l[k] < -EIG_ZERO).take(m).collect();
    let pos_sum: f64 = pos.iter().map(|&k| l[k]).sum();
    let neg_sum: f64 = neg.iter().map(|&k| -l[k]).sum();
    let chosen = if pos.is_empty() && neg.is_empty() {
        vec![0]
    } else if pos_sum >= neg_sum - TIE_TOL {
        pos
    } else {
        neg
    };
    Ok(HermitianMatrix::projector(d, chosen.iter().map(|&k| eig.eigenvector(k))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    /// Adaptive argmax of the squared prediction error.
    WorstCase,
    /// Fresh Haar-random projector of rank M (or d) each round.
    RandomProjector,
    /// Oblivious: a sequence of random projectors drawn before the game and
    /// cycled.
    FixedSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    pub kind: AdversaryKind,
    #[serde(default)]
    pub rank_limit: RankLimit,
    /// Length of the pre-drawn cycle for `fixed_sequence`.
    #[serde(default = "default_sequence_len")]
    pub sequence_len: usize,
}

fn default_sequence_len() -> usize {
    16
}

impl AdversaryConfig {
    pub fn worst_case(rank_limit: RankLimit) -> Self {
        Self { kind: AdversaryKind::WorstCase, rank_limit, sequence_len: default_sequence_len() }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if let Some(m) = self.rank_limit {
            if m == 0 || m > d {
                return Err(Error::Config(format!("rank_limit {m} outside 1..={d}")));
            }
        }
        if self.kind == AdversaryKind::FixedSequence && self.sequence_len == 0 {
            return Err(Error::Config("sequence_len must be at least 1".into()));
        }
        Ok(())
    }
}

/// Runtime adversary holding any pre-drawn state.
#[derive(Debug, Clone)]
pub struct Adversary {
    config: AdversaryConfig,
    dim: usize,
    sequence: Vec<HermitianMatrix>,
    round: usize,
}

impl Adversary {
    pub fn new<R: Rng + ?Sized>(config: AdversaryConfig, dim: usize, rng: &mut R) -> Result<Self> {
        config.validate(dim)?;
        let rank = config.rank_limit.unwrap_or(dim);
        let sequence = if config.kind == AdversaryKind::FixedSequence {
            (0..config.sequence_len)
                .map(|_| random_projector(dim, rank, rng))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(Self { config, dim, sequence, round: 0 })
    }

    pub fn next_measurement<R: Rng + ?Sized>(
        &mut self,
        omega: &DensityMatrix,
        rho: &DensityMatrix,
        rng: &mut R,
    ) -> Result<HermitianMatrix> {
        let e = match self.config.kind {
            AdversaryKind::WorstCase => worst_case_measurement(omega, rho, self.config.rank_limit)?,
            AdversaryKind::RandomProjector => {
                random_projector(self.dim, self.config.rank_limit.unwrap_or(self.dim), rng)?
            }
            AdversaryKind::FixedSequence => self.sequence[self.round % self.sequence.len()].clone(),
        };
        self.round += 1;
        Ok(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    Exact,
    BatchNoisy,
}

/// How b_t is produced from tr(E_t ρ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackModel {
    pub kind: FeedbackKind,
    #[serde(default = "default_copies")]
    pub copies: u64,
    #[serde(default = "default_noise_scale")]
    pub noise_scale: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
    #[serde(default = "default_clamp")]
    pub clamp_feedback: bool,
}

fn default_copies() -> u64 {
    100
}
fn default_noise_scale() -> f64 {
    0.05
}
fn default_noise_std() -> f64 {
    0.1
}
fn default_clamp() -> bool {
    true
}

impl FeedbackModel {
    pub fn exact() -> Self {
        Self { kind: FeedbackKind::Exact, ..Self::batch_noisy() }
    }

    /// 100 copies, noise 0.05·N(0, 0.1), clamped.
    pub fn batch_noisy() -> Self {
        Self {
            kind: FeedbackKind::BatchNoisy,
            copies: default_copies(),
            noise_scale: default_noise_scale(),
            noise_std: default_noise_std(),
            clamp_feedback: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.copies == 0 {
            return Err(Error::Config("copies must be at least 1".into()));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::Config(format!("noise_scale must be ≥ 0, got {}", self.noise_scale)));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config(format!("noise_std must be ≥ 0, got {}", self.noise_std)));
        }
        Ok(())
    }
}

/// Feedback b_t for measurement E on the target.
///
/// Exact returns tr(Eρ). BatchNoisy averages `copies` Bernoulli(tr Eρ)
/// outcomes and adds one noise_scale·N(0, noise_std) draw per round; the
/// result is clamped to [0,1] unless `clamp_feedback` is off.
pub fn feedback<R: Rng + ?Sized>(
    e: &HermitianMatrix,
    target: &TargetState,
    model: &FeedbackModel,
    rng: &mut R,
) -> Result<f64> {
    if e.dim() != target.rho.dim() {
        return Err(Error::DimensionMismatch { expected: target.rho.dim(), got: e.dim() });
    }
    let p = trace_inner_unchecked(e, &target.rho).clamp(0.0, 1.0);
    match model.kind {
        FeedbackKind::Exact => Ok(p),
        FeedbackKind::BatchNoisy => {
            let hits = Binomial::new(model.copies, p)
                .map_err(|err| Error::InvalidArgument(err.to_string()))?
                .sample(rng);
            let mut b = hits as f64 / model.copies as f64;
            if model.noise_scale > 0.0 && model.noise_std > 0.0 {
                let normal = Normal::new(0.0, model.noise_std)
                    .map_err(|err| Error::InvalidArgument(err.to_string()))?;
                b += model.noise_scale * normal.sample(rng);
            }
            if model.clamp_feedback {
                b = b.clamp(0.0, 1.0);
            }
            Ok(b)
        }
    }
}
