//! Online learners over density matrices behind one predict/observe interface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adversary::MAX_QUBITS;
use crate::error::{Error, Result};
use crate::hermitian::{eigh, frobenius_norm, DensityMatrix, HermitianMatrix};
use crate::loss::{loss_eval, LossFunction, LossKind};
use crate::spectrahedron::{meg_update, ogd_update, tsallis2_rftl_update, vn_rftl_update, GradientSum};
use crate::variational::variational_predict;

/// Slack on the [0,1] spectrum check for incoming measurements.
pub const MEASUREMENT_TOL: f64 = 1e-9;
/// Largest system the variational learner simulates.
pub const VARIATIONAL_MAX_QUBITS: usize = 2;
const VARIATIONAL_TOL: f64 = 1e-10;
const VARIATIONAL_MAX_ITERS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnerKind {
    Meg,
    RftlVonNeumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LearnerKind {
    RftlTsallis2,
    RftlVonNeumann,
    Meg,
    Ogd,
    DoublingTrick(InnerKind),
    RftlTsallis2Variational,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 7] = [
        LearnerKind::RftlTsallis2,
        LearnerKind::RftlVonNeumann,
        LearnerKind::Meg,
        LearnerKind::Ogd,
        LearnerKind::DoublingTrick(InnerKind::Meg),
        LearnerKind::DoublingTrick(InnerKind::RftlVonNeumann),
        LearnerKind::RftlTsallis2Variational,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::RftlTsallis2 => "rftl_tsallis2",
            LearnerKind::RftlVonNeumann => "rftl_von_neumann",
            LearnerKind::Meg => "meg",
            LearnerKind::Ogd => "ogd",
            LearnerKind::DoublingTrick(InnerKind::Meg) => "doubling_meg",
            LearnerKind::DoublingTrick(InnerKind::RftlVonNeumann) => "doubling_rftl_von_neumann",
            LearnerKind::RftlTsallis2Variational => "rftl_tsallis2_variational",
        }
    }

    pub fn is_doubling(self) -> bool {
        matches!(self, LearnerKind::DoublingTrick(_))
    }

    /// Regularizer geometry behind the automatic learning rate.
    fn is_entropic(self) -> bool {
        matches!(self, LearnerKind::RftlVonNeumann | LearnerKind::Meg | LearnerKind::DoublingTrick(_))
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown learner kind {s:?}")))
    }
}

impl Serialize for LearnerKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for LearnerKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How η is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningRate {
    Fixed(f64),
    /// Horizon-tuned rate. For the Frobenius-geometry learners (Tsallis-2,
    /// OGD) η = 1/(L·λ·√T) with λ a bound on ‖E_t‖₂; for the entropic ones
    /// η = √(ln d/(2T))/L.
    Auto { horizon: usize, lipschitz: f64, lambda: f64 },
}

impl LearningRate {
    pub fn resolve(self, kind: LearnerKind, n_qubits: usize) -> Result<f64> {
        let eta = match self {
            LearningRate::Fixed(eta) => eta,
            LearningRate::Auto { horizon, lipschitz, lambda } => {
                if horizon == 0 || !(lipschitz > 0.0) || !(lambda > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "auto learning rate needs T ≥ 1, L > 0, λ > 0 (got {horizon}, {lipschitz}, {lambda})"
                    )));
                }
                let t = horizon as f64;
                if kind.is_entropic() {
                    (n_qubits as f64 * std::f64::consts::LN_2 / (2.0 * t)).sqrt() / lipschitz
                } else {
                    1.0 / (lipschitz * lambda * t.sqrt())
                }
            }
        };
        if eta > 0.0 && eta.is_finite() {
            Ok(eta)
        } else {
            Err(Error::InvalidArgument(format!("learning rate must be positive and finite, got {eta}")))
        }
    }
}

/// η_β = min{√(n·ln 2/(2^β + 1)), ½}.
pub fn doubling_eta(n_qubits: usize, beta: u32) -> f64 {
    let threshold = 2f64.powi(beta as i32);
    (n_qubits as f64 * std::f64::consts::LN_2 / (threshold + 1.0)).sqrt().min(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockState {
    pub beta: u32,
    /// First round of the current block (1-based).
    pub block_start: usize,
    pub block_loss: f64,
}

impl BlockState {
    pub fn threshold(&self) -> f64 {
        2f64.powi(self.beta as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub loss: f64,
    pub cumulative_loss: f64,
    pub eta: f64,
    /// Block index β, or 0 for learners without blocks.
    pub block: u32,
    /// tr(ω_t²) of the prediction scored this round.
    pub prediction_purity: f64,
}

#[derive(Debug, Clone)]
pub struct LearnerState {
    kind: LearnerKind,
    n_qubits: usize,
    omega: DensityMatrix,
    grad_sum: GradientSum,
    eta: f64,
    round: usize,
    cumulative_loss: f64,
    block: Option<BlockState>,
    seed: u64,
    variational_stalls: usize,
}

/// Fresh learner predicting I/2ⁿ. Doubling-trick learners ignore `eta` and
/// start at block β = 1.
pub fn init_learner(kind: LearnerKind, n_qubits: usize, eta: LearningRate) -> Result<LearnerState> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!("qubit count must lie in 1..={MAX_QUBITS}, got {n_qubits}")));
    }
    if kind == LearnerKind::RftlTsallis2Variational && n_qubits > VARIATIONAL_MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "variational learner supports at most {VARIATIONAL_MAX_QUBITS} qubits, got {n_qubits}"
        )));
    }
    let d = 1usize << n_qubits;
    let (eta, block) = match kind {
        LearnerKind::DoublingTrick(_) => (
            doubling_eta(n_qubits, 1),
            Some(BlockState { beta: 1, block_start: 1, block_loss: 0.0 }),
        ),
        _ => (eta.resolve(kind, n_qubits)?, None),
    };
    Ok(LearnerState {
        kind,
        n_qubits,
        omega: DensityMatrix::maximally_mixed(d),
        grad_sum: GradientSum::new(d),
        eta,
        round: 1,
        cumulative_loss: 0.0,
        block,
        seed: 0,
        variational_stalls: 0,
    })
}

/// Fails unless E is Hermitian of dimension `d` with spectrum in [0,1] up to
/// [`MEASUREMENT_TOL`].
pub fn validate_measurement(e: &HermitianMatrix, d: usize) -> Result<()> {
    if e.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: e.dim() });
    }
    let eig = eigh(e)?;
    let (lo, hi) = (eig.eigenvalues[0], eig.eigenvalues[d - 1]);
    if lo < -MEASUREMENT_TOL {
        return Err(Error::MeasurementOutOfRange(lo));
    }
    if hi > 1.0 + MEASUREMENT_TOL {
        return Err(Error::MeasurementOutOfRange(hi));
    }
    Ok(())
}

impl LearnerState {
    /// Seed for the variational learner's circuit initializations.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn kind(&self) -> LearnerKind {
        self.kind
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Current prediction ω_t.
    pub fn predict(&self) -> &DensityMatrix {
        &self.omega
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Index of the next round to be played (1-based).
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn block(&self) -> Option<&BlockState> {
        self.block.as_ref()
    }

    pub fn grad_sum(&self) -> &GradientSum {
        &self.grad_sum
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.cumulative_loss
    }

    /// Rounds where the variational optimizer hit its iteration budget.
    pub fn variational_stalls(&self) -> usize {
        self.variational_stalls
    }

    /// Scores the current prediction against (E, b) and moves to the next one.
    pub fn observe(&mut self, e: &HermitianMatrix, b: f64, loss: &LossFunction) -> Result<RoundRecord> {
        validate_measurement(e, self.dim())?;
        if !b.is_finite() {
            return Err(Error::InvalidArgument(format!("feedback must be finite, got {b}")));
        }
        if self.kind.is_doubling() && loss.kind != LossKind::L2 {
            return Err(Error::InvalidArgument("the doubling trick requires the L2 loss".into()));
        }
        let z = crate::hermitian::trace_inner_unchecked(e, &self.omega);
        let (value, slope) = loss_eval(loss, z, b);
        let grad = e.scale(slope);
        debug_assert!(frobenius_norm(&grad) <= loss.lipschitz * frobenius_norm(e) * (1.0 + 1e-12) + 1e-12
            || !(0.0..=1.0).contains(&b));

        self.cumulative_loss += value;
        let record = RoundRecord {
            t: self.round,
            loss: value,
            cumulative_loss: self.cumulative_loss,
            eta: self.eta,
            block: self.block.map_or(0, |b| b.beta),
            prediction_purity: self.omega.purity(),
        };

        match self.kind {
            LearnerKind::RftlTsallis2 => {
                self.grad_sum.push(&grad);
                self.omega = tsallis2_rftl_update(&self.grad_sum, self.eta)?;
            }
            LearnerKind::RftlTsallis2Variational => {
                self.grad_sum.push(&grad);
                let seed = self.seed.wrapping_add(self.round as u64);
                let out = variational_predict(&self.grad_sum, self.eta, seed, VARIATIONAL_TOL, VARIATIONAL_MAX_ITERS)?;
                if !out.converged {
                    self.variational_stalls += 1;
                }
                self.omega = out.state;
            }
            LearnerKind::RftlVonNeumann => {
                self.grad_sum.push(&grad);
                self.omega = vn_rftl_update(&self.grad_sum, self.eta)?;
            }
            LearnerKind::Meg => self.omega = meg_update(&self.omega, &grad, self.eta)?,
            LearnerKind::Ogd => self.omega = ogd_update(&self.omega, &grad, self.eta)?,
            LearnerKind::DoublingTrick(inner) => {
                let block = self.block.as_mut().expect("doubling learner has a block");
                block.block_loss += value;
                if block.block_loss >= block.threshold() {
                    block.beta += 1;
                    block.block_start = self.round + 1;
                    block.block_loss = 0.0;
                    self.eta = doubling_eta(self.n_qubits, block.beta);
                    self.grad_sum.reset();
                    self.omega = DensityMatrix::maximally_mixed(self.dim());
                } else {
                    self.grad_sum.push(&grad);
                    self.omega = match inner {
                        InnerKind::Meg => meg_update(&self.omega, &grad, self.eta)?,
                        InnerKind::RftlVonNeumann => vn_rftl_update(&self.grad_sum, self.eta)?,
                    };
                }
            }
        }
        self.round += 1;
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{haar_random_pure, random_projector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fresh_learners_predict_maximally_mixed() {
        for kind in LearnerKind::ALL {
            let n = if kind == LearnerKind::RftlTsallis2Variational { 2 } else { 4 };
            let l = init_learner(kind, n, LearningRate::Fixed(0.1)).unwrap();
            assert_eq!(l.predict(), &DensityMatrix::maximally_mixed(1 << n));
        }
        assert!(init_learner(LearnerKind::Meg, 0, LearningRate::Fixed(0.1)).is_err());
        assert!(init_learner(LearnerKind::RftlTsallis2Variational, 3, LearningRate::Fixed(0.1)).is_err());
        assert!(init_learner(LearnerKind::Meg, 2, LearningRate::Fixed(0.0)).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in LearnerKind::ALL {
            assert_eq!(kind.name().parse::<LearnerKind>().unwrap(), kind);
        }
        assert!("rftl".parse::<LearnerKind>().is_err());
    }

    #[test]
    fn doubling_first_rate_is_capped() {
        // √(4·ln 2/3) ≈ 0.961 > ½
        let l = init_learner(LearnerKind::DoublingTrick(InnerKind::Meg), 4, LearningRate::Fixed(9.0)).unwrap();
        assert_eq!(l.eta(), 0.5);
        assert_eq!(l.block().unwrap().beta, 1);
        assert!((doubling_eta(4, 4) - (4.0 * std::f64::consts::LN_2 / 17.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn auto_rate() {
        let auto = LearningRate::Auto { horizon: 1000, lipschitz: 2.0, lambda: 1.0 };
        let eta = auto.resolve(LearnerKind::RftlTsallis2, 4).unwrap();
        assert!((eta - 0.0158113883).abs() < 1e-9);
        let eta = auto.resolve(LearnerKind::RftlVonNeumann, 4).unwrap();
        assert!((eta - (4.0 * std::f64::consts::LN_2 / 2000.0).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn doubling_blocks_end_at_powers() {
        for inner in [InnerKind::Meg, InnerKind::RftlVonNeumann] {
            let mut l = init_learner(LearnerKind::DoublingTrick(inner), 2, LearningRate::Fixed(0.1)).unwrap();
            let e = HermitianMatrix::zeros(4);
            let mut ends = Vec::new();
            let mut last_beta = 1;
            for _ in 0..30 {
                let r = l.observe(&e, 1.0, &LossFunction::L2).unwrap();
                assert_eq!(r.loss, 1.0);
                let beta = l.block().unwrap().beta;
                if beta != last_beta {
                    ends.push(r.t);
                    assert_eq!(l.block().unwrap().block_start, r.t + 1);
                    last_beta = beta;
                }
            }
            assert_eq!(ends, vec![2, 6, 14, 30]);
        }
    }

    #[test]
    fn doubling_restart_resets_prediction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut l = init_learner(LearnerKind::DoublingTrick(InnerKind::Meg), 2, LearningRate::Fixed(0.1)).unwrap();
        let e = random_projector(4, 1, &mut rng).unwrap();
        l.observe(&e, 1.0, &LossFunction::L2).unwrap();
        assert_ne!(l.predict(), &DensityMatrix::maximally_mixed(4));
        // Two unit losses from E = 0, b = 1 push the block loss past 2.
        l.observe(&HermitianMatrix::zeros(4), 1.0, &LossFunction::L2).unwrap();
        assert_eq!(l.block().unwrap().beta, 1);
        l.observe(&HermitianMatrix::zeros(4), 1.0, &LossFunction::L2).unwrap();
        assert_eq!(l.block().unwrap().beta, 2);
        assert_eq!(l.predict(), &DensityMatrix::maximally_mixed(4));
        assert!(l.grad_sum().total.is_zero());
    }

    #[test]
    fn doubling_rejects_l1() {
        let mut l = init_learner(LearnerKind::DoublingTrick(InnerKind::Meg), 1, LearningRate::Fixed(0.1)).unwrap();
        assert!(l.observe(&HermitianMatrix::zeros(2), 0.5, &LossFunction::L1).is_err());
    }

    #[test]
    fn stationary_feedback_keeps_prediction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = random_projector(4, 2, &mut rng).unwrap();
        let b = 0.5; // tr(E·I/4) for a rank-2 projector
        for kind in LearnerKind::ALL {
            for loss in [LossFunction::L1, LossFunction::L2] {
                if kind.is_doubling() && loss.kind == LossKind::L1 {
                    continue;
                }
                let mut l = init_learner(kind, 2, LearningRate::Fixed(0.3)).unwrap();
                let r = l.observe(&e, b, &loss).unwrap();
                assert!(r.loss < 1e-24);
                // The variational learner only approximates the stationary point.
                let tol = if kind == LearnerKind::RftlTsallis2Variational { 0.05 } else { 1e-12 };
                assert!(frobenius_norm(&(&**l.predict() - &*DensityMatrix::maximally_mixed(4))) < tol, "{kind}");
            }
        }
    }

    #[test]
    fn single_step_matches_update_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = random_projector(4, 1, &mut rng).unwrap();
        let mut l = init_learner(LearnerKind::RftlTsallis2, 2, LearningRate::Fixed(0.4)).unwrap();
        l.observe(&e, 0.9, &LossFunction::L2).unwrap();
        let grad = e.scale(2.0 * (0.25 - 0.9));
        let want = tsallis2_rftl_update(&GradientSum::single(grad), 0.4).unwrap();
        assert!(frobenius_norm(&(&**l.predict() - &*want)) < 1e-14);
    }

    #[test]
    fn rejects_invalid_measurements() {
        let mut l = init_learner(LearnerKind::Meg, 1, LearningRate::Fixed(0.1)).unwrap();
        let bad = HermitianMatrix::from_real_diagonal(&[1.0 + 1e-6, 0.0]);
        assert!(matches!(l.observe(&bad, 0.5, &LossFunction::L2), Err(Error::MeasurementOutOfRange(_))));
        let bad = HermitianMatrix::from_real_diagonal(&[-1e-6, 0.0]);
        assert!(l.observe(&bad, 0.5, &LossFunction::L2).is_err());
        let fine = HermitianMatrix::from_real_diagonal(&[1.0 + 1e-10, -1e-10]);
        assert!(l.observe(&fine, 0.5, &LossFunction::L2).is_ok());
        assert!(l.observe(&HermitianMatrix::identity(4), 0.5, &LossFunction::L2).is_err());
        assert!(l.observe(&HermitianMatrix::identity(2), f64::NAN, &LossFunction::L2).is_err());
    }

    #[test]
    fn records_are_consistent_and_deterministic() {
        let play = || {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let rho = haar_random_pure(2, &mut rng).unwrap().rho;
            let mut l = init_learner(LearnerKind::DoublingTrick(InnerKind::RftlVonNeumann), 2, LearningRate::Fixed(0.1))
                .unwrap();
            (0..50)
                .map(|_| {
                    let e = random_projector(4, 1, &mut rng).unwrap();
                    let b = crate::hermitian::trace_inner(&e, &rho).unwrap();
                    l.observe(&e, b, &LossFunction::L2).unwrap()
                })
                .collect::<Vec<_>>()
        };
        let a = play();
        assert_eq!(a, play());
        for w in a.windows(2) {
            assert!(w[1].cumulative_loss >= w[0].cumulative_loss);
            assert_eq!(w[1].t, w[0].t + 1);
        }
    }
}
