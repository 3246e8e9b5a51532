//! Randomized checks of the inequalities and identities the regret analysis
//! rests on.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::adversary::{haar_random_pure, random_mixed};
use crate::error::{Error, Result};
use crate::hermitian::{
    bregman_vn, frobenius_norm, mat_exp, random_hermitian, random_hermitian_bounded, trace_distance,
    trace_inner_unchecked, DensityMatrix, HermitianMatrix,
};
use crate::loss::{loss_eval, LossFunction};
use crate::rng::{stream_rng, StreamTag};
use crate::spectrahedron::{
    meg_update, sdp_oracle_update, tsallis2_objective, tsallis2_rftl_update, vn_rftl_update, GradientSum,
};
use crate::variational::variational_predict;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Lemma4,
    GoldenThompson,
    BregmanIdentity,
    Prop1Equivalence,
    GradBound,
    MaxDivergence,
    Variational,
}

impl SuiteName {
    pub const ALL: [SuiteName; 7] = [
        SuiteName::Lemma4,
        SuiteName::GoldenThompson,
        SuiteName::BregmanIdentity,
        SuiteName::Prop1Equivalence,
        SuiteName::GradBound,
        SuiteName::MaxDivergence,
        SuiteName::Variational,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::Lemma4 => "lemma4",
            SuiteName::GoldenThompson => "golden_thompson",
            SuiteName::BregmanIdentity => "bregman_identity",
            SuiteName::Prop1Equivalence => "prop1_equivalence",
            SuiteName::GradBound => "grad_bound",
            SuiteName::MaxDivergence => "max_divergence",
            SuiteName::Variational => "variational",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub draws: usize,
    pub seed: u64,
    /// System size for the variational suite.
    pub qubits: usize,
    /// Optimizer tolerance for the variational suite.
    pub tol: f64,
}

impl SuiteOptions {
    pub fn new(draws: usize, seed: u64) -> Self {
        Self { draws, seed, qubits: 1, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub draws: usize,
    pub passes: usize,
    /// Passes needed for the suite to count as passed.
    pub required: usize,
    /// Largest value of the suite's primary violation measure.
    pub max_violation: f64,
    pub tolerance: f64,
    /// Secondary statistics, by name.
    pub details: Vec<(String, f64)>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.passes >= self.required
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}/{} passed (need {}), max violation {:.3e} (tol {:.1e})",
            self.suite, self.passes, self.draws, self.required, self.max_violation, self.tolerance
        )?;
        for (k, v) in &self.details {
            write!(f, ", {k} {v:.6e}")?;
        }
        Ok(())
    }
}

struct Tally {
    passes: usize,
    max_violation: f64,
}

impl Tally {
    fn new() -> Self {
        Self { passes: 0, max_violation: f64::NEG_INFINITY }
    }

    fn add(&mut self, violation: f64, ok: bool) {
        self.max_violation = self.max_violation.max(violation);
        self.passes += ok as usize;
    }

    fn report(self, suite: SuiteName, draws: usize, required: usize, tolerance: f64, details: Vec<(String, f64)>) -> SuiteReport {
        SuiteReport {
            suite: suite.name().into(),
            draws,
            passes: self.passes,
            required,
            max_violation: self.max_violation,
            tolerance,
            details,
        }
    }
}

fn random_qubits(rng: &mut ChaCha20Rng, max: usize) -> usize {
    rng.random_range(1..=max)
}

pub fn check_suite(name: SuiteName, opts: &SuiteOptions) -> Result<SuiteReport> {
    if opts.draws == 0 {
        return Err(Error::InvalidArgument("draws must be at least 1".into()));
    }
    let mut rng = stream_rng(opts.seed, name as u64, StreamTag::Suite);
    let n = opts.draws;
    match name {
        SuiteName::Lemma4 => lemma4(n, &mut rng),
        SuiteName::GoldenThompson => golden_thompson(n, &mut rng),
        SuiteName::BregmanIdentity => bregman_identity(n, &mut rng),
        SuiteName::Prop1Equivalence => prop1_equivalence(n, &mut rng),
        SuiteName::GradBound => grad_bound(n, &mut rng),
        SuiteName::MaxDivergence => max_divergence(n, &mut rng),
        SuiteName::Variational => variational(opts, &mut rng),
    }
}

/// η·ℓ(tr Eω_{t−1}) − η/(1−2η)·ℓ(tr Eρ) ≤ B(ρ‖ω_{t−1}) − B(ρ‖ω_t) for one
/// exponentiated step on the L2 loss, measured once for the MEG form and once
/// for the closed-form RFTL step.
fn lemma4(draws: usize, rng: &mut ChaCha20Rng) -> Result<SuiteReport> {
    const TOL: f64 = 1e-8;
    let loss = LossFunction::L2;
    let mut tally = Tally::new();
    for _ in 0..draws {
        let n = random_qubits(rng, 4);
        let d = 1 << n;
        let eta = rng.random_range(0.01..0.49);
        let rho = if rng.random() { haar_random_pure(n, rng)?.rho } else { random_mixed(n, rng)?.rho };
        let e = random_hermitian_bounded(d, 1.0, rng)?;
        let b: f64 = rng.random_range(0.0..=1.0);

        let check = |prev: &DensityMatrix, next: &DensityMatrix| -> Result<f64> {
            let lhs = eta * loss.value(trace_inner_unchecked(&e, prev), b)
                - eta / (1.0 - 2.0 * eta) * loss.value(trace_inner_unchecked(&e, &rho), b);
            let rhs = bregman_vn(&rho, prev)? - bregman_vn(&rho, next)?;
            Ok(lhs - rhs)
        };

        let prev = random_mixed(n, rng)?.rho;
        let (_, slope) = loss_eval(&loss, trace_inner_unchecked(&e, &prev), b);
        let next = meg_update(&prev, &e.scale(slope), eta)?;
        let v_meg = check(&prev, &next)?;

        let g_prev = GradientSum::single(random_hermitian(d, rng));
        let prev = vn_rftl_update(&g_prev, eta)?;
        let (_, slope) = loss_eval(&loss, trace_inner_unchecked(&e, &prev), b);
        let mut g = g_prev.clone();
        g.push(&e.scale(slope));
        let next = vn_rftl_update(&g, eta)?;
        let v_vn = check(&prev, &next)?;

        let v = v_meg.max(v_vn);
        tally.add(v, v <= TOL);
    }
    Ok(tally.report(SuiteName::Lemma4, draws, draws, TOL, vec![]))
}

/// tr e^{A+B} ≤ tr(e^A e^B); every tenth draw uses commuting (diagonal) A, B,
/// where equality holds.
fn golden_thompson(draws: usize, rng: &mut ChaCha20Rng) -> Result<SuiteReport> {
    const TOL: f64 = 1e-9;
    let mut tally = Tally::new();
    let mut commuting_gap: f64 = 0.0;
    for k in 0..draws {
        let d = 1 << random_qubits(rng, 4);
        let (a, b) = if k % 10 == 9 {
            let diag = |rng: &mut ChaCha20Rng| -> Vec<f64> { (0..d).map(|_| rng.random_range(-2.0..=2.0)).collect() };
            let (x, y) = (diag(rng), diag(rng));
            (HermitianMatrix::from_real_diagonal(&x), HermitianMatrix::from_real_diagonal(&y))
        } else {
            (random_hermitian_bounded(d, 2.0, rng)?, random_hermitian_bounded(d, 2.0, rng)?)
        };
        let lhs = mat_exp(&(&a + &b))?.trace();
        let rhs = trace_inner_unchecked(&mat_exp(&a)?, &mat_exp(&b)?);
        let v = lhs - rhs;
        if k % 10 == 9 {
            commuting_gap = commuting_gap.max(v.abs() / rhs);
        }
        tally.add(v, v <= TOL);
    }
    Ok(tally.report(
        SuiteName::GoldenThompson,
        draws,
        draws,
        TOL,
        vec![("max_commuting_relative_gap".into(), commuting_gap)],
    ))
}

/// Φ(X) − Φ(Y) − tr(∇Φ(Y)(X − Y)) = ‖X − Y‖₂² for the RFTL potential
/// Φ(X) = η·tr(GX) + tr(X²) − 1.
fn bregman_identity(draws: usize, rng: &mut ChaCha20Rng) -> Result<SuiteReport> {
    const TOL: f64 = 1e-10;
    let mut tally = Tally::new();
    for _ in 0..draws {
        let n = random_qubits(rng, 4);
        let d = 1 << n;
        let eta = rng.random_range(0.01..=1.0);
        let g = GradientSum::single(random_hermitian(d, rng));
        let x = random_mixed(n, rng)?.rho;
        let y = if rng.random() { haar_random_pure(n, rng)?.rho } else { random_mixed(n, rng)?.rho };
        let grad_y = &g.total.scale(eta) + &y.scale(2.0);
        let diff = &*x - &*y;
        let breg = tsallis2_objective(&g, eta, &x) - tsallis2_objective(&g, eta, &y) - trace_inner_unchecked(&grad_y, &diff);
        let v = (breg - frobenius_norm(&diff).powi(2)).abs();
        tally.add(v, v <= TOL);
    }
    Ok(tally.report(SuiteName::BregmanIdentity, draws, draws, TOL, vec![]))
}

/// Closed-form spectral RFTL step against an independent projected-gradient
/// solve of the same program.
fn prop1_equivalence(draws: usize, rng: &mut ChaCha20Rng) -> Result<SuiteReport> {
    const DIST_TOL: f64 = 1e-6;
    const GAP_TOL: f64 = 1e-8;
    let mut tally = Tally::new();
    let mut max_gap: f64 = 0.0;
    for _ in 0..draws {
        let d = [2, 4, 8, 16][rng.random_range(0..4)];
        let eta = rng.random_range(0.01..=1.0);
        let g = GradientSum::single(random_hermitian(d, rng).scale(rng.random_range(0.1..=10.0)));
        let closed = tsallis2_rftl_update(&g, eta)?;
        let oracle = sdp_oracle_update(&g, eta, 1e-13, 100_000)?;
        let dist = frobenius_norm(&(&*closed - &*oracle.solution));
        let gap = (tsallis2_objective(&g, eta, &closed) - oracle.objective).abs();
        max_gap = max_gap.max(gap);
        tally.add(dist, dist <= DIST_TOL && gap <= GAP_TOL);
    }
    Ok(tally.report(SuiteName::Prop1Equivalence, draws, draws, DIST_TOL, vec![("max_objective_gap".into(), max_gap)]))
}

/// ‖ℓ′(tr Eω)·E‖₂ ≤ L·‖E‖₂ for both losses on the valid domain.
fn grad_bound(draws: usize, rng: &mut ChaCha20Rng) -> Result<SuiteReport> {
    const TOL: f64 = 1e-10;
    let mut tally = Tally::new();
    for k in 0..draws {
        let n = random_qubits(rng, 4);
        let d = 1 << n;
        let loss = if k % 2 == 0 { LossFunction::L2 } else { LossFunction::L1 };
        let e = crate::adversary::random_projector(d, rng.random_range(1..=d), rng)?.scale(rng.random_range(0.0..=1.0));
        let omega = random_mixed(n, rng)?.rho;
        let b = rng.random_range(0.0..=1.0);
        let (_, slope) = loss_eval(&loss, trace_inner_unchecked(&e, &omega), b);
        let v = frobenius_norm(&e.scale(slope)) - loss.lipschitz * frobenius_norm(&e);
        tally.add(v, v <= TOL);
    }
    Ok(tally.report(SuiteName::GradBound, draws, draws, TOL, vec![]))
}

/// B(φ‖I/d) for pure φ never exceeds ln d and reaches it.
fn max_divergence(draws: usize, rng: &mut ChaCha20Rng) -> Result<SuiteReport> {
    const ABOVE_TOL: f64 = 1e-9;
    const BELOW_TOL: f64 = 1e-6;
    let mut tally = Tally::new();
    let mut max_below: f64 = 0.0;
    let n = 4;
    let bound = n as f64 * std::f64::consts::LN_2;
    let mixed = DensityMatrix::maximally_mixed(1 << n);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..draws {
        let phi = haar_random_pure(n, rng)?.rho;
        let b = bregman_vn(&phi, &mixed)?;
        best = best.max(b);
        max_below = max_below.max(bound - b);
        tally.add(b - bound, b <= bound + ABOVE_TOL);
    }
    let reached = bound - best <= BELOW_TOL;
    let mut report = tally.report(SuiteName::MaxDivergence, draws, draws, ABOVE_TOL, vec![
        ("n_ln2_minus_max".into(), bound - best),
        ("largest_shortfall".into(), max_below),
    ]);
    if !reached {
        report.passes = 0;
    }
    Ok(report)
}

/// Variational predictions against the closed form, η = 0.3; at least 90%
/// must land within trace distance 1e-2.
fn variational(opts: &SuiteOptions, rng: &mut ChaCha20Rng) -> Result<SuiteReport> {
    const TOL: f64 = 1e-2;
    let d = 1usize
        .checked_shl(opts.qubits as u32)
        .filter(|_| (1..=crate::learner::VARIATIONAL_MAX_QUBITS).contains(&opts.qubits))
        .ok_or_else(|| Error::InvalidArgument(format!("variational suite supports 1 or 2 qubits, got {}", opts.qubits)))?;
    let eta = 0.3;
    let mut tally = Tally::new();
    let mut stalled = 0;
    for _ in 0..opts.draws {
        let g = GradientSum::single(random_hermitian(d, rng));
        let out = variational_predict(&g, eta, rng.random(), opts.tol, 5000)?;
        let dist = trace_distance(&out.state, &*tsallis2_rftl_update(&g, eta)?)?;
        stalled += (!out.converged) as usize;
        tally.add(dist, dist <= TOL);
    }
    let required = (opts.draws * 9).div_ceil(10);
    Ok(tally.report(SuiteName::Variational, opts.draws, required, TOL, vec![("stalled".into(), stalled as f64)]))
}
