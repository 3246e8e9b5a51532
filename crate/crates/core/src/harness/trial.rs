use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{feedback, random_target, Adversary};
use crate::error::Result;
use crate::hermitian::{frobenius_norm, trace_inner_unchecked, DensityMatrix};
use crate::learner::{init_learner, RoundRecord};
use crate::rng::{derived_seed, stream_rng, StreamTag};
use crate::spectrahedron::{hindsight_best_with, HindsightOptions, Observation};

use super::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub rounds: Vec<RoundRecord>,
    /// L*_T, the hindsight-best total loss.
    pub hindsight_loss: f64,
    /// Reg_t for t = 1..=T.
    pub regret_curve: Vec<f64>,
    pub oracle_converged: bool,
    pub warning: Option<String>,
    /// max_t ‖E_t‖₂ observed during the run.
    pub max_measurement_norm: f64,
    /// Blocks opened by a doubling-trick learner (0 otherwise).
    pub blocks: u32,
    pub variational_stalls: usize,
}

impl TrialResult {
    pub fn final_regret(&self) -> f64 {
        *self.regret_curve.last().expect("horizon ≥ 1")
    }

    pub fn final_average_regret(&self) -> f64 {
        self.final_regret() / self.regret_curve.len() as f64
    }

    pub fn total_loss(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.cumulative_loss)
    }
}

/// One row of the across-trial average-regret curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateRow {
    pub t: usize,
    pub mean_avg_regret: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub std_avg_regret: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub trials: Vec<TrialResult>,
    pub aggregate: Vec<AggregateRow>,
}

impl ExperimentResult {
    pub fn mean_final_average_regret(&self) -> f64 {
        self.aggregate.last().map_or(0.0, |r| r.mean_avg_regret)
    }

    pub fn warnings(&self) -> impl Iterator<Item = (usize, &str)> {
        self.trials.iter().filter_map(|t| t.warning.as_deref().map(|w| (t.trial, w)))
    }
}

/// Plays one T-round game and scores it against the hindsight oracle.
///
/// Each trial draws from its own streams (target, adversary, feedback,
/// learner, oracle) derived from the master seed, so results do not depend on
/// which other trials run or in what order.
pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<TrialResult> {
    config.validate()?;
    let seed = config.master_seed;
    let ti = trial_index as u64;
    let d = config.dim();
    let loss = config.loss_function();

    let target = random_target(config.n_qubits, config.target, &mut stream_rng(seed, ti, StreamTag::Target))?;
    let mut adv_rng = stream_rng(seed, ti, StreamTag::Adversary);
    let mut fb_rng = stream_rng(seed, ti, StreamTag::Feedback);
    let mut adversary = Adversary::new(config.adversary.clone(), d, &mut adv_rng)?;
    let mut learner = init_learner(config.learner.kind, config.n_qubits, config.learning_rate()?)?
        .with_seed(derived_seed(seed, ti, StreamTag::Learner));

    let mut rounds = Vec::with_capacity(config.horizon);
    let mut observations = Vec::with_capacity(config.horizon);
    let mut max_norm: f64 = 0.0;
    for _ in 0..config.horizon {
        let omega = learner.predict().clone();
        let e = adversary.next_measurement(&omega, &target.rho, &mut adv_rng)?;
        let b = feedback(&e, &target, &config.feedback, &mut fb_rng)?;
        rounds.push(learner.observe(&e, b, &loss)?);
        max_norm = max_norm.max(frobenius_norm(&e));
        observations.push(Observation { measurement: e, feedback: b });
    }

    let oracle_seed = derived_seed(seed, ti, StreamTag::Oracle);
    let options = |extra: Vec<DensityMatrix>| HindsightOptions {
        tol: config.oracle_tol,
        max_iter: config.oracle_max_iter,
        restarts: 3,
        seed: oracle_seed,
        extra_starts: extra,
    };

    let mut warning = None;
    let mut converged = true;
    let (hindsight_loss, regret_curve) = if config.prefix_oracle {
        let mut curve = Vec::with_capacity(config.horizon);
        let mut warm = target.rho.clone();
        let mut last = 0.0;
        for t in 1..=config.horizon {
            let report = hindsight_best_with(&observations[..t], &loss, &options(vec![warm, target.rho.clone()]))?;
            converged &= report.converged;
            curve.push(rounds[t - 1].cumulative_loss - report.objective);
            last = report.objective;
            warm = report.solution;
        }
        (last, curve)
    } else {
        let report = hindsight_best_with(&observations, &loss, &options(vec![target.rho.clone()]))?;
        converged = report.converged;
        let mut comparator = 0.0;
        let curve = observations
            .iter()
            .zip(&rounds)
            .map(|(obs, rec)| {
                comparator += loss.value(trace_inner_unchecked(&obs.measurement, &report.solution), obs.feedback);
                rec.cumulative_loss - comparator
            })
            .collect();
        (report.objective, curve)
    };
    if !converged {
        warning = Some(format!(
            "hindsight oracle stopped at its iteration budget; regret uses its best objective {hindsight_loss:.6e}"
        ));
    }

    Ok(TrialResult {
        trial: trial_index,
        rounds,
        hindsight_loss,
        regret_curve,
        oracle_converged: converged,
        warning,
        max_measurement_norm: max_norm,
        blocks: learner.block().map_or(0, |b| b.beta),
        variational_stalls: learner.variational_stalls(),
    })
}

/// Mean and sample standard deviation of Reg_t/t across trials, per round.
pub fn aggregate(trials: &[TrialResult]) -> Vec<AggregateRow> {
    let Some(first) = trials.first() else { return Vec::new() };
    let n = trials.len();
    (0..first.regret_curve.len())
        .map(|i| {
            let t = i + 1;
            let values: Vec<f64> = trials.iter().map(|tr| tr.regret_curve[i] / t as f64).collect();
            let mean = values.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            AggregateRow { t, mean_avg_regret: mean, std_avg_regret: std, n_trials: n }
        })
        .collect()
}

/// Runs all trials in parallel and aggregates in trial order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(&trials);
    Ok(ExperimentResult { trials, aggregate })
}
