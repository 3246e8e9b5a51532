use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::str::FromStr;

use crate::adversary::{AdversaryConfig, FeedbackModel};
use crate::error::{Error, Result};
use crate::learner::{InnerKind, LearnerKind};

use super::config::{EtaSetting, ExperimentConfig};
use super::csv_io::{write_aggregate_csv, write_trial_csv};
use super::trial::{run_experiment, ExperimentResult};

/// Fixed learning rate of the non-adaptive baselines in panels (b) and (c).
pub const BASELINE_ETA: f64 = 0.5;
pub const FIGURE_QUBITS: usize = 4;
pub const FIGURE_HORIZON: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Tsallis-2 vs von Neumann RFTL under rank-1 and full-rank measurements.
    OneA,
    /// Fixed-rate vs doubling-trick MEG and RFTL-vN, exact feedback.
    OneB,
    /// As `OneB` with noisy batched feedback.
    OneC,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::OneA => "1a",
            Figure::OneB => "1b",
            Figure::OneC => "1c",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1a" => Ok(Figure::OneA),
            "1b" => Ok(Figure::OneB),
            "1c" => Ok(Figure::OneC),
            _ => Err(Error::InvalidArgument(format!("unknown figure {s:?}; expected 1a, 1b or 1c"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CurveSpec {
    pub label: String,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub config: ExperimentConfig,
    pub result: ExperimentResult,
}

/// The experiment behind each curve of a panel. All curves share the master
/// seed, so trial k sees the same target state in every curve.
pub fn figure_curves(which: Figure, trials: usize, seed: u64, horizon: usize) -> Vec<CurveSpec> {
    let base = |kind: LearnerKind| ExperimentConfig::standard(kind, FIGURE_QUBITS, horizon, trials, seed);
    match which {
        Figure::OneA => {
            let mut out = Vec::new();
            for (rank_label, rank) in [("rank1", Some(1)), ("full_rank", None)] {
                for (name, kind) in [("tsallis2", LearnerKind::RftlTsallis2), ("von_neumann", LearnerKind::RftlVonNeumann)] {
                    let mut config = base(kind);
                    config.adversary = AdversaryConfig::worst_case(rank);
                    out.push(CurveSpec { label: format!("{name}_{rank_label}"), config });
                }
            }
            out
        }
        Figure::OneB | Figure::OneC => {
            let feedback = if which == Figure::OneB { FeedbackModel::exact() } else { FeedbackModel::batch_noisy() };
            let mut out = Vec::new();
            for (name, inner, plain) in [
                ("meg", InnerKind::Meg, LearnerKind::Meg),
                ("rftl_von_neumann", InnerKind::RftlVonNeumann, LearnerKind::RftlVonNeumann),
            ] {
                let mut fixed = base(plain);
                fixed.learner.eta = EtaSetting::Fixed(BASELINE_ETA);
                fixed.feedback = feedback.clone();
                out.push(CurveSpec { label: format!("{name}_fixed"), config: fixed });
                let mut doubling = base(LearnerKind::DoublingTrick(inner));
                doubling.feedback = feedback.clone();
                out.push(CurveSpec { label: format!("{name}_doubling"), config: doubling });
            }
            out
        }
    }
}

/// Runs every curve of a panel.
pub fn run_figure(which: Figure, trials: usize, seed: u64, horizon: usize) -> Result<Vec<Curve>> {
    figure_curves(which, trials, seed, horizon)
        .into_iter()
        .map(|spec| {
            let result = run_experiment(&spec.config)?;
            Ok(Curve { label: spec.label, config: spec.config, result })
        })
        .collect()
}

/// Writes `fig<which>_<label>.csv` (aggregate) and
/// `fig<which>_<label>_trials.csv` (per round, per trial) for every curve.
pub fn write_figure(which: Figure, curves: &[Curve], out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    for c in curves {
        let stem = format!("fig{}_{}", which.name(), c.label);
        write_aggregate_csv(BufWriter::new(File::create(out_dir.join(format!("{stem}.csv")))?), &c.result.aggregate)?;
        write_trial_csv(BufWriter::new(File::create(out_dir.join(format!("{stem}_trials.csv")))?), &c.result.trials)?;
    }
    Ok(())
}

/// Runs a panel at the standard horizon and writes its CSV files.
pub fn reproduce_figure(which: Figure, trials: usize, seed: u64, out_dir: &Path) -> Result<Vec<Curve>> {
    let curves = run_figure(which, trials, seed, FIGURE_HORIZON)?;
    write_figure(which, &curves, out_dir)?;
    Ok(curves)
}
