use std::f64::consts::LN_2;

use qstate_online::adversary::{AdversaryConfig, AdversaryKind, FeedbackModel, Purity};
use qstate_online::harness::{run_experiment, ExperimentConfig};
use qstate_online::learner::{doubling_eta, InnerKind, LearnerKind, RoundRecord};

/// Single-copy Bernoulli feedback on random projections of a mixed qubit
/// keeps per-round losses bounded away from zero, so many blocks open and η
/// leaves the ½ cap.
fn noisy_single_qubit(inner: InnerKind, horizon: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::standard(LearnerKind::DoublingTrick(inner), 1, horizon, 4, 3);
    cfg.feedback = FeedbackModel { copies: 1, ..FeedbackModel::batch_noisy() };
    cfg.adversary = AdversaryConfig { kind: AdversaryKind::RandomProjector, ..AdversaryConfig::worst_case(Some(1)) };
    cfg.target = Purity::Mixed;
    cfg
}

/// (β, η_β, cumulative loss before the block's first round) per block.
fn block_starts(rounds: &[RoundRecord]) -> Vec<(u32, f64, f64)> {
    let mut out = Vec::new();
    let mut prev_block = 0;
    let mut prev_cum = 0.0;
    for r in rounds {
        if r.block != prev_block {
            out.push((r.block, r.eta, prev_cum));
            prev_block = r.block;
        }
        prev_cum = r.cumulative_loss;
    }
    out
}

#[test]
fn eta_is_constant_within_blocks_and_follows_schedule() {
    for inner in [InnerKind::Meg, InnerKind::RftlVonNeumann] {
        let res = run_experiment(&noisy_single_qubit(inner, 1500)).unwrap();
        for tr in &res.trials {
            for r in &tr.rounds {
                assert_eq!(r.eta, doubling_eta(1, r.block));
            }
            let blocks: Vec<u32> = block_starts(&tr.rounds).iter().map(|b| b.0).collect();
            let expected: Vec<u32> = (1..=tr.blocks).collect();
            assert_eq!(blocks, expected);
        }
    }
}

#[test]
fn eta_stays_in_bracket_of_cumulative_loss() {
    let n = 1.0;
    for inner in [InnerKind::Meg, InnerKind::RftlVonNeumann] {
        let res = run_experiment(&noisy_single_qubit(inner, 3000)).unwrap();
        let mut checked = 0;
        for tr in &res.trials {
            assert!(tr.blocks >= 6, "expected several blocks, got {}", tr.blocks);
            for (beta, eta, c) in block_starts(&tr.rounds) {
                if eta >= 0.5 {
                    continue;
                }
                let lo = (n * LN_2 / (c + 3.0)).sqrt();
                let hi = (2.0 * n * LN_2 / (c + 1.0)).sqrt();
                assert!(lo <= eta && eta <= hi, "block {beta}: eta {eta} outside [{lo}, {hi}] at C = {c}");
                checked += 1;
            }
        }
        assert!(checked >= 20);
    }
}

#[test]
fn block_count_is_logarithmic() {
    for inner in [InnerKind::Meg, InnerKind::RftlVonNeumann] {
        for horizon in [100, 1000, 3000] {
            let res = run_experiment(&noisy_single_qubit(inner, horizon)).unwrap();
            let bound = (2.0 * horizon as f64).log2();
            for tr in &res.trials {
                assert!(tr.blocks as f64 <= bound, "{} blocks for T = {horizon}", tr.blocks);
            }
        }
    }
}

#[test]
fn realizable_runs_have_zero_hindsight_loss() {
    for inner in [InnerKind::Meg, InnerKind::RftlVonNeumann] {
        let cfg = ExperimentConfig::standard(LearnerKind::DoublingTrick(inner), 2, 300, 4, 9);
        let res = run_experiment(&cfg).unwrap();
        for tr in &res.trials {
            assert!(tr.hindsight_loss <= 1e-10);
            assert!((tr.final_regret() - tr.total_loss()).abs() <= 1e-9);
        }
    }
}
