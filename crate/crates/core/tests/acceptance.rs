//! Acceptance suite. Runs every headline criterion at its stated tolerance
//! and prints one PASS/FAIL line per criterion; exits non-zero if any fail.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qstate_online::adversary::AdversaryConfig;
use qstate_online::harness::{
    check_suite, run_experiment, run_figure, Curve, ExperimentConfig, Figure, SuiteName, SuiteOptions,
};
use qstate_online::learner::{InnerKind, LearnerKind};

const SEED: u64 = 0;
const SEEDS: usize = 20;
const N: usize = 4;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn suite(name: SuiteName, draws: usize) -> qstate_online::harness::SuiteReport {
    check_suite(name, &SuiteOptions::new(draws, SEED)).expect("suite runs")
}

fn solver_equivalence() -> Outcome {
    let start = Instant::now();
    let r = suite(SuiteName::Prop1Equivalence, 200);
    let elapsed = start.elapsed();
    outcome(r.passed() && within(elapsed, 30), format!("{r}; {:.1}s (limit 30s)", elapsed.as_secs_f64()))
}

fn tsallis_regret_bound() -> Outcome {
    let start = Instant::now();
    let l = 2.0;
    let m = 1.0;
    let mut ok = true;
    let mut ratios = Vec::new();
    let mut worst_slack = f64::INFINITY;
    for horizon in [100, 400, 1000] {
        let mut cfg = ExperimentConfig::standard(LearnerKind::RftlTsallis2, N, horizon, SEEDS, SEED);
        cfg.adversary = AdversaryConfig::worst_case(Some(1));
        let res = run_experiment(&cfg).expect("experiment runs");
        let bound = 2.0 * l * (m * horizon as f64).sqrt() + 1e-3;
        for tr in &res.trials {
            worst_slack = worst_slack.min(bound - tr.final_regret());
            ok &= tr.final_regret() <= bound;
        }
        let mean = res.trials.iter().map(|t| t.final_regret()).sum::<f64>() / SEEDS as f64;
        ratios.push(mean / (horizon as f64).sqrt());
    }
    let growth = ratios[2] / ratios[0];
    let elapsed = start.elapsed();
    ok &= growth <= 1.2 && within(elapsed, 300);
    outcome(
        ok,
        format!(
            "min slack to 2L√(MT) {worst_slack:.4}; Reg/√T = {:.4}, {:.4}, {:.4} (growth {growth:.3}, limit 1.2); {:.1}s",
            ratios[0],
            ratios[1],
            ratios[2],
            elapsed.as_secs_f64()
        ),
    )
}

fn doubling_small_loss() -> Outcome {
    let horizon = 1000;
    let regret_bound = 8.0 * std::f64::consts::LN_2 * N as f64 * (2.0 * horizon as f64).log2();
    let block_bound = (2.0 * horizon as f64).log2().ceil() as u32;
    let mut ok = true;
    let mut parts = Vec::new();
    for inner in [InnerKind::Meg, InnerKind::RftlVonNeumann] {
        let cfg = ExperimentConfig::standard(LearnerKind::DoublingTrick(inner), N, horizon, SEEDS, SEED);
        let res = run_experiment(&cfg).expect("experiment runs");
        let max_l_star = res.trials.iter().map(|t| t.hindsight_loss).fold(f64::NEG_INFINITY, f64::max);
        let max_regret = res.trials.iter().map(|t| t.final_regret()).fold(f64::NEG_INFINITY, f64::max);
        let max_blocks = res.trials.iter().map(|t| t.blocks).max().unwrap_or(0);
        ok &= max_l_star <= 1e-6 && max_regret <= regret_bound && max_blocks <= block_bound;
        parts.push(format!(
            "{}: max L* {max_l_star:.2e}, max regret {max_regret:.3} (bound {regret_bound:.3}), max blocks {max_blocks} (bound {block_bound})",
            cfg.learner.kind
        ));
    }
    outcome(ok, parts.join("; "))
}

fn final_avg(curves: &[Curve], label: &str) -> f64 {
    curves
        .iter()
        .find(|c| c.label == label)
        .unwrap_or_else(|| panic!("curve {label}"))
        .result
        .mean_final_average_regret()
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn rank_ordering() -> Outcome {
    let curves = run_figure(Figure::OneA, SEEDS, SEED, 1000).expect("figure runs");
    let ts1 = final_avg(&curves, "tsallis2_rank1");
    let vn1 = final_avg(&curves, "von_neumann_rank1");
    let tsf = final_avg(&curves, "tsallis2_full_rank");
    let vnf = final_avg(&curves, "von_neumann_full_rank");
    let gap = relative_gap(tsf, vnf);
    outcome(
        ts1 <= vn1 && gap <= 0.15,
        format!(
            "rank-1: tsallis2 {ts1:.4e} vs von Neumann {vn1:.4e} ({}); full rank: {tsf:.4e} vs {vnf:.4e}, relative gap {gap:.3} (limit 0.15)",
            if ts1 <= vn1 { "ordered" } else { "not ordered" }
        ),
    )
}

fn doubling_ordering() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for figure in [Figure::OneB, Figure::OneC] {
        let curves = run_figure(figure, SEEDS, SEED, 1000).expect("figure runs");
        for name in ["meg", "rftl_von_neumann"] {
            let fixed = &curves.iter().find(|c| c.label == format!("{name}_fixed")).unwrap().result;
            let doubling = &curves.iter().find(|c| c.label == format!("{name}_doubling")).unwrap().result;
            let wins = fixed
                .trials
                .iter()
                .zip(&doubling.trials)
                .filter(|(f, d)| d.final_average_regret() <= f.final_average_regret())
                .count();
            ok &= wins * 10 >= SEEDS * 8;
            parts.push(format!(
                "{figure} {name}: doubling ≤ fixed in {wins}/{SEEDS} seeds ({:.4e} vs {:.4e})",
                doubling.mean_final_average_regret(),
                fixed.mean_final_average_regret()
            ));
        }
        for variant in ["fixed", "doubling"] {
            let gap = relative_gap(
                final_avg(&curves, &format!("meg_{variant}")),
                final_avg(&curves, &format!("rftl_von_neumann_{variant}")),
            );
            ok &= gap <= 0.10;
            parts.push(format!("{figure} {variant}: MEG vs von Neumann relative gap {gap:.2e} (limit 0.10)"));
        }
    }
    outcome(ok, parts.join("; "))
}

fn one_step_inequality() -> Outcome {
    let r = suite(SuiteName::Lemma4, 1000);
    outcome(r.passed(), r.to_string())
}

fn identities() -> Outcome {
    let reports = [
        suite(SuiteName::BregmanIdentity, 1000),
        suite(SuiteName::GoldenThompson, 1000),
        suite(SuiteName::GradBound, 1000),
        suite(SuiteName::MaxDivergence, 10_000),
    ];
    let ok = reports.iter().all(|r| r.passed());
    outcome(ok, reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("; "))
}

fn variational() -> Outcome {
    let start = Instant::now();
    let r = suite(SuiteName::Variational, 50);
    let elapsed = start.elapsed();
    outcome(r.passed() && within(elapsed, 120), format!("{r}; {:.1}s (limit 120s)", elapsed.as_secs_f64()))
}

fn reproduce_into(dir: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_qstate-online"))
        .args(["reproduce", "--figure", "1a", "--trials", "5", "--seed", "7", "--out"])
        .arg(dir)
        .output()
        .expect("binary runs");
    assert!(status.status.success(), "reproduce failed: {}", String::from_utf8_lossy(&status.stderr));
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    reproduce_into(a.path());
    reproduce_into(b.path());
    let fa = csv_files(a.path());
    let fb = csv_files(b.path());
    let same = !fa.is_empty() && fa == fb;
    outcome(same, format!("{} CSV files, byte-identical: {same}", fa.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 closed-form vs iterative Tsallis-2 step", solver_equivalence),
        ("2 Tsallis-2 regret bound", tsallis_regret_bound),
        ("3 doubling trick, realizable small loss", doubling_small_loss),
        ("4 rank-1 / full-rank ordering (1a)", rank_ordering),
        ("5 doubling vs fixed step, MEG vs von Neumann (1b, 1c)", doubling_ordering),
        ("6 one-step inequality", one_step_inequality),
        ("7 identity and inequality suites", identities),
        ("8 variational predictor", variational),
        ("9 CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        failed += !o.passed as usize;
        println!(
            "criterion {name}: {} [{:.1}s] {}",
            if o.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
