use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use qstate_online::error::Error;
use qstate_online::harness::{
    check_suite, run_experiment, run_figure, write_aggregate_csv, write_figure, write_trial_csv,
    ExperimentConfig, ExperimentSummary, Figure, SuiteName, SuiteOptions, FIGURE_HORIZON,
};

const EXIT_VALIDATION: u8 = 1;
const EXIT_SUITE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "qstate-online", about = "Online learning of quantum states: experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Score each prefix against its own hindsight optimum.
        #[arg(long)]
        prefix_oracle: bool,
    },
    /// Regenerate the data behind one panel of the regret figure.
    Reproduce {
        #[arg(long)]
        figure: Figure,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = FIGURE_HORIZON)]
        horizon: usize,
    },
    /// Run a randomized property suite.
    Check {
        #[arg(long)]
        suite: SuiteName,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// System qubits for the variational suite.
        #[arg(long, default_value_t = 1)]
        qubits: usize,
        /// Optimizer tolerance for the variational suite.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Print the version.
    Version,
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION })
}

fn write_json(path: &Path, json: &str) -> Result<(), Error> {
    std::fs::write(path, json)?;
    Ok(())
}

fn run(config: &Path, out: &Path, prefix_oracle: bool) -> Result<(), Error> {
    let text = std::fs::read_to_string(config)?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    cfg.prefix_oracle |= prefix_oracle;
    let start = Instant::now();
    let result = run_experiment(&cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(out)?;
    write_trial_csv(BufWriter::new(File::create(out.join("trials.csv"))?), &result.trials)?;
    write_aggregate_csv(BufWriter::new(File::create(out.join("aggregate.csv"))?), &result.aggregate)?;
    let summary = ExperimentSummary::new("run", &cfg, &result, elapsed);
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    write_json(&out.join("summary.json"), &summary.to_json())?;
    println!(
        "{} trials, T = {}: mean final average regret {:.6e}",
        cfg.trials, cfg.horizon, summary.mean_final_average_regret
    );
    Ok(())
}

fn reproduce(figure: Figure, trials: usize, seed: u64, out: &Path, horizon: usize) -> Result<(), Error> {
    let start = Instant::now();
    let curves = run_figure(figure, trials, seed, horizon)?;
    let elapsed = start.elapsed().as_secs_f64();
    write_figure(figure, &curves, out)?;
    let summaries: Vec<_> = curves
        .iter()
        .map(|c| ExperimentSummary::new(&c.label, &c.config, &c.result, elapsed / curves.len() as f64))
        .collect();
    for s in &summaries {
        for w in &s.warnings {
            eprintln!("warning: {}: {w}", s.label);
        }
        println!("{}: mean final average regret {:.6e}", s.label, s.mean_final_average_regret);
    }
    let json = serde_json::to_string_pretty(&summaries).expect("summaries serialize");
    write_json(&out.join(format!("fig{figure}_summary.json")), &json)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Run { config, out, prefix_oracle } => run(&config, &out, prefix_oracle),
        Command::Reproduce { figure, trials, seed, out, horizon } => reproduce(figure, trials, seed, &out, horizon),
        Command::Check { suite, draws, seed, qubits, tol } => {
            match check_suite(suite, &SuiteOptions { draws, seed, qubits, tol }) {
                Ok(report) => {
                    println!("{report}");
                    return if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_SUITE) };
                }
                Err(e) => Err(e),
            }
        }
        Command::Version => {
            println!("qstate-online {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
