use clap::{Args, Parser, Subcommand, ValueEnum};
use deepopt_harness::checks::{oracle, verify_fitness};
use deepopt_harness::experiment::default_output_dir;
use deepopt_harness::{
    emit_curves, load_records, run_experiment, summarise, summary_csv, CurveKind, ExperimentConfig,
    HarnessError, RunOptions,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Deep Optimisation experiment runner.
#[derive(Debug, Parser)]
#[command(name = "deepopt", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Override the config's base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the config's repeat count.
    #[arg(long, global = true)]
    repeats: Option<usize>,
    /// Output directory (default: $DEEPOPT_OUTPUT_ROOT/<name> or results/<name>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overwrite an existing output directory.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment config.
    Run { config: PathBuf },
    /// Summarise every record under a directory.
    Summarise {
        dir: PathBuf,
        /// Also write curve files of this kind into <dir>/curves.
        #[arg(long, value_enum)]
        curves: Option<CurveArg>,
    },
    /// Brute-force a small instance and compare with the closed form.
    Oracle {
        #[arg(value_parser = ["htop", "mc_parity"])]
        problem: String,
        size: usize,
    },
    /// Check the HTOP transformation and MC_parity worked examples.
    VerifyFitness,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CurveArg {
    Trajectory,
    Scaling,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, HarnessError> {
    let g = cli.global;
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let options = RunOptions {
                output_dir: g.out,
                seed: g.seed,
                repeats: g.repeats,
                force: g.force,
            };
            let mut preview = cfg.clone();
            options.apply(&mut preview);
            eprintln!(
                "running {} ({} repeats, seed {}) -> {}",
                preview.name,
                preview.repeats,
                preview.seed,
                default_output_dir(&preview).display()
            );
            let out = run_experiment(cfg, &options)?;
            print!("{}", summary_csv(&summarise(&out.records)?)?);
            eprintln!("wrote {} records to {}", out.records.len(), out.dir.display());
            Ok(true)
        }
        Command::Summarise { dir, curves } => {
            let records = load_records(&dir)?;
            let rows = summarise(&records)?;
            print!("{}", summary_csv(&rows)?);
            if let Some(kind) = curves {
                let kind = match kind {
                    CurveArg::Trajectory => CurveKind::FitnessTrajectory,
                    CurveArg::Scaling => CurveKind::EvaluationScaling,
                };
                let target = g.out.unwrap_or_else(|| dir.join("curves"));
                for p in emit_curves(&records, kind, &target)? {
                    eprintln!("wrote {}", p.display());
                }
            }
            Ok(true)
        }
        Command::Oracle { problem, size } => {
            let report = oracle(&problem, size)?;
            println!("{} N={}: max fitness {}", report.problem, report.size, report.max_fitness);
            println!("{} argmax strings:", report.argmax.len());
            for s in report.argmax.iter().take(64) {
                println!("  {}", s.iter().map(|b| char::from(b'0' + b)).collect::<String>());
            }
            if report.argmax.len() > 64 {
                println!("  ...");
            }
            println!("closed form {}", if report.consistent { "agrees" } else { "DISAGREES" });
            Ok(report.consistent)
        }
        Command::VerifyFitness => {
            let lines = verify_fitness()?;
            for l in &lines {
                println!(
                    "{} {:<40} expected {:<8} got {}",
                    if l.pass { "PASS" } else { "FAIL" },
                    l.label,
                    l.expected,
                    l.got
                );
            }
            Ok(lines.iter().all(|l| l.pass))
        }
    }
}
