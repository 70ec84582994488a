//! Batch execution of experiment configs.

use deepopt::engine::Engine;
use deepopt::tsp::{restart_hill_climb, MoveKind, TspProblem};
use deepopt::{Mode, Problem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{BaselineSpec, ExperimentConfig, LoadedProblem, RunSpec};
use crate::curves::{emit_curves, CurveKind};
use crate::error::{HarnessError, Result};
use crate::summary::{summarise, write_summary_csv};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "DEEPOPT_OUTPUT_ROOT";

/// One run of one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    /// `DO3`, `DO(E2E)3`, `baseline-2-opt`, ...
    pub algorithm: String,
    pub problem: String,
    /// Bits for binary problems, locations for the TSP.
    pub size: usize,
    pub seed: u64,
    /// Final fitness of each solution cycle (or baseline trial).
    pub fitness_series: Vec<f64>,
    pub best_fitness: f64,
    pub best_solution: Vec<usize>,
    pub optimum_fitness: Option<f64>,
    pub evaluations_to_optimum: Option<u64>,
    /// Solution cycles (trials) used up to and including the first one
    /// that reached the optimum.
    pub cycles_to_optimum: Option<usize>,
    pub total_evaluations: u64,
    pub wall_time_secs: f64,
}

impl ResultRecord {
    pub fn reached_optimum(&self) -> bool {
        self.evaluations_to_optimum.is_some()
    }

    /// TSP tour cost of the best solution (fitness is negated cost).
    pub fn best_cost(&self) -> f64 {
        -self.best_fitness
    }

    pub fn file_stem(&self) -> String {
        format!("{}-seed{:06}", sanitise(&self.algorithm), self.seed)
    }
}

pub(crate) fn sanitise(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn algorithm_label(spec: &RunSpec) -> String {
    let depth = spec.hidden_sizes.len();
    match spec.mode {
        Mode::Layerwise => format!("DO{depth}"),
        Mode::EndToEnd => format!("DO(E2E){depth}"),
    }
}

trait SolutionIndices {
    fn indices(&self) -> Vec<usize>;
}

impl SolutionIndices for Vec<u8> {
    fn indices(&self) -> Vec<usize> {
        self.iter().map(|&b| b as usize).collect()
    }
}

impl SolutionIndices for Vec<usize> {
    fn indices(&self) -> Vec<usize> {
        self.clone()
    }
}

fn run_generic<P>(problem: &P, spec: &RunSpec, seed: u64) -> Result<(deepopt::RunLog<P::Solution>, f64)>
where
    P: Problem,
{
    let config = spec.to_run_config(problem.visible_size(), seed);
    let start = Instant::now();
    let log = Engine::new(config, problem)?.run()?;
    Ok((log, start.elapsed().as_secs_f64()))
}

fn record_from_log<S: SolutionIndices>(
    config: &ExperimentConfig,
    problem: &LoadedProblem,
    spec: &RunSpec,
    seed: u64,
    log: deepopt::RunLog<S>,
    optimum: Option<f64>,
    wall: f64,
) -> ResultRecord {
    ResultRecord {
        experiment: config.name.clone(),
        algorithm: algorithm_label(spec),
        problem: problem.kind().to_owned(),
        size: problem.size(),
        seed,
        fitness_series: log.fitness_series(),
        best_fitness: log.best_fitness,
        best_solution: log.best_solution.map(|s| s.indices()).unwrap_or_default(),
        optimum_fitness: optimum,
        evaluations_to_optimum: log.target_hit.map(|h| h.evaluations),
        cycles_to_optimum: log.target_hit.map(|h| h.cycle + 1),
        total_evaluations: log.evaluations,
        wall_time_secs: wall,
    }
}

/// One Deep Optimisation run with the given seed.
pub fn run_do(config: &ExperimentConfig, problem: &LoadedProblem, spec: &RunSpec, seed: u64) -> Result<ResultRecord> {
    Ok(match problem {
        LoadedProblem::Htop(p) => {
            let (log, wall) = run_generic(p, spec, seed)?;
            record_from_log(config, problem, spec, seed, log, p.target_fitness(), wall)
        }
        LoadedProblem::McParity(p) => {
            let (log, wall) = run_generic(p, spec, seed)?;
            record_from_log(config, problem, spec, seed, log, p.target_fitness(), wall)
        }
        LoadedProblem::Tsp(p) => {
            let (log, wall) = run_generic(p, spec, seed)?;
            record_from_log(config, problem, spec, seed, log, p.target_fitness(), wall)
        }
    })
}

/// One restart hill-climber run with the given seed.
pub fn run_baseline(config: &ExperimentConfig, problem: &TspProblem, spec: &BaselineSpec, seed: u64) -> Result<ResultRecord> {
    let kind: MoveKind = spec.move_kind.parse()?;
    let instance = problem.instance();
    let n = instance.size();
    let steps = spec.steps.unwrap_or(n * n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let result = restart_hill_climb(instance, kind, spec.trials, steps, &mut rng)?;
    let wall = start.elapsed().as_secs_f64();
    let optimum = instance.known_optimum();
    let first_hit = optimum.and_then(|o| result.trial_costs.iter().position(|&c| c <= o));
    let per_trial = steps as u64 + 1;
    Ok(ResultRecord {
        experiment: config.name.clone(),
        algorithm: format!("baseline-{}", kind.name()),
        problem: "tsp".to_owned(),
        size: n,
        seed,
        fitness_series: result.trial_costs.iter().map(|c| -c).collect(),
        best_fitness: -result.best.cost,
        best_solution: result.best.order,
        optimum_fitness: optimum.map(|o| -o),
        evaluations_to_optimum: first_hit.map(|i| (i as u64 + 1) * per_trial),
        cycles_to_optimum: first_hit.map(|i| i + 1),
        total_evaluations: spec.trials as u64 * per_trial,
        wall_time_secs: wall,
    })
}

#[derive(Debug, Clone, Copy)]
enum Job<'a> {
    Do(&'a RunSpec, u64),
    Baseline(&'a BaselineSpec, u64),
}

/// Runs every repeat of every algorithm in `config` and returns the records
/// in a fixed order: DO runs by seed, then each baseline by seed. Nothing
/// is written to disk.
pub fn execute(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let problem = config.validate()?;
    let seeds: Vec<u64> = (0..config.repeats as u64).map(|i| config.seed + i).collect();
    let mut jobs = Vec::new();
    if let Some(run) = &config.run {
        jobs.extend(seeds.iter().map(|&s| Job::Do(run, s)));
    }
    for b in &config.baselines {
        jobs.extend(seeds.iter().map(|&s| Job::Baseline(b, s)));
    }
    jobs.par_iter()
        .map(|job| match *job {
            Job::Do(spec, seed) => run_do(config, &problem, spec, seed),
            Job::Baseline(spec, seed) => match &problem {
                LoadedProblem::Tsp(p) => run_baseline(config, p, spec, seed),
                _ => Err(HarnessError::Config("baselines are only defined for TSP problems".into())),
            },
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub repeats: Option<usize>,
    pub force: bool,
}

impl RunOptions {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(r) = self.repeats {
            config.repeats = r;
        }
        if let Some(d) = &self.output_dir {
            config.output_dir = Some(d.clone());
        }
    }
}

pub fn default_output_dir(config: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = &config.output_dir {
        return dir.clone();
    }
    let root = std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results"));
    root.join(sanitise(&config.name))
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub dir: PathBuf,
    pub records: Vec<ResultRecord>,
}

fn prepare_output(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let occupied = std::fs::read_dir(dir)
            .map_err(|e| HarnessError::io(dir, e))?
            .next()
            .is_some();
        if occupied && !force {
            return Err(HarnessError::OutputExists(dir.to_owned()));
        }
        if occupied {
            for sub in ["records", "curves"] {
                let p = dir.join(sub);
                if p.exists() {
                    std::fs::remove_dir_all(&p).map_err(|e| HarnessError::io(&p, e))?;
                }
            }
        }
    }
    for sub in ["", "records", "curves"] {
        let p = dir.join(sub);
        std::fs::create_dir_all(&p).map_err(|e| HarnessError::io(&p, e))?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

/// Validates, runs, and writes the experiment directory: `config.toml`,
/// `records/*.json` (one per run), `summary.csv` and `curves/`.
pub fn run_experiment(mut config: ExperimentConfig, options: &RunOptions) -> Result<ExperimentOutput> {
    options.apply(&mut config);
    config.validate()?;
    let dir = default_output_dir(&config);
    if dir.exists() && !options.force && std::fs::read_dir(&dir).map(|mut d| d.next().is_some()).unwrap_or(false) {
        return Err(HarnessError::OutputExists(dir));
    }

    let records = execute(&config)?;

    // Single writer once every run has finished.
    prepare_output(&dir, options.force)?;
    write_file(&dir.join("config.toml"), &config.to_toml()?)?;
    for r in &records {
        let path = dir.join("records").join(format!("{}.json", r.file_stem()));
        write_file(&path, &serde_json::to_string_pretty(r)?)?;
    }
    let rows = summarise(&records)?;
    write_summary_csv(&dir.join("summary.csv"), &rows)?;
    emit_curves(&records, CurveKind::FitnessTrajectory, &dir.join("curves"))?;
    Ok(ExperimentOutput { dir, records })
}

/// Loads every `records/*.json` below `dir`, sorted by experiment,
/// algorithm and seed.
pub fn load_records(dir: &Path) -> Result<Vec<ResultRecord>> {
    let mut files = Vec::new();
    collect_record_files(dir, &mut files)?;
    let mut records = Vec::with_capacity(files.len());
    for f in files {
        let text = std::fs::read_to_string(&f).map_err(|e| HarnessError::io(&f, e))?;
        records.push(serde_json::from_str::<ResultRecord>(&text)?);
    }
    records.sort_by(|a, b| {
        (&a.experiment, &a.algorithm, a.seed).cmp(&(&b.experiment, &b.algorithm, b.seed))
    });
    Ok(records)
}

fn collect_record_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .map(|e| e.map(|e| e.path()).map_err(|err| HarnessError::io(dir, err)))
        .collect::<Result<_>>()?;
    paths.sort();
    for p in paths {
        if p.is_dir() {
            collect_record_files(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "json")
            && p.parent().and_then(|d| d.file_name()).is_some_and(|n| n == "records")
        {
            out.push(p);
        }
    }
    Ok(())
}
