//! Experiment configuration files.
//!
//! One TOML document per experiment:
//!
//! ```toml
//! name = "htop32-do3"
//! repeats = 10
//! seed = 0
//!
//! [problem]
//! kind = "htop"
//! size = 32
//!
//! [run]
//! hidden_sizes = [24, 12, 6]
//! steps_per_solution = 320
//! total_solutions = 2000
//! transition_schedule = [400, 900, 1400]
//! learning_rates = [0.5]
//! ```
//!
//! Relative paths inside `[problem]` resolve against the config file's
//! directory.

use deepopt::binary::{HtopInstance, HtopWeighting, McParityInstance};
use deepopt::tsp::{parse_optima_registry, parse_tsplib, MoveKind, TspInstance, TspProblem};
use deepopt::{Mode, RunConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default = "one")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to `$DEEPOPT_OUTPUT_ROOT/<name>` or `results/<name>`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub problem: ProblemSpec,
    /// Absent for baseline-only experiments.
    #[serde(default)]
    pub run: Option<RunSpec>,
    #[serde(default)]
    pub baselines: Vec<BaselineSpec>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingSpec {
    #[default]
    Unweighted,
    BySpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Htop {
        size: usize,
        #[serde(default)]
        weighting: WeightingSpec,
    },
    McParity {
        modules: usize,
        #[serde(default = "default_module_size")]
        module_size: usize,
        #[serde(default = "default_coupling")]
        coupling: f64,
    },
    Tsp {
        instance: PathBuf,
        /// `name value` registry supplying the known optimum.
        #[serde(default)]
        optima: Option<PathBuf>,
        #[serde(default)]
        naive_move: Option<String>,
    },
}

fn default_module_size() -> usize {
    McParityInstance::DEFAULT_MODULE_SIZE
}

fn default_coupling() -> f64 {
    McParityInstance::DEFAULT_COUPLING
}

/// Mirrors [`RunConfig`] minus the seed, which comes from the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub hidden_sizes: Vec<usize>,
    /// Defaults to ten proposals per visible variable.
    #[serde(default)]
    pub steps_per_solution: Option<usize>,
    pub total_solutions: usize,
    #[serde(default)]
    pub transition_schedule: Vec<usize>,
    #[serde(default = "default_rates")]
    pub learning_rates: Vec<f64>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "one")]
    pub train_repeats: usize,
    #[serde(default)]
    pub naive_moves_per_latent_move: usize,
    #[serde(default)]
    pub stop_at_target: bool,
}

fn default_rates() -> Vec<f64> {
    vec![0.01]
}

impl RunSpec {
    pub fn to_run_config(&self, visible_size: usize, seed: u64) -> RunConfig {
        RunConfig {
            hidden_sizes: self.hidden_sizes.clone(),
            steps_per_solution: self
                .steps_per_solution
                .unwrap_or_else(|| RunConfig::default_steps(visible_size)),
            total_solutions: self.total_solutions,
            transition_schedule: self.transition_schedule.clone(),
            learning_rates: self.learning_rates.clone(),
            mode: self.mode,
            seed,
            train_repeats: self.train_repeats,
            naive_moves_per_latent_move: self.naive_moves_per_latent_move,
            stop_at_target: self.stop_at_target,
        }
    }
}

/// Restart hill-climber baseline (TSP only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSpec {
    #[serde(rename = "move")]
    pub move_kind: String,
    pub trials: usize,
    /// Defaults to `N^2` proposals per trial.
    #[serde(default)]
    pub steps: Option<usize>,
}

/// A problem with everything loaded from disk.
#[derive(Debug, Clone)]
pub enum LoadedProblem {
    Htop(HtopInstance),
    McParity(McParityInstance),
    Tsp(TspProblem),
}

impl LoadedProblem {
    pub fn kind(&self) -> &'static str {
        match self {
            LoadedProblem::Htop(_) => "htop",
            LoadedProblem::McParity(_) => "mc_parity",
            LoadedProblem::Tsp(_) => "tsp",
        }
    }

    /// Number of solution variables: bits, or locations for the TSP.
    pub fn size(&self) -> usize {
        match self {
            LoadedProblem::Htop(h) => h.size(),
            LoadedProblem::McParity(m) => m.size(),
            LoadedProblem::Tsp(t) => t.instance().size(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let ProblemSpec::Tsp { instance, optima, .. } = &mut self.problem {
            if instance.is_relative() {
                *instance = base.join(&*instance);
            }
            if let Some(o) = optima {
                if o.is_relative() {
                    *o = base.join(&*o);
                }
            }
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Checks everything that can be checked without running: value
    /// ranges, referenced files, engine configuration.
    pub fn validate(&self) -> Result<LoadedProblem> {
        if self.name.trim().is_empty() {
            return Err(HarnessError::Config("experiment name is empty".into()));
        }
        if self.repeats == 0 {
            return Err(HarnessError::Config("repeats must be at least 1".into()));
        }
        if self.run.is_none() && self.baselines.is_empty() {
            return Err(HarnessError::Config("nothing to run: no [run] and no [[baselines]]".into()));
        }
        let problem = self.load_problem()?;
        if let Some(run) = &self.run {
            run.to_run_config(visible_size(&problem), self.seed).validate()?;
        }
        for b in &self.baselines {
            b.move_kind.parse::<MoveKind>()?;
            if b.trials == 0 {
                return Err(HarnessError::Config("baseline trials must be at least 1".into()));
            }
            if !matches!(problem, LoadedProblem::Tsp(_)) {
                return Err(HarnessError::Config("baselines are only defined for TSP problems".into()));
            }
        }
        Ok(problem)
    }

    pub fn load_problem(&self) -> Result<LoadedProblem> {
        Ok(match &self.problem {
            ProblemSpec::Htop { size, weighting } => {
                let w = match weighting {
                    WeightingSpec::Unweighted => HtopWeighting::Unweighted,
                    WeightingSpec::BySpan => HtopWeighting::BySpan,
                };
                LoadedProblem::Htop(HtopInstance::with_weighting(*size, w)?)
            }
            ProblemSpec::McParity {
                modules,
                module_size,
                coupling,
            } => LoadedProblem::McParity(McParityInstance::new(*modules, *module_size, *coupling)?),
            ProblemSpec::Tsp {
                instance,
                optima,
                naive_move,
            } => {
                let inst = load_tsp_instance(instance, optima.as_deref())?;
                let mut problem = TspProblem::new(inst)?;
                if let Some(m) = naive_move {
                    problem = problem.with_naive_move(m.parse()?);
                }
                LoadedProblem::Tsp(problem)
            }
        })
    }
}

pub fn visible_size(problem: &LoadedProblem) -> usize {
    use deepopt::Problem;
    match problem {
        LoadedProblem::Htop(p) => p.visible_size(),
        LoadedProblem::McParity(p) => p.visible_size(),
        LoadedProblem::Tsp(p) => p.visible_size(),
    }
}

/// Reads a TSPLIB file and, when a registry is given, attaches the known
/// optimum recorded under the instance's name.
pub fn load_tsp_instance(path: &Path, optima: Option<&Path>) -> Result<TspInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let instance = parse_tsplib(&text).map_err(|e| HarnessError::InFile {
        path: path.to_owned(),
        source: e,
    })?;
    let optimum = match optima {
        Some(reg_path) => {
            let reg_text = std::fs::read_to_string(reg_path).map_err(|e| HarnessError::io(reg_path, e))?;
            let registry = parse_optima_registry(&reg_text).map_err(|e| HarnessError::InFile {
                path: reg_path.to_owned(),
                source: e,
            })?;
            registry.get(instance.name()).copied()
        }
        None => None,
    };
    Ok(instance.with_known_optimum(optimum))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HTOP: &str = r#"
name = "h"
repeats = 3
seed = 7

[problem]
kind = "htop"
size = 32

[run]
hidden_sizes = [24, 12, 6]
total_solutions = 10
transition_schedule = [2, 4, 6]
learning_rates = [0.5]
"#;

    #[test]
    fn parses_and_defaults() {
        let c = ExperimentConfig::from_toml(HTOP).unwrap();
        assert_eq!(c.repeats, 3);
        let run = c.run.as_ref().unwrap();
        let rc = run.to_run_config(32, 9);
        assert_eq!(rc.steps_per_solution, 320);
        assert_eq!(rc.seed, 9);
        assert_eq!(rc.mode, Mode::Layerwise);
        assert!(matches!(c.validate().unwrap(), LoadedProblem::Htop(_)));
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig::from_toml(HTOP).unwrap();
        let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn rejects_invalid() {
        assert!(ExperimentConfig::from_toml("name = 1").is_err());
        let unknown = HTOP.replace("seed = 7", "seed = 7\nbogus = 1");
        assert!(ExperimentConfig::from_toml(&unknown).is_err());
        let zero = HTOP.replace("repeats = 3", "repeats = 0");
        assert!(ExperimentConfig::from_toml(&zero).unwrap().validate().is_err());
        let sched = HTOP.replace("[2, 4, 6]", "[2, 4]");
        assert!(ExperimentConfig::from_toml(&sched).unwrap().validate().is_err());
        let size = HTOP.replace("size = 32", "size = 30");
        assert!(ExperimentConfig::from_toml(&size).unwrap().validate().is_err());
    }

    #[test]
    fn missing_tsp_file_is_an_io_error() {
        let text = r#"
name = "t"
[problem]
kind = "tsp"
instance = "definitely/missing.tsp"
[[baselines]]
move = "swap"
trials = 1
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        match c.validate() {
            Err(HarnessError::Io { path, .. }) => assert!(path.ends_with("missing.tsp")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn baselines_need_tsp() {
        let text = format!("{HTOP}\n[[baselines]]\nmove = \"swap\"\ntrials = 5\n");
        assert!(ExperimentConfig::from_toml(&text).unwrap().validate().is_err());
    }
}
