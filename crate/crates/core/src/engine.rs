//! Deep Optimisation search loop.
//!
//! Each solution cycle resets a candidate, hill-climbs it with variation
//! generated at the current depth, then uses the result as one training
//! example for the autoencoder. Variation at depth 0 is the problem's own
//! move; at depth `n` it is a substitution on hidden layer `n` decoded back
//! to the visible layer. Transitions, fired after fixed numbers of solution
//! cycles, move the variation source one layer deeper (layerwise mode) or
//! straight to the deepest layer (end-to-end mode).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ae::Autoencoder;
use crate::error::{Error, Result};
use crate::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Grow the network one hidden layer per transition.
    #[default]
    Layerwise,
    /// Build every layer up front; one transition jumps to the deepest.
    EndToEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Hidden layer widths, shallowest first. Empty means no model.
    pub hidden_sizes: Vec<usize>,
    pub steps_per_solution: usize,
    pub total_solutions: usize,
    /// Completed solution cycles after which each transition fires.
    pub transition_schedule: Vec<usize>,
    /// One rate for the whole run, or one per variation depth
    /// (`hidden_sizes.len() + 1` entries).
    pub learning_rates: Vec<f64>,
    pub mode: Mode,
    pub seed: u64,
    /// Training steps on each optimised solution.
    pub train_repeats: usize,
    /// Once variation comes from a hidden layer, each cycle ends with a
    /// problem-move polishing phase holding this many proposals per latent
    /// proposal. Zero disables it.
    pub naive_moves_per_latent_move: usize,
    /// End the run at the first cycle that reaches the problem's target.
    pub stop_at_target: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hidden_sizes: Vec::new(),
            steps_per_solution: 0,
            total_solutions: 0,
            transition_schedule: Vec::new(),
            learning_rates: vec![0.01],
            mode: Mode::Layerwise,
            seed: 0,
            train_repeats: 1,
            naive_moves_per_latent_move: 0,
            stop_at_target: false,
        }
    }
}

impl RunConfig {
    /// Ten proposals per visible variable.
    pub fn default_steps(visible_size: usize) -> usize {
        10 * visible_size
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.hidden_sizes.contains(&0) {
            return bad("hidden layer sizes must be positive".into());
        }
        if self.learning_rates.is_empty()
            || self.learning_rates.iter().any(|&r| !(r > 0.0 && r.is_finite()))
        {
            return bad("learning rates must be positive and finite".into());
        }
        let layers = self.hidden_sizes.len();
        if self.learning_rates.len() != 1 && self.learning_rates.len() != layers + 1 {
            return bad(format!(
                "expected 1 or {} learning rates, got {}",
                layers + 1,
                self.learning_rates.len()
            ));
        }
        if self.train_repeats == 0 {
            return bad("train_repeats must be at least 1".into());
        }
        if self.transition_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return bad("transition schedule must be strictly increasing".into());
        }
        let expected = match (layers, self.mode) {
            (0, _) => 0,
            (_, Mode::Layerwise) => layers,
            (_, Mode::EndToEnd) => 1,
        };
        if self.transition_schedule.len() != expected {
            return bad(format!(
                "{:?} mode with {layers} hidden layers needs {expected} transition points, got {}",
                self.mode,
                self.transition_schedule.len()
            ));
        }
        Ok(())
    }

    fn learning_rate(&self, variation_depth: usize) -> f64 {
        let i = variation_depth.min(self.learning_rates.len() - 1);
        self.learning_rates[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchState<S> {
    /// 0 for problem-level moves, `n` for substitutions on hidden layer `n`.
    pub active_depth: usize,
    /// Hidden activations at `active_depth`; empty at depth 0.
    pub latent: Vec<f64>,
    pub solution: S,
    pub fitness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Keep,
    Reject,
}

/// Keep unless the candidate is strictly worse; equal fitness is kept so the
/// latent state can drift.
pub fn accept_rule(parent_fitness: f64, candidate_fitness: f64) -> Result<Decision> {
    for f in [parent_fitness, candidate_fitness] {
        if !f.is_finite() {
            return Err(Error::NonFiniteFitness(f));
        }
    }
    Ok(if candidate_fitness >= parent_fitness {
        Decision::Keep
    } else {
        Decision::Reject
    })
}

fn checked_fitness<P: Problem>(problem: &P, s: &P::Solution) -> Result<f64> {
    let f = problem.fitness(s);
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::NonFiniteFitness(f))
    }
}

/// Fresh starting point for a solution cycle. Depth 0 draws from the
/// problem's uniform initialiser; depth `n` draws a `U[-1, 1]` latent vector
/// at layer `n` and decodes it.
pub fn reset_state<P: Problem, R: Rng + ?Sized>(
    model: Option<&Autoencoder>,
    depth: usize,
    problem: &P,
    rng: &mut R,
) -> Result<SearchState<P::Solution>> {
    if depth == 0 {
        let solution = problem.random_solution(rng);
        let fitness = checked_fitness(problem, &solution)?;
        return Ok(SearchState {
            active_depth: 0,
            latent: Vec::new(),
            solution,
            fitness,
        });
    }
    let model = model.ok_or(Error::DepthOutOfRange { depth, max: 0 })?;
    let width = model.hidden_size(depth)?;
    let latent: Vec<f64> = (0..width).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let decoded = model.decode(&latent, depth)?;
    let solution = problem.interpret(&decoded, rng);
    let fitness = checked_fitness(problem, &solution)?;
    Ok(SearchState {
        active_depth: depth,
        latent,
        solution,
        fitness,
    })
}

/// One candidate from `state`, which is left untouched. At depth `n >= 1`
/// a single latent component is overwritten with a uniform draw from
/// `{-1, +1}` and the result is decoded and interpreted.
pub fn propose_variation<P: Problem, R: Rng + ?Sized>(
    state: &SearchState<P::Solution>,
    model: Option<&Autoencoder>,
    problem: &P,
    rng: &mut R,
) -> Result<SearchState<P::Solution>> {
    if state.active_depth == 0 {
        return propose_naive(state, problem, rng);
    }
    let model = model.ok_or(Error::DepthOutOfRange {
        depth: state.active_depth,
        max: 0,
    })?;
    let mut latent = state.latent.clone();
    if latent.is_empty() {
        return Err(Error::LengthMismatch {
            expected: model.hidden_size(state.active_depth)?,
            got: 0,
        });
    }
    let i = rng.gen_range(0..latent.len());
    latent[i] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let decoded = model.decode(&latent, state.active_depth)?;
    let solution = problem.interpret(&decoded, rng);
    let fitness = checked_fitness(problem, &solution)?;
    Ok(SearchState {
        active_depth: state.active_depth,
        latent,
        solution,
        fitness,
    })
}

/// Problem-level move that keeps the latent vector as it is.
fn propose_naive<P: Problem, R: Rng + ?Sized>(
    state: &SearchState<P::Solution>,
    problem: &P,
    rng: &mut R,
) -> Result<SearchState<P::Solution>> {
    let solution = problem.naive_variation(&state.solution, rng);
    let fitness = checked_fitness(problem, &solution)?;
    Ok(SearchState {
        active_depth: state.active_depth,
        latent: state.latent.clone(),
        solution,
        fitness,
    })
}

/// A single proposal seen by a [`solution_cycle_with`] observer.
pub struct MoveEvent<'a, S> {
    /// 0-based proposal index within the cycle.
    pub step: usize,
    pub parent: &'a SearchState<S>,
    pub candidate: &'a SearchState<S>,
    pub decision: Decision,
    /// True when the proposal came from the problem's own move rather than
    /// from the latent layer.
    pub naive: bool,
}

/// Runs exactly `steps` proposals from `state`. Returns the final state and
/// the number of kept proposals.
pub fn solution_cycle<P: Problem, R: Rng + ?Sized>(
    state: SearchState<P::Solution>,
    model: Option<&Autoencoder>,
    problem: &P,
    steps: usize,
    rng: &mut R,
) -> Result<(SearchState<P::Solution>, usize)> {
    solution_cycle_with(state, model, problem, steps, 0, rng, |_| {})
}

/// [`solution_cycle`] with a problem-move polishing phase and a
/// per-proposal observer. When `naive_per_latent > 0` and the state is at
/// depth >= 1, the first `ceil(steps / (naive_per_latent + 1))` proposals
/// are latent and the rest are problem moves. Latent proposals decode the
/// whole solution afresh, so problem moves only stick once latent search is
/// over.
pub fn solution_cycle_with<P, R, F>(
    mut state: SearchState<P::Solution>,
    model: Option<&Autoencoder>,
    problem: &P,
    steps: usize,
    naive_per_latent: usize,
    rng: &mut R,
    mut observe: F,
) -> Result<(SearchState<P::Solution>, usize)>
where
    P: Problem,
    R: Rng + ?Sized,
    F: FnMut(MoveEvent<'_, P::Solution>),
{
    let mut accepted = 0;
    let latent_steps = if state.active_depth > 0 && naive_per_latent > 0 {
        steps.div_ceil(naive_per_latent + 1)
    } else {
        steps
    };
    for step in 0..steps {
        let naive = step >= latent_steps;
        let candidate = if naive {
            propose_naive(&state, problem, rng)?
        } else {
            propose_variation(&state, model, problem, rng)?
        };
        let decision = accept_rule(state.fitness, candidate.fitness)?;
        observe(MoveEvent {
            step,
            parent: &state,
            candidate: &candidate,
            decision,
            naive,
        });
        if decision == Decision::Keep {
            state = candidate;
            accepted += 1;
        }
    }
    Ok((state, accepted))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub fitness: f64,
    pub depth: usize,
    pub accepted: usize,
    /// Reconstruction loss on the cycle's training example after training;
    /// absent without a model.
    pub loss: Option<f64>,
    /// Fitness evaluations made so far, this cycle included.
    pub evaluations: u64,
}

/// Where the target fitness was first reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetHit {
    pub cycle: usize,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog<S> {
    pub records: Vec<CycleRecord>,
    pub best_solution: Option<S>,
    pub best_fitness: f64,
    pub evaluations: u64,
    pub target_hit: Option<TargetHit>,
}

impl<S> RunLog<S> {
    fn empty() -> Self {
        Self {
            records: Vec::new(),
            best_solution: None,
            best_fitness: f64::NEG_INFINITY,
            evaluations: 0,
            target_hit: None,
        }
    }

    pub fn fitness_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.fitness).collect()
    }
}

/// Observer hooks for [`Engine::run_observed`].
pub trait RunObserver<S> {
    fn on_move(&mut self, _cycle: usize, _event: &MoveEvent<'_, S>) {}
    fn on_cycle(&mut self, _record: &CycleRecord, _solution: &S) {}
}

impl<S> RunObserver<S> for () {}

/// Owns one run: the problem reference, the model, the RNG and the
/// transition state.
pub struct Engine<'p, P: Problem> {
    problem: &'p P,
    config: RunConfig,
    model: Option<Autoencoder>,
    variation_depth: usize,
    transitions_done: usize,
    rng: ChaCha8Rng,
}

impl<'p, P: Problem> Engine<'p, P> {
    pub fn new(config: RunConfig, problem: &'p P) -> Result<Self> {
        config.validate()?;
        let visible = problem.visible_size();
        if visible == 0 {
            return Err(Error::ZeroSize { what: "visible size" });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let model = match (config.hidden_sizes.as_slice(), config.mode) {
            ([], _) => None,
            ([first, ..], Mode::Layerwise) => Some(Autoencoder::new(visible, *first, &mut rng)?),
            (sizes, Mode::EndToEnd) => Some(Autoencoder::with_layers(visible, sizes, &mut rng)?),
        };
        Ok(Self {
            problem,
            config,
            model,
            variation_depth: 0,
            transitions_done: 0,
            rng,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn model(&self) -> Option<&Autoencoder> {
        self.model.as_ref()
    }

    pub fn variation_depth(&self) -> usize {
        self.variation_depth
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn max_depth(&self) -> usize {
        self.config.hidden_sizes.len()
    }

    /// Layerwise: add the next hidden layer (unless the network is already
    /// at full depth) and move variation one layer deeper. End-to-end: move
    /// variation straight to the deepest layer.
    pub fn transition(&mut self) -> Result<()> {
        let max = self.max_depth();
        if self.variation_depth >= max {
            return Err(Error::InvalidConfig(format!(
                "cannot transition past maximum depth {max}"
            )));
        }
        let model = self.model.as_mut().expect("max depth > 0 implies a model");
        match self.config.mode {
            Mode::Layerwise => {
                if model.depth() < max {
                    let size = self.config.hidden_sizes[model.depth()];
                    model.add_layer(size, &mut self.rng)?;
                }
                self.variation_depth += 1;
            }
            Mode::EndToEnd => self.variation_depth = max,
        }
        self.transitions_done += 1;
        Ok(())
    }

    pub fn reset_state(&mut self) -> Result<SearchState<P::Solution>> {
        reset_state(self.model.as_ref(), self.variation_depth, self.problem, &mut self.rng)
    }

    pub fn run(self) -> Result<RunLog<P::Solution>> {
        self.run_observed(&mut ())
    }

    pub fn run_observed<O: RunObserver<P::Solution>>(mut self, observer: &mut O) -> Result<RunLog<P::Solution>> {
        let mut log = RunLog::empty();
        let target = self.problem.target_fitness();
        let steps = self.config.steps_per_solution;
        for cycle in 0..self.config.total_solutions {
            while self.transitions_done < self.config.transition_schedule.len()
                && self.config.transition_schedule[self.transitions_done] <= cycle
            {
                self.transition()?;
            }

            let start = self.reset_state()?;
            let evals_before = log.evaluations;
            let mut hit_step: Option<u64> = None;
            if let Some(t) = target {
                if start.fitness >= t {
                    hit_step = Some(1);
                }
            }
            let naive = self.config.naive_moves_per_latent_move;
            let (state, accepted) = solution_cycle_with(
                start,
                self.model.as_ref(),
                self.problem,
                steps,
                naive,
                &mut self.rng,
                |event| {
                    if hit_step.is_none() && event.decision == Decision::Keep {
                        if let Some(t) = target {
                            if event.candidate.fitness >= t {
                                hit_step = Some(event.step as u64 + 2);
                            }
                        }
                    }
                    observer.on_move(cycle, &event);
                },
            )?;
            log.evaluations += 1 + steps as u64;
            if log.target_hit.is_none() {
                if let Some(offset) = hit_step {
                    log.target_hit = Some(TargetHit {
                        cycle,
                        evaluations: evals_before + offset,
                    });
                }
            }

            let loss = match self.model.as_mut() {
                Some(model) => {
                    let example = self.problem.encode_solution(&state.solution);
                    let rate = self.config.learning_rate(self.variation_depth);
                    for _ in 0..self.config.train_repeats {
                        model.train_step(&example, rate)?;
                    }
                    Some(model.loss(&example)?)
                }
                None => None,
            };

            if state.fitness > log.best_fitness {
                log.best_fitness = state.fitness;
                log.best_solution = Some(state.solution.clone());
            }
            let record = CycleRecord {
                cycle,
                fitness: state.fitness,
                depth: self.variation_depth,
                accepted,
                loss,
                evaluations: log.evaluations,
            };
            observer.on_cycle(&record, &state.solution);
            log.records.push(record);

            if self.config.stop_at_target && log.target_hit.is_some() {
                break;
            }
        }
        Ok(log)
    }
}

/// Convenience wrapper: build an engine and run it to completion.
pub fn run<P: Problem>(config: RunConfig, problem: &P) -> Result<RunLog<P::Solution>> {
    Engine::new(config, problem)?.run()
}
