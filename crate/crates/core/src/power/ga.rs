//! Real-coded genetic algorithm over cross-user power shares.
//!
//! A chromosome is a point on the `K`-simplex: user `k` receives
//! `split[k]·P_total` watts, water-filled over its own subcarriers. Fitness is
//! total normalized capacity minus `λ·max_k |R_k/ΣR − γ_k|`.
//!
//! Randomness: a ChaCha8 master stream seeded from the run seed yields one
//! `u64` for initialization and then one per generation. Each generation's
//! selection, crossover and mutation draws come from a generator seeded with
//! that value, all drawn before any fitness is evaluated, so parallel and
//! sequential evaluation give identical runs.

use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{user_gains, water_fill, PowerAllocation};
use crate::assignment::AssignmentMatrix;
use crate::channel::ChannelMatrix;
use crate::evaluation::proportionality_error;
use crate::exec::Execution;
use crate::{Error, Result};

/// Minimum best-fitness gain that resets the stall counter.
pub const IMPROVEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaParams {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_probability: f64,
    /// Standard deviation of the additive mutation, as a fraction of the
    /// total power (equivalently, in share units).
    pub mutation_sigma: f64,
    pub elite_count: usize,
    pub tournament_size: usize,
    /// Weight `λ` of the share-gap penalty; 0 gives pure capacity fitness.
    pub penalty_weight: f64,
    pub stall_generations: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: 40,
            max_generations: 100,
            crossover_probability: 0.9,
            mutation_sigma: 0.05,
            elite_count: 2,
            tournament_size: 3,
            penalty_weight: 10.0,
            stall_generations: 25,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid(
                "GA population must hold at least 2 individuals",
            ));
        }
        if self.elite_count >= self.population_size {
            return Err(Error::invalid(
                "GA elite count must be below the population size",
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return Err(Error::invalid(
                "GA crossover probability must lie in [0, 1]",
            ));
        }
        if !(self.mutation_sigma.is_finite() && self.mutation_sigma >= 0.0) {
            return Err(Error::invalid("GA mutation sigma must be >= 0"));
        }
        if !(self.penalty_weight.is_finite() && self.penalty_weight >= 0.0) {
            return Err(Error::invalid("GA penalty weight must be >= 0"));
        }
        if self.max_generations == 0 || self.tournament_size == 0 {
            return Err(Error::invalid(
                "GA generations and tournament size must be >= 1",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    /// Power shares, nonnegative, summing to 1.
    pub split: Vec<f64>,
    /// Cached fitness; `-inf` until evaluated.
    pub fitness: f64,
}

impl Individual {
    fn unevaluated(split: Vec<f64>) -> Self {
        Self {
            split,
            fitness: f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    /// Best fitness seen so far.
    pub best_fitness: f64,
    pub best_capacity: f64,
    pub user_rates: Vec<f64>,
}

/// One record per evaluated generation; the initial population is generation 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace {
    pub generations: Vec<GenerationRecord>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.generations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generations.is_empty()
    }
}

/// Decoded evaluation of one split.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    pub capacity: f64,
    pub rates: Vec<f64>,
}

/// Channel data and objective shared by every fitness call of a run.
#[derive(Debug, Clone)]
pub struct GaProblem {
    gains: Vec<Vec<f64>>,
    proportions: Vec<f64>,
    total_power: f64,
    num_subcarriers: usize,
    penalty_weight: f64,
}

impl GaProblem {
    pub fn new(
        channel: &ChannelMatrix,
        assignment: &AssignmentMatrix,
        proportions: &[f64],
        total_power: f64,
        penalty_weight: f64,
    ) -> Result<Self> {
        Ok(Self {
            gains: user_gains(channel, assignment, proportions, total_power)?,
            proportions: proportions.to_vec(),
            total_power,
            num_subcarriers: assignment.num_subcarriers(),
            penalty_weight,
        })
    }

    pub fn num_users(&self) -> usize {
        self.gains.len()
    }

    fn user_powers(&self, split: &[f64]) -> Vec<Vec<f64>> {
        self.gains
            .iter()
            .zip(split)
            .map(|(g, s)| {
                water_fill(g, s * self.total_power)
                    .expect("validated gains, nonnegative share")
                    .powers
            })
            .collect()
    }

    pub fn evaluate(&self, split: &[f64]) -> Evaluation {
        let rates: Vec<f64> = self
            .gains
            .iter()
            .zip(self.user_powers(split))
            .map(|(g, p)| g.iter().zip(&p).map(|(h, p)| (1.0 + p * h).log2()).sum())
            .collect();
        let capacity = rates.iter().sum::<f64>() / self.num_subcarriers as f64;
        let gap = if self.penalty_weight == 0.0 {
            0.0
        } else {
            // All-zero rates cannot occur with a positive budget; treat as the
            // worst gap if they do.
            proportionality_error(&rates, &self.proportions).unwrap_or(1.0)
        };
        Evaluation {
            fitness: capacity - self.penalty_weight * gap,
            capacity,
            rates,
        }
    }

    pub fn decode(&self, assignment: &AssignmentMatrix, split: &[f64]) -> PowerAllocation {
        PowerAllocation::from_user_powers(assignment, &self.user_powers(split))
    }
}

/// Fitness of one individual: capacity minus `λ` times the worst share gap.
pub fn fitness(
    individual: &Individual,
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    proportions: &[f64],
    total_power: f64,
    penalty_weight: f64,
) -> Result<f64> {
    let problem = GaProblem::new(
        channel,
        assignment,
        proportions,
        total_power,
        penalty_weight,
    )?;
    if individual.split.len() != problem.num_users() {
        return Err(Error::invalid(
            "split length must equal the number of users",
        ));
    }
    Ok(problem.evaluate(&individual.split).fitness)
}

fn project_to_simplex(split: &mut [f64]) {
    for s in split.iter_mut() {
        *s = s.max(0.0);
    }
    let sum: f64 = split.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        split.iter_mut().for_each(|s| *s /= sum);
    } else {
        let uniform = 1.0 / split.len() as f64;
        split.iter_mut().for_each(|s| *s = uniform);
    }
}

/// Initial population: the uniform split followed by uniform draws on the
/// simplex (normalized unit exponentials). Individuals are unevaluated.
pub fn init_population(num_users: usize, params: &GaParams, seed: u64) -> Vec<Individual> {
    let k = num_users.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut population = Vec::with_capacity(params.population_size);
    population.push(Individual::unevaluated(vec![1.0 / k as f64; k]));
    while population.len() < params.population_size {
        let mut split: Vec<f64> = (0..k)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                -u.ln()
            })
            .collect();
        project_to_simplex(&mut split);
        population.push(Individual::unevaluated(split));
    }
    population
}

/// Fills in the fitness of every unevaluated individual.
pub fn evaluate_population(population: &mut [Individual], problem: &GaProblem, exec: Execution) {
    let pending: Vec<usize> = (0..population.len())
        .filter(|&i| population[i].fitness == f64::NEG_INFINITY)
        .collect();
    let splits: Vec<&[f64]> = pending
        .iter()
        .map(|&i| population[i].split.as_slice())
        .collect();
    let scores = exec.map(&splits, |s| problem.evaluate(s).fitness);
    for (i, f) in pending.into_iter().zip(scores) {
        population[i].fitness = f;
    }
}

/// Indices sorted by descending fitness, lower index first among equals.
fn ranking(population: &[Individual]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| population[b].fitness.total_cmp(&population[a].fitness));
    order
}

fn tournament(population: &[Individual], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.random_range(0..population.len());
    for _ in 1..size {
        let challenger = rng.random_range(0..population.len());
        if population[challenger].fitness > population[best].fitness {
            best = challenger;
        }
    }
    best
}

/// Produces the next generation (elites carried over, children evaluated).
pub fn evolve(
    population: &[Individual],
    problem: &GaProblem,
    params: &GaParams,
    generation_seed: u64,
    exec: Execution,
) -> Vec<Individual> {
    let size = population.len();
    let mut next: Vec<Individual> = ranking(population)
        .into_iter()
        .take(params.elite_count.min(size))
        .map(|i| population[i].clone())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(generation_seed);
    while next.len() < size {
        let a = tournament(population, params.tournament_size, &mut rng);
        let b = tournament(population, params.tournament_size, &mut rng);
        let mut child = if rng.random::<f64>() < params.crossover_probability {
            let alpha: f64 = rng.random();
            population[a]
                .split
                .iter()
                .zip(&population[b].split)
                .map(|(x, y)| alpha * x + (1.0 - alpha) * y)
                .collect()
        } else {
            population[a].split.clone()
        };
        if params.mutation_sigma > 0.0 {
            for s in child.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *s += params.mutation_sigma * z;
            }
            project_to_simplex(&mut child);
            next.push(Individual::unevaluated(child));
        } else {
            // Unchanged copies keep their cached fitness.
            let fitness = if child == population[a].split {
                population[a].fitness
            } else {
                f64::NEG_INFINITY
            };
            next.push(Individual {
                split: child,
                fitness,
            });
        }
    }
    evaluate_population(&mut next, problem, exec);
    next
}

pub fn ga_power_split(
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    proportions: &[f64],
    total_power: f64,
    params: &GaParams,
    seed: u64,
) -> Result<(PowerAllocation, ConvergenceTrace)> {
    ga_power_split_with(
        channel,
        assignment,
        proportions,
        total_power,
        params,
        seed,
        Execution::default(),
    )
}

/// Runs the GA until `max_generations` or `stall_generations` generations
/// without a best-fitness gain above [`IMPROVEMENT_TOL`].
pub fn ga_power_split_with(
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    proportions: &[f64],
    total_power: f64,
    params: &GaParams,
    seed: u64,
    exec: Execution,
) -> Result<(PowerAllocation, ConvergenceTrace)> {
    params.validate()?;
    let problem = GaProblem::new(
        channel,
        assignment,
        proportions,
        total_power,
        params.penalty_weight,
    )?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut population = init_population(problem.num_users(), params, master.next_u64());
    evaluate_population(&mut population, &problem, exec);

    let mut best = population[ranking(&population)[0]].clone();
    let mut trace = ConvergenceTrace::default();
    let record = |best: &Individual| {
        let e = problem.evaluate(&best.split);
        GenerationRecord {
            best_fitness: best.fitness,
            best_capacity: e.capacity,
            user_rates: e.rates,
        }
    };
    trace.generations.push(record(&best));

    let mut stalled = 0;
    for _ in 1..params.max_generations {
        population = evolve(&population, &problem, params, master.next_u64(), exec);
        let leader = &population[ranking(&population)[0]];
        let improved = leader.fitness > best.fitness + IMPROVEMENT_TOL;
        if leader.fitness > best.fitness {
            best = leader.clone();
        }
        trace.generations.push(record(&best));
        if improved {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= params.stall_generations {
                break;
            }
        }
    }
    Ok((problem.decode(assignment, &best.split), trace))
}
