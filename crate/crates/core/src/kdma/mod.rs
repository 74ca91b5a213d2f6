//! Knowledge-driven memetic algorithm.
//!
//! The generational loop:
//!
//! 1. build the initial population (insertion heuristics plus random
//!    members, or all random) and evaluate it;
//! 2. create `PS` offspring by binary tournament, PMX with probability
//!    `p_c` and swap mutation with probability `p_m` per child;
//! 3. run key-factory local search on the best offspring;
//! 4. merge parents and offspring and keep `PS` by non-dominated sorting
//!    and crowding distance;
//! 5. repeat until the evaluation budget is spent.
//!
//! Every evaluation feeds a [`ParetoArchive`], which is the result of a run.
//! Randomness comes from three independent streams of one seed
//! (initialisation, variation, local search), so switching one strategy off
//! leaves the other streams untouched.

mod archive;
mod init;
mod local_search;
mod selection;
mod variation;

pub use archive::ParetoArchive;
pub use init::{init_population, min_carbon_init, mneh_from_order, mneh_init, power_order};
pub use local_search::{
    factory_makespans, key_factory, local_search_move, local_search_pass, LocalMove, MoveOutcome,
};
pub use selection::{
    assign_fitness, crowding_distance, environmental_selection, fast_nondominated_sort, fitness_order,
};
pub use variation::{pmx_crossover, pmx_with_cuts, random_cuts, swap_mutation, tournament_select};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::Genotype;
use crate::model::{evaluate_sequences, EvalConfig, IdleMode, Instance, ObjectivePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("population size must be at least 2, got {0}")]
    PopulationTooSmall(usize),
    #[error("evaluation budget {budget} is below the population size {population}")]
    BudgetTooSmall { budget: u64, population: usize },
    #[error("{name} must lie in [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("tournament size must be at least 1")]
    Tournament,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdmaParams {
    pub population_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
    pub max_evaluations: u64,
    /// Share of each offspring generation that receives local search.
    pub local_search_fraction: f64,
    pub use_collab_init: bool,
    pub use_local_search: bool,
    pub use_carbon_reduction: bool,
    pub idle_mode: IdleMode,
    pub seed: u64,
    /// Keep every evaluated objective point in [`RunStats::history`].
    pub record_history: bool,
}

impl Default for KdmaParams {
    fn default() -> Self {
        KdmaParams {
            population_size: 100,
            crossover_prob: 0.9,
            mutation_prob: 0.2,
            tournament_size: 2,
            max_evaluations: 25_000,
            local_search_fraction: 0.1,
            use_collab_init: true,
            use_local_search: true,
            use_carbon_reduction: true,
            idle_mode: IdleMode::MachineSpan,
            seed: 0,
            record_history: false,
        }
    }
}

impl KdmaParams {
    /// All strategies off: a plain non-dominated-sorting GA.
    pub fn plain(self) -> Self {
        KdmaParams {
            use_collab_init: false,
            use_local_search: false,
            use_carbon_reduction: false,
            local_search_fraction: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.population_size < 2 {
            return Err(ParamError::PopulationTooSmall(self.population_size));
        }
        if self.max_evaluations < self.population_size as u64 {
            return Err(ParamError::BudgetTooSmall {
                budget: self.max_evaluations,
                population: self.population_size,
            });
        }
        for (name, value) in [
            ("crossover probability", self.crossover_prob),
            ("mutation probability", self.mutation_prob),
            ("local search fraction", self.local_search_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::Probability { name, value });
            }
        }
        if self.tournament_size == 0 {
            return Err(ParamError::Tournament);
        }
        Ok(())
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            reduction: self.use_carbon_reduction,
            idle_mode: self.idle_mode,
        }
    }

    /// Number of offspring that get local search each generation.
    pub fn local_search_count(&self) -> usize {
        if !self.use_local_search {
            return 0;
        }
        (self.local_search_fraction * self.population_size as f64).ceil() as usize
    }
}

/// Random streams drawn from one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 0,
    Variation = 1,
    LocalSearch = 2,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// A population member with its NSGA-style fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub genotype: Genotype,
    pub point: ObjectivePoint,
    pub rank: usize,
    pub crowding: f64,
}

impl Member {
    pub fn new(genotype: Genotype, point: ObjectivePoint) -> Self {
        Member {
            genotype,
            point,
            rank: usize::MAX,
            crowding: 0.0,
        }
    }
}

/// Counting evaluator that feeds the archive.
#[derive(Debug)]
pub struct Evaluator<'a> {
    instance: &'a Instance,
    config: EvalConfig,
    used: u64,
    archive: ParetoArchive,
    history: Option<Vec<ObjectivePoint>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a Instance, config: EvalConfig, record_history: bool) -> Self {
        Evaluator {
            instance,
            config,
            used: 0,
            archive: ParetoArchive::new(),
            history: record_history.then(Vec::new),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn evaluations(&self) -> u64 {
        self.used
    }

    pub fn archive(&self) -> &ParetoArchive {
        &self.archive
    }

    pub fn evaluate(&mut self, genotype: &Genotype) -> ObjectivePoint {
        debug_assert!(genotype
            .validate_for(self.instance.num_jobs(), self.instance.num_factories())
            .is_ok());
        let point = evaluate_sequences(self.instance, genotype.sequences(), self.config);
        self.used += 1;
        self.archive.insert(genotype, point);
        if let Some(h) = self.history.as_mut() {
            h.push(point);
        }
        point
    }

    pub fn member(&mut self, genotype: Genotype) -> Member {
        let point = self.evaluate(&genotype);
        Member::new(genotype, point)
    }

    pub fn finish(self, generations: u64) -> RunResult {
        let offon_cycles = self.archive.min_carbon().map_or(0, |(_, p)| p.offon_cycles);
        RunResult {
            stats: RunStats {
                evaluations: self.used,
                generations,
                offon_cycles,
                history: self.history,
            },
            archive: self.archive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub evaluations: u64,
    pub generations: u64,
    /// Off/on cycles of the lowest-carbon archive member.
    pub offon_cycles: u64,
    pub history: Option<Vec<ObjectivePoint>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub archive: ParetoArchive,
    pub stats: RunStats,
}

/// `population_size` offspring by tournament, PMX and swap mutation.
pub fn make_offspring<R: Rng + ?Sized>(
    population: &[Member],
    crossover_prob: f64,
    mutation_prob: f64,
    tournament_size: usize,
    count: usize,
    rng: &mut R,
) -> Vec<Genotype> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = &population[tournament_select(population, tournament_size, rng)].genotype;
        let b = &population[tournament_select(population, tournament_size, rng)].genotype;
        let (c1, c2) = if rng.gen_bool(crossover_prob) {
            pmx_crossover(a, b, rng)
        } else {
            (a.clone(), b.clone())
        };
        for child in [c1, c2] {
            if out.len() == count {
                break;
            }
            let child = if rng.gen_bool(mutation_prob) {
                swap_mutation(&child, rng)
            } else {
                child
            };
            out.push(child);
        }
    }
    out
}

pub fn run_kdma(instance: &Instance, params: &KdmaParams) -> Result<RunResult, ParamError> {
    params.validate()?;
    let ps = params.population_size;
    let mut init_rng = stream_rng(params.seed, Stream::Init);
    let mut var_rng = stream_rng(params.seed, Stream::Variation);
    let mut ls_rng = stream_rng(params.seed, Stream::LocalSearch);

    let mut ev = Evaluator::new(instance, params.eval_config(), params.record_history);
    let initial = init_population(instance, params, &mut init_rng);
    let pop: Vec<Member> = initial.into_iter().map(|g| ev.member(g)).collect();
    let mut pop = environmental_selection(pop, ps);
    let ls_count = params.local_search_count();
    let mut generations = 0;

    while ev.evaluations() < params.max_evaluations {
        let children = make_offspring(
            &pop,
            params.crossover_prob,
            params.mutation_prob,
            params.tournament_size,
            ps,
            &mut var_rng,
        );
        let mut offspring: Vec<Member> = children.into_iter().map(|g| ev.member(g)).collect();
        if ls_count > 0 {
            assign_fitness(&mut offspring);
            for idx in fitness_order(&offspring).into_iter().take(ls_count) {
                let left = params.max_evaluations.saturating_sub(ev.evaluations());
                if left == 0 {
                    break;
                }
                let (improved, _) = local_search_pass(&mut ev, &offspring[idx], left, &mut ls_rng);
                offspring[idx] = improved;
            }
        }
        pop.extend(offspring);
        pop = environmental_selection(pop, ps);
        generations += 1;
    }
    Ok(ev.finish(generations))
}
