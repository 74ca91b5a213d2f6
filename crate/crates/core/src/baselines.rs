//! Comparison algorithms and independent oracles: an NSGA-II baseline,
//! random search, a discrete-event schedule simulator and exhaustive Pareto
//! enumeration for tiny instances.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{random_genotype, Genotype, JobId};
use crate::kdma::{
    environmental_selection, make_offspring, stream_rng, Evaluator, KdmaParams, Member, ParamError,
    ParetoArchive, RunResult, Stream,
};
use crate::model::{
    evaluate_sequences, EvalConfig, FactorySchedule, IdleMode, Instance, ModelError, Schedule, Time,
};

/// Largest job count [`brute_force_pareto`] accepts.
pub const BRUTE_FORCE_MAX_JOBS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Params {
    pub population_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
    pub max_evaluations: u64,
    pub reduction: bool,
    pub idle_mode: IdleMode,
    pub seed: u64,
}

impl Default for Nsga2Params {
    fn default() -> Self {
        Nsga2Params::from(&KdmaParams::default())
    }
}

impl From<&KdmaParams> for Nsga2Params {
    /// Shared operator settings; carbon reduction stays off.
    fn from(p: &KdmaParams) -> Self {
        Nsga2Params {
            population_size: p.population_size,
            crossover_prob: p.crossover_prob,
            mutation_prob: p.mutation_prob,
            tournament_size: p.tournament_size,
            max_evaluations: p.max_evaluations,
            reduction: false,
            idle_mode: p.idle_mode,
            seed: p.seed,
        }
    }
}

impl Nsga2Params {
    fn as_kdma(&self) -> KdmaParams {
        KdmaParams {
            population_size: self.population_size,
            crossover_prob: self.crossover_prob,
            mutation_prob: self.mutation_prob,
            tournament_size: self.tournament_size,
            max_evaluations: self.max_evaluations,
            idle_mode: self.idle_mode,
            seed: self.seed,
            ..KdmaParams::default()
        }
        .plain()
    }
}

/// NSGA-II with a random initial population and the same operators and
/// budget accounting as the memetic algorithm.
pub fn run_nsga2(instance: &Instance, params: &Nsga2Params) -> Result<RunResult, ParamError> {
    params.as_kdma().validate()?;
    let ps = params.population_size;
    let config = EvalConfig {
        reduction: params.reduction,
        idle_mode: params.idle_mode,
    };
    let mut init_rng = stream_rng(params.seed, Stream::Init);
    let mut var_rng = stream_rng(params.seed, Stream::Variation);
    let mut ev = Evaluator::new(instance, config, false);

    let (n, f) = (instance.num_jobs(), instance.num_factories());
    let pop: Vec<Member> = (0..ps)
        .map(|_| random_genotype(n, f, &mut init_rng))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|g| ev.member(g))
        .collect();
    let mut pop = environmental_selection(pop, ps);
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
        pop.extend(children.into_iter().map(|g| ev.member(g)));
        pop = environmental_selection(pop, ps);
        generations += 1;
    }
    Ok(ev.finish(generations))
}

/// `evals` independent uniform random genotypes.
pub fn random_search<R: Rng + ?Sized>(
    instance: &Instance,
    evals: u64,
    config: EvalConfig,
    rng: &mut R,
) -> RunResult {
    let mut ev = Evaluator::new(instance, config, false);
    for _ in 0..evals {
        let g = random_genotype(instance.num_jobs(), instance.num_factories(), rng);
        ev.evaluate(&g);
    }
    ev.finish(0)
}

fn simulate_factory(instance: &Instance, jobs: &[JobId]) -> FactorySchedule {
    let m = instance.num_machines();
    let count = jobs.len();
    let mut start = vec![vec![0; m]; count];
    let mut completion = vec![vec![0; m]; count];
    // next position each machine serves, and whether it is busy
    let mut next = vec![0usize; m];
    let mut busy = vec![false; m];
    // operations of each position finished so far
    let mut finished = vec![0usize; count];
    let mut events: BinaryHeap<Reverse<(Time, usize)>> = BinaryHeap::new();
    let mut now: Time = 0;
    loop {
        for j in 0..m {
            if busy[j] || next[j] >= count {
                continue;
            }
            let k = next[j];
            if finished[k] == j {
                start[k][j] = now;
                completion[k][j] = now + instance.p(jobs[k], j);
                busy[j] = true;
                events.push(Reverse((completion[k][j], j)));
            }
        }
        let Some(Reverse((t, _))) = events.peek().copied() else {
            break;
        };
        now = t;
        while let Some(Reverse((t, j))) = events.peek().copied() {
            if t != now {
                break;
            }
            events.pop();
            busy[j] = false;
            finished[next[j]] += 1;
            next[j] += 1;
        }
    }
    let makespan = completion.last().map_or(0, |row| row[m - 1]);
    FactorySchedule::from_parts(jobs.to_vec(), start, completion, makespan)
}

/// Event-driven simulation: an operation starts as soon as its machine is
/// free and the job has left the previous machine.
pub fn simulate_schedule(instance: &Instance, genotype: &Genotype) -> Result<Schedule, ModelError> {
    genotype.validate_for(instance.num_jobs(), instance.num_factories())?;
    Ok(Schedule::from_factories(
        genotype
            .sequences()
            .iter()
            .map(|seq| simulate_factory(instance, seq))
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("exhaustive enumeration refused: {jobs} jobs exceeds the limit of {limit}")]
    TooLarge { jobs: usize, limit: usize },
}

/// All ways to split `n` jobs into `parts` ordered group sizes.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Number of genotypes: `n! * C(n + F - 1, F - 1)`.
pub fn genotype_count(n: usize, factories: usize) -> u128 {
    let fact: u128 = (1..=n as u128).product();
    let mut binom: u128 = 1;
    for i in 0..(factories as u128 - 1) {
        binom = binom * (n as u128 + 1 + i) / (i + 1);
    }
    fact * binom
}

/// Visit every permutation of `items[depth..]` (Heap-free recursive swaps).
fn permute(items: &mut Vec<JobId>, depth: usize, visit: &mut dyn FnMut(&[JobId])) {
    if depth == items.len() {
        visit(items);
        return;
    }
    for i in depth..items.len() {
        items.swap(depth, i);
        permute(items, depth + 1, visit);
        items.swap(depth, i);
    }
}

/// Exact Pareto front by enumerating every genotype. Refuses instances with
/// more than [`BRUTE_FORCE_MAX_JOBS`] jobs.
pub fn brute_force_pareto(instance: &Instance, config: EvalConfig) -> Result<ParetoArchive, OracleError> {
    let n = instance.num_jobs();
    if n > BRUTE_FORCE_MAX_JOBS {
        return Err(OracleError::TooLarge {
            jobs: n,
            limit: BRUTE_FORCE_MAX_JOBS,
        });
    }
    let sizes = compositions(n, instance.num_factories());
    let parts: Vec<ParetoArchive> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut archive = ParetoArchive::new();
            let mut items: Vec<JobId> = (0..n).collect();
            items.swap(0, first);
            let mut seqs: Vec<Vec<JobId>> = vec![Vec::new(); sizes[0].len()];
            permute(&mut items, 1, &mut |perm| {
                for profile in &sizes {
                    let mut rest = perm;
                    for (seq, &len) in seqs.iter_mut().zip(profile) {
                        seq.clear();
                        seq.extend_from_slice(&rest[..len]);
                        rest = &rest[len..];
                    }
                    let point = evaluate_sequences(instance, &seqs, config);
                    if archive.would_accept(&point) {
                        archive.insert(&Genotype::from_sequences_unchecked(seqs.clone()), point);
                    }
                }
            });
            archive
        })
        .collect();
    let mut merged = ParetoArchive::new();
    for part in parts {
        for (g, p) in part.entries() {
            merged.insert(g, *p);
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdma::run_kdma;
    use crate::model::{decode, Coefficients};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64, n: usize, m: usize, f: usize) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = (0..n).map(|_| (0..m).map(|_| rng.gen_range(10..=50)).collect()).collect();
        let pp = (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(500..=1000) as f64 / 100.0).collect())
            .collect();
        Instance::new("b", f, p, pp, Coefficients::standard(m, 0.07)).unwrap()
    }

    #[test]
    fn simulator_matches_two_job_example() {
        let inst = Instance::new("t", 1, vec![vec![2, 3], vec![4, 1]], vec![vec![1.0; 2]; 2], Coefficients::zero(2)).unwrap();
        let g = Genotype::new(vec![vec![0, 1]], 2, 1).unwrap();
        let s = simulate_schedule(&inst, &g).unwrap();
        assert_eq!(s.makespan(), 7);
        assert_eq!(s, decode(&inst, &g).unwrap());
        let one = Instance::new("o", 1, vec![vec![7]], vec![vec![1.0]], Coefficients::zero(1)).unwrap();
        let g1 = Genotype::new(vec![vec![0]], 1, 1).unwrap();
        assert_eq!(simulate_schedule(&one, &g1).unwrap(), decode(&one, &g1).unwrap());
    }

    #[test]
    fn simulator_agrees_with_decoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for case in 0..200 {
            let n = rng.gen_range(1..=10);
            let m = rng.gen_range(1..=5);
            let f = rng.gen_range(1..=3);
            let inst = random_instance(case, n, m, f);
            let g = random_genotype(n, f, &mut rng);
            assert_eq!(simulate_schedule(&inst, &g).unwrap(), decode(&inst, &g).unwrap());
        }
    }

    #[test]
    fn counts_match_enumeration() {
        assert_eq!(compositions(5, 2).len(), 6);
        assert_eq!(genotype_count(5, 2), 720);
        assert_eq!(genotype_count(8, 3), 1_814_400);
        assert_eq!(genotype_count(3, 1), 6);
    }

    #[test]
    fn brute_force_guard() {
        let inst = random_instance(3, 9, 2, 2);
        assert_eq!(
            brute_force_pareto(&inst, EvalConfig::new(true)).unwrap_err(),
            OracleError::TooLarge { jobs: 9, limit: 8 }
        );
    }

    #[test]
    fn brute_force_single_job() {
        let inst = random_instance(4, 1, 3, 2);
        assert_eq!(brute_force_pareto(&inst, EvalConfig::new(true)).unwrap().len(), 1);
    }

    #[test]
    fn brute_force_single_factory_contains_best_permutation() {
        let inst = random_instance(5, 5, 3, 1);
        let front = brute_force_pareto(&inst, EvalConfig::new(false)).unwrap();
        let mut best = Time::MAX;
        let mut items: Vec<JobId> = (0..5).collect();
        let mut row = Vec::new();
        permute(&mut items, 0, &mut |perm| {
            best = best.min(crate::model::sequence_makespan(&inst, perm, &mut row));
        });
        assert_eq!(front.min_makespan().unwrap().1.makespan, best);
    }

    #[test]
    fn nsga2_with_budget_of_population() {
        let inst = random_instance(6, 6, 2, 2);
        let params = Nsga2Params { population_size: 10, max_evaluations: 10, seed: 4, ..Nsga2Params::default() };
        let res = run_nsga2(&inst, &params).unwrap();
        let mut rng = stream_rng(4, Stream::Init);
        let mut expected = ParetoArchive::new();
        for _ in 0..10 {
            let g = random_genotype(6, 2, &mut rng);
            let p = evaluate_sequences(&inst, g.sequences(), EvalConfig::new(false));
            expected.insert(&g, p);
        }
        assert_eq!(res.archive.points(), expected.points());
    }

    #[test]
    fn nsga2_equals_kdma_without_strategies() {
        let inst = random_instance(7, 8, 3, 2);
        let kdma = KdmaParams { population_size: 16, max_evaluations: 1_500, seed: 21, ..KdmaParams::default() }.plain();
        let a = run_kdma(&inst, &kdma).unwrap();
        let b = run_nsga2(&inst, &Nsga2Params::from(&kdma)).unwrap();
        assert_eq!(a.archive, b.archive);
    }

    #[test]
    fn random_search_archive() {
        let inst = random_instance(8, 6, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(random_search(&inst, 1, EvalConfig::new(true), &mut rng).archive.len(), 1);
        let res = random_search(&inst, 300, EvalConfig::new(true), &mut rng);
        assert_eq!(res.stats.evaluations, 300);
        let pts = res.archive.points();
        for a in &pts {
            assert!(!pts.iter().any(|b| crate::metrics::dominates(b, a)));
        }
    }

    #[test]
    fn algorithms_stay_within_exact_front() {
        let inst = random_instance(9, 5, 2, 2);
        let cfg = EvalConfig::new(false);
        let exact = brute_force_pareto(&inst, cfg).unwrap();
        let params = Nsga2Params { population_size: 20, max_evaluations: 2_000, seed: 1, ..Nsga2Params::default() };
        let res = run_nsga2(&inst, &params).unwrap();
        for (_, p) in res.archive.entries() {
            assert!(!exact.entries().iter().any(|(_, e)| e.dominates(p)));
        }
    }
}
