//! Collaborative initialisation: one makespan-oriented insertion heuristic
//! solution, one carbon-oriented insertion solution, the rest random.

use rand::seq::SliceRandom;
use rand::Rng;

use super::KdmaParams;
use crate::encoding::{random_genotype, Genotype, JobId};
use crate::model::{evaluate_sequences, sequence_makespan, EvalConfig, Instance, Time};

/// Insertion heuristic over a given job order: each job is tried at every
/// position of every factory and the placement with the smallest overall
/// makespan is kept. Ties go to the lower factory, then the lower position.
pub fn mneh_from_order(instance: &Instance, order: &[JobId]) -> Genotype {
    let factories = instance.num_factories();
    let mut seqs: Vec<Vec<JobId>> = vec![Vec::new(); factories];
    let mut spans: Vec<Time> = vec![0; factories];
    let mut row = Vec::new();
    for &job in order {
        let mut best: Option<(Time, usize, usize, Time)> = None;
        for f in 0..factories {
            let others = spans
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .map(|(_, &s)| s)
                .max()
                .unwrap_or(0);
            for pos in 0..=seqs[f].len() {
                seqs[f].insert(pos, job);
                let own = sequence_makespan(instance, &seqs[f], &mut row);
                seqs[f].remove(pos);
                let overall = own.max(others);
                if best.is_none_or(|(b, ..)| overall < b) {
                    best = Some((overall, f, pos, own));
                }
            }
        }
        let (_, f, pos, own) = best.expect("at least one factory");
        seqs[f].insert(pos, job);
        spans[f] = own;
    }
    Genotype::from_sequences_unchecked(seqs)
}

/// Makespan insertion heuristic seeded with a random job order.
pub fn mneh_init<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Genotype {
    let mut order: Vec<JobId> = (0..instance.num_jobs()).collect();
    order.shuffle(rng);
    mneh_from_order(instance, &order)
}

/// Jobs by rated processing power, largest first; equal power keeps the
/// lower job index first.
pub fn power_order(instance: &Instance) -> Vec<JobId> {
    let mut order: Vec<JobId> = (0..instance.num_jobs()).collect();
    order.sort_by(|&a, &b| instance.rated_power(b).total_cmp(&instance.rated_power(a)));
    order
}

/// Carbon insertion heuristic: jobs in [`power_order`], each placed where
/// the partial solution has the lowest total carbon.
pub fn min_carbon_init(instance: &Instance, config: EvalConfig) -> Genotype {
    let factories = instance.num_factories();
    let mut seqs: Vec<Vec<JobId>> = vec![Vec::new(); factories];
    for job in power_order(instance) {
        let mut best: Option<(f64, usize, usize)> = None;
        for f in 0..factories {
            for pos in 0..=seqs[f].len() {
                seqs[f].insert(pos, job);
                let ce = evaluate_sequences(instance, &seqs, config).ce_total;
                seqs[f].remove(pos);
                if best.is_none_or(|(b, ..)| ce < b) {
                    best = Some((ce, f, pos));
                }
            }
        }
        let (_, f, pos) = best.expect("at least one factory");
        seqs[f].insert(pos, job);
    }
    Genotype::from_sequences_unchecked(seqs)
}

/// Initial population of `params.population_size` genotypes.
pub fn init_population<R: Rng + ?Sized>(
    instance: &Instance,
    params: &KdmaParams,
    rng: &mut R,
) -> Vec<Genotype> {
    let ps = params.population_size;
    let (n, f) = (instance.num_jobs(), instance.num_factories());
    let mut pop = Vec::with_capacity(ps);
    if params.use_collab_init {
        pop.push(mneh_init(instance, rng));
        pop.push(min_carbon_init(instance, params.eval_config()));
    }
    while pop.len() < ps {
        pop.push(random_genotype(n, f, rng));
    }
    pop.truncate(ps);
    pop
}
