//! Local search around the key factory, the one that sets the makespan.
//!
//! Two moves act inside the key factory (best reinsertion, swap) and two
//! move work between the key factory and another factory (exchange,
//! relocation).

use rand::Rng;

use super::{Evaluator, Member};
use crate::encoding::{Genotype, JobId};
use crate::model::{sequence_makespan, Instance, Time};

/// Neighbourhood moves, applied in declaration order by
/// [`local_search_pass`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalMove {
    /// Remove a random key-factory job, reinsert it at its best position.
    InsertInKey,
    /// Swap two random positions of the key factory.
    SwapInKey,
    /// Exchange a key-factory job with a job of another factory.
    ExchangeBetween,
    /// Move a key-factory job to a random position of another factory.
    RelocateBetween,
}

impl LocalMove {
    pub const ALL: [LocalMove; 4] = [
        LocalMove::InsertInKey,
        LocalMove::SwapInKey,
        LocalMove::ExchangeBetween,
        LocalMove::RelocateBetween,
    ];
}

/// Result of one move. `applied == false` marks an inapplicable move, in
/// which case `genotype` is the unchanged input.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveOutcome {
    pub genotype: Genotype,
    pub applied: bool,
}

pub fn factory_makespans(instance: &Instance, genotype: &Genotype) -> Vec<Time> {
    let mut row = Vec::new();
    genotype
        .sequences()
        .iter()
        .map(|seq| sequence_makespan(instance, seq, &mut row))
        .collect()
}

/// Index of the factory with the largest makespan, lowest index on ties.
pub fn key_factory(instance: &Instance, genotype: &Genotype) -> usize {
    let spans = factory_makespans(instance, genotype);
    let mut best = 0;
    for (f, &s) in spans.iter().enumerate() {
        if s > spans[best] {
            best = f;
        }
    }
    best
}

fn unchanged(genotype: &Genotype) -> MoveOutcome {
    MoveOutcome {
        genotype: genotype.clone(),
        applied: false,
    }
}

/// Best reinsertion position of `job` into `seq`, smallest makespan and then
/// lowest position.
fn best_insertion(instance: &Instance, seq: &mut Vec<JobId>, job: JobId) -> usize {
    let mut row = Vec::new();
    let mut best = (Time::MAX, 0);
    for pos in 0..=seq.len() {
        seq.insert(pos, job);
        let span = sequence_makespan(instance, seq, &mut row);
        seq.remove(pos);
        if span < best.0 {
            best = (span, pos);
        }
    }
    best.1
}

pub fn local_search_move<R: Rng + ?Sized>(
    instance: &Instance,
    genotype: &Genotype,
    op: LocalMove,
    rng: &mut R,
) -> MoveOutcome {
    let key = key_factory(instance, genotype);
    let factories = genotype.num_factories();
    let key_len = genotype.factory(key).len();
    let mut out = genotype.clone();
    match op {
        LocalMove::InsertInKey => {
            if key_len == 0 {
                return unchanged(genotype);
            }
            let seq = &mut out.sequences_mut()[key];
            let job = seq.remove(rng.gen_range(0..key_len));
            let pos = best_insertion(instance, seq, job);
            seq.insert(pos, job);
        }
        LocalMove::SwapInKey => {
            if key_len < 2 {
                return unchanged(genotype);
            }
            let a = rng.gen_range(0..key_len);
            let mut b = rng.gen_range(0..key_len - 1);
            if b >= a {
                b += 1;
            }
            out.sequences_mut()[key].swap(a, b);
        }
        LocalMove::ExchangeBetween => {
            let others: Vec<usize> = (0..factories)
                .filter(|&f| f != key && !genotype.factory(f).is_empty())
                .collect();
            if key_len == 0 || others.is_empty() {
                return unchanged(genotype);
            }
            let other = others[rng.gen_range(0..others.len())];
            let k = rng.gen_range(0..genotype.factory(other).len());
            let j = rng.gen_range(0..key_len);
            let seqs = out.sequences_mut();
            let tmp = seqs[other][k];
            seqs[other][k] = seqs[key][j];
            seqs[key][j] = tmp;
        }
        LocalMove::RelocateBetween => {
            if key_len == 0 || factories < 2 {
                return unchanged(genotype);
            }
            let j = rng.gen_range(0..key_len);
            let mut other = rng.gen_range(0..factories - 1);
            if other >= key {
                other += 1;
            }
            let seqs = out.sequences_mut();
            let job = seqs[key].remove(j);
            let k = rng.gen_range(0..=seqs[other].len());
            seqs[other].insert(k, job);
        }
    }
    MoveOutcome {
        genotype: out,
        applied: true,
    }
}

/// Apply every [`LocalMove`] once, in order, to `member`.
///
/// A candidate is kept when neither the incumbent nor the original member
/// dominates it: it replaces the incumbent outright if it dominates it and
/// with probability one half otherwise. Moves that leave the genotype
/// unchanged are not evaluated. At most `budget` evaluations are spent;
/// returns the resulting member and the evaluations used.
pub fn local_search_pass<R: Rng + ?Sized>(
    evaluator: &mut Evaluator<'_>,
    member: &Member,
    budget: u64,
    rng: &mut R,
) -> (Member, u64) {
    let origin = member.point;
    let mut current = member.clone();
    let mut used = 0;
    for op in LocalMove::ALL {
        if used >= budget {
            break;
        }
        let outcome = local_search_move(evaluator.instance(), &current.genotype, op, rng);
        if !outcome.applied || outcome.genotype == current.genotype {
            continue;
        }
        let point = evaluator.evaluate(&outcome.genotype);
        used += 1;
        if current.point.dominates(&point) || origin.dominates(&point) {
            continue;
        }
        if point.dominates(&current.point) || rng.gen_bool(0.5) {
            current = Member::new(outcome.genotype, point);
        }
    }
    (current, used)
}
