//! Parent selection, partially mapped crossover and swap mutation.

use rand::Rng;

use super::Member;
use crate::encoding::{Genotype, JobId};

/// Draw `k` members uniformly with replacement and return the index of the
/// best: lowest rank, then largest crowding distance, then earliest draw.
pub fn tournament_select<R: Rng + ?Sized>(population: &[Member], k: usize, rng: &mut R) -> usize {
    assert!(!population.is_empty(), "tournament on empty population");
    let mut best = rng.gen_range(0..population.len());
    for _ in 1..k.max(1) {
        let c = rng.gen_range(0..population.len());
        let (a, b) = (&population[c], &population[best]);
        if a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding) {
            best = c;
        }
    }
    best
}

/// Two cut points, uniform over positions, as an inclusive zero-based
/// segment `lo..=hi`.
pub fn random_cuts<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    let b = rng.gen_range(0..n);
    (a.min(b), a.max(b))
}

/// One PMX child: `base` outside the segment, `donor` inside it. Values of
/// `base` that clash with the donated segment follow the segment mapping
/// until they leave it.
fn pmx_child(base: &[JobId], donor: &[JobId], lo: usize, hi: usize) -> Vec<JobId> {
    let n = base.len();
    // position of each job inside the donor segment, if any
    let mut donor_pos = vec![usize::MAX; n];
    for i in lo..=hi {
        donor_pos[donor[i]] = i;
    }
    let mut child = base.to_vec();
    child[lo..=hi].copy_from_slice(&donor[lo..=hi]);
    for i in (0..lo).chain(hi + 1..n) {
        let mut v = base[i];
        while donor_pos[v] != usize::MAX {
            v = base[donor_pos[v]];
        }
        child[i] = v;
    }
    child
}

/// PMX with explicit cuts on two permutations of `0..n`.
pub fn pmx_with_cuts(p1: &[JobId], p2: &[JobId], lo: usize, hi: usize) -> (Vec<JobId>, Vec<JobId>) {
    assert_eq!(p1.len(), p2.len(), "parents must have equal length");
    assert!(lo <= hi && hi < p1.len(), "bad cut points {lo}..={hi}");
    (pmx_child(p1, p2, lo, hi), pmx_child(p2, p1, lo, hi))
}

/// PMX on flattened genotypes. Both children take `parent1`'s factory size
/// profile.
pub fn pmx_crossover<R: Rng + ?Sized>(
    parent1: &Genotype,
    parent2: &Genotype,
    rng: &mut R,
) -> (Genotype, Genotype) {
    let (perm1, sizes) = parent1.flatten();
    let (perm2, _) = parent2.flatten();
    if perm1.is_empty() {
        return (parent1.clone(), parent2.clone());
    }
    let (lo, hi) = random_cuts(perm1.len(), rng);
    let (c1, c2) = pmx_with_cuts(&perm1, &perm2, lo, hi);
    (
        Genotype::unflatten(&c1, &sizes).expect("PMX preserves permutations"),
        Genotype::unflatten(&c2, &sizes).expect("PMX preserves permutations"),
    )
}

/// Swap the jobs at two distinct flattened positions, possibly across
/// factories. Fewer than two jobs leaves the genotype unchanged.
pub fn swap_mutation<R: Rng + ?Sized>(genotype: &Genotype, rng: &mut R) -> Genotype {
    let n = genotype.num_jobs();
    if n < 2 {
        return genotype.clone();
    }
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let (fa, ka) = genotype.locate(a);
    let (fb, kb) = genotype.locate(b);
    let mut out = genotype.clone();
    let seqs = out.sequences_mut();
    let tmp = seqs[fa][ka];
    seqs[fa][ka] = seqs[fb][kb];
    seqs[fb][kb] = tmp;
    out
}
