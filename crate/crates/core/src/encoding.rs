//! Solution encoding: one ordered job sequence per factory.
//!
//! The per-factory form is canonical. Crossover works on the flattened
//! permutation and converts back with a factory size profile.
//!
//! Job indices are zero based throughout the crate.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type JobId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("expected {expected} factory sequences, found {found}")]
    FactoryCount { expected: usize, found: usize },
    #[error("duplicate job {0}")]
    Duplicate(JobId),
    #[error("missing job {0}")]
    Missing(JobId),
    #[error("job {0} out of range")]
    OutOfRange(JobId),
    #[error("size profile sums to {found}, expected {expected}")]
    SizeProfile { expected: usize, found: usize },
}

/// Check that `sequences` partition `0..n` into exactly `factories` parts.
/// Reports the first problem encountered.
pub fn validate(sequences: &[Vec<JobId>], n: usize, factories: usize) -> Result<(), Violation> {
    if sequences.len() != factories {
        return Err(Violation::FactoryCount {
            expected: factories,
            found: sequences.len(),
        });
    }
    let mut seen = vec![false; n];
    for &job in sequences.iter().flatten() {
        if job >= n {
            return Err(Violation::OutOfRange(job));
        }
        if std::mem::replace(&mut seen[job], true) {
            return Err(Violation::Duplicate(job));
        }
    }
    match seen.iter().position(|&s| !s) {
        Some(job) => Err(Violation::Missing(job)),
        None => Ok(()),
    }
}

/// A partition of the jobs into one processing order per factory.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Genotype {
    sequences: Vec<Vec<JobId>>,
}

impl Genotype {
    pub fn new(sequences: Vec<Vec<JobId>>, n: usize, factories: usize) -> Result<Self, Violation> {
        validate(&sequences, n, factories)?;
        Ok(Genotype { sequences })
    }

    /// Wrap sequences without checking them. Evaluation still validates.
    pub fn from_sequences_unchecked(sequences: Vec<Vec<JobId>>) -> Self {
        Genotype { sequences }
    }

    /// Rebuild from a flattened permutation and a per-factory size profile.
    pub fn unflatten(permutation: &[JobId], sizes: &[usize]) -> Result<Self, Violation> {
        let total: usize = sizes.iter().sum();
        if total != permutation.len() {
            return Err(Violation::SizeProfile {
                expected: permutation.len(),
                found: total,
            });
        }
        let mut rest = permutation;
        let sequences = sizes
            .iter()
            .map(|&len| {
                let (head, tail) = rest.split_at(len);
                rest = tail;
                head.to_vec()
            })
            .collect();
        Genotype::new(sequences, permutation.len(), sizes.len())
    }

    pub fn validate_for(&self, n: usize, factories: usize) -> Result<(), Violation> {
        validate(&self.sequences, n, factories)
    }

    pub fn sequences(&self) -> &[Vec<JobId>] {
        &self.sequences
    }

    pub(crate) fn sequences_mut(&mut self) -> &mut [Vec<JobId>] {
        &mut self.sequences
    }

    pub fn factory(&self, f: usize) -> &[JobId] {
        &self.sequences[f]
    }

    pub fn num_factories(&self) -> usize {
        self.sequences.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sequences.iter().map(Vec::len).collect()
    }

    /// Concatenate all factory sequences; returns the permutation and the
    /// size profile needed to undo it.
    pub fn flatten(&self) -> (Vec<JobId>, Vec<usize>) {
        (self.sequences.concat(), self.sizes())
    }

    /// Map a flattened position to `(factory, position within factory)`.
    pub fn locate(&self, flat: usize) -> (usize, usize) {
        let mut offset = flat;
        for (f, seq) in self.sequences.iter().enumerate() {
            if offset < seq.len() {
                return (f, offset);
            }
            offset -= seq.len();
        }
        panic!("flat position {flat} out of range for {} jobs", self.num_jobs());
    }

    /// Decision-variable view: `x[i][k] = 1` iff job `i` sits at flattened
    /// position `k`; `y[k][f] = 1` iff position `k` belongs to factory `f`.
    pub fn decision_variables(&self) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
        let n = self.num_jobs();
        let mut x = vec![vec![0u8; n]; n];
        let mut y = vec![vec![0u8; self.num_factories()]; n];
        let mut k = 0;
        for (f, seq) in self.sequences.iter().enumerate() {
            for &job in seq {
                x[job][k] = 1;
                y[k][f] = 1;
                k += 1;
            }
        }
        (x, y)
    }
}

/// Uniform random permutation with an independent uniform factory per job.
pub fn random_genotype<R: Rng + ?Sized>(n: usize, factories: usize, rng: &mut R) -> Genotype {
    let mut order: Vec<JobId> = (0..n).collect();
    order.shuffle(rng);
    let mut sequences = vec![Vec::new(); factories];
    for job in order {
        sequences[rng.gen_range(0..factories)].push(job);
    }
    Genotype { sequences }
}
