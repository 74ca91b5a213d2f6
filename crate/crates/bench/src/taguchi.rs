//! Orthogonal-array calibration of population size, crossover and mutation
//! probability.

use std::fmt::Write as _;

use carbonflow_core::kdma::KdmaParams;
use carbonflow_core::model::Instance;

use crate::experiment::{run_experiment, AlgoConfig, Experiment, Metric, RunOptions, Variant};

pub const POPULATION_LEVELS: [usize; 4] = [50, 100, 150, 200];
pub const CROSSOVER_LEVELS: [f64; 4] = [0.7, 0.8, 0.9, 1.0];
pub const MUTATION_LEVELS: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
pub const PARAMETERS: [&str; 3] = ["PS", "pc", "pm"];

/// The 16-run array for three 4-level factors: columns `a`, `b` and
/// `a xor b` over GF(4) addition.
pub fn l16() -> [[usize; 3]; 16] {
    let mut rows = [[0; 3]; 16];
    for a in 0..4 {
        for b in 0..4 {
            rows[a * 4 + b] = [a, b, a ^ b];
        }
    }
    rows
}

pub fn row_label(row: usize) -> String {
    format!("L{:02}", row + 1)
}

pub fn taguchi_variants(base: &KdmaParams) -> Vec<Variant> {
    l16()
        .iter()
        .enumerate()
        .map(|(i, &[a, b, c])| Variant {
            label: row_label(i),
            seed_key: "kdma".to_string(),
            config: AlgoConfig::Kdma(KdmaParams {
                population_size: POPULATION_LEVELS[a],
                crossover_prob: CROSSOVER_LEVELS[b],
                mutation_prob: MUTATION_LEVELS[c],
                ..base.clone()
            }),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaguchiSummary {
    /// Mean IGD of each of the 16 configurations.
    pub responses: Vec<f64>,
    /// `level_means[param][level]`.
    pub level_means: [[f64; 4]; 3],
    pub delta: [f64; 3],
    /// 1 for the largest delta; ties keep parameter order.
    pub rank: [usize; 3],
}

/// Level means, deltas and ranks from the 16 responses.
pub fn summarize(responses: &[f64]) -> TaguchiSummary {
    assert_eq!(responses.len(), 16, "one response per array row");
    let design = l16();
    let mut level_means = [[0.0; 4]; 3];
    for (param, means) in level_means.iter_mut().enumerate() {
        for (level, slot) in means.iter_mut().enumerate() {
            let vals: Vec<f64> = design
                .iter()
                .zip(responses)
                .filter(|(row, _)| row[param] == level)
                .map(|(_, &r)| r)
                .collect();
            *slot = vals.iter().sum::<f64>() / vals.len() as f64;
        }
    }
    let (delta, rank) = delta_and_rank(&level_means);
    TaguchiSummary {
        responses: responses.to_vec(),
        level_means,
        delta,
        rank,
    }
}

/// Per-parameter delta (max minus min level mean) and importance rank.
pub fn delta_and_rank(level_means: &[[f64; 4]; 3]) -> ([f64; 3], [usize; 3]) {
    let mut delta = [0.0; 3];
    for (d, means) in delta.iter_mut().zip(level_means) {
        let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = means.iter().copied().fold(f64::INFINITY, f64::min);
        *d = max - min;
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| delta[b].total_cmp(&delta[a]));
    let mut rank = [0; 3];
    for (r, &p) in order.iter().enumerate() {
        rank[p] = r + 1;
    }
    (delta, rank)
}

pub fn run_taguchi(instances: Vec<Instance>, base: &KdmaParams, opts: &RunOptions) -> (Experiment, TaguchiSummary) {
    let exp = run_experiment(instances, taguchi_variants(base), opts);
    let responses: Vec<f64> = (0..16)
        .map(|i| exp.overall_mean(&row_label(i), Metric::Igd).unwrap_or(f64::NAN))
        .collect();
    let summary = summarize(&responses);
    (exp, summary)
}

pub fn runs_csv(summary: &TaguchiSummary) -> String {
    let mut s = String::from("run,PS,pc,pm,igd\n");
    for (i, (&[a, b, c], r)) in l16().iter().zip(&summary.responses).enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{r:.6}",
            i + 1,
            POPULATION_LEVELS[a],
            CROSSOVER_LEVELS[b],
            MUTATION_LEVELS[c]
        );
    }
    s
}

pub fn summary_csv(summary: &TaguchiSummary) -> String {
    let mut s = format!("level,{}\n", PARAMETERS.join(","));
    for level in 0..4 {
        let _ = write!(s, "{}", level + 1);
        for param in 0..3 {
            let _ = write!(s, ",{:.6}", summary.level_means[param][level]);
        }
        s.push('\n');
    }
    let average = summary.responses.iter().sum::<f64>() / summary.responses.len() as f64;
    s.push_str("average");
    for _ in 0..3 {
        let _ = write!(s, ",{average:.6}");
    }
    s.push_str("\ndelta");
    for d in summary.delta {
        let _ = write!(s, ",{d:.6}");
    }
    s.push_str("\nrank");
    for r in summary.rank {
        let _ = write!(s, ",{r}");
    }
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_is_orthogonal() {
        let rows = l16();
        for param in 0..3 {
            for level in 0..4 {
                assert_eq!(rows.iter().filter(|r| r[param] == level).count(), 4);
            }
        }
        // every pair of columns covers all 16 level combinations
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            let mut seen: Vec<(usize, usize)> = rows.iter().map(|r| (r[x], r[y])).collect();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), 16);
        }
    }

    #[test]
    fn summary_of_additive_response() {
        // response depends on PS level only
        let responses: Vec<f64> = l16().iter().map(|r| r[0] as f64).collect();
        let s = summarize(&responses);
        assert_eq!(s.level_means[0], [0.0, 1.0, 2.0, 3.0]);
        assert_eq!(s.level_means[1], [1.5; 4]);
        assert_eq!(s.delta, [3.0, 0.0, 0.0]);
        assert_eq!(s.rank, [1, 2, 3]);
        let csv = summary_csv(&s);
        assert_eq!(csv.lines().count(), 8);
        assert!(csv.contains("average,1.500000,1.500000,1.500000\n"));
        assert!(csv.ends_with("rank,1,2,3\n"));
    }
}
