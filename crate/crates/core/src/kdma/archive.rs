use serde::{Deserialize, Serialize};

use crate::encoding::Genotype;
use crate::metrics::Point;
use crate::model::ObjectivePoint;

/// Every non-dominated solution seen so far, one genotype per objective
/// vector.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    entries: Vec<(Genotype, ObjectivePoint)>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Whether [`ParetoArchive::insert`] would keep `point`.
    pub fn would_accept(&self, point: &ObjectivePoint) -> bool {
        !self
            .entries
            .iter()
            .any(|(_, e)| e.dominates(point) || e.same_objectives(point))
    }

    /// Insert unless an existing entry is at least as good in both
    /// objectives. Returns whether the archive changed.
    pub fn insert(&mut self, genotype: &Genotype, point: ObjectivePoint) -> bool {
        if !self.would_accept(&point) {
            return false;
        }
        self.entries.retain(|(_, e)| !point.dominates(e));
        self.entries.push((genotype.clone(), point));
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries ordered by makespan, then carbon.
    pub fn sorted(&self) -> Vec<(Genotype, ObjectivePoint)> {
        let mut out = self.entries.clone();
        out.sort_by(|a, b| {
            a.1.makespan
                .cmp(&b.1.makespan)
                .then(a.1.ce_total.total_cmp(&b.1.ce_total))
        });
        out
    }

    pub fn entries(&self) -> &[(Genotype, ObjectivePoint)] {
        &self.entries
    }

    pub fn points(&self) -> Vec<Point> {
        self.sorted().iter().map(|(_, p)| p.objectives()).collect()
    }

    pub fn min_carbon(&self) -> Option<&(Genotype, ObjectivePoint)> {
        self.entries
            .iter()
            .min_by(|a, b| a.1.ce_total.total_cmp(&b.1.ce_total))
    }

    pub fn min_makespan(&self) -> Option<&(Genotype, ObjectivePoint)> {
        self.entries.iter().min_by_key(|e| e.1.makespan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(makespan: u64, ce: f64) -> ObjectivePoint {
        ObjectivePoint {
            makespan,
            ce_total: ce,
            ce_run: ce,
            ce_idle: 0.0,
            ce_au: 0.0,
            offon_cycles: 0,
        }
    }

    #[test]
    fn keeps_only_non_dominated() {
        let g = Genotype::from_sequences_unchecked(vec![vec![0]]);
        let mut a = ParetoArchive::new();
        assert!(a.insert(&g, pt(10, 5.0)));
        assert!(a.insert(&g, pt(8, 7.0)));
        assert!(!a.insert(&g, pt(10, 5.0)));
        assert!(!a.insert(&g, pt(11, 6.0)));
        assert!(a.insert(&g, pt(8, 4.0)));
        assert_eq!(a.points(), vec![[8.0, 4.0]]);
    }
}
