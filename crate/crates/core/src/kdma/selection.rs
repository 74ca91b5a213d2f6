//! Non-dominated sorting with crowding distance.

use super::Member;
use crate::model::ObjectivePoint;

/// Fronts of `points`, best first. Indices inside a front keep input order.
pub fn fast_nondominated_sort(points: &[ObjectivePoint]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if points[i].dominates(&points[j]) {
                dominates[i].push(j);
                dominated_by_count[j] += 1;
            } else if points[j].dominates(&points[i]) {
                dominates[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of `front` (same order). Boundary
/// points get infinity.
pub fn crowding_distance(points: &[ObjectivePoint], front: &[usize]) -> Vec<f64> {
    let len = front.len();
    let mut distance = vec![0.0; len];
    if len <= 2 {
        distance.iter_mut().for_each(|d| *d = f64::INFINITY);
        return distance;
    }
    for k in 0..2 {
        let value = |slot: usize| points[front[slot]].objectives()[k];
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)));
        let lo = value(order[0]);
        let hi = value(order[len - 1]);
        distance[order[0]] = f64::INFINITY;
        distance[order[len - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..len - 1 {
                distance[order[w]] += (value(order[w + 1]) - value(order[w - 1])) / (hi - lo);
            }
        }
    }
    distance
}

/// Assign rank and crowding to every member in place.
pub fn assign_fitness(members: &mut [Member]) {
    let points: Vec<ObjectivePoint> = members.iter().map(|m| m.point).collect();
    for (rank, front) in fast_nondominated_sort(&points).iter().enumerate() {
        let crowd = crowding_distance(&points, front);
        for (&i, d) in front.iter().zip(crowd) {
            members[i].rank = rank;
            members[i].crowding = d;
        }
    }
}

/// Indices of `members` ordered best first: rank ascending, then crowding
/// descending. Stable with respect to input order.
pub fn fitness_order(members: &[Member]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| {
        members[a]
            .rank
            .cmp(&members[b].rank)
            .then(members[b].crowding.total_cmp(&members[a].crowding))
    });
    order
}

/// Keep `target` members: whole fronts by ascending rank, the last admitted
/// front truncated by descending crowding distance.
pub fn environmental_selection(mut members: Vec<Member>, target: usize) -> Vec<Member> {
    assign_fitness(&mut members);
    let order = fitness_order(&members);
    let mut slots: Vec<Option<Member>> = members.into_iter().map(Some).collect();
    order
        .into_iter()
        .take(target)
        .map(|i| slots[i].take().expect("each index taken once"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::Genotype;

    fn member(id: usize, makespan: u64, ce: f64) -> Member {
        Member::new(
            Genotype::from_sequences_unchecked(vec![vec![id]]),
            ObjectivePoint {
                makespan,
                ce_total: ce,
                ce_run: 0.0,
                ce_idle: ce,
                ce_au: 0.0,
                offon_cycles: 0,
            },
        )
    }

    fn ids(ms: &[Member]) -> Vec<usize> {
        let mut v: Vec<usize> = ms.iter().map(|m| m.genotype.factory(0)[0]).collect();
        v.sort();
        v
    }

    #[test]
    fn sort_finds_fronts() {
        let ms = [member(0, 1, 5.0), member(1, 2, 2.0), member(2, 3, 6.0), member(3, 4, 7.0)];
        let pts: Vec<_> = ms.iter().map(|m| m.point).collect();
        assert_eq!(fast_nondominated_sort(&pts), vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn crowding_keeps_extremes() {
        // six mutually non-dominated points, keep three
        let ms: Vec<Member> = (0..6).map(|i| member(i, i as u64, 10.0 - [0.0, 1.0, 1.5, 5.0, 8.0, 9.0][i])).collect();
        let kept = environmental_selection(ms, 3);
        let kept_ids = ids(&kept);
        assert!(kept_ids.contains(&0) && kept_ids.contains(&5));
        // interior with the widest neighbourhood: point 3 (1.5 .. 8.0)
        assert_eq!(kept_ids, vec![0, 3, 5]);
    }

    #[test]
    fn exact_first_front_survives() {
        let ms = vec![member(0, 1, 4.0), member(1, 2, 3.0), member(2, 5, 9.0), member(3, 6, 9.5)];
        assert_eq!(ids(&environmental_selection(ms, 2)), vec![0, 1]);
    }

    #[test]
    fn selection_is_idempotent() {
        let ms: Vec<Member> = (0..5).map(|i| member(i, (i * 7 % 5) as u64, (i * 3 % 4) as f64)).collect();
        assert_eq!(ids(&environmental_selection(ms.clone(), 5)), ids(&ms));
    }
}
