//! Detection function and greedy minimum set cover.
//!
//! All solvers break ties on the smallest sensor index, so plain greedy,
//! lazy greedy and the budgeted variant always agree on a common prefix.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use fixedbitset::FixedBitSet;

use crate::error::Result;
use crate::influence::{check_indices, DetectionSets};

/// Ordered greedy selection with per-step utilities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoverTrace {
    pub selected: Vec<usize>,
    /// Marginal gain of each selected sensor at the time it was picked.
    pub gains: Vec<u64>,
    /// Objective value after each selection.
    pub cumulative: Vec<u64>,
    /// Number of marginal-utility evaluations performed.
    pub evaluations: u64,
}

impl CoverTrace {
    pub fn value(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    fn push(&mut self, sensor: usize, gain: u64) {
        let total = self.value() + gain;
        self.selected.push(sensor);
        self.gains.push(gain);
        self.cumulative.push(total);
    }
}

/// `f_D(S)`: size of the union of the selected sets.
pub fn detection_value(sets: &DetectionSets, selection: &[usize]) -> Result<u64> {
    check_indices(selection, sets.len())?;
    let mut union = FixedBitSet::with_capacity(sets.universe);
    for &i in selection {
        union.union_with(&sets.sets[i]);
    }
    Ok(union.count_ones(..) as u64)
}

fn gain(set: &FixedBitSet, covered: &FixedBitSet) -> u64 {
    set.difference_count(covered) as u64
}

fn plain_greedy(sets: &DetectionSets, budget: Option<usize>) -> CoverTrace {
    let target = sets.union_all().count_ones(..) as u64;
    let mut covered = FixedBitSet::with_capacity(sets.universe);
    let mut chosen = vec![false; sets.len()];
    let mut trace = CoverTrace::default();
    while trace.value() < target && budget.is_none_or(|b| trace.selected.len() < b) {
        let mut best: Option<(usize, u64)> = None;
        for (i, set) in sets.sets.iter().enumerate() {
            if chosen[i] {
                continue;
            }
            trace.evaluations += 1;
            let g = gain(set, &covered);
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((i, g));
            }
        }
        match best {
            Some((i, g)) if g > 0 => {
                chosen[i] = true;
                covered.union_with(&sets.sets[i]);
                trace.push(i, g);
            }
            _ => break,
        }
    }
    trace
}

/// Lazy greedy over any [`DetectionSets`], optionally truncated at `budget`.
///
/// Heap entries carry a gain upper bound and the selection round in which the
/// bound was computed. An entry refreshed in the current round that still
/// sits on top is the exact argmax.
pub(crate) fn lazy_greedy(sets: &DetectionSets, budget: Option<usize>) -> CoverTrace {
    let target = sets.union_all().count_ones(..) as u64;
    let mut covered = FixedBitSet::with_capacity(sets.universe);
    let mut trace = CoverTrace::default();

    let mut heap: BinaryHeap<(u64, Reverse<usize>, usize)> = sets
        .sets
        .iter()
        .enumerate()
        .map(|(i, s)| (s.count_ones(..) as u64, Reverse(i), 0))
        .collect();
    if trace.value() < target {
        trace.evaluations += sets.len() as u64;
    }

    while trace.value() < target && budget.is_none_or(|b| trace.selected.len() < b) {
        let round = trace.selected.len();
        let Some((bound, Reverse(i), stamp)) = heap.pop() else {
            break;
        };
        if stamp == round {
            if bound == 0 {
                break;
            }
            covered.union_with(&sets.sets[i]);
            trace.push(i, bound);
        } else {
            trace.evaluations += 1;
            heap.push((gain(&sets.sets[i], &covered), Reverse(i), round));
        }
    }
    trace
}

/// Plain greedy minimum set cover.
pub fn greedy_msc(sets: &DetectionSets) -> CoverTrace {
    plain_greedy(sets, None)
}

/// Lazy greedy minimum set cover; same selection as [`greedy_msc`] with
/// fewer evaluations.
pub fn lazy_greedy_msc(sets: &DetectionSets) -> CoverTrace {
    lazy_greedy(sets, None)
}

/// Budgeted maximum coverage: greedy truncated at `budget` sensors.
pub fn max_coverage(sets: &DetectionSets, budget: usize) -> CoverTrace {
    plain_greedy(sets, Some(budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::example_matrix;
    use crate::influence::detection_sets;

    #[test]
    fn fixture_detection_values() {
        let c = detection_sets(&example_matrix());
        assert_eq!(detection_value(&c, &[1, 3]).unwrap(), 10);
        assert_eq!(detection_value(&c, &[]).unwrap(), 0);
        assert_eq!(detection_value(&c, &[0]).unwrap(), 5);
        assert!(detection_value(&c, &[8]).is_err());
    }

    #[test]
    fn fixture_greedy_trace() {
        let c = detection_sets(&example_matrix());
        let g = greedy_msc(&c);
        assert_eq!(g.selected, vec![3, 0]);
        assert_eq!(g.cumulative, vec![9, 10]);
        let l = lazy_greedy_msc(&c);
        assert_eq!(l.selected, g.selected);
        assert_eq!(l.gains, g.gains);
        assert!(l.evaluations <= g.evaluations);
    }

    #[test]
    fn degenerate_instances() {
        let zero = DetectionSets::from_members(4, &[vec![], vec![]]);
        assert!(greedy_msc(&zero).selected.is_empty());
        assert!(lazy_greedy_msc(&zero).selected.is_empty());
        let empty = DetectionSets::from_members(0, &[]);
        assert_eq!(lazy_greedy_msc(&empty), CoverTrace::default());
        let one = DetectionSets::from_members(3, &[vec![0], vec![0, 1, 2], vec![2]]);
        assert_eq!(greedy_msc(&one).selected, vec![1]);
    }

    #[test]
    fn lazy_saves_evaluations_on_disjoint_sets() {
        let m = 6;
        let members: Vec<Vec<usize>> = (0..m).map(|i| vec![2 * i, 2 * i + 1]).collect();
        let c = DetectionSets::from_members(2 * m, &members);
        let g = greedy_msc(&c);
        let l = lazy_greedy_msc(&c);
        assert_eq!(g.selected, l.selected);
        // plain greedy: 6 + 5 + ... + 1 = 21; lazy: 6 initial + 1 refresh per later round = 11
        assert_eq!(g.evaluations, 21);
        assert_eq!(l.evaluations, 11);
        assert!(l.evaluations < (m * g.selected.len()) as u64);
    }

    #[test]
    fn budgeted_coverage() {
        let c = detection_sets(&example_matrix());
        let one = max_coverage(&c, 1);
        assert_eq!(one.selected, vec![3]);
        assert_eq!(one.value(), 9);
        assert!(max_coverage(&c, 0).selected.is_empty());
        assert_eq!(max_coverage(&c, 8).selected, greedy_msc(&c).selected);
    }
}
