//! Detection, identification and localization scores for a sensor set.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::influence::{check_indices, InfluenceMatrix};
use crate::placement::ratio;
use crate::testcover::{pair_count, signature_groups};

/// Events sharing one restricted signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalizationGroup {
    /// Outputs of the selected sensors, in selection order.
    pub signature: Vec<bool>,
    pub events: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalizationPartition {
    pub sensors: Vec<usize>,
    pub groups: Vec<LocalizationGroup>,
}

impl LocalizationPartition {
    pub fn event_count(&self) -> usize {
        self.groups.iter().map(|g| g.events.len()).sum()
    }

    pub fn largest(&self) -> usize {
        self.groups
            .iter()
            .map(|g| g.events.len())
            .max()
            .unwrap_or(0)
    }

    /// Groups sorted by their smallest event, convenient for display.
    pub fn by_first_event(&self) -> Vec<&LocalizationGroup> {
        let mut v: Vec<_> = self.groups.iter().collect();
        v.sort_by_key(|g| g.events[0]);
        v
    }
}

/// How the all-zero signature is treated when localizing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Undetected {
    /// Undetected events form one group like any other signature.
    #[default]
    Grouped,
    /// Undetected events are left out of the partition.
    Excluded,
}

pub fn localization_partition(
    matrix: &InfluenceMatrix,
    selection: &[usize],
) -> Result<LocalizationPartition> {
    localization_partition_with(matrix, selection, Undetected::Grouped)
}

pub fn localization_partition_with(
    matrix: &InfluenceMatrix,
    selection: &[usize],
    undetected: Undetected,
) -> Result<LocalizationPartition> {
    check_indices(selection, matrix.m())?;
    let groups = signature_groups(matrix, selection)
        .into_iter()
        .map(|events| {
            let e = events[0];
            LocalizationGroup {
                signature: selection.iter().map(|&s| matrix.get(e, s)).collect(),
                events,
            }
        })
        .filter(|g| undetected == Undetected::Grouped || g.signature.iter().any(|&b| b))
        .collect();
    Ok(LocalizationPartition {
        sensors: selection.to_vec(),
        groups,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub sensor_count: usize,
    /// Events in the universe, `n`.
    pub events: usize,
    /// `f_D`.
    pub detected: u64,
    /// `f_I`.
    pub separated: u64,
    /// `C(n, 2)`.
    pub pairs: u64,
    /// Localization sets counted.
    pub groups: usize,
    /// Events the localization scores are taken over.
    pub localized_events: usize,
    /// `I_D = f_D / n`.
    pub i_d: f64,
    /// `I_I = f_I / C(n, 2)`.
    pub i_i: f64,
    /// `I_L = groups / localized_events`.
    pub i_l: f64,
    /// `I_W`, the largest localization set.
    pub i_w: usize,
    /// `I_W / n`.
    pub i_w_normalized: f64,
}

pub fn score_report(matrix: &InfluenceMatrix, selection: &[usize]) -> Result<ScoreReport> {
    score_report_with(matrix, selection, Undetected::Grouped)
}

pub fn score_report_with(
    matrix: &InfluenceMatrix,
    selection: &[usize],
    undetected: Undetected,
) -> Result<ScoreReport> {
    if matrix.n() == 0 {
        return Err(Error::EmptyEventSet);
    }
    let all = localization_partition_with(matrix, selection, Undetected::Grouped)?;
    let mut union = FixedBitSet::with_capacity(matrix.n());
    for &s in selection {
        union.union_with(matrix.column(s));
    }
    let groups: Vec<usize> = all.groups.iter().map(|g| g.events.len()).collect();
    let partition = match undetected {
        Undetected::Grouped => all,
        Undetected::Excluded => localization_partition_with(matrix, selection, undetected)?,
    };
    build_report(
        matrix.n(),
        selection.len(),
        union.count_ones(..) as u64,
        &groups,
        &partition,
    )
}

fn build_report(
    n: usize,
    sensor_count: usize,
    detected: u64,
    all_group_sizes: &[usize],
    partition: &LocalizationPartition,
) -> Result<ScoreReport> {
    let localized_events = partition.event_count();
    if localized_events == 0 {
        return Err(Error::EmptyEventSet);
    }
    let pairs = pair_count(n);
    let same: u64 = all_group_sizes.iter().map(|&g| pair_count(g)).sum();
    let separated = pairs - same;
    let i_w = partition.largest();
    Ok(ScoreReport {
        sensor_count,
        events: n,
        detected,
        separated,
        pairs,
        groups: partition.groups.len(),
        localized_events,
        i_d: detected as f64 / n as f64,
        i_i: ratio(separated, pairs),
        i_l: partition.groups.len() as f64 / localized_events as f64,
        i_w,
        i_w_normalized: i_w as f64 / n as f64,
    })
}

/// Scores after each prefix of `order`, starting with the empty set.
pub fn score_curve(
    matrix: &InfluenceMatrix,
    order: &[usize],
    undetected: Undetected,
) -> Result<Vec<ScoreReport>> {
    (0..=order.len())
        .map(|k| score_report_with(matrix, &order[..k], undetected))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::example_matrix;

    #[test]
    fn two_sensor_partition() {
        let m = example_matrix();
        let p = localization_partition(&m, &[1, 3]).unwrap();
        let groups: Vec<Vec<usize>> = p
            .by_first_event()
            .iter()
            .map(|g| g.events.clone())
            .collect();
        assert_eq!(groups, vec![vec![0], vec![1, 2, 5, 7], vec![3, 4, 6, 8, 9]]);
    }

    #[test]
    fn empty_selection_single_group() {
        let m = example_matrix();
        let p = localization_partition(&m, &[]).unwrap();
        assert_eq!(p.groups.len(), 1);
        assert_eq!(p.groups[0].events.len(), 10);
    }

    #[test]
    fn four_sensor_partition_is_discrete() {
        let m = example_matrix();
        let p = localization_partition(&m, &[0, 1, 2, 4]).unwrap();
        assert_eq!(p.groups.len(), 10);
        assert!(p.groups.iter().all(|g| g.events.len() == 1));
    }

    #[test]
    fn reports_on_fixture() {
        let m = example_matrix();
        let r = score_report(&m, &[1, 3]).unwrap();
        assert_eq!(r.i_l, 0.3);
        assert_eq!(r.i_w, 5);
        assert_eq!(r.i_d, 1.0);
        assert_eq!((r.separated, r.pairs), (29, 45));
        let best = score_report(&m, &[0, 1, 2, 4]).unwrap();
        assert_eq!((best.i_l, best.i_w, best.i_i), (1.0, 1, 1.0));
    }

    #[test]
    fn all_zero_matrix_report() {
        let m = InfluenceMatrix::from_bool_rows(&vec![vec![false; 2]; 5], 2);
        let r = score_report(&m, &[0, 1]).unwrap();
        assert_eq!((r.i_d, r.i_i, r.i_l, r.i_w), (0.0, 0.0, 0.2, 5));
        assert!(matches!(
            score_report_with(&m, &[0], Undetected::Excluded),
            Err(Error::EmptyEventSet)
        ));
    }

    #[test]
    fn excluded_convention_drops_zero_group() {
        let m =
            InfluenceMatrix::from_bool_rows(&[vec![true], vec![false], vec![false], vec![true]], 1);
        let r = score_report_with(&m, &[0], Undetected::Excluded).unwrap();
        assert_eq!((r.groups, r.localized_events, r.i_w), (1, 2, 2));
        assert_eq!(r.i_l, 0.5);
        let g = score_report(&m, &[0]).unwrap();
        assert_eq!((g.groups, g.i_l), (2, 0.5));
    }

    #[test]
    fn empty_event_set_is_an_error() {
        let m = InfluenceMatrix::from_bool_rows(&[], 3);
        assert!(matches!(score_report(&m, &[]), Err(Error::EmptyEventSet)));
    }
}
