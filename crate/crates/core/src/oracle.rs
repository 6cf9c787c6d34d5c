//! Exhaustive reference solvers for small instances.
//!
//! Nothing here shares code with the greedy solvers; these are the
//! ground truth the property tests compare against.

use crate::error::{Error, Result};
use crate::influence::{DetectionSets, InfluenceMatrix};

pub const MAX_EXHAUSTIVE_SENSORS: usize = 24;

fn guard(m: usize) -> Result<()> {
    if m > MAX_EXHAUSTIVE_SENSORS {
        Err(Error::OracleGuard {
            sensors: m,
            max: MAX_EXHAUSTIVE_SENSORS,
        })
    } else {
        Ok(())
    }
}

/// Visits every `r`-subset of `0..m` in lexicographic order until `f` returns true.
fn first_combination(
    m: usize,
    r: usize,
    mut f: impl FnMut(&[usize]) -> bool,
) -> Option<Vec<usize>> {
    if r > m {
        return None;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        if f(&idx) {
            return Some(idx);
        }
        // advance to the next combination
        let mut pos = r;
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            if idx[pos] < m - r + pos {
                break;
            }
        }
        idx[pos] += 1;
        for q in pos + 1..r {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Smallest-cardinality subset by increasing size, first feasible in lexicographic order.
fn smallest_feasible(m: usize, mut feasible: impl FnMut(&[usize]) -> bool) -> Vec<usize> {
    for r in 0..=m {
        if let Some(s) = first_combination(m, r, &mut feasible) {
            return s;
        }
    }
    unreachable!("the full sensor set is always feasible")
}

fn union_size(sets: &DetectionSets, selection: &[usize]) -> usize {
    (0..sets.universe)
        .filter(|&e| selection.iter().any(|&i| sets.sets[i].contains(e)))
        .count()
}

/// Minimum set cover by exhaustive search.
pub fn exact_msc(sets: &DetectionSets) -> Result<Vec<usize>> {
    guard(sets.len())?;
    let all: Vec<usize> = (0..sets.len()).collect();
    let target = union_size(sets, &all);
    Ok(smallest_feasible(sets.len(), |s| {
        union_size(sets, s) == target
    }))
}

/// Counts event pairs whose rows differ on some selected sensor, by direct double loop.
pub fn brute_identification_value(matrix: &InfluenceMatrix, selection: &[usize]) -> u64 {
    let n = matrix.n();
    let mut count = 0;
    for a in 0..n {
        for b in a + 1..n {
            if selection
                .iter()
                .any(|&s| matrix.get(a, s) != matrix.get(b, s))
            {
                count += 1;
            }
        }
    }
    count
}

/// Minimum test cover by exhaustive search.
pub fn exact_mtc(matrix: &InfluenceMatrix) -> Result<Vec<usize>> {
    guard(matrix.m())?;
    let all: Vec<usize> = (0..matrix.m()).collect();
    let target = brute_identification_value(matrix, &all);
    Ok(smallest_feasible(matrix.m(), |s| {
        brute_identification_value(matrix, s) == target
    }))
}
