//! Minimum test cover: distinguishing every pair of failure events.
//!
//! Two solvers are provided. [`tlg_solve`] materializes the pairwise set-cover
//! instance and runs lazy greedy on it. [`augmented_greedy`] reaches the same
//! selection without building the pairwise universe: it scores each sensor by
//! the pairs it splits across the covered/uncovered cut (`x`) plus the pairs it
//! splits inside the still-ambiguous buckets of covered events (`y`).

use fixedbitset::FixedBitSet;

use crate::cover::lazy_greedy;
use crate::error::{Error, Result};
use crate::influence::{check_indices, detection_sets, DetectionSets, InfluenceMatrix};
use crate::placement::{ratio, PlacementResult};

/// Unordered event pair stored as `(low, high)`.
pub type Pair = (usize, usize);

/// Default cap on `m * C(n, 2)` cells for the pairwise transformation.
pub const DEFAULT_MAX_PAIRWISE_CELLS: u128 = 1 << 31;

pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

fn sorted_unique(x: &[usize]) -> Vec<usize> {
    let mut v = x.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// All 2-element subsets of `x`.
pub fn beta(x: &[usize]) -> Vec<Pair> {
    let x = sorted_unique(x);
    let mut out = Vec::with_capacity(x.len() * x.len().saturating_sub(1) / 2);
    for (a, &u) in x.iter().enumerate() {
        for &v in &x[a + 1..] {
            out.push((u, v));
        }
    }
    out
}

/// Pairs of `pairs` with exactly one endpoint in `y`.
pub fn alpha(y: &[usize], pairs: &[Pair]) -> Vec<Pair> {
    let y = sorted_unique(y);
    let has = |e: usize| y.binary_search(&e).is_ok();
    pairs
        .iter()
        .copied()
        .filter(|&(u, v)| has(u) != has(v))
        .collect()
}

/// Set-cover instance over pairwise events.
#[derive(Debug, Clone)]
pub struct PairwiseInstance {
    /// `pair_events[p]` is the event pair behind pairwise element `p`.
    pub pair_events: Vec<Pair>,
    /// `C^t_v`: pairwise elements each sensor separates.
    pub sets: DetectionSets,
}

pub fn transform_mtc_to_msc(matrix: &InfluenceMatrix) -> Result<PairwiseInstance> {
    transform_with_cap(matrix, DEFAULT_MAX_PAIRWISE_CELLS)
}

/// Pairwise transformation, refusing instances above `max_cells` bits.
pub fn transform_with_cap(matrix: &InfluenceMatrix, max_cells: u128) -> Result<PairwiseInstance> {
    let n = matrix.n();
    let pairs = pair_count(n) as u128;
    let cells = pairs * matrix.m() as u128;
    if cells > max_cells {
        return Err(Error::SizeGuard {
            cells,
            cap: max_cells,
        });
    }
    let pair_events = beta(&(0..n).collect::<Vec<_>>());
    let sets = matrix
        .columns()
        .iter()
        .map(|col| {
            let mut s = FixedBitSet::with_capacity(pair_events.len());
            for (p, &(u, v)) in pair_events.iter().enumerate() {
                if col.contains(u) != col.contains(v) {
                    s.insert(p);
                }
            }
            s
        })
        .collect();
    Ok(PairwiseInstance {
        sets: DetectionSets::new(pair_events.len(), sets),
        pair_events,
    })
}

/// Groups of events with identical rows restricted to `selection`, refined one
/// sensor at a time. Groups come out ordered by signature, zeros before ones.
pub(crate) fn signature_groups(matrix: &InfluenceMatrix, selection: &[usize]) -> Vec<Vec<usize>> {
    if matrix.n() == 0 {
        return Vec::new();
    }
    let mut groups = vec![(0..matrix.n()).collect::<Vec<_>>()];
    for &s in selection {
        let col = matrix.column(s);
        let mut next = Vec::with_capacity(groups.len() * 2);
        for g in groups {
            let (ones, zeros): (Vec<usize>, Vec<usize>) =
                g.into_iter().partition(|&e| col.contains(e));
            if !zeros.is_empty() {
                next.push(zeros);
            }
            if !ones.is_empty() {
                next.push(ones);
            }
        }
        groups = next;
    }
    groups
}

/// `f_I(S)`: number of event pairs whose restricted signatures differ.
pub fn identification_value(matrix: &InfluenceMatrix, selection: &[usize]) -> Result<u64> {
    check_indices(selection, matrix.m())?;
    let same: u64 = signature_groups(matrix, selection)
        .iter()
        .map(|g| pair_count(g.len()))
        .sum();
    Ok(pair_count(matrix.n()) - same)
}

#[derive(Debug, Clone, Copy)]
pub struct TlgOptions {
    pub max_cells: u128,
    pub max_sensors: Option<usize>,
}

impl Default for TlgOptions {
    fn default() -> Self {
        TlgOptions {
            max_cells: DEFAULT_MAX_PAIRWISE_CELLS,
            max_sensors: None,
        }
    }
}

/// Transformed lazy greedy with default options.
pub fn tlg_solve(matrix: &InfluenceMatrix) -> Result<PlacementResult> {
    tlg_solve_with(matrix, TlgOptions::default())
}

/// Transforms to pairwise set cover and solves it with lazy greedy. Each
/// evaluation is a scan over the `C(n, 2)` pairwise universe.
pub fn tlg_solve_with(matrix: &InfluenceMatrix, options: TlgOptions) -> Result<PlacementResult> {
    let instance = transform_with_cap(matrix, options.max_cells)?;
    let trace = lazy_greedy(&instance.sets, options.max_sensors);
    Ok(PlacementResult::from_cover(&trace, pair_count(matrix.n())))
}

/// Per-sensor utility terms of one augmented-greedy iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorUtility {
    /// `X_i = C_i \ C_cov`.
    pub uncovered: Vec<usize>,
    /// `Y_i = C_i ∩ C_cov`.
    pub covered: Vec<usize>,
    /// `k_{i,j} = |X_i|`.
    pub k: u64,
    /// `k (n_j - k)`: pairs split across the cut.
    pub x: u64,
    /// Pairs split inside the existing buckets.
    pub y: u64,
    pub w: u64,
}

/// State snapshot of one pass through the augmented-greedy loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AgIterationRecord {
    /// 1-based iteration number `j`.
    pub iteration: usize,
    /// `C_cov` at the start of the iteration.
    pub covered: Vec<usize>,
    /// `n_j = n - |C_cov|`.
    pub remaining: u64,
    /// Utilities of unselected sensors; `None` for sensors already in the cover.
    pub utilities: Vec<Option<SensorUtility>>,
    /// Selected sensor, absent on the terminating iteration.
    pub chosen: Option<usize>,
    /// `w_{i*}`.
    pub best: u64,
    /// Buckets `G_1..G_j` after this iteration's update.
    pub buckets: Vec<Vec<Pair>>,
    pub comparisons: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AgOutcome {
    pub placement: PlacementResult,
    /// Filled only when [`AgOptions::record_trace`] is set.
    pub iterations: Vec<AgIterationRecord>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AgOptions {
    pub record_trace: bool,
    pub max_sensors: Option<usize>,
}

/// Augmented greedy with the full per-iteration trace recorded.
pub fn augmented_greedy(matrix: &InfluenceMatrix) -> AgOutcome {
    augmented_greedy_with(
        matrix,
        AgOptions {
            record_trace: true,
            max_sensors: None,
        },
    )
}

struct Evaluation {
    k: u64,
    x: u64,
    y: u64,
    comparisons: u64,
}

impl Evaluation {
    fn w(&self) -> u64 {
        self.x + self.y
    }
}

struct AgState<'a> {
    sets: &'a DetectionSets,
    covered: FixedBitSet,
    in_cover: Vec<bool>,
    /// `G_1..G_j`; `G_0` is always empty and not stored.
    buckets: Vec<Vec<Pair>>,
}

impl AgState<'_> {
    fn remaining(&self) -> u64 {
        (self.sets.universe - self.covered.count_ones(..)) as u64
    }

    fn evaluate(&self, sensor: usize, remaining: u64) -> Evaluation {
        let c = &self.sets.sets[sensor];
        let k = c.difference_count(&self.covered) as u64;
        let mut y = 0;
        let mut comparisons = 1;
        for bucket in &self.buckets {
            comparisons += bucket.len() as u64;
            y += bucket
                .iter()
                .filter(|&&(u, v)| c.contains(u) != c.contains(v))
                .count() as u64;
        }
        Evaluation {
            k,
            x: k * (remaining - k),
            y,
            comparisons,
        }
    }

    fn utility_record(&self, sensor: usize, e: &Evaluation) -> SensorUtility {
        let c = &self.sets.sets[sensor];
        SensorUtility {
            uncovered: c.ones().filter(|&v| !self.covered.contains(v)).collect(),
            covered: c.ones().filter(|&v| self.covered.contains(v)).collect(),
            k: e.k,
            x: e.x,
            y: e.y,
            w: e.w(),
        }
    }

    fn select(&mut self, sensor: usize) {
        let c = &self.sets.sets[sensor];
        for bucket in &mut self.buckets {
            bucket.retain(|&(u, v)| c.contains(u) == c.contains(v));
        }
        let newly: Vec<usize> = c.ones().filter(|&v| !self.covered.contains(v)).collect();
        self.buckets.push(beta(&newly));
        self.covered.union_with(c);
        self.in_cover[sensor] = true;
    }
}

fn evaluate_all(state: &AgState<'_>, remaining: u64) -> Vec<Option<Evaluation>> {
    let eval = |i: usize| {
        if state.in_cover[i] {
            None
        } else {
            Some(state.evaluate(i, remaining))
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..state.sets.len()).into_par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..state.sets.len()).map(eval).collect()
    }
}

/// Augmented greedy minimum test cover.
///
/// Iterates while the best utility is positive. Ties go to the smallest
/// sensor index; sensors already in the cover are not re-evaluated (their
/// utility is identically zero).
pub fn augmented_greedy_with(matrix: &InfluenceMatrix, options: AgOptions) -> AgOutcome {
    let sets = detection_sets(matrix);
    let n = matrix.n();
    let universe = pair_count(n);
    let mut state = AgState {
        sets: &sets,
        covered: FixedBitSet::with_capacity(n),
        in_cover: vec![false; sets.len()],
        buckets: Vec::new(),
    };
    let mut placement = PlacementResult {
        universe,
        ..PlacementResult::default()
    };
    let mut iterations = Vec::new();

    for j in 1.. {
        if options
            .max_sensors
            .is_some_and(|b| placement.selected.len() >= b)
        {
            break;
        }
        let remaining = state.remaining();
        let evals = evaluate_all(&state, remaining);

        let mut best: Option<(usize, u64)> = None;
        let mut comparisons = 0;
        for (i, e) in evals.iter().enumerate() {
            let Some(e) = e else { continue };
            placement.evaluations += 1;
            comparisons += e.comparisons;
            placement.max_eval_comparisons = placement.max_eval_comparisons.max(e.comparisons);
            if best.is_none_or(|(_, bw)| e.w() > bw) {
                best = Some((i, e.w()));
            }
        }
        placement.comparisons += comparisons;

        let chosen = best.filter(|&(_, w)| w > 0);
        let mut record = options.record_trace.then(|| AgIterationRecord {
            iteration: j,
            covered: state.covered.ones().collect(),
            remaining,
            utilities: evals
                .iter()
                .enumerate()
                .map(|(i, e)| e.as_ref().map(|e| state.utility_record(i, e)))
                .collect(),
            chosen: chosen.map(|(i, _)| i),
            best: best.map_or(0, |(_, w)| w),
            buckets: Vec::new(),
            comparisons,
        });

        if let Some((i, w)) = chosen {
            state.select(i);
            let total = placement.value() + w;
            placement.selected.push(i);
            placement.gains.push(w);
            placement.cumulative.push(total);
            placement.normalized.push(ratio(total, universe));
        }
        if let Some(r) = record.as_mut() {
            r.buckets = state.buckets.clone();
        }
        iterations.extend(record);
        if chosen.is_none() {
            break;
        }
    }

    AgOutcome {
        placement,
        iterations,
    }
}
