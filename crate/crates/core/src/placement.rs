use crate::cover::CoverTrace;

/// Ordered sensor selection produced by any of the solvers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlacementResult {
    pub selected: Vec<usize>,
    /// Marginal utility `w` of each selection.
    pub gains: Vec<u64>,
    /// Objective (`f_D` or `f_I`) after each selection.
    pub cumulative: Vec<u64>,
    /// `cumulative / universe` after each selection (`I_D` or `I_I`).
    pub normalized: Vec<f64>,
    /// Size of the element universe the objective counts over.
    pub universe: u64,
    /// Marginal-utility evaluations.
    pub evaluations: u64,
    /// Elementary comparisons spent on evaluations.
    pub comparisons: u64,
    /// Largest comparison count of a single evaluation.
    pub max_eval_comparisons: u64,
}

/// Ratio used for normalized scores. An empty universe is vacuously fully
/// covered.
pub fn ratio(value: u64, universe: u64) -> f64 {
    if universe == 0 {
        1.0
    } else {
        value as f64 / universe as f64
    }
}

impl PlacementResult {
    /// Wraps a set-cover trace over a universe of `universe` elements; each
    /// evaluation is charged one comparison per universe element.
    pub fn from_cover(trace: &CoverTrace, universe: u64) -> Self {
        PlacementResult {
            selected: trace.selected.clone(),
            gains: trace.gains.clone(),
            cumulative: trace.cumulative.clone(),
            normalized: trace
                .cumulative
                .iter()
                .map(|&v| ratio(v, universe))
                .collect(),
            universe,
            evaluations: trace.evaluations,
            comparisons: trace.evaluations * universe,
            max_eval_comparisons: if trace.evaluations > 0 { universe } else { 0 },
        }
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn value(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }
}
