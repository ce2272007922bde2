//! Greedy sensor placement for the log-det error.
//!
//! Both problems run the same greedy step: add the sensor with the largest
//! decrease `h(S) - h(S ∪ {a})`, ties (within [`TIE_TOL`]) going to the
//! smallest index.
//!
//! * [`greedy_p1`] keeps adding sensors until `h(S) <= R`; its set size is
//!   within the factor [`guarantee_factor_p1`] of the minimum.
//! * [`greedy_p2`] adds exactly `l` sensors; for `l >= r` its value obeys
//!   `h(S_l) <= (1 - e^{-l/r}) h(S*) + e^{-l/r} h(∅)` against the best
//!   `r`-set `S*`.
//!
//! The lazy mode keeps stale gains as upper bounds in a max-heap and
//! re-evaluates only candidates whose bound could still win. Because the
//! objective is supermodular the stale gains are valid upper bounds, and
//! the selected sequence is identical to the eager one.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{IncrementalState, LogDetObjective};
use crate::system::SensorSet;

/// Gains closer than this are treated as equal.
pub const TIE_TOL: f64 = 1e-12;
/// Allowance for rounding when stale gains are used as upper bounds.
const LAZY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GreedyOptions {
    /// Lazy (accelerated) evaluation of marginal gains.
    pub lazy: bool,
    /// Evaluate candidates of an eager step in parallel.
    pub parallel: bool,
}

impl GreedyOptions {
    pub fn eager() -> Self {
        Self { lazy: false, parallel: false }
    }

    pub fn lazy() -> Self {
        Self { lazy: true, parallel: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlacementStatus {
    Ok,
    BudgetInfeasible,
}

/// One greedy addition. `selected` is a 0-based sensor index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub iteration: usize,
    pub selected: usize,
    pub logdet: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Guarantee {
    /// `|S| / |S*| <= factor` for the minimal-set problem.
    Cardinality { factor: f64 },
    /// `h(S) <= optimum_weight h(S*) + empty_weight h(∅)` for the budgeted problem.
    Value { optimum_weight: f64, empty_weight: f64 },
}

impl Guarantee {
    /// Headline number: the cardinality factor, or the weight on the optimum.
    pub fn headline(&self) -> f64 {
        match *self {
            Guarantee::Cardinality { factor } => factor,
            Guarantee::Value { optimum_weight, .. } => optimum_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementResult {
    pub chosen: SensorSet,
    /// 0-based indices in the order they were added.
    pub selection_order: Vec<usize>,
    pub achieved_logdet: f64,
    pub trace: Vec<TraceStep>,
    pub guarantee: Option<Guarantee>,
    pub status: PlacementStatus,
    /// Number of marginal-value evaluations performed.
    pub evaluations: usize,
}

/// `1 + log((h(∅) - h([n])) / (R - h([n])))`.
pub fn guarantee_factor_p1(logdet_empty: f64, logdet_full: f64, budget: f64) -> Result<f64> {
    if !(budget > logdet_full) {
        return Err(Error::DegenerateBudget { budget, full: logdet_full });
    }
    if logdet_empty < logdet_full {
        return Err(Error::InvalidParameter("empty-set value below full-set value".into()));
    }
    Ok(1.0 + ((logdet_empty - logdet_full) / (budget - logdet_full)).ln())
}

/// The data-dependent form of the same factor, with `R` replaced by the
/// value of the set chosen just before the budget was met.
pub fn posterior_factor_p1(logdet_empty: f64, logdet_full: f64, logdet_penultimate: f64) -> Result<f64> {
    guarantee_factor_p1(logdet_empty, logdet_full, logdet_penultimate)
}

/// Weights `(1 - e^{-l/r}, e^{-l/r})` of the budgeted guarantee.
pub fn guarantee_weights_p2(r: usize, l: usize) -> (f64, f64) {
    let e = (-(l as f64) / r as f64).exp();
    (1.0 - e, e)
}

/// Greedy minimal placement meeting `h(S) <= budget`.
pub fn greedy_p1(obj: &LogDetObjective, budget: f64, opts: GreedyOptions) -> Result<PlacementResult> {
    if !budget.is_finite() {
        return Err(Error::InvalidBudget(format!("budget must be finite, got {budget}")));
    }
    let n = obj.n();
    let run = run_greedy(obj, opts, |state| state.value() > budget && state.sensors().len() < n)?;
    let status = if run.state.value() <= budget { PlacementStatus::Ok } else { PlacementStatus::BudgetInfeasible };
    let empty = obj.value(&SensorSet::empty())?;
    let full = obj.value(&SensorSet::full(n))?;
    let guarantee = guarantee_factor_p1(empty, full, budget).ok().map(|factor| Guarantee::Cardinality { factor });
    Ok(run.finish(guarantee, status))
}

/// Greedy placement of exactly `l` sensors for a cardinality budget `r <= l`.
pub fn greedy_p2(obj: &LogDetObjective, r: usize, l: usize, opts: GreedyOptions) -> Result<PlacementResult> {
    let n = obj.n();
    if r == 0 || r > n {
        return Err(Error::InvalidBudget(format!("r = {r} must lie in 1..={n}")));
    }
    if l < r || l > n {
        return Err(Error::InvalidBudget(format!("l = {l} must lie in {r}..={n}")));
    }
    let run = run_greedy(obj, opts, |state| state.sensors().len() < l)?;
    let (optimum_weight, empty_weight) = guarantee_weights_p2(r, l);
    Ok(run.finish(Some(Guarantee::Value { optimum_weight, empty_weight }), PlacementStatus::Ok))
}

struct GreedyRun {
    state: IncrementalState,
    order: Vec<usize>,
    trace: Vec<TraceStep>,
    evaluations: usize,
}

impl GreedyRun {
    fn finish(self, guarantee: Option<Guarantee>, status: PlacementStatus) -> PlacementResult {
        PlacementResult {
            chosen: self.state.sensors().clone(),
            selection_order: self.order,
            achieved_logdet: self.state.value(),
            trace: self.trace,
            guarantee,
            status,
            evaluations: self.evaluations,
        }
    }
}

fn run_greedy(
    obj: &LogDetObjective,
    opts: GreedyOptions,
    mut keep_going: impl FnMut(&IncrementalState) -> bool,
) -> Result<GreedyRun> {
    let mut run =
        GreedyRun { state: obj.state(&SensorSet::empty())?, order: Vec::new(), trace: Vec::new(), evaluations: 0 };
    let mut lazy = opts.lazy.then(|| LazyQueue::new(obj.n()));
    while keep_going(&run.state) {
        let (selected, gain) = match lazy.as_mut() {
            Some(queue) => queue.select(obj, &run.state, &mut run.evaluations),
            None => eager_select(obj, &run.state, opts.parallel, &mut run.evaluations),
        }
        .expect("a candidate remains while the set is not full");
        obj.push(&mut run.state, selected);
        run.order.push(selected);
        run.trace.push(TraceStep { iteration: run.trace.len() + 1, selected, logdet: run.state.value(), gain });
    }
    Ok(run)
}

/// Smallest index among gains within [`TIE_TOL`] of the maximum.
fn pick(gains: &[(usize, f64)]) -> Option<(usize, f64)> {
    let best = gains.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
    gains.iter().filter(|g| g.1 >= best - TIE_TOL).min_by_key(|g| g.0).copied()
}

fn eager_select(
    obj: &LogDetObjective,
    state: &IncrementalState,
    parallel: bool,
    evaluations: &mut usize,
) -> Option<(usize, f64)> {
    let candidates: Vec<usize> = (0..obj.n()).filter(|&a| !state.sensors().contains(a)).collect();
    *evaluations += candidates.len();
    let gain = |a: usize| (a, state.value() - obj.value_with(state, a));
    let gains: Vec<(usize, f64)> = if parallel {
        candidates.par_iter().map(|&a| gain(a)).collect()
    } else {
        candidates.iter().map(|&a| gain(a)).collect()
    };
    pick(&gains)
}

#[derive(Debug, Clone, Copy)]
struct Bound {
    gain: f64,
    index: usize,
}

impl PartialEq for Bound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Bound {}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    // Larger gain first, then smaller index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then_with(|| other.index.cmp(&self.index))
    }
}

/// Stale marginal gains of unselected candidates.
struct LazyQueue {
    heap: BinaryHeap<Bound>,
}

impl LazyQueue {
    fn new(n: usize) -> Self {
        Self { heap: (0..n).map(|index| Bound { gain: f64::INFINITY, index }).collect() }
    }

    fn select(
        &mut self,
        obj: &LogDetObjective,
        state: &IncrementalState,
        evaluations: &mut usize,
    ) -> Option<(usize, f64)> {
        let mut fresh: Vec<(usize, f64)> = Vec::new();
        let mut best = f64::NEG_INFINITY;
        while let Some(top) = self.heap.peek() {
            // Every stale bound left in the heap is below the tie window of the best fresh gain.
            if top.gain + LAZY_SLACK < best - TIE_TOL {
                break;
            }
            let top = self.heap.pop().expect("peeked");
            *evaluations += 1;
            let gain = state.value() - obj.value_with(state, top.index);
            best = best.max(gain);
            fresh.push((top.index, gain));
        }
        let choice = pick(&fresh)?;
        self.heap.extend(
            fresh.into_iter().filter(|&(index, _)| index != choice.0).map(|(index, gain)| Bound { gain, index }),
        );
        Some(choice)
    }
}
