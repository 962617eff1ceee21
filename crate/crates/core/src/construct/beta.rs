//! Fitting `beta` from pairs of inputs that the partial order leaves
//! unordered.
//!
//! For such a pair `w(i) - w(j) = sum_k a_k beta^k` with
//! `a_k = f(i_k) - f(j_k)` and `f(d) = zeta(d) log2 D_d`. The set of
//! `beta > 1` on which this is positive is a finite union of open intervals
//! whose endpoints are the polynomial's real roots above 1.

use std::cmp::Ordering;

use super::{layer_terms, GenieStats, ZetaTable};
use crate::error::{Error, Result};
use crate::kernel::RsKernel;
use crate::porder::po_dominates;

/// Grid resolution for isolating sign changes before bisection.
const GRID: usize = 4096;

/// Union of disjoint open intervals inside `(1, inf)`, sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaSet {
    intervals: Vec<(f64, f64)>,
}

impl BetaSet {
    pub fn empty() -> Self {
        BetaSet { intervals: Vec::new() }
    }

    /// All of `(1, inf)`.
    pub fn full() -> Self {
        BetaSet { intervals: vec![(1.0, f64::INFINITY)] }
    }

    pub fn from_intervals(mut intervals: Vec<(f64, f64)>) -> Self {
        intervals.retain(|&(lo, hi)| hi > lo);
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo < last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        BetaSet { intervals: merged }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, beta: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| beta > lo && beta < hi)
    }

    pub fn intersect(&self, other: &BetaSet) -> BetaSet {
        let mut out = Vec::new();
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                let lo = a.max(c);
                let hi = b.min(d);
                if hi > lo {
                    out.push((lo, hi));
                }
            }
        }
        BetaSet::from_intervals(out)
    }

    /// Interval of greatest length (an unbounded one wins).
    pub fn widest(&self) -> Option<(f64, f64)> {
        self.intervals.iter().copied().max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
    }
}

/// One resolved pair: `winner` is more reliable than `loser` exactly on `set`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairConstraint {
    pub m: usize,
    pub winner: usize,
    pub loser: usize,
    pub set: BetaSet,
}

fn layer_coefficients(layer: &[f64], i: usize, j: usize, m: usize) -> Vec<f64> {
    let q = layer.len();
    let (mut a, mut b) = (i, j);
    (0..m)
        .map(|_| {
            let c = layer[a % q] - layer[b % q];
            a /= q;
            b /= q;
            c
        })
        .collect()
}

fn eval(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Real roots of `sum_k coef[k] x^k` in `(1, inf)`, ascending.
fn roots_above_one(coef: &[f64]) -> Vec<f64> {
    let Some(top) = coef.iter().rposition(|&c| c != 0.0) else {
        return Vec::new();
    };
    if top == 0 {
        return Vec::new();
    }
    let lead = coef[top].abs();
    let bound = 1.0 + coef[..top].iter().map(|c| c.abs() / lead).fold(0.0, f64::max);
    let hi = bound.max(1.0) + 1.0;
    let mut roots = Vec::new();
    let mut x0 = 1.0;
    let mut g0 = eval(coef, x0);
    for s in 1..=GRID {
        let x1 = 1.0 + (hi - 1.0) * s as f64 / GRID as f64;
        let g1 = eval(coef, x1);
        if g1 == 0.0 {
            roots.push(x1);
        } else if g0 != 0.0 && (g0 < 0.0) != (g1 < 0.0) {
            let (mut a, mut b, mut ga) = (x0, x1, g0);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let gm = eval(coef, mid);
                if gm == 0.0 || b - a < 1e-14 {
                    a = mid;
                    b = mid;
                    break;
                }
                if (gm < 0.0) == (ga < 0.0) {
                    a = mid;
                    ga = gm;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        g0 = g1;
    }
    roots.retain(|&r| r > 1.0);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
}

fn positive_set(coef: &[f64]) -> BetaSet {
    let roots = roots_above_one(coef);
    let mut edges = vec![1.0];
    edges.extend(&roots);
    edges.push(f64::INFINITY);
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let probe = if w[1].is_finite() { 0.5 * (w[0] + w[1]) } else { w[0] + 1.0 };
        if eval(coef, probe) > 0.0 {
            out.push((w[0], w[1]));
        }
    }
    BetaSet::from_intervals(out)
}

/// The `beta > 1` for which `w(i) > w(j)` at length `q^m`. The pair must be
/// unordered by the partial order.
pub fn beta_threshold(i: usize, j: usize, zeta: &ZetaTable, kernel: &RsKernel, m: usize) -> Result<BetaSet> {
    let q = kernel.q();
    if po_dominates(j, i, q, m)? || po_dominates(i, j, q, m)? {
        return Err(Error::Domain(format!(
            "inputs {i} and {j} are ordered by the partial order; they constrain no beta"
        )));
    }
    let layer = layer_terms(kernel, zeta)?;
    Ok(positive_set(&layer_coefficients(&layer, i, j, m)))
}

/// Source of pairwise reliability decisions.
pub trait ReliabilityReference {
    /// `Greater` when `i` is significantly more reliable than `j` at length
    /// `q^m`, `Less` for the reverse, `None` when undecided or unknown.
    fn compare(&self, m: usize, i: usize, j: usize) -> Option<Ordering>;
}

impl ReliabilityReference for GenieStats {
    fn compare(&self, m: usize, i: usize, j: usize) -> Option<Ordering> {
        if m != self.m() {
            return None;
        }
        self.significantly_better(i, j)
    }
}

impl ReliabilityReference for [GenieStats] {
    fn compare(&self, m: usize, i: usize, j: usize) -> Option<Ordering> {
        self.iter().find(|s| s.m() == m).and_then(|s| s.significantly_better(i, j))
    }
}

impl ReliabilityReference for Vec<GenieStats> {
    fn compare(&self, m: usize, i: usize, j: usize) -> Option<Ordering> {
        self.as_slice().compare(m, i, j)
    }
}

/// Explicit decisions `(m, more reliable, less reliable)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairVotes {
    pub votes: Vec<(usize, usize, usize)>,
}

impl PairVotes {
    pub fn new(votes: Vec<(usize, usize, usize)>) -> Self {
        PairVotes { votes }
    }
}

impl ReliabilityReference for PairVotes {
    fn compare(&self, m: usize, i: usize, j: usize) -> Option<Ordering> {
        self.votes.iter().find_map(|&(vm, a, b)| match () {
            _ if vm == m && a == i && b == j => Some(Ordering::Greater),
            _ if vm == m && a == j && b == i => Some(Ordering::Less),
            _ => None,
        })
    }
}

/// Outcome of [`fit_beta`].
#[derive(Clone, Debug, PartialEq)]
pub struct BetaFit {
    /// Chosen interval `(lo, hi)`; `hi` may be infinite.
    pub lo: f64,
    pub hi: f64,
    pub beta: f64,
    /// Whether every constraint holds on the interval.
    pub consistent: bool,
    pub constraints: Vec<PairConstraint>,
    /// Constraints violated on the chosen interval.
    pub conflicts: Vec<PairConstraint>,
}

/// Default pick inside an interval: the midpoint, or `lo + 0.5` when
/// unbounded above.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    if hi.is_finite() {
        0.5 * (lo + hi)
    } else {
        lo + 0.5
    }
}

/// Intersects the `beta` sets implied by every unordered pair that
/// `reference` decides, for lengths `q^2` through `q^{m_max}`.
pub fn fit_beta(
    zeta: &ZetaTable,
    kernel: &RsKernel,
    m_max: usize,
    reference: &(impl ReliabilityReference + ?Sized),
) -> Result<BetaFit> {
    let q = kernel.q();
    let layer = layer_terms(kernel, zeta)?;
    let mut constraints = Vec::new();
    for m in 2..=m_max {
        let n = kernel.block_length(m)?;
        let order = crate::porder::PartialOrder::build(q, m)?;
        for i in 0..n {
            for j in i + 1..n {
                if order.comparable(i, j) {
                    continue;
                }
                let (winner, loser) = match reference.compare(m, i, j) {
                    Some(Ordering::Greater) => (i, j),
                    Some(Ordering::Less) => (j, i),
                    _ => continue,
                };
                let set = positive_set(&layer_coefficients(&layer, winner, loser, m));
                constraints.push(PairConstraint { m, winner, loser, set });
            }
        }
    }
    if constraints.is_empty() {
        return Err(Error::Estimation("the reference decides no unordered pair; supply beta directly".into()));
    }

    let mut inter = BetaSet::full();
    for c in &constraints {
        inter = inter.intersect(&c.set);
    }
    if let Some((lo, hi)) = inter.widest() {
        return Ok(BetaFit { lo, hi, beta: midpoint(lo, hi), consistent: true, constraints, conflicts: Vec::new() });
    }

    let (lo, hi) = best_subinterval(&constraints);
    let probe = if hi.is_finite() { 0.5 * (lo + hi) } else { lo + 1.0 };
    let conflicts = constraints.iter().filter(|c| !c.set.contains(probe)).cloned().collect();
    Ok(BetaFit { lo, hi, beta: midpoint(lo, hi), consistent: false, constraints, conflicts })
}

/// Widest run of elementary segments satisfying the most constraints.
fn best_subinterval(constraints: &[PairConstraint]) -> (f64, f64) {
    let mut edges = vec![1.0, f64::INFINITY];
    for c in constraints {
        for &(lo, hi) in c.set.intervals() {
            edges.push(lo);
            edges.push(hi);
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let segments: Vec<(f64, f64, Vec<bool>)> = edges
        .windows(2)
        .map(|w| {
            let probe = if w[1].is_finite() { 0.5 * (w[0] + w[1]) } else { w[0] + 1.0 };
            (w[0], w[1], constraints.iter().map(|c| c.set.contains(probe)).collect())
        })
        .collect();
    let best = segments.iter().map(|s| s.2.iter().filter(|&&b| b).count()).max().unwrap_or(0);
    let mut runs: Vec<(f64, f64, &[bool])> = Vec::new();
    for (lo, hi, sat) in &segments {
        if sat.iter().filter(|&&b| b).count() != best {
            continue;
        }
        match runs.last_mut() {
            Some(run) if run.1 == *lo && run.2 == sat.as_slice() => run.1 = *hi,
            _ => runs.push((*lo, *hi, sat)),
        }
    }
    runs.iter()
        .map(|r| (r.0, r.1))
        .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
        .unwrap_or((1.0, f64::INFINITY))
}
