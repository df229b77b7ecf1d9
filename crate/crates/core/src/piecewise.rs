//! Continuous piecewise-linear functions on the line.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default cap on knots produced when flattening compositions.
pub const KNOT_BUDGET: usize = 100_000;

/// A continuous piecewise-linear function given by knots `(x_k, y_k)` with
/// strictly increasing `x_k`. Outside `[x_0, x_last]` the first and last
/// segments are extended linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
    slopes: Vec<f64>,
}

impl TryFrom<Vec<(f64, f64)>> for PiecewiseLinear {
    type Error = Error;
    fn try_from(knots: Vec<(f64, f64)>) -> Result<Self> {
        PiecewiseLinear::new(knots)
    }
}

impl From<PiecewiseLinear> for Vec<(f64, f64)> {
    fn from(p: PiecewiseLinear) -> Self {
        p.knots
    }
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(domain("a piecewise-linear map needs at least two knots"));
        }
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(domain("knots must be finite"));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(domain("knot abscissae must be strictly increasing"));
        }
        let slopes = knots.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        Ok(PiecewiseLinear { knots, slopes })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Segment `k` covers `[x_k, x_{k+1})`; points left of `x_0` use
    /// segment 0 and points right of the last knot use the last segment.
    pub fn segment(&self, x: f64) -> usize {
        let k = self.knots.partition_point(|(kx, _)| *kx <= x);
        k.saturating_sub(1).min(self.slopes.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.segment(x);
        let (xk, yk) = self.knots[k];
        yk + (x - xk) * self.slopes[k]
    }

    /// Maximum absolute slope and the segment attaining it.
    pub fn lip(&self) -> (f64, usize) {
        self.slopes.iter().enumerate().map(|(k, s)| (s.abs(), k)).fold((0.0, 0), |best, cur| {
            if cur.0 > best.0 {
                cur
            } else {
                best
            }
        })
    }

    /// Range of `x` covered by segment `k`, with the outer segments
    /// extended to the given domain.
    fn segment_range(&self, k: usize, lo: f64, hi: f64) -> (f64, f64) {
        let a = if k == 0 { lo.min(self.knots[0].0) } else { self.knots[k].0 };
        let last = self.slopes.len() - 1;
        let b = if k == last { hi.max(self.knots[k + 1].0) } else { self.knots[k + 1].0 };
        (a, b)
    }

    /// All `x` in `[lo, hi]` on non-flat pieces where the function takes
    /// the value `y`, plus left ends of flat pieces at height `y`.
    fn level_set(&self, y: f64, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for k in 0..self.slopes.len() {
            let (a, b) = self.segment_range(k, lo, hi);
            let (a, b) = (a.max(lo), b.min(hi));
            if a > b {
                continue;
            }
            let s = self.slopes[k];
            let (xk, yk) = self.knots[k];
            if s == 0.0 {
                if yk == y {
                    out.push(a);
                }
                continue;
            }
            let x = xk + (y - yk) / s;
            if x >= a && x <= b {
                out.push(x);
            }
        }
        out
    }

    /// Smallest `x` in the open interval `(lo, hi)` with `f(x) = y`.
    pub fn smallest_preimage(&self, y: f64, lo: f64, hi: f64) -> Option<f64> {
        self.level_set(y, lo, hi).into_iter().filter(|x| *x > lo && *x < hi).reduce(f64::min)
    }

    /// `outer o inner` on the domain `[lo, hi]` (endpoints may be infinite),
    /// failing if more than `budget` knots would be needed.
    pub fn compose(outer: &Self, inner: &Self, lo: f64, hi: f64, budget: usize) -> Result<Self> {
        let mut xs: Vec<f64> = inner.knots.iter().map(|(x, _)| *x).filter(|x| *x >= lo && *x <= hi).collect();
        for (gx, _) in &outer.knots {
            xs.extend(inner.level_set(*gx, lo, hi));
            if xs.len() > budget {
                return Err(Error::InvalidMap(format!("composition exceeds the knot budget of {budget}")));
            }
        }
        if lo.is_finite() {
            xs.push(lo);
        }
        if hi.is_finite() {
            xs.push(hi);
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        // one extra knot past each unbounded end pins the tail slope
        if hi == f64::INFINITY {
            let last = *xs.last().expect("inner has knots");
            xs.push(last + 1.0);
        }
        if lo == f64::NEG_INFINITY {
            let first = xs[0];
            xs.insert(0, first - 1.0);
        }
        if xs.len() > budget {
            return Err(Error::InvalidMap(format!("composition exceeds the knot budget of {budget}")));
        }
        let knots = xs.into_iter().map(|x| (x, outer.eval(inner.eval(x)))).collect();
        let mut out = PiecewiseLinear::new(knots)?;
        out.simplify();
        Ok(out)
    }

    /// Drops interior knots where the slope does not change.
    fn simplify(&mut self) {
        if self.knots.len() <= 2 {
            return;
        }
        let mut keep = vec![self.knots[0]];
        for k in 1..self.knots.len() - 1 {
            if self.slopes[k - 1] != self.slopes[k] {
                keep.push(self.knots[k]);
            }
        }
        keep.push(*self.knots.last().unwrap());
        *self = PiecewiseLinear::new(keep).expect("subset of valid knots");
    }
}
