//! Finite-horizon orbit diagnostics.
//!
//! Verdicts are evidence gathered over a fixed horizon, not proofs: the
//! limit notions they approximate are not decidable in finite time.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free::{push_forward, FreeVector, Functional};
use crate::maps::{lip_constant, LipMap};
use crate::metric::{MetricSpace, Point};
use crate::norm::Backend;
use crate::piecewise::PiecewiseLinear;

/// Recurrence tolerance for presentations with exact coordinates.
pub const EXACT_RECURRENCE_TOL: f64 = 1e-9;
/// Recurrence tolerance for floating interval orbits.
pub const INTERVAL_RECURRENCE_TOL: f64 = 1e-6;
pub const DEFAULT_HORIZON: u64 = 10_000;
pub const MAX_LADDER_STEPS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ladder {
    /// `R_j = 2^j * base` for `j = 1..=steps`, where `base = d(0, x)` (or 1
    /// when `x` is the basepoint). Without `steps` the count is
    /// `min(20, floor(log2 N))`.
    Geometric {
        steps: Option<usize>,
    },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassificationParams {
    pub horizon: u64,
    /// Defaults by presentation when absent.
    pub recurrence_tol: Option<f64>,
    pub ladder: Ladder,
}

impl Default for ClassificationParams {
    fn default() -> Self {
        ClassificationParams {
            horizon: DEFAULT_HORIZON,
            recurrence_tol: None,
            ladder: Ladder::Geometric { steps: None },
        }
    }
}

impl ClassificationParams {
    pub fn with_horizon(horizon: u64) -> Self {
        ClassificationParams { horizon, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParams("horizon must be at least 1".into()));
        }
        if let Some(eps) = self.recurrence_tol {
            if !(eps > 0.0) {
                return Err(Error::InvalidParams("recurrence tolerance must be positive".into()));
            }
        }
        match &self.ladder {
            Ladder::Geometric { steps: Some(0) } => {
                Err(Error::InvalidParams("ladder needs at least one radius".into()))
            }
            Ladder::Explicit(r) if r.is_empty() => Err(Error::InvalidParams("ladder needs at least one radius".into())),
            Ladder::Explicit(r) if r.windows(2).any(|w| w[0] >= w[1]) || !(r[0] > 0.0) => {
                Err(Error::InvalidParams("ladder radii must be positive and strictly increasing".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn recurrence_tol_for(&self, space: &MetricSpace) -> f64 {
        self.recurrence_tol.unwrap_or(match space {
            MetricSpace::Interval(_) => INTERVAL_RECURRENCE_TOL,
            _ => EXACT_RECURRENCE_TOL,
        })
    }

    /// Concrete radii for an orbit starting at distance `r0` from the basepoint.
    pub fn radii(&self, r0: f64) -> Vec<f64> {
        match &self.ladder {
            Ladder::Explicit(r) => r.clone(),
            Ladder::Geometric { steps } => {
                let steps = steps.unwrap_or_else(|| default_ladder_steps(self.horizon));
                let base = if r0 > 0.0 { r0 } else { 1.0 };
                (1..=steps).map(|j| base * 2f64.powi(j as i32)).collect()
            }
        }
    }
}

pub fn default_ladder_steps(horizon: u64) -> usize {
    (horizon.max(2).ilog2() as usize).min(MAX_LADDER_STEPS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Bounded,
    RecurrentEvidence,
    EscapingEvidence,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecurrenceGap {
    pub gap: f64,
    pub time: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub point: Point,
    pub verdict: Verdict,
    pub best_gap: RecurrenceGap,
    pub radii: Vec<f64>,
    /// First time `d(0, f^n(x))` reaches each radius.
    pub crossing_times: Vec<Option<u64>>,
    /// Smallest distance to the basepoint after the last crossing.
    pub min_norm_after_crossing: Option<f64>,
    pub max_norm: f64,
    /// `sup d(0, .)` over the space when the space is genuinely bounded.
    pub space_bound: Option<f64>,
    /// Distances to the basepoint over the last steps of the horizon.
    pub final_norms: Vec<f64>,
    pub recurrence_tol: f64,
    pub horizon: u64,
    pub params: ClassificationParams,
}

/// `min_{1 <= n <= N} d(x, f^n(x))` and the first time attaining it.
pub fn recurrence_gap(f: &LipMap, x: &Point, horizon: u64) -> Result<RecurrenceGap> {
    if horizon == 0 {
        return Err(Error::InvalidParams("horizon must be at least 1".into()));
    }
    let space = f.space();
    let mut q = x.clone();
    let mut best = RecurrenceGap { gap: f64::INFINITY, time: 0 };
    for n in 1..=horizon {
        q = f.apply(&q)?;
        let g = space.distance(x, &q)?;
        if g < best.gap {
            best = RecurrenceGap { gap: g, time: n };
            if g == 0.0 {
                break;
            }
        }
    }
    Ok(best)
}

/// Bound on orbits that holds for the whole space, when there is one. Alpha
/// prefixes are truncations of unbounded sequences and do not count.
fn space_bound(space: &MetricSpace) -> Option<f64> {
    match space {
        MetricSpace::Alpha(_) => None,
        s => Some(s.radius()).filter(|r| r.is_finite()),
    }
}

/// Decision rule:
/// - escaping: every radius of the ladder is reached and after the last
///   crossing the orbit never drops below the first radius;
/// - recurrent: the recurrence gap is at most the tolerance;
/// - bounded: the space is bounded, or the running maximum does not grow
///   over the second half of the horizon;
///
/// and conflicting signals (escaping and recurrent together) are Undecided.
pub fn classify_orbit(f: &LipMap, x: &Point, params: &ClassificationParams) -> Result<ClassificationReport> {
    params.validate()?;
    let space = f.space().clone();
    let base = space.basepoint();
    let n = params.horizon;
    let eps = params.recurrence_tol_for(&space);
    let r0 = space.distance(&base, x)?;
    let radii = params.radii(r0);

    let mut norms = Vec::with_capacity(n as usize + 1);
    norms.push(r0);
    let mut best = RecurrenceGap { gap: f64::INFINITY, time: 0 };
    let mut q = x.clone();
    for t in 1..=n {
        q = f.apply(&q)?;
        norms.push(space.distance_unchecked(&base, &q));
        let g = space.distance_unchecked(x, &q);
        if g < best.gap {
            best = RecurrenceGap { gap: g, time: t };
        }
    }

    let crossing_times: Vec<Option<u64>> =
        radii.iter().map(|r| norms.iter().position(|v| v >= r).map(|t| t as u64)).collect();
    let last_crossing = crossing_times.iter().try_fold(0u64, |acc, t| t.map(|t| acc.max(t)));
    let min_after = last_crossing.map(|t| norms[t as usize..].iter().copied().fold(f64::INFINITY, f64::min));
    let bound = space_bound(&space);
    let escaping = bound.is_none() && min_after.is_some_and(|m| m >= radii[0]);
    let recurrent = best.gap <= eps;
    let half = norms.len() / 2;
    let max_first = norms[..=half].iter().copied().fold(0.0, f64::max);
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let bounded = bound.is_some() || max_norm <= max_first;

    let verdict = match (escaping, recurrent) {
        (true, true) => Verdict::Undecided,
        (true, false) => Verdict::EscapingEvidence,
        (false, true) => Verdict::RecurrentEvidence,
        (false, false) if bounded => Verdict::Bounded,
        _ => Verdict::Undecided,
    };
    let tail = norms.len().saturating_sub(8);
    Ok(ClassificationReport {
        point: x.clone(),
        verdict,
        best_gap: best,
        radii,
        crossing_times,
        min_norm_after_crossing: min_after,
        max_norm,
        space_bound: bound,
        final_norms: norms[tail..].to_vec(),
        recurrence_tol: eps,
        horizon: n,
        params: params.clone(),
    })
}

/// `(||f_hat^n(mu)||)_{n=0..=N}`.
pub fn orbit_norm_profile(f: &LipMap, mu: &FreeVector, horizon: u64, backend: Backend) -> Result<Vec<f64>> {
    backend.check(f.space())?;
    let mut out = Vec::with_capacity(horizon as usize + 1);
    let mut v = mu.clone();
    out.push(backend.norm(&v)?);
    for _ in 0..horizon {
        if v.is_empty() {
            out.push(0.0);
            continue;
        }
        v = push_forward(f, &v)?;
        out.push(backend.norm(&v)?);
    }
    Ok(out)
}

/// `sum |lambda_n| alpha_{k+n} / alpha_n`, the norm of `f_hat^k(mu)` for the
/// forward shift and `mu = sum lambda_n delta(n) / alpha_n`.
pub fn shift_profile_closed_form(lambda: &[(usize, f64)], space: &MetricSpace, k: usize) -> Result<f64> {
    let MetricSpace::Alpha(a) = space else {
        return Err(crate::error::domain("the shift closed form needs an alpha space"));
    };
    let mut total = 0.0;
    for &(n, l) in lambda {
        if l != 0.0 {
            total += l.abs() * a.alpha(k + n)? / a.alpha(n)?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum RigidityFailure {
    InvalidTimes,
    LipschitzBlowup {
        time: u64,
        lip: f64,
        bound: f64,
    },
    /// Return errors grew between consecutive times, or the last one is
    /// above the tolerance.
    ReturnNotConverging {
        time: u64,
        error: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityCertificate {
    pub times: Vec<u64>,
    pub bound: f64,
    pub lip_constants: Vec<f64>,
    pub lip_exact: Vec<bool>,
    /// `max_{x in D} d(f^{n(k)}(x), x)` for each time.
    pub return_errors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    pub passed: bool,
    pub failure: Option<RigidityFailure>,
    pub certificate: RigidityCertificate,
}

/// Relative slack when comparing computed Lipschitz constants with `C`.
const LIP_BOUND_SLACK: f64 = 1e-12;

/// Checks `Lip(f^{n(k)}) <= C` at every time, then that the return errors
/// on the sample are non-increasing and end at most `tol`.
pub fn rigidity_check(f: &LipMap, sample: &[Point], times: &[u64], bound: f64, tol: f64) -> Result<RigidityReport> {
    let mut cert = RigidityCertificate {
        times: times.to_vec(),
        bound,
        lip_constants: Vec::new(),
        lip_exact: Vec::new(),
        return_errors: Vec::new(),
    };
    if times.is_empty() || times[0] == 0 || times.windows(2).any(|w| w[0] >= w[1]) {
        return Ok(RigidityReport { passed: false, failure: Some(RigidityFailure::InvalidTimes), certificate: cert });
    }
    for &t in times {
        let l = lip_constant(&f.power(t))?;
        cert.lip_constants.push(l.value);
        cert.lip_exact.push(l.exact);
        if l.value > bound * (1.0 + LIP_BOUND_SLACK) {
            let failure = RigidityFailure::LipschitzBlowup { time: t, lip: l.value, bound };
            return Ok(RigidityReport { passed: false, failure: Some(failure), certificate: cert });
        }
    }
    let space = f.space();
    for &t in times {
        let p = f.power(t);
        let mut err: f64 = 0.0;
        for x in sample {
            err = err.max(space.distance(&p.apply(x)?, x)?);
        }
        cert.return_errors.push(err);
    }
    let errs = &cert.return_errors;
    let failure = errs
        .windows(2)
        .position(|w| w[1] > w[0])
        .map(|k| k + 1)
        .or_else(|| (errs[errs.len() - 1] > tol).then_some(errs.len() - 1))
        .map(|k| RigidityFailure::ReturnNotConverging { time: times[k], error: errs[k] });
    Ok(RigidityReport { passed: failure.is_none(), failure, certificate: cert })
}

/// `phi(x) = min(max(d(x, 0) - mR, 0), R)`: 1-Lipschitz, valued in
/// `[0, R]`, zero on the ball of radius `mR`.
pub fn escape_test_functional(space: Arc<MetricSpace>, m: u32, r: f64) -> Result<Functional> {
    if m == 0 || !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParams("escape functional needs m >= 1 and finite R > 0".into()));
    }
    let s = space.clone();
    let base = s.basepoint();
    let dead = m as f64 * r;
    Ok(Functional::new(space, 1.0, move |x| (s.distance_unchecked(x, &base) - dead).clamp(0.0, r)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntervalCase {
    #[serde(rename = "1")]
    NoExpansion,
    #[serde(rename = "2")]
    UnboundedComponent,
    #[serde(rename = "3.1")]
    InvariantComponent,
    #[serde(rename = "3.2")]
    Overshoot,
}

/// A connected component of `U = {x > 0 : f(x) > x} u {x < 0 : f(x) < x}`,
/// as the open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Component {
    pub lo: f64,
    pub hi: f64,
}

impl Component {
    pub fn bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalAnalysis {
    pub case: IntervalCase,
    pub components: Vec<Component>,
    pub chosen: Option<Component>,
    /// Case 2: a point whose orbit increases without bound.
    pub certificate: Option<f64>,
    /// Case 3: the points `x_n` of the escaping vector.
    pub sequence: Vec<f64>,
    /// Case 3: `sum (delta(x_n) - delta(b))`, truncated.
    pub vector: Option<FreeVector>,
    /// Bound on `sum_{n > N} |x_n - b|`, the norm of the dropped tail.
    pub tail_bound: Option<f64>,
    /// Case 3.2: `max f` over the component, exceeding or touching its right end.
    pub overshoot: Option<f64>,
}

/// Components of `{x > 0 : f(x) > x}` within `(0, hi)`.
fn positive_components(f: &PiecewiseLinear, hi: f64) -> Vec<Component> {
    let g = |x: f64| f.eval(x) - x;
    let mut cuts: Vec<f64> = vec![0.0];
    for (k, &(xk, yk)) in f.knots().iter().enumerate() {
        if xk > 0.0 && xk < hi {
            cuts.push(xk);
        }
        if k < f.slopes().len() {
            let s = f.slopes()[k];
            if s != 1.0 {
                let z = (yk - s * xk) / (1.0 - s);
                if z > 0.0 && z < hi {
                    cuts.push(z);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(hi);
    let mut out: Vec<Component> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let probe = if b.is_finite() { 0.5 * (a + b) } else { a + 1.0 };
        if g(probe) > 0.0 {
            match out.last_mut() {
                Some(c) if c.hi == a => c.hi = b,
                _ => out.push(Component { lo: a, hi: b }),
            }
        }
    }
    out
}

/// `x -> -f(-x)`, which turns the negative half into the positive one.
fn mirror(f: &PiecewiseLinear) -> PiecewiseLinear {
    let knots = f.knots().iter().rev().map(|&(x, y)| (-x, -y)).collect();
    PiecewiseLinear::new(knots).expect("mirror of valid knots")
}

/// Case analysis of a piecewise-linear interval map by the sign of
/// `f(x) - x`, with `terms` points in the truncated escaping vector.
pub fn interval_analyze(f: &LipMap, terms: usize) -> Result<IntervalAnalysis> {
    let MetricSpace::Interval(iv) = &**f.space() else {
        return Err(crate::error::domain("interval analysis needs an interval space"));
    };
    let pl =
        f.as_piecewise_linear().ok_or_else(|| Error::InvalidMap("expected a plain piecewise-linear map".into()))?;
    if pl.eval(0.0) != 0.0 {
        return Err(crate::error::domain("the map does not fix the basepoint"));
    }
    let mirrored = mirror(pl);
    let pos = positive_components(pl, iv.hi());
    let neg: Vec<Component> = positive_components(&mirrored, -iv.lo())
        .into_iter()
        .rev()
        .map(|c| Component { lo: -c.hi, hi: -c.lo })
        .collect();
    let mut components = neg.clone();
    components.extend(pos.iter().copied());

    let mut out = IntervalAnalysis {
        case: IntervalCase::NoExpansion,
        components,
        chosen: None,
        certificate: None,
        sequence: Vec::new(),
        vector: None,
        tail_bound: None,
        overshoot: None,
    };
    if out.components.is_empty() {
        return Ok(out);
    }

    // Work on the positive side, mirroring negative components.
    let unbounded_pos = pos.iter().find(|c| !c.bounded());
    let unbounded_neg = neg.iter().find(|c| !c.bounded());
    if unbounded_pos.is_some() || unbounded_neg.is_some() {
        let (g, c, sign) = match unbounded_pos {
            Some(c) => (pl, *c, 1.0),
            None => {
                let c = unbounded_neg.unwrap();
                (&mirrored, Component { lo: -c.hi, hi: -c.lo }, -1.0)
            }
        };
        let x = g.knots().iter().map(|k| k.0).find(|&x| x > c.lo).unwrap_or(c.lo + 1.0);
        out.case = IntervalCase::UnboundedComponent;
        out.chosen = Some(if sign > 0.0 { c } else { Component { lo: -c.hi, hi: -c.lo } });
        out.certificate = Some(sign * x);
        return Ok(out);
    }

    let (g, c, sign) = match pos.first() {
        Some(c) => (pl, *c, 1.0),
        None => {
            let c = neg.last().unwrap();
            (&mirrored, Component { lo: -c.hi, hi: -c.lo }, -1.0)
        }
    };
    let (b, cc) = (c.lo, c.hi);
    let peak = g.knots().iter().filter(|k| k.0 > b && k.0 < cc).map(|k| k.1).fold(f64::NEG_INFINITY, f64::max);
    let mut xs = Vec::with_capacity(terms);
    let tail;
    if peak >= cc {
        out.case = IntervalCase::Overshoot;
        out.overshoot = Some(sign * peak);
        let mut target = cc;
        for _ in 0..terms {
            let Some(x) = g.smallest_preimage(target, b, target.min(cc)) else { break };
            if x <= b || x >= target {
                break;
            }
            xs.push(x);
            target = x;
        }
        // near b the map is linear with slope s > 1, so the tail is geometric
        let s = g.slopes()[g.segment(b)];
        tail = xs.last().and_then(|&xn| {
            let first_piece_end = g.knots().iter().map(|k| k.0).find(|&x| x > b).unwrap_or(f64::INFINITY);
            (s > 1.0 && xn <= first_piece_end).then(|| (xn - b) / (s - 1.0))
        });
    } else {
        out.case = IntervalCase::InvariantComponent;
        let mut step = cc - b;
        for _ in 0..terms {
            step *= 0.5;
            let x = b + step;
            if x <= b {
                break;
            }
            xs.push(x);
        }
        tail = Some(step);
    }
    let space = f.space().clone();
    let bpt = Point::real(sign * b);
    let mut pairs = Vec::with_capacity(2 * xs.len());
    for &x in &xs {
        pairs.push((Point::real(sign * x), 1.0));
        pairs.push((bpt.clone(), -1.0));
    }
    out.vector = Some(FreeVector::new(space, pairs)?);
    out.chosen = Some(if sign > 0.0 { c } else { Component { lo: -cc, hi: -b } });
    out.sequence = xs.into_iter().map(|x| sign * x).collect();
    out.tail_bound = tail;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerRow {
    pub point: Point,
    pub verdict_f: Verdict,
    pub verdict_power: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerEquivalenceReport {
    pub k: u64,
    /// Applications of `f` spent on each orbit, under both maps.
    pub applications: u64,
    pub rows: Vec<PowerRow>,
    /// Points where exactly one of the two runs reports escape.
    pub disagreements: Vec<Point>,
}

/// Classifies each sample point under `f` and `f^k` with the same budget of
/// `k * floor(N / k)` applications of `f` and the same radius ladder.
pub fn power_equivalence_check(
    f: &LipMap,
    k: u64,
    sample: &[Point],
    params: &ClassificationParams,
) -> Result<PowerEquivalenceReport> {
    if k == 0 {
        return Err(Error::InvalidParams("power must be at least 1".into()));
    }
    params.validate()?;
    let steps = params.horizon / k;
    if steps == 0 {
        return Err(Error::InvalidParams("horizon shorter than the power".into()));
    }
    let applications = steps * k;
    let fk = f.power(k);
    let space = f.space().clone();
    let rows = sample
        .par_iter()
        .map(|x| -> Result<PowerRow> {
            let r0 = space.distance(&space.basepoint(), x)?;
            let ladder = Ladder::Explicit(params.radii(r0));
            let pf = ClassificationParams { horizon: applications, ladder: ladder.clone(), ..params.clone() };
            let pk = ClassificationParams { horizon: steps, ladder, ..params.clone() };
            Ok(PowerRow {
                point: x.clone(),
                verdict_f: classify_orbit(f, x, &pf)?.verdict,
                verdict_power: classify_orbit(&fk, x, &pk)?.verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let disagreements = rows
        .iter()
        .filter(|r| (r.verdict_f == Verdict::EscapingEvidence) != (r.verdict_power == Verdict::EscapingEvidence))
        .map(|r| r.point.clone())
        .collect();
    Ok(PowerEquivalenceReport { k, applications, rows, disagreements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::pair;
    use crate::metric::{AlphaSpace, FiniteSpace, IntervalSpace};

    fn pl_map(space: IntervalSpace, knots: Vec<(f64, f64)>) -> LipMap {
        LipMap::piecewise_linear(Arc::new(space.into()), PiecewiseLinear::new(knots).unwrap()).unwrap()
    }

    fn doubling() -> LipMap {
        pl_map(IntervalSpace::unit(), vec![(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)])
    }

    fn translate() -> LipMap {
        pl_map(IntervalSpace::half_line(), vec![(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)])
    }

    fn rotation(q: usize) -> LipMap {
        // q-cycle on a discrete space, basepoint fixed
        let n = q + 1;
        let m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        let table: Vec<usize> = (0..n).map(|i| if i == 0 { 0 } else { i % q + 1 }).collect();
        LipMap::finite_table(Arc::new(FiniteSpace::new(m, 0).unwrap().into()), table).unwrap()
    }

    #[test]
    fn gaps() {
        let id = LipMap::identity(Arc::new(IntervalSpace::unit().into()));
        assert_eq!(recurrence_gap(&id, &Point::real(0.3), 1).unwrap(), RecurrenceGap { gap: 0.0, time: 1 });
        let r = rotation(5);
        assert_eq!(recurrence_gap(&r, &Point::Index(2), 20).unwrap(), RecurrenceGap { gap: 0.0, time: 5 });
        let a = Arc::new(AlphaSpace::from_fn(30, |n| 1.0 + 1.0 / n as f64).unwrap().into());
        let shift = LipMap::alpha(a, AlphaRule::Shift).unwrap();
        let g = recurrence_gap(&shift, &Point::Index(1), 10).unwrap();
        // alpha decreasing, so the last step is the closest
        assert_eq!(g.time, 10);
        assert!((g.gap - (2.0 + 1.0 + 1.0 / 11.0)).abs() < 1e-15);
    }

    use crate::maps::AlphaRule;

    #[test]
    fn classification_examples() {
        let p = ClassificationParams::with_horizon(1000);
        assert_eq!(classify_orbit(&translate(), &Point::real(1.0), &p).unwrap().verdict, Verdict::EscapingEvidence);
        let d = classify_orbit(&doubling(), &Point::real(0.25), &ClassificationParams::default()).unwrap();
        assert_eq!(d.verdict, Verdict::Bounded);
        assert_eq!(d.best_gap.gap, 0.25);
        assert_eq!(classify_orbit(&rotation(7), &Point::Index(3), &p).unwrap().verdict, Verdict::RecurrentEvidence);
    }

    #[test]
    fn ladder_defaults() {
        let p = ClassificationParams::with_horizon(1000);
        assert_eq!(p.radii(1.0).len(), 9);
        assert_eq!(p.radii(0.0)[0], 2.0);
        assert_eq!(ClassificationParams::default().radii(1.0).len(), 13);
        let bad = ClassificationParams { ladder: Ladder::Explicit(vec![2.0, 1.0]), ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn escape_functional_values() {
        let space: Arc<MetricSpace> = Arc::new(IntervalSpace::half_line().into());
        let phi = escape_test_functional(space.clone(), 2, 1.5).unwrap();
        assert_eq!(phi.eval(&Point::real(3.0)).unwrap(), 0.0);
        assert_eq!(phi.eval(&Point::real(4.5)).unwrap(), 1.5);
        assert_eq!(phi.eval(&Point::real(3.75)).unwrap(), 0.75);
        let phi = escape_test_functional(space.clone(), 1, 1.0).unwrap();
        let mu = FreeVector::delta(space.clone(), Point::real(3.0)).unwrap();
        assert_eq!(pair(&phi, &mu).unwrap(), 1.0);
        assert!(escape_test_functional(space, 0, 1.0).is_err());
    }

    #[test]
    fn interval_cases() {
        let id = pl_map(IntervalSpace::half_line(), vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(interval_analyze(&id, 10).unwrap().case, IntervalCase::NoExpansion);

        let t = interval_analyze(&translate(), 10).unwrap();
        assert_eq!(t.case, IntervalCase::UnboundedComponent);
        assert_eq!(t.certificate, Some(1.0));

        let d = interval_analyze(&doubling(), 40).unwrap();
        assert_eq!(d.case, IntervalCase::Overshoot);
        assert_eq!(d.chosen, Some(Component { lo: 0.0, hi: 1.0 }));
        let expect: Vec<f64> = (1..=40).map(|n| 0.5f64.powi(n)).collect();
        assert_eq!(d.sequence, expect);
        assert_eq!(d.tail_bound, Some(0.5f64.powi(40)));
    }

    #[test]
    fn invariant_component() {
        // f(x) = x + x/2 on [0, 1/2], then back down to the fixed point 1
        let f = pl_map(IntervalSpace::new(0.0, 2.0).unwrap(), vec![(0.0, 0.0), (0.5, 0.75), (1.0, 1.0), (2.0, 1.5)]);
        let a = interval_analyze(&f, 5).unwrap();
        assert_eq!(a.case, IntervalCase::InvariantComponent);
        assert_eq!(a.chosen, Some(Component { lo: 0.0, hi: 1.0 }));
        assert_eq!(a.sequence, vec![0.5, 0.25, 0.125, 0.0625, 0.03125]);
        assert_eq!(a.tail_bound, Some(0.03125));
    }

    #[test]
    fn negative_side_components() {
        // f(x) = 2x on [-1, 0], fixed point -1 on the boundary
        let f = pl_map(IntervalSpace::new(-1.0, 0.0).unwrap(), vec![(-1.0, -1.0), (-0.5, -1.0), (0.0, 0.0)]);
        let a = interval_analyze(&f, 3).unwrap();
        assert_eq!(a.case, IntervalCase::Overshoot);
        assert_eq!(a.chosen, Some(Component { lo: -1.0, hi: 0.0 }));
        assert_eq!(a.sequence, vec![-0.5, -0.25, -0.125]);
    }

    #[test]
    fn rigidity() {
        let r = rotation(4);
        let sample: Vec<Point> = (0..5).map(Point::Index).collect();
        let rep = rigidity_check(&r, &sample, &[4, 8, 12], 1.0, 0.0).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.certificate.return_errors, vec![0.0, 0.0, 0.0]);
        let rep = rigidity_check(&r, &sample, &[4, 7], 1.0, 0.0).unwrap();
        assert!(matches!(rep.failure, Some(RigidityFailure::ReturnNotConverging { time: 7, .. })));
        let rep = rigidity_check(&r, &sample, &[3, 5], 1.0, 0.0).unwrap();
        assert!(matches!(rep.failure, Some(RigidityFailure::ReturnNotConverging { time: 5, .. })));
        let rep = rigidity_check(&r, &sample, &[2, 2], 1.0, 0.0).unwrap();
        assert_eq!(rep.failure, Some(RigidityFailure::InvalidTimes));
        let rep = rigidity_check(&doubling(), &[Point::real(0.25)], &[1, 2], 1.0, 0.0).unwrap();
        assert_eq!(rep.failure, Some(RigidityFailure::LipschitzBlowup { time: 1, lip: 2.0, bound: 1.0 }));
    }

    #[test]
    fn profiles() {
        let f = doubling();
        let mu = FreeVector::new(f.space().clone(), (1..=4).map(|n| (Point::real(0.5f64.powi(n)), 1.0))).unwrap();
        let prof = orbit_norm_profile(&f, &mu, 6, Backend::Line).unwrap();
        let expect: Vec<f64> = (0..=6).map(|k| if k <= 4 { k as f64 + 1.0 - 2f64.powi(k - 4) } else { 4.0 }).collect();
        assert_eq!(prof, expect);
        assert!(orbit_norm_profile(&f, &mu, 1, Backend::Alpha).is_err());
        let empty = FreeVector::zero(f.space().clone());
        assert_eq!(orbit_norm_profile(&f, &empty, 3, Backend::Flow).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn shift_closed_form() {
        let a: Arc<MetricSpace> = Arc::new(AlphaSpace::from_fn(40, |n| n as f64).unwrap().into());
        assert_eq!(shift_profile_closed_form(&[(1, 1.0)], &a, 5).unwrap(), 6.0);
        assert_eq!(shift_profile_closed_form(&[], &a, 5).unwrap(), 0.0);
        assert!(shift_profile_closed_form(&[(1, 1.0)], &a, 40).is_err());
        let f = LipMap::alpha(a.clone(), AlphaRule::Shift).unwrap();
        let mu = FreeVector::new(a.clone(), [(Point::Index(2), 0.5), (Point::Index(3), -1.0 / 3.0)]).unwrap();
        let prof = orbit_norm_profile(&f, &mu, 10, Backend::Alpha).unwrap();
        for (k, v) in prof.iter().enumerate() {
            let c = shift_profile_closed_form(&[(2, 1.0), (3, -1.0)], &a, k).unwrap();
            assert!((v - c).abs() < 1e-12);
        }
    }

    #[test]
    fn powers_agree() {
        let p = ClassificationParams::with_horizon(1000);
        let rep = power_equivalence_check(&translate(), 3, &[Point::real(1.0)], &p).unwrap();
        assert_eq!(rep.rows[0].verdict_f, Verdict::EscapingEvidence);
        assert_eq!(rep.rows[0].verdict_power, Verdict::EscapingEvidence);
        assert!(rep.disagreements.is_empty());
        assert_eq!(rep.applications, 999);
        let sample: Vec<Point> = [0.25, 0.5, 1.0].into_iter().map(Point::real).collect();
        let rep = power_equivalence_check(&doubling(), 2, &sample, &p).unwrap();
        let verdicts: Vec<(Verdict, Verdict)> = rep.rows.iter().map(|r| (r.verdict_f, r.verdict_power)).collect();
        // 1 is a fixed point, so its gap is zero
        assert_eq!(
            verdicts,
            vec![
                (Verdict::Bounded, Verdict::Bounded),
                (Verdict::Bounded, Verdict::Bounded),
                (Verdict::RecurrentEvidence, Verdict::RecurrentEvidence)
            ]
        );
        assert!(rep.disagreements.is_empty());
    }
}
