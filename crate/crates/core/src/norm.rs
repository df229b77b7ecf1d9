//! The Lipschitz-free (Kantorovich-Rubinstein) norm of finitely supported
//! vectors.
//!
//! Three backends are provided and cross-check each other:
//!
//! * [`norm_flow`] works on any space. It restricts to the support plus
//!   the basepoint, lets the basepoint absorb the imbalance `-sum lambda_i`,
//!   and solves the balanced transport problem with ground cost `d`. The
//!   result carries a transport plan and a 1-Lipschitz dual witness, so the
//!   value is certified by a duality gap.
//! * [`norm_alpha`] is the l1 identification on `(N, d_alpha)`.
//! * [`norm_line`] is the cumulative-mass formula on subsets of the line.

use std::fmt;
use std::str::FromStr;

use num::BigRational;
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::flow::{rational, solve_transport, FlowScalar, Transport, TransportPlan};
use crate::free::FreeVector;
use crate::metric::{MetricSpace, Point, Restriction};

/// Absolute mass tolerance per unit of total mass.
pub const MASS_TOL: f64 = 1e-12;

/// Largest support (basepoint included) accepted by [`norm_flow_exact`].
pub const EXACT_MAX_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanEntry {
    pub source: Point,
    pub sink: Point,
    pub mass: f64,
    pub cost: f64,
}

/// A norm value with its certificates.
#[derive(Debug, Clone)]
pub struct NormResult {
    pub value: f64,
    /// Values of a 1-Lipschitz `phi` with `phi(0) = 0` on the support and
    /// the basepoint, sorted by point.
    pub witness: Vec<(Point, f64)>,
    pub plan: Vec<PlanEntry>,
    pub gap: f64,
    /// Balanced node masses: the terms of `mu` plus the basepoint.
    masses: Vec<(Point, f64)>,
}

impl Serialize for NormResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Plan<'a>(&'a [PlanEntry]);
        impl Serialize for Plan<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for e in self.0 {
                    seq.serialize_element(&(&e.source, &e.sink, e.mass))?;
                }
                seq.end()
            }
        }
        let mut st = s.serialize_struct("NormResult", 4)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("witness", &self.witness)?;
        st.serialize_field("plan", &Plan(&self.plan))?;
        st.serialize_field("gap", &self.gap)?;
        st.end()
    }
}

impl NormResult {
    fn zero(space: &MetricSpace) -> Self {
        NormResult {
            value: 0.0,
            witness: vec![(space.basepoint(), 0.0)],
            plan: Vec::new(),
            gap: 0.0,
            masses: Vec::new(),
        }
    }

    pub fn plan_cost(&self) -> f64 {
        self.plan.iter().map(|e| e.mass * e.cost).sum()
    }

    pub fn witness_pairing(&self) -> f64 {
        self.masses
            .iter()
            .map(|(p, c)| {
                let phi = self.witness.binary_search_by(|(q, _)| q.cmp(p)).map(|k| self.witness[k].1).unwrap_or(0.0);
                c * phi
            })
            .sum()
    }

    /// A copy with every witness value multiplied by `factor`.
    pub fn with_scaled_witness(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for (_, v) in &mut out.witness {
            *v *= factor;
        }
        out
    }

    /// Checks every certificate invariant at absolute tolerance `tol`
    /// (scaled by `1 + value` where it compares magnitudes).
    pub fn verify(&self, space: &MetricSpace, tol: f64) -> std::result::Result<(), String> {
        let scale = 1.0 + self.value;
        let base = space.basepoint();
        match self.witness.iter().find(|(p, _)| *p == base) {
            Some((_, v)) if *v == 0.0 => {}
            _ => return Err("witness does not vanish at the basepoint".into()),
        }
        for (a, (p, u)) in self.witness.iter().enumerate() {
            for (q, v) in &self.witness[a + 1..] {
                let d = space.distance(p, q).map_err(|e| e.to_string())?;
                if (u - v).abs() > d + tol * scale {
                    return Err(format!("witness is not 1-Lipschitz on ({p}, {q})"));
                }
            }
        }
        if (self.plan_cost() - self.value).abs() > tol * scale {
            return Err(format!("plan cost {} differs from value {}", self.plan_cost(), self.value));
        }
        if (self.witness_pairing() - self.value).abs() > tol * scale {
            return Err(format!("witness pairing {} differs from value {}", self.witness_pairing(), self.value));
        }
        for (p, c) in &self.masses {
            let out: f64 = self.plan.iter().filter(|e| e.source == *p).map(|e| e.mass).sum();
            let inn: f64 = self.plan.iter().filter(|e| e.sink == *p).map(|e| e.mass).sum();
            if (out - inn - c).abs() > tol * (1.0 + c.abs()) {
                return Err(format!("mass not conserved at {p}: out {out}, in {inn}, coefficient {c}"));
            }
        }
        Ok(())
    }
}

/// Plan cost minus witness pairing; nonnegative up to rounding, and zero
/// exactly when both certificates are optimal.
pub fn dual_gap(result: &NormResult) -> f64 {
    if result.masses.is_empty() {
        return 0.0;
    }
    result.plan_cost() - result.witness_pairing()
}

struct Balanced {
    restriction: Restriction,
    /// `(restricted index, mass)` with positive masses first in `sources`.
    sources: Vec<(usize, f64)>,
    sinks: Vec<(usize, f64)>,
    masses: Vec<(Point, f64)>,
}

fn balance(mu: &FreeVector) -> Result<Option<Balanced>> {
    if mu.is_empty() {
        return Ok(None);
    }
    let space = mu.space();
    let restriction = space.restrict_to_points(&mu.support())?;
    let base = space.basepoint();
    let mut masses: Vec<(Point, f64)> = mu.terms().to_vec();
    let imbalance = -mu.total_mass();
    if imbalance != 0.0 {
        masses.push((base, imbalance));
    }
    masses.sort_by(|a, b| a.0.cmp(&b.0));
    let mut sources = Vec::new();
    let mut sinks = Vec::new();
    for (p, c) in &masses {
        let k = restriction.index_of(p).expect("support point in restriction");
        if *c > 0.0 {
            sources.push((k, *c));
        } else if *c < 0.0 {
            sinks.push((k, -*c));
        }
    }
    Ok(Some(Balanced { restriction, sources, sinks, masses }))
}

fn transport_problem<T: FlowScalar>(b: &Balanced, conv: impl Fn(f64) -> T) -> Transport<T> {
    let d = &b.restriction.space;
    let mut cost = Vec::with_capacity(b.sources.len() * b.sinks.len());
    for (i, _) in &b.sources {
        for (j, _) in &b.sinks {
            cost.push(conv(d.d(*i, *j)));
        }
    }
    Transport {
        supply: b.sources.iter().map(|(_, c)| conv(*c)).collect(),
        demand: b.sinks.iter().map(|(_, c)| conv(*c)).collect(),
        cost,
    }
}

fn max_augmentations(b: &Balanced) -> usize {
    let v = b.sources.len() + b.sinks.len();
    10 * v * v + 100
}

/// c-transform of the sink duals over every restricted point, shifted so
/// that the basepoint gets zero: `phi(x) = min_j (v_j + d(x, y_j)) - phi(0)`.
fn witness_from_duals<T: FlowScalar>(b: &Balanced, sol: &TransportPlan<T>, conv: impl Fn(f64) -> T) -> Vec<(Point, T)> {
    let d = &b.restriction.space;
    let raw: Vec<T> = (0..d.len())
        .map(|x| {
            let mut best: Option<T> = None;
            for (k, (j, _)) in b.sinks.iter().enumerate() {
                let cand = sol.sink_dual[k].clone() + conv(d.d(x, *j));
                if best.as_ref().is_none_or(|cur| cand < *cur) {
                    best = Some(cand);
                }
            }
            best.expect("nonempty sink set")
        })
        .collect();
    let shift = raw[d.basepoint()].clone();
    b.restriction.points.iter().cloned().zip(raw.into_iter().map(|v| v - shift.clone())).collect()
}

/// Exact norm by min-cost flow on the restriction to `supp(mu) + {0}`.
pub fn norm_flow(mu: &FreeVector) -> Result<NormResult> {
    let Some(b) = balance(mu)? else {
        return Ok(NormResult::zero(mu.space()));
    };
    let problem = transport_problem(&b, |x| x);
    let total: f64 = problem.supply.iter().sum();
    let tol = MASS_TOL * total.max(1.0);
    let sol = solve_transport(&problem, tol, max_augmentations(&b))
        .map_err(|f| Error::FlowNonConvergence { residual: f.residual, iterations: f.iterations })?;
    let witness = witness_from_duals(&b, &sol, |x| x);
    let pts = &b.restriction.points;
    let dist = &b.restriction.space;
    let plan: Vec<PlanEntry> = sol
        .flow
        .iter()
        .map(|(i, j, mass)| {
            let (si, sj) = (b.sources[*i].0, b.sinks[*j].0);
            PlanEntry { source: pts[si].clone(), sink: pts[sj].clone(), mass: *mass, cost: dist.d(si, sj) }
        })
        .collect();
    let mut result = NormResult { value: sol.total_cost, witness, plan, gap: 0.0, masses: b.masses };
    result.gap = dual_gap(&result);
    Ok(result)
}

/// Exact rational certificate for small supports. Inputs are taken as the
/// exact dyadic rationals their `f64` values represent.
#[derive(Debug, Clone)]
pub struct ExactNorm {
    pub value: BigRational,
    pub witness: Vec<(Point, BigRational)>,
    pub plan: Vec<(Point, Point, BigRational)>,
}

impl ExactNorm {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

struct Ratio<'a>(&'a BigRational);

impl Serialize for Ratio<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl Serialize for ExactNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let witness: Vec<(&Point, Ratio)> = self.witness.iter().map(|(p, v)| (p, Ratio(v))).collect();
        let plan: Vec<(&Point, &Point, Ratio)> = self.plan.iter().map(|(a, b, m)| (a, b, Ratio(m))).collect();
        let mut st = s.serialize_struct("ExactNorm", 4)?;
        st.serialize_field("value", &Ratio(&self.value))?;
        st.serialize_field("value_f64", &self.to_f64())?;
        st.serialize_field("witness", &witness)?;
        st.serialize_field("plan", &plan)?;
        st.end()
    }
}

pub fn norm_flow_exact(mu: &FreeVector) -> Result<ExactNorm> {
    let zero = <BigRational as FlowScalar>::zero();
    let Some(b) = balance(mu)? else {
        return Ok(ExactNorm { value: zero.clone(), witness: vec![(mu.space().basepoint(), zero)], plan: vec![] });
    };
    if b.restriction.points.len() > EXACT_MAX_POINTS {
        return Err(domain(format!(
            "exact mode handles at most {EXACT_MAX_POINTS} points, got {}",
            b.restriction.points.len()
        )));
    }
    // Rebalance in exact arithmetic: the basepoint mass is -sum of the exact coefficients.
    let mut exact = transport_problem(&b, rational);
    let supply: BigRational = mu.terms().iter().filter(|(_, c)| *c > 0.0).map(|(_, c)| rational(*c)).sum();
    let demand: BigRational = mu.terms().iter().filter(|(_, c)| *c < 0.0).map(|(_, c)| rational(-*c)).sum();
    let base_idx = b.restriction.space.basepoint();
    if let Some(k) = b.sources.iter().position(|(i, _)| *i == base_idx) {
        exact.supply[k] = demand - supply;
    } else if let Some(k) = b.sinks.iter().position(|(j, _)| *j == base_idx) {
        exact.demand[k] = supply - demand;
    }
    let sol = solve_transport(&exact, zero, max_augmentations(&b))
        .map_err(|f| Error::FlowNonConvergence { residual: f.residual, iterations: f.iterations })?;
    let witness = witness_from_duals(&b, &sol, rational);
    let pts = &b.restriction.points;
    let plan =
        sol.flow.into_iter().map(|(i, j, m)| (pts[b.sources[i].0].clone(), pts[b.sinks[j].0].clone(), m)).collect();
    Ok(ExactNorm { value: sol.total_cost, witness, plan })
}

/// `sum |c_n| alpha_n` for `mu = sum c_n delta(n)` over `(N, d_alpha)`.
pub fn norm_alpha(mu: &FreeVector) -> Result<f64> {
    let MetricSpace::Alpha(s) = &**mu.space() else {
        return Err(Error::Backend { backend: "alpha", space: mu.space().kind_name() });
    };
    mu.terms().iter().map(|(p, c)| Ok(c.abs() * s.alpha(p.as_index().expect("alpha point"))?)).sum()
}

/// Cumulative-mass formula on an interval: on each side of `0`, the gap
/// between consecutive support points contributes its length times the
/// absolute coefficient mass lying beyond it.
pub fn norm_line(mu: &FreeVector) -> Result<f64> {
    if !matches!(&**mu.space(), MetricSpace::Interval(_)) {
        return Err(Error::Backend { backend: "line", space: mu.space().kind_name() });
    }
    let mut right: Vec<(f64, f64)> = Vec::new();
    let mut left: Vec<(f64, f64)> = Vec::new();
    for (p, c) in mu.terms() {
        let x = p.as_real().expect("interval point");
        if x > 0.0 {
            right.push((x, *c));
        } else {
            left.push((-x, *c));
        }
    }
    // support is sorted ascending, so the left side arrives farthest-first
    left.reverse();
    Ok(side_norm(&right) + side_norm(&left))
}

/// `points` sorted by increasing distance from the basepoint.
fn side_norm(points: &[(f64, f64)]) -> f64 {
    let mut beyond: f64 = points.iter().map(|(_, c)| c).sum();
    let mut prev = 0.0;
    let mut total = 0.0;
    for (x, c) in points {
        total += beyond.abs() * (x - prev);
        beyond -= c;
        prev = *x;
    }
    total
}

/// Norm backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Flow,
    Alpha,
    Line,
}

impl Backend {
    /// The closed form for the space when one exists, else flow.
    pub fn preferred(space: &MetricSpace) -> Backend {
        match space {
            MetricSpace::Alpha(_) => Backend::Alpha,
            MetricSpace::Interval(_) => Backend::Line,
            _ => Backend::Flow,
        }
    }

    pub fn check(self, space: &MetricSpace) -> Result<()> {
        match (self, space) {
            (Backend::Flow, _)
            | (Backend::Alpha, MetricSpace::Alpha(_))
            | (Backend::Line, MetricSpace::Interval(_)) => Ok(()),
            (b, s) => Err(Error::Backend { backend: b.name(), space: s.kind_name() }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Flow => "flow",
            Backend::Alpha => "alpha",
            Backend::Line => "line",
        }
    }

    pub fn norm(self, mu: &FreeVector) -> Result<f64> {
        match self {
            Backend::Flow => norm_flow(mu).map(|r| r.value),
            Backend::Alpha => norm_alpha(mu),
            Backend::Line => norm_line(mu),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flow" => Ok(Backend::Flow),
            "alpha" => Ok(Backend::Alpha),
            "line" => Ok(Backend::Line),
            other => Err(Error::InvalidParams(format!("unknown backend {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::metric::{AlphaSpace, FiniteSpace, IntervalSpace};

    fn line() -> Arc<MetricSpace> {
        Arc::new(IntervalSpace::new(-10.0, 10.0).unwrap().into())
    }

    fn r(x: f64) -> Point {
        Point::real(x)
    }

    #[test]
    fn molecule_norm_is_distance() {
        let s = line();
        let mu = FreeVector::new(s.clone(), [(r(0.5), 1.0), (r(-1.25), -1.0)]).unwrap();
        let res = norm_flow(&mu).unwrap();
        assert!((res.value - 1.75).abs() < 1e-12);
        res.verify(&s, 1e-9).unwrap();
    }

    #[test]
    fn empty_vector_has_zero_norm() {
        let s = line();
        let z = FreeVector::zero(s.clone());
        let res = norm_flow(&z).unwrap();
        assert_eq!(res.value, 0.0);
        assert_eq!(dual_gap(&res), 0.0);
        assert_eq!(norm_line(&z).unwrap(), 0.0);
        res.verify(&s, 0.0).unwrap();
    }

    #[test]
    fn line_example_two_points() {
        // mu = 2 delta(1) - delta(3) on {0, 1, 3}
        let s = line();
        let mu = FreeVector::new(s, [(r(1.0), 2.0), (r(3.0), -1.0)]).unwrap();
        assert_eq!(norm_line(&mu).unwrap(), 3.0);
        assert!((norm_flow(&mu).unwrap().value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn line_both_sides_of_basepoint() {
        let s = line();
        let mu = FreeVector::new(s, [(r(-2.0), 1.0), (r(-1.0), -3.0), (r(2.0), 1.5)]).unwrap();
        let flow = norm_flow(&mu).unwrap().value;
        assert!((norm_line(&mu).unwrap() - flow).abs() < 1e-12);
    }

    #[test]
    fn half_minus_quarter() {
        let s: Arc<MetricSpace> = Arc::new(IntervalSpace::unit().into());
        let mu = FreeVector::new(s, [(r(0.5), 1.0), (r(0.25), -1.0)]).unwrap();
        assert_eq!(norm_line(&mu).unwrap(), 0.25);
    }

    #[test]
    fn alpha_closed_form() {
        let s: Arc<MetricSpace> = Arc::new(AlphaSpace::new(vec![0.5, 3.0, 2.0]).unwrap().into());
        let mu = FreeVector::new(s.clone(), [(Point::Index(1), 1.0), (Point::Index(2), 2.0)]).unwrap();
        assert_eq!(norm_alpha(&mu).unwrap(), 0.5 + 6.0);
        let unit = FreeVector::new(s.clone(), [(Point::Index(3), 1.0 / 2.0)]).unwrap();
        assert_eq!(norm_alpha(&unit).unwrap(), 1.0);
        assert!((norm_flow(&mu).unwrap().value - 6.5).abs() < 1e-12);
    }

    #[test]
    fn backend_mismatch_is_an_error() {
        let s: Arc<MetricSpace> = Arc::new(IntervalSpace::unit().into());
        let mu = FreeVector::delta(s, r(0.5)).unwrap();
        assert!(matches!(norm_alpha(&mu), Err(Error::Backend { .. })));
        assert!(Backend::Alpha.check(mu.space()).is_err());
        assert!(Backend::Flow.check(mu.space()).is_ok());
    }

    #[test]
    fn scaled_witness_opens_gap() {
        let s = line();
        let mu = FreeVector::new(s, [(r(1.0), 2.0), (r(3.0), -1.0), (r(-2.0), 0.5)]).unwrap();
        let res = norm_flow(&mu).unwrap();
        assert!(dual_gap(&res).abs() < 1e-9);
        assert!(dual_gap(&res.with_scaled_witness(0.9)) > 0.1);
    }

    #[test]
    fn exact_mode_matches_float() {
        let m = vec![
            vec![0.0, 1.0, 2.0, 1.5],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.25],
            vec![1.5, 2.0, 1.25, 0.0],
        ];
        let s: Arc<MetricSpace> = Arc::new(FiniteSpace::generated(m, 0).unwrap().into());
        let mu =
            FreeVector::new(s, [(Point::Index(1), 0.75), (Point::Index(2), -2.0), (Point::Index(3), 0.5)]).unwrap();
        let exact = norm_flow_exact(&mu).unwrap();
        let float = norm_flow(&mu).unwrap();
        assert!((exact.to_f64() - float.value).abs() < 1e-12);
        let js = serde_json::to_string(&exact).unwrap();
        assert!(js.contains("\"value\":\""), "{js}");
    }

    #[test]
    fn json_layout() {
        let s = line();
        let mu = FreeVector::new(s, [(r(1.0), 1.0)]).unwrap();
        let js = serde_json::to_value(norm_flow(&mu).unwrap()).unwrap();
        assert_eq!(js["value"], 1.0);
        assert_eq!(js["plan"][0], serde_json::json!([1.0, 0.0, 1.0]));
        assert_eq!(js["witness"].as_array().unwrap().len(), 2);
    }
}
