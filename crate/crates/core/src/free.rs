//! Finitely supported elements of the Lipschitz-free space `F(M)`, their
//! linear structure, the pairing with `Lip_0(M)` and the action of a
//! linearized map.

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::maps::LipMap;
use crate::metric::{MetricSpace, Point};

/// Coefficients with absolute value below this are dropped on
/// canonicalization.
pub const DROP_TOL: f64 = 1e-15;

pub(crate) fn same_space(a: &Arc<MetricSpace>, b: &Arc<MetricSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// `sum lambda_i delta(x_i)` in canonical form: support sorted by point key,
/// points distinct, no basepoint term, no negligible coefficient.
#[derive(Clone)]
pub struct FreeVector {
    space: Arc<MetricSpace>,
    terms: Vec<(Point, f64)>,
}

impl fmt::Debug for FreeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FreeVector").field("space", &self.space.kind_name()).field("terms", &self.terms).finish()
    }
}

/// Structural equality: same space and identical canonical terms.
impl PartialEq for FreeVector {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.terms == other.terms
    }
}

impl Serialize for FreeVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FreeVector", 2)?;
        st.serialize_field("space", &*self.space)?;
        st.serialize_field("terms", &self.terms)?;
        st.end()
    }
}

impl FreeVector {
    pub fn zero(space: Arc<MetricSpace>) -> Self {
        FreeVector { space, terms: Vec::new() }
    }

    /// Canonicalizes `pairs` with the default drop tolerance.
    pub fn new(space: Arc<MetricSpace>, pairs: impl IntoIterator<Item = (Point, f64)>) -> Result<Self> {
        Self::with_drop_tol(space, pairs, DROP_TOL)
    }

    /// Merges duplicate points, removes basepoint terms and coefficients
    /// with `|lambda| < drop_tol`, and sorts the support.
    pub fn with_drop_tol(
        space: Arc<MetricSpace>,
        pairs: impl IntoIterator<Item = (Point, f64)>,
        drop_tol: f64,
    ) -> Result<Self> {
        let mut raw: Vec<(Point, f64)> = Vec::new();
        for (p, c) in pairs {
            space.check(&p)?;
            if !c.is_finite() {
                return Err(domain(format!("coefficient {c} at {p} is not finite")));
            }
            raw.push((p, c));
        }
        Ok(Self::canonical(space, raw, drop_tol))
    }

    /// Points are assumed to belong to `space`.
    pub(crate) fn canonical(space: Arc<MetricSpace>, mut raw: Vec<(Point, f64)>, drop_tol: f64) -> Self {
        let base = space.basepoint();
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        let mut terms: Vec<(Point, f64)> = Vec::with_capacity(raw.len());
        for (p, c) in raw {
            match terms.last_mut() {
                Some((q, acc)) if *q == p => *acc += c,
                _ => terms.push((p, c)),
            }
        }
        terms.retain(|(p, c)| *p != base && c.abs() >= drop_tol && *c != 0.0);
        FreeVector { space, terms }
    }

    pub fn delta(space: Arc<MetricSpace>, x: Point) -> Result<Self> {
        Self::new(space, [(x, 1.0)])
    }

    /// `(delta(x) - delta(y)) / d(x, y)` for distinct points.
    pub fn molecule(space: Arc<MetricSpace>, x: Point, y: Point) -> Result<Self> {
        let d = space.distance(&x, &y)?;
        if d == 0.0 {
            return Err(domain("a molecule needs two distinct points"));
        }
        Self::new(space, [(x, 1.0 / d), (y, -1.0 / d)])
    }

    pub fn space(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn terms(&self) -> &[(Point, f64)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, p: &Point) -> f64 {
        self.terms.binary_search_by(|(q, _)| q.cmp(p)).map(|i| self.terms[i].1).unwrap_or(0.0)
    }

    /// The support, sorted.
    pub fn support(&self) -> Vec<Point> {
        self.terms.iter().map(|(p, _)| p.clone()).collect()
    }

    /// `sum |lambda_i|`.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.abs()).sum()
    }

    /// `sum lambda_i`, the mass the basepoint absorbs in a transport plan.
    pub fn total_mass(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c).sum()
    }

    /// `sum |lambda_i| d(0, x_i)`, an upper bound on the norm.
    pub fn weighted_l1(&self) -> f64 {
        let base = self.space.basepoint();
        self.terms.iter().map(|(p, c)| c.abs() * self.space.distance_unchecked(&base, p)).sum()
    }

    pub fn scale(&self, c: f64) -> FreeVector {
        let raw = self.terms.iter().map(|(p, v)| (p.clone(), c * v)).collect();
        Self::canonical(self.space.clone(), raw, DROP_TOL)
    }

    /// `c1 * a + c2 * b`.
    pub fn linear_combine(c1: f64, a: &FreeVector, c2: f64, b: &FreeVector) -> Result<FreeVector> {
        if !same_space(&a.space, &b.space) {
            return Err(Error::SpaceMismatch);
        }
        let raw = a
            .terms
            .iter()
            .map(|(p, v)| (p.clone(), c1 * v))
            .chain(b.terms.iter().map(|(p, v)| (p.clone(), c2 * v)))
            .collect();
        Ok(Self::canonical(a.space.clone(), raw, DROP_TOL))
    }

    pub fn add(&self, other: &FreeVector) -> Result<FreeVector> {
        Self::linear_combine(1.0, self, 1.0, other)
    }

    pub fn sub(&self, other: &FreeVector) -> Result<FreeVector> {
        Self::linear_combine(1.0, self, -1.0, other)
    }
}

/// `f_hat(mu) = sum lambda_i delta(f(x_i))`, canonicalized.
pub fn push_forward(f: &LipMap, mu: &FreeVector) -> Result<FreeVector> {
    if !same_space(f.space(), &mu.space) {
        return Err(Error::SpaceMismatch);
    }
    let mut raw = Vec::with_capacity(mu.terms.len());
    for (p, c) in &mu.terms {
        raw.push((f.apply(p)?, *c));
    }
    Ok(FreeVector::canonical(mu.space.clone(), raw, DROP_TOL))
}

type Rule = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// A real-valued function on a space vanishing at the basepoint, with a
/// declared Lipschitz bound.
#[derive(Clone)]
pub struct Functional {
    space: Arc<MetricSpace>,
    lip_bound: f64,
    rule: Rule,
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Functional").field("lip_bound", &self.lip_bound).finish_non_exhaustive()
    }
}

impl Functional {
    pub fn new(space: Arc<MetricSpace>, lip_bound: f64, rule: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Functional { space, lip_bound, rule: Arc::new(rule) }
    }

    /// `x -> d(0, x)`, attaining the norm of every positive combination.
    pub fn distance_to_base(space: Arc<MetricSpace>) -> Self {
        let s = space.clone();
        let base = s.basepoint();
        Functional::new(space, 1.0, move |p| s.distance_unchecked(&base, p))
    }

    /// McShane extension of values given on finitely many points; the
    /// basepoint is pinned to zero and the bound is the exact Lipschitz
    /// constant of the data.
    pub fn from_values(space: Arc<MetricSpace>, values: Vec<(Point, f64)>) -> Result<Self> {
        let base = space.basepoint();
        let mut pts: Vec<(Point, f64)> = Vec::with_capacity(values.len() + 1);
        for (p, v) in values {
            space.check(&p)?;
            if p == base && v != 0.0 {
                return Err(domain("a Lip_0 functional must vanish at the basepoint"));
            }
            if p != base {
                pts.push((p, v));
            }
        }
        pts.push((base, 0.0));
        let mut lip: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = space.distance_unchecked(&pts[i].0, &pts[j].0);
                if d == 0.0 {
                    return Err(domain(format!("point {} listed twice", pts[i].0)));
                }
                lip = lip.max((pts[i].1 - pts[j].1).abs() / d);
            }
        }
        let s = space.clone();
        Ok(Functional::new(space, lip, move |x| {
            pts.iter().map(|(p, v)| v + lip * s.distance_unchecked(x, p)).fold(f64::INFINITY, f64::min)
        }))
    }

    pub fn space(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn lip_bound(&self) -> f64 {
        self.lip_bound
    }

    pub fn eval(&self, p: &Point) -> Result<f64> {
        self.space.check(p)?;
        Ok((self.rule)(p))
    }

    /// `phi o f` with the caller-supplied bound `Lip(phi) * Lip(f)`.
    pub fn precompose(&self, f: &LipMap, lip_f: f64) -> Result<Functional> {
        if !same_space(&self.space, f.space()) {
            return Err(Error::SpaceMismatch);
        }
        let rule = self.rule.clone();
        let map = f.clone();
        Ok(Functional::new(self.space.clone(), self.lip_bound * lip_f, move |p| {
            map.apply(p).map(|q| rule(&q)).unwrap_or(f64::NAN)
        }))
    }

    /// Verifies `phi(0) = 0` and the declared bound on all pairs of `points`.
    /// Returns the first offending pair.
    pub fn check_on(&self, points: &[Point], tol: f64) -> std::result::Result<(), (Point, Point)> {
        let base = self.space.basepoint();
        if (self.rule)(&base).abs() > tol {
            return Err((base.clone(), base));
        }
        let vals: Vec<f64> = points.iter().map(|p| (self.rule)(p)).collect();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = self.space.distance_unchecked(&points[i], &points[j]);
                if (vals[i] - vals[j]).abs() > self.lip_bound * d + tol {
                    return Err((points[i].clone(), points[j].clone()));
                }
            }
        }
        Ok(())
    }
}

/// `<phi, mu> = sum lambda_i phi(x_i)`.
pub fn pair(phi: &Functional, mu: &FreeVector) -> Result<f64> {
    if !same_space(&phi.space, &mu.space) {
        return Err(Error::SpaceMismatch);
    }
    Ok(mu.terms.iter().map(|(p, c)| c * (phi.rule)(p)).sum())
}
