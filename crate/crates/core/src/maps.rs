//! Basepoint-fixing Lipschitz self-maps, their Lipschitz constants and
//! iteration.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::free::{push_forward, FreeVector};
use crate::metric::{LatticeBox, MetricSpace, Point};
use crate::norm::norm_flow;
use crate::piecewise::{PiecewiseLinear, KNOT_BUDGET};

/// Boxes with at most this many points are scanned completely when
/// computing Lipschitz constants.
pub const LATTICE_SCAN_LIMIT: usize = 1 << 20;

/// Index rules on alpha spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaRule {
    /// `n -> n + 1`.
    Shift,
    /// Cycles each block `[s_n, s_{n+1})`, `s_n = n(n+1)/2`, one step forward.
    BlockCycle,
    /// Explicit images of `0..=N`.
    Table(Vec<usize>),
}

/// Serializable description of a map, without its space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapSpec {
    FiniteTable {
        table: Vec<usize>,
    },
    AlphaRule {
        rule: AlphaRule,
    },
    PiecewiseLinear {
        knots: PiecewiseLinear,
    },
    /// `x -> clamp(A x)` with `A` given row by row.
    LatticeRule {
        matrix: Vec<Vec<i64>>,
    },
}

#[derive(Debug, Clone)]
enum Rule {
    Identity,
    ToBase,
    Table(Arc<Vec<usize>>),
    Shift,
    BlockCycle,
    Pl(Arc<PiecewiseLinear>),
    Lattice(Arc<Vec<Vec<i64>>>),
    /// Applied left to right.
    Chain(Vec<Rule>),
    Power(Box<Rule>, u64),
}

/// A basepoint-fixing self-map of a space.
#[derive(Clone)]
pub struct LipMap {
    space: Arc<MetricSpace>,
    rule: Rule,
    label: String,
}

impl fmt::Debug for LipMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LipMap({} on {})", self.label, self.space.kind_name())
    }
}

/// `(s, n)` with `s = n(n+1)/2` the start of the block containing `m`.
pub fn triangular_block(m: usize) -> (usize, usize) {
    let mut n = (((8.0 * m as f64 + 1.0).sqrt() - 1.0) / 2.0) as usize;
    while n * (n + 1) / 2 > m {
        n -= 1;
    }
    while (n + 1) * (n + 2) / 2 <= m {
        n += 1;
    }
    (n * (n + 1) / 2, n)
}

fn block_cycle(m: usize) -> usize {
    let (s, n) = triangular_block(m);
    if m == s + n {
        s
    } else {
        m + 1
    }
}

impl LipMap {
    fn build(space: Arc<MetricSpace>, rule: Rule, label: impl Into<String>) -> Result<Self> {
        let map = LipMap { space, rule, label: label.into() };
        let base = map.space.basepoint();
        if map.apply(&base)? != base {
            return Err(Error::InvalidMap("the map does not fix the basepoint".into()));
        }
        Ok(map)
    }

    pub fn identity(space: Arc<MetricSpace>) -> Self {
        LipMap { space, rule: Rule::Identity, label: "identity".into() }
    }

    /// The map sending every point to the basepoint.
    pub fn to_basepoint(space: Arc<MetricSpace>) -> Self {
        LipMap { space, rule: Rule::ToBase, label: "zero".into() }
    }

    pub fn finite_table(space: Arc<MetricSpace>, table: Vec<usize>) -> Result<Self> {
        let MetricSpace::Finite(s) = &*space else {
            return Err(Error::InvalidMap("finite-table maps need a finite space".into()));
        };
        if table.len() != s.len() {
            return Err(Error::InvalidMap(format!("table has {} entries for {} points", table.len(), s.len())));
        }
        if let Some(i) = table.iter().position(|&j| j >= s.len()) {
            return Err(Error::InvalidMap(format!("image of {i} is outside the space")));
        }
        Self::build(space, Rule::Table(Arc::new(table)), "table")
    }

    pub fn alpha(space: Arc<MetricSpace>, rule: AlphaRule) -> Result<Self> {
        let MetricSpace::Alpha(s) = &*space else {
            return Err(Error::InvalidMap("alpha rules need an alpha space".into()));
        };
        let (rule, label) = match rule {
            AlphaRule::Shift => (Rule::Shift, "shift"),
            AlphaRule::BlockCycle => (Rule::BlockCycle, "block-cycle"),
            AlphaRule::Table(t) => {
                if t.len() != s.len() + 1 {
                    return Err(Error::InvalidMap(format!(
                        "alpha table needs {} entries (indices 0..={})",
                        s.len() + 1,
                        s.len()
                    )));
                }
                if let Some(i) = t.iter().position(|&j| j > s.len()) {
                    return Err(Error::InvalidMap(format!("image of {i} leaves the prefix")));
                }
                (Rule::Table(Arc::new(t)), "table")
            }
        };
        Self::build(space, rule, label)
    }

    pub fn piecewise_linear(space: Arc<MetricSpace>, pl: PiecewiseLinear) -> Result<Self> {
        let MetricSpace::Interval(s) = &*space else {
            return Err(Error::InvalidMap("piecewise-linear maps need an interval space".into()));
        };
        let (first, last) = (pl.knots()[0].0, pl.knots()[pl.knots().len() - 1].0);
        if s.lo().is_finite() && first != s.lo() || s.hi().is_finite() && last != s.hi() {
            return Err(Error::InvalidMap("knots of a map on a bounded side must end at the endpoint".into()));
        }
        if first < s.lo() || last > s.hi() {
            return Err(Error::InvalidMap("knots lie outside the interval".into()));
        }
        // image check: knot values, plus the tail slopes on unbounded sides
        if let Some((x, y)) = pl.knots().iter().find(|(_, y)| !s.contains(*y)) {
            return Err(Error::InvalidMap(format!("f({x}) = {y} leaves the interval")));
        }
        let slopes = pl.slopes();
        if s.hi() == f64::INFINITY && s.lo() > f64::NEG_INFINITY && *slopes.last().unwrap() < 0.0
            || s.lo() == f64::NEG_INFINITY && s.hi() < f64::INFINITY && slopes[0] < 0.0
        {
            return Err(Error::InvalidMap("an unbounded tail leaves the interval".into()));
        }
        Self::build(space, Rule::Pl(Arc::new(pl)), "piecewise-linear")
    }

    pub fn lattice_linear(space: Arc<MetricSpace>, matrix: Vec<Vec<i64>>) -> Result<Self> {
        let MetricSpace::Lattice(b) = &*space else {
            return Err(Error::InvalidMap("lattice rules need a lattice box".into()));
        };
        if matrix.len() != b.dim() || matrix.iter().any(|r| r.len() != b.dim()) {
            return Err(Error::InvalidMap(format!("matrix must be {0}x{0}", b.dim())));
        }
        Self::build(space, Rule::Lattice(Arc::new(matrix)), "lattice-linear")
    }

    pub fn from_spec(space: Arc<MetricSpace>, spec: MapSpec) -> Result<Self> {
        match spec {
            MapSpec::FiniteTable { table } => Self::finite_table(space, table),
            MapSpec::AlphaRule { rule } => Self::alpha(space, rule),
            MapSpec::PiecewiseLinear { knots } => Self::piecewise_linear(space, knots),
            MapSpec::LatticeRule { matrix } => Self::lattice_linear(space, matrix),
        }
    }

    pub fn space(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The piecewise-linear table behind a plain interval map.
    pub fn as_piecewise_linear(&self) -> Option<&PiecewiseLinear> {
        match &self.rule {
            Rule::Pl(p) => Some(p),
            _ => None,
        }
    }

    /// `f^k`, evaluated lazily.
    pub fn power(&self, k: u64) -> LipMap {
        let rule = match k {
            0 => Rule::Identity,
            1 => self.rule.clone(),
            _ => Rule::Power(Box::new(self.rule.clone()), k),
        };
        LipMap { space: self.space.clone(), rule, label: format!("({})^{k}", self.label) }
    }

    /// `g o self`.
    pub fn then(&self, g: &LipMap) -> Result<LipMap> {
        if !crate::free::same_space(&self.space, &g.space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(LipMap {
            space: self.space.clone(),
            rule: Rule::Chain(vec![self.rule.clone(), g.rule.clone()]),
            label: format!("{} then {}", self.label, g.label),
        })
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        self.space.check(p)?;
        apply_rule(&self.space, &self.rule, p)
    }
}

fn apply_rule(space: &MetricSpace, rule: &Rule, p: &Point) -> Result<Point> {
    Ok(match rule {
        Rule::Identity => p.clone(),
        Rule::ToBase => space.basepoint(),
        Rule::Table(t) => Point::Index(t[index(p)]),
        Rule::Shift => {
            let n = index(p);
            let img = if n == 0 { 0 } else { n + 1 };
            alpha_image(space, img)?
        }
        Rule::BlockCycle => alpha_image(space, block_cycle(index(p)))?,
        Rule::Pl(f) => {
            let x = p.as_real().expect("real point");
            let y = f.eval(x);
            if !y.is_finite() {
                return Err(Error::Overflow(format!("f({x}) is not representable")));
            }
            let y = Point::real(y);
            space.check(&y)?;
            y
        }
        Rule::Lattice(a) => {
            let MetricSpace::Lattice(b) = space else { unreachable!() };
            Point::Lattice(lattice_image(b, a, p.as_lattice().expect("lattice point"))?)
        }
        Rule::Chain(rules) => {
            let mut q = p.clone();
            for r in rules {
                q = apply_rule(space, r, &q)?;
            }
            q
        }
        Rule::Power(r, k) => {
            let mut q = p.clone();
            for _ in 0..*k {
                q = apply_rule(space, r, &q)?;
            }
            q
        }
    })
}

fn index(p: &Point) -> usize {
    p.as_index().expect("index point")
}

fn alpha_image(space: &MetricSpace, n: usize) -> Result<Point> {
    let MetricSpace::Alpha(s) = space else { unreachable!() };
    if n > s.len() {
        return Err(Error::PrefixExhausted { index: n, len: s.len() });
    }
    Ok(Point::Index(n))
}

fn lattice_image(b: &LatticeBox, a: &[Vec<i64>], x: &[i64]) -> Result<Vec<i64>> {
    let mut y = Vec::with_capacity(x.len());
    for row in a {
        let mut acc: i64 = 0;
        for (c, v) in row.iter().zip(x) {
            acc = c
                .checked_mul(*v)
                .and_then(|t| acc.checked_add(t))
                .ok_or_else(|| Error::Overflow("lattice coordinate exceeds i64".into()))?;
        }
        y.push(acc);
    }
    b.clamp(&mut y);
    Ok(y)
}

/// Where a Lipschitz constant is attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LipCertificate {
    Pair {
        x: Point,
        y: Point,
    },
    /// `alpha_{f(n)} / alpha_n` attains the value over `1..=window`.
    AlphaIndex {
        n: usize,
        window: usize,
    },
    Segment {
        index: usize,
        slope: f64,
    },
    /// Product of the factors' constants; an upper bound only.
    ProductBound {
        factors: usize,
    },
    /// Every pair is mapped to a single point.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipConstant {
    pub value: f64,
    /// False when the value is only a bound (sampled lattice boxes give
    /// lower bounds, unflattened compositions give upper bounds).
    pub exact: bool,
    pub certificate: LipCertificate,
    pub note: Option<String>,
}

fn pair_scan(space: &MetricSpace, pts: &[Point], imgs: &[Point]) -> LipConstant {
    let mut best = (0.0, None);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = space.distance_unchecked(&pts[i], &pts[j]);
            let r = space.distance_unchecked(&imgs[i], &imgs[j]) / d;
            if r > best.0 {
                best = (r, Some((i, j)));
            }
        }
    }
    let certificate = match best.1 {
        Some((i, j)) => LipCertificate::Pair { x: pts[i].clone(), y: pts[j].clone() },
        None => LipCertificate::Constant,
    };
    LipConstant { value: best.0, exact: true, certificate, note: None }
}

/// Lipschitz constant of `f`, exact wherever the presentation allows.
///
/// On alpha spaces the supremum runs over the whole materialized prefix;
/// see [`lip_constant_window`].
pub fn lip_constant(f: &LipMap) -> Result<LipConstant> {
    match &*f.space {
        MetricSpace::Finite(s) => {
            let pts: Vec<Point> = (0..s.len()).map(Point::Index).collect();
            let imgs = pts.iter().map(|p| f.apply(p)).collect::<Result<Vec<_>>>()?;
            Ok(pair_scan(&f.space, &pts, &imgs))
        }
        MetricSpace::Alpha(s) => lip_constant_window(f, s.len()),
        MetricSpace::Interval(s) => interval_lip(f, s.lo(), s.hi()),
        MetricSpace::Lattice(b) => lattice_lip(f, b),
    }
}

/// `sup_{1 <= n <= window} alpha_{f(n)} / alpha_n`, which equals `Lip(f)`
/// on `d_alpha` once the window covers every index. Fails if an image
/// leaves the prefix.
pub fn lip_constant_window(f: &LipMap, window: usize) -> Result<LipConstant> {
    let MetricSpace::Alpha(s) = &*f.space else {
        return Err(domain("windowed Lipschitz constants are defined on alpha spaces"));
    };
    if window == 0 || window > s.len() {
        return Err(Error::PrefixExhausted { index: window, len: s.len() });
    }
    let mut best = (0.0, 0);
    for n in 1..=window {
        let img = index(&f.apply(&Point::Index(n))?);
        let r = if img == 0 { 0.0 } else { s.alpha(img)? / s.alpha(n)? };
        if r > best.0 {
            best = (r, n);
        }
    }
    let certificate =
        if best.1 == 0 { LipCertificate::Constant } else { LipCertificate::AlphaIndex { n: best.1, window } };
    let note = (window < s.len()).then(|| format!("supremum over the window 1..={window} only"));
    Ok(LipConstant { value: best.0, exact: window == s.len(), certificate, note })
}

/// Flattens `rule` to a single piecewise-linear table if it fits the budget.
fn flatten(rule: &Rule, lo: f64, hi: f64, budget: usize) -> Option<PiecewiseLinear> {
    let identity = || {
        let a = if lo.is_finite() { lo } else { hi.min(0.0) - 1.0 };
        let b = if hi.is_finite() { hi } else { a.max(0.0) + 1.0 };
        PiecewiseLinear::new(vec![(a, a), (b, b)]).ok()
    };
    match rule {
        Rule::Identity => identity(),
        Rule::ToBase => {
            let id = identity()?;
            let k = id.knots();
            PiecewiseLinear::new(vec![(k[0].0, 0.0), (k[1].0, 0.0)]).ok()
        }
        Rule::Pl(p) => Some((**p).clone()),
        Rule::Chain(rules) => {
            let mut acc = flatten(&Rule::Identity, lo, hi, budget)?;
            for r in rules {
                let g = flatten(r, lo, hi, budget)?;
                acc = PiecewiseLinear::compose(&g, &acc, lo, hi, budget).ok()?;
            }
            Some(acc)
        }
        Rule::Power(r, k) => {
            let g = flatten(r, lo, hi, budget)?;
            let mut acc = g.clone();
            for _ in 1..*k {
                acc = PiecewiseLinear::compose(&g, &acc, lo, hi, budget).ok()?;
            }
            Some(acc)
        }
        _ => None,
    }
}

fn lip_upper_bound(rule: &Rule, lo: f64, hi: f64) -> Option<(f64, usize)> {
    match rule {
        Rule::Chain(rules) => rules.iter().try_fold((1.0, 0), |(v, n), r| {
            let (w, m) = lip_upper_bound(r, lo, hi)?;
            Some((v * w, n + m))
        }),
        Rule::Power(r, k) => {
            let (w, m) = lip_upper_bound(r, lo, hi)?;
            Some((w.powf(*k as f64), m * *k as usize))
        }
        other => flatten(other, lo, hi, KNOT_BUDGET).map(|p| (p.lip().0, 1)),
    }
}

fn interval_lip(f: &LipMap, lo: f64, hi: f64) -> Result<LipConstant> {
    if let Some(p) = flatten(&f.rule, lo, hi, KNOT_BUDGET) {
        let (value, k) = p.lip();
        let certificate = if value == 0.0 {
            LipCertificate::Constant
        } else {
            LipCertificate::Segment { index: k, slope: p.slopes()[k] }
        };
        return Ok(LipConstant { value, exact: true, certificate, note: None });
    }
    let (value, factors) = lip_upper_bound(&f.rule, lo, hi)
        .ok_or_else(|| Error::InvalidMap("interval map has no piecewise-linear form".into()))?;
    Ok(LipConstant {
        value,
        exact: false,
        certificate: LipCertificate::ProductBound { factors },
        note: Some(format!("composition exceeds the {KNOT_BUDGET}-knot budget")),
    })
}

/// Under the l1 metric any two box points are joined by a monotone path
/// of unit steps whose lengths add up to their distance, so the supremum
/// over unit-neighbour pairs is the Lipschitz constant.
fn lattice_lip(f: &LipMap, b: &LatticeBox) -> Result<LipConstant> {
    let card = b.cardinality();
    let full = card <= LATTICE_SCAN_LIMIT as u128;
    let stride = if full { 1 } else { (card / LATTICE_SCAN_LIMIT as u128 + 1) as usize };
    let pts = b.points_strided(stride);
    let mut best: (f64, Option<(Point, Point)>) = (0.0, None);
    for x in &pts {
        let fx = f.apply(&Point::Lattice(x.clone()))?;
        for axis in 0..b.dim() {
            if x[axis] == b.hi()[axis] {
                continue;
            }
            let mut y = x.clone();
            y[axis] += 1;
            let fy = f.apply(&Point::Lattice(y.clone()))?;
            let r = f.space.distance_unchecked(&fx, &fy);
            if r > best.0 {
                best = (r, Some((Point::Lattice(x.clone()), Point::Lattice(y))));
            }
        }
    }
    let certificate = match best.1 {
        Some((x, y)) => LipCertificate::Pair { x, y },
        None => LipCertificate::Constant,
    };
    let note = (!full).then(|| format!("sampled every {stride}th point; lower bound"));
    Ok(LipConstant { value: best.0, exact: full, certificate, note })
}

/// `f^n(x)`.
pub fn iterate_point(f: &LipMap, x: &Point, n: u64) -> Result<Point> {
    f.space.check(x)?;
    let mut q = x.clone();
    for _ in 0..n {
        q = apply_rule(&f.space, &f.rule, &q)?;
    }
    Ok(q)
}

/// `x, f(x), ..., f^n(x)`.
pub fn orbit(f: &LipMap, x: &Point, n: u64) -> Result<Vec<Point>> {
    f.space.check(x)?;
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(x.clone());
    for _ in 0..n {
        let next = apply_rule(&f.space, &f.rule, out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

/// `f_hat^n(mu)`.
pub fn iterate_vector(f: &LipMap, mu: &FreeVector, n: u64) -> Result<FreeVector> {
    let mut v = mu.clone();
    for _ in 0..n {
        if v.is_empty() {
            break;
        }
        v = push_forward(f, &v)?;
    }
    Ok(v)
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorNormEstimate {
    pub value: f64,
    pub pairs: usize,
    /// Every pair of the sample was evaluated.
    pub exhaustive: bool,
    pub attained: Option<(Point, Point)>,
}

/// Largest `||f_hat(m)||` over molecules `m = (delta(x) - delta(y)) / d(x, y)`
/// with `x, y` drawn from `points` (plus the basepoint), evaluating at most
/// `pair_budget` pairs in lexicographic order.
pub fn operator_norm_estimate(f: &LipMap, points: &[Point], pair_budget: usize) -> Result<OperatorNormEstimate> {
    let mut pts = points.to_vec();
    pts.push(f.space.basepoint());
    pts.sort();
    pts.dedup();
    let mut best = OperatorNormEstimate { value: 0.0, pairs: 0, exhaustive: true, attained: None };
    'outer: for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if best.pairs == pair_budget {
                best.exhaustive = false;
                break 'outer;
            }
            let m = FreeVector::molecule(f.space.clone(), pts[i].clone(), pts[j].clone())?;
            let v = norm_flow(&push_forward(f, &m)?)?.value;
            best.pairs += 1;
            if v > best.value {
                best.value = v;
                best.attained = Some((pts[i].clone(), pts[j].clone()));
            }
        }
    }
    Ok(best)
}

/// Every point of a space small enough to enumerate, for
/// [`operator_norm_estimate`].
pub fn sample_points(space: &MetricSpace, limit: usize) -> Result<Vec<Point>> {
    space.enumerate(limit).ok_or_else(|| domain(format!("space has more than {limit} points; pass a sample")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{AlphaSpace, FiniteSpace, IntervalSpace};

    fn doubling() -> LipMap {
        let pl = PiecewiseLinear::new(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)]).unwrap();
        LipMap::piecewise_linear(Arc::new(IntervalSpace::unit().into()), pl).unwrap()
    }

    fn block_space(blocks: usize) -> Arc<MetricSpace> {
        let len = blocks * (blocks + 1) / 2 - 1;
        let a = AlphaSpace::from_fn(len, |m| {
            let (s, _) = triangular_block(m);
            2f64.powi((m - s) as i32)
        })
        .unwrap();
        Arc::new(a.into())
    }

    #[test]
    fn triangular_blocks() {
        assert_eq!(triangular_block(0), (0, 0));
        assert_eq!(triangular_block(1), (1, 1));
        assert_eq!(triangular_block(2), (1, 1));
        assert_eq!(triangular_block(3), (3, 2));
        assert_eq!(triangular_block(5), (3, 2));
        assert_eq!(triangular_block(6), (6, 3));
        assert_eq!(block_cycle(5), 3);
        assert_eq!(block_cycle(4), 5);
    }

    #[test]
    fn doubling_constant_and_iterates() {
        let f = doubling();
        assert_eq!(lip_constant(&f).unwrap().value, 2.0);
        assert_eq!(lip_constant(&f.power(3)).unwrap().value, 8.0);
        assert_eq!(iterate_point(&f, &Point::real(0.125), 2).unwrap(), Point::real(0.5));
        assert_eq!(iterate_point(&f, &Point::real(0.3), 0).unwrap(), Point::real(0.3));
    }

    #[test]
    fn identity_constant_on_finite() {
        let s = FiniteSpace::new(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.5], vec![2.0, 1.5, 0.0]], 0).unwrap();
        let f = LipMap::identity(Arc::new(s.into()));
        assert_eq!(lip_constant(&f).unwrap().value, 1.0);
    }

    #[test]
    fn shift_iterates() {
        let space = Arc::new(AlphaSpace::from_fn(20, |n| n as f64).unwrap().into());
        let f = LipMap::alpha(space, AlphaRule::Shift).unwrap();
        assert_eq!(iterate_point(&f, &Point::Index(1), 5).unwrap(), Point::Index(6));
        assert!(matches!(iterate_point(&f, &Point::Index(1), 25), Err(Error::PrefixExhausted { index: 21, len: 20 })));
        // the prefix sup needs f(20) = 21
        assert!(lip_constant(&f).is_err());
        let w = lip_constant_window(&f, 19).unwrap();
        assert_eq!(w.value, 2.0);
        assert_eq!(w.certificate, LipCertificate::AlphaIndex { n: 1, window: 19 });
        assert!(!w.exact);
    }

    #[test]
    fn block_cycle_lipschitz_powers() {
        let f = LipMap::alpha(block_space(8), AlphaRule::BlockCycle).unwrap();
        for n in 1..=6u64 {
            let l = lip_constant(&f.power(n)).unwrap();
            assert_eq!(l.value, 2f64.powi(n as i32), "n = {n}");
            if let LipCertificate::AlphaIndex { n: m, .. } = l.certificate {
                let (s, _) = triangular_block(m);
                assert_eq!(m, s, "attained at a block start");
            } else {
                panic!("expected an index certificate");
            }
        }
    }

    #[test]
    fn rejects_non_fixing_maps() {
        let s = Arc::new(MetricSpace::from(FiniteSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 0).unwrap()));
        assert!(LipMap::finite_table(s.clone(), vec![1, 1]).is_err());
        assert!(LipMap::finite_table(s, vec![0, 2]).is_err());
        let pl = PiecewiseLinear::new(vec![(0.0, 1.0), (1.0, 1.0)]).unwrap();
        assert!(LipMap::piecewise_linear(Arc::new(IntervalSpace::unit().into()), pl).is_err());
    }

    #[test]
    fn rejects_maps_leaving_interval() {
        let pl = PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert!(LipMap::piecewise_linear(Arc::new(IntervalSpace::unit().into()), pl).is_err());
    }

    #[test]
    fn doubling_pushes_forward() {
        let f = doubling();
        let mu = FreeVector::new(f.space().clone(), [(Point::real(0.5), 1.0), (Point::real(0.25), 1.0)]).unwrap();
        let img = push_forward(&f, &mu).unwrap();
        assert_eq!(img.terms(), &[(Point::real(0.5), 1.0), (Point::real(1.0), 1.0)]);
    }

    #[test]
    fn operator_norm_on_dyadic_sample() {
        let f = doubling();
        let pts: Vec<Point> = (0..=10).map(|n| Point::real(0.5f64.powi(n))).collect();
        let est = operator_norm_estimate(&f, &pts, usize::MAX).unwrap();
        assert!((est.value - 2.0).abs() < 1e-12);
        assert!(est.exhaustive);
        let zero = LipMap::to_basepoint(f.space().clone());
        assert_eq!(operator_norm_estimate(&zero, &pts, usize::MAX).unwrap().value, 0.0);
    }

    #[test]
    fn lattice_constant_scans_neighbours() {
        let b = LatticeBox::new(vec![-3, -3], vec![3, 3]).unwrap();
        let f = LipMap::lattice_linear(Arc::new(b.into()), vec![vec![0, 1], vec![1, 0]]).unwrap();
        let l = lip_constant(&f).unwrap();
        assert_eq!(l.value, 1.0);
        assert!(l.exact);
        let b = LatticeBox::new(vec![-3, -3], vec![3, 3]).unwrap();
        let g = LipMap::lattice_linear(Arc::new(b.into()), vec![vec![2, 1], vec![0, 1]]).unwrap();
        assert_eq!(lip_constant(&g).unwrap().value, 2.0);
    }

    #[test]
    fn spec_round_trip() {
        let spec: MapSpec =
            serde_json::from_str(r#"{"kind":"piecewise-linear","knots":[[0.0,0.0],[0.5,1.0],[1.0,1.0]]}"#).unwrap();
        let f = LipMap::from_spec(Arc::new(IntervalSpace::unit().into()), spec).unwrap();
        assert_eq!(lip_constant(&f).unwrap().value, 2.0);
        let spec: MapSpec = serde_json::from_str(r#"{"kind":"alpha-rule","rule":"block-cycle"}"#).unwrap();
        assert_eq!(spec, MapSpec::AlphaRule { rule: AlphaRule::BlockCycle });
        let spec: MapSpec = serde_json::from_str(r#"{"kind":"alpha-rule","rule":{"table":[0,2,1]}}"#).unwrap();
        assert_eq!(spec, MapSpec::AlphaRule { rule: AlphaRule::Table(vec![0, 2, 1]) });
    }
}
