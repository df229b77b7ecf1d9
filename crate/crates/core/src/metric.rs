//! Pointed metric spaces in four presentations: an explicit finite distance
//! matrix, `(N, d_alpha)`, closed real intervals and integer lattice boxes.
//!
//! Every space is immutable once built. Points are plain [`Point`] values;
//! a point is only meaningful together with the space it was checked
//! against, so every operation taking a point validates membership first.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{domain, Error, MetricViolation, Result};

/// Absolute tolerance for triangle checks on user-supplied matrices.
pub const USER_TRIANGLE_TOL: f64 = 1e-12;

/// A point of one of the supported spaces.
///
/// Finite and alpha spaces use indices, intervals use real coordinates and
/// lattice boxes use integer tuples. Real coordinates compare by exact
/// value; `-0.0` is normalized to `0.0` on construction.
#[derive(Debug, Clone)]
pub enum Point {
    Index(usize),
    Real(f64),
    Lattice(Vec<i64>),
}

impl Point {
    pub fn real(x: f64) -> Self {
        Point::Real(if x == 0.0 { 0.0 } else { x })
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            Point::Index(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Point::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_lattice(&self) -> Option<&[i64]> {
        match self {
            Point::Lattice(v) => Some(v),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Point::Index(_) => 0,
            Point::Real(_) => 1,
            Point::Lattice(_) => 2,
        }
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Index(a), Point::Index(b)) => a.cmp(b),
            (Point::Real(a), Point::Real(b)) => a.total_cmp(b),
            (Point::Lattice(a), Point::Lattice(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Point {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Point::Index(i) => i.hash(state),
            Point::Real(x) => x.to_bits().hash(state),
            Point::Lattice(v) => v.hash(state),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Index(i) => write!(f, "{i}"),
            Point::Real(x) => write!(f, "{x}"),
            Point::Lattice(v) => {
                write!(f, "(")?;
                for (k, c) in v.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Index(i) => s.serialize_u64(*i as u64),
            Point::Real(x) => s.serialize_f64(*x),
            Point::Lattice(v) => v.serialize(s),
        }
    }
}

/// Checks every metric axiom on a square matrix.
///
/// `tol` is the absolute slack allowed in the triangle inequality and the
/// symmetry check; pass `0.0` for generated matrices.
pub fn validate_finite_metric(matrix: &[Vec<f64>], tol: f64) -> Result<(), MetricViolation> {
    let n = matrix.len();
    if n == 0 {
        return Err(MetricViolation::Empty);
    }
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(MetricViolation::NotSquare { row: i, len: row.len(), expected: n });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let v = matrix[i][j];
            if !v.is_finite() {
                return Err(MetricViolation::NotFinite { i, j });
            }
            if i == j && v != 0.0 {
                return Err(MetricViolation::NonzeroDiagonal { i, value: v });
            }
            if v < 0.0 {
                return Err(MetricViolation::Negative { i, j, value: v });
            }
            if i != j && v == 0.0 {
                return Err(MetricViolation::ZeroOffDiagonal { i, j });
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if (matrix[i][j] - matrix[j][i]).abs() > tol {
                return Err(MetricViolation::Asymmetric { i, j });
            }
        }
    }
    for x in 0..n {
        for z in 0..n {
            for y in 0..n {
                let excess = matrix[x][z] - (matrix[x][y] + matrix[y][z]);
                if excess > tol {
                    return Err(MetricViolation::Triangle { x, y, z, excess });
                }
            }
        }
    }
    Ok(())
}

/// An explicit finite pointed metric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FiniteSpaceDoc", into = "FiniteSpaceDoc")]
pub struct FiniteSpace {
    n: usize,
    dist: Vec<f64>,
    basepoint: usize,
}

#[derive(Serialize, Deserialize)]
struct FiniteSpaceDoc {
    matrix: Vec<Vec<f64>>,
    #[serde(default)]
    basepoint: usize,
}

impl TryFrom<FiniteSpaceDoc> for FiniteSpace {
    type Error = Error;
    fn try_from(doc: FiniteSpaceDoc) -> Result<Self> {
        FiniteSpace::new(doc.matrix, doc.basepoint)
    }
}

impl From<FiniteSpace> for FiniteSpaceDoc {
    fn from(s: FiniteSpace) -> Self {
        FiniteSpaceDoc { matrix: s.matrix(), basepoint: s.basepoint }
    }
}

impl FiniteSpace {
    /// Builds a space from a user-supplied matrix, tolerating `1e-12`
    /// rounding in the triangle inequality.
    pub fn new(matrix: Vec<Vec<f64>>, basepoint: usize) -> Result<Self> {
        Self::with_tolerance(matrix, basepoint, USER_TRIANGLE_TOL)
    }

    /// Builds a space from a generated matrix; axioms are checked exactly.
    pub fn generated(matrix: Vec<Vec<f64>>, basepoint: usize) -> Result<Self> {
        Self::with_tolerance(matrix, basepoint, 0.0)
    }

    pub fn with_tolerance(matrix: Vec<Vec<f64>>, basepoint: usize, tol: f64) -> Result<Self> {
        validate_finite_metric(&matrix, tol)?;
        let n = matrix.len();
        if basepoint >= n {
            return Err(MetricViolation::BasepointOutOfRange { basepoint, len: n }.into());
        }
        let dist = matrix.into_iter().flatten().collect();
        Ok(FiniteSpace { n, dist, basepoint })
    }

    /// Restriction of an already validated metric; no checks are repeated.
    fn from_trusted(n: usize, dist: Vec<f64>, basepoint: usize) -> Self {
        debug_assert_eq!(dist.len(), n * n);
        FiniteSpace { n, dist, basepoint }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// `N` with the metric `d_alpha(i, j) = alpha_i + alpha_j` for distinct
/// nonzero `i, j` and `d_alpha(0, n) = alpha_n`.
///
/// Only the prefix `alpha_1..=alpha_N` is stored; `alpha_0` is never
/// materialized. Indices beyond the prefix are rejected, never extrapolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlphaSpaceDoc", into = "AlphaSpaceDoc")]
pub struct AlphaSpace {
    alpha: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AlphaSpaceDoc {
    alpha: Vec<f64>,
}

impl TryFrom<AlphaSpaceDoc> for AlphaSpace {
    type Error = Error;
    fn try_from(doc: AlphaSpaceDoc) -> Result<Self> {
        AlphaSpace::new(doc.alpha)
    }
}

impl From<AlphaSpace> for AlphaSpaceDoc {
    fn from(s: AlphaSpace) -> Self {
        AlphaSpaceDoc { alpha: s.alpha }
    }
}

impl AlphaSpace {
    /// `prefix[k]` is `alpha_{k+1}`.
    pub fn new(prefix: Vec<f64>) -> Result<Self> {
        if let Some(k) = prefix.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(domain(format!("alpha_{} = {} is not a positive real", k + 1, prefix[k])));
        }
        Ok(AlphaSpace { alpha: prefix })
    }

    /// Materializes `alpha_1..=alpha_len` from a rule.
    pub fn from_fn(len: usize, rule: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((1..=len).map(rule).collect())
    }

    /// Largest materialized index.
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.alpha.len() {
            return Err(Error::PrefixExhausted { index: n, len: self.alpha.len() });
        }
        Ok(self.alpha[n - 1])
    }

    pub fn prefix(&self) -> &[f64] {
        &self.alpha
    }

    pub fn d(&self, i: usize, j: usize) -> Result<f64> {
        Ok(match (i, j) {
            _ if i == j => 0.0,
            (0, j) => self.alpha(j)?,
            (i, 0) => self.alpha(i)?,
            (i, j) => self.alpha(i)? + self.alpha(j)?,
        })
    }
}

/// A closed interval `[lo, hi]` of the real line containing `0`.
/// Either endpoint may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntervalDoc", into = "IntervalDoc")]
pub struct IntervalSpace {
    lo: f64,
    hi: f64,
}

#[derive(Serialize, Deserialize)]
struct IntervalDoc {
    #[serde(with = "endpoint")]
    lo: f64,
    #[serde(with = "endpoint")]
    hi: f64,
}

impl TryFrom<IntervalDoc> for IntervalSpace {
    type Error = Error;
    fn try_from(doc: IntervalDoc) -> Result<Self> {
        IntervalSpace::new(doc.lo, doc.hi)
    }
}

impl From<IntervalSpace> for IntervalDoc {
    fn from(s: IntervalSpace) -> Self {
        IntervalDoc { lo: s.lo, hi: s.hi }
    }
}

/// JSON has no infinities; endpoints use the strings `"inf"` / `"-inf"`.
mod endpoint {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *x == f64::INFINITY {
            s.serialize_str("inf")
        } else if *x == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::custom(format!("bad interval endpoint {other:?}"))),
            },
        }
    }
}

impl IntervalSpace {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || !(lo <= 0.0 && 0.0 <= hi) {
            return Err(domain(format!("interval [{lo}, {hi}] does not contain 0")));
        }
        Ok(IntervalSpace { lo, hi })
    }

    pub fn unit() -> Self {
        IntervalSpace { lo: 0.0, hi: 1.0 }
    }

    pub fn half_line() -> Self {
        IntervalSpace { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && self.lo <= x && x <= self.hi
    }
}

/// An integer box `prod [lo_k, hi_k]` in `Z^d` containing the origin, with
/// the l1 distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeDoc", into = "LatticeDoc")]
pub struct LatticeBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct LatticeDoc {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl TryFrom<LatticeDoc> for LatticeBox {
    type Error = Error;
    fn try_from(doc: LatticeDoc) -> Result<Self> {
        LatticeBox::new(doc.lo, doc.hi)
    }
}

impl From<LatticeBox> for LatticeDoc {
    fn from(b: LatticeBox) -> Self {
        LatticeDoc { lo: b.lo, hi: b.hi }
    }
}

impl LatticeBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(domain("lattice bounds must be nonempty and of equal dimension"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(*l <= 0 && 0 <= *h)) {
            return Err(domain("lattice box must contain the origin"));
        }
        Ok(LatticeBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.dim() && p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(c, (l, h))| l <= c && c <= h)
    }

    /// Number of lattice points, saturating.
    pub fn cardinality(&self) -> u128 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l) as u128 + 1).fold(1u128, |a, b| a.saturating_mul(b))
    }

    /// All points in lexicographic order.
    pub fn points(&self) -> Vec<Vec<i64>> {
        self.points_strided(1)
    }

    /// Every `stride`-th point in lexicographic order, starting with `lo`.
    pub fn points_strided(&self, stride: usize) -> Vec<Vec<i64>> {
        let stride = stride.max(1);
        let mut out = Vec::new();
        let mut cur = self.lo.clone();
        let mut k = 0usize;
        loop {
            if k.is_multiple_of(stride) {
                out.push(cur.clone());
            }
            k += 1;
            // odometer step, last axis fastest
            let mut axis = self.dim();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < self.hi[axis] {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = self.lo[axis];
            }
        }
    }

    pub fn clamp(&self, p: &mut [i64]) {
        for (k, c) in p.iter_mut().enumerate() {
            *c = (*c).clamp(self.lo[k], self.hi[k]);
        }
    }
}

/// A pointed metric space in one of the four supported presentations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricSpace {
    Finite(FiniteSpace),
    Alpha(AlphaSpace),
    Interval(IntervalSpace),
    Lattice(LatticeBox),
}

/// A finite restriction of a space together with the ambient labels of its
/// points. `points[i]` is the ambient point behind index `i`.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub space: FiniteSpace,
    pub points: Vec<Point>,
}

impl Restriction {
    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.points.binary_search(p).ok()
    }
}

impl MetricSpace {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricSpace::Finite(_) => "finite",
            MetricSpace::Alpha(_) => "alpha",
            MetricSpace::Interval(_) => "interval",
            MetricSpace::Lattice(_) => "lattice",
        }
    }

    pub fn basepoint(&self) -> Point {
        match self {
            MetricSpace::Finite(s) => Point::Index(s.basepoint),
            MetricSpace::Alpha(_) => Point::Index(0),
            MetricSpace::Interval(_) => Point::Real(0.0),
            MetricSpace::Lattice(b) => Point::Lattice(vec![0; b.dim()]),
        }
    }

    pub fn is_basepoint(&self, p: &Point) -> bool {
        *p == self.basepoint()
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (MetricSpace::Finite(s), Point::Index(i)) => *i < s.n,
            (MetricSpace::Alpha(s), Point::Index(i)) => *i <= s.len(),
            (MetricSpace::Interval(s), Point::Real(x)) => s.contains(*x),
            (MetricSpace::Lattice(b), Point::Lattice(v)) => b.contains(v),
            _ => false,
        }
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(domain(format!("point {p} is not in this {} space", self.kind_name())))
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    /// Distance for points already known to belong to the space.
    pub(crate) fn distance_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (MetricSpace::Finite(s), Point::Index(i), Point::Index(j)) => s.d(*i, *j),
            (MetricSpace::Alpha(s), Point::Index(i), Point::Index(j)) => s.d(*i, *j).expect("alpha index checked"),
            (MetricSpace::Interval(_), Point::Real(a), Point::Real(b)) => (a - b).abs(),
            (MetricSpace::Lattice(_), Point::Lattice(a), Point::Lattice(b)) => {
                a.iter().zip(b).map(|(p, q)| (p - q).unsigned_abs()).sum::<u64>() as f64
            }
            _ => unreachable!("point kind checked against space"),
        }
    }

    /// `d(0, x)`.
    pub fn norm_of_point(&self, x: &Point) -> Result<f64> {
        self.distance(&self.basepoint(), x)
    }

    /// `sup_x d(0, x)`; infinite for unbounded intervals.
    pub fn radius(&self) -> f64 {
        match self {
            MetricSpace::Finite(s) => (0..s.n).map(|j| s.d(s.basepoint, j)).fold(0.0, f64::max),
            MetricSpace::Alpha(s) => s.alpha.iter().copied().fold(0.0, f64::max),
            MetricSpace::Interval(s) => s.hi.max(-s.lo),
            MetricSpace::Lattice(b) => {
                b.lo.iter().zip(&b.hi).map(|(l, h)| l.unsigned_abs().max(h.unsigned_abs())).sum::<u64>() as f64
            }
        }
    }

    /// All points when there are at most `limit` of them.
    pub fn enumerate(&self, limit: usize) -> Option<Vec<Point>> {
        match self {
            MetricSpace::Finite(s) if s.n <= limit => Some((0..s.n).map(Point::Index).collect()),
            MetricSpace::Alpha(s) if s.len() < limit => Some((0..=s.len()).map(Point::Index).collect()),
            MetricSpace::Lattice(b) if b.cardinality() <= limit as u128 => {
                Some(b.points().into_iter().map(Point::Lattice).collect())
            }
            _ => None,
        }
    }

    /// Parses a JSON point according to this space's presentation.
    pub fn parse_point(&self, v: &serde_json::Value) -> Result<Point> {
        let p = match self {
            MetricSpace::Finite(_) | MetricSpace::Alpha(_) => v
                .as_u64()
                .map(|i| Point::Index(i as usize))
                .ok_or_else(|| domain(format!("expected a point index, found {v}")))?,
            MetricSpace::Interval(_) => {
                v.as_f64().map(Point::real).ok_or_else(|| domain(format!("expected a real coordinate, found {v}")))?
            }
            MetricSpace::Lattice(_) => {
                let arr = v.as_array().ok_or_else(|| domain(format!("expected an integer tuple, found {v}")))?;
                let coords = arr
                    .iter()
                    .map(|c| c.as_i64().ok_or_else(|| domain(format!("non-integer lattice coordinate {c}"))))
                    .collect::<Result<Vec<_>>>()?;
                Point::Lattice(coords)
            }
        };
        self.check(&p)?;
        Ok(p)
    }

    /// Finite subspace on `points` plus the basepoint, sorted by point key.
    /// Distances are copied from the ambient metric unchanged.
    pub fn restrict_to_points(&self, points: &[Point]) -> Result<Restriction> {
        if points.is_empty() {
            return Err(domain("cannot restrict to an empty point list"));
        }
        for p in points {
            self.check(p)?;
        }
        let mut pts: Vec<Point> = points.to_vec();
        pts.push(self.basepoint());
        pts.sort();
        pts.dedup();
        let n = pts.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = self.distance_unchecked(&pts[i], &pts[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let base = pts.binary_search(&self.basepoint()).expect("basepoint inserted");
        Ok(Restriction { space: FiniteSpace::from_trusted(n, dist, base), points: pts })
    }
}

impl From<FiniteSpace> for MetricSpace {
    fn from(s: FiniteSpace) -> Self {
        MetricSpace::Finite(s)
    }
}

impl From<AlphaSpace> for MetricSpace {
    fn from(s: AlphaSpace) -> Self {
        MetricSpace::Alpha(s)
    }
}

impl From<IntervalSpace> for MetricSpace {
    fn from(s: IntervalSpace) -> Self {
        MetricSpace::Interval(s)
    }
}

impl From<LatticeBox> for MetricSpace {
    fn from(s: LatticeBox) -> Self {
        MetricSpace::Lattice(s)
    }
}
