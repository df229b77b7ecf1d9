//! Seeded generators of spaces, maps and vectors for property checks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::free::FreeVector;
use crate::maps::LipMap;
use crate::metric::{AlphaSpace, FiniteSpace, MetricSpace, Point};

/// Shortest-path metric of a random connected graph with integer weights
/// in `1..=10`. Integer distances keep every check exact.
pub fn graph_space<R: Rng>(rng: &mut R, n: usize) -> Result<FiniteSpace> {
    let inf = f64::INFINITY;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    // random spanning tree, then extra chords
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for k in 1..n {
        let (a, b) = (order[k], order[rng.gen_range(0..k)]);
        let w = rng.gen_range(1..=10) as f64;
        d[a][b] = w;
        d[b][a] = w;
    }
    for _ in 0..n {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            let w = rng.gen_range(1..=10) as f64;
            d[a][b] = d[a][b].min(w);
            d[b][a] = d[a][b];
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteSpace::generated(d, 0)
}

/// l1 distances between distinct random integer points of `Z^3`.
pub fn l1_space<R: Rng>(rng: &mut R, n: usize) -> Result<FiniteSpace> {
    let mut pts: Vec<[i64; 3]> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = [rng.gen_range(-8..=8), rng.gen_range(-8..=8), rng.gen_range(-8..=8)];
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let d = pts
        .iter()
        .map(|a| pts.iter().map(|b| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<i64>() as f64).collect())
        .collect();
    FiniteSpace::generated(d, 0)
}

/// A validated finite space with `2..=max_points` points, alternating
/// between the two constructions.
pub fn finite_space<R: Rng>(rng: &mut R, max_points: usize) -> Result<Arc<MetricSpace>> {
    let n = rng.gen_range(2..=max_points.max(2));
    let s = if rng.gen_bool(0.5) { graph_space(rng, n)? } else { l1_space(rng, n)? };
    Ok(Arc::new(MetricSpace::Finite(s)))
}

/// A random basepoint-fixing self-map of a finite space.
pub fn table_map<R: Rng>(rng: &mut R, space: Arc<MetricSpace>) -> Result<LipMap> {
    let MetricSpace::Finite(s) = &*space else {
        return Err(crate::error::domain("table maps need a finite space"));
    };
    let n = s.len();
    let base = s.basepoint();
    let table = (0..n).map(|i| if i == base { base } else { rng.gen_range(0..n) }).collect();
    LipMap::finite_table(space, table)
}

/// `alpha_n` uniform in `[lo, hi]`.
pub fn alpha_space<R: Rng>(rng: &mut R, len: usize, lo: f64, hi: f64) -> Result<Arc<MetricSpace>> {
    Ok(Arc::new(MetricSpace::Alpha(AlphaSpace::new((0..len).map(|_| rng.gen_range(lo..=hi)).collect())?)))
}

/// Coefficients uniform in `[-scale, scale]` on `k` distinct points drawn
/// from `points`.
pub fn vector_on<R: Rng>(
    rng: &mut R,
    space: Arc<MetricSpace>,
    points: &[Point],
    k: usize,
    scale: f64,
) -> Result<FreeVector> {
    let chosen: Vec<&Point> = points.choose_multiple(rng, k.min(points.len())).collect();
    FreeVector::new(space, chosen.into_iter().map(|p| (p.clone(), rng.gen_range(-scale..=scale))))
}

/// `k` distinct points of `(0, 1]` on the grid of multiples of `2^-20`.
pub fn unit_points<R: Rng>(rng: &mut R, k: usize) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(k);
    while out.len() < k {
        let p = Point::real(rng.gen_range(1..=1u32 << 20) as f64 / (1u32 << 20) as f64);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}
