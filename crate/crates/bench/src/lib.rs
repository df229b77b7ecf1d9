//! Seeded fixtures shared by the benchmarks.

use std::sync::Arc;

use freelip::{random, FreeVector, IntervalSpace, MetricSpace, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A vector supported on every point of a random `n`-point graph metric.
pub fn finite_vector(n: usize, seed: u64) -> FreeVector {
    let mut r = rng(seed);
    let space: Arc<MetricSpace> = Arc::new(random::graph_space(&mut r, n).expect("valid metric").into());
    let pts: Vec<Point> = (1..n).map(Point::Index).collect();
    random::vector_on(&mut r, space, &pts, n - 1, 1.0).expect("valid vector")
}

/// `support` random coefficients on an alpha space of length `len`.
pub fn alpha_vector(len: usize, support: usize, seed: u64) -> FreeVector {
    let mut r = rng(seed);
    let space = random::alpha_space(&mut r, len, 0.1, 10.0).expect("valid alpha");
    let pts: Vec<Point> = (1..=len).map(Point::Index).collect();
    random::vector_on(&mut r, space, &pts, support, 1.0).expect("valid vector")
}

/// `k` random coefficients on random points of `[0, 1]`.
pub fn line_vector(k: usize, seed: u64) -> FreeVector {
    let mut r = rng(seed);
    let space: Arc<MetricSpace> = Arc::new(IntervalSpace::unit().into());
    let pts = random::unit_points(&mut r, k);
    random::vector_on(&mut r, space, &pts, k, 1.0).expect("valid vector")
}
