//! Norms and gallery quantities against independently computed values.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::sync::Arc;

use freelip::gallery::{self, KSequence};
use freelip::maps::triangular_block;
use freelip::{
    lip_constant, norm_alpha, norm_flow, norm_flow_exact, norm_line, AlphaRule, AlphaSpace, FiniteSpace, FreeVector,
    IntervalSpace, LipMap, MetricSpace, Point,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Maximizes `sum c_i phi_i` over 1-Lipschitz `phi` with `phi_0 = 0` by
/// enumerating vertices: at an optimal vertex the tight constraints span a
/// tree through 0, so `phi` is a signed sum of distances along it.
fn dual_by_vertices(d: &[Vec<f64>], c: &[f64]) -> f64 {
    let n = d.len();
    let k = n - 1;
    let mut best = f64::NEG_INFINITY;
    let mut parent = vec![0usize; n];
    let total = n.pow(k as u32);
    for code in 0..total {
        let mut x = code;
        for p in parent.iter_mut().skip(1) {
            *p = x % n;
            x /= n;
        }
        // every node must reach 0 without revisiting
        let rooted = (1..n).all(|i| {
            let mut v = i;
            for _ in 0..n {
                if v == 0 {
                    return true;
                }
                v = parent[v];
            }
            false
        });
        if !rooted {
            continue;
        }
        for signs in 0..(1u32 << k) {
            let mut phi = vec![f64::NAN; n];
            phi[0] = 0.0;
            fn resolve(i: usize, parent: &[usize], signs: u32, d: &[Vec<f64>], phi: &mut [f64]) -> f64 {
                if phi[i].is_nan() {
                    let up = resolve(parent[i], parent, signs, d, phi);
                    let s = if signs >> (i - 1) & 1 == 1 { 1.0 } else { -1.0 };
                    phi[i] = up + s * d[i][parent[i]];
                }
                phi[i]
            }
            for i in 1..n {
                resolve(i, &parent, signs, d, &mut phi);
            }
            let feasible = (0..n).all(|i| (0..n).all(|j| (phi[i] - phi[j]).abs() <= d[i][j] + 1e-12));
            if feasible {
                best = best.max(c.iter().zip(&phi).map(|(a, b)| a * b).sum());
            }
        }
    }
    best
}

fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    freelip::random::graph_space(rng, n).unwrap().matrix()
}

#[test]
fn flow_matches_dual_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..60 {
        let n = rng.gen_range(2..=5);
        let d = random_metric(&mut rng, n);
        let space: Arc<MetricSpace> = Arc::new(FiniteSpace::new(d.clone(), 0).unwrap().into());
        let c: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { rng.gen_range(-3.0..3.0) }).collect();
        let mu = FreeVector::new(space, (1..n).map(|i| (Point::Index(i), c[i]))).unwrap();
        let want = dual_by_vertices(&d, &c);
        let got = norm_flow(&mu).unwrap().value;
        assert!((got - want).abs() <= 1e-9 * (1.0 + want), "trial {trial}: flow {got} vs vertices {want}");
    }
}

#[test]
fn tree_metric_closed_form() {
    // on a weighted tree the norm is sum_e w_e |mass below e|
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..40 {
        let n = rng.gen_range(2..=25);
        let parent: Vec<usize> = (0..n).map(|i| if i == 0 { 0 } else { rng.gen_range(0..i) }).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=9) as f64).collect();
        let depth = |mut i: usize| {
            let mut path = vec![];
            while i != 0 {
                path.push(i);
                i = parent[i];
            }
            path
        };
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let (pi, pj) = (depth(i), depth(j));
                d[i][j] = pi
                    .iter()
                    .filter(|v| !pj.contains(v))
                    .chain(pj.iter().filter(|v| !pi.contains(v)))
                    .map(|&v| w[v])
                    .sum();
            }
        }
        let c: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { rng.gen_range(-5.0..5.0) }).collect();
        let mut below = c.clone();
        for i in (1..n).rev() {
            let b = below[i];
            below[parent[i]] += b;
        }
        let want: f64 = (1..n).map(|i| w[i] * below[i].abs()).sum();
        let space: Arc<MetricSpace> = Arc::new(FiniteSpace::new(d, 0).unwrap().into());
        let mu = FreeVector::new(space, (1..n).map(|i| (Point::Index(i), c[i]))).unwrap();
        let got = norm_flow(&mu).unwrap().value;
        assert!((got - want).abs() <= 1e-9 * (1.0 + want), "{got} vs {want}");
    }
}

#[test]
fn line_and_alpha_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let unit: Arc<MetricSpace> = Arc::new(IntervalSpace::unit().into());
    for _ in 0..50 {
        let mut pts: Vec<(f64, f64)> =
            (0..rng.gen_range(1..10)).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(-2.0..2.0))).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        // integral of |sum_{x_i > t} c_i| over [0, 1]
        let mut want = 0.0;
        let mut prev = 0.0;
        let mut tail: f64 = pts.iter().map(|p| p.1).sum();
        for &(x, c) in &pts {
            want += tail.abs() * (x - prev);
            tail -= c;
            prev = x;
        }
        let mu = FreeVector::new(unit.clone(), pts.iter().map(|&(x, c)| (Point::real(x), c))).unwrap();
        assert!((norm_line(&mu).unwrap() - want).abs() <= 1e-12 * (1.0 + want));
        assert!((norm_flow(&mu).unwrap().value - want).abs() <= 1e-9 * (1.0 + want));
    }
    let alpha: Vec<f64> = (0..20).map(|_| rng.gen_range(0.5..4.0)).collect();
    let space: Arc<MetricSpace> = Arc::new(AlphaSpace::new(alpha.clone()).unwrap().into());
    let c: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let want: f64 = alpha.iter().zip(&c).map(|(a, l)| a * l.abs()).sum();
    let mu = FreeVector::new(space, (1..=20).map(|n| (Point::Index(n), c[n - 1]))).unwrap();
    assert!((norm_alpha(&mu).unwrap() - want).abs() <= 1e-12 * want);
    assert!((norm_flow(&mu).unwrap().value - want).abs() <= 1e-9 * want);
}

#[test]
fn exact_mode_gives_rational_value() {
    // three points on a path 0 - 1 - 2 with unit edges; 1/2 d(1) - 3/4 d(2)
    let d = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
    let space: Arc<MetricSpace> = Arc::new(FiniteSpace::new(d, 0).unwrap().into());
    let mu = FreeVector::new(space, [(Point::Index(1), 0.5), (Point::Index(2), -0.75)]).unwrap();
    // mass 3/4 leaves 2 for 1 and 0: 3/4 * 1 (edge 2-1) + 1/4 * 1 (edge 1-0)
    assert_eq!(norm_flow_exact(&mu).unwrap().value.to_string(), "1");
}

#[test]
fn doubling_profile_closed_form() {
    let n = 40;
    let rep = gallery::doubling_experiment(n, 30).unwrap();
    for (k, v) in rep.profile.iter().enumerate() {
        let want = (k + 1) as f64 - 2f64.powi(k as i32 - n as i32);
        assert!((v - want).abs() <= 1e-12, "k = {k}: {v} vs {want}");
    }
}

#[test]
fn block_cycle_lipschitz_powers() {
    let space = gallery::block_cycle_space(22).unwrap();
    let f = LipMap::alpha(space, AlphaRule::BlockCycle).unwrap();
    for n in 1..=20u32 {
        assert_eq!(lip_constant(&f.power(n as u64)).unwrap().value, 2f64.powi(n as i32), "n = {n}");
    }
    assert_eq!(triangular_block(10), (10, 4));
}

#[test]
fn prop41_twelve_blocks() {
    let rep = gallery::alpha_prop41(&KSequence::Auto, 12).unwrap();
    assert_eq!(rep.prefix_len, 1_611_051);
    for c in &rep.checks {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
}

#[test]
fn kronecker_golden_rotation() {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    // returns happen at Fibonacci denominators; 1/phi^14 is the first
    // below 0.01 / (2 pi)
    let times = gallery::kronecker_return_times(&[2.0 * PI / phi], 0.01, 1000).unwrap();
    assert_eq!(times.first(), Some(&377));
    let times = gallery::kronecker_return_times(&[PI, 2.0 * PI / 3.0], 1e-9, 60).unwrap();
    assert_eq!(times, vec![6, 12, 18, 24, 30, 36, 42, 48, 54, 60]);
}
