//! Seeded invariant suite. The report holds no timings or addresses, so a
//! fixed seed reproduces it byte for byte.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{classify_orbit, interval_analyze, rigidity_check, ClassificationParams, IntervalCase, Verdict};
use crate::error::Result;
use crate::free::{pair, push_forward, FreeVector, Functional};
use crate::gallery::{self, Check, KSequence};
use crate::maps::{lip_constant, operator_norm_estimate, LipMap};
use crate::metric::{IntervalSpace, MetricSpace, Point};
use crate::norm::{norm_alpha, norm_flow, norm_flow_exact, norm_line};
use crate::random;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub tolerance: f64,
    pub cases: u64,
    pub failures: u64,
    pub max_error: f64,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    fn new(name: &str, tolerance: f64) -> Self {
        SuiteResult { name: name.into(), tolerance, cases: 0, failures: 0, max_error: 0.0, first_failure: None }
    }

    /// Records a case whose error must stay within the tolerance.
    fn error(&mut self, err: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        if err.is_nan() || err > self.tolerance {
            self.fail(what());
        }
        if err > self.max_error || err.is_nan() {
            self.max_error = err;
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.fail(what());
        }
    }

    fn checks(&mut self, prefix: &str, checks: &[Check]) {
        for c in checks {
            self.check(c.passed, || format!("{prefix}/{}: {}", c.name, c.detail));
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures += 1;
        self.first_failure.get_or_insert(msg);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

type SuiteFn = fn(&mut ChaCha8Rng, &mut SuiteResult) -> Result<()>;

const SUITES: &[(&str, f64, SuiteFn)] = &[
    ("isometry", 1e-9, isometry),
    ("operator_norm_identity", 1e-9, operator_norm_identity),
    ("backend_alpha", 1e-9, backend_alpha),
    ("backend_line", 1e-9, backend_line),
    ("exact_agreement", 1e-9, exact_agreement),
    ("norm_axioms", 1e-9, norm_axioms),
    ("duality", 1e-9, duality),
    ("push_forward_linearity", 1e-9, push_forward_linearity),
    ("lipschitz_composition", 1e-9, lipschitz_composition),
    ("classification", 0.0, classification),
    ("gallery", 0.0, gallery_checks),
];

/// Runs every suite; each draws from its own stream derived from `seed`.
pub fn run_selftest(seed: u64) -> SelftestReport {
    let suites: Vec<SuiteResult> = SUITES
        .par_iter()
        .enumerate()
        .map(|(k, &(name, tol, body))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut res = SuiteResult::new(name, tol);
            if let Err(e) = body(&mut rng, &mut res) {
                res.fail(format!("error: {e}"));
            }
            res
        })
        .collect();
    let passed = suites.iter().all(SuiteResult::passed);
    SelftestReport { seed, passed, suites }
}

fn indices(space: &MetricSpace) -> Vec<Point> {
    space.enumerate(usize::MAX).unwrap_or_default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn isometry(rng: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    for _ in 0..30 {
        let space = random::finite_space(rng, 20)?;
        let pts = indices(&space);
        for (i, x) in pts.iter().enumerate() {
            for y in &pts[i + 1..] {
                let mu =
                    FreeVector::delta(space.clone(), x.clone())?.sub(&FreeVector::delta(space.clone(), y.clone())?)?;
                let v = norm_flow(&mu)?.value;
                let d = space.distance(x, y)?;
                s.error((v - d).abs(), || format!("||delta({x}) - delta({y})|| = {v}, d = {d}"));
            }
        }
    }
    Ok(())
}

fn operator_norm_identity(rng: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    for _ in 0..20 {
        let space = random::finite_space(rng, 10)?;
        let f = random::table_map(rng, space.clone())?;
        let est = operator_norm_estimate(&f, &indices(&space), usize::MAX)?;
        let lip = lip_constant(&f)?.value;
        s.error(rel(est.value, lip), || format!("operator norm {} vs Lip {lip}", est.value));
    }
    Ok(())
}

fn backend_alpha(rng: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    for _ in 0..50 {
        let space = random::alpha_space(rng, 30, 0.1, 10.0)?;
        let k = rng.gen_range(1..=12);
        let mu = random::vector_on(rng, space.clone(), &indices(&space), k, 5.0)?;
        let (a, b) = (norm_flow(&mu)?.value, norm_alpha(&mu)?);
        s.error(rel(a, b), || format!("flow {a} vs alpha {b}"));
    }
    Ok(())
}

fn backend_line(rng: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    let space: Arc<MetricSpace> = Arc::new(MetricSpace::Interval(IntervalSpace::unit()));
    for _ in 0..50 {
        let k = rng.gen_range(1..=12);
        let pts = random::unit_points(rng, k);
        let mu = random::vector_on(rng, space.clone(), &pts, k, 5.0)?;
        let (a, b) = (norm_flow(&mu)?.value, norm_line(&mu)?);
        s.error(rel(a, b), || format!("flow {a} vs line {b}"));
    }
    Ok(())
}

fn exact_agreement(rng: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    for _ in 0..20 {
        let space = random::finite_space(rng, 8)?;
        let pts = indices(&space);
        // dyadic coefficients are exact in both arithmetics
        let terms: Vec<(Point, f64)> = pts.iter().map(|p| (p.clone(), rng.gen_range(-64..=64) as f64 / 8.0)).collect();
        let mu = FreeVector::new(space.clone(), terms)?;
        let (a, b) = (norm_flow(&mu)?.value, norm_flow_exact(&mu)?.to_f64());
        s.error(rel(a, b), || format!("float {a} vs rational {b}"));
    }
    Ok(())
}

fn norm_axioms(rng: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    for _ in 0..30 {
        let space = random::finite_space(rng, 15)?;
        let pts = indices(&space);
        let a = random::vector_on(rng, space.clone(), &pts, 6, 3.0)?;
        let b = random::vector_on(rng, space.clone(), &pts, 6, 3.0)?;
        let c: f64 = rng.gen_range(-4.0..4.0);
        let (na, nb) = (norm_flow(&a)?.value, norm_flow(&b)?.value);
        let nab = norm_flow(&a.add(&b)?)?.value;
        s.error((nab - na - nb).max(0.0) / (1.0 + na + nb), || format!("triangle: {nab} > {na} + {nb}"));
        let nca = norm_flow(&a.scale(c))?.value;
        s.error(rel(nca, c.abs() * na), || format!("homogeneity: {nca} vs |{c}| * {na}"));
        s.error(norm_flow(&a.sub(&a)?)?.value, || "||a - a|| != 0".into());
    }
    Ok(())
}

fn duality(rng: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    for _ in 0..30 {
        let space = random::finite_space(rng, 15)?;
        let pts = indices(&space);
        let mu = random::vector_on(rng, space.clone(), &pts, 8, 3.0)?;
        let res = norm_flow(&mu)?;
        let verified = res.verify(&space, s.tolerance);
        s.check(verified.is_ok(), || format!("certificate: {}", verified.unwrap_err()));
        let values = pts.iter().filter(|p| !space.is_basepoint(p)).map(|p| (p.clone(), rng.gen_range(-10.0..10.0)));
        let phi = Functional::from_values(space.clone(), values.collect())?;
        let lhs = pair(&phi, &mu)?.abs();
        let rhs = phi.lip_bound() * res.value;
        s.error((lhs - rhs).max(0.0) / (1.0 + rhs), || format!("|<phi, mu>| = {lhs} > Lip(phi) ||mu|| = {rhs}"));
        let dist = pair(&Functional::distance_to_base(space.clone()), &mu)?.abs();
        s.error((dist - res.value).max(0.0) / (1.0 + res.value), || format!("<d(0,.), mu> = {dist} > {}", res.value));
    }
    Ok(())
}

fn push_forward_linearity(rng: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    for _ in 0..30 {
        let space = random::finite_space(rng, 12)?;
        let pts = indices(&space);
        let f = random::table_map(rng, space.clone())?;
        let g = random::table_map(rng, space.clone())?;
        let a = random::vector_on(rng, space.clone(), &pts, 5, 3.0)?;
        let b = random::vector_on(rng, space.clone(), &pts, 5, 3.0)?;
        let c: f64 = rng.gen_range(-3.0..3.0);
        let lhs = push_forward(&f, &FreeVector::linear_combine(1.0, &a, c, &b)?)?;
        let rhs = FreeVector::linear_combine(1.0, &push_forward(&f, &a)?, c, &push_forward(&f, &b)?)?;
        s.error(norm_flow(&lhs.sub(&rhs)?)?.value, || "f_hat(a + c b) != f_hat(a) + c f_hat(b)".into());
        let comp = push_forward(&f.then(&g)?, &a)?;
        let seq = push_forward(&g, &push_forward(&f, &a)?)?;
        s.error(norm_flow(&comp.sub(&seq)?)?.value, || "(g o f)_hat != g_hat f_hat".into());
        let lip = lip_constant(&f)?.value;
        let (na, nfa) = (norm_flow(&a)?.value, norm_flow(&push_forward(&f, &a)?)?.value);
        s.error((nfa - lip * na).max(0.0) / (1.0 + lip * na), || format!("||f_hat a|| = {nfa} > Lip(f) ||a||"));
    }
    Ok(())
}

fn lipschitz_composition(rng: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    for _ in 0..30 {
        let space = random::finite_space(rng, 12)?;
        let f = random::table_map(rng, space.clone())?;
        let g = random::table_map(rng, space)?;
        let (lf, lg) = (lip_constant(&f)?.value, lip_constant(&g)?.value);
        let lgf = lip_constant(&f.then(&g)?)?.value;
        s.error((lgf - lf * lg).max(0.0) / (1.0 + lf * lg), || format!("Lip(g o f) = {lgf} > {lf} * {lg}"));
    }
    for (name, f) in gallery::interval_maps() {
        let l1 = lip_constant(&f)?.value;
        let l3 = lip_constant(&f.power(3))?.value;
        s.error((l3 - l1.powi(3)).max(0.0), || format!("{name}: Lip(f^3) = {l3} > Lip(f)^3"));
    }
    Ok(())
}

fn classification(rng: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    let params = ClassificationParams::with_horizon(1000);
    let expected = [
        ("identity", IntervalCase::NoExpansion),
        ("translation", IntervalCase::UnboundedComponent),
        ("doubling", IntervalCase::Overshoot),
    ];
    for ((name, f), (want_name, want)) in gallery::interval_maps().into_iter().zip(expected) {
        debug_assert_eq!(name, want_name);
        let a = interval_analyze(&f, 30)?;
        s.check(a.case == want, || format!("{name}: case {:?}, expected {want:?}", a.case));
        if let Some(x) = a.certificate {
            let v = classify_orbit(&f, &Point::real(x), &params)?.verdict;
            s.check(v == Verdict::EscapingEvidence, || format!("{name}: certificate {x} classified {v:?}"));
        }
        for k in 1..=3 {
            let sample: Vec<Point> = random::unit_points(rng, 10);
            let rep = crate::dynamics::power_equivalence_check(&f, k, &sample, &params)?;
            s.check(rep.disagreements.is_empty(), || format!("{name}: f vs f^{k} disagree at {:?}", rep.disagreements));
        }
    }
    for q in 2..=12 {
        let (space, f) = gallery::circle_rotation_space(q)?;
        let q = q as u64;
        let rep = rigidity_check(&f, &indices(&space), &[q, 2 * q, 3 * q], 1.0, 0.0)?;
        s.check(rep.passed, || format!("rotation of order {q}: {:?}", rep.failure));
    }
    let space = gallery::block_cycle_space(5)?;
    let f = LipMap::alpha(space.clone(), crate::maps::AlphaRule::BlockCycle)?;
    let rep = rigidity_check(&f, &indices(&space), &[1, 2, 3], 1.0, 0.0)?;
    s.check(matches!(rep.failure, Some(crate::dynamics::RigidityFailure::LipschitzBlowup { .. })), || {
        format!("block cycle: {:?}", rep.failure)
    });
    Ok(())
}

fn gallery_checks(_: &mut ChaCha8Rng, s: &mut SuiteResult) -> Result<()> {
    s.checks("doubling", &gallery::doubling_experiment(40, 30)?.checks);
    s.checks("backward_shift", &gallery::backward_shift_experiment(20, 100)?.checks);
    s.checks("alpha", &gallery::alpha_prop41(&KSequence::Auto, 7)?.checks);
    s.checks("block_cycle", &gallery::block_cycle_experiment(6, 60, 6)?.checks);
    let even = gallery::kronecker_return_times(&[PI], 1e-9, 100)?;
    s.check(even == (1..=50).map(|k| 2 * k).collect::<Vec<_>>(), || format!("angle pi: {even:?}"));
    let sevens = gallery::kronecker_return_times(&[2.0 * PI * 3.0 / 7.0], 1e-9, 1000)?;
    s.check(sevens == (1..=142).map(|k| 7 * k).collect::<Vec<_>>(), || format!("angle 6 pi / 7: {sevens:?}"));
    Ok(())
}
