//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero when any
//! criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use freelip::dynamics::{power_equivalence_check, rigidity_check, RigidityFailure};
use freelip::gallery::{self, KSequence};
use freelip::maps::{sample_points, triangular_block};
use freelip::{
    classify_orbit, interval_analyze, iterate_vector, lip_constant, norm_alpha, norm_flow, norm_line,
    operator_norm_estimate, orbit_norm_profile, random, AlphaRule, Backend, ClassificationParams, FreeVector,
    IntervalCase, IntervalSpace, LipMap, MetricSpace, Point, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn points(space: &MetricSpace) -> Vec<Point> {
    sample_points(space, usize::MAX).expect("enumerable space")
}

fn ensure(ok: bool, pass: String, fail: String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail)
    }
}

fn isometry() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for _ in 0..100 {
        let space = random::finite_space(&mut rng, 30).map_err(|e| e.to_string())?;
        let pts = points(&space);
        for (i, x) in pts.iter().enumerate() {
            for y in &pts[i + 1..] {
                let mu = FreeVector::new(space.clone(), [(x.clone(), 1.0), (y.clone(), -1.0)]).unwrap();
                let v = norm_flow(&mu).unwrap().value;
                worst = worst.max((v - space.distance(x, y).unwrap()).abs());
                pairs += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("{pairs} pairs on 100 spaces, max error {worst:e}, {secs:.2} s");
    ensure(worst <= 1e-9 && secs < 10.0, msg.clone(), msg)
}

fn operator_norm() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let space = random::finite_space(&mut rng, 30).unwrap();
        let f = random::table_map(&mut rng, space.clone()).unwrap();
        let est = operator_norm_estimate(&f, &points(&space), usize::MAX).unwrap();
        if !est.exhaustive {
            return Err("enumeration was truncated".into());
        }
        worst = worst.max((est.value - lip_constant(&f).unwrap().value).abs());
    }
    let msg = format!("50 maps, max |estimate - Lip| = {worst:e}");
    ensure(worst <= 1e-9, msg.clone(), msg)
}

fn backend_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let space = random::alpha_space(&mut rng, 60, 0.01, 100.0).unwrap();
        let k = rng.gen_range(1..=30);
        let mu = random::vector_on(&mut rng, space.clone(), &points(&space)[1..], k, 10.0).unwrap();
        let (a, b) = (norm_flow(&mu).unwrap().value, norm_alpha(&mu).unwrap());
        worst = worst.max((a - b).abs() / (1.0 + b));
    }
    let unit: Arc<MetricSpace> = Arc::new(IntervalSpace::unit().into());
    for _ in 0..200 {
        let k = rng.gen_range(1..=30);
        let pts = random::unit_points(&mut rng, k);
        let mu = random::vector_on(&mut rng, unit.clone(), &pts, k, 10.0).unwrap();
        let (a, b) = (norm_flow(&mu).unwrap().value, norm_line(&mu).unwrap());
        worst = worst.max((a - b).abs() / (1.0 + b));
    }
    let msg = format!("200 alpha + 200 interval vectors, max relative gap {worst:e}");
    ensure(worst <= 1e-9, msg.clone(), msg)
}

fn alpha_generator() -> Outcome {
    let rep = gallery::alpha_prop41(&KSequence::Auto, 12).map_err(|e| e.to_string())?;
    let ends_exact = rep.block_ends.iter().enumerate().all(|(i, v)| *v == (i + 1) as f64);
    let ratio_ok = rep.checks.iter().all(|c| c.passed);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_ratio: f64 = 0.0;
    let mut bound_ok = true;
    for _ in 0..100 {
        let top = rng.gen_range(1..=200);
        let lambda: Vec<(usize, f64)> = (1..=top).map(|n| (n, rng.gen_range(-1.0..1.0))).collect();
        let fs = gallery::forward_shift_experiment(&rep.space, &lambda, 0, Some(&rep.scheme)).unwrap();
        bound_ok &= fs.checks.iter().all(|c| c.passed);
        let worst = fs.subsequence.iter().map(|s| s.2).fold(0.0, f64::max);
        worst_ratio = worst_ratio.max(worst / fs.l1);
    }
    let msg = format!(
        "prefix {} (k = {:?}), alpha(s_m) = m: {ends_exact}, max ratio {}, worst ||f^(s_m) mu|| / ||lambda||_1 = {worst_ratio}",
        rep.prefix_len,
        &rep.scheme.k[1..],
        rep.max_ratio
    );
    ensure(ends_exact && ratio_ok && bound_ok, msg.clone(), msg)
}

fn block_cycle() -> Outcome {
    let blocks = 10;
    let space = gallery::block_cycle_space(22).unwrap();
    let f = LipMap::alpha(space.clone(), AlphaRule::BlockCycle).unwrap();
    let s10 = blocks * (blocks + 1) / 2;
    let mut period_mismatch = Vec::new();
    for m in 1..s10 {
        let (s, _) = triangular_block(m);
        let mut p = 1;
        let mut q = f.apply(&Point::Index(m)).unwrap();
        while q != Point::Index(m) {
            q = f.apply(&q).unwrap();
            p += 1;
        }
        if p != s {
            period_mismatch.push((m, p, s));
        }
    }
    let lips: Vec<f64> = (1..=20).map(|n| lip_constant(&f.power(n)).unwrap().value).collect();
    let lip_ok = lips.iter().enumerate().all(|(i, v)| *v == 2f64.powi(i as i32 + 1));
    let mu = gallery::block_cycle_vector(space.clone(), blocks).unwrap();
    let profile = orbit_norm_profile(&f, &mu, 4 * s10 as u64, Backend::Alpha).unwrap();
    let not_increasing = profile.windows(2).enumerate().filter(|(k, w)| *k >= s10 && w[1] <= w[0]).count();
    let msg = format!(
        "period = s_n fails at {} of {} points (first (m, period, s_n) = {:?}); Lip(f^n) = 2^n for n <= 20: {lip_ok}; \
         profile not strictly increasing at {not_increasing} of {} steps beyond s_10",
        period_mismatch.len(),
        s10 - 1,
        period_mismatch.first(),
        profile.len() - 1 - s10
    );
    ensure(period_mismatch.is_empty() && lip_ok && not_increasing == 0, msg.clone(), msg)
}

fn doubling() -> Outcome {
    let n = 40;
    let f = gallery::doubling_map();
    let space = f.space().clone();
    let mu = gallery::dyadic_vector(space.clone(), n).unwrap();
    let mut structural = true;
    let mut worst: f64 = 0.0;
    for k in 0..=30 {
        let img = iterate_vector(&f, &mu, k as u64).unwrap();
        let mut want = gallery::dyadic_vector(space.clone(), n - k).unwrap();
        if k > 0 {
            want = want.add(&FreeVector::new(space.clone(), [(Point::real(1.0), k as f64)]).unwrap()).unwrap();
        }
        structural &= img.terms() == want.terms();
        let v = norm_flow(&img).unwrap().value;
        worst = worst.max((v - ((k + 1) as f64 - 2f64.powi(k as i32 - n as i32))).abs());
    }
    let msg = format!("f^k(mu_40) = k delta(1) + mu_(40-k) for k <= 30: {structural}; max profile error {worst:e}");
    ensure(structural && worst <= 1e-12, msg.clone(), msg)
}

fn interval_analyzer() -> Outcome {
    let maps = gallery::interval_maps();
    let cases: Vec<IntervalCase> = maps.iter().map(|(_, f)| interval_analyze(f, 40).unwrap().case).collect();
    let translation = interval_analyze(&maps[1].1, 40).unwrap();
    let params = ClassificationParams::with_horizon(1000);
    let escape = translation.certificate.map(|x| classify_orbit(&maps[1].1, &Point::real(x), &params).unwrap().verdict);
    let doubling = interval_analyze(&maps[2].1, 40).unwrap();
    let support: Vec<f64> = gallery::dyadic_vector(maps[2].1.space().clone(), 40)
        .unwrap()
        .support()
        .iter()
        .map(|p| p.as_real().unwrap())
        .collect();
    let mut seq = doubling.sequence.clone();
    seq.sort_by(f64::total_cmp);
    let backward_ok = seq == support;
    let msg = format!(
        "cases {cases:?}; x+1 certificate {:?} -> {escape:?}; doubling backward orbit matches 2^-n support: {backward_ok}",
        translation.certificate
    );
    let ok = cases == [IntervalCase::NoExpansion, IntervalCase::UnboundedComponent, IntervalCase::Overshoot]
        && escape == Some(Verdict::EscapingEvidence)
        && backward_ok;
    ensure(ok, msg.clone(), msg)
}

fn power_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = ClassificationParams::with_horizon(1000);
    let mut rows = 0;
    let mut disagreements = Vec::new();
    for (name, f) in gallery::interval_maps() {
        let hi = match &**f.space() {
            MetricSpace::Interval(iv) if iv.hi().is_finite() => iv.hi(),
            _ => 10.0,
        };
        let sample: Vec<Point> = (0..100).map(|_| Point::real(rng.gen_range(0.0..=hi))).collect();
        for k in 1..=5 {
            let rep = power_equivalence_check(&f, k, &sample, &params).unwrap();
            rows += rep.rows.len();
            disagreements.extend(rep.disagreements.into_iter().map(|p| (name, k, p)));
        }
    }
    let msg = format!("{rows} (point, k) rows over 3 maps, {} escape disagreements", disagreements.len());
    ensure(disagreements.is_empty(), msg.clone(), format!("{msg}: {:?}", &disagreements[..disagreements.len().min(5)]))
}

fn rigidity() -> Outcome {
    let mut circle_ok = true;
    for q in 2..=12usize {
        let (space, f) = gallery::circle_rotation_space(q).unwrap();
        let q = q as u64;
        let rep = rigidity_check(&f, &points(&space), &[q, 2 * q, 3 * q], 1.0, 0.0).unwrap();
        circle_ok &= rep.passed && rep.certificate.return_errors.iter().all(|e| *e == 0.0);
    }
    let space = gallery::block_cycle_space(10).unwrap();
    let f = LipMap::alpha(space.clone(), AlphaRule::BlockCycle).unwrap();
    let rep = rigidity_check(&f, &points(&space), &[2, 6, 12, 60], 1.0, 0.0).unwrap();
    let blowup = matches!(rep.failure, Some(RigidityFailure::LipschitzBlowup { .. }));
    let msg = format!("rotations q = 2..=12 rigid at q, 2q, 3q: {circle_ok}; block cycle: {:?}", rep.failure);
    ensure(circle_ok && blowup, msg.clone(), msg)
}

fn kronecker() -> Outcome {
    let half = gallery::kronecker_return_times(&[PI], 1e-9, 1000).unwrap();
    let sevenths = gallery::kronecker_return_times(&[2.0 * PI * 3.0 / 7.0], 1e-9, 1000).unwrap();
    let evens: Vec<u64> = (1..=500).map(|k| 2 * k).collect();
    let sevens: Vec<u64> = (1..=142).map(|k| 7 * k).collect();
    let msg = format!("{{pi}}: {} times, all even; {{6 pi / 7}}: {} times, multiples of 7", half.len(), sevenths.len());
    ensure(half == evens && sevenths == sevens, msg.clone(), format!("{half:?} / {sevenths:?}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_freelip"))
            .args(["selftest", "--seed", "20240601", "--out"])
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("selftest exited with {status}"));
        }
        reports.push(std::fs::read(out.join("selftest.json")).map_err(|e| e.to_string())?);
    }
    let msg = format!("two runs, {} bytes each, identical: {}", reports[0].len(), reports[0] == reports[1]);
    ensure(reports[0] == reports[1], msg.clone(), msg)
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("isometry", isometry),
        ("operator-norm identity", operator_norm),
        ("backend agreement", backend_agreement),
        ("alpha generator", alpha_generator),
        ("block-cycle map", block_cycle),
        ("doubling structure", doubling),
        ("interval analyzer", interval_analyzer),
        ("power equivalence", power_equivalence),
        ("rigidity", rigidity),
        ("kronecker search", kronecker),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
