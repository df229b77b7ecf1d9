//! `freelip`: load spaces, maps and vectors from JSON files, compute norms,
//! orbits and classifications, and run the gallery experiments.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use freelip::dynamics::rigidity_check;
use freelip::gallery::{self, Check, KSequence};
use freelip::io;
use freelip::maps::{orbit, sample_points};
use freelip::{
    classify_orbit, interval_analyze, norm_flow, norm_flow_exact, orbit_norm_profile, run_selftest, Backend,
    ClassificationParams, MetricSpace, Point,
};
use serde_json::{json, Value};

const OUT_ENV: &str = "FREELIP_OUT";

/// Largest space enumerated as a default sample.
const SAMPLE_LIMIT: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "freelip", version, about = "Lipschitz-free space norms and orbit diagnostics")]
struct RunConfig {
    /// Directory for report files; defaults to $FREELIP_OUT. Without either,
    /// reports go to stdout only.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Free-space norm of a finitely supported vector.
    Norm {
        #[arg(long)]
        vector: PathBuf,
        #[command(flatten)]
        backend: BackendArg,
        /// Solve in exact rational arithmetic (finite or alpha supports).
        #[arg(long)]
        exact: bool,
    },
    /// Orbit of a point, or norm profile of a vector, under a map.
    Orbit {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, conflicts_with = "vector", required_unless_present = "vector")]
        point: Option<String>,
        #[arg(long)]
        vector: Option<PathBuf>,
        #[arg(long = "N", default_value_t = 100)]
        n: u64,
        #[command(flatten)]
        backend: BackendArg,
    },
    /// Finite-horizon escape/recurrence classification of a point.
    Classify {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        point: String,
        #[command(flatten)]
        params: ParamsArg,
    },
    /// Checks Lip(f^n) <= C along the given times and convergence of returns.
    Rigidity {
        #[arg(long)]
        map: PathBuf,
        /// Comma-separated increasing times.
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<u64>,
        #[arg(long, default_value_t = 1.0)]
        bound: f64,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        /// Sample points as a JSON array; defaults to the whole space.
        #[arg(long)]
        sample: Option<String>,
    },
    /// Case analysis of a piecewise-linear interval map.
    IntervalAnalyze {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 30)]
        terms: usize,
    },
    /// Runs one of the built-in experiments.
    Gallery(GalleryArgs),
    /// Runs the seeded invariant suite.
    Selftest,
}

#[derive(Debug, Args)]
struct BackendArg {
    /// flow, alpha or line; defaults to the fastest exact backend for the space.
    #[arg(long)]
    backend: Option<String>,
}

impl BackendArg {
    fn resolve(&self, space: &MetricSpace) -> freelip::Result<Backend> {
        let b = match &self.backend {
            Some(s) => s.parse()?,
            None => Backend::preferred(space),
        };
        b.check(space)?;
        Ok(b)
    }
}

#[derive(Debug, Args)]
struct ParamsArg {
    #[arg(long)]
    params: Option<PathBuf>,
    /// Overrides the horizon of the parameter file.
    #[arg(long)]
    horizon: Option<u64>,
}

impl ParamsArg {
    fn load(&self) -> freelip::Result<ClassificationParams> {
        let mut p = match &self.params {
            Some(path) => io::load_params(path)?,
            None => ClassificationParams::default(),
        };
        if let Some(h) = self.horizon {
            p.horizon = h;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GalleryName {
    Doubling,
    BackwardShift,
    Alpha,
    ForwardShift,
    BlockCycle,
    Interval,
    Circle,
    Kronecker,
}

#[derive(Debug, Args)]
struct GalleryArgs {
    name: GalleryName,
    /// Truncation size (doubling: number of dyadic points).
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Number of blocks (alpha, forward-shift, block-cycle).
    #[arg(long)]
    blocks: Option<usize>,
    /// Depth of the backward shift.
    #[arg(long)]
    depth: Option<usize>,
    /// Order of the circle rotation.
    #[arg(long)]
    q: Option<usize>,
    /// Rotation angles in units of pi, comma separated.
    #[arg(long, value_delimiter = ',')]
    angles: Vec<f64>,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    #[arg(long, default_value_t = 1000)]
    bound: u64,
}

enum Outcome {
    Ok,
    AssertionFailed,
}

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn new(flag: Option<PathBuf>) -> Self {
        Output { dir: flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)) }
    }

    fn write(&self, file: &str, text: &str) -> anyhow::Result<()> {
        if let Some(dir) = &self.dir {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(file);
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }

    fn report(&self, name: &str, value: &impl serde::Serialize) -> anyhow::Result<()> {
        let text = io::to_json_string(value)?;
        print!("{text}");
        self.write(&format!("{name}.json"), &text)
    }

    fn profile(&self, name: &str, profile: &[f64]) -> anyhow::Result<()> {
        self.write(&format!("{name}.csv"), &io::profile_csv(profile))
    }
}

fn parse_point(space: &MetricSpace, text: &str) -> freelip::Result<Point> {
    let v: Value = serde_json::from_str(text).map_err(|e| freelip::Error::Domain(format!("point {text:?}: {e}")))?;
    space.parse_point(&v)
}

fn gate(checks: &[Check]) -> Outcome {
    if gallery::all_passed(checks) {
        Outcome::Ok
    } else {
        for c in checks.iter().filter(|c| !c.passed) {
            eprintln!("check failed: {}: {}", c.name, c.detail);
        }
        Outcome::AssertionFailed
    }
}

fn run(cfg: RunConfig) -> anyhow::Result<Outcome> {
    let out = Output::new(cfg.out);
    match cfg.verb {
        Verb::Norm { vector, backend, exact } => {
            let mu = io::load_vector(&vector)?;
            if exact {
                out.report("norm", &norm_flow_exact(&mu)?)?;
            } else {
                let b = backend.resolve(mu.space())?;
                let report = match b {
                    Backend::Flow => serde_json::to_value(norm_flow(&mu)?)?,
                    _ => json!({ "value": b.norm(&mu)?, "backend": b.name() }),
                };
                out.report("norm", &report)?;
            }
            Ok(Outcome::Ok)
        }
        Verb::Orbit { map, point, vector, n, backend } => {
            if let Some(v) = vector {
                let (f, mu) = io::load_map_and_vector(&map, &v)?;
                let b = backend.resolve(f.space())?;
                let profile = orbit_norm_profile(&f, &mu, n, b)?;
                out.profile("orbit-profile", &profile)?;
                out.report("orbit", &json!({ "backend": b.name(), "profile": profile }))?;
            } else {
                let f = io::load_map(&map)?;
                let x = parse_point(f.space(), point.as_deref().unwrap_or_default())?;
                let pts = orbit(&f, &x, n)?;
                let norms: Vec<f64> = pts.iter().map(|p| f.space().norm_of_point(p)).collect::<Result<_, _>>()?;
                out.profile("orbit-profile", &norms)?;
                out.report("orbit", &json!({ "orbit": pts, "norms": norms }))?;
            }
            Ok(Outcome::Ok)
        }
        Verb::Classify { map, point, params } => {
            let f = io::load_map(&map)?;
            let x = parse_point(f.space(), &point)?;
            out.report("classify", &classify_orbit(&f, &x, &params.load()?)?)?;
            Ok(Outcome::Ok)
        }
        Verb::Rigidity { map, times, bound, tol, sample } => {
            let f = io::load_map(&map)?;
            let pts = match sample {
                Some(text) => {
                    let v: Value = serde_json::from_str(&text).context("parsing --sample")?;
                    let Value::Array(items) = v else { bail!("--sample must be a JSON array") };
                    items.iter().map(|p| f.space().parse_point(p)).collect::<Result<Vec<_>, _>>()?
                }
                None => sample_points(f.space(), SAMPLE_LIMIT)?,
            };
            let report = rigidity_check(&f, &pts, &times, bound, tol)?;
            out.report("rigidity", &report)?;
            Ok(if report.passed { Outcome::Ok } else { Outcome::AssertionFailed })
        }
        Verb::IntervalAnalyze { map, terms } => {
            let f = io::load_map(&map)?;
            out.report("interval-analyze", &interval_analyze(&f, terms)?)?;
            Ok(Outcome::Ok)
        }
        Verb::Gallery(args) => run_gallery(&out, args),
        Verb::Selftest => {
            let report = run_selftest(cfg.seed);
            out.report("selftest", &report)?;
            for s in report.suites.iter().filter(|s| !s.passed()) {
                eprintln!("suite failed: {}: {}", s.name, s.first_failure.as_deref().unwrap_or(""));
            }
            Ok(if report.passed { Outcome::Ok } else { Outcome::AssertionFailed })
        }
    }
}

fn run_gallery(out: &Output, a: GalleryArgs) -> anyhow::Result<Outcome> {
    match a.name {
        GalleryName::Doubling => {
            let rep = gallery::doubling_experiment(a.n.unwrap_or(40), a.horizon.unwrap_or(30) as usize)?;
            out.profile("gallery-doubling-profile", &rep.profile)?;
            out.report("gallery-doubling", &rep)?;
            Ok(gate(&rep.checks))
        }
        GalleryName::BackwardShift => {
            let rep = gallery::backward_shift_experiment(a.depth.unwrap_or(20), a.horizon.unwrap_or(100))?;
            out.report("gallery-backward-shift", &rep)?;
            Ok(gate(&rep.checks))
        }
        GalleryName::Alpha => {
            let rep = gallery::alpha_prop41(&KSequence::Auto, a.blocks.unwrap_or(12))?;
            out.report("gallery-alpha", &rep)?;
            Ok(gate(&rep.checks))
        }
        GalleryName::ForwardShift => {
            let blocks = a.blocks.unwrap_or(8);
            let alpha = gallery::alpha_prop41(&KSequence::Auto, blocks)?;
            let terms = a.n.unwrap_or(20);
            let lambda: Vec<(usize, f64)> =
                (1..=terms).map(|n| (n, if n % 2 == 0 { 1.0 } else { -1.0 } / (n * n) as f64)).collect();
            let horizon = a.horizon.unwrap_or(alpha.scheme.s[blocks.min(6)]) as usize;
            let rep = gallery::forward_shift_experiment(&alpha.space, &lambda, horizon, Some(&alpha.scheme))?;
            out.profile("gallery-forward-shift-profile", &rep.profile)?;
            out.report("gallery-forward-shift", &rep)?;
            Ok(gate(&rep.checks))
        }
        GalleryName::BlockCycle => {
            let blocks = a.blocks.unwrap_or(10);
            let s_last = blocks * (blocks + 1) / 2;
            let rep = gallery::block_cycle_experiment(
                blocks,
                a.horizon.unwrap_or(2 * s_last as u64),
                20.min(blocks as u32 + 2),
            )?;
            out.profile("gallery-block-cycle-profile", &rep.profile)?;
            out.report("gallery-block-cycle", &rep)?;
            Ok(gate(&rep.checks))
        }
        GalleryName::Interval => {
            let params = ClassificationParams::with_horizon(a.horizon.unwrap_or(1000));
            let mut rows = Vec::new();
            let mut checks = Vec::new();
            for (name, f) in gallery::interval_maps() {
                let analysis = interval_analyze(&f, a.n.unwrap_or(30))?;
                let certified = match analysis.certificate {
                    Some(x) => Some(classify_orbit(&f, &Point::real(x), &params)?.verdict),
                    None => None,
                };
                if let Some(v) = certified {
                    checks.push(Check::new(
                        &format!("{name}_certificate_escapes"),
                        v == freelip::Verdict::EscapingEvidence,
                        format!("{v:?}"),
                    ));
                }
                rows.push(json!({ "map": name, "analysis": analysis, "certificate_verdict": certified }));
            }
            out.report("gallery-interval", &json!({ "maps": rows, "checks": checks }))?;
            Ok(gate(&checks))
        }
        GalleryName::Circle => {
            let q = a.q.unwrap_or(12);
            let (space, f) = gallery::circle_rotation_space(q)?;
            let q = q as u64;
            let rep = rigidity_check(&f, &sample_points(&space, SAMPLE_LIMIT)?, &[q, 2 * q, 3 * q], 1.0, 0.0)?;
            out.report("gallery-circle", &rep)?;
            Ok(if rep.passed { Outcome::Ok } else { Outcome::AssertionFailed })
        }
        GalleryName::Kronecker => {
            let angles: Vec<f64> =
                if a.angles.is_empty() { vec![PI] } else { a.angles.iter().map(|t| t * PI).collect() };
            let times = gallery::kronecker_return_times(&angles, a.eps, a.bound)?;
            out.report(
                "gallery-kronecker",
                &json!({ "angles": angles, "eps": a.eps, "bound": a.bound, "times": times }),
            )?;
            Ok(Outcome::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    match run(cfg) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::AssertionFailed) => ExitCode::from(1),
        Err(e) => {
            // parse errors already quote their cause
            let mut msg = e.to_string();
            for cause in e.chain().skip(1).map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    msg = format!("{msg}: {cause}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
