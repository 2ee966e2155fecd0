use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ProblemConfig;
use super::{Overrides, EXIT_ERROR, EXIT_MAX_ITERATIONS, EXIT_OK};
use crate::adherence::cluster_limits;
use crate::audit::AuditReport;
use crate::descent::{descend, DescentConfig, DescentError, DescentTrace, ManifoldSpace, StopReason};
use crate::error::{Error, Result};
use crate::fixed_point::{run_fixed_point, FixedPointOptions, SelfMap, DEFAULT_ORBIT_LENGTH, DEFAULT_TOL_FP};
use crate::gap::{dist_x, metric_audit, GapFn, GapShape, WitnessSet};
use crate::linearization::{check_linearization, BundleElem, Linearization, LinearizationMap};
use crate::manifold::{Manifold, ManifoldKind, Point};
use crate::mapping::{run_mapping_descent, sobolev_norm_samples, MapFunctional};
use crate::method::{method_contract_audit, LineMethod, MethodKind, ScalarPath};
use crate::problems;

/// Exit code plus the structured-text report printed on stdout.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
}

pub const CHECKS: &[&str] = &[
    "linearization.sphere2",
    "linearization.torus2",
    "linearization.euclidean3",
    "linearization.circle",
    "metric.sphere2",
    "method.grid-refine",
    "method.golden-section",
    "method.armijo",
    "parseval",
    "gradient-check",
];

/// Faults accepted by `check --inject`.
pub const FAULTS: &[&str] = &["drop-distance", "signed-gap", "always-step", "coarse-fd"];

fn load(path: &Path, o: &Overrides) -> Result<(ProblemConfig, DescentConfig)> {
    let mut cfg = ProblemConfig::load(path)?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    let mut d = cfg.build_descent()?;
    if let Some(n) = o.max_iter {
        d.n_max = n;
    }
    if let Some(t) = o.tol {
        d.eps = t;
    }
    d.validate()?;
    Ok((cfg, d))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn stop_code(stop: StopReason) -> i32 {
    if stop == StopReason::MaxIterations {
        EXIT_MAX_ITERATIONS
    } else {
        EXIT_OK
    }
}

fn trace_summary<P>(out: &mut String, trace: &DescentTrace<P>) {
    let _ = writeln!(out, "stop: {}", trace.stop);
    let _ = writeln!(out, "iterations: {}", trace.iterations());
    let _ = writeln!(out, "initial_value: {}", trace.values[0]);
    let _ = writeln!(out, "final_value: {}", trace.final_value());
    let _ = writeln!(out, "monotone: {}", trace.is_monotone());
}

fn coords_csv<P>(trace: &DescentTrace<P>, coords: impl Fn(&P) -> Vec<f64>) -> String {
    trace.to_csv(coords)
}

/// Keeps the partial trace of an aborted run on disk, then reports the error.
fn aborted<P>(dir: &Path, cfg: &ProblemConfig, err: DescentError<P>, coords: impl Fn(&P) -> Vec<f64>) -> Error {
    let _ = write_file(dir, &cfg.output.trace, &coords_csv(&err.trace, coords));
    err.error
}

pub fn cmd_solve(path: &Path, o: &Overrides) -> Result<Outcome> {
    let (cfg, dcfg) = load(path, o)?;
    let dir = cfg.output_dir(o.output.as_deref());
    let lin = cfg.build_linearization()?;
    let gap = cfg.build_gap()?;
    let m = lin.manifold().clone();
    let kind = cfg.problem_kind().to_string();

    let mut report = String::new();
    let _ = writeln!(report, "command: solve");
    let _ = writeln!(report, "problem: {kind}");
    let _ = writeln!(report, "manifold: {} {}", m.kind().name(), m.dim());
    let _ = writeln!(report, "method: {}", dcfg.method.name());
    let _ = writeln!(report, "seed: {}", cfg.seed);

    if kind == "loop" {
        return solve_loop(&cfg, &dcfg, &lin, &dir, report);
    }

    let (functional, target) = match kind.as_str() {
        "cosine" => {
            if m.kind() != ManifoldKind::Sphere {
                return Err(Error::Config("problem.kind: cosine needs a sphere".into()));
            }
            let mut north = vec![0.0; m.ambient_dim()];
            north[m.ambient_dim() - 1] = 1.0;
            let p = cfg.target_point(&m, north)?;
            (problems::cosine(&p), Some(p))
        }
        "quadratic" => {
            if m.kind() != ManifoldKind::Euclidean {
                return Err(Error::Config("problem.kind: quadratic needs Euclidean space".into()));
            }
            let c = cfg.target_point(&m, vec![0.0; m.ambient_dim()])?;
            (problems::quadratic(&c), Some(c))
        }
        "height" => {
            if m.kind() != ManifoldKind::Torus || m.dim() < 2 {
                return Err(Error::Config("problem.kind: height needs a torus of dimension >= 2".into()));
            }
            (problems::torus_height(), None)
        }
        "fixed-point" => {
            return Err(Error::Config("problem.kind: use the fixed-point subcommand".into()));
        }
        other => return Err(Error::Config(format!("problem.kind: unknown problem '{other}'"))),
    };
    let w = cfg.build_witnesses(&m)?;
    let x0 = cfg.start_point(&m)?;
    let mut space = ManifoldSpace::new(&lin, &w);
    space.gap = gap;
    space.displacement = cfg.displacement()?;
    let coords = |p: &Point| p.coords().to_vec();
    let trace = descend(&space, &functional, &x0, &dcfg).map_err(|e| aborted(&dir, &cfg, e, coords))?;

    trace_summary(&mut report, &trace);
    if let Some(p) = target {
        let _ = writeln!(report, "distance_to_target: {:e}", m.distance(trace.last(), &p));
    }
    let clusters = cluster_limits(&trace, |p| m.embed(p), cfg.adherence.radius, cfg.adherence.f_tol)?;
    let _ = writeln!(report);
    let _ = write!(report, "{clusters}");

    let trace_path = write_file(&dir, &cfg.output.trace, &coords_csv(&trace, coords))?;
    let _ = writeln!(report);
    let _ = writeln!(report, "trace: {}", trace_path.display());
    let report_path = dir.join(&cfg.output.report);
    let _ = writeln!(report, "report: {}", report_path.display());
    write_file(&dir, &cfg.output.report, &report)?;
    Ok(Outcome {
        code: stop_code(trace.stop),
        report,
    })
}

fn solve_loop(cfg: &ProblemConfig, dcfg: &DescentConfig, lin: &Linearization, dir: &Path, mut report: String) -> Result<Outcome> {
    let n = lin.manifold();
    let p = &cfg.problem;
    let m = p.grid_size.unwrap_or(64);
    let degree = p.degree.unwrap_or(1);
    let u0 = problems::perturbed_loop(n, m, degree, p.perturbation.unwrap_or(0.3), p.noise.unwrap_or(0.0), cfg.seed)?;
    let functional = match p.functional.as_deref().unwrap_or("dirichlet") {
        "dirichlet" => MapFunctional::dirichlet(),
        "sobolev-tracking" => {
            let target = problems::perturbed_loop(n, m, degree, 0.0, 0.0, cfg.seed)?;
            MapFunctional::sobolev_tracking(target, p.order.unwrap_or(0.0))
        }
        other => return Err(Error::Config(format!("problem.functional: unknown functional '{other}'"))),
    };
    let s_list = p.s_list.clone().unwrap_or_else(|| vec![-1.0, 0.0]);
    let coords = |u: &crate::mapping::DiscreteMap| u.values().iter().flat_map(|q| q.coords().to_vec()).collect();
    let run = run_mapping_descent(lin, &functional, &u0, dcfg, &s_list).map_err(|e| aborted(dir, cfg, e, coords))?;

    let _ = writeln!(report, "grid_size: {m}");
    trace_summary(&mut report, &run.trace);
    if let Some(w) = &run.winding {
        let _ = writeln!(report, "winding_initial: {}", w[0]);
        let _ = writeln!(report, "winding_constant: {}", run.winding_constant().unwrap_or(false));
    }
    let _ = writeln!(report, "node_steps_below_pi: {}", run.steps_below_pi());
    for d in &run.sobolev {
        let _ = writeln!(report, "sobolev_distance_initial(s={}): {:e}", d.s, d.distances[0]);
    }
    let last = run.trace.last();
    for &s in &s_list {
        let _ = writeln!(report, "sobolev_norm_final(s={s}): {}", sobolev_norm_samples(&last.ambient(), s));
    }
    let trace_path = write_file(dir, &cfg.output.trace, &coords_csv(&run.trace, coords))?;
    let mut map_csv = Vec::new();
    last.write_csv(&mut map_csv)?;
    let map_path = write_file(dir, "final_map.csv", &String::from_utf8_lossy(&map_csv))?;
    let _ = writeln!(report);
    let _ = writeln!(report, "trace: {}", trace_path.display());
    let _ = writeln!(report, "final_map: {}", map_path.display());
    let report_path = dir.join(&cfg.output.report);
    let _ = writeln!(report, "report: {}", report_path.display());
    write_file(dir, &cfg.output.report, &report)?;
    Ok(Outcome {
        code: stop_code(run.trace.stop),
        report,
    })
}

pub fn cmd_fixed_point(path: &Path, o: &Overrides) -> Result<Outcome> {
    let (cfg, dcfg) = load(path, o)?;
    let dir = cfg.output_dir(o.output.as_deref());
    let lin = cfg.build_linearization()?;
    let gap = cfg.build_gap()?;
    let m = lin.manifold().clone();
    let p = &cfg.problem;
    if cfg.problem_kind() != "fixed-point" {
        return Err(Error::Config("problem.kind: fixed-point subcommand needs problem.kind = \"fixed-point\"".into()));
    }
    let map = match p.map.as_deref().unwrap_or("contraction") {
        "identity" => SelfMap::identity(),
        "rotation" => SelfMap::rotation(&m, p.angle.unwrap_or(std::f64::consts::PI))
            .map_err(|e| Error::Config(format!("problem.map: {e}")))?,
        "contraction" => {
            let mut north = vec![0.0; m.ambient_dim()];
            north[m.ambient_dim() - 1] = 1.0;
            let centre = cfg.target_point(&m, north)?;
            SelfMap::contraction(&m, centre, p.factor.unwrap_or(0.5))
                .map_err(|e| Error::Config(format!("problem.factor: {e}")))?
        }
        other => return Err(Error::Config(format!("problem.map: unknown map '{other}'"))),
    };
    let w = cfg.build_witnesses(&m)?;
    let x0 = cfg.start_point(&m)?;
    let opts = FixedPointOptions {
        tol_fp: p.tol_fp.unwrap_or(DEFAULT_TOL_FP),
        orbit_length: p.orbit_length.unwrap_or(DEFAULT_ORBIT_LENGTH),
        cluster_radius: cfg.adherence.radius,
    };
    let coords = |q: &Point| q.coords().to_vec();
    let run = run_fixed_point(&lin, gap, &map, &x0, &dcfg, &w, &opts).map_err(|e| aborted(&dir, &cfg, e, coords))?;

    let mut report = String::new();
    let _ = writeln!(report, "command: fixed-point");
    let _ = writeln!(report, "manifold: {} {}", m.kind().name(), m.dim());
    let _ = writeln!(report, "method: {}", dcfg.method.name());
    let _ = writeln!(report, "seed: {}", cfg.seed);
    let _ = write!(report, "{}", run.report);
    let trace_path = write_file(&dir, &cfg.output.trace, &coords_csv(&run.trace, coords))?;
    let _ = writeln!(report);
    let _ = writeln!(report, "trace: {}", trace_path.display());
    let report_path = dir.join(&cfg.output.report);
    let _ = writeln!(report, "report: {}", report_path.display());
    write_file(&dir, &cfg.output.report, &report)?;
    let code = if !run.report.bound_holds() {
        EXIT_ERROR
    } else {
        stop_code(run.trace.stop)
    };
    Ok(Outcome { code, report })
}

pub fn cmd_metric(path: &Path, o: &Overrides) -> Result<Outcome> {
    let (cfg, _) = load(path, o)?;
    let dir = cfg.output_dir(o.output.as_deref());
    let lin = cfg.build_linearization()?;
    let gap = cfg.build_gap()?;
    let m = lin.manifold();
    let w = cfg.build_witnesses(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut report = String::new();
    let _ = writeln!(report, "command: metric");
    let _ = writeln!(report, "manifold: {} {}", m.kind().name(), m.dim());
    let _ = writeln!(report, "gap: {}", cfg.gap.shape);
    let _ = writeln!(report, "witnesses: {}", w.len());
    let mut table = String::from("pair,d_X,geodesic\n");
    for i in 0..cfg.metric.pairs {
        let x = m.sample_point(&mut rng);
        let y = m.sample_point(&mut rng);
        let d = dist_x(&lin, &gap, &x, &y, &w);
        let _ = writeln!(table, "{i},{d},{}", m.distance(&x, &y));
    }
    let audit = metric_audit(&lin, &gap, &w, cfg.metric.triples, cfg.seed)?;
    let _ = writeln!(report);
    let _ = write!(report, "{audit}");
    let table_path = write_file(&dir, "metric_pairs.csv", &table)?;
    let _ = writeln!(report);
    let _ = writeln!(report, "pairs: {}", table_path.display());
    write_file(&dir, &cfg.output.report, &report)?;
    Ok(Outcome {
        code: if audit.passed() { EXIT_OK } else { EXIT_ERROR },
        report,
    })
}

/// `ν` with the distance slot dropped: no longer separates far pairs.
struct DropDistance(Linearization);

impl LinearizationMap for DropDistance {
    fn manifold(&self) -> &Manifold {
        self.0.manifold()
    }

    fn nu(&self, x: &Point, y: &Point) -> BundleElem {
        BundleElem { k: 0.0, ..self.0.nu(x, y) }
    }

    fn delta(&self, e: &BundleElem) -> (Point, Point) {
        self.0.delta(e)
    }
}

/// Always moves to the right end of the interval.
struct AlwaysStep;

impl LineMethod for AlwaysStep {
    fn apply(&self, f: &ScalarPath<'_>, _x: f64) -> Result<f64> {
        Ok(f.upper())
    }
}

fn linearization_check(m: Manifold, fault: bool, seed: u64) -> Result<AuditReport> {
    let lin = Linearization::new(m);
    if fault {
        check_linearization(&DropDistance(lin), 100, seed)
    } else {
        check_linearization(&lin, 100, seed)
    }
}

fn parseval_check(seed: u64) -> AuditReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Manifold::sphere(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let samples: Vec<Vec<f64>> = (0..64).map(|_| n.embed(&n.sample_point(&mut rng))).collect();
        let l2 = samples.iter().flatten().map(|c| c * c).sum::<f64>().sqrt();
        worst = worst.max((sobolev_norm_samples(&samples, 0.0) - l2).abs());
    }
    let mut r = AuditReport::new("parseval");
    r.push("s0_equals_l2", worst <= 1e-12, worst, "20 random loops, m = 64");
    r
}

fn gradient_check(fd_step: f64, seed: u64) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let cases: Vec<(Manifold, crate::descent::Functional<'static>)> = vec![
        (Manifold::sphere(2), problems::cosine(&Point::new(vec![0.0, 0.6, 0.8]))),
        (Manifold::torus(2), problems::torus_height()),
        (Manifold::euclidean(3), problems::quadratic(&Point::new(vec![0.1, -0.2, 0.3]))),
    ];
    for (m, f) in &cases {
        for _ in 0..50 {
            let x = m.sample_point(&mut rng);
            let exact = f.differential(m, &x)?;
            let fd = crate::descent::fd_differential(m, &x, fd_step, |p| f.eval(p))?;
            let diff: f64 = exact.covec.iter().zip(&fd.covec).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            worst = worst.max(diff / m.covector_norm(&exact).max(1e-3));
        }
    }
    let mut r = AuditReport::new("gradient-check");
    r.push("fd_matches_closed_form", worst <= 1e-5, worst, "relative error, 150 points");
    Ok(r)
}

fn run_check(name: &str, fault: Option<&str>, seed: u64) -> Result<AuditReport> {
    let is = |f: &str| fault == Some(f);
    match name {
        "linearization.sphere2" => linearization_check(Manifold::sphere(2), is("drop-distance"), seed),
        "linearization.torus2" => linearization_check(Manifold::torus(2), is("drop-distance"), seed + 1),
        "linearization.euclidean3" => linearization_check(Manifold::euclidean(3), is("drop-distance"), seed + 2),
        "linearization.circle" => linearization_check(Manifold::circle(), is("drop-distance"), seed + 3),
        "metric.sphere2" => {
            let m = Manifold::sphere(2);
            let lin = Linearization::new(m.clone());
            let w = WitnessSet::random(&m, seed + 4, 128)?;
            let shape = if is("signed-gap") { GapShape::SignedDifference } else { GapShape::BoundedNorm };
            metric_audit(&lin, &GapFn::new(shape), &w, 200, seed + 5)
        }
        "method.grid-refine" | "method.golden-section" | "method.armijo" => {
            if is("always-step") {
                return method_contract_audit(&AlwaysStep, 100, seed + 6);
            }
            let m = match name {
                "method.grid-refine" => MethodKind::default(),
                "method.golden-section" => MethodKind::GoldenSection { iterations: 100 },
                _ => MethodKind::ArmijoBacktrack { c: 1e-4, shrink: 0.5 },
            };
            method_contract_audit(&m, 100, seed + 6)
        }
        "parseval" => Ok(parseval_check(seed + 7)),
        "gradient-check" => gradient_check(if is("coarse-fd") { 0.5 } else { crate::descent::DEFAULT_FD_STEP }, seed + 8),
        other => Err(Error::Precondition(format!("unknown check '{other}'"))),
    }
}

/// Runs every check in [`CHECKS`]; with `fault`, a known bug is injected
/// so that at least one check must fail.
pub fn cmd_check(fault: Option<&str>, o: &Overrides) -> Result<Outcome> {
    if let Some(f) = fault {
        if !FAULTS.contains(&f) {
            return Err(Error::Config(format!("--inject: unknown fault '{f}' (known: {})", FAULTS.join(", "))));
        }
    }
    let seed = o.seed.unwrap_or(0);
    let mut report = String::new();
    let mut all = true;
    let _ = writeln!(report, "command: check");
    let _ = writeln!(report, "seed: {seed}");
    if let Some(f) = fault {
        let _ = writeln!(report, "injected_fault: {f}");
    }
    for name in CHECKS {
        let audit = run_check(name, fault, seed)?;
        all &= audit.passed();
        let worst = audit.items.iter().map(|i| i.worst).fold(0.0, f64::max);
        let _ = writeln!(
            report,
            "check: {name} {} (worst {worst:e})",
            if audit.passed() { "pass" } else { "fail" }
        );
        for item in audit.failures() {
            let _ = writeln!(report, "  failed: {} {}", item.name, item.detail);
        }
    }
    let _ = writeln!(report, "verdict: {}", if all { "PASS" } else { "FAIL" });
    if let Some(dir) = &o.output {
        write_file(dir, "check_report.txt", &report)?;
    }
    Ok(Outcome {
        code: if all { EXIT_OK } else { EXIT_ERROR },
        report,
    })
}
