//! Fixed points of a self-map `f` as minima of `F(x) = gap(ν(x, f(x)))`.
//!
//! `F ≥ 0` vanishes exactly on `fix(f)` and is bounded by `d_X(x, f(x))`.
//! It is not smooth on `fix(f)`, so the differential is taken to be zero
//! once `F` drops below `tol_fp`.

use std::f64::consts::PI;
use std::fmt;

use crate::adherence::{cluster_limits, DEFAULT_CLUSTER_RADIUS, DEFAULT_F_CONSTANCY_TOL};
use crate::descent::{descend, fd_differential, DescentConfig, DescentError, DescentTrace, Functional, ManifoldSpace, StopReason, DEFAULT_FD_STEP};
use crate::error::{Error, Result};
use crate::gap::{dist_x, GapFn, WitnessSet};
use crate::linearization::{Linearization, LinearizationMap};
use crate::manifold::{Manifold, ManifoldKind, Point};

pub const DEFAULT_TOL_FP: f64 = 1e-8;
pub const DEFAULT_ORBIT_LENGTH: usize = 5;

/// A smooth map `f: X → X`.
pub struct SelfMap<'a> {
    pub label: String,
    apply: Box<dyn Fn(&Point) -> Point + 'a>,
}

impl<'a> SelfMap<'a> {
    pub fn new(label: impl Into<String>, apply: impl Fn(&Point) -> Point + 'a) -> Self {
        SelfMap {
            label: label.into(),
            apply: Box::new(apply),
        }
    }

    pub fn apply(&self, x: &Point) -> Point {
        (self.apply)(x)
    }

    pub fn identity() -> Self {
        SelfMap::new("identity", Point::clone)
    }

    /// Rotation by `angle`: of the first angle on tori, of the first two
    /// coordinates on spheres and Euclidean space.
    pub fn rotation(m: &Manifold, angle: f64) -> Result<Self> {
        let label = format!("rotation({angle})");
        match m.kind() {
            ManifoldKind::Torus => {
                let m = m.clone();
                Ok(SelfMap::new(label, move |x: &Point| {
                    let mut c = x.coords().to_vec();
                    c[0] += angle;
                    m.point(c).expect("rotated angles are finite")
                }))
            }
            _ if m.ambient_dim() >= 2 => {
                let (s, co) = angle.sin_cos();
                Ok(SelfMap::new(label, move |x: &Point| {
                    let mut c = x.coords().to_vec();
                    let (a, b) = (c[0], c[1]);
                    c[0] = co * a - s * b;
                    c[1] = s * a + co * b;
                    Point::new(c)
                }))
            }
            _ => Err(Error::Precondition("rotation needs at least two coordinates".into())),
        }
    }

    /// Geodesic contraction `x ↦ exp_x(factor·log_x p)` toward `p`. From the
    /// cut locus of `p` the map moves the same distance along the first
    /// tangent frame vector.
    pub fn contraction(m: &Manifold, p: Point, factor: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&factor) {
            return Err(Error::Precondition(format!("contraction factor must lie in [0, 1), got {factor}")));
        }
        if !m.contains(&p) {
            return Err(Error::Precondition("contraction centre is not on the manifold".into()));
        }
        let m = m.clone();
        Ok(SelfMap::new(format!("contraction({factor})"), move |x: &Point| {
            let v = match m.log(x, &p) {
                Ok(v) => v.vec,
                Err(_) => {
                    let d = m.distance(x, &p);
                    m.tangent_frame(x)[0].iter().map(|e| e * d).collect()
                }
            };
            let step: Vec<f64> = v.iter().map(|a| a * factor).collect();
            m.exp(x, &m.tangent(x, &step).expect("tangent")).expect("base matches")
        }))
    }
}

/// `F(x) = gap(ν(x, f(x)))` with a finite-difference differential that is
/// zero once `F < tol_fp`.
pub fn fixed_point_objective<'a>(
    lin: &'a Linearization,
    gap: GapFn,
    f: &'a SelfMap<'a>,
    tol_fp: f64,
) -> Functional<'a> {
    let value = move |x: &Point| gap.eval(&lin.nu(x, &f.apply(x)));
    let m = lin.manifold();
    Functional::new(value).with_gradient(move |x: &Point| {
        if value(x) < tol_fp {
            return vec![0.0; m.ambient_dim()];
        }
        match fd_differential(m, x, DEFAULT_FD_STEP, value) {
            Ok(c) => c.covec,
            Err(_) => vec![f64::NAN; m.ambient_dim()],
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointOptions {
    pub tol_fp: f64,
    /// Number of forward images `f^n(x_last)` compared with the limit cluster.
    pub orbit_length: usize,
    pub cluster_radius: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            tol_fp: DEFAULT_TOL_FP,
            orbit_length: DEFAULT_ORBIT_LENGTH,
            cluster_radius: DEFAULT_CLUSTER_RADIUS,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointReport {
    pub map: String,
    pub stop: StopReason,
    pub iterations: usize,
    pub final_value: f64,
    /// Geodesic residual `d(x_last, f(x_last))`.
    pub residual: f64,
    pub fixed_point_found: bool,
    /// Iterates where `0 ≤ F(x_n) ≤ d_X(x_n, f(x_n))` failed.
    pub bound_violations: Vec<usize>,
    /// `max_n F(x_n) − d_X(x_n, f(x_n))`; nonpositive when the bound holds.
    pub worst_bound_gap: f64,
    /// Distances from `f^n(x_last)`, `n = 1..`, to the nearest tail iterate.
    pub orbit_distances: Vec<f64>,
    pub message: String,
}

impl FixedPointReport {
    pub fn bound_holds(&self) -> bool {
        self.bound_violations.is_empty()
    }
}

impl fmt::Display for FixedPointReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "map: {}", self.map)?;
        writeln!(f, "stop: {}", self.stop)?;
        writeln!(f, "iterations: {}", self.iterations)?;
        writeln!(f, "final_value: {}", self.final_value)?;
        writeln!(f, "residual: {:e}", self.residual)?;
        writeln!(f, "fixed_point_found: {}", self.fixed_point_found)?;
        writeln!(f, "bound_holds: {}", self.bound_holds())?;
        writeln!(f, "worst_bound_gap: {:e}", self.worst_bound_gap)?;
        let orbit: Vec<String> = self.orbit_distances.iter().map(|d| format!("{d:e}")).collect();
        writeln!(f, "orbit_distances: {}", orbit.join(" "))?;
        writeln!(f, "message: {}", self.message)
    }
}

#[derive(Clone, Debug)]
pub struct FixedPointRun {
    pub trace: DescentTrace<Point>,
    pub report: FixedPointReport,
}

pub fn run_fixed_point(
    lin: &Linearization,
    gap: GapFn,
    f: &SelfMap<'_>,
    x0: &Point,
    cfg: &DescentConfig,
    w: &WitnessSet,
    opts: &FixedPointOptions,
) -> std::result::Result<FixedPointRun, DescentError<Point>> {
    let objective = fixed_point_objective(lin, gap, f, opts.tol_fp);
    let mut space = ManifoldSpace::new(lin, w);
    space.gap = gap;
    let trace = descend(&space, &objective, x0, cfg)?;
    let report = fixed_point_report(lin, gap, f, &trace, w, opts);
    Ok(FixedPointRun { trace, report })
}

/// Bound, residual and orbit diagnostics for a finished trace.
pub fn fixed_point_report(
    lin: &Linearization,
    gap: GapFn,
    f: &SelfMap<'_>,
    trace: &DescentTrace<Point>,
    w: &WitnessSet,
    opts: &FixedPointOptions,
) -> FixedPointReport {
    let m = lin.manifold();
    let mut bound_violations = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for (n, (x, &fx)) in trace.iterates.iter().zip(&trace.values).enumerate() {
        let d = dist_x(lin, &gap, x, &f.apply(x), w);
        worst = worst.max(fx - d);
        if !(fx >= 0.0 && fx <= d) {
            bound_violations.push(n);
        }
    }
    let last = trace.last();
    let final_value = trace.final_value();
    let residual = m.distance(last, &f.apply(last));
    let fixed_point_found = trace.stop.converged() && final_value < opts.tol_fp;

    let tail: Vec<&Point> = match cluster_limits(trace, |p| m.embed(p), opts.cluster_radius, DEFAULT_F_CONSTANCY_TOL) {
        Ok(r) => r.clusters.iter().flat_map(|c| c.members.iter().map(|&i| &trace.iterates[i])).collect(),
        Err(_) => vec![last],
    };
    let mut orbit_distances = Vec::with_capacity(opts.orbit_length);
    let mut y = last.clone();
    for _ in 0..opts.orbit_length {
        y = f.apply(&y);
        orbit_distances.push(tail.iter().map(|z| m.distance(&y, z)).fold(f64::INFINITY, f64::min));
    }

    let message = if fixed_point_found {
        format!("fixed point found: F = {final_value:e} < {:e}", opts.tol_fp)
    } else if trace.stop == StopReason::ExactCriticalPoint {
        format!("no descent direction; F = {final_value:.6} > 0: no fixed point found")
    } else {
        format!("F = {final_value:.6} after {} iterations ({}): no fixed point found", trace.iterations(), trace.stop)
    };
    FixedPointReport {
        map: f.label.clone(),
        stop: trace.stop,
        iterations: trace.iterations(),
        final_value,
        residual,
        fixed_point_found,
        bound_violations,
        worst_bound_gap: worst,
        orbit_distances,
        message,
    }
}

/// `F` of the rotation by `π` on `S¹`: only the distance slot survives the cutoff.
pub fn half_turn_value() -> f64 {
    PI / (1.0 + PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::method::MethodKind;

    fn golden() -> DescentConfig {
        DescentConfig {
            method: MethodKind::GoldenSection { iterations: 100 },
            ..DescentConfig::default()
        }
    }

    #[test]
    fn objective_values() {
        let c = Manifold::circle();
        let lin = Linearization::new(c.clone());
        let id = SelfMap::identity();
        let f = fixed_point_objective(&lin, GapFn::default(), &id, DEFAULT_TOL_FP);
        assert_eq!(f.eval(&Point::new(vec![1.3])), 0.0);

        let rot = SelfMap::rotation(&c, PI).unwrap();
        let f = fixed_point_objective(&lin, GapFn::default(), &rot, DEFAULT_TOL_FP);
        for a in [0.0, 0.7, 2.0, 4.5, 6.2] {
            assert!((f.eval(&Point::new(vec![a])) - half_turn_value()).abs() < 1e-10);
        }

        let s = Manifold::sphere(2);
        let lin = Linearization::new(s.clone());
        let p = Point::new(vec![0.0, 0.0, 1.0]);
        let con = SelfMap::contraction(&s, p.clone(), 0.5).unwrap();
        let f = fixed_point_objective(&lin, GapFn::default(), &con, DEFAULT_TOL_FP);
        assert_eq!(f.eval(&p), 0.0);
        assert!(f.eval(&Point::new(vec![1.0, 0.0, 0.0])) > 0.0);
    }

    #[test]
    fn contraction_moves_half_way() {
        let s = Manifold::sphere(2);
        let p = Point::new(vec![0.0, 0.0, 1.0]);
        let con = SelfMap::contraction(&s, p.clone(), 0.5).unwrap();
        let x = Point::new(vec![1.0, 0.0, 0.0]);
        let y = con.apply(&x);
        assert!((s.distance(&y, &p) - PI / 4.0).abs() < 1e-12);
        let antipode = Point::new(vec![0.0, 0.0, -1.0]);
        let z = con.apply(&antipode);
        assert!((s.distance(&z, &p) - PI / 2.0).abs() < 1e-12);
        assert!(SelfMap::contraction(&s, p, 1.0).is_err());
    }

    #[test]
    fn contraction_converges_with_exact_bound() {
        let s = Manifold::sphere(2);
        let lin = Linearization::new(s.clone());
        let p = Point::new(vec![0.0, 0.0, 1.0]);
        let con = SelfMap::contraction(&s, p.clone(), 0.5).unwrap();
        let w = WitnessSet::random(&s, 9, 64).unwrap();
        for seed in 0..5 {
            let x0 = s.random_point(100 + seed);
            let run = run_fixed_point(&lin, GapFn::default(), &con, &x0, &golden(), &w, &FixedPointOptions::default()).unwrap();
            let r = &run.report;
            assert!(r.fixed_point_found, "{r}");
            assert!(r.final_value < 1e-8);
            assert!(r.residual < 1e-6);
            assert!(r.bound_holds(), "{r}");
            assert!(s.distance(run.trace.last(), &p) < 1e-6);
            assert!(run.trace.is_monotone());
        }
    }

    #[test]
    fn half_turn_has_no_descent_direction() {
        let c = Manifold::circle();
        let lin = Linearization::new(c.clone());
        let rot = SelfMap::rotation(&c, PI).unwrap();
        let w = WitnessSet::grid(&c, 16).unwrap();
        let run = run_fixed_point(&lin, GapFn::default(), &rot, &Point::new(vec![0.4]), &golden(), &w, &FixedPointOptions::default()).unwrap();
        let r = &run.report;
        assert_eq!(r.stop, StopReason::ExactCriticalPoint);
        assert_eq!(r.iterations, 0);
        assert!((r.final_value - half_turn_value()).abs() < 1e-10);
        assert!(!r.fixed_point_found);
        assert!(r.message.contains("no fixed point found"), "{}", r.message);
        assert!(r.message.contains("F = 0.75854"), "{}", r.message);
        assert!(r.bound_holds());
    }

    #[test]
    fn identity_is_immediately_fixed() {
        let s = Manifold::torus(2);
        let lin = Linearization::new(s.clone());
        let id = SelfMap::identity();
        let w = WitnessSet::random(&s, 2, 16).unwrap();
        let run = run_fixed_point(&lin, GapFn::default(), &id, &s.random_point(3), &golden(), &w, &FixedPointOptions::default()).unwrap();
        assert_eq!(run.report.stop, StopReason::ExactCriticalPoint);
        assert_eq!(run.report.final_value, 0.0);
        assert!(run.report.fixed_point_found);
        assert!(run.report.orbit_distances.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn zero_iff_fixed() {
        let s = Manifold::sphere(2);
        let lin = Linearization::new(s.clone());
        let rot = SelfMap::rotation(&s, 0.3).unwrap();
        let f = fixed_point_objective(&lin, GapFn::default(), &rot, DEFAULT_TOL_FP);
        let pole = Point::new(vec![0.0, 0.0, 1.0]);
        assert_eq!(f.eval(&pole), 0.0);
        assert_eq!(s.distance(&pole, &rot.apply(&pole)), 0.0);
        for seed in 0..20 {
            let x = s.random_point(seed);
            assert_eq!(f.eval(&x) == 0.0, s.distance(&x, &rot.apply(&x)) == 0.0);
        }
    }
}
