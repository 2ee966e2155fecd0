//! Descent along linearization paths.
//!
//! At each iterate `x_n` the differential `d_{x_n}F` is embedded in `E` with
//! `k = 0` and pushed through `δ`, giving the path `γ_n(t) = δ(t·d_{x_n}F)`
//! with `γ_n(0) = x_n`. A [`LineMethod`] improves `F ∘ γ_n` starting from
//! `t = 0` on `[-t_half, t_half]`, and the next iterate is `γ_n(t_n)`.
//!
//! The loop stops when the displacement `d_n` falls below `eps`, when the
//! differential vanishes (below `grad_zero_tol`), or after `n_max` steps.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::gap::{dist_x, GapFn, WitnessSet};
use crate::linearization::{BundleElem, Linearization, LinearizationMap};
use crate::manifold::{CotangentVec, Manifold, Point};
use crate::method::{LineMethod, MethodKind, ScalarPath};

/// Version tag written in the first line of every trace CSV.
pub const TRACE_FORMAT: &str = "# lindescent-trace v1";

/// Default finite-difference step for differentials.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// A space the descent engine can move in: a point type, a covector type,
/// the linearization path and a displacement measure.
pub trait DescentSpace {
    type Point: Clone;
    type Covector;

    /// `γ(t) = δ(t·ξ).1` for the covector `ξ` at `x`.
    fn along(&self, x: &Self::Point, xi: &Self::Covector, t: f64) -> Self::Point;
    fn covector_norm(&self, xi: &Self::Covector) -> f64;
    /// Displacement `d_n` between consecutive iterates.
    fn displacement(&self, x: &Self::Point, y: &Self::Point) -> f64;
    /// Stored coordinates, written to trace CSVs.
    fn coordinates(&self, x: &Self::Point) -> Vec<f64>;
    /// Coordinates in the ambient vector space used for limit-point analysis.
    fn embed(&self, x: &Self::Point) -> Vec<f64>;
}

/// A function `F` on a [`DescentSpace`] together with its differential.
pub trait Objective<S: DescentSpace + ?Sized> {
    fn value(&self, space: &S, x: &S::Point) -> f64;
    fn differential(&self, space: &S, x: &S::Point) -> Result<S::Covector>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Displacement {
    /// `d_X(x_n, x_{n+1})` over the witness set.
    #[default]
    GapMetric,
    /// Geodesic distance.
    Geodesic,
}

/// A built-in manifold equipped with its linearization, gap and witnesses.
#[derive(Clone, Debug)]
pub struct ManifoldSpace<'a> {
    pub lin: &'a Linearization,
    pub gap: GapFn,
    pub witnesses: &'a WitnessSet,
    pub displacement: Displacement,
}

impl<'a> ManifoldSpace<'a> {
    pub fn new(lin: &'a Linearization, witnesses: &'a WitnessSet) -> Self {
        ManifoldSpace {
            lin,
            gap: GapFn::default(),
            witnesses,
            displacement: Displacement::GapMetric,
        }
    }

    pub fn manifold(&self) -> &Manifold {
        self.lin.manifold()
    }
}

impl DescentSpace for ManifoldSpace<'_> {
    type Point = Point;
    type Covector = CotangentVec;

    fn along(&self, _x: &Point, xi: &CotangentVec, t: f64) -> Point {
        self.lin.delta_target(&BundleElem::from_covector(xi.scaled(t)))
    }

    fn covector_norm(&self, xi: &CotangentVec) -> f64 {
        self.manifold().covector_norm(xi)
    }

    fn displacement(&self, x: &Point, y: &Point) -> f64 {
        match self.displacement {
            Displacement::GapMetric => dist_x(self.lin, &self.gap, x, y, self.witnesses),
            Displacement::Geodesic => self.manifold().distance(x, y),
        }
    }

    fn coordinates(&self, x: &Point) -> Vec<f64> {
        x.coords().to_vec()
    }

    fn embed(&self, x: &Point) -> Vec<f64> {
        self.manifold().embed(x)
    }
}

type ValueFn<'a> = Box<dyn Fn(&Point) -> f64 + 'a>;
type GradientFn<'a> = Box<dyn Fn(&Point) -> Vec<f64> + 'a>;

/// Smooth function on a built-in manifold. The differential is the
/// closed-form gradient when one is supplied, otherwise central finite
/// differences along an orthonormal tangent frame.
pub struct Functional<'a> {
    value: ValueFn<'a>,
    gradient: Option<GradientFn<'a>>,
    fd_step: f64,
}

impl<'a> Functional<'a> {
    pub fn new(value: impl Fn(&Point) -> f64 + 'a) -> Self {
        Functional {
            value: Box::new(value),
            gradient: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Closed-form gradient in stored coordinates; it is projected onto the
    /// tangent space before use.
    pub fn with_gradient(mut self, gradient: impl Fn(&Point) -> Vec<f64> + 'a) -> Self {
        self.gradient = Some(Box::new(gradient));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.value)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn differential(&self, m: &Manifold, x: &Point) -> Result<CotangentVec> {
        match &self.gradient {
            Some(g) => {
                let grad = g(x);
                if grad.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Evaluation("non-finite gradient".into()));
                }
                let v = m.tangent(x, &grad)?;
                Ok(m.flat(&v))
            }
            None => self.fd_differential(m, x),
        }
    }

    pub fn fd_differential(&self, m: &Manifold, x: &Point) -> Result<CotangentVec> {
        fd_differential(m, x, self.fd_step, |p| self.eval(p))
    }
}

impl Objective<ManifoldSpace<'_>> for Functional<'_> {
    fn value(&self, _space: &ManifoldSpace<'_>, x: &Point) -> f64 {
        self.eval(x)
    }

    fn differential(&self, space: &ManifoldSpace<'_>, x: &Point) -> Result<CotangentVec> {
        Functional::differential(self, space.manifold(), x)
    }
}

/// Central finite differences of `f` along an orthonormal frame at `x`.
/// Components below the rounding floor `4ε·max(|f(x±h)|)/h` are flushed to
/// zero, so functions constant up to rounding get an exactly zero differential.
pub fn fd_differential(
    m: &Manifold,
    x: &Point,
    h: f64,
    f: impl Fn(&Point) -> f64,
) -> Result<CotangentVec> {
    let mut covec = vec![0.0; m.ambient_dim()];
    for e in m.tangent_frame(x) {
        let step: Vec<f64> = e.iter().map(|a| a * h).collect();
        let back: Vec<f64> = e.iter().map(|a| -a * h).collect();
        let fp = f(&m.exp_raw(x, &step));
        let fm = f(&m.exp_raw(x, &back));
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::Evaluation(format!(
                "non-finite value in finite differences ({fp}, {fm})"
            )));
        }
        let c = (fp - fm) / (2.0 * h);
        let floor = 4.0 * f64::EPSILON * fp.abs().max(fm.abs()) / h;
        if c.abs() > floor {
            covec.iter_mut().zip(&e).for_each(|(a, b)| *a += c * b);
        }
    }
    Ok(CotangentVec {
        base: x.clone(),
        covec,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentConfig {
    /// Stop once `d_n < eps`. With `eps = 0` the loop also stops when the
    /// method returns `t = 0` twice in a row.
    pub eps: f64,
    pub n_max: usize,
    /// Half-width of the path parameter interval.
    pub t_half: f64,
    pub method: MethodKind,
    /// `‖d_xF‖` at or below this counts as an exact critical point.
    pub grad_zero_tol: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            eps: 1e-10,
            n_max: 200,
            t_half: 1.0,
            method: MethodKind::default(),
            grad_zero_tol: 1e-12,
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Precondition(format!("eps must be >= 0, got {}", self.eps)));
        }
        if self.n_max == 0 {
            return Err(Error::Precondition("n_max must be >= 1".into()));
        }
        if !(self.t_half > 0.0 && self.t_half.is_finite()) {
            return Err(Error::Precondition(format!(
                "t_half must be positive, got {}",
                self.t_half
            )));
        }
        if !(self.grad_zero_tol >= 0.0) {
            return Err(Error::Precondition("grad_zero_tol must be >= 0".into()));
        }
        self.method.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Displacement fell below `eps`.
    ToleranceReached,
    /// The differential vanished.
    ExactCriticalPoint,
    MaxIterations,
    /// `eps = 0` and the method returned `t = 0` twice in a row.
    Stalled,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::ToleranceReached => "ToleranceReached",
            StopReason::ExactCriticalPoint => "ExactCriticalPoint",
            StopReason::MaxIterations => "MaxIterations",
            StopReason::Stalled => "Stalled",
        }
    }

    pub fn converged(self) -> bool {
        self != StopReason::MaxIterations
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Iterates and per-step data of one descent run. Entry 0 holds `x_0`, a
/// zero step and the initial `d = 1 + eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct DescentTrace<P> {
    pub iterates: Vec<P>,
    pub values: Vec<f64>,
    pub steps: Vec<f64>,
    pub displacements: Vec<f64>,
    pub stop: StopReason,
}

impl<P> DescentTrace<P> {
    fn start(x0: P, f0: f64, d0: f64) -> Self {
        DescentTrace {
            iterates: vec![x0],
            values: vec![f0],
            steps: vec![0.0],
            displacements: vec![d0],
            stop: StopReason::MaxIterations,
        }
    }

    fn push(&mut self, x: P, f: f64, t: f64, d: f64) {
        self.iterates.push(x);
        self.values.push(f);
        self.steps.push(t);
        self.displacements.push(d);
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    /// Number of update steps taken.
    pub fn iterations(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }

    pub fn last(&self) -> &P {
        self.iterates.last().expect("trace holds x_0")
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trace holds F(x_0)")
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// Writes the versioned CSV: header, one row per iterate, stop footer.
    pub fn write_csv<W: Write>(&self, out: &mut W, coords: impl Fn(&P) -> Vec<f64>) -> Result<()> {
        let width = self.iterates.first().map(|p| coords(p).len()).unwrap_or(0);
        writeln!(out, "{TRACE_FORMAT}")?;
        write!(out, "iter,t_n,d_n,F")?;
        for i in 0..width {
            write!(out, ",x{i}")?;
        }
        writeln!(out)?;
        for (n, x) in self.iterates.iter().enumerate() {
            write!(
                out,
                "{n},{},{},{}",
                self.steps[n], self.displacements[n], self.values[n]
            )?;
            for c in coords(x) {
                write!(out, ",{c}")?;
            }
            writeln!(out)?;
        }
        writeln!(out, "# stop={}", self.stop)?;
        Ok(())
    }

    pub fn to_csv(&self, coords: impl Fn(&P) -> Vec<f64>) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, coords).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// A failed run: the error plus every iterate computed before it.
#[derive(Clone, Debug)]
pub struct DescentError<P> {
    pub trace: DescentTrace<P>,
    pub error: Error,
}

impl<P> fmt::Display for DescentError<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "descent aborted after {} iterations: {}",
            self.trace.iterations(),
            self.error
        )
    }
}

impl<P: fmt::Debug> std::error::Error for DescentError<P> {}

/// `t ↦ F(γ(t))` on `[-t_half, t_half]` for the covector `xi` at `x`.
pub fn linearization_path<'s, S, F>(
    space: &'s S,
    objective: &'s F,
    x: &'s S::Point,
    xi: &'s S::Covector,
    t_half: f64,
) -> Result<ScalarPath<'s>>
where
    S: DescentSpace + ?Sized,
    F: Objective<S> + ?Sized,
{
    ScalarPath::new(-t_half, t_half, move |t| {
        objective.value(space, &space.along(x, xi, t))
    })
}

/// Descent with a built-in [`MethodKind`].
pub fn descend<S, F>(
    space: &S,
    objective: &F,
    x0: &S::Point,
    cfg: &DescentConfig,
) -> std::result::Result<DescentTrace<S::Point>, DescentError<S::Point>>
where
    S: DescentSpace + ?Sized,
    F: Objective<S> + ?Sized,
{
    descend_with(space, objective, x0, cfg, &cfg.method)
}

/// Descent with any [`LineMethod`].
pub fn descend_with<S, F, M>(
    space: &S,
    objective: &F,
    x0: &S::Point,
    cfg: &DescentConfig,
    method: &M,
) -> std::result::Result<DescentTrace<S::Point>, DescentError<S::Point>>
where
    S: DescentSpace + ?Sized,
    F: Objective<S> + ?Sized,
    M: LineMethod + ?Sized,
{
    let mut d = 1.0 + cfg.eps;
    let f0 = objective.value(space, x0);
    let mut trace = DescentTrace::start(x0.clone(), f0, d);
    let fail = |trace: DescentTrace<S::Point>, error: Error| DescentError { trace, error };
    if let Err(e) = cfg.validate() {
        return Err(fail(trace, e));
    }
    if !f0.is_finite() {
        return Err(fail(trace, Error::Evaluation(format!("F(x_0) = {f0}"))));
    }

    let mut x = x0.clone();
    let mut xi = match objective.differential(space, &x) {
        Ok(xi) => xi,
        Err(e) => return Err(fail(trace, e)),
    };
    let mut idle_steps = 0usize;
    for _ in 0..cfg.n_max {
        if d < cfg.eps {
            trace.stop = StopReason::ToleranceReached;
            return Ok(trace);
        }
        if space.covector_norm(&xi) <= cfg.grad_zero_tol {
            trace.stop = StopReason::ExactCriticalPoint;
            return Ok(trace);
        }
        let t = {
            let path = match linearization_path(space, objective, &x, &xi, cfg.t_half) {
                Ok(p) => p,
                Err(e) => return Err(fail(trace, e)),
            };
            match method.apply(&path, 0.0) {
                Ok(t) => t,
                Err(e) => return Err(fail(trace, e)),
            }
        };
        if t == 0.0 {
            idle_steps += 1;
            if cfg.eps == 0.0 && idle_steps >= 2 {
                trace.stop = StopReason::Stalled;
                return Ok(trace);
            }
        } else {
            idle_steps = 0;
        }
        let next = space.along(&x, &xi, t);
        let f_next = objective.value(space, &next);
        if !f_next.is_finite() {
            return Err(fail(trace, Error::Evaluation(format!("F = {f_next} at step t = {t}"))));
        }
        d = space.displacement(&x, &next);
        trace.push(next.clone(), f_next, t, d);
        x = next;
        xi = match objective.differential(space, &x) {
            Ok(xi) => xi,
            Err(e) => return Err(fail(trace, e)),
        };
    }
    trace.stop = StopReason::MaxIterations;
    Ok(trace)
}

/// Descent of `F` on a built-in manifold with the gap-metric displacement.
pub fn run_descent(
    lin: &Linearization,
    functional: &Functional<'_>,
    x0: &Point,
    cfg: &DescentConfig,
    witnesses: &WitnessSet,
) -> std::result::Result<DescentTrace<Point>, DescentError<Point>> {
    let space = ManifoldSpace::new(lin, witnesses);
    descend(&space, functional, x0, cfg)
}

/// `t ↦ F(δ(t·d_xF).1)` on `[-t_half, t_half]`.
pub fn path_at<'s>(
    lin: &'s Linearization,
    functional: &'s Functional<'s>,
    x: &Point,
    t_half: f64,
) -> Result<ScalarPath<'s>> {
    let xi = functional.differential(lin.manifold(), x)?;
    ScalarPath::new(-t_half, t_half, move |t| {
        functional.eval(&lin.delta_target(&BundleElem::from_covector(xi.scaled(t))))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::dot;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cosine(p: Vec<f64>) -> Functional<'static> {
        let q = p.clone();
        Functional::new(move |x: &Point| {
            0.5 * x.coords().iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        })
        .with_gradient(move |_x: &Point| q.iter().map(|c| -c).collect())
    }

    #[test]
    fn path_examples() {
        let m = Manifold::euclidean(2);
        let lin = Linearization::new(m.clone());
        let f = Functional::new(|x: &Point| dot(x.coords(), x.coords()))
            .with_gradient(|x: &Point| x.coords().iter().map(|c| 2.0 * c).collect());
        let e1 = Point::new(vec![1.0, 0.0]);
        let path = path_at(&lin, &f, &e1, 1.0).unwrap();
        assert_eq!(path.eval(0.0), 1.0);
        for t in [-0.7f64, -0.2, 0.3, 0.9] {
            let s = 1.0 + 2.0 * t / (1.0 + 4.0 * t * t).sqrt();
            assert!((path.eval(t) - s * s).abs() < 1e-14);
        }
        let origin = Point::new(vec![0.0, 0.0]);
        let flat = path_at(&lin, &f, &origin, 1.0).unwrap();
        assert_eq!(flat.eval(0.5), 0.0);
    }

    #[test]
    fn critical_start_stops_immediately() {
        let m = Manifold::sphere(2);
        let lin = Linearization::new(m.clone());
        let w = WitnessSet::random(&m, 1, 32).unwrap();
        let p = Point::new(vec![0.0, 0.0, 1.0]);
        let trace = run_descent(&lin, &cosine(p.coords().to_vec()), &p, &DescentConfig::default(), &w)
            .unwrap();
        assert_eq!(trace.stop, StopReason::ExactCriticalPoint);
        assert_eq!(trace.iterations(), 0);
    }

    #[test]
    fn euclidean_quadratic_converges() {
        let m = Manifold::euclidean(2);
        let lin = Linearization::new(m.clone());
        let w = WitnessSet::grid(&m, 25).unwrap();
        let f = Functional::new(|x: &Point| dot(x.coords(), x.coords()))
            .with_gradient(|x: &Point| x.coords().iter().map(|c| 2.0 * c).collect());
        let cfg = DescentConfig {
            eps: 1e-8,
            ..DescentConfig::default()
        };
        let trace = run_descent(&lin, &f, &Point::new(vec![1.0, 0.0]), &cfg, &w).unwrap();
        assert!(trace.stop.converged(), "{:?}", trace.stop);
        assert!(trace.is_monotone());
        assert!(trace.final_value() < 1e-12);
        assert!(dot(trace.last().coords(), trace.last().coords()).sqrt() < 1e-6);
    }

    #[test]
    fn single_iteration_budget_reports_max_iterations() {
        let m = Manifold::sphere(2);
        let lin = Linearization::new(m.clone());
        let w = WitnessSet::random(&m, 1, 16).unwrap();
        let f = cosine(vec![0.0, 0.0, 1.0]);
        let cfg = DescentConfig {
            n_max: 1,
            ..DescentConfig::default()
        };
        let trace = run_descent(&lin, &f, &Point::new(vec![0.0, 0.6, -0.8]), &cfg, &w).unwrap();
        assert_eq!(trace.stop, StopReason::MaxIterations);
        assert_eq!(trace.iterations(), 1);
    }

    #[test]
    fn fd_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for m in [Manifold::sphere(2), Manifold::torus(2), Manifold::euclidean(3)] {
            for _ in 0..20 {
                let a = m.sample_point(&mut rng);
                let coef: Vec<f64> = m.sample_point(&mut rng).coords().to_vec();
                let c2 = coef.clone();
                let f = Functional::new(move |x: &Point| {
                    x.coords().iter().zip(&coef).map(|(u, v)| (u * v).sin()).sum()
                })
                .with_gradient(move |x: &Point| {
                    x.coords().iter().zip(&c2).map(|(u, v)| v * (u * v).cos()).collect()
                });
                let exact = f.differential(&m, &a).unwrap();
                let fd = f.fd_differential(&m, &a).unwrap();
                let num: f64 = exact
                    .covec
                    .iter()
                    .zip(&fd.covec)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt();
                let den = m.covector_norm(&exact).max(1e-3);
                assert!(num / den < 1e-5, "{num} / {den}");
            }
        }
    }

    #[test]
    fn constant_function_has_zero_fd_differential() {
        let m = Manifold::circle();
        let f = Functional::new(|_x: &Point| std::f64::consts::PI / (1.0 + std::f64::consts::PI));
        assert!(f.fd_differential(&m, &Point::new(vec![1.0])).unwrap().is_zero());
    }

    #[test]
    fn evaluation_error_keeps_partial_trace() {
        let m = Manifold::euclidean(1);
        let lin = Linearization::new(m.clone());
        let w = WitnessSet::grid(&m, 4).unwrap();
        let f = Functional::new(|x: &Point| {
            let v = x.coords()[0];
            if v < 0.5 {
                f64::NAN
            } else {
                v * v
            }
        })
        .with_gradient(|x: &Point| vec![2.0 * x.coords()[0]]);
        let err = run_descent(&lin, &f, &Point::new(vec![1.0]), &DescentConfig::default(), &w)
            .unwrap_err();
        assert!(matches!(err.error, Error::Evaluation(_)));
        assert_eq!(err.trace.iterates[0], Point::new(vec![1.0]));
    }

    #[test]
    fn zero_tolerance_stops_on_stall() {
        // a kink at the minimum defeats further strict improvement in floating point
        let m = Manifold::euclidean(1);
        let lin = Linearization::new(m.clone());
        let w = WitnessSet::grid(&m, 4).unwrap();
        let f = Functional::new(|x: &Point| (x.coords()[0] - 0.3).abs() + 1.0)
            .with_gradient(|x: &Point| vec![if x.coords()[0] >= 0.3 { 1.0 } else { -1.0 }]);
        let cfg = DescentConfig {
            eps: 0.0,
            n_max: 500,
            ..DescentConfig::default()
        };
        let trace = run_descent(&lin, &f, &Point::new(vec![0.9]), &cfg, &w).unwrap();
        assert_eq!(trace.stop, StopReason::Stalled);
        assert!(trace.is_monotone());
    }

    #[test]
    fn csv_layout() {
        let m = Manifold::sphere(2);
        let lin = Linearization::new(m.clone());
        let w = WitnessSet::random(&m, 1, 16).unwrap();
        let f = cosine(vec![0.0, 0.0, 1.0]);
        let trace = run_descent(
            &lin,
            &f,
            &Point::new(vec![0.0, 0.6, 0.8]),
            &DescentConfig::default(),
            &w,
        )
        .unwrap();
        let csv = trace.to_csv(|p| p.coords().to_vec());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_FORMAT);
        assert_eq!(lines[1], "iter,t_n,d_n,F,x0,x1,x2");
        assert_eq!(lines.len(), trace.len() + 3);
        assert_eq!(*lines.last().unwrap(), format!("# stop={}", trace.stop));
    }
}
