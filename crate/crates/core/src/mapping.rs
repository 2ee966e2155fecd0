//! Discretized loop spaces `C∞(S¹, N)`.
//!
//! A loop is sampled at `t_j = 2πj/m`. The linearization of `N` lifts
//! pointwise, Sobolev `W^{s,2}` norms are computed spectrally from the
//! unitary DFT of the ambient samples, and functionals on loops plug into
//! the generic descent engine through [`LoopSpace`].

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::descent::{descend, DescentConfig, DescentError, DescentSpace, DescentTrace, Objective, DEFAULT_FD_STEP};
use crate::error::{Error, Result};
use crate::linearization::{BundleElem, Linearization, LinearizationMap};
use crate::manifold::{norm, signed_angle, CotangentVec, Manifold, ManifoldKind, Point};

/// A loop `u: S¹ → N` sampled on the uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMap {
    target: Manifold,
    values: Vec<Point>,
}

impl DiscreteMap {
    pub fn new(target: Manifold, values: Vec<Point>) -> Result<Self> {
        let m = values.len();
        if m < 4 || m % 2 != 0 {
            return Err(Error::Shape(format!("grid size must be even and >= 4, got {m}")));
        }
        if let Some(j) = values.iter().position(|p| !target.contains(p)) {
            return Err(Error::Shape(format!("node {j} is not on the target manifold")));
        }
        Ok(DiscreteMap { target, values })
    }

    /// Samples `t ↦ coords(t)` at the grid nodes, projecting onto `N`.
    pub fn from_fn(target: Manifold, m: usize, coords: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let values = (0..m)
            .map(|j| target.point(coords(grid_time(j, m))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(target, values)
    }

    pub fn constant(target: Manifold, m: usize, p: Point) -> Result<Self> {
        Self::new(target, vec![p; m])
    }

    pub fn target(&self) -> &Manifold {
        &self.target
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    /// Grid spacing `h = 2π/m`.
    pub fn spacing(&self) -> f64 {
        TAU / self.values.len() as f64
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    /// Ambient samples `ι(u_j)`, one row per node.
    pub fn ambient(&self) -> Vec<Vec<f64>> {
        self.values.iter().map(|p| self.target.embed(p)).collect()
    }

    pub fn check_compatible(&self, other: &DiscreteMap) -> Result<()> {
        if self.grid_size() != other.grid_size() {
            return Err(Error::Shape(format!(
                "grid sizes differ: {} vs {}",
                self.grid_size(),
                other.grid_size()
            )));
        }
        if self.target != other.target {
            return Err(Error::Shape("maps have different targets".into()));
        }
        Ok(())
    }

    /// Ambient samples flattened row by row, with the row width.
    pub fn ambient_flat(&self) -> (Vec<f64>, usize) {
        let d = self.target.embed_dim();
        let mut out = Vec::with_capacity(d * self.values.len());
        for p in &self.values {
            match self.target.kind() {
                ManifoldKind::Torus => p.coords().iter().for_each(|a| {
                    let (s, c) = a.sin_cos();
                    out.push(c);
                    out.push(s);
                }),
                _ => out.extend_from_slice(p.coords()),
            }
        }
        (out, d)
    }

    /// Ambient differences `ι(u_j) − ι(v_j)`.
    pub fn ambient_difference(&self, other: &DiscreteMap) -> Result<Vec<Vec<f64>>> {
        self.check_compatible(other)?;
        Ok(self
            .ambient()
            .into_iter()
            .zip(other.ambient())
            .map(|(a, b)| a.iter().zip(&b).map(|(x, y)| x - y).collect())
            .collect())
    }

    /// Discrete `L²` geodesic distance `√(h Σ d(u_j, v_j)²)`.
    pub fn l2_distance(&self, other: &DiscreteMap) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| self.target.distance(a, b).powi(2))
            .sum();
        (self.spacing() * s).sqrt()
    }

    /// Degree of a circle-valued loop.
    pub fn winding_number(&self) -> Option<i64> {
        if self.target.kind() != ManifoldKind::Torus || self.target.dim() != 1 {
            return None;
        }
        let m = self.values.len();
        let total: f64 = (0..m)
            .map(|j| signed_angle(self.values[(j + 1) % m].coords()[0] - self.values[j].coords()[0]))
            .sum();
        Some((total / TAU).round() as i64)
    }

    /// One row per node: `t_j` then the ambient coordinates.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        write!(out, "t")?;
        for i in 0..self.target.embed_dim() {
            write!(out, ",a{i}")?;
        }
        writeln!(out)?;
        let m = self.grid_size();
        for (j, a) in self.ambient().iter().enumerate() {
            write!(out, "{}", grid_time(j, m))?;
            for c in a {
                write!(out, ",{c}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn grid_time(j: usize, m: usize) -> f64 {
    TAU * j as f64 / m as f64
}

/// Signed frequency of DFT bin `j`, in `(-m/2, m/2]`.
pub fn frequency(j: usize, m: usize) -> i64 {
    if j <= m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}

/// A section of `f*(T*N) × ℝ`: one bundle element over each node of `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedBundleElem {
    pub base: DiscreteMap,
    pub sections: Vec<BundleElem>,
}

impl LiftedBundleElem {
    pub fn new(base: DiscreteMap, sections: Vec<BundleElem>) -> Result<Self> {
        if sections.len() != base.grid_size() {
            return Err(Error::Shape(format!(
                "{} sections over {} nodes",
                sections.len(),
                base.grid_size()
            )));
        }
        if base.values().iter().zip(&sections).any(|(p, e)| p != e.base()) {
            return Err(Error::Shape("section bases do not match the base map".into()));
        }
        Ok(LiftedBundleElem { base, sections })
    }

    pub fn zero(base: DiscreteMap) -> Self {
        let sections = base.values().iter().cloned().map(BundleElem::zero).collect();
        LiftedBundleElem { base, sections }
    }

    pub fn is_zero(&self) -> bool {
        self.sections.iter().all(BundleElem::is_zero)
    }
}

fn check_target(lin: &Linearization, f: &DiscreteMap) -> Result<()> {
    if lin.manifold() != f.target() {
        return Err(Error::Shape("linearization and map have different targets".into()));
    }
    Ok(())
}

/// `ν(f, g)(t_j) = ν(f(t_j), g(t_j))`.
pub fn lifted_nu(lin: &Linearization, f: &DiscreteMap, g: &DiscreteMap) -> Result<LiftedBundleElem> {
    f.check_compatible(g)?;
    check_target(lin, f)?;
    let sections = f.values().iter().zip(g.values()).map(|(a, b)| lin.nu(a, b)).collect();
    Ok(LiftedBundleElem {
        base: f.clone(),
        sections,
    })
}

/// Pointwise `δ`.
pub fn lifted_delta(lin: &Linearization, e: &LiftedBundleElem) -> Result<(DiscreteMap, DiscreteMap)> {
    check_target(lin, &e.base)?;
    let values = e.sections.iter().map(|s| lin.delta_target(s)).collect();
    let target = DiscreteMap {
        target: e.base.target.clone(),
        values,
    };
    Ok((e.base.clone(), target))
}

fn unitary_dft(samples: &[Vec<f64>]) -> Vec<Vec<Complex<f64>>> {
    let m = samples.len();
    let width = samples.first().map_or(0, Vec::len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let scale = 1.0 / (m as f64).sqrt();
    (0..width)
        .map(|c| {
            let mut buf: Vec<Complex<f64>> = samples.iter().map(|row| Complex::new(row[c], 0.0)).collect();
            fft.process(&mut buf);
            buf.iter_mut().for_each(|z| *z *= scale);
            buf
        })
        .collect()
}

fn unitary_idft_real(coeffs: &[Vec<Complex<f64>>], m: usize) -> Vec<Vec<f64>> {
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(m);
    let scale = 1.0 / (m as f64).sqrt();
    let cols: Vec<Vec<f64>> = coeffs
        .iter()
        .map(|col| {
            let mut buf = col.clone();
            ifft.process(&mut buf);
            buf.iter().map(|z| z.re * scale).collect()
        })
        .collect();
    (0..m).map(|j| cols.iter().map(|c| c[j]).collect()).collect()
}

/// Fourier weight `(1 + k²)^s` applied to `|û_k|²`.
pub fn sobolev_weight(k: i64, s: f64) -> f64 {
    (1.0 + (k * k) as f64).powf(s)
}

/// `W^{s,2}` norm of ambient-valued samples (one row per node).
pub fn sobolev_norm_samples(samples: &[Vec<f64>], s: f64) -> f64 {
    let m = samples.len();
    if m == 0 {
        return 0.0;
    }
    let coeffs = unitary_dft(samples);
    let mut total = 0.0;
    for col in &coeffs {
        for (j, z) in col.iter().enumerate() {
            total += sobolev_weight(frequency(j, m), s) * z.norm_sqr();
        }
    }
    total.sqrt()
}

pub fn sobolev_norm(u: &DiscreteMap, s: f64) -> f64 {
    sobolev_norm_samples(&u.ambient(), s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumRow {
    pub k: i64,
    /// `(1 + k²)^{s/2}`.
    pub multiplier: f64,
    /// `‖û_k‖` over the ambient components.
    pub coefficient_norm: f64,
}

/// Per-frequency breakdown of [`sobolev_norm_samples`], sorted by `k`.
pub fn sobolev_spectrum(samples: &[Vec<f64>], s: f64) -> Vec<SpectrumRow> {
    let m = samples.len();
    let coeffs = unitary_dft(samples);
    let mut rows: Vec<SpectrumRow> = (0..m)
        .map(|j| {
            let k = frequency(j, m);
            SpectrumRow {
                k,
                multiplier: sobolev_weight(k, s).sqrt(),
                coefficient_norm: coeffs.iter().map(|c| c[j].norm_sqr()).sum::<f64>().sqrt(),
            }
        })
        .collect();
    rows.sort_by_key(|r| r.k);
    rows
}

pub fn write_spectrum_csv<W: Write>(rows: &[SpectrumRow], out: &mut W) -> Result<()> {
    writeln!(out, "k,multiplier,coefficient_norm")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.k, r.multiplier, r.coefficient_norm)?;
    }
    Ok(())
}

/// `E(u) = ½ Σ_j ‖ι(u_{j+1}) − ι(u_j)‖² / h`.
pub fn dirichlet_energy(u: &DiscreteMap) -> f64 {
    let (a, d) = u.ambient_flat();
    let m = u.grid_size();
    let s: f64 = (0..m)
        .map(|j| {
            let k = (j + 1) % m;
            (0..d).map(|c| (a[k * d + c] - a[j * d + c]).powi(2)).sum::<f64>()
        })
        .sum();
    0.5 * s / u.spacing()
}

/// Gradient of [`dirichlet_energy`] in ambient coordinates: the discrete
/// Laplacian `(2ι_j − ι_{j−1} − ι_{j+1}) / h`.
pub fn dirichlet_ambient_gradient(u: &DiscreteMap) -> Vec<Vec<f64>> {
    let (a, d) = u.ambient_flat();
    let m = u.grid_size();
    let h = u.spacing();
    (0..m)
        .map(|j| {
            let (p, q) = ((j + m - 1) % m, (j + 1) % m);
            (0..d)
                .map(|c| (2.0 * a[j * d + c] - a[p * d + c] - a[q * d + c]) / h)
                .collect()
        })
        .collect()
}

type MapValue<'a> = Box<dyn Fn(&DiscreteMap) -> f64 + 'a>;
type MapGradient<'a> = Box<dyn Fn(&DiscreteMap) -> Vec<Vec<f64>> + 'a>;

/// A function on loops. The differential comes from an ambient gradient
/// when one is supplied, otherwise from central differences per node along
/// an orthonormal tangent frame.
pub struct MapFunctional<'a> {
    value: MapValue<'a>,
    ambient_gradient: Option<MapGradient<'a>>,
    fd_step: f64,
}

impl<'a> MapFunctional<'a> {
    pub fn new(value: impl Fn(&DiscreteMap) -> f64 + 'a) -> Self {
        MapFunctional {
            value: Box::new(value),
            ambient_gradient: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn with_ambient_gradient(mut self, g: impl Fn(&DiscreteMap) -> Vec<Vec<f64>> + 'a) -> Self {
        self.ambient_gradient = Some(Box::new(g));
        self
    }

    pub fn without_gradient(mut self) -> Self {
        self.ambient_gradient = None;
        self
    }

    pub fn dirichlet() -> Self {
        MapFunctional::new(dirichlet_energy).with_ambient_gradient(dirichlet_ambient_gradient)
    }

    /// `½ ‖u − target‖²_{W^{s,2}}` with ambient subtraction.
    pub fn sobolev_tracking(target: DiscreteMap, s: f64) -> Self {
        let t2 = target.clone();
        MapFunctional::new(move |u: &DiscreteMap| match u.ambient_difference(&target) {
            Ok(d) => 0.5 * sobolev_norm_samples(&d, s).powi(2),
            Err(_) => f64::NAN,
        })
        .with_ambient_gradient(move |u: &DiscreteMap| {
            let d = u.ambient_difference(&t2).expect("shape checked by the value");
            let m = d.len();
            let coeffs: Vec<Vec<Complex<f64>>> = unitary_dft(&d)
                .into_iter()
                .map(|col| {
                    col.into_iter()
                        .enumerate()
                        .map(|(j, z)| z * sobolev_weight(frequency(j, m), s))
                        .collect()
                })
                .collect();
            unitary_idft_real(&coeffs, m)
        })
    }

    pub fn eval(&self, u: &DiscreteMap) -> f64 {
        (self.value)(u)
    }

    pub fn differential(&self, u: &DiscreteMap) -> Result<LoopCovector> {
        match &self.ambient_gradient {
            Some(g) => {
                let grad = g(u);
                if grad.len() != u.grid_size() || grad.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::Evaluation("bad ambient gradient".into()));
                }
                let n = u.target();
                Ok(LoopCovector(
                    u.values()
                        .iter()
                        .zip(&grad)
                        .map(|(p, gj)| CotangentVec {
                            base: p.clone(),
                            covec: n.pullback_embedded_gradient(p, gj),
                        })
                        .collect(),
                ))
            }
            None => self.fd_differential(u),
        }
    }

    pub fn fd_differential(&self, u: &DiscreteMap) -> Result<LoopCovector> {
        let n = u.target().clone();
        let h = self.fd_step;
        let mut work = u.clone();
        let mut out = Vec::with_capacity(u.grid_size());
        for j in 0..u.grid_size() {
            let x = u.values[j].clone();
            let mut covec = vec![0.0; n.ambient_dim()];
            for e in n.tangent_frame(&x) {
                let step: Vec<f64> = e.iter().map(|a| a * h).collect();
                let back: Vec<f64> = e.iter().map(|a| -a * h).collect();
                work.values[j] = n.exp_raw(&x, &step);
                let fp = self.eval(&work);
                work.values[j] = n.exp_raw(&x, &back);
                let fm = self.eval(&work);
                if !(fp.is_finite() && fm.is_finite()) {
                    return Err(Error::Evaluation("non-finite value in finite differences".into()));
                }
                let c = (fp - fm) / (2.0 * h);
                if c.abs() > 4.0 * f64::EPSILON * fp.abs().max(fm.abs()) / h {
                    covec.iter_mut().zip(&e).for_each(|(a, b)| *a += c * b);
                }
            }
            work.values[j] = x.clone();
            out.push(CotangentVec { base: x, covec });
        }
        Ok(LoopCovector(out))
    }
}

/// Differential of a loop functional: one covector per node.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopCovector(pub Vec<CotangentVec>);

/// The loop space `C∞(S¹, N)` with the pointwise-lifted linearization.
/// Displacement is the discrete `L²` geodesic distance.
#[derive(Clone, Debug)]
pub struct LoopSpace<'a> {
    pub lin: &'a Linearization,
}

impl DescentSpace for LoopSpace<'_> {
    type Point = DiscreteMap;
    type Covector = LoopCovector;

    fn along(&self, u: &DiscreteMap, xi: &LoopCovector, t: f64) -> DiscreteMap {
        // node-wise δ(t·ξ_j, 0) without building the bundle elements
        let n = self.lin.manifold();
        let mut v = vec![0.0; n.ambient_dim()];
        let values = xi
            .0
            .iter()
            .map(|c| {
                v.iter_mut().zip(&c.covec).for_each(|(a, b)| *a = b * t);
                let nv = norm(&v);
                if nv == 0.0 {
                    return c.base.clone();
                }
                let scale = self.lin.saturated_length(nv, 0.0) / nv;
                v.iter_mut().for_each(|a| *a *= scale);
                n.exp_raw(&c.base, &v)
            })
            .collect();
        DiscreteMap {
            target: u.target.clone(),
            values,
        }
    }

    fn covector_norm(&self, xi: &LoopCovector) -> f64 {
        let m = self.lin.manifold();
        xi.0.iter().map(|c| m.covector_norm(c).powi(2)).sum::<f64>().sqrt()
    }

    fn displacement(&self, x: &DiscreteMap, y: &DiscreteMap) -> f64 {
        x.l2_distance(y)
    }

    fn coordinates(&self, x: &DiscreteMap) -> Vec<f64> {
        x.values.iter().flat_map(|p| p.coords().iter().copied()).collect()
    }

    fn embed(&self, x: &DiscreteMap) -> Vec<f64> {
        x.ambient().concat()
    }
}

impl Objective<LoopSpace<'_>> for MapFunctional<'_> {
    fn value(&self, _space: &LoopSpace<'_>, u: &DiscreteMap) -> f64 {
        self.eval(u)
    }

    fn differential(&self, _space: &LoopSpace<'_>, u: &DiscreteMap) -> Result<LoopCovector> {
        MapFunctional::differential(self, u)
    }
}

/// `‖u_n − u_last‖_{W^{s,2}}` along the trace for one order `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SobolevDiagnostic {
    pub s: f64,
    pub distances: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct MappingRun {
    pub trace: DescentTrace<DiscreteMap>,
    pub sobolev: Vec<SobolevDiagnostic>,
    /// Degree of each iterate, for circle-valued loops.
    pub winding: Option<Vec<i64>>,
    /// Largest per-node geodesic step of each update.
    pub max_node_steps: Vec<f64>,
}

impl MappingRun {
    pub fn winding_constant(&self) -> Option<bool> {
        self.winding.as_ref().map(|w| w.windows(2).all(|p| p[0] == p[1]))
    }

    /// Whether every per-node step stayed below `π`, the condition under
    /// which the degree cannot jump.
    pub fn steps_below_pi(&self) -> bool {
        self.max_node_steps.iter().all(|&s| s < PI)
    }
}

/// Descent on a loop functional, with Sobolev distances to the final iterate
/// (the limit candidate) for each order in `s_list`.
pub fn run_mapping_descent(
    lin: &Linearization,
    f: &MapFunctional<'_>,
    u0: &DiscreteMap,
    cfg: &DescentConfig,
    s_list: &[f64],
) -> std::result::Result<MappingRun, DescentError<DiscreteMap>> {
    if let Err(error) = check_target(lin, u0) {
        let trace = DescentTrace {
            iterates: vec![u0.clone()],
            values: vec![f.eval(u0)],
            steps: vec![0.0],
            displacements: vec![1.0 + cfg.eps],
            stop: crate::descent::StopReason::MaxIterations,
        };
        return Err(DescentError { trace, error });
    }
    let space = LoopSpace { lin };
    let trace = descend(&space, f, u0, cfg)?;
    let last = trace.last().clone();
    let sobolev = s_list
        .iter()
        .map(|&s| SobolevDiagnostic {
            s,
            distances: trace
                .iterates
                .iter()
                .map(|u| sobolev_norm_samples(&u.ambient_difference(&last).expect("same grid"), s))
                .collect(),
        })
        .collect();
    let winding = trace
        .iterates
        .iter()
        .map(DiscreteMap::winding_number)
        .collect::<Option<Vec<i64>>>();
    let n = lin.manifold();
    let max_node_steps = trace
        .iterates
        .windows(2)
        .map(|w| {
            w[0].values
                .iter()
                .zip(&w[1].values)
                .map(|(a, b)| n.distance(a, b))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(MappingRun {
        trace,
        sobolev,
        winding,
        max_node_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::StopReason;
    use crate::method::MethodKind;

    fn circle_loop(m: usize, f: impl Fn(f64) -> f64) -> DiscreteMap {
        DiscreteMap::from_fn(Manifold::circle(), m, |t| vec![f(t)]).unwrap()
    }

    fn brute_dft(samples: &[Vec<f64>]) -> Vec<Vec<Complex<f64>>> {
        let m = samples.len();
        (0..samples[0].len())
            .map(|c| {
                (0..m)
                    .map(|k| {
                        samples
                            .iter()
                            .enumerate()
                            .map(|(j, row)| {
                                let a = -TAU * (j * k) as f64 / m as f64;
                                Complex::new(a.cos(), a.sin()) * row[c]
                            })
                            .sum::<Complex<f64>>()
                            / (m as f64).sqrt()
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn shape_invariants() {
        let c = Manifold::circle();
        let p = Point::new(vec![0.0]);
        assert!(DiscreteMap::constant(c.clone(), 2, p.clone()).is_err());
        assert!(DiscreteMap::constant(c.clone(), 5, p.clone()).is_err());
        assert!(DiscreteMap::new(c.clone(), vec![Point::new(vec![7.0]); 4]).is_err());
        let a = DiscreteMap::constant(c.clone(), 4, p.clone()).unwrap();
        let b = DiscreteMap::constant(c, 6, p).unwrap();
        let lin = Linearization::new(Manifold::circle());
        assert!(matches!(lifted_nu(&lin, &a, &b), Err(Error::Shape(_))));
        let s = DiscreteMap::constant(Manifold::sphere(1), 4, Point::new(vec![1.0, 0.0])).unwrap();
        assert!(matches!(lifted_nu(&lin, &a, &s), Err(Error::Shape(_))));
    }

    #[test]
    fn lifted_nu_is_pointwise() {
        let lin = Linearization::new(Manifold::circle());
        let f = circle_loop(4, |_| 0.0);
        let g = DiscreteMap::new(
            Manifold::circle(),
            [PI / 2.0, PI, 0.0, 3.0 * PI / 2.0].iter().map(|&a| Point::new(vec![a])).collect(),
        )
        .unwrap();
        let e = lifted_nu(&lin, &f, &g).unwrap();
        for j in 0..4 {
            assert_eq!(e.sections[j], lin.nu(&f.values()[j], &g.values()[j]));
            assert_eq!(e.sections[j].base(), &f.values()[j]);
        }
        assert!((e.sections[0].xi.covec[0] - PI / 2.0).abs() < 1e-15);
        assert_eq!(e.sections[1].xi.covec[0], 0.0);
        assert_eq!(e.sections[1].k, PI);
        assert!(e.sections[2].is_zero());
        assert!(lifted_nu(&lin, &f, &f).unwrap().is_zero());
    }

    #[test]
    fn lifted_nu_restricts_to_subgrids() {
        let lin = Linearization::new(Manifold::sphere(2));
        let n = Manifold::sphere(2);
        let f = DiscreteMap::from_fn(n.clone(), 8, |t| vec![t.cos(), t.sin(), 0.3]).unwrap();
        let g = DiscreteMap::from_fn(n.clone(), 8, |t| vec![0.2, t.cos(), t.sin()]).unwrap();
        let full = lifted_nu(&lin, &f, &g).unwrap();
        let even = |u: &DiscreteMap| {
            DiscreteMap::new(n.clone(), u.values().iter().step_by(2).cloned().collect()).unwrap()
        };
        let sub = lifted_nu(&lin, &even(&f), &even(&g)).unwrap();
        let picked: Vec<BundleElem> = full.sections.iter().step_by(2).cloned().collect();
        assert_eq!(sub.sections, picked);
    }

    #[test]
    fn lifted_delta_locality_and_zero() {
        let lin = Linearization::new(Manifold::sphere(2));
        let f = DiscreteMap::from_fn(Manifold::sphere(2), 6, |t| vec![t.cos(), t.sin(), 0.5]).unwrap();
        let zero = LiftedBundleElem::zero(f.clone());
        let (a, b) = lifted_delta(&lin, &zero).unwrap();
        assert_eq!(a, f);
        assert_eq!(b, f);

        let mut e = zero.clone();
        let x = f.values()[2].clone();
        let v = Manifold::sphere(2).project_tangent(&x, &[0.0, 0.0, 1.0]);
        e.sections[2] = BundleElem::from_covector(CotangentVec { base: x, covec: v });
        let (_, g) = lifted_delta(&lin, &e).unwrap();
        let moved: Vec<usize> = (0..6).filter(|&j| g.values()[j] != f.values()[j]).collect();
        assert_eq!(moved, vec![2]);
    }

    #[test]
    fn lifted_round_trip_after_desaturation() {
        let n = Manifold::sphere(2);
        let lin = Linearization::new(n.clone());
        let r = n.injectivity_radius();
        let f = DiscreteMap::from_fn(n.clone(), 8, |t| vec![t.cos(), t.sin(), 0.2]).unwrap();
        let g = DiscreteMap::from_fn(n.clone(), 8, |t| vec![(t + 0.3).cos(), (t + 0.3).sin(), 0.6]).unwrap();
        let mut e = lifted_nu(&lin, &f, &g).unwrap();
        for s in &mut e.sections {
            // solve r·a/√(1 + ((1+k)a)²) = |ξ| for the covector length a
            let len = s.xi.covec.iter().map(|c| c * c).sum::<f64>().sqrt();
            let a = len / (r * r - ((1.0 + s.k) * len).powi(2)).sqrt();
            s.xi.covec.iter_mut().for_each(|c| *c *= a / len);
        }
        let (_, back) = lifted_delta(&lin, &e).unwrap();
        for (p, q) in back.values().iter().zip(g.values()) {
            assert!(n.distance(p, q) < 1e-12);
        }
    }

    #[test]
    fn parseval_and_dft_oracle() {
        let n = Manifold::sphere(2);
        let u = DiscreteMap::from_fn(n, 16, |t| vec![(2.0 * t).cos(), t.sin(), 0.4 + (3.0 * t).cos()]).unwrap();
        let a = u.ambient();
        let l2 = a.iter().flatten().map(|c| c * c).sum::<f64>().sqrt();
        assert!((sobolev_norm(&u, 0.0) - l2).abs() < 1e-12);
        for (fast, slow) in unitary_dft(&a).iter().zip(brute_dft(&a)) {
            for (p, q) in fast.iter().zip(&slow) {
                assert!((p - q).norm() < 1e-12);
            }
        }
        for s in [-1.5, -0.5, 0.5, 1.0] {
            let slow: f64 = brute_dft(&a)
                .iter()
                .flat_map(|c| c.iter().enumerate().map(|(j, z)| sobolev_weight(frequency(j, 16), s) * z.norm_sqr()))
                .sum();
            assert!((sobolev_norm(&u, s) - slow.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_and_constant() {
        let m = 32;
        let c = 1.0 / (m as f64).sqrt();
        let samples: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                let t = grid_time(j, m);
                vec![c * t.cos(), c * t.sin()]
            })
            .collect();
        // the loop is e^{it}/√m: a unit coefficient at k = 1 per complex component
        assert!((sobolev_norm_samples(&samples, -1.0) - 0.5f64.sqrt()).abs() < 1e-12);

        let p = Point::new(vec![0.6, 0.0, 0.8]);
        let u = DiscreteMap::constant(Manifold::sphere(2), m, p).unwrap();
        for s in [-2.0, 0.0, 1.5] {
            assert!((sobolev_norm(&u, s) - (m as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_monotone_in_order() {
        let u = circle_loop(16, |t| t + 0.3 * (3.0 * t).sin());
        let mut prev = 0.0;
        for s in [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let v = sobolev_norm(&u, s);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn spectrum_rows() {
        let u = circle_loop(8, |t| t);
        let rows = sobolev_spectrum(&u.ambient(), 1.0);
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].k, -3);
        assert_eq!(rows[7].k, 4);
        let total: f64 = rows.iter().map(|r| (r.multiplier * r.coefficient_norm).powi(2)).sum();
        assert!((total.sqrt() - sobolev_norm(&u, 1.0)).abs() < 1e-12);
        let mut buf = Vec::new();
        write_spectrum_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("k,multiplier,coefficient_norm\n-3,"));
    }

    #[test]
    fn dirichlet_values() {
        let c = circle_loop(16, |_| 1.0);
        assert_eq!(dirichlet_energy(&c), 0.0);
        for k in [1.0, 2.0, 3.0] {
            let u = circle_loop(256, |t| k * t);
            let e = dirichlet_energy(&u);
            assert!((e - PI * k * k).abs() / (PI * k * k) < 0.02, "{e}");
        }
        // chord form: m² sin²(π/m) / π
        let m = 64.0f64;
        let e = dirichlet_energy(&circle_loop(64, |t| t));
        assert!((e - m * m * (PI / m).sin().powi(2) / PI).abs() < 1e-12);
    }

    #[test]
    fn closed_form_differentials_match_fd() {
        let u = circle_loop(16, |t| t + 0.2 * (2.0 * t).sin());
        let d = MapFunctional::dirichlet();
        let a = d.differential(&u).unwrap();
        let b = d.fd_differential(&u).unwrap();
        for (p, q) in a.0.iter().zip(&b.0) {
            assert!((p.covec[0] - q.covec[0]).abs() < 1e-6);
        }

        let n = Manifold::sphere(2);
        let u = DiscreteMap::from_fn(n.clone(), 8, |t| vec![t.cos(), t.sin(), 0.7]).unwrap();
        let target = DiscreteMap::from_fn(n, 8, |t| vec![0.3, t.cos(), t.sin()]).unwrap();
        let f = MapFunctional::sobolev_tracking(target, -0.5);
        let a = f.differential(&u).unwrap();
        let b = f.fd_differential(&u).unwrap();
        for (p, q) in a.0.iter().zip(&b.0) {
            for (x, y) in p.covec.iter().zip(&q.covec) {
                assert!((x - y).abs() < 1e-6, "{x} {y}");
            }
        }
    }

    #[test]
    fn uniform_loop_is_critical() {
        let lin = Linearization::new(Manifold::circle());
        let u = circle_loop(64, |t| t);
        let run = run_mapping_descent(&lin, &MapFunctional::dirichlet(), &u, &DescentConfig::default(), &[0.0]).unwrap();
        assert_eq!(run.trace.stop, StopReason::ExactCriticalPoint);
        assert_eq!(run.trace.iterations(), 0);
    }

    #[test]
    fn perturbed_degree_one_loop_relaxes() {
        let lin = Linearization::new(Manifold::circle());
        let u0 = circle_loop(32, |t| t + 0.3 * (2.0 * t).sin() + 0.1 * (5.0 * t).cos());
        let cfg = DescentConfig {
            eps: 1e-9,
            n_max: 400,
            ..DescentConfig::default()
        };
        let run = run_mapping_descent(&lin, &MapFunctional::dirichlet(), &u0, &cfg, &[-1.0, 0.0]).unwrap();
        let t = &run.trace;
        assert!(t.is_monotone());
        assert_eq!(run.winding_constant(), Some(true));
        assert!(run.steps_below_pi());
        let target = 32.0f64.powi(2) * (PI / 32.0).sin().powi(2) / PI;
        assert!((t.final_value() - target).abs() < 0.01 * target, "{} vs {}", t.final_value(), target);
        for d in &run.sobolev {
            assert!(d.distances.iter().all(|x| x.is_finite()));
            assert_eq!(*d.distances.last().unwrap(), 0.0);
        }
    }

    #[test]
    fn sphere_loop_shrinks() {
        let n = Manifold::sphere(2);
        let lin = Linearization::new(n.clone());
        let u0 = DiscreteMap::from_fn(n, 16, |t| vec![0.6 * t.cos(), 0.6 * t.sin(), 0.8]).unwrap();
        let cfg = DescentConfig {
            n_max: 60,
            method: MethodKind::GoldenSection { iterations: 60 },
            ..DescentConfig::default()
        };
        let run = run_mapping_descent(&lin, &MapFunctional::dirichlet(), &u0, &cfg, &[]).unwrap();
        assert!(run.trace.is_monotone());
        assert!(run.trace.final_value() < 0.5 * run.trace.values[0]);
        assert!(run.winding.is_none());
    }

    #[test]
    fn flat_ambient_matches_embedding() {
        for n in [Manifold::circle(), Manifold::torus(2), Manifold::sphere(2)] {
            let u = DiscreteMap::new(n.clone(), (0..6).map(|s| n.random_point(s)).collect()).unwrap();
            let (flat, d) = u.ambient_flat();
            assert_eq!(d, n.embed_dim());
            assert_eq!(flat, u.ambient().concat());
        }
    }

    #[test]
    fn along_is_pointwise_delta() {
        let n = Manifold::sphere(2);
        let lin = Linearization::new(n.clone());
        let u = DiscreteMap::from_fn(n.clone(), 8, |t| vec![t.cos(), t.sin(), 0.4]).unwrap();
        let xi = MapFunctional::dirichlet().differential(&u).unwrap();
        let space = LoopSpace { lin: &lin };
        for t in [-0.7, 0.0, 0.3] {
            let fast = space.along(&u, &xi, t);
            let sections = xi.0.iter().map(|c| BundleElem::from_covector(c.scaled(t))).collect();
            let (_, slow) = lifted_delta(&lin, &LiftedBundleElem::new(u.clone(), sections).unwrap()).unwrap();
            for (p, q) in fast.values().iter().zip(slow.values()) {
                assert!(n.distance(p, q) < 1e-15);
            }
        }
    }

    #[test]
    fn map_csv() {
        let u = circle_loop(4, |t| t);
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next(), Some("t,a0,a1"));
        assert_eq!(s.lines().count(), 5);
    }
}
