//! Gap functions on `E = T*X × ℝ` and the distances they induce.
//!
//! `d_X(x, y)` is the largest value of `|gap(ν(z, x)) − gap(ν(z, y))|` over a
//! finite witness set augmented with `{x, y}`. The augmentation includes the
//! witness `z = x`, whose term equals `gap(ν(x, y))`, so distinct points are
//! always separated.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::AuditReport;
use crate::error::{Error, Result};
use crate::linearization::{BundleElem, LinearizationMap};
use crate::manifold::{ManifoldKind, Manifold, Point};

/// Sampled `d_X(x, y)` below this value count as a separation failure.
pub const SEPARATION_FLOOR: f64 = 1e-12;
pub const TRIANGLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GapShape {
    /// `ρ(√(‖ξ‖² + k²))` with `ρ(t) = t / (1 + t)`.
    #[default]
    BoundedNorm,
    /// `ρ(k) − ρ(‖ξ‖)`. Vanishes wherever the cotangent part carries the full
    /// distance, so it is NOT a valid gap; kept as a negative control for
    /// the metric audit.
    SignedDifference,
}

impl GapShape {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bounded-norm" => Some(GapShape::BoundedNorm),
            "signed-difference" => Some(GapShape::SignedDifference),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct GapFn {
    pub shape: GapShape,
}

impl GapFn {
    pub fn new(shape: GapShape) -> Self {
        GapFn { shape }
    }

    pub fn eval(&self, e: &BundleElem) -> f64 {
        let xi2: f64 = e.xi.covec.iter().map(|c| c * c).sum();
        match self.shape {
            GapShape::BoundedNorm => saturate((xi2 + e.k * e.k).sqrt()),
            GapShape::SignedDifference => saturate(e.k.abs()) - saturate(xi2.sqrt()),
        }
    }
}

fn saturate(t: f64) -> f64 {
    t / (1.0 + t)
}

/// Free-function form of [`GapFn::eval`].
pub fn gap_eval(g: &GapFn, e: &BundleElem) -> f64 {
    g.eval(e)
}

/// Finite stand-in for the supremum over `z ∈ X`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSet {
    points: Vec<Point>,
}

impl WitnessSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("witness set must be nonempty".into()));
        }
        Ok(WitnessSet { points })
    }

    pub fn random(m: &Manifold, seed: u64, count: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new((0..count).map(|_| m.sample_point(&mut rng)).collect())
    }

    /// Deterministic grid: uniform angles on circles and tori, a Fibonacci
    /// lattice on `S^2`, a cube lattice on `[-r, r]^n` for Euclidean space.
    pub fn grid(m: &Manifold, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Precondition("witness set must be nonempty".into()));
        }
        let points = match (m.kind(), m.dim()) {
            (ManifoldKind::Sphere, 1) => (0..count)
                .map(|i| {
                    let a = TAU * i as f64 / count as f64;
                    Point::new(vec![a.cos(), a.sin()])
                })
                .collect(),
            (ManifoldKind::Sphere, 2) => {
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..count)
                    .map(|i| {
                        let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                        let rho = (1.0 - z * z).max(0.0).sqrt();
                        let a = golden * i as f64;
                        Point::new(vec![rho * a.cos(), rho * a.sin(), z])
                    })
                    .collect()
            }
            (ManifoldKind::Sphere, _) => {
                return Err(Error::Precondition(
                    "grid witnesses are only available on S^1 and S^2".into(),
                ))
            }
            (ManifoldKind::Torus, n) => {
                let per = per_axis(count, n);
                lattice(n, per)
                    .into_iter()
                    .map(|idx| Point::new(idx.iter().map(|&i| TAU * i as f64 / per as f64).collect()))
                    .collect()
            }
            (ManifoldKind::Euclidean, n) => {
                let per = per_axis(count, n).max(2);
                let r = m.injectivity_radius();
                lattice(n, per)
                    .into_iter()
                    .map(|idx| {
                        Point::new(
                            idx.iter()
                                .map(|&i| -r + 2.0 * r * i as f64 / (per - 1) as f64)
                                .collect(),
                        )
                    })
                    .collect()
            }
        };
        Self::new(points)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_extra(&self, extra: impl IntoIterator<Item = Point>) -> Self {
        let mut points = self.points.clone();
        points.extend(extra);
        WitnessSet { points }
    }
}

fn per_axis(count: usize, n: usize) -> usize {
    let mut per = (count as f64).powf(1.0 / n as f64).round() as usize;
    while per.pow(n as u32) > count && per > 1 {
        per -= 1;
    }
    per.max(1)
}

fn lattice(n: usize, per: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..per).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

/// Witness-max distance `d_X(x, y)` over `w ∪ {x, y}`.
pub fn dist_x<L: LinearizationMap + ?Sized>(
    lin: &L,
    gap: &GapFn,
    x: &Point,
    y: &Point,
    w: &WitnessSet,
) -> f64 {
    if x == y {
        return 0.0;
    }
    let term = |z: &Point| (gap.eval(&lin.nu(z, x)) - gap.eval(&lin.nu(z, y))).abs();
    w.points
        .iter()
        .chain([x, y])
        .map(term)
        .fold(0.0, f64::max)
}

/// Fiberwise distance `d_X(δ(u − v)) + d_X(δ(v − u))`.
pub fn dist_e<L: LinearizationMap + ?Sized>(
    lin: &L,
    gap: &GapFn,
    u: &BundleElem,
    v: &BundleElem,
    w: &WitnessSet,
) -> Result<f64> {
    let uv = u.sub(v)?;
    let vu = v.sub(u)?;
    let (a, b) = lin.delta(&uv);
    let (c, d) = lin.delta(&vu);
    Ok(dist_x(lin, gap, &a, &b, w) + dist_x(lin, gap, &c, &d, w))
}

/// Checks separation, exact symmetry and the triangle inequality of `d_X`
/// on random triples.
pub fn metric_audit<L: LinearizationMap + ?Sized>(
    lin: &L,
    gap: &GapFn,
    w: &WitnessSet,
    triples: usize,
    seed: u64,
) -> Result<AuditReport> {
    if triples == 0 {
        return Err(Error::Precondition("metric audit needs triples >= 1".into()));
    }
    let m = lin.manifold();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport::new(format!(
        "gap metric on {}^{} with {} witnesses",
        m.kind().name(),
        m.dim(),
        w.len()
    ));

    let mut min_sep = f64::INFINITY;
    let mut self_dist = 0.0f64;
    let mut asym = 0.0f64;
    let mut tri = f64::NEG_INFINITY;
    let mut tri_witness = String::new();
    let mut gap_bad = 0usize;
    let mut gap_worst = f64::INFINITY;
    let mut gap_witness = String::new();
    for _ in 0..triples {
        let x = m.sample_point(&mut rng);
        let y = m.sample_point(&mut rng);
        let z = m.sample_point(&mut rng);
        let dxy = dist_x(lin, gap, &x, &y, w);
        let dyx = dist_x(lin, gap, &y, &x, w);
        let dyz = dist_x(lin, gap, &y, &z, w);
        let dxz = dist_x(lin, gap, &x, &z, w);
        self_dist = self_dist.max(dist_x(lin, gap, &x, &x, w));

        // gap ≥ 0 with equality exactly on the zero section
        let v = m.sample_tangent(&x, &mut rng, 1.0);
        let k = rng.random_range(-3.0..3.0);
        let mut off_zero = BundleElem::from_covector(m.flat(&v));
        off_zero.k = k;
        let zero_val = gap.eval(&BundleElem::zero(x.clone()));
        for e in [lin.nu(&x, &y), lin.nu(&y, &z), off_zero] {
            let g = gap.eval(&e);
            if !e.is_zero() {
                gap_worst = gap_worst.min(g);
            }
            if !(g >= 0.0) || (g == 0.0) != e.is_zero() || zero_val != 0.0 {
                gap_bad += 1;
                if gap_witness.is_empty() {
                    gap_witness = format!("gap = {g:e} at |k| = {:e}", e.k.abs());
                }
            }
        }
        for (d, a, b) in [(dxy, &x, &y), (dyz, &y, &z), (dxz, &x, &z)] {
            if a != b {
                min_sep = min_sep.min(d);
            }
        }
        asym = asym.max((dxy - dyx).abs());
        let excess = dxz - (dxy + dyz);
        if excess > tri {
            tri = excess;
            tri_witness = format!("d(x,z)={dxz:e} d(x,y)={dxy:e} d(y,z)={dyz:e}");
        }
    }
    report.push(
        "gap_definite",
        gap_bad == 0,
        gap_worst,
        format!("{gap_bad} bundle elements where gap < 0 or gap = 0 off the zero section. {gap_witness}"),
    );
    report.push(
        "separation",
        min_sep > SEPARATION_FLOOR && self_dist == 0.0,
        min_sep,
        format!("smallest d_X over distinct sampled pairs (floor {SEPARATION_FLOOR:e}); d_X(x,x) = {self_dist:e}"),
    );
    report.push(
        "symmetry",
        asym == 0.0,
        asym,
        "largest |d_X(x,y) - d_X(y,x)|",
    );
    report.push(
        "triangle",
        tri <= TRIANGLE_TOL,
        tri.max(0.0),
        format!("largest d_X(x,z) - d_X(x,y) - d_X(y,z) (tol {TRIANGLE_TOL:e}); {tri_witness}"),
    );
    Ok(report)
}
