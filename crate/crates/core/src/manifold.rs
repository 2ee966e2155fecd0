//! Built-in Riemannian manifolds: Euclidean space, unit spheres and flat tori.
//!
//! Points are stored in ambient coordinates. Spheres `S^n` live in `R^{n+1}`
//! with the induced metric; tori `T^n` are stored as angle tuples reduced to
//! `[0, 2π)` with the flat metric of circumference `2π` per coordinate. The
//! exponential and logarithm maps are the closed-form geodesic formulas of
//! each kind.
//!
//! Covectors are represented through the metric as tangent vectors, so the
//! musical isomorphisms `flat` and `sharp` only relabel the components.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default injectivity scale used for Euclidean space, which has none.
pub const DEFAULT_EUCLIDEAN_SCALE: f64 = 1.0;

/// Tolerance on the defining constraint of a point (unit norm, angle range).
pub const CONSTRAINT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    Euclidean,
    Sphere,
    Torus,
}

impl ManifoldKind {
    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::Euclidean => "euclidean",
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::Torus => "torus",
        }
    }
}

/// Element of a manifold, in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Wraps raw coordinates without checking any manifold constraint.
    /// Use [`Manifold::point`] to obtain a validated point.
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// Tangent vector `vec ∈ T_base M`, in ambient components.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVec {
    pub base: Point,
    pub vec: Vec<f64>,
}

/// Covector at `base`, represented through the metric by ambient components.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentVec {
    pub base: Point,
    pub covec: Vec<f64>,
}

impl CotangentVec {
    pub fn zero(base: Point) -> Self {
        let n = base.coords.len();
        CotangentVec {
            base,
            covec: vec![0.0; n],
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CotangentVec {
            base: self.base.clone(),
            covec: self.covec.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.covec.iter().all(|&c| c == 0.0)
    }
}

/// Descriptor of a built-in manifold together with its injectivity radius.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifold {
    kind: ManifoldKind,
    dim: usize,
    radius: f64,
}

impl Manifold {
    /// `R^dim` with the default scale `r = 1`.
    pub fn euclidean(dim: usize) -> Self {
        Manifold {
            kind: ManifoldKind::Euclidean,
            dim,
            radius: DEFAULT_EUCLIDEAN_SCALE,
        }
    }

    /// `R^dim` with an explicit saturation scale `r`.
    pub fn euclidean_with_scale(dim: usize, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Precondition(format!(
                "euclidean scale must be positive and finite, got {radius}"
            )));
        }
        Ok(Manifold {
            kind: ManifoldKind::Euclidean,
            dim,
            radius,
        })
    }

    /// Unit sphere `S^dim ⊂ R^{dim+1}`.
    pub fn sphere(dim: usize) -> Self {
        Manifold {
            kind: ManifoldKind::Sphere,
            dim,
            radius: PI,
        }
    }

    /// Flat torus `T^dim`, each factor a circle of circumference `2π`.
    pub fn torus(dim: usize) -> Self {
        Manifold {
            kind: ManifoldKind::Torus,
            dim,
            radius: PI,
        }
    }

    /// The circle `S^1` as the one-dimensional flat torus.
    pub fn circle() -> Self {
        Self::torus(1)
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored coordinates per point.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Sphere => self.dim + 1,
            ManifoldKind::Euclidean | ManifoldKind::Torus => self.dim,
        }
    }

    /// Dimension of the vector space the manifold is embedded in by [`Manifold::embed`].
    pub fn embed_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Torus => 2 * self.dim,
            _ => self.ambient_dim(),
        }
    }

    /// Injectivity radius `r` (the chosen scale for Euclidean space).
    pub fn injectivity_radius(&self) -> f64 {
        self.radius
    }

    /// Builds a point from coordinates, projecting onto the constraint set
    /// (normalization on spheres, angle reduction on tori).
    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        if coords.len() != self.ambient_dim() {
            return Err(Error::ContractViolation(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::ContractViolation("non-finite coordinate".into()));
        }
        match self.kind {
            ManifoldKind::Euclidean => Ok(Point::new(coords)),
            ManifoldKind::Sphere => {
                let n = norm(&coords);
                if n == 0.0 {
                    return Err(Error::ContractViolation(
                        "cannot project the origin onto the sphere".into(),
                    ));
                }
                Ok(Point::new(coords.iter().map(|c| c / n).collect()))
            }
            ManifoldKind::Torus => Ok(Point::new(coords.into_iter().map(reduce_angle).collect())),
        }
    }

    /// Whether `x` satisfies the defining constraint within [`CONSTRAINT_TOL`].
    pub fn contains(&self, x: &Point) -> bool {
        if x.coords.len() != self.ambient_dim() || x.coords.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match self.kind {
            ManifoldKind::Euclidean => true,
            ManifoldKind::Sphere => (norm(&x.coords) - 1.0).abs() <= CONSTRAINT_TOL,
            ManifoldKind::Torus => x.coords.iter().all(|&a| (0.0..TAU).contains(&a)),
        }
    }

    /// Orthogonal projection of an ambient vector onto `T_x M`.
    pub fn project_tangent(&self, x: &Point, v: &[f64]) -> Vec<f64> {
        match self.kind {
            ManifoldKind::Sphere => {
                let c = dot(&x.coords, v);
                v.iter().zip(&x.coords).map(|(a, b)| a - c * b).collect()
            }
            _ => v.to_vec(),
        }
    }

    /// Tangent vector at `x` from ambient components (projected).
    pub fn tangent(&self, x: &Point, v: &[f64]) -> Result<TangentVec> {
        if v.len() != self.ambient_dim() {
            return Err(Error::ContractViolation(format!(
                "expected {} tangent components, got {}",
                self.ambient_dim(),
                v.len()
            )));
        }
        Ok(TangentVec {
            base: x.clone(),
            vec: self.project_tangent(x, v),
        })
    }

    pub fn zero_tangent(&self, x: &Point) -> TangentVec {
        TangentVec {
            base: x.clone(),
            vec: vec![0.0; self.ambient_dim()],
        }
    }

    /// Riemannian inner product on `T_x M`; every built-in metric is the
    /// ambient one.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        dot(a, b)
    }

    /// Exponential map `exp_x(v)`.
    pub fn exp(&self, x: &Point, v: &TangentVec) -> Result<Point> {
        if v.base != *x {
            return Err(Error::ContractViolation(
                "tangent vector is not based at the given point".into(),
            ));
        }
        Ok(self.exp_raw(x, &v.vec))
    }

    /// Exponential map on raw tangent components. A zero vector returns `x`
    /// bit-for-bit.
    pub(crate) fn exp_raw(&self, x: &Point, v: &[f64]) -> Point {
        match self.kind {
            ManifoldKind::Euclidean => {
                Point::new(x.coords.iter().zip(v).map(|(a, b)| a + b).collect())
            }
            ManifoldKind::Sphere => {
                let n = norm(v);
                if n == 0.0 {
                    return x.clone();
                }
                let (s, c) = n.sin_cos();
                let mut y: Vec<f64> = x
                    .coords
                    .iter()
                    .zip(v)
                    .map(|(p, w)| c * p + s * w / n)
                    .collect();
                let ny = norm(&y);
                y.iter_mut().for_each(|a| *a /= ny);
                Point::new(y)
            }
            ManifoldKind::Torus => {
                if v.iter().all(|&a| a == 0.0) {
                    return x.clone();
                }
                Point::new(
                    x.coords
                        .iter()
                        .zip(v)
                        .map(|(a, b)| reduce_angle(a + b))
                        .collect(),
                )
            }
        }
    }

    /// Logarithm map `log_x(y)`, defined for `d(x, y) < r`.
    pub fn log(&self, x: &Point, y: &Point) -> Result<TangentVec> {
        let d = self.distance(x, y);
        if d >= self.radius {
            return Err(Error::CutLocus {
                distance: d,
                radius: self.radius,
            });
        }
        let vec = match self.kind {
            ManifoldKind::Euclidean => y.coords.iter().zip(&x.coords).map(|(a, b)| a - b).collect(),
            ManifoldKind::Sphere => {
                let c = dot(&x.coords, &y.coords);
                let u: Vec<f64> = y
                    .coords
                    .iter()
                    .zip(&x.coords)
                    .map(|(a, b)| a - c * b)
                    .collect();
                let nu = norm(&u);
                if nu == 0.0 || d == 0.0 {
                    vec![0.0; u.len()]
                } else {
                    u.iter().map(|a| a * d / nu).collect()
                }
            }
            ManifoldKind::Torus => y
                .coords
                .iter()
                .zip(&x.coords)
                .map(|(b, a)| signed_angle(b - a))
                .collect(),
        };
        Ok(TangentVec {
            base: x.clone(),
            vec,
        })
    }

    /// Geodesic distance. Exactly symmetric in its arguments.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match self.kind {
            ManifoldKind::Euclidean => dist2(&x.coords, &y.coords).sqrt(),
            ManifoldKind::Sphere => {
                let chord = dist2(&x.coords, &y.coords).sqrt();
                2.0 * (0.5 * chord).min(1.0).asin()
            }
            ManifoldKind::Torus => x
                .coords
                .iter()
                .zip(&y.coords)
                .map(|(a, b)| {
                    let d = (a - b).abs();
                    let d = d.min(TAU - d);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Metric isomorphism `T_x M → T*_x M`.
    pub fn flat(&self, v: &TangentVec) -> CotangentVec {
        CotangentVec {
            base: v.base.clone(),
            covec: v.vec.clone(),
        }
    }

    /// Metric isomorphism `T*_x M → T_x M`.
    pub fn sharp(&self, xi: &CotangentVec) -> TangentVec {
        TangentVec {
            base: xi.base.clone(),
            vec: xi.covec.clone(),
        }
    }

    /// Norm of a covector in the dual metric.
    pub fn covector_norm(&self, xi: &CotangentVec) -> f64 {
        norm(&xi.covec)
    }

    /// Orthonormal frame of `T_x M` (as ambient vectors).
    pub fn tangent_frame(&self, x: &Point) -> Vec<Vec<f64>> {
        let n = self.ambient_dim();
        let unit = |i: usize| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        };
        match self.kind {
            ManifoldKind::Euclidean | ManifoldKind::Torus => (0..n).map(unit).collect(),
            ManifoldKind::Sphere => {
                let mut frame: Vec<Vec<f64>> = Vec::with_capacity(self.dim);
                for i in 0..n {
                    if frame.len() == self.dim {
                        break;
                    }
                    let mut e = self.project_tangent(x, &unit(i));
                    for f in &frame {
                        let c = dot(&e, f);
                        e.iter_mut().zip(f).for_each(|(a, b)| *a -= c * b);
                    }
                    let ne = norm(&e);
                    if ne > 0.1 {
                        e.iter_mut().for_each(|a| *a /= ne);
                        frame.push(e);
                    }
                }
                frame
            }
        }
    }

    /// Embedding into a Euclidean space: identity for Euclidean space and
    /// spheres, `θ ↦ (cos θ, sin θ)` per factor for tori.
    pub fn embed(&self, x: &Point) -> Vec<f64> {
        match self.kind {
            ManifoldKind::Torus => x
                .coords
                .iter()
                .flat_map(|a| {
                    let (s, c) = a.sin_cos();
                    [c, s]
                })
                .collect(),
            _ => x.coords.clone(),
        }
    }

    /// Pulls a gradient taken in embedding coordinates back to a tangent
    /// vector at `x` (in stored coordinates).
    pub fn pullback_embedded_gradient(&self, x: &Point, g: &[f64]) -> Vec<f64> {
        match self.kind {
            ManifoldKind::Torus => x
                .coords
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let (s, c) = a.sin_cos();
                    -s * g[2 * i] + c * g[2 * i + 1]
                })
                .collect(),
            _ => self.project_tangent(x, g),
        }
    }

    /// Deterministic random point. Spheres use normalized Gaussians (uniform),
    /// tori uniform angles, Euclidean space the cube `[-1, 1]^n`.
    pub fn random_point(&self, seed: u64) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_point(&mut rng)
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let n = self.ambient_dim();
        match self.kind {
            ManifoldKind::Euclidean => {
                Point::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            }
            ManifoldKind::Sphere => loop {
                let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let ng = norm(&g);
                if ng > 1e-8 {
                    break Point::new(g.iter().map(|a| a / ng).collect());
                }
            },
            ManifoldKind::Torus => Point::new((0..n).map(|_| rng.random_range(0.0..TAU)).collect()),
        }
    }

    /// Gaussian tangent vector at `x` scaled by `scale`.
    pub fn sample_tangent<R: Rng + ?Sized>(&self, x: &Point, rng: &mut R, scale: f64) -> TangentVec {
        let g: Vec<f64> = (0..self.ambient_dim())
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        TangentVec {
            base: x.clone(),
            vec: self.project_tangent(x, &g),
        }
    }

    /// A point at maximal distance from `x` (antipode, opposite corner), or at
    /// twice the scale for Euclidean space.
    pub fn far_point(&self, x: &Point) -> Point {
        match self.kind {
            ManifoldKind::Euclidean => {
                let mut c = x.coords.clone();
                c[0] += 2.0 * self.radius;
                Point::new(c)
            }
            ManifoldKind::Sphere => Point::new(x.coords.iter().map(|a| -a).collect()),
            ManifoldKind::Torus => Point::new(x.coords.iter().map(|a| reduce_angle(a + PI)).collect()),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Reduces an angle to `[0, 2π)`.
pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Representative of an angle difference in `(-π, π]`.
pub fn signed_angle(d: f64) -> f64 {
    let r = reduce_angle(d);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
