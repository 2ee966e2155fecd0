//! Generalized linearizations `(ν, δ)` with values in `E = T*X × ℝ`.
//!
//! `ν(x, y)` pairs a cotangent vector at `x` (the metric dual of the
//! logarithm, faded out by a smooth cutoff before the cut locus) with the
//! geodesic distance `d(x, y)`. The distance slot makes `ν(x, y) = 0` hold
//! exactly on the diagonal even where the cotangent part has been cut off.
//!
//! `δ(ξ, k)` follows the geodesic from the base point in direction `ξ♯`
//! for the saturated length `r‖ξ‖ / √(1 + (1+|k|)²‖ξ‖²)`, which never
//! reaches the injectivity radius `r`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audit::AuditReport;
use crate::error::{Error, Result};
use crate::manifold::{dot, norm, CotangentVec, Manifold, Point};

/// Default `ρ_c`: the cutoff vanishes from `ρ_c · r` on.
pub const DEFAULT_CUTOFF_FRACTION: f64 = 0.9;
/// Width of the cutoff transition as a fraction of its outer radius.
pub const CUTOFF_TRANSITION_WIDTH: f64 = 0.1;

/// Element `(ξ, k)` of the fiber `T*_x X × ℝ` over `x = ξ.base`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleElem {
    pub xi: CotangentVec,
    pub k: f64,
}

impl BundleElem {
    pub fn zero(base: Point) -> Self {
        BundleElem {
            xi: CotangentVec::zero(base),
            k: 0.0,
        }
    }

    /// Embeds a covector through `T*X ⊂ E` (`k = 0`).
    pub fn from_covector(xi: CotangentVec) -> Self {
        BundleElem { xi, k: 0.0 }
    }

    pub fn base(&self) -> &Point {
        &self.xi.base
    }

    pub fn is_zero(&self) -> bool {
        self.k == 0.0 && self.xi.is_zero()
    }

    /// Fiberwise difference `self − other`, componentwise on `(ξ, k)`.
    pub fn sub(&self, other: &BundleElem) -> Result<BundleElem> {
        if self.base() != other.base() {
            return Err(Error::FiberMismatch);
        }
        Ok(BundleElem {
            xi: CotangentVec {
                base: self.xi.base.clone(),
                covec: self
                    .xi
                    .covec
                    .iter()
                    .zip(&other.xi.covec)
                    .map(|(a, b)| a - b)
                    .collect(),
            },
            k: self.k - other.k,
        })
    }
}

/// C^∞ nonincreasing bump: 1 on `[0, inner]`, 0 on `[outer, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    inner: f64,
    outer: f64,
}

impl Cutoff {
    pub fn new(inner: f64, outer: f64) -> Self {
        assert!(0.0 < inner && inner < outer, "cutoff needs 0 < inner < outer");
        Cutoff { inner, outer }
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn value(&self, d: f64) -> f64 {
        if d <= self.inner {
            return 1.0;
        }
        if d >= self.outer {
            return 0.0;
        }
        let s = (d - self.inner) / (self.outer - self.inner);
        let up = bump_edge(1.0 - s);
        let down = bump_edge(s);
        up / (up + down)
    }
}

fn bump_edge(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Interface of a linearization; lets audits run against modified maps.
pub trait LinearizationMap {
    fn manifold(&self) -> &Manifold;
    fn nu(&self, x: &Point, y: &Point) -> BundleElem;
    fn delta(&self, e: &BundleElem) -> (Point, Point);
}

/// The constructive linearization of a built-in manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct Linearization {
    manifold: Manifold,
    cutoff_fraction: f64,
    cutoff: Cutoff,
}

impl Linearization {
    pub fn new(manifold: Manifold) -> Self {
        Self::with_cutoff_fraction(manifold, DEFAULT_CUTOFF_FRACTION)
            .expect("default cutoff fraction is valid")
    }

    pub fn with_cutoff_fraction(manifold: Manifold, cutoff_fraction: f64) -> Result<Self> {
        if !(cutoff_fraction > 0.0 && cutoff_fraction < 1.0) {
            return Err(Error::Precondition(format!(
                "cutoff fraction must lie in (0, 1), got {cutoff_fraction}"
            )));
        }
        let outer = cutoff_fraction * manifold.injectivity_radius();
        let cutoff = Cutoff::new(outer * (1.0 - CUTOFF_TRANSITION_WIDTH), outer);
        Ok(Linearization {
            manifold,
            cutoff_fraction,
            cutoff,
        })
    }

    pub fn cutoff_fraction(&self) -> f64 {
        self.cutoff_fraction
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    /// Length of the geodesic argument used by `δ(ξ, k)`.
    pub fn saturated_length(&self, xi_norm: f64, k: f64) -> f64 {
        let r = self.manifold.injectivity_radius();
        let s = (1.0 + k.abs()) * xi_norm;
        r * xi_norm / (1.0 + s * s).sqrt()
    }

    /// Second component of `δ(e)`.
    pub fn delta_target(&self, e: &BundleElem) -> Point {
        let m = &self.manifold;
        let v = &e.xi.covec;
        let nv = norm(v);
        if nv == 0.0 {
            return e.base().clone();
        }
        let scale = self.saturated_length(nv, e.k) / nv;
        let arg: Vec<f64> = v.iter().map(|a| a * scale).collect();
        m.exp_raw(e.base(), &arg)
    }
}

impl LinearizationMap for Linearization {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn nu(&self, x: &Point, y: &Point) -> BundleElem {
        let m = &self.manifold;
        let d = m.distance(x, y);
        let chi = self.cutoff.value(d);
        let covec = if chi > 0.0 {
            // χ > 0 only strictly inside the injectivity radius
            let v = m.log(x, y).expect("cutoff vanishes before the cut locus");
            v.vec.iter().map(|a| chi * a).collect()
        } else {
            vec![0.0; m.ambient_dim()]
        };
        BundleElem {
            xi: CotangentVec {
                base: x.clone(),
                covec,
            },
            k: d,
        }
    }

    fn delta(&self, e: &BundleElem) -> (Point, Point) {
        (e.base().clone(), self.delta_target(e))
    }
}

/// `k(ξ, y) = ⟨ν(x, y), ξ⟩` with `x` the base of `ξ`.
pub fn pairing_k<L: LinearizationMap + ?Sized>(lin: &L, xi: &CotangentVec, y: &Point) -> f64 {
    let e = lin.nu(&xi.base, y);
    let m = lin.manifold();
    m.inner(&m.sharp(&e.xi).vec, &m.sharp(xi).vec)
}

const FD_STEP: f64 = 1e-5;
const DERIVATIVE_IDENTITY_TOL: f64 = 1e-4;

/// Numerical audit of the linearization axioms on random samples.
///
/// Items: diagram commutation for `δ` and `ν`, zero section ↔ diagonal,
/// `ν(x, y) = 0 ⟺ x = y` (including far pairs), nonvanishing differential of
/// `y ↦ ν(x, y)` at `y = x`, the derivative identity
/// `D_0((1/r)ν ∘ δ) = Id` on the `k = 0` slice, and injectivity of the
/// differential of `y ↦ δ(ν(x, y))` at `y = x`.
pub fn check_linearization<L: LinearizationMap + ?Sized>(
    lin: &L,
    samples: usize,
    seed: u64,
) -> Result<AuditReport> {
    if samples == 0 {
        return Err(Error::Precondition("linearization audit needs samples >= 1".into()));
    }
    let m = lin.manifold().clone();
    let r = m.injectivity_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport::new(format!("linearization on {}^{}", m.kind().name(), m.dim()));

    let mut delta_proj_ok = true;
    let mut diag_ok = true;
    let mut diag_worst = f64::INFINITY;
    let mut nu_proj_ok = true;
    let mut sep_failures = 0usize;
    let mut sep_detail = String::new();
    let mut dnu_worst = f64::INFINITY;
    let mut ident_worst = 0.0f64;
    let mut inj_worst = f64::INFINITY;

    for _ in 0..samples {
        let x = m.sample_point(&mut rng);
        let y = m.sample_point(&mut rng);

        // item 2: δ over the zero section is the diagonal, and only there
        let zero = BundleElem::zero(x.clone());
        let (a, b) = lin.delta(&zero);
        if a != x || b != x {
            diag_ok = false;
        }
        let v = m.sample_tangent(&x, &mut rng, 1.0);
        for scale in [1e-3, 1.0, 1e3] {
            let e = BundleElem::from_covector(m.flat(&v).scaled(scale));
            let (a, b) = lin.delta(&e);
            if a != x {
                delta_proj_ok = false;
            }
            let moved = m.distance(&x, &b);
            diag_worst = diag_worst.min(moved);
            if moved == 0.0 {
                diag_ok = false;
            }
        }

        // items 4 and 6
        let far = m.far_point(&x);
        for (target, label) in [(&x, "diagonal"), (&y, "random"), (&far, "far")] {
            let e = lin.nu(&x, target);
            if e.base() != &x {
                nu_proj_ok = false;
            }
            let same = target == &x;
            if e.is_zero() != same {
                sep_failures += 1;
                if sep_detail.is_empty() {
                    sep_detail = format!(
                        "{label} pair at distance {:.6} has nu {}",
                        m.distance(&x, target),
                        if same { "nonzero" } else { "zero" }
                    );
                }
            }
        }

        // item 5: differential of y ↦ ν(x, y).ξ at y = x
        let frame = m.tangent_frame(&x);
        let mut dnu_sq = 0.0;
        let mut jac: Vec<Vec<f64>> = Vec::with_capacity(frame.len());
        for e_i in &frame {
            let plus = m.exp_raw(&x, &scaled(e_i, FD_STEP));
            let minus = m.exp_raw(&x, &scaled(e_i, -FD_STEP));
            let dp = lin.nu(&x, &plus).xi.covec;
            let dm = lin.nu(&x, &minus).xi.covec;
            let col: Vec<f64> = dp
                .iter()
                .zip(&dm)
                .map(|(p, q)| (p - q) / (2.0 * FD_STEP))
                .collect();
            dnu_sq += dot(&col, &col);

            // item 7: differential of y ↦ δ(ν(x, y)).1, in frame coordinates
            let yp = lin.delta(&lin.nu(&x, &plus)).1;
            let ym = lin.delta(&lin.nu(&x, &minus)).1;
            let lp = m.log(&x, &yp).map(|t| t.vec);
            let lm = m.log(&x, &ym).map(|t| t.vec);
            match (lp, lm) {
                (Ok(lp), Ok(lm)) => jac.push(
                    frame
                        .iter()
                        .map(|f| (dot(f, &lp) - dot(f, &lm)) / (2.0 * FD_STEP))
                        .collect(),
                ),
                _ => jac.push(vec![0.0; frame.len()]),
            }
        }
        dnu_worst = dnu_worst.min(dnu_sq.sqrt());
        inj_worst = inj_worst.min(min_column_residual(&jac) / r);

        // derivative identity on the k = 0 slice
        let xi = m.flat(&v);
        let e = BundleElem::from_covector(xi.scaled(FD_STEP));
        let target = lin.delta(&e).1;
        let back = lin.nu(&x, &target).xi.covec;
        let resid: Vec<f64> = back
            .iter()
            .zip(&e.xi.covec)
            .map(|(b, h)| b / r - h)
            .collect();
        ident_worst = ident_worst.max(norm(&resid) / FD_STEP);
    }

    report.push(
        "delta_projection",
        delta_proj_ok,
        0.0,
        "first component of delta(e) is the base of e",
    );
    report.push(
        "zero_section_diagonal",
        diag_ok,
        diag_worst,
        "delta(0_x) = (x, x); nonzero covectors leave the diagonal (worst = smallest displacement)",
    );
    report.push(
        "nu_projection",
        nu_proj_ok,
        0.0,
        "nu(x, y) lies in the fiber over x",
    );
    report.push(
        "nu_separation",
        sep_failures == 0,
        sep_failures as f64,
        if sep_detail.is_empty() {
            "nu(x, y) = 0 exactly when x = y".to_string()
        } else {
            sep_detail
        },
    );
    report.push(
        "nu_differential_nonzero",
        dnu_worst > 0.5,
        dnu_worst,
        "norm of d_y nu(x, y) at y = x (worst = smallest)",
    );
    report.push(
        "derivative_identity",
        ident_worst <= DERIVATIVE_IDENTITY_TOL,
        ident_worst,
        format!("|(1/r) nu(x, delta(h e).1) - h e| / h at h = {FD_STEP:e}"),
    );
    report.push(
        "cotangent_injectivity",
        inj_worst > 1e-3,
        inj_worst,
        "smallest Gram-Schmidt residual of the differential of delta o nu(x, .), scaled by 1/r",
    );
    Ok(report)
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|a| a * s).collect()
}

/// Smallest residual norm met while orthogonalizing the columns; zero when
/// the columns are linearly dependent.
pub(crate) fn min_column_residual(cols: &[Vec<f64>]) -> f64 {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut worst = f64::INFINITY;
    for c in cols {
        let mut u = c.clone();
        for b in &basis {
            let p = dot(&u, b);
            u.iter_mut().zip(b).for_each(|(a, q)| *a -= p * q);
        }
        let n = norm(&u);
        worst = worst.min(n);
        if n > 0.0 {
            basis.push(u.iter().map(|a| a / n).collect());
        }
    }
    if cols.is_empty() {
        0.0
    } else {
        worst
    }
}
