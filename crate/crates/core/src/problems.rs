//! Built-in objectives and starting loops shared by the CLI and examples.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::descent::Functional;
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldKind, Point};
use crate::mapping::DiscreteMap;

/// `F(x) = 1 − ⟨x, p⟩` on a unit sphere, evaluated as `½‖x − p‖²` (the
/// same function there, without cancellation near `p`).
pub fn cosine(p: &Point) -> Functional<'static> {
    let pv = p.coords().to_vec();
    let pg = pv.clone();
    Functional::new(move |x: &Point| {
        0.5 * x.coords().iter().zip(&pv).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    })
    .with_gradient(move |_x: &Point| pg.iter().map(|c| -c).collect())
}

/// `F(x) = ‖x − c‖²`.
pub fn quadratic(c: &Point) -> Functional<'static> {
    let cv = c.coords().to_vec();
    let cg = cv.clone();
    Functional::new(move |x: &Point| x.coords().iter().zip(&cv).map(|(a, b)| (a - b) * (a - b)).sum())
        .with_gradient(move |x: &Point| x.coords().iter().zip(&cg).map(|(a, b)| 2.0 * (a - b)).collect())
}

/// Height of the torus of revolution with radii 2 and 1:
/// `F(θ) = (2 + cos θ₂) cos θ₁`. One minimum, two saddles, one maximum.
pub fn torus_height() -> Functional<'static> {
    Functional::new(|x: &Point| {
        let c = x.coords();
        (2.0 + c[1].cos()) * c[0].cos()
    })
    .with_gradient(|x: &Point| {
        let c = x.coords();
        let mut g = vec![0.0; c.len()];
        g[0] = -(2.0 + c[1].cos()) * c[0].sin();
        g[1] = -c[1].sin() * c[0].cos();
        g
    })
}

/// A perturbed starting loop: on the circle a degree-`degree` loop with a
/// smooth bump, on `S²` a tilted wavy latitude circle. `noise` adds seeded
/// per-node jitter of that amplitude.
pub fn perturbed_loop(
    target: &Manifold,
    m: usize,
    degree: i64,
    perturbation: f64,
    noise: f64,
    seed: u64,
) -> Result<DiscreteMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter_at: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let jitter = |t: f64| {
        let j = ((t / TAU) * m as f64).round() as usize % m;
        noise * jitter_at[j]
    };
    match (target.kind(), target.ambient_dim()) {
        (ManifoldKind::Torus, 1) => DiscreteMap::from_fn(target.clone(), m, |t| {
            vec![degree as f64 * t + perturbation * ((2.0 * t).sin() + 0.5 * (5.0 * t).cos()) + jitter(t)]
        }),
        (ManifoldKind::Sphere, 3) => DiscreteMap::from_fn(target.clone(), m, |t| {
            let z = 0.5 + perturbation * 0.2 * (3.0 * t).sin() + jitter(t);
            let rho = (1.0 - z * z).max(0.0).sqrt();
            vec![rho * (degree as f64 * t).cos(), rho * (degree as f64 * t).sin() + 0.1 * z, z]
        }),
        _ => Err(Error::Precondition(format!(
            "loops are supported into the circle and S^2, not {}",
            target.kind().name()
        ))),
    }
}
