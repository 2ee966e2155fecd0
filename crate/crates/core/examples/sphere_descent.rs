//! Descent of `F(x) = 1 − ⟨x, p⟩` on the 2-sphere from a random start.
//!
//! ```text
//! cargo run --example sphere_descent -- [seed]
//! ```

use lindescent::descent::{run_descent, DescentConfig};
use lindescent::gap::WitnessSet;
use lindescent::linearization::Linearization;
use lindescent::manifold::Manifold;
use lindescent::problems::cosine;

fn main() -> lindescent::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let s2 = Manifold::sphere(2);
    let lin = Linearization::new(s2.clone());
    let w = WitnessSet::random(&s2, seed, 128)?;
    let p = s2.point(vec![0.0, 0.0, 1.0])?;
    let x0 = s2.random_point(seed);

    let cfg = DescentConfig {
        eps: 1e-12,
        ..DescentConfig::default()
    };
    let trace = run_descent(&lin, &cosine(&p), &x0, &cfg, &w).map_err(|e| e.error)?;

    println!("{:>4} {:>12} {:>12} {:>14}", "n", "t_n", "d_n", "F");
    for n in 0..trace.len() {
        println!(
            "{n:>4} {:>12.4e} {:>12.4e} {:>14.6e}",
            trace.steps[n], trace.displacements[n], trace.values[n]
        );
    }
    println!("stop: {} after {} iterations", trace.stop, trace.iterations());
    println!("distance to p: {:e}", s2.distance(trace.last(), &p));
    Ok(())
}
