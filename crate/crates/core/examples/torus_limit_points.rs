//! Height function on the flat torus: several starts, the limit clusters of
//! each run and their `F` values.

use lindescent::adherence::{cluster_limits, DEFAULT_CLUSTER_RADIUS, DEFAULT_F_CONSTANCY_TOL};
use lindescent::descent::{run_descent, DescentConfig};
use lindescent::gap::WitnessSet;
use lindescent::linearization::Linearization;
use lindescent::manifold::{Manifold, Point};
use lindescent::problems::torus_height;

fn main() -> lindescent::Result<()> {
    let t2 = Manifold::torus(2);
    let lin = Linearization::new(t2.clone());
    let w = WitnessSet::random(&t2, 9, 64)?;
    let f = torus_height();
    let cfg = DescentConfig::default();

    for seed in 0..8 {
        let x0 = t2.random_point(seed);
        let trace = run_descent(&lin, &f, &x0, &cfg, &w).map_err(|e| e.error)?;
        let report = cluster_limits(
            &trace,
            |x: &Point| t2.embed(x),
            DEFAULT_CLUSTER_RADIUS,
            DEFAULT_F_CONSTANCY_TOL,
        )?;
        let limit = trace.last().coords();
        println!(
            "seed {seed}: F(x0) = {:+.4}, {} iterations, {} cluster(s), limit ({:.4}, {:.4}), F = {:+.9}, spread {:.1e}",
            trace.values[0],
            trace.iterations(),
            report.clusters.len(),
            limit[0],
            limit[1],
            trace.final_value(),
            report.max_spread(),
        );
    }
    Ok(())
}
