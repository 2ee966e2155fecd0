//! The witness distance `d_X` against the geodesic distance on the sphere,
//! followed by the metric audit for both gap shapes.

use lindescent::gap::{dist_x, metric_audit, GapFn, GapShape, WitnessSet};
use lindescent::linearization::Linearization;
use lindescent::manifold::Manifold;

fn main() -> lindescent::Result<()> {
    let s2 = Manifold::sphere(2);
    let lin = Linearization::new(s2.clone());
    let w = WitnessSet::random(&s2, 1, 128)?;
    let gap = GapFn::default();

    let x = s2.point(vec![0.0, 0.0, 1.0])?;
    println!("{:>10} {:>10}", "d_geo", "d_X");
    for i in 0..=12 {
        let a = std::f64::consts::PI * i as f64 / 12.0;
        let y = s2.point(vec![a.sin(), 0.0, a.cos()])?;
        println!("{:>10.4} {:>10.6}", s2.distance(&x, &y), dist_x(&lin, &gap, &x, &y, &w));
    }

    for shape in [GapShape::BoundedNorm, GapShape::SignedDifference] {
        let report = metric_audit(&lin, &GapFn::new(shape), &w, 200, 2)?;
        println!("\n{shape:?}\n{report}");
    }
    Ok(())
}
