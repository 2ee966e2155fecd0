//! Fixed points as minima of `gap(ν(x, f(x)))`: a geodesic contraction on
//! the sphere, which has one, and the half turn of the circle, which has none.

use std::f64::consts::PI;

use lindescent::descent::DescentConfig;
use lindescent::fixed_point::{run_fixed_point, FixedPointOptions, SelfMap};
use lindescent::gap::{GapFn, WitnessSet};
use lindescent::linearization::Linearization;
use lindescent::manifold::{Manifold, Point};
use lindescent::method::MethodKind;

fn main() -> lindescent::Result<()> {
    let cfg = DescentConfig {
        method: MethodKind::GoldenSection { iterations: 100 },
        ..DescentConfig::default()
    };
    let opts = FixedPointOptions::default();

    let s2 = Manifold::sphere(2);
    let lin = Linearization::new(s2.clone());
    let w = WitnessSet::random(&s2, 5, 64)?;
    let p = s2.point(vec![0.0, 0.0, 1.0])?;
    let f = SelfMap::contraction(&s2, p, 0.5)?;
    let run = run_fixed_point(&lin, GapFn::default(), &f, &s2.random_point(3), &cfg, &w, &opts)
        .map_err(|e| e.error)?;
    println!("{}", run.report);

    let circle = Manifold::circle();
    let lin = Linearization::new(circle.clone());
    let w = WitnessSet::grid(&circle, 16)?;
    let half_turn = SelfMap::rotation(&circle, PI)?;
    let run = run_fixed_point(&lin, GapFn::default(), &half_turn, &Point::new(vec![0.4]), &cfg, &w, &opts)
        .map_err(|e| e.error)?;
    println!("{}", run.report);
    Ok(())
}
