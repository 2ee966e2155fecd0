//! Runs the linearization audit on every built-in manifold.

use lindescent::linearization::{check_linearization, Linearization};
use lindescent::manifold::Manifold;

fn main() -> lindescent::Result<()> {
    let manifolds = [
        Manifold::sphere(2),
        Manifold::sphere(3),
        Manifold::torus(2),
        Manifold::circle(),
        Manifold::euclidean(3),
    ];
    for m in manifolds {
        let report = check_linearization(&Linearization::new(m), 100, 7)?;
        println!("{report}");
    }
    Ok(())
}
