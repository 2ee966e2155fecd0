//! Dirichlet descent of a perturbed degree-1 loop in the circle. Writes the
//! trace to `loop_trace.csv` and the final loop to `loop_final.csv` in the
//! directory given as the first argument (default: current directory).

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use lindescent::descent::DescentConfig;
use lindescent::linearization::Linearization;
use lindescent::manifold::Manifold;
use lindescent::mapping::{run_mapping_descent, MapFunctional};
use lindescent::method::MethodKind;
use lindescent::problems::perturbed_loop;

fn main() -> lindescent::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    let circle = Manifold::circle();
    let lin = Linearization::new(circle.clone());
    let u0 = perturbed_loop(&circle, 256, 1, 0.3, 0.0, 3)?;
    let cfg = DescentConfig {
        eps: 1e-4,
        n_max: 3000,
        method: MethodKind::GoldenSection { iterations: 60 },
        ..DescentConfig::default()
    };
    let run = run_mapping_descent(&lin, &MapFunctional::dirichlet(), &u0, &cfg, &[-1.0, 0.0])
        .map_err(|e| e.error)?;

    let e = run.trace.final_value();
    println!("energy: {:.6} -> {e:.6} (pi = {:.6})", run.trace.values[0], std::f64::consts::PI);
    println!("stop: {} after {} iterations", run.trace.stop, run.trace.iterations());
    println!("winding constant: {:?}", run.winding_constant());
    for d in &run.sobolev {
        println!("W^{{{},2}} distance of u0 to the limit: {:.4e}", d.s, d.distances[0]);
    }

    let mut out = BufWriter::new(File::create(dir.join("loop_trace.csv"))?);
    run.trace.write_csv(&mut out, |u| u.ambient_flat().0)?;
    let mut out = BufWriter::new(File::create(dir.join("loop_final.csv"))?);
    run.trace.last().write_csv(&mut out)?;
    Ok(())
}
