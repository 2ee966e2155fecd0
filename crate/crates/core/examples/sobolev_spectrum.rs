//! Fourier spectrum and `W^{s,2}` norms of a wavy loop in the circle, for a
//! few orders `s`. The spectrum for `s = -1` goes to stdout as CSV.

use lindescent::manifold::Manifold;
use lindescent::mapping::{sobolev_norm, sobolev_spectrum, write_spectrum_csv, DiscreteMap};

fn main() -> lindescent::Result<()> {
    let u = DiscreteMap::from_fn(Manifold::circle(), 64, |t| vec![t + 0.4 * (3.0 * t).sin()])?;
    for s in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        println!("# s = {s:+.1}: norm {:.6}", sobolev_norm(&u, s));
    }
    let rows = sobolev_spectrum(&u.ambient(), -1.0);
    write_spectrum_csv(&rows, &mut std::io::stdout().lock())?;
    Ok(())
}
