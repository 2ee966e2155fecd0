//! One-dimensional improvement operators: a single step on a sample path,
//! then the contract audit for each variant.

use lindescent::method::{apply_method, method_contract_audit, MethodKind, ScalarPath};

fn main() -> lindescent::Result<()> {
    let methods = [
        MethodKind::default(),
        MethodKind::GoldenSection { iterations: 60 },
        MethodKind::ArmijoBacktrack { c: 1e-4, shrink: 0.5 },
    ];
    let path = ScalarPath::new(-1.0, 1.0, |t| (3.0 * t).sin() + 0.5 * t * t)?;
    for m in &methods {
        let t = apply_method(m, &path, 0.0)?;
        println!("{:<15} M_f(0) = {t:+.6}, f: {:+.6} -> {:+.6}", m.name(), path.eval(0.0), path.eval(t));
    }
    println!();
    for m in &methods {
        println!("{}", method_contract_audit(m, 100, 1)?);
    }
    Ok(())
}
