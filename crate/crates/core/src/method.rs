//! One-dimensional improvement operators on a compact interval.
//!
//! Every method returns a point `x'` with `f(x') ≤ f(x)`, and returns `x`
//! itself unless some candidate is strictly better. Ties go to `x`, so
//! `f(x') = f(x) ⟺ x' = x` holds exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::AuditReport;
use crate::error::{Error, Result};

/// A scalar function on `[a, b]`.
pub struct ScalarPath<'a> {
    eval: Box<dyn Fn(f64) -> f64 + 'a>,
    a: f64,
    b: f64,
}

impl<'a> ScalarPath<'a> {
    pub fn new(a: f64, b: f64, eval: impl Fn(f64) -> f64 + 'a) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Precondition(format!("invalid interval [{a}, {b}]")));
        }
        Ok(ScalarPath {
            eval: Box::new(eval),
            a,
            b,
        })
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    fn checked(&self, t: f64) -> Result<f64> {
        let v = self.eval(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("path value {v} at t = {t}")))
        }
    }
}

/// An improvement operator `M_f`.
pub trait LineMethod {
    fn apply(&self, f: &ScalarPath<'_>, x: f64) -> Result<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MethodKind {
    /// Nested uniform grids: each level re-grids one spacing around the best
    /// node of the previous level.
    GridRefine { levels: usize, points_per_level: usize },
    /// Golden-section search on the whole interval.
    GoldenSection { iterations: usize },
    /// Backtracking from the far end of the interval along the downhill
    /// direction until the Armijo condition holds.
    ArmijoBacktrack { c: f64, shrink: f64 },
}

impl Default for MethodKind {
    fn default() -> Self {
        MethodKind::GridRefine {
            levels: 6,
            points_per_level: 33,
        }
    }
}

impl MethodKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MethodKind::GridRefine {
                levels,
                points_per_level,
            } if levels == 0 || points_per_level < 2 => Err(Error::Precondition(
                "grid refinement needs levels >= 1 and points_per_level >= 2".into(),
            )),
            MethodKind::GoldenSection { iterations } if iterations == 0 => Err(
                Error::Precondition("golden section needs iterations >= 1".into()),
            ),
            MethodKind::ArmijoBacktrack { c, shrink }
                if !(c > 0.0 && c < 1.0 && shrink > 0.0 && shrink < 1.0) =>
            {
                Err(Error::Precondition(
                    "armijo parameters must satisfy 0 < c < 1 and 0 < shrink < 1".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::GridRefine { .. } => "grid-refine",
            MethodKind::GoldenSection { .. } => "golden-section",
            MethodKind::ArmijoBacktrack { .. } => "armijo",
        }
    }
}

impl LineMethod for MethodKind {
    fn apply(&self, f: &ScalarPath<'_>, x: f64) -> Result<f64> {
        apply_method(self, f, x)
    }
}

/// Applies `m` at `x`, returning `x` unless a strictly better point is found.
pub fn apply_method(m: &MethodKind, f: &ScalarPath<'_>, x: f64) -> Result<f64> {
    m.validate()?;
    if !(f.a..=f.b).contains(&x) {
        return Err(Error::Precondition(format!(
            "start {x} outside [{}, {}]",
            f.a, f.b
        )));
    }
    let fx = f.checked(x)?;
    let mut best = (x, fx);
    let mut offer = |t: f64| -> Result<f64> {
        let v = f.checked(t)?;
        if v < best.1 {
            best = (t, v);
        }
        Ok(v)
    };
    match *m {
        MethodKind::GridRefine {
            levels,
            points_per_level,
        } => {
            let (mut lo, mut hi) = (f.a, f.b);
            let mut centre = x;
            let mut centre_val = fx;
            for _ in 0..levels {
                let step = (hi - lo) / (points_per_level - 1) as f64;
                let mut level_best = (centre, centre_val);
                for i in 0..points_per_level {
                    let t = if i + 1 == points_per_level {
                        hi
                    } else {
                        lo + step * i as f64
                    };
                    let v = offer(t)?;
                    if v < level_best.1 {
                        level_best = (t, v);
                    }
                }
                centre = level_best.0;
                centre_val = level_best.1;
                lo = (centre - step).max(f.a);
                hi = (centre + step).min(f.b);
                if hi <= lo {
                    break;
                }
            }
        }
        MethodKind::GoldenSection { iterations } => {
            let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
            let (mut lo, mut hi) = (f.a, f.b);
            let mut c = hi - inv_phi * (hi - lo);
            let mut d = lo + inv_phi * (hi - lo);
            let mut fc = offer(c)?;
            let mut fd = offer(d)?;
            for _ in 0..iterations {
                if fc <= fd {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - inv_phi * (hi - lo);
                    fc = offer(c)?;
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + inv_phi * (hi - lo);
                    fd = offer(d)?;
                }
                if hi - lo <= f64::EPSILON * (1.0 + hi.abs().max(lo.abs())) {
                    break;
                }
            }
            offer(0.5 * (lo + hi))?;
        }
        MethodKind::ArmijoBacktrack { c, shrink } => {
            let width = f.b - f.a;
            let h = 1e-6 * width;
            let fp = offer((x + h).min(f.b))?;
            let fm = offer((x - h).max(f.a))?;
            let slope = (fp - fm) / ((x + h).min(f.b) - (x - h).max(f.a));
            if slope != 0.0 {
                let dir = -slope.signum();
                let mut alpha = if dir > 0.0 { f.b - x } else { x - f.a };
                for _ in 0..64 {
                    if alpha <= 0.0 {
                        break;
                    }
                    let t = (x + dir * alpha).clamp(f.a, f.b);
                    let v = offer(t)?;
                    if v <= fx - c * alpha * slope.abs() {
                        break;
                    }
                    alpha *= shrink;
                }
            }
        }
    }
    Ok(best.0)
}

const STARTS_PER_PATH: usize = 10;

/// Audits conditions `f(M_f(x)) ≤ f(x)` and `f(M_f(x)) = f(x) ⟺ M_f(x) = x`
/// over random polynomials (degree ≤ 6) and trigonometric sums on random
/// intervals, `10` starts each.
pub fn method_contract_audit<M: LineMethod + ?Sized>(
    method: &M,
    corpus: usize,
    seed: u64,
) -> Result<AuditReport> {
    if corpus == 0 {
        return Err(Error::Precondition("method audit needs corpus >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut descent_violations = 0usize;
    let mut fixed_violations = 0usize;
    let mut worst_increase = 0.0f64;
    let mut first_failure = String::new();
    let mut checked = 0usize;

    for i in 0..corpus {
        let coeffs: Vec<f64> = (0..rng.random_range(1..=7))
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let freqs: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=3))
            .map(|_| {
                (
                    rng.random_range(-1.5..1.5),
                    rng.random_range(0.5..6.0),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let a = rng.random_range(-3.0..1.0);
        let b = a + rng.random_range(0.1..4.0);
        let trig = i % 2 == 1;
        let eval = |t: f64| {
            if trig {
                freqs.iter().map(|(amp, w, ph)| amp * (w * t + ph).sin()).sum()
            } else {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
        };
        let path = ScalarPath::new(a, b, eval)?;
        for _ in 0..STARTS_PER_PATH {
            let x = rng.random_range(a..=b);
            let fx = path.eval(x);
            let xn = method.apply(&path, x)?;
            let fxn = path.eval(xn);
            checked += 1;
            if fxn > fx || !(a..=b).contains(&xn) {
                descent_violations += 1;
                worst_increase = worst_increase.max(fxn - fx);
                if first_failure.is_empty() {
                    first_failure = format!("x = {x}, M_f(x) = {xn}, f rose {fx} -> {fxn}");
                }
            }
            if (fxn == fx) != (xn == x) {
                fixed_violations += 1;
                if first_failure.is_empty() {
                    first_failure = format!("x = {x}, M_f(x) = {xn}, f(x) = {fx}, f(M_f(x)) = {fxn}");
                }
            }
        }
    }

    let mut report = AuditReport::new(format!("method contract over {checked} (path, start) pairs"));
    report.push(
        "monotone",
        descent_violations == 0,
        worst_increase,
        format!("{descent_violations} violations of f(M_f(x)) <= f(x). {first_failure}"),
    );
    report.push(
        "fixed_iff_no_improvement",
        fixed_violations == 0,
        fixed_violations as f64,
        format!("{fixed_violations} violations of f(M_f(x)) = f(x) <=> M_f(x) = x"),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> MethodKind {
        MethodKind::GridRefine {
            levels: 3,
            points_per_level: 33,
        }
    }

    fn all_methods() -> Vec<MethodKind> {
        vec![
            grid(),
            MethodKind::GoldenSection { iterations: 80 },
            MethodKind::ArmijoBacktrack { c: 1e-4, shrink: 0.5 },
        ]
    }

    #[test]
    fn grid_refine_on_parabola() {
        let f = ScalarPath::new(-1.0, 1.0, |t| t * t).unwrap();
        let xn = apply_method(&grid(), &f, 0.5).unwrap();
        assert!(f.eval(xn) <= 0.25);
        assert!(xn.abs() <= 1.0 / 32.0);
    }

    #[test]
    fn constant_and_boundary_cases_return_start() {
        for m in all_methods() {
            let f = ScalarPath::new(-1.0, 1.0, |_| 3.0).unwrap();
            assert_eq!(apply_method(&m, &f, 0.3).unwrap(), 0.3);
            let g = ScalarPath::new(-1.0, 1.0, |t| t).unwrap();
            assert_eq!(apply_method(&m, &g, -1.0).unwrap(), -1.0);
        }
    }

    #[test]
    fn golden_and_armijo_improve() {
        let f = ScalarPath::new(-1.0, 2.0, |t| (t - 0.7) * (t - 0.7)).unwrap();
        let g = apply_method(&MethodKind::GoldenSection { iterations: 80 }, &f, 0.0).unwrap();
        assert!((g - 0.7).abs() < 1e-6);
        let a = apply_method(&MethodKind::ArmijoBacktrack { c: 1e-4, shrink: 0.5 }, &f, 0.0).unwrap();
        assert!(f.eval(a) < f.eval(0.0));
    }

    #[test]
    fn errors() {
        let f = ScalarPath::new(-1.0, 1.0, |t| t).unwrap();
        assert!(matches!(apply_method(&grid(), &f, 2.0), Err(Error::Precondition(_))));
        let nan = ScalarPath::new(-1.0, 1.0, |t| if t > 0.5 { f64::NAN } else { t }).unwrap();
        assert!(matches!(apply_method(&grid(), &nan, 0.0), Err(Error::Evaluation(_))));
        assert!(ScalarPath::new(1.0, 1.0, |t| t).is_err());
        let bad = MethodKind::ArmijoBacktrack { c: 1.5, shrink: 0.5 };
        assert!(apply_method(&bad, &f, 0.0).is_err());
    }

    #[test]
    fn contract_audit_passes_for_every_variant() {
        for m in all_methods() {
            let report = method_contract_audit(&m, 100, 17).unwrap();
            assert!(report.passed(), "{}: {report}", m.name());
        }
    }

    struct AlwaysStep;

    impl LineMethod for AlwaysStep {
        fn apply(&self, f: &ScalarPath<'_>, x: f64) -> Result<f64> {
            Ok((x + 0.1 * (f.upper() - f.lower())).min(f.upper()))
        }
    }

    #[test]
    fn contract_audit_flags_unconditional_step() {
        let report = method_contract_audit(&AlwaysStep, 50, 3).unwrap();
        assert!(!report.item("monotone").unwrap().passed);
        assert!(method_contract_audit(&AlwaysStep, 0, 3).is_err());
    }
}
