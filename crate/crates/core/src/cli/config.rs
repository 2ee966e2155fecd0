//! Problem configuration files.
//!
//! TOML with dotted keys, one setting per line:
//!
//! ```toml
//! seed = 7
//! manifold.kind = "sphere"
//! manifold.dim = 2
//! witness.count = 128
//! descent.eps = 1e-10
//! problem.kind = "cosine"
//! problem.target = [0.0, 0.0, 1.0]
//! ```
//!
//! Unknown keys are rejected. Every section except `manifold` is optional.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::descent::{DescentConfig, Displacement};
use crate::error::{Error, Result};
use crate::gap::{GapFn, GapShape, WitnessSet};
use crate::linearization::Linearization;
use crate::manifold::{Manifold, Point};
use crate::method::MethodKind;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub seed: u64,
    pub manifold: ManifoldSection,
    #[serde(default)]
    pub linearization: LinearizationSection,
    #[serde(default)]
    pub gap: GapSection,
    #[serde(default)]
    pub witness: WitnessSection,
    #[serde(default)]
    pub method: MethodSection,
    #[serde(default)]
    pub descent: DescentSection,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub adherence: AdherenceSection,
    #[serde(default)]
    pub metric: MetricSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSection {
    /// `euclidean`, `sphere`, `torus` or `circle`.
    pub kind: String,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Scale `r` of Euclidean space.
    pub radius: Option<f64>,
}

fn default_dim() -> usize {
    2
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LinearizationSection {
    #[serde(default = "default_cutoff")]
    pub cutoff_fraction: f64,
}

fn default_cutoff() -> f64 {
    crate::linearization::DEFAULT_CUTOFF_FRACTION
}

impl Default for LinearizationSection {
    fn default() -> Self {
        LinearizationSection {
            cutoff_fraction: default_cutoff(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GapSection {
    #[serde(default = "default_shape")]
    pub shape: String,
}

fn default_shape() -> String {
    "bounded-norm".into()
}

impl Default for GapSection {
    fn default() -> Self {
        GapSection { shape: default_shape() }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WitnessSection {
    /// `random` or `grid`.
    #[serde(default = "default_policy")]
    pub policy: String,
    #[serde(default = "default_witness_count")]
    pub count: usize,
    /// Defaults to the top-level seed.
    pub seed: Option<u64>,
}

fn default_policy() -> String {
    "random".into()
}

fn default_witness_count() -> usize {
    128
}

impl Default for WitnessSection {
    fn default() -> Self {
        WitnessSection {
            policy: default_policy(),
            count: default_witness_count(),
            seed: None,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    /// `grid-refine`, `golden-section` or `armijo`.
    pub kind: Option<String>,
    pub levels: Option<usize>,
    pub points_per_level: Option<usize>,
    pub iterations: Option<usize>,
    pub c: Option<f64>,
    pub shrink: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DescentSection {
    pub eps: Option<f64>,
    pub n_max: Option<usize>,
    pub t_half: Option<f64>,
    pub grad_zero_tol: Option<f64>,
    /// `gap-metric` or `geodesic`.
    pub displacement: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// `cosine`, `quadratic`, `height`, `loop` or `fixed-point`.
    pub kind: Option<String>,
    /// Minimizer of `cosine`/`quadratic`, centre of a contraction.
    pub target: Option<Vec<f64>>,
    /// Starting point; a seeded random point when absent.
    pub start: Option<Vec<f64>>,
    /// Self-map for `fixed-point`: `contraction`, `rotation` or `identity`.
    pub map: Option<String>,
    pub factor: Option<f64>,
    pub angle: Option<f64>,
    pub tol_fp: Option<f64>,
    pub orbit_length: Option<usize>,
    /// Loop grid size `m`.
    pub grid_size: Option<usize>,
    /// `dirichlet` or `sobolev-tracking`.
    pub functional: Option<String>,
    pub degree: Option<i64>,
    pub perturbation: Option<f64>,
    /// Amplitude of seeded per-node jitter added to the starting loop.
    pub noise: Option<f64>,
    /// Order of the tracking norm.
    pub order: Option<f64>,
    /// Orders of the Sobolev diagnostics.
    pub s_list: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AdherenceSection {
    #[serde(default = "default_cluster_radius")]
    pub radius: f64,
    #[serde(default = "default_f_tol")]
    pub f_tol: f64,
}

fn default_cluster_radius() -> f64 {
    crate::adherence::DEFAULT_CLUSTER_RADIUS
}

fn default_f_tol() -> f64 {
    crate::adherence::DEFAULT_F_CONSTANCY_TOL
}

impl Default for AdherenceSection {
    fn default() -> Self {
        AdherenceSection {
            radius: default_cluster_radius(),
            f_tol: default_f_tol(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_triples")]
    pub triples: usize,
}

fn default_pairs() -> usize {
    8
}

fn default_triples() -> usize {
    200
}

impl Default for MetricSection {
    fn default() -> Self {
        MetricSection {
            pairs: default_pairs(),
            triples: default_triples(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    #[serde(default = "default_trace_name")]
    pub trace: String,
    #[serde(default = "default_report_name")]
    pub report: String,
}

fn default_trace_name() -> String {
    "trace.csv".into()
}

fn default_report_name() -> String {
    "report.txt".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            trace: default_trace_name(),
            report: default_report_name(),
        }
    }
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn build_manifold(&self) -> Result<Manifold> {
        let s = &self.manifold;
        if s.dim == 0 {
            return Err(field("manifold.dim", "must be >= 1"));
        }
        let m = match s.kind.as_str() {
            "euclidean" => match s.radius {
                Some(r) => Manifold::euclidean_with_scale(s.dim, r)?,
                None => Manifold::euclidean(s.dim),
            },
            "sphere" => Manifold::sphere(s.dim),
            "torus" => Manifold::torus(s.dim),
            "circle" => Manifold::circle(),
            other => return Err(field("manifold.kind", &format!("unknown manifold '{other}'"))),
        };
        if s.radius.is_some() && s.kind != "euclidean" {
            return Err(field("manifold.radius", "only Euclidean space takes a scale"));
        }
        Ok(m)
    }

    pub fn build_linearization(&self) -> Result<Linearization> {
        Linearization::with_cutoff_fraction(self.build_manifold()?, self.linearization.cutoff_fraction)
            .map_err(|e| field("linearization.cutoff_fraction", &e.to_string()))
    }

    pub fn build_gap(&self) -> Result<GapFn> {
        GapShape::parse(&self.gap.shape)
            .map(GapFn::new)
            .ok_or_else(|| field("gap.shape", &format!("unknown shape '{}'", self.gap.shape)))
    }

    pub fn build_witnesses(&self, m: &Manifold) -> Result<WitnessSet> {
        let w = &self.witness;
        let seed = w.seed.unwrap_or(self.seed);
        let set = match w.policy.as_str() {
            "random" => WitnessSet::random(m, seed, w.count),
            "grid" => WitnessSet::grid(m, w.count),
            other => return Err(field("witness.policy", &format!("unknown policy '{other}'"))),
        };
        set.map_err(|e| field("witness.count", &e.to_string()))
    }

    pub fn build_method(&self) -> Result<MethodKind> {
        let s = &self.method;
        let kind = s.kind.as_deref().unwrap_or("grid-refine");
        let m = match kind {
            "grid-refine" => MethodKind::GridRefine {
                levels: s.levels.unwrap_or(6),
                points_per_level: s.points_per_level.unwrap_or(33),
            },
            "golden-section" => MethodKind::GoldenSection {
                iterations: s.iterations.unwrap_or(100),
            },
            "armijo" => MethodKind::ArmijoBacktrack {
                c: s.c.unwrap_or(1e-4),
                shrink: s.shrink.unwrap_or(0.5),
            },
            other => return Err(field("method.kind", &format!("unknown method '{other}'"))),
        };
        m.validate().map_err(|e| field("method", &e.to_string()))?;
        Ok(m)
    }

    pub fn build_descent(&self) -> Result<DescentConfig> {
        let d = DescentConfig::default();
        let s = &self.descent;
        let cfg = DescentConfig {
            eps: s.eps.unwrap_or(d.eps),
            n_max: s.n_max.unwrap_or(d.n_max),
            t_half: s.t_half.unwrap_or(d.t_half),
            grad_zero_tol: s.grad_zero_tol.unwrap_or(d.grad_zero_tol),
            method: self.build_method()?,
        };
        cfg.validate().map_err(|e| field("descent", &e.to_string()))?;
        Ok(cfg)
    }

    pub fn displacement(&self) -> Result<Displacement> {
        match self.descent.displacement.as_deref().unwrap_or("gap-metric") {
            "gap-metric" => Ok(Displacement::GapMetric),
            "geodesic" => Ok(Displacement::Geodesic),
            other => Err(field("descent.displacement", &format!("unknown displacement '{other}'"))),
        }
    }

    pub fn problem_kind(&self) -> &str {
        self.problem.kind.as_deref().unwrap_or("cosine")
    }

    /// `problem.target`, projected onto the manifold, or the default given.
    pub fn target_point(&self, m: &Manifold, default: Vec<f64>) -> Result<Point> {
        let coords = self.problem.target.clone().unwrap_or(default);
        m.point(coords).map_err(|e| field("problem.target", &e.to_string()))
    }

    pub fn start_point(&self, m: &Manifold) -> Result<Point> {
        match &self.problem.start {
            Some(c) => m.point(c.clone()).map_err(|e| field("problem.start", &e.to_string())),
            None => Ok(m.random_point(self.seed)),
        }
    }

    /// Output directory: the flag, then `output.dir`, then the environment
    /// variable, then the working directory.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output.dir {
            return p.clone();
        }
        match std::env::var_os(super::OUTPUT_DIR_ENV) {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => PathBuf::from("."),
        }
    }
}

fn field(name: &str, msg: &str) -> Error {
    Error::Config(format!("{name}: {msg}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = ProblemConfig::parse("manifold.kind = \"sphere\"\n").unwrap();
        assert_eq!(c.manifold.dim, 2);
        assert_eq!(c.witness.count, 128);
        assert_eq!(c.problem_kind(), "cosine");
        assert_eq!(c.build_descent().unwrap(), DescentConfig::default());
        assert_eq!(c.build_manifold().unwrap(), Manifold::sphere(2));
    }

    #[test]
    fn dotted_keys() {
        let c = ProblemConfig::parse(
            "seed = 3\nmanifold.kind = \"torus\"\nmethod.kind = \"golden-section\"\nmethod.iterations = 40\ndescent.eps = 1e-8\nproblem.kind = \"height\"\n",
        )
        .unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.build_method().unwrap(), MethodKind::GoldenSection { iterations: 40 });
        assert_eq!(c.build_descent().unwrap().eps, 1e-8);
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let err = ProblemConfig::parse("manifold.kind = \"sphere\"\ndescent.epsilon = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("epsilon"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn bad_values_name_the_field() {
        let c = ProblemConfig::parse("manifold.kind = \"klein\"\n").unwrap();
        assert!(c.build_manifold().unwrap_err().to_string().contains("manifold.kind"));
        let c = ProblemConfig::parse("manifold.kind = \"sphere\"\nwitness.count = 0\n").unwrap();
        let m = c.build_manifold().unwrap();
        assert!(c.build_witnesses(&m).unwrap_err().to_string().contains("witness.count"));
        let c = ProblemConfig::parse("manifold.kind = \"sphere\"\ndescent.n_max = 0\n").unwrap();
        assert!(c.build_descent().is_err());
        assert!(ProblemConfig::parse("descent.eps = 1\n").is_err());
    }
}
