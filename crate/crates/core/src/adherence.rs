//! Limit-point analysis of finished traces.
//!
//! The adherence set of a descent sequence is approximated by single-linkage
//! clustering of the trace tail in ambient coordinates. `F` should be
//! constant on each cluster, and below `F(x_0)`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::AuditReport;
use crate::descent::{DescentTrace, Functional};
use crate::error::{Error, Result};
use crate::manifold::Point;

pub const DEFAULT_F_CONSTANCY_TOL: f64 = 1e-6;
pub const DEFAULT_CLUSTER_RADIUS: f64 = 1e-2;
/// Fraction of the trace treated as its tail.
pub const TAIL_FRACTION: f64 = 0.25;

pub const CONVEXITY_TOL: f64 = 1e-10;
pub const STRICT_MARGIN: f64 = 1e-12;
const LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    /// Trace index of the representative (the latest member).
    pub representative: usize,
    pub embedded: Vec<f64>,
    pub members: Vec<usize>,
    pub f_min: f64,
    pub f_max: f64,
}

impl Cluster {
    pub fn spread(&self) -> f64 {
        self.f_max - self.f_min
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterReport {
    pub clusters: Vec<Cluster>,
    pub radius: f64,
    pub f_constancy_tol: f64,
    /// First trace index of the tail.
    pub tail_start: usize,
    pub f_start: f64,
    /// Trace indices with the largest F gap inside one cluster.
    pub witness: Option<(usize, usize)>,
}

impl ClusterReport {
    pub fn max_spread(&self) -> f64 {
        self.clusters.iter().map(Cluster::spread).fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.clusters.iter().map(|c| c.f_min).fold(f64::INFINITY, f64::min)
    }

    pub fn bounded_by_start(&self) -> bool {
        self.clusters.iter().all(|c| c.f_max <= self.f_start)
    }

    pub fn constant_on_clusters(&self) -> bool {
        self.max_spread() <= self.f_constancy_tol
    }

    pub fn passed(&self) -> bool {
        self.constant_on_clusters() && self.min_value() > f64::NEG_INFINITY && self.bounded_by_start()
    }
}

impl fmt::Display for ClusterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "clusters: {}", self.clusters.len())?;
        writeln!(f, "verdict: {}", if self.passed() { "PASS" } else { "FAIL" })?;
        writeln!(f, "radius: {:e}", self.radius)?;
        writeln!(f, "f_constancy_tol: {:e}", self.f_constancy_tol)?;
        writeln!(f, "tail_start: {}", self.tail_start)?;
        writeln!(f, "max_spread: {:e}", self.max_spread())?;
        writeln!(f, "min_f: {}", self.min_value())?;
        writeln!(f, "f_start: {}", self.f_start)?;
        writeln!(f, "bounded_by_start: {}", self.bounded_by_start())?;
        if let Some((i, j)) = self.witness {
            writeln!(f, "witness: {i} {j}")?;
        }
        for (n, c) in self.clusters.iter().enumerate() {
            writeln!(f)?;
            writeln!(f, "cluster: {n}")?;
            writeln!(f, "representative: {}", c.representative)?;
            writeln!(f, "members: {}", c.members.len())?;
            writeln!(f, "f_min: {}", c.f_min)?;
            writeln!(f, "spread: {:e}", c.spread())?;
        }
        Ok(())
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Single-linkage clustering of the last quarter of the trace.
pub fn cluster_limits<P>(
    trace: &DescentTrace<P>,
    embed: impl Fn(&P) -> Vec<f64>,
    radius: f64,
    f_constancy_tol: f64,
) -> Result<ClusterReport> {
    if trace.is_empty() {
        return Err(Error::Precondition("empty trace".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::Precondition(format!("cluster radius must be positive, got {radius}")));
    }
    let n = trace.len();
    let tail_len = ((n as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, n);
    let tail_start = n - tail_len;
    let pts: Vec<Vec<f64>> = trace.iterates[tail_start..].iter().map(&embed).collect();

    let mut uf = UnionFind::new(tail_len);
    for i in 0..tail_len {
        for j in i + 1..tail_len {
            if euclid(&pts[i], &pts[j]) <= radius {
                uf.union(i, j);
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..tail_len {
        let r = uf.find(i);
        match roots.iter().position(|&x| x == r) {
            Some(g) => groups[g].push(i),
            None => {
                roots.push(r);
                groups.push(vec![i]);
            }
        }
    }

    let mut witness = None;
    let mut worst = -1.0;
    let clusters = groups
        .into_iter()
        .map(|g| {
            let idx: Vec<usize> = g.iter().map(|i| tail_start + i).collect();
            let (mut lo, mut hi) = (idx[0], idx[0]);
            for &i in &idx {
                if trace.values[i] < trace.values[lo] {
                    lo = i;
                }
                if trace.values[i] > trace.values[hi] {
                    hi = i;
                }
            }
            let spread = trace.values[hi] - trace.values[lo];
            if spread > worst {
                worst = spread;
                witness = Some((lo.min(hi), lo.max(hi)));
            }
            let last = *g.last().expect("groups are nonempty");
            Cluster {
                representative: tail_start + last,
                embedded: pts[last].clone(),
                members: idx,
                f_min: trace.values[lo],
                f_max: trace.values[hi],
            }
        })
        .collect();
    let report = ClusterReport {
        clusters,
        radius,
        f_constancy_tol,
        tail_start,
        f_start: trace.values[0],
        witness: None,
    };
    let witness = if report.constant_on_clusters() { None } else { witness };
    Ok(ClusterReport { witness, ..report })
}

/// Convex parameter domain `C`.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexDomain {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl ConvexDomain {
    pub fn dim(&self) -> usize {
        match self {
            ConvexDomain::Box { lower, .. } => lower.len(),
            ConvexDomain::Ball { center, .. } => center.len(),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            ConvexDomain::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(a, b)| a + (b - a) * rng.random::<f64>())
                .collect(),
            ConvexDomain::Ball { center, radius } => loop {
                let v: Vec<f64> = center.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
                if v.iter().map(|a| a * a).sum::<f64>() <= 1.0 {
                    break center.iter().zip(&v).map(|(c, a)| c + radius * a).collect();
                }
            },
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ConvexDomain::Box { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() || lower.iter().zip(upper).any(|(a, b)| !(a < b)) {
                    return Err(Error::Precondition("box domain needs lower < upper".into()));
                }
            }
            ConvexDomain::Ball { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) {
                    return Err(Error::Precondition("ball domain needs a positive radius".into()));
                }
            }
        }
        Ok(())
    }
}

/// Smooth parametrization `P: C → X` probed at random pairs of parameters.
pub struct ConvexProbe<'a> {
    pub param: Box<dyn Fn(&[f64]) -> Point + 'a>,
    /// Coordinates used to spot-check injectivity of `P`.
    pub embed: Box<dyn Fn(&Point) -> Vec<f64> + 'a>,
    pub domain: ConvexDomain,
    pub samples: usize,
    pub seed: u64,
}

impl<'a> ConvexProbe<'a> {
    pub fn new(domain: ConvexDomain, param: impl Fn(&[f64]) -> Point + 'a) -> Self {
        ConvexProbe {
            param: Box::new(param),
            embed: Box::new(|p: &Point| p.coords().to_vec()),
            domain,
            samples: 200,
            seed: 0,
        }
    }

    pub fn with_embedding(mut self, embed: impl Fn(&Point) -> Vec<f64> + 'a) -> Self {
        self.embed = Box::new(embed);
        self
    }

    pub fn with_samples(mut self, samples: usize, seed: u64) -> Self {
        self.samples = samples;
        self.seed = seed;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvexityVerdict {
    StrictlyConvex,
    Convex,
    NonConvex,
}

impl fmt::Display for ConvexityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvexityVerdict::StrictlyConvex => "strictly-convex",
            ConvexityVerdict::Convex => "convex",
            ConvexityVerdict::NonConvex => "non-convex",
        })
    }
}

/// A pair `(c, d)` and `λ` where `F∘P` sits above its chord.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityWitness {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub lambda: f64,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    pub verdict: ConvexityVerdict,
    /// Smallest chord gap at `λ = 1/2`.
    pub min_margin: f64,
    pub witness: Option<ConvexityWitness>,
    pub audit: AuditReport,
}

/// Samples the chord inequality of `F∘P` at `λ ∈ {1/4, 1/2, 3/4}`.
///
/// When `clusters` is given (the tail of a trace that stays in the image of
/// `P`) and the verdict is strictly convex, the audit also requires a single
/// limit cluster.
pub fn convexity_audit(
    probe: &ConvexProbe<'_>,
    f: &Functional<'_>,
    clusters: Option<&ClusterReport>,
) -> Result<ConvexityReport> {
    if probe.samples == 0 {
        return Err(Error::Precondition("convexity audit needs samples >= 1".into()));
    }
    probe.domain.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let fp = |c: &[f64]| f.eval(&(probe.param)(c));

    let mut worst_excess = f64::NEG_INFINITY;
    let mut witness = None;
    let mut min_margin = f64::INFINITY;
    let mut params: Vec<Vec<f64>> = Vec::with_capacity(2 * probe.samples);
    for _ in 0..probe.samples {
        let c = probe.domain.sample(&mut rng);
        let d = probe.domain.sample(&mut rng);
        let (fc, fd) = (fp(&c), fp(&d));
        for lambda in LAMBDAS {
            let mid: Vec<f64> = c.iter().zip(&d).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
            let chord = lambda * fc + (1.0 - lambda) * fd;
            let excess = fp(&mid) - chord;
            if excess > worst_excess {
                worst_excess = excess;
                if excess > CONVEXITY_TOL {
                    witness = Some(ConvexityWitness {
                        c: c.clone(),
                        d: d.clone(),
                        lambda,
                        excess,
                    });
                }
            }
            if lambda == 0.5 {
                min_margin = min_margin.min(-excess);
            }
        }
        params.push(c);
        params.push(d);
    }

    let verdict = if worst_excess > CONVEXITY_TOL {
        ConvexityVerdict::NonConvex
    } else if min_margin > STRICT_MARGIN {
        ConvexityVerdict::StrictlyConvex
    } else {
        ConvexityVerdict::Convex
    };

    let mut audit = AuditReport::new("convexity");
    let detail = match &witness {
        Some(w) => format!("chord exceeded by {:e} at lambda {} between {:?} and {:?}", w.excess, w.lambda, w.c, w.d),
        None => format!("verdict {verdict}, min midpoint margin {min_margin:e}"),
    };
    audit.push("chord_inequality", verdict != ConvexityVerdict::NonConvex, worst_excess.max(0.0), detail);

    // injectivity spot check: distinct parameters must not collide
    let images: Vec<Vec<f64>> = params.iter().map(|c| (probe.embed)(&(probe.param)(c))).collect();
    let mut collisions = 0usize;
    let mut closest = f64::INFINITY;
    for i in 0..params.len() {
        for j in i + 1..params.len() {
            let dp = euclid(&params[i], &params[j]);
            if dp > 1e-9 {
                let di = euclid(&images[i], &images[j]);
                closest = closest.min(di / dp);
                if di <= 1e-12 {
                    collisions += 1;
                }
            }
        }
    }
    audit.push(
        "injectivity",
        collisions == 0,
        collisions as f64,
        format!("{collisions} collisions, min image/parameter distance ratio {closest:e}"),
    );

    if let (Some(cl), ConvexityVerdict::StrictlyConvex) = (clusters, verdict) {
        audit.push(
            "unique_limit",
            cl.clusters.len() == 1,
            cl.clusters.len() as f64,
            format!("{} limit clusters", cl.clusters.len()),
        );
    }

    Ok(ConvexityReport {
        verdict,
        min_margin,
        witness,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::{run_descent, DescentConfig, StopReason};
    use crate::gap::WitnessSet;
    use crate::linearization::Linearization;
    use crate::manifold::Manifold;

    fn synthetic(points: Vec<Point>, values: Vec<f64>) -> DescentTrace<Point> {
        let n = points.len();
        DescentTrace {
            iterates: points,
            values,
            steps: vec![0.0; n],
            displacements: vec![1.0; n],
            stop: StopReason::MaxIterations,
        }
    }

    fn coords(p: &Point) -> Vec<f64> {
        p.coords().to_vec()
    }

    #[test]
    fn converged_trace_gives_one_cluster() {
        let p = Point::new(vec![0.3, 0.4]);
        let t = synthetic(vec![p.clone(); 8], vec![1.0; 8]);
        let r = cluster_limits(&t, coords, 1e-3, 1e-6).unwrap();
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.max_spread(), 0.0);
        assert!(r.passed());
    }

    #[test]
    fn two_point_orbit() {
        let a = Point::new(vec![0.0, 1.0]);
        let b = Point::new(vec![1.0, 0.0]);
        let pts: Vec<Point> = (0..12).map(|i| if i % 2 == 0 { a.clone() } else { b.clone() }).collect();
        let t = synthetic(pts.clone(), vec![0.5; 12]);
        let r = cluster_limits(&t, coords, 0.1, 1e-6).unwrap();
        assert_eq!(r.clusters.len(), 2);
        assert!(r.passed());

        let mut values = vec![0.5; 12];
        values[11] = 0.25;
        let bad = synthetic(pts, values);
        let r = cluster_limits(&bad, coords, 0.1, 1e-6).unwrap();
        assert!(!r.passed());
        let (i, j) = r.witness.unwrap();
        assert_eq!(bad.iterates[i], bad.iterates[j]);
        assert_eq!((bad.values[i] - bad.values[j]).abs(), 0.25);
    }

    #[test]
    fn tail_is_last_quarter() {
        let pts: Vec<Point> = (0..20).map(|i| Point::new(vec![i as f64])).collect();
        let t = synthetic(pts, (0..20).map(|i| -(i as f64)).collect());
        let r = cluster_limits(&t, coords, 0.5, 1e-6).unwrap();
        assert_eq!(r.tail_start, 15);
        assert_eq!(r.clusters.iter().map(|c| c.members.len()).sum::<usize>(), 5);
    }

    #[test]
    fn empty_trace_and_bad_radius() {
        let t = synthetic(vec![], vec![]);
        assert!(cluster_limits(&t, coords, 1.0, 1e-6).is_err());
        let t = synthetic(vec![Point::new(vec![0.0])], vec![0.0]);
        assert!(cluster_limits(&t, coords, 0.0, 1e-6).is_err());
    }

    fn interval() -> ConvexDomain {
        ConvexDomain::Box {
            lower: vec![-1.0],
            upper: vec![1.0],
        }
    }

    #[test]
    fn scalar_verdicts() {
        let probe = ConvexProbe::new(interval(), |c| Point::new(c.to_vec()));
        let sq = Functional::new(|x: &Point| x.coords()[0] * x.coords()[0]);
        let r = convexity_audit(&probe, &sq, None).unwrap();
        assert_eq!(r.verdict, ConvexityVerdict::StrictlyConvex);
        assert!(r.audit.passed());

        let neg = Functional::new(|x: &Point| -x.coords()[0] * x.coords()[0]);
        let r = convexity_audit(&probe, &neg, None).unwrap();
        assert_eq!(r.verdict, ConvexityVerdict::NonConvex);
        assert!(r.witness.is_some());
        assert!(!r.audit.passed());

        let affine = Functional::new(|x: &Point| 3.0 * x.coords()[0] - 1.0);
        let r = convexity_audit(&probe, &affine, None).unwrap();
        assert_eq!(r.verdict, ConvexityVerdict::Convex);
        assert!(r.min_margin.abs() < 1e-12);
    }

    #[test]
    fn zero_samples_rejected() {
        let probe = ConvexProbe::new(interval(), |c| Point::new(c.to_vec())).with_samples(0, 1);
        let f = Functional::new(|_x: &Point| 0.0);
        assert!(convexity_audit(&probe, &f, None).is_err());
    }

    #[test]
    fn cosine_on_exp_chart_is_strictly_convex_with_unique_limit() {
        let m = Manifold::sphere(2);
        let lin = Linearization::new(m.clone());
        let p = Point::new(vec![0.0, 0.0, 1.0]);
        let frame = m.tangent_frame(&p);
        let chart = |c: &[f64]| {
            let v: Vec<f64> = (0..3).map(|i| c[0] * frame[0][i] + c[1] * frame[1][i]).collect();
            m.exp(&p, &m.tangent(&p, &v).unwrap()).unwrap()
        };
        let probe = ConvexProbe::new(
            ConvexDomain::Ball {
                center: vec![0.0, 0.0],
                radius: std::f64::consts::FRAC_PI_2 * 0.9,
            },
            chart,
        )
        .with_samples(300, 4);
        let pc = p.coords().to_vec();
        let f = Functional::new(move |x: &Point| {
            1.0 - x.coords().iter().zip(&pc).map(|(a, b)| a * b).sum::<f64>()
        });
        let w = WitnessSet::random(&m, 3, 64).unwrap();
        let x0 = Point::new(vec![0.6, 0.0, 0.8]);
        let trace = run_descent(&lin, &f, &x0, &DescentConfig::default(), &w).unwrap();
        let cl = cluster_limits(&trace, coords, DEFAULT_CLUSTER_RADIUS, 1e-6).unwrap();
        let r = convexity_audit(&probe, &f, Some(&cl)).unwrap();
        assert_eq!(r.verdict, ConvexityVerdict::StrictlyConvex, "{}", r.audit);
        assert!(r.audit.item("unique_limit").unwrap().passed, "{}", r.audit);
    }
}
