//! Chart-based compact manifolds: flat and perturbed tori, round spheres,
//! and metrics induced by immersions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::derivatives::{fd_stencil, DerivativeMode};
use super::tensor::check_spd;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::descriptor::Descriptor;

/// A map from coordinate jets to a list of jets (metric components,
/// immersion coordinates, tensor components).
pub type JetMap = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// Global structure of the atlas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AtlasKind {
    /// One chart on a box `[0, L_i)` with periodic identification.
    PeriodicBox,
    /// Two stereographic charts of a round sphere with known constant curvature.
    AnalyticSphere,
    /// Two stereographic parameter charts carrying the metric pulled back
    /// by an immersion.
    Immersed,
}

/// One coordinate chart.
#[derive(Clone)]
pub struct Chart {
    pub domain: Vec<(f64, f64)>,
    metric: JetMap,
    pub mode: DerivativeMode,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart").field("domain", &self.domain).field("mode", &self.mode).finish()
    }
}

impl Chart {
    pub fn new(domain: Vec<(f64, f64)>, metric: JetMap, mode: DerivativeMode) -> Self {
        Chart { domain, metric, mode }
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    /// Metric components `g_ij` as jets of the given order (mode-aware).
    pub fn metric_jets(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        match self.mode {
            DerivativeMode::Analytic => Ok((self.metric)(&Jet::seed(p, order))),
            DerivativeMode::FiniteDifference(h) => {
                fd_stencil(p, order, h, |q| Ok((self.metric)(&Jet::seed(q, 0)).iter().map(Jet::value).collect()))
            }
        }
    }

    pub fn metric_values(&self, p: &[f64]) -> Vec<f64> {
        (self.metric)(&Jet::seed(p, 0)).iter().map(Jet::value).collect()
    }
}

/// Point on a manifold: chart index plus chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifoldPoint {
    pub chart: usize,
    pub coords: Vec<f64>,
}

impl ManifoldPoint {
    pub fn new(chart: usize, coords: Vec<f64>) -> Self {
        ManifoldPoint { chart, coords }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Family {
    Torus { lengths: Vec<f64> },
    /// Two stereographic charts; chart 0 projects from ω_{n+1} = +1, chart 1 from −1.
    Stereographic,
}

/// Compact manifold given by analytic charts.
#[derive(Clone, Debug)]
pub struct ChartManifold {
    dim: usize,
    charts: Vec<Chart>,
    atlas_kind: AtlasKind,
    constant_curvature: Option<f64>,
    family: Family,
    label: String,
}

/// Metric perturbations available on periodic boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorusPerturbation {
    None,
    /// Conformal factor `1 + ε sin(2π x_1 / L_1)`.
    Sin,
    /// Non-conformal metric mixing neighbouring axes.
    Mix,
}

impl ChartManifold {
    /// Flat or perturbed torus `∏ [0, L_i)`.
    pub fn torus(
        lengths: Vec<f64>,
        perturbation: TorusPerturbation,
        eps: f64,
        mode: DerivativeMode,
    ) -> Result<Self> {
        let n = lengths.len();
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        if lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidInput("torus side lengths must be positive".into()));
        }
        let ls = lengths.clone();
        let metric: JetMap = Arc::new(move |x: &[Jet]| {
            let theta: Vec<Jet> = x.iter().zip(&ls).map(|(xi, l)| xi * (2.0 * PI / l)).collect();
            let zero = x[0].zero_like();
            let mut g: Vec<Jet> = vec![zero.clone(); n * n];
            match perturbation {
                TorusPerturbation::None => {
                    for i in 0..n {
                        g[i * n + i] = zero.constant_like(1.0);
                    }
                }
                TorusPerturbation::Sin => {
                    let conf = theta[0].sin() * eps + 1.0;
                    for i in 0..n {
                        g[i * n + i] = conf.clone();
                    }
                }
                TorusPerturbation::Mix => {
                    for i in 0..n {
                        let j = (i + 1) % n;
                        g[i * n + i] = (&theta[i] + &theta[j]).sin() * eps + 1.0;
                    }
                    for i in 0..n - 1 {
                        let v = (&theta[i] - &theta[i + 1] * 2.0).cos() * (0.5 * eps);
                        g[i * n + i + 1] = v.clone();
                        g[(i + 1) * n + i] = v;
                    }
                }
            }
            g
        });
        let label = format!(
            "torus{n}:L={},perturb={:?},eps={eps}",
            lengths.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(":"),
            perturbation
        );
        let curvature = if perturbation == TorusPerturbation::None { Some(0.0) } else { None };
        Ok(ChartManifold {
            dim: n,
            charts: vec![Chart::new(lengths.iter().map(|&l| (0.0, l)).collect(), metric, mode)],
            atlas_kind: AtlasKind::PeriodicBox,
            constant_curvature: curvature,
            family: Family::Torus { lengths },
            label,
        })
    }

    /// Round sphere of constant sectional curvature `k` in two stereographic charts.
    pub fn round_sphere(n: usize, k: f64, mode: DerivativeMode) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        if !(k > 0.0) {
            return Err(Error::InvalidInput(format!("sphere curvature must be positive, got {k}")));
        }
        let metric: JetMap = Arc::new(move |x: &[Jet]| {
            let n = x.len();
            let r2 = x.iter().map(Jet::square).reduce(|a, b| a + b).expect("n ≥ 2");
            let conf = (r2 + 1.0).powi(2).recip() * (4.0 / k);
            let zero = conf.zero_like();
            (0..n * n).map(|i| if i / n == i % n { conf.clone() } else { zero.clone() }).collect()
        });
        let domain = vec![(-1.5, 1.5); n];
        let charts = vec![Chart::new(domain.clone(), metric.clone(), mode), Chart::new(domain, metric, mode)];
        Ok(ChartManifold {
            dim: n,
            charts,
            atlas_kind: AtlasKind::AnalyticSphere,
            constant_curvature: Some(k),
            family: Family::Stereographic,
            label: format!("sphere:n={n},K={k}"),
        })
    }

    /// Two stereographic parameter charts carrying the given metrics
    /// (typically pulled back by an immersion).
    pub fn immersed(n: usize, metrics: [JetMap; 2], mode: DerivativeMode, label: String) -> Self {
        let domain = vec![(-1.5, 1.5); n];
        let [m0, m1] = metrics;
        ChartManifold {
            dim: n,
            charts: vec![Chart::new(domain.clone(), m0, mode), Chart::new(domain, m1, mode)],
            atlas_kind: AtlasKind::Immersed,
            constant_curvature: None,
            family: Family::Stereographic,
            label,
        }
    }

    /// Parse `torusN:L=..,perturb=none|sin|mix,eps=..[,fd=h]` or
    /// `sphere:n=..,K=..[,fd=h]`.
    pub fn parse(desc: &str) -> Result<Self> {
        let s = Descriptor::parse(desc)?;
        let mode = match s.get_f64("fd")? {
            Some(h) if h > 0.0 => DerivativeMode::FiniteDifference(h),
            Some(h) => return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h}"))),
            None => DerivativeMode::Analytic,
        };
        if let Some(rest) = s.kind.strip_prefix("torus") {
            let n: usize = if rest.is_empty() {
                s.get_usize("n")?.unwrap_or(2)
            } else {
                rest.parse().map_err(|_| Error::InvalidInput(format!("bad torus dimension in '{desc}'")))?
            };
            let lengths = match s.get("L") {
                None => vec![2.0 * PI; n],
                Some(v) => {
                    let parts: Vec<f64> = v
                        .split(':')
                        .map(|t| t.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::InvalidInput(format!("bad L value '{v}'")))?;
                    match parts.len() {
                        1 => vec![parts[0]; n],
                        k if k == n => parts,
                        _ => return Err(Error::InvalidInput(format!("expected 1 or {n} side lengths"))),
                    }
                }
            };
            let perturbation = match s.get("perturb").unwrap_or("none") {
                "none" | "flat" => TorusPerturbation::None,
                "sin" => TorusPerturbation::Sin,
                "mix" => TorusPerturbation::Mix,
                other => return Err(Error::InvalidInput(format!("unknown torus perturbation '{other}'"))),
            };
            let eps = s.get_f64("eps")?.unwrap_or(0.1);
            s.reject_unknown(&["n", "L", "perturb", "eps", "fd"])?;
            ChartManifold::torus(lengths, perturbation, eps, mode)
        } else if s.kind == "sphere" {
            let n = s.get_usize("n")?.unwrap_or(2);
            let k = s.get_f64("K")?.unwrap_or(1.0);
            s.reject_unknown(&["n", "K", "fd"])?;
            ChartManifold::round_sphere(n, k, mode)
        } else {
            Err(Error::InvalidInput(format!("unknown manifold kind '{}'", s.kind)))
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart(&self, idx: usize) -> &Chart {
        &self.charts[idx]
    }

    pub fn atlas_kind(&self) -> AtlasKind {
        self.atlas_kind
    }

    /// Closed-form sectional curvature when the manifold is a space form.
    pub fn constant_curvature(&self) -> Option<f64> {
        self.constant_curvature
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Derivative mode (shared by all charts).
    pub fn mode(&self) -> DerivativeMode {
        self.charts[0].mode
    }

    /// Copy of the manifold with a different derivative mode.
    pub fn with_mode(&self, mode: DerivativeMode) -> Self {
        let mut out = self.clone();
        for c in &mut out.charts {
            c.mode = mode;
        }
        out
    }

    pub fn metric_jets(&self, pt: &ManifoldPoint, order: usize) -> Result<Vec<Jet>> {
        self.charts[pt.chart].metric_jets(&pt.coords, order)
    }

    /// Metric at `pt`, verified positive definite there and, in
    /// finite-difference mode, at the axis stencil points.
    pub fn checked_metric(&self, pt: &ManifoldPoint) -> Result<Vec<f64>> {
        let chart = &self.charts[pt.chart];
        let g = chart.metric_values(&pt.coords);
        check_spd(&g, self.dim, &pt.coords)?;
        if let DerivativeMode::FiniteDifference(h) = chart.mode {
            for i in 0..self.dim {
                for s in [-1.0, 1.0] {
                    let mut q = pt.coords.clone();
                    q[i] += s * h;
                    check_spd(&chart.metric_values(&q), self.dim, &q)?;
                }
            }
        }
        Ok(g)
    }

    /// Ambient representation used to define scalar fields: angles
    /// `2π x_i / L_i` on tori, unit vectors in ℝ^{n+1} on stereographic charts.
    pub fn ambient_jets(&self, chart: usize, x: &[Jet]) -> Vec<Jet> {
        match &self.family {
            Family::Torus { lengths } => x.iter().zip(lengths).map(|(xi, l)| xi * (2.0 * PI / l)).collect(),
            Family::Stereographic => stereographic_unit(x, chart_sign(chart)),
        }
    }

    /// Deterministic sample points: a Halton sequence on tori, seeded
    /// Gaussian directions on stereographic families (each mapped to the
    /// chart in which it has `|u| ≤ 1`).
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<ManifoldPoint> {
        match &self.family {
            Family::Torus { lengths } => {
                let skip = 20 + (seed % 1009) as usize * 7;
                (0..count)
                    .map(|k| {
                        let coords =
                            lengths.iter().enumerate().map(|(d, l)| l * halton(skip + k, PRIMES[d % PRIMES.len()])).collect();
                        ManifoldPoint::new(0, coords)
                    })
                    .collect()
            }
            Family::Stereographic => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|_| {
                        let w: Vec<f64> = loop {
                            let v: Vec<f64> = (0..=self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                            if norm > 1e-8 {
                                break v.into_iter().map(|x| x / norm).collect();
                            }
                        };
                        sphere_point_from_unit(&w)
                    })
                    .collect()
            }
        }
    }
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn halton(mut index: usize, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as usize;
    while index > 0 {
        f /= base as f64;
        r += f * (index % b) as f64;
        index /= b;
    }
    r
}

/// Projection pole of a stereographic chart: chart 0 projects from
/// `ω_{n+1} = +1`, chart 1 from `ω_{n+1} = −1`.
pub fn chart_sign(chart: usize) -> f64 {
    if chart == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unit vector in ℝ^{n+1} for stereographic coordinates `u` in the chart
/// projecting from `ω_{n+1} = s`.
pub fn stereographic_unit(u: &[Jet], s: f64) -> Vec<Jet> {
    let r2 = u.iter().map(Jet::square).reduce(|a, b| a + b).expect("nonempty");
    let inv = (&r2 + 1.0).recip();
    let mut out: Vec<Jet> = u.iter().map(|ui| ui * &inv * 2.0).collect();
    out.push((r2 - 1.0) * &inv * s);
    out
}

/// Chart point for a unit vector `w ∈ S^n`, choosing the chart where `|u| ≤ 1`.
pub fn sphere_point_from_unit(w: &[f64]) -> ManifoldPoint {
    let n = w.len() - 1;
    let last = w[n];
    let chart = if last <= 0.0 { 0 } else { 1 };
    let s = chart_sign(chart);
    let denom = 1.0 - s * last;
    ManifoldPoint::new(chart, w[..n].iter().map(|x| x / denom).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stereographic_round_trip() {
        let w = [0.3, -0.5, 0.2, (1.0f64 - 0.09 - 0.25 - 0.04).sqrt()];
        let p = sphere_point_from_unit(&w);
        assert!(p.coords.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12);
        let back = stereographic_unit(&Jet::seed(&p.coords, 0), chart_sign(p.chart));
        for (a, b) in back.iter().zip(&w) {
            assert!((a.value() - b).abs() < 1e-14);
        }
    }

    #[test]
    fn parse_specs() {
        let m = ChartManifold::parse("torus2:L=6.2831853,perturb=sin").unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.atlas_kind(), AtlasKind::PeriodicBox);
        let s = ChartManifold::parse("sphere:n=4,K=1").unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.constant_curvature(), Some(1.0));
        let fd = ChartManifold::parse("torus3:perturb=mix,fd=0.01").unwrap();
        assert_eq!(fd.mode(), DerivativeMode::FiniteDifference(0.01));
        assert!(ChartManifold::parse("klein:n=2").is_err());
        assert!(ChartManifold::parse("torus2:wobble=3").is_err());
    }

    #[test]
    fn samples_are_deterministic_and_in_domain() {
        let s = ChartManifold::parse("sphere:n=3,K=1").unwrap();
        let a = s.sample_points(50, 42);
        assert_eq!(a, s.sample_points(50, 42));
        assert!(a.iter().all(|p| p.coords.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12));
        let t = ChartManifold::parse("torus2").unwrap();
        assert!(t.sample_points(100, 1).iter().all(|p| p.coords.iter().all(|&x| (0.0..2.0 * PI).contains(&x))));
    }
}
