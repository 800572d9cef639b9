//! Scalar fields and symmetric 2-tensor fields on chart manifolds.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::derivatives::{fd_stencil, jets_with_mode, DerivativeMode};
use super::manifold::{AtlasKind, ChartManifold, ManifoldPoint};
use super::tensor;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::descriptor::Descriptor;

pub type ScalarFn = Arc<dyn Fn(&ChartManifold, usize, &[Jet]) -> Jet + Send + Sync>;

/// Smooth function given in chart coordinates.
#[derive(Clone)]
pub struct ScalarField {
    f: ScalarFn,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.label)
    }
}

impl ScalarField {
    /// Field from a closure `(manifold, chart, coordinate jets) -> jet`.
    pub fn new(label: impl Into<String>, f: ScalarFn) -> Self {
        ScalarField { f, label: label.into() }
    }

    /// Field defined on the ambient representation (angles on tori, unit
    /// vectors on stereographic families).
    pub fn from_ambient(label: impl Into<String>, g: impl Fn(&[Jet]) -> Jet + Send + Sync + 'static) -> Self {
        ScalarField::new(label, Arc::new(move |m: &ChartManifold, chart: usize, x: &[Jet]| g(&m.ambient_jets(chart, x))))
    }

    pub fn constant(v: f64) -> Self {
        ScalarField::new(format!("const:{v}"), Arc::new(move |_: &ChartManifold, _: usize, x: &[Jet]| x[0].constant_like(v)))
    }

    /// `cos θ_i` on tori, the ambient coordinate `ω_i` (a first-order
    /// spherical harmonic) on stereographic families.
    pub fn harmonic(i: usize) -> Self {
        ScalarField::new(
            format!("harmonic:{i}"),
            Arc::new(move |m: &ChartManifold, chart: usize, x: &[Jet]| {
                let w = m.ambient_jets(chart, x);
                match m.atlas_kind() {
                    AtlasKind::PeriodicBox => w[i % w.len()].cos(),
                    _ => w[i % w.len()].clone(),
                }
            }),
        )
    }

    /// A smooth function with no symmetry, for identity checks.
    pub fn generic() -> Self {
        ScalarField::new(
            "generic",
            Arc::new(|m: &ChartManifold, chart: usize, x: &[Jet]| {
                let w = m.ambient_jets(chart, x);
                let last = w.len() - 1;
                match m.atlas_kind() {
                    AtlasKind::PeriodicBox => {
                        let mut v = w[0].sin() * (&w[1] + 0.3).cos() + (&w[0] * 2.0 - &w[last]).cos() * 0.5;
                        for wk in &w {
                            v += wk.sin() * 0.2;
                        }
                        v
                    }
                    _ => (&w[0] * 0.5).exp() * &w[1] + w[last].square() * 0.7 + &w[0] * &w[last] * 0.3,
                }
            }),
        )
    }

    /// `const:v`, `harmonic:i`, or `generic`.
    pub fn parse(desc: &str) -> Result<Self> {
        let s = Descriptor::parse(desc)?;
        match s.kind.as_str() {
            "const" => {
                let v = s.positional_f64()?.first().copied().or(s.get_f64("v")?).unwrap_or(1.0);
                Ok(ScalarField::constant(v))
            }
            "harmonic" => {
                let i = match s.positional.first() {
                    Some(t) => t.parse().map_err(|_| Error::InvalidInput(format!("bad harmonic index '{t}'")))?,
                    None => s.get_usize("i")?.unwrap_or(0),
                };
                Ok(ScalarField::harmonic(i))
            }
            "generic" => Ok(ScalarField::generic()),
            other => Err(Error::InvalidInput(format!("unknown scalar field '{other}'"))),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Taylor jet of the field at `pt` (mode-aware).
    pub fn jets(&self, m: &ChartManifold, pt: &ManifoldPoint, order: usize) -> Result<Jet> {
        match m.chart(pt.chart).mode {
            DerivativeMode::Analytic => Ok((self.f)(m, pt.chart, &Jet::seed(&pt.coords, order))),
            DerivativeMode::FiniteDifference(h) => {
                let out = fd_stencil(&pt.coords, order, h, |q| Ok(vec![(self.f)(m, pt.chart, &Jet::seed(q, 0)).value()]))?;
                Ok(out.into_iter().next().expect("one component"))
            }
        }
    }

    pub fn value(&self, m: &ChartManifold, pt: &ManifoldPoint) -> f64 {
        (self.f)(m, pt.chart, &Jet::seed(&pt.coords, 0)).value()
    }
}

/// User-supplied source of covariant tensor components.
pub trait TensorSource: Send + Sync {
    /// Covariant chart components (row-major `n × n`) as jets of `order`.
    /// Under finite-difference mode `order` is always 0 and the source is
    /// expected to difference its own inputs.
    fn covariant_jets(&self, m: &ChartManifold, chart: usize, p: &[f64], order: usize) -> Result<Vec<Jet>>;
    fn label(&self) -> String;
}

/// Which symmetric tensor a field represents.
#[derive(Clone)]
pub enum TensorKind {
    Metric,
    Ricci,
    /// `ric − R/(2(n−1)) g`, defined for `n ≥ 3`.
    Schouten,
    /// `½ R g − ric`.
    Einstein,
    /// `ric − c g`.
    RicciShift(f64),
    Scaled(f64, Box<TensorKind>),
    Custom(Arc<dyn TensorSource>),
}

impl fmt::Debug for TensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorKind::Metric => write!(f, "metric"),
            TensorKind::Ricci => write!(f, "ricci"),
            TensorKind::Schouten => write!(f, "schouten"),
            TensorKind::Einstein => write!(f, "einstein"),
            TensorKind::RicciShift(c) => write!(f, "ricci-shift({c})"),
            TensorKind::Scaled(s, k) => write!(f, "{s}*{k:?}"),
            TensorKind::Custom(src) => write!(f, "{}", src.label()),
        }
    }
}

/// Symmetric (0,2)-tensor field with covariant-derivative access.
#[derive(Clone, Debug)]
pub struct SymmetricTensorField {
    kind: TensorKind,
}

impl SymmetricTensorField {
    pub fn new(kind: TensorKind) -> Self {
        SymmetricTensorField { kind }
    }

    pub fn metric() -> Self {
        Self::new(TensorKind::Metric)
    }

    pub fn ricci() -> Self {
        Self::new(TensorKind::Ricci)
    }

    pub fn schouten() -> Self {
        Self::new(TensorKind::Schouten)
    }

    pub fn einstein() -> Self {
        Self::new(TensorKind::Einstein)
    }

    pub fn custom(src: Arc<dyn TensorSource>) -> Self {
        Self::new(TensorKind::Custom(src))
    }

    /// Field from a closure returning covariant chart components.
    pub fn from_fn(label: impl Into<String>, f: impl Fn(usize, &[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> Self {
        Self::custom(Arc::new(FnTensorSource::new(label, f)))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(TensorKind::Scaled(s, Box::new(self.kind.clone())))
    }

    pub fn kind(&self) -> &TensorKind {
        &self.kind
    }

    pub fn label(&self) -> String {
        format!("{:?}", self.kind)
    }

    /// Covariant chart components as jets of `order` at `pt` (mode-aware).
    pub fn jets(&self, m: &ChartManifold, pt: &ManifoldPoint, order: usize) -> Result<Vec<Jet>> {
        let mode = m.chart(pt.chart).mode;
        jets_with_mode(mode, &pt.coords, order, |q, o| compute(&self.kind, m, pt.chart, q, o))
    }

    /// Component values at `pt`.
    pub fn values(&self, m: &ChartManifold, pt: &ManifoldPoint) -> Result<Vec<f64>> {
        Ok(tensor::values(&self.jets(m, pt, 0)?))
    }

    /// `max |φ_ij − φ_ji|` of the coordinate components at `pt`.
    pub fn asymmetry(&self, m: &ChartManifold, pt: &ManifoldPoint) -> Result<f64> {
        let n = m.dim();
        let v = self.values(m, pt)?;
        Ok((0..n * n).map(|k| (v[k] - v[(k % n) * n + k / n]).abs()).fold(0.0, f64::max))
    }
}

/// Metric and Ricci jets of the given order (mode-aware inputs, see
/// [`jets_with_mode`]).
pub(crate) struct RicciJets {
    pub g: Vec<Jet>,
    pub ric: Vec<Jet>,
    pub scalar: Jet,
}

pub(crate) fn ricci_jets(m: &ChartManifold, chart: usize, q: &[f64], order: usize) -> Result<RicciJets> {
    let n = m.dim();
    let c = m.chart(chart);
    if let Some(k) = m.constant_curvature() {
        let g = c.metric_jets(q, order)?;
        let ginv = tensor::inverse(&g, n);
        let ric: Vec<Jet> = g.iter().map(|x| x * ((n as f64 - 1.0) * k)).collect();
        let scalar = tensor::trace(&ric, &ginv, n);
        return Ok(RicciJets { g, ric, scalar });
    }
    let g2 = c.metric_jets(q, order + 2)?;
    let gamma = tensor::christoffel(&g2, n);
    let riem = tensor::riemann(&g2, n, &gamma);
    let ginv = tensor::inverse(&g2, n);
    let ric = tensor::ricci(&riem, &ginv, n);
    let g: Vec<Jet> = g2.iter().map(|x| x.truncated(order)).collect();
    let ginv: Vec<Jet> = ginv.iter().map(|x| x.truncated(order)).collect();
    let scalar = tensor::trace(&ric, &ginv, n);
    Ok(RicciJets { g, ric, scalar })
}

/// Fully covariant curvature jets of the given order (mode-aware inputs).
pub(crate) fn riemann_jets(m: &ChartManifold, chart: usize, q: &[f64], order: usize) -> Result<Vec<Jet>> {
    let n = m.dim();
    let c = m.chart(chart);
    if let Some(k) = m.constant_curvature() {
        let g = c.metric_jets(q, order)?;
        return Ok(tensor::space_form_riemann(&g, n, k));
    }
    let g2 = c.metric_jets(q, order + 2)?;
    let gamma = tensor::christoffel(&g2, n);
    Ok(tensor::riemann(&g2, n, &gamma))
}

fn compute(kind: &TensorKind, m: &ChartManifold, chart: usize, q: &[f64], order: usize) -> Result<Vec<Jet>> {
    let n = m.dim();
    Ok(match kind {
        TensorKind::Metric => m.chart(chart).metric_jets(q, order)?,
        TensorKind::Ricci => ricci_jets(m, chart, q, order)?.ric,
        TensorKind::Schouten => {
            if n < 3 {
                return Err(Error::SchoutenUndefined { n });
            }
            let r = ricci_jets(m, chart, q, order)?;
            let s = &r.scalar / (2.0 * (n as f64 - 1.0));
            r.ric.iter().zip(&r.g).map(|(a, g)| a - g * &s).collect()
        }
        TensorKind::Einstein => {
            let r = ricci_jets(m, chart, q, order)?;
            let half = &r.scalar * 0.5;
            r.ric.iter().zip(&r.g).map(|(a, g)| g * &half - a).collect()
        }
        TensorKind::RicciShift(c) => {
            let r = ricci_jets(m, chart, q, order)?;
            r.ric.iter().zip(&r.g).map(|(a, g)| a - g * *c).collect()
        }
        TensorKind::Scaled(s, inner) => compute(inner, m, chart, q, order)?.into_iter().map(|x| x * *s).collect(),
        TensorKind::Custom(src) => src.covariant_jets(m, chart, q, order)?,
    })
}

pub type TensorFn = Arc<dyn Fn(usize, &[Jet]) -> Vec<Jet> + Send + Sync>;

/// Covariant components given by a closure of `(chart, coordinate jets)`.
pub struct FnTensorSource {
    f: TensorFn,
    label: String,
}

impl FnTensorSource {
    pub fn new(label: impl Into<String>, f: impl Fn(usize, &[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> Self {
        FnTensorSource { f: Arc::new(f), label: label.into() }
    }
}

impl TensorSource for FnTensorSource {
    fn covariant_jets(&self, _m: &ChartManifold, chart: usize, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        Ok((self.f)(chart, &Jet::seed(p, order)))
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Smooth, positive definite tensor `g + Σ_m s_m(x) B_m` with random
/// symmetric `B_m` and smooth bounded modulations `s_m`.
pub struct RandomSpdSource {
    seed: u64,
    amplitude: f64,
    mats: Vec<Vec<f64>>,
    freqs: Vec<Vec<f64>>,
    phases: Vec<f64>,
}

impl RandomSpdSource {
    const TERMS: usize = 3;
    const MAX_AMBIENT: usize = 9;

    /// `amplitude` bounds the spectral norm of the perturbation; keep it
    /// below the smallest metric eigenvalue on the sampled region.
    pub fn new(n: usize, seed: u64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mats = Vec::new();
        let mut freqs = Vec::new();
        let mut phases = Vec::new();
        for _ in 0..Self::TERMS {
            let mut b = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    b[i * n + j] = v;
                    b[j * n + i] = v;
                }
            }
            let ev = tensor::symmetric_eigenvalues(&b, n);
            let norm = ev.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-12);
            let scale = amplitude / (Self::TERMS as f64 * norm);
            mats.push(b.into_iter().map(|x| x * scale).collect());
            freqs.push((0..Self::MAX_AMBIENT).map(|_| rng.random_range(-1.5..1.5)).collect());
            phases.push(rng.random_range(0.0..std::f64::consts::TAU));
        }
        RandomSpdSource { seed, amplitude, mats, freqs, phases }
    }

    fn build(&self, m: &ChartManifold, chart: usize, x: &[Jet]) -> Vec<Jet> {
        let n = m.dim();
        let mut out = m.chart(chart).metric_jets(&tensor::values(x), x[0].order()).expect("metric jets");
        let w = m.ambient_jets(chart, x);
        for t in 0..Self::TERMS {
            let mut arg = x[0].constant_like(self.phases[t]);
            for (k, wk) in w.iter().enumerate() {
                arg += wk * self.freqs[t][k % Self::MAX_AMBIENT];
            }
            let s = arg.sin();
            for (slot, b) in out.iter_mut().zip(&self.mats[t]) {
                *slot += &s * *b;
            }
        }
        debug_assert_eq!(out.len(), n * n);
        out
    }
}

impl TensorSource for RandomSpdSource {
    fn covariant_jets(&self, m: &ChartManifold, chart: usize, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        Ok(self.build(m, chart, &Jet::seed(p, order)))
    }

    fn label(&self) -> String {
        format!("custom:random,seed={},amp={}", self.seed, self.amplitude)
    }
}

/// Parse a tensor descriptor: `metric`, `ricci`, `schouten`, `einstein`,
/// `ricci-shift:c=..`, `custom:random[,seed=..][,amp=..]`, or
/// `skewed[:amp=..]`, a deliberately non-symmetric field `I + amp·(E₁₂ − E₂₁)`
/// (coordinate components) that every consumer must reject.
pub fn parse_tensor(desc: &str, n: usize) -> Result<SymmetricTensorField> {
    let s = Descriptor::parse(desc)?;
    Ok(match s.kind.as_str() {
        "metric" | "g" => SymmetricTensorField::metric(),
        "ricci" | "ric" => SymmetricTensorField::ricci(),
        "schouten" => SymmetricTensorField::schouten(),
        "einstein" => SymmetricTensorField::einstein(),
        "ricci-shift" => SymmetricTensorField::new(TensorKind::RicciShift(s.get_f64("c")?.unwrap_or(0.0))),
        "custom" => {
            let what = s.positional.first().map(String::as_str).unwrap_or("random");
            if what != "random" {
                return Err(Error::InvalidInput(format!("unknown custom tensor '{what}'")));
            }
            let seed = s.get_usize("seed")?.unwrap_or(7) as u64;
            let amp = s.get_f64("amp")?.unwrap_or(0.2);
            SymmetricTensorField::custom(Arc::new(RandomSpdSource::new(n, seed, amp)))
        }
        "skewed" => {
            let amp = s.get_f64("amp")?.unwrap_or(0.1);
            SymmetricTensorField::from_fn(format!("skewed:amp={amp}"), move |_, x: &[Jet]| {
                let n = x.len();
                (0..n * n)
                    .map(|k| {
                        let (i, j) = (k / n, k % n);
                        let v = if i == j { 1.0 } else if (i, j) == (0, 1) { amp } else if (i, j) == (1, 0) { -amp } else { 0.0 };
                        x[0].constant_like(v)
                    })
                    .collect()
            })
        }
        other => return Err(Error::InvalidInput(format!("unknown tensor field '{other}'"))),
    })
}
