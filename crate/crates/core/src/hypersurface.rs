//! Hypersurfaces in space forms: fundamental forms, shape operator, mean
//! curvature (trace convention `H = Σ λ_i`), the Newton transformation
//! `P₁ = H I − A`, the polynomial `Q(A)` and the pinching constants.
//!
//! Curvature `κ = 0` surfaces live in ℝ^{n+1}. For `κ > 0` the ambient
//! space is the sphere of radius `1/√κ` in ℝ^{n+2}; since the normal is
//! tangent to that sphere, the second fundamental form is still
//! `h_ij = ⟨∂_i∂_j x, ν⟩`. Negative `κ` is supported only for analytic
//! umbilic (geodesic) spheres.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::derivatives::{fd_stencil, jets_with_mode, DerivativeMode};
use crate::geometry::manifold::{chart_sign, stereographic_unit, ChartManifold, JetMap, ManifoldPoint};
use crate::geometry::tensor::{self, orthonormal_frame, symmetric_eigenvalues, to_frame, values};
use crate::geometry::{CurvatureBundle, SamplePlan, SymmetricTensorField, TensorSource};
use crate::jet::{reseed, Jet};
use crate::descriptor::Descriptor;

/// Built-in hypersurface families.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SurfaceKind {
    /// Round sphere of radius `r` in ℝ^{n+1}.
    Sphere { r: f64 },
    /// `Σ x_i² / a_i² = 1` in ℝ^{n+1}.
    Ellipsoid { axes: Vec<f64> },
    /// Umbilic distance sphere with `A = α I` in the space form of curvature `κ`.
    GeodesicSphere { kappa: f64, alpha: f64 },
}

struct Core {
    n: usize,
    kappa: f64,
    kind: SurfaceKind,
    mode: DerivativeMode,
    /// +1: normal points towards `center`; −1: away.
    orientation: f64,
    center: Vec<f64>,
}

impl Core {
    fn immersion(&self, chart: usize, u: &[Jet]) -> Vec<Jet> {
        let w = stereographic_unit(u, chart_sign(chart));
        match &self.kind {
            SurfaceKind::Sphere { r } => w.iter().map(|x| x * *r).collect(),
            SurfaceKind::Ellipsoid { axes } => w.iter().zip(axes).map(|(x, a)| x * *a).collect(),
            SurfaceKind::GeodesicSphere { kappa, alpha } => {
                if *kappa == 0.0 {
                    w.iter().map(|x| x / *alpha).collect()
                } else {
                    let rho = 1.0 / kappa.sqrt();
                    let theta0 = (kappa.sqrt() / alpha).atan();
                    let mut out: Vec<Jet> = w.iter().map(|x| x * (rho * theta0.sin())).collect();
                    out.push(u[0].constant_like(rho * theta0.cos()));
                    out
                }
            }
        }
    }

    /// Ambient coordinates as jets (mode-aware; at most order 2 under
    /// finite differences).
    fn immersion_jets(&self, chart: usize, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        match self.mode {
            DerivativeMode::Analytic => Ok(self.immersion(chart, &Jet::seed(p, order))),
            DerivativeMode::FiniteDifference(h) => {
                fd_stencil(p, order, h, |q| Ok(values(&self.immersion(chart, &Jet::seed(q, 0)))))
            }
        }
    }

    /// Induced metric and second fundamental form as jets of `order`.
    fn fundamental_forms(&self, chart: usize, p: &[f64], order: usize) -> Result<(Vec<Jet>, Vec<Jet>)> {
        let n = self.n;
        let x = self.immersion_jets(chart, p, order + 2)?;
        let d = x.len();
        let tangents: Vec<Vec<Jet>> = (0..n).map(|i| x.iter().map(|c| c.partial(i)).collect()).collect();
        let dot = |a: &[Jet], b: &[Jet]| -> Jet {
            let mut acc = &a[0] * &b[0];
            for k in 1..a.len() {
                acc += &a[k] * &b[k];
            }
            acc
        };
        let mut g = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                g.push(dot(&tangents[i], &tangents[j]).truncated(order));
            }
        }
        let gv = values(&g);
        if tensor::min_eigenvalue(&gv, n) <= 1e-14 * gv.iter().fold(0.0f64, |a, b| a.max(b.abs())) {
            return Err(Error::DegenerateImmersion { point: p.to_vec() });
        }
        // vectors the normal must be orthogonal to
        let mut span: Vec<Vec<Jet>> = tangents.iter().map(|t| t.iter().map(|c| c.truncated(order + 1)).collect()).collect();
        if self.kappa > 0.0 {
            span.push(x.iter().map(|c| c.truncated(order + 1)).collect());
        }
        let k = span.len();
        let mut gram = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                gram.push(dot(&span[a], &span[b]));
            }
        }
        let gram_inv = tensor::inverse(&gram, k);
        // probe axis with the largest normal component
        let gram_v = values(&gram_inv);
        let span_v: Vec<Vec<f64>> = span.iter().map(|s| values(s)).collect();
        let mut best = (0usize, -1.0f64);
        for m in 0..d {
            let mut r = vec![0.0; d];
            r[m] = 1.0;
            for a in 0..k {
                for b in 0..k {
                    let c = gram_v[a * k + b] * span_v[b][m];
                    for (slot, s) in r.iter_mut().zip(&span_v[a]) {
                        *slot -= c * s;
                    }
                }
            }
            let norm = r.iter().map(|v| v * v).sum::<f64>();
            if norm > best.1 {
                best = (m, norm);
            }
        }
        let m = best.0;
        let mut r: Vec<Jet> = (0..d).map(|c| x[0].truncated(order + 1).constant_like(if c == m { 1.0 } else { 0.0 })).collect();
        for a in 0..k {
            for b in 0..k {
                let c = &gram_inv[a * k + b] * &span[b][m];
                for (slot, s) in r.iter_mut().zip(&span[a]) {
                    *slot -= &c * s;
                }
            }
        }
        let inv_norm = dot(&r, &r).sqrt().recip();
        let mut nu: Vec<Jet> = r.iter().map(|c| c * &inv_norm).collect();
        let towards: f64 = nu.iter().zip(&x).zip(&self.center).map(|((v, xc), c)| v.value() * (c - xc.value())).sum();
        let sign = if towards >= 0.0 { self.orientation } else { -self.orientation };
        if sign < 0.0 {
            nu.iter_mut().for_each(|c| *c *= -1.0);
        }
        let mut h = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let second: Vec<Jet> = tangents[i].iter().map(|c| c.partial(j)).collect();
                h.push(dot(&second, &nu));
            }
        }
        Ok((g, h))
    }
}

/// Shape quantities at one point, in the Gram–Schmidt frame of the induced metric.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeData {
    pub n: usize,
    /// Shape operator (symmetric, frame components).
    pub a: Vec<f64>,
    /// Principal curvatures, ascending.
    pub principal: Vec<f64>,
    /// Trace of the shape operator.
    pub mean: f64,
    pub p1: Vec<f64>,
    pub norm_a2: f64,
    pub s2: f64,
}

impl ShapeData {
    /// Shape data of a symmetric frame matrix `a`.
    pub fn from_matrix(n: usize, a: Vec<f64>) -> Self {
        let mean: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let norm_a2: f64 = a.iter().map(|x| x * x).sum();
        let p1 = (0..n * n).map(|k| if k / n == k % n { mean - a[k] } else { -a[k] }).collect();
        let principal = symmetric_eigenvalues(&a, n);
        ShapeData { n, a, principal, mean, p1, norm_a2, s2: 0.5 * (mean * mean - norm_a2) }
    }
}

/// Immersed hypersurface `x: Mⁿ → M̄ⁿ⁺¹(κ)` with its induced-metric manifold.
#[derive(Clone)]
pub struct ImmersedHypersurface {
    core: Arc<Core>,
    induced: ChartManifold,
    label: String,
}

impl std::fmt::Debug for ImmersedHypersurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ImmersedHypersurface({})", self.label)
    }
}

impl ImmersedHypersurface {
    /// Build a hypersurface. The normal defaults to the orientation making
    /// `H > 0` at the reference point (chart 0, origin); `flip` reverses it.
    pub fn new(n: usize, kind: SurfaceKind, mode: DerivativeMode, flip: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        let (kappa, center) = match &kind {
            SurfaceKind::Sphere { r } => {
                if !(*r > 0.0) {
                    return Err(Error::InvalidInput(format!("sphere radius must be positive, got {r}")));
                }
                (0.0, vec![0.0; n + 1])
            }
            SurfaceKind::Ellipsoid { axes } => {
                if axes.len() != n + 1 || axes.iter().any(|a| !(*a > 0.0)) {
                    return Err(Error::InvalidInput(format!("ellipsoid needs {} positive semi-axes", n + 1)));
                }
                (0.0, vec![0.0; n + 1])
            }
            SurfaceKind::GeodesicSphere { kappa, alpha } => {
                if !(*alpha > 0.0) {
                    return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
                }
                if *kappa < 0.0 && alpha * alpha + kappa <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "a geodesic sphere in curvature {kappa} needs alpha > {}",
                        (-kappa).sqrt()
                    )));
                }
                let mut c = vec![0.0; if *kappa > 0.0 { n + 2 } else { n + 1 }];
                if *kappa > 0.0 {
                    c[n + 1] = 1.0 / kappa.sqrt();
                }
                (*kappa, c)
            }
        };
        let label = match &kind {
            SurfaceKind::Sphere { r } => format!("sphere:r={r},n={n}"),
            SurfaceKind::Ellipsoid { axes } => {
                format!("ellipsoid:{}", axes.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","))
            }
            SurfaceKind::GeodesicSphere { kappa, alpha } => format!("geodesic-sphere:kappa={kappa},alpha={alpha},n={n}"),
        };
        if kappa < 0.0 {
            let SurfaceKind::GeodesicSphere { alpha, .. } = kind else { unreachable!() };
            let induced = ChartManifold::round_sphere(n, alpha * alpha + kappa, mode)?;
            let core = Core { n, kappa, kind, mode, orientation: if flip { -1.0 } else { 1.0 }, center };
            return Ok(ImmersedHypersurface { core: Arc::new(core), induced, label });
        }
        let mut core = Core { n, kappa, kind, mode, orientation: 1.0, center };
        let (g0, h0) = core.fundamental_forms(0, &vec![0.0; n], 0)?;
        let h_ref = tensor::trace(&h0, &tensor::inverse(&g0, n), n).value();
        core.orientation = if h_ref >= 0.0 { 1.0 } else { -1.0 };
        if flip {
            core.orientation = -core.orientation;
        }
        let core = Arc::new(core);
        let metric = |chart: usize| -> JetMap {
            let core = core.clone();
            Arc::new(move |u: &[Jet]| induced_metric(&core, chart, u))
        };
        let induced = ChartManifold::immersed(n, [metric(0), metric(1)], mode, label.clone());
        Ok(ImmersedHypersurface { core, induced, label })
    }

    /// `sphere:r=..[,n=..]`, `ellipsoid:a1,..,a_{n+1}`,
    /// `geodesic-sphere:kappa=..,alpha=..[,n=..]`; optional `fd=h`, `flip=1`.
    pub fn parse(desc: &str) -> Result<Self> {
        let s = Descriptor::parse(desc)?;
        let mode = match s.get_f64("fd")? {
            Some(h) if h > 0.0 => DerivativeMode::FiniteDifference(h),
            Some(h) => return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h}"))),
            None => DerivativeMode::Analytic,
        };
        let flip = s.get_usize("flip")?.unwrap_or(0) != 0;
        match s.kind.as_str() {
            "sphere" => {
                s.reject_unknown(&["r", "n", "fd", "flip"])?;
                let r = s.get_f64("r")?.unwrap_or(1.0);
                let n = s.get_usize("n")?.unwrap_or(2);
                Self::new(n, SurfaceKind::Sphere { r }, mode, flip)
            }
            "ellipsoid" => {
                s.reject_unknown(&["fd", "flip"])?;
                let axes = s.positional_f64()?;
                if axes.len() < 3 {
                    return Err(Error::InvalidInput("ellipsoid needs at least 3 semi-axes".into()));
                }
                Self::new(axes.len() - 1, SurfaceKind::Ellipsoid { axes }, mode, flip)
            }
            "geodesic-sphere" => {
                s.reject_unknown(&["kappa", "alpha", "n", "fd", "flip"])?;
                let kappa = s.get_f64("kappa")?.unwrap_or(0.0);
                let alpha = s.get_f64("alpha")?.unwrap_or(1.0);
                let n = s.get_usize("n")?.unwrap_or(2);
                Self::new(n, SurfaceKind::GeodesicSphere { kappa, alpha }, mode, flip)
            }
            other => Err(Error::InvalidInput(format!("unknown surface kind '{other}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.core.n
    }

    pub fn kappa(&self) -> f64 {
        self.core.kappa
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.core.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Manifold carrying the induced metric.
    pub fn induced(&self) -> &ChartManifold {
        &self.induced
    }

    fn analytic_umbilic(&self) -> Option<f64> {
        match self.core.kind {
            SurfaceKind::GeodesicSphere { alpha, kappa } if kappa < 0.0 => Some(alpha * self.core.orientation),
            _ => None,
        }
    }

    /// Ambient position of a chart point (not available for `κ < 0`).
    pub fn position(&self, pt: &ManifoldPoint) -> Option<Vec<f64>> {
        if self.analytic_umbilic().is_some() {
            return None;
        }
        Some(values(&self.core.immersion(pt.chart, &Jet::seed(&pt.coords, 0))))
    }

    /// Coordinate jets of the induced metric and second fundamental form.
    pub fn fundamental_form_jets(&self, pt: &ManifoldPoint, order: usize) -> Result<(Vec<Jet>, Vec<Jet>)> {
        if let Some(alpha) = self.analytic_umbilic() {
            let g = self.induced.metric_jets(pt, order)?;
            let h = g.iter().map(|x| x * alpha).collect();
            return Ok((g, h));
        }
        self.core.fundamental_forms(pt.chart, &pt.coords, order)
    }

    pub fn shape_at(&self, pt: &ManifoldPoint) -> Result<ShapeData> {
        let n = self.core.n;
        let (g, h) = self.fundamental_form_jets(pt, 0)?;
        let e = orthonormal_frame(&values(&g), n, &pt.coords)?;
        let mut a = to_frame(&values(&h), 2, n, &e);
        for i in 0..n {
            for j in i + 1..n {
                let s = 0.5 * (a[i * n + j] + a[j * n + i]);
                a[i * n + j] = s;
                a[j * n + i] = s;
            }
        }
        Ok(ShapeData::from_matrix(n, a))
    }

    /// Intrinsic curvature from the Gauss equation
    /// `R_ijkl = κ(δ_ik δ_jl − δ_il δ_jk) + A_ik A_jl − A_il A_jk`.
    pub fn gauss_intrinsic(&self, pt: &ManifoldPoint) -> Result<CurvatureBundle> {
        let n = self.core.n;
        let sd = self.shape_at(pt)?;
        let (g, _) = self.fundamental_form_jets(pt, 0)?;
        let e = orthonormal_frame(&values(&g), n, &pt.coords)?;
        let k = self.core.kappa;
        let a = |i: usize, j: usize| sd.a[i * n + j];
        let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        let mut r = vec![0.0; n.pow(4)];
        for i in 0..n {
            for j in 0..n {
                for p in 0..n {
                    for q in 0..n {
                        r[((i * n + j) * n + p) * n + q] =
                            k * (d(i, p) * d(j, q) - d(i, q) * d(j, p)) + a(i, p) * a(j, q) - a(i, q) * a(j, p);
                    }
                }
            }
        }
        Ok(CurvatureBundle::from_frame_riemann(n, r, e))
    }

    /// Maximum of `|h_ijk − h_ikj|` (Codazzi equation) at `pt`.
    pub fn codazzi_defect(&self, pt: &ManifoldPoint) -> Result<f64> {
        let field = SymmetricTensorField::custom(Arc::new(SecondFundamentalForm(self.clone())));
        crate::geometry::codazzi_defect(&field, &self.induced, pt)
    }

    /// The Newton tensor `P₁ = H g − h` as a tensor field on the induced manifold.
    pub fn newton_p1(&self) -> SymmetricTensorField {
        SymmetricTensorField::custom(Arc::new(NewtonP1(self.clone())))
    }

    /// Mean curvature as a jet of `order` (mode-aware).
    pub fn mean_curvature_jet(&self, pt: &ManifoldPoint, order: usize) -> Result<Jet> {
        let n = self.core.n;
        let out = jets_with_mode(self.core.mode, &pt.coords, order, |q, o| {
            let p = ManifoldPoint::new(pt.chart, q.to_vec());
            let (g, h) = self.fundamental_form_jets(&p, o)?;
            Ok(vec![tensor::trace(&h, &tensor::inverse(&g, n), n)])
        })?;
        Ok(out.into_iter().next().expect("one component"))
    }

    /// `(|∇H|, ΔH − λ_min(Hess H))` at `pt`: the second entry is the
    /// maximum over unit `v` of the trace of `Hess H` on `v^⊥`.
    pub fn mean_curvature_hessian_data(&self, pt: &ManifoldPoint) -> Result<(f64, f64)> {
        let n = self.core.n;
        let hj = self.mean_curvature_jet(pt, 2)?;
        let g1 = self.induced.metric_jets(pt, 1)?;
        let gamma = tensor::christoffel(&g1, n);
        let grad: Vec<Jet> = (0..n).map(|i| hj.partial(i)).collect();
        let hess = tensor::covariant_derivative(&grad, 1, n, &gamma);
        let e = orthonormal_frame(&values(&g1), n, &pt.coords)?;
        let hf = to_frame(&values(&hess), 2, n, &e);
        let gf = to_frame(&values(&grad), 1, n, &e);
        let lap: f64 = (0..n).map(|i| hf[i * n + i]).sum();
        let lmin = symmetric_eigenvalues(&hf, n)[0];
        Ok((gf.iter().map(|x| x * x).sum::<f64>().sqrt(), lap - lmin))
    }

    /// Sampled `(α, a, σ)`.
    pub fn pinching_constants(&self, plan: &SamplePlan) -> Result<PinchingConstants> {
        if let Some(alpha) = self.analytic_umbilic() {
            if alpha <= 0.0 {
                return Err(Error::NotConvex { point: vec![], lambda: alpha });
            }
            return Ok(PinchingConstants { alpha, a: 1.0, sigma: 0.0, samples: plan.points, constant_mean_curvature: true });
        }
        let pts = self.induced.sample_points(plan.points, plan.seed);
        let per: Vec<(f64, f64, f64, f64)> = pts
            .par_iter()
            .map(|pt| -> Result<(f64, f64, f64, f64)> {
                let sd = self.shape_at(pt)?;
                let lo = sd.principal[0];
                if lo <= 0.0 {
                    return Err(Error::NotConvex { point: pt.coords.clone(), lambda: lo });
                }
                let (grad, sig) = self.mean_curvature_hessian_data(pt)?;
                Ok((lo, *sd.principal.last().expect("n ≥ 2"), grad, sig))
            })
            .collect::<Result<_>>()?;
        let alpha = per.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let top = per.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let grad_max = per.iter().map(|p| p.2).fold(0.0, f64::max);
        let constant = grad_max <= 1e-9 * (1.0 + top.abs());
        let sigma = if constant { 0.0 } else { per.iter().map(|p| p.3).fold(f64::NEG_INFINITY, f64::max) };
        Ok(PinchingConstants { alpha, a: top / alpha, sigma, samples: plan.points, constant_mean_curvature: constant })
    }
}

fn induced_metric(core: &Core, chart: usize, u: &[Jet]) -> Vec<Jet> {
    let n = core.n;
    let order = u[0].order();
    let tangents: Vec<Vec<Jet>> = match core.mode {
        DerivativeMode::Analytic => {
            let x = core.immersion(chart, &reseed(u, order + 1));
            (0..n).map(|i| x.iter().map(|c| c.partial(i)).collect()).collect()
        }
        DerivativeMode::FiniteDifference(h) => {
            // Only ever evaluated at order 0 in this mode.
            let p = values(u);
            (0..n)
                .map(|i| {
                    let mut qp = p.clone();
                    let mut qm = p.clone();
                    qp[i] += h;
                    qm[i] -= h;
                    let xp = values(&core.immersion(chart, &Jet::seed(&qp, 0)));
                    let xm = values(&core.immersion(chart, &Jet::seed(&qm, 0)));
                    xp.iter().zip(&xm).map(|(a, b)| u[0].constant_like((a - b) / (2.0 * h))).collect()
                })
                .collect()
        }
    };
    let mut g = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = &tangents[i][0] * &tangents[j][0];
            for k in 1..tangents[i].len() {
                acc += &tangents[i][k] * &tangents[j][k];
            }
            g.push(acc);
        }
    }
    g
}

struct NewtonP1(ImmersedHypersurface);

impl TensorSource for NewtonP1 {
    fn covariant_jets(&self, _m: &ChartManifold, chart: usize, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        let n = self.0.dim();
        let (g, h) = self.0.fundamental_form_jets(&ManifoldPoint::new(chart, p.to_vec()), order)?;
        let mean = tensor::trace(&h, &tensor::inverse(&g, n), n);
        Ok(g.iter().zip(&h).map(|(gij, hij)| gij * &mean - hij).collect())
    }

    fn label(&self) -> String {
        format!("newton1({})", self.0.label())
    }
}

struct SecondFundamentalForm(ImmersedHypersurface);

impl TensorSource for SecondFundamentalForm {
    fn covariant_jets(&self, _m: &ChartManifold, chart: usize, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        Ok(self.0.fundamental_form_jets(&ManifoldPoint::new(chart, p.to_vec()), order)?.1)
    }

    fn label(&self) -> String {
        format!("second-fundamental-form({})", self.0.label())
    }
}

/// Sampled hypothesis constants `0 < α I ≤ A ≤ a α I` and `σ`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PinchingConstants {
    pub alpha: f64,
    pub a: f64,
    pub sigma: f64,
    pub samples: usize,
    pub constant_mean_curvature: bool,
}

/// `Q(A) = 2A³ − 3HA² + (2H² − |A|² − κ(n−2))A + κ(2n−3)H I` (frame components).
pub fn q_polynomial(sd: &ShapeData, kappa: f64) -> Vec<f64> {
    let n = sd.n;
    let a = nalgebra::DMatrix::from_row_slice(n, n, &sd.a);
    let a2 = &a * &a;
    let a3 = &a2 * &a;
    let h = sd.mean;
    let nf = n as f64;
    let q = a3 * 2.0 - a2 * (3.0 * h) + &a * (2.0 * h * h - sd.norm_a2 - kappa * (nf - 2.0))
        + nalgebra::DMatrix::identity(n, n) * (kappa * (2.0 * nf - 3.0) * h);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = q[(i, j)];
        }
    }
    out
}

/// Lower bound for the eigenvalues of `Q(A)` when `0 < αI ≤ A ≤ aαI`:
/// `2(n−1)α³(n−a²) + 2κ(n−1)²α` for `κ > 0`, with `α` replaced by `aα`
/// in the curvature term for `κ ≤ 0`.
pub fn q_lower_bound(n: usize, kappa: f64, alpha: f64, a: f64) -> f64 {
    let nf = n as f64;
    let base = 2.0 * (nf - 1.0) * alpha.powi(3) * (nf - a * a);
    if kappa > 0.0 {
        base + 2.0 * kappa * (nf - 1.0).powi(2) * alpha
    } else {
        base + 2.0 * kappa * (nf - 1.0).powi(2) * a * alpha
    }
}
