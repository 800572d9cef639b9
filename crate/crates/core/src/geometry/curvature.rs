//! Pointwise curvature, sampled curvature bounds and divergence checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::fields::{riemann_jets, SymmetricTensorField, TensorKind};
use super::manifold::{AtlasKind, ChartManifold, ManifoldPoint};
use super::tensor::{self, orthonormal_frame, to_frame, values};
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Curvature quantities at one point, in an orthonormal frame.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureBundle {
    pub dim: usize,
    /// `R_ijkl = ⟨Rm(e_i,e_j)e_k,e_l⟩`; round spheres have `R_1212 > 0`.
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
    /// Defined for `n ≥ 3`.
    pub schouten: Option<Vec<f64>>,
    /// Defined for `n ≥ 3`.
    pub weyl: Option<Vec<f64>>,
    /// Column `a` = coordinate components of `e_a`.
    pub frame: Vec<f64>,
}

impl CurvatureBundle {
    /// Assemble all derived tensors from frame components of the curvature tensor.
    pub fn from_frame_riemann(dim: usize, riemann: Vec<f64>, frame: Vec<f64>) -> Self {
        let n = dim;
        let r = |i: usize, j: usize, k: usize, l: usize| riemann[((i * n + j) * n + k) * n + l];
        let mut ricci = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                ricci[i * n + j] = (0..n).map(|k| r(i, k, j, k)).sum();
            }
        }
        let scalar: f64 = (0..n).map(|i| ricci[i * n + i]).sum();
        let (schouten, weyl) = if n >= 3 {
            let c = scalar / (2.0 * (n as f64 - 1.0));
            let s: Vec<f64> =
                (0..n * n).map(|k| ricci[k] - if k / n == k % n { c } else { 0.0 }).collect();
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            let mut w = vec![0.0; n.pow(4)];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let part = s[i * n + k] * d(j, l) - s[i * n + l] * d(j, k) + s[j * n + l] * d(i, k)
                                - s[j * n + k] * d(i, l);
                            w[((i * n + j) * n + k) * n + l] = r(i, j, k, l) - part / (n as f64 - 2.0);
                        }
                    }
                }
            }
            (Some(s), Some(w))
        } else {
            (None, None)
        };
        CurvatureBundle { dim, riemann, ricci, scalar, schouten, weyl, frame }
    }

    pub fn r(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim;
        self.riemann[((i * n + j) * n + k) * n + l]
    }

    /// Sectional curvature of the plane spanned by frame vectors `u`, `v`:
    /// `R(u,v,u,v) / (|u|²|v|² − ⟨u,v⟩²)`.
    pub fn sectional(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let n = self.dim;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let area2 = dot(u, u) * dot(v, v) - dot(u, v).powi(2);
        let scale = dot(u, u) * dot(v, v);
        if !(area2 > 1e-14 * scale) {
            return Err(Error::DegeneratePlane);
        }
        let mut num = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        num += self.r(i, j, k, l) * u[i] * v[j] * u[k] * v[l];
                    }
                }
            }
        }
        Ok(num / area2)
    }

    /// Smallest Ricci eigenvalue.
    pub fn min_ricci_eigenvalue(&self) -> f64 {
        tensor::min_eigenvalue(&self.ricci, self.dim)
    }

    /// Largest violation of the pair symmetries and first Bianchi identity.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.r(i, j, k, l);
                        worst = worst
                            .max((v + self.r(j, i, k, l)).abs())
                            .max((v + self.r(i, j, l, k)).abs())
                            .max((v - self.r(k, l, i, j)).abs())
                            .max((v + self.r(j, k, i, l) + self.r(k, i, j, l)).abs());
                    }
                }
            }
        }
        worst
    }

    /// `max |Σ_i W_ijil|` (zero when the Weyl tensor is trace-free).
    pub fn weyl_trace_defect(&self) -> Option<f64> {
        let n = self.dim;
        let w = self.weyl.as_ref()?;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for l in 0..n {
                let t: f64 = (0..n).map(|i| w[((i * n + j) * n + i) * n + l]).sum();
                worst = worst.max(t.abs());
            }
        }
        Some(worst)
    }
}

/// Full curvature bundle at `pt`.
pub fn curvature_at(m: &ChartManifold, pt: &ManifoldPoint) -> Result<CurvatureBundle> {
    let n = m.dim();
    let g = m.checked_metric(pt)?;
    let e = orthonormal_frame(&g, n, &pt.coords)?;
    let riem = values(&riemann_jets(m, pt.chart, &pt.coords, 0)?);
    Ok(CurvatureBundle::from_frame_riemann(n, to_frame(&riem, 4, n, &e), e))
}

/// How many points and 2-planes to sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplePlan {
    pub points: usize,
    pub planes_per_point: usize,
    pub seed: u64,
}

impl SamplePlan {
    pub fn new(points: usize, planes_per_point: usize, seed: u64) -> Self {
        SamplePlan { points, planes_per_point, seed }
    }
}

/// Estimate of the sectional-curvature lower bound `K₀` (exact on analytic spheres).
pub fn min_sectional(m: &ChartManifold, plan: &SamplePlan) -> Result<f64> {
    if m.atlas_kind() == AtlasKind::AnalyticSphere {
        return Ok(m.constant_curvature().expect("analytic sphere has constant curvature"));
    }
    let n = m.dim();
    let pts = m.sample_points(plan.points, plan.seed);
    let mins: Vec<f64> = pts
        .par_iter()
        .enumerate()
        .map(|(idx, pt)| -> Result<f64> {
            let cb = curvature_at(m, pt)?;
            let mut best = f64::INFINITY;
            for i in 0..n {
                for j in i + 1..n {
                    let mut u = vec![0.0; n];
                    let mut v = vec![0.0; n];
                    u[i] = 1.0;
                    v[j] = 1.0;
                    best = best.min(cb.sectional(&u, &v)?);
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_stream(idx as u64);
            let mut drawn = 0;
            while drawn < plan.planes_per_point {
                let u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                if let Ok(k) = cb.sectional(&u, &v) {
                    best = best.min(k);
                    drawn += 1;
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
}

/// Estimate of the Ricci lower bound `L₀` (exact on analytic spheres).
pub fn min_ricci(m: &ChartManifold, plan: &SamplePlan) -> Result<f64> {
    if m.atlas_kind() == AtlasKind::AnalyticSphere {
        let k = m.constant_curvature().expect("analytic sphere has constant curvature");
        return Ok((m.dim() as f64 - 1.0) * k);
    }
    let pts = m.sample_points(plan.points, plan.seed);
    let mins: Vec<f64> =
        pts.par_iter().map(|pt| curvature_at(m, pt).map(|c| c.min_ricci_eigenvalue())).collect::<Result<_>>()?;
    Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
}

/// Frame components of the covariant derivative `φ_ijk` (last index =
/// derivative direction) together with the frame.
pub fn covariant_derivative_frame(
    phi: &SymmetricTensorField,
    m: &ChartManifold,
    pt: &ManifoldPoint,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = m.dim();
    let g = m.checked_metric(pt)?;
    let e = orthonormal_frame(&g, n, &pt.coords)?;
    let p1 = phi.jets(m, pt, 1)?;
    let g1 = m.metric_jets(pt, 1)?;
    let gamma = tensor::christoffel(&g1, n);
    let cd = tensor::covariant_derivative(&p1, 2, n, &gamma);
    Ok((to_frame(&values(&cd), 3, n, &e), e))
}

/// `(div φ)_i = Σ_j φ_ijj` in the Gram–Schmidt frame.
pub fn tensor_divergence(phi: &SymmetricTensorField, m: &ChartManifold, pt: &ManifoldPoint) -> Result<Vec<f64>> {
    let n = m.dim();
    let (cd, _) = covariant_derivative_frame(phi, m, pt)?;
    Ok((0..n).map(|i| (0..n).map(|j| cd[(i * n + j) * n + j]).sum()).collect())
}

/// `max_{i,j,k} |φ_ijk − φ_ikj|`.
pub fn codazzi_defect(phi: &SymmetricTensorField, m: &ChartManifold, pt: &ManifoldPoint) -> Result<f64> {
    let n = m.dim();
    let (cd, _) = covariant_derivative_frame(phi, m, pt)?;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((cd[(i * n + j) * n + k] - cd[(i * n + k) * n + j]).abs());
            }
        }
    }
    Ok(worst)
}

/// Frame components of the gradient of a scalar jet (order ≥ 1).
pub fn frame_gradient(s: &Jet, e: &[f64], n: usize) -> Vec<f64> {
    let d = s.gradient();
    (0..n).map(|a| (0..n).map(|i| d[i] * e[i * n + a]).sum()).collect()
}

/// Trace `g^{ij} φ_ij` of a tensor field as a jet of the given order.
pub fn trace_jet(phi: &SymmetricTensorField, m: &ChartManifold, pt: &ManifoldPoint, order: usize) -> Result<Jet> {
    let n = m.dim();
    let p = phi.jets(m, pt, order)?;
    let g = m.metric_jets(pt, order)?;
    Ok(tensor::trace(&p, &tensor::inverse(&g, n), n))
}

/// Maximum pointwise defects of the divergence identities.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub manifold: String,
    pub points: usize,
    pub scalar_curvature_spread: f64,
    /// `div(ric − c g)`; only meaningful when the scalar curvature is constant.
    pub shifted_ricci: Option<f64>,
    /// `div(½ R g − ric)`.
    pub einstein: f64,
    /// `div S − ∇(tr S)`, for `n ≥ 3`.
    pub schouten_trace: Option<f64>,
    /// `div(ric) − ½ ∇R`.
    pub contracted_bianchi: f64,
    pub flags: Vec<String>,
}

impl DivergenceReport {
    /// Largest defect among the identities that were evaluated.
    pub fn max_defect(&self) -> f64 {
        [Some(self.einstein), self.shifted_ricci, self.schouten_trace, Some(self.contracted_bianchi)]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max)
    }
}

/// Check the divergence identities of the Ricci-derived tensors at `points`;
/// `shift` is the constant `c` in `ric − c g`.
pub fn divergence_identity_suite(m: &ChartManifold, points: &[ManifoldPoint], shift: f64) -> Result<DivergenceReport> {
    let n = m.dim();
    let ricci = SymmetricTensorField::ricci();
    let shifted = SymmetricTensorField::new(TensorKind::RicciShift(shift));
    let einstein = SymmetricTensorField::einstein();
    let schouten = SymmetricTensorField::schouten();
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));

    struct PointResult {
        scalar: f64,
        shifted: f64,
        einstein: f64,
        schouten: Option<f64>,
        bianchi: f64,
    }
    let per: Vec<PointResult> = points
        .par_iter()
        .map(|pt| -> Result<PointResult> {
            let g = m.checked_metric(pt)?;
            let e = orthonormal_frame(&g, n, &pt.coords)?;
            let div_ric = tensor_divergence(&ricci, m, pt)?;
            let r1 = trace_jet(&ricci, m, pt, 1)?;
            let half_grad: Vec<f64> = frame_gradient(&r1, &e, n).into_iter().map(|x| 0.5 * x).collect();
            let bianchi: Vec<f64> = div_ric.iter().zip(&half_grad).map(|(a, b)| a - b).collect();
            let ein = tensor_divergence(&einstein, m, pt)?;
            let sh = tensor_divergence(&shifted, m, pt)?;
            let schouten_defect = if n >= 3 {
                let div_s = tensor_divergence(&schouten, m, pt)?;
                let trs = trace_jet(&schouten, m, pt, 1)?;
                let grad = frame_gradient(&trs, &e, n);
                let d: Vec<f64> = div_s.iter().zip(&grad).map(|(a, b)| a - b).collect();
                Some(max_abs(&d))
            } else {
                None
            };
            Ok(PointResult {
                scalar: r1.value(),
                shifted: max_abs(&sh),
                einstein: max_abs(&ein),
                schouten: schouten_defect,
                bianchi: max_abs(&bianchi),
            })
        })
        .collect::<Result<_>>()?;

    let (rmin, rmax) = per.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.scalar), b.max(p.scalar)));
    let spread = if per.is_empty() { 0.0 } else { rmax - rmin };
    let constant_r = spread <= 1e-8 * (1.0 + rmax.abs());
    let mut flags = Vec::new();
    let shifted_ricci = if constant_r {
        Some(per.iter().map(|p| p.shifted).fold(0.0, f64::max))
    } else {
        flags.push("R_not_constant".to_string());
        None
    };
    if n < 3 {
        flags.push("schouten_undefined".to_string());
    }
    let schouten_trace = if n >= 3 { Some(per.iter().filter_map(|p| p.schouten).fold(0.0, f64::max)) } else { None };
    Ok(DivergenceReport {
        manifold: m.label().to_string(),
        points: points.len(),
        scalar_curvature_spread: spread,
        shifted_ricci,
        einstein: per.iter().map(|p| p.einstein).fold(0.0, f64::max),
        schouten_trace,
        contracted_bianchi: per.iter().map(|p| p.bianchi).fold(0.0, f64::max),
        flags,
    })
}
