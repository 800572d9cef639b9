//! Mesh refinement studies for `μ₁(L₁)` on surfaces.

use std::time::Instant;

use serde::Serialize;

use crate::bounds::{compare, richardson, BoundInput, MuSource, NewtonBoundInput, RefinementEstimate, Verdict};
use crate::discretize::{assemble_mesh, MeshCoefficient, Quadrature, SurfaceMesh};
use crate::error::{Error, Result};
use crate::geometry::SamplePlan;
use crate::hypersurface::{ImmersedHypersurface, SurfaceKind};
use crate::spectral::{smallest_nonzero, EigenOptions};

/// Icosphere-based mesh and `P₁` coefficient for a closed surface.
///
/// Geodesic spheres in curved space forms are meshed intrinsically: the
/// induced metric is round with curvature `α² + κ` and `P₁ = α g`.
pub fn l1_mesh_problem(hs: &ImmersedHypersurface, subdiv: usize) -> Result<(SurfaceMesh, MeshCoefficient)> {
    if hs.dim() != 2 {
        return Err(Error::InvalidInput(format!("meshes are two-dimensional; '{}' has dimension {}", hs.label(), hs.dim())));
    }
    match hs.kind() {
        SurfaceKind::Sphere { r } => Ok((SurfaceMesh::icosphere(subdiv, *r), MeshCoefficient::newton_p1_of(hs)?)),
        SurfaceKind::Ellipsoid { axes } => {
            let mesh = SurfaceMesh::icosphere(subdiv, 1.0).scaled_axes([axes[0], axes[1], axes[2]])?;
            Ok((mesh, MeshCoefficient::newton_p1_of(hs)?))
        }
        SurfaceKind::GeodesicSphere { kappa, alpha } => {
            let curvature = alpha * alpha + kappa;
            if !(curvature > 0.0) {
                return Err(Error::InvalidInput(format!("geodesic sphere curvature {curvature} is not positive")));
            }
            let mesh = SurfaceMesh::icosphere(subdiv, 1.0 / curvature.sqrt());
            Ok((mesh, MeshCoefficient::Metric.scaled(*alpha)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelResult {
    pub subdiv: usize,
    /// Mean edge length.
    pub h: f64,
    pub nodes: usize,
    pub mu1: f64,
    pub residual: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub surface: String,
    pub quadrature: Quadrature,
    pub levels: Vec<LevelResult>,
    pub estimate: RefinementEstimate,
}

impl RefinementStudy {
    pub fn finest(&self) -> &LevelResult {
        self.levels.last().expect("at least two levels")
    }

    /// Finest `μ₁` with its Richardson error estimate.
    pub fn mu_source(&self) -> MuSource {
        MuSource::Computed { value: self.finest().mu1, error_estimate: self.estimate.error_estimate }
    }

    /// Observed order of `|μ₁ − exact|` over the last two levels.
    pub fn order_against(&self, exact: f64) -> Option<f64> {
        let k = self.levels.len();
        if k < 2 {
            return None;
        }
        let (c, f) = (&self.levels[k - 2], &self.levels[k - 1]);
        Some(((c.mu1 - exact).abs() / (f.mu1 - exact).abs()).ln() / (c.h / f.h).ln())
    }
}

/// `μ₁(L₁)` on successive icosphere subdivisions of `hs`.
pub fn l1_refinement(
    hs: &ImmersedHypersurface,
    subdivs: &[usize],
    opts: &EigenOptions,
    rule: Quadrature,
) -> Result<RefinementStudy> {
    if subdivs.len() < 2 {
        return Err(Error::InvalidInput("a refinement study needs at least two levels".into()));
    }
    let mut levels = Vec::with_capacity(subdivs.len());
    for &s in subdivs {
        let t = Instant::now();
        let (mesh, coef) = l1_mesh_problem(hs, s)?;
        let op = assemble_mesh(&mesh, &coef, rule)?;
        let r = smallest_nonzero(&op, opts)?;
        levels.push(LevelResult {
            subdiv: s,
            h: mesh.stats().mean_edge_length,
            nodes: op.dim(),
            mu1: r.mu1(),
            residual: r.residuals[0],
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let mu: Vec<f64> = levels.iter().map(|l| l.mu1).collect();
    let estimate = richardson(&h, &mu, 2.0)?;
    Ok(RefinementStudy { surface: hs.label().to_string(), quadrature: rule, levels, estimate })
}

/// One row of a bound-versus-refinement table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub subdiv: usize,
    pub h: f64,
    pub mu1: f64,
    pub bound: f64,
    pub margin: f64,
    /// `|μ₁ − μ_extrapolated|` for this level.
    pub error_estimate: f64,
    pub verdict: Verdict,
}

/// Full bound comparison of `μ₁(L₁)` on a surface: sampled `(α, a, σ)`,
/// refinement study, and a verdict for every level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceComparison {
    pub bound_input: NewtonBoundInput,
    pub study: RefinementStudy,
    pub rows: Vec<CompareRow>,
    pub report: crate::bounds::BoundReport,
}

pub fn compare_surface(
    hs: &ImmersedHypersurface,
    subdivs: &[usize],
    opts: &EigenOptions,
    rule: Quadrature,
    plan: &SamplePlan,
) -> Result<SurfaceComparison> {
    let input = NewtonBoundInput::from_hypersurface(hs, plan)?;
    let bi = BoundInput::NewtonL1(input.clone());
    let study = l1_refinement(hs, subdivs, opts, rule)?;
    let limit = study.estimate.extrapolated;
    let rows = study
        .levels
        .iter()
        .map(|l| {
            let err = (l.mu1 - limit).abs();
            let r = compare(&bi, MuSource::Computed { value: l.mu1, error_estimate: err })?;
            Ok(CompareRow {
                subdiv: l.subdiv,
                h: l.h,
                mu1: l.mu1,
                bound: r.bound_value,
                margin: r.margin,
                error_estimate: err,
                verdict: r.verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = compare(&bi, study.mu_source())?;
    Ok(SurfaceComparison { bound_input: input, study, rows, report })
}

impl SurfaceComparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subdiv,h,mu1,bound,margin,error_estimate,verdict\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.10e},{:.12},{:.12},{:.12},{:.3e},{}\n",
                r.subdiv, r.h, r.mu1, r.bound, r.margin, r.error_estimate, r.verdict
            ));
        }
        out
    }
}
