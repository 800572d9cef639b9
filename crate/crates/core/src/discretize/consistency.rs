//! Refinement study comparing the discrete operator `M⁻¹K` on nodal samples
//! with the pointwise operator `−□f`.
//!
//! For divergence-free `φ`, `∫ (□f) v = −∫ ⟨φ∇f, ∇v⟩`, so `M⁻¹K f → −□f`.
//! When `φ` is not divergence-free the weak form instead approximates
//! `−div(φ∇f) = −□f − ⟨div φ, ∇f⟩`, and the comparison stalls at an O(1)
//! discrepancy.
//!
//! Three error measures are reported per level: the max nodal error, the
//! mass-weighted RMS nodal error, and a weak error
//! `max_v |vᵀ(K f − M t)| / ‖v‖_M` over a fixed set of smooth test
//! functions `v`. On unstructured meshes (e.g. icospheres) the nodal errors
//! need not converge near irregular vertices and seams; the weak error does.

use rayon::prelude::*;
use serde::Serialize;

use super::assemble::{assemble_grid, assemble_mesh, AssembledOperator};
use super::coefficient::{MeshCoefficient, Quadrature};
use super::grid::PeriodicGrid;
use super::mesh::{SurfaceMesh, Vec3};
use super::sparse::CholeskyFactor;
use crate::boxop::BoxOperator;
use crate::error::Result;
use crate::geometry::{ChartManifold, ScalarField, SymmetricTensorField};

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConsistencyLevel {
    pub h: f64,
    pub nodes: usize,
    pub max_error: f64,
    pub rms_error: f64,
    pub weak_error: f64,
    /// Max of `|□f|` over nodes, for scale.
    pub max_target: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConsistencyReport {
    pub levels: Vec<ConsistencyLevel>,
    /// `log(e_k/e_{k+1}) / log(h_k/h_{k+1})` of the max nodal error.
    pub orders: Vec<f64>,
    pub rms_orders: Vec<f64>,
    pub weak_orders: Vec<f64>,
}

fn orders(levels: &[ConsistencyLevel], e: impl Fn(&ConsistencyLevel) -> f64) -> Vec<f64> {
    levels.windows(2).map(|w| (e(&w[0]) / e(&w[1])).ln() / (w[0].h / w[1].h).ln()).collect()
}

impl ConsistencyReport {
    fn from_levels(levels: Vec<ConsistencyLevel>) -> Self {
        ConsistencyReport {
            orders: orders(&levels, |l| l.max_error),
            rms_orders: orders(&levels, |l| l.rms_error),
            weak_orders: orders(&levels, |l| l.weak_error),
            levels,
        }
    }

    /// Max-norm order between the two finest levels.
    pub fn observed_order(&self) -> Option<f64> {
        self.orders.last().copied()
    }

    pub fn observed_weak_order(&self) -> Option<f64> {
        self.weak_orders.last().copied()
    }

    pub fn finest_error(&self) -> Option<f64> {
        self.levels.last().map(|l| l.max_error)
    }
}

/// `max |M⁻¹K f − target|` over nodes.
pub fn nodal_error(op: &AssembledOperator, f: &[f64], target: &[f64]) -> Result<f64> {
    let kf = op.stiffness.mul_vec(f);
    let u = CholeskyFactor::new(&op.mass)?.solve(&kf);
    Ok(u.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn level(op: &AssembledOperator, f: &[f64], t: &[f64], tests: &[Vec<f64>]) -> Result<ConsistencyLevel> {
    let kf = op.stiffness.mul_vec(f);
    let u = CholeskyFactor::new(&op.mass)?.solve(&kf);
    let e: Vec<f64> = u.iter().zip(t).map(|(a, b)| a - b).collect();
    let lumped = op.mass.row_sums();
    let total: f64 = lumped.iter().sum();
    let rms = (e.iter().zip(&lumped).map(|(x, w)| x * x * w).sum::<f64>() / total).sqrt();
    let mt = op.mass.mul_vec(t);
    let weak = tests
        .iter()
        .map(|v| {
            let num: f64 = v.iter().zip(kf.iter().zip(&mt)).map(|(a, (b, c))| a * (b - c)).sum();
            num.abs() / op.mass.quadratic_form(v).sqrt()
        })
        .fold(0.0, f64::max);
    Ok(ConsistencyLevel {
        h: op.provenance.h,
        nodes: op.dim(),
        max_error: e.iter().fold(0.0, |m, x| m.max(x.abs())),
        rms_error: rms,
        weak_error: weak,
        max_target: t.iter().fold(0.0, |m, v| m.max(v.abs())),
    })
}

fn mesh_tests(x: Vec3) -> [f64; 3] {
    [
        (0.7 * x[0] + 0.4 * x[1] - 0.5 * x[2]).exp(),
        (2.0 * x[0] - x[1] + 1.3 * x[2]).cos(),
        x[0] * x[2].exp() + x[1] * x[1],
    ]
}

/// Smooth periodic test functions of the angles `θ_i = 2π x_i / L_i`.
fn grid_tests(theta: &[f64]) -> [f64; 3] {
    let l = theta.len() - 1;
    [
        (theta[0].sin() + 0.5 * theta[l].cos()).exp(),
        (theta[0] + 2.0 * theta[l]).cos() + 0.3 * theta[1 % theta.len()].sin(),
        theta.iter().enumerate().map(|(i, t)| ((i + 1) as f64 * t + 0.2).sin()).product::<f64>() + (2.0 * theta[0]).cos(),
    ]
}

fn transpose3(rows: Vec<[f64; 3]>) -> Vec<Vec<f64>> {
    (0..3).map(|k| rows.iter().map(|r| r[k]).collect()).collect()
}

/// Mesh study. `sample(x)` returns `(f(x), −□f(x))` at a vertex position.
pub fn mesh_consistency(
    levels: &[SurfaceMesh],
    coef: &MeshCoefficient,
    rule: Quadrature,
    sample: &(dyn Fn(Vec3) -> Result<(f64, f64)> + Sync),
) -> Result<ConsistencyReport> {
    let mut out = Vec::with_capacity(levels.len());
    for mesh in levels {
        let op = assemble_mesh(mesh, coef, rule)?;
        let vals: Vec<(f64, f64)> = mesh.vertices().par_iter().map(|&x| sample(x)).collect::<Result<_>>()?;
        let f: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let t: Vec<f64> = vals.iter().map(|v| v.1).collect();
        let tests = transpose3(mesh.vertices().iter().map(|&x| mesh_tests(x)).collect());
        out.push(level(&op, &f, &t, &tests)?);
    }
    Ok(ConsistencyReport::from_levels(out))
}

/// Grid study on a periodic-box manifold; the pointwise target `−□f` comes
/// from the jet-based [`BoxOperator::apply`].
pub fn grid_consistency(
    manifold: &ChartManifold,
    resolutions: &[usize],
    phi: &SymmetricTensorField,
    f: &ScalarField,
    rule: Quadrature,
) -> Result<ConsistencyReport> {
    let boxop = BoxOperator::custom(manifold, phi.clone());
    let mut out = Vec::with_capacity(resolutions.len());
    for &r in resolutions {
        let grid = PeriodicGrid::uniform(manifold, r)?;
        let op = assemble_grid(&grid, phi, rule)?;
        let vals: Vec<(f64, f64)> = (0..grid.node_count())
            .into_par_iter()
            .map(|k| {
                let pt = grid.node_point(k);
                Ok((f.value(manifold, &pt), -boxop.apply(f, &pt)?))
            })
            .collect::<Result<_>>()?;
        let fv: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let t: Vec<f64> = vals.iter().map(|v| v.1).collect();
        let tau = std::f64::consts::TAU;
        let tests = transpose3(
            (0..grid.node_count())
                .map(|k| {
                    let th: Vec<f64> = grid.node_coords(k).iter().zip(grid.lengths()).map(|(x, l)| tau * x / l).collect();
                    grid_tests(&th)
                })
                .collect(),
        );
        out.push(level(&op, &fv, &t, &tests)?);
    }
    Ok(ConsistencyReport::from_levels(out))
}
