//! First nonzero eigenvalues: sparse shift-invert iteration for assembled
//! operators and closed forms on round spheres.

pub mod analytic;
pub mod solver;

pub use analytic::{analytic_sphere_spectrum, harmonic_multiplicity, SphereEigenvalue, SphereOperator};
pub use solver::{smallest_nonzero, EigenOptions, EigenResult, SolverDiagnostics};

use crate::discretize::{AssembledOperator, CholeskyFactor};
use crate::error::{Error, Result};

/// Discrete form of `∫⟨φ(∇f), ∇(Δf)⟩ = −μ∫|∇f|²`:
/// `|uᵀK_φ M⁻¹ K_g u − μ uᵀK_g u| / (μ uᵀK_g u)`, where `(μ, u)` comes from
/// the `φ` pencil and `laplacian` is the `φ = g` assembly on the same mesh
/// (sharing its mass matrix).
pub fn discrete_energy_identity_defect(op: &AssembledOperator, mu: f64, u: &[f64], laplacian: &AssembledOperator) -> Result<f64> {
    if op.dim() != laplacian.dim() || op.mass != laplacian.mass {
        return Err(Error::InvalidInput("both assemblies must share the same mesh and mass matrix".into()));
    }
    let kgu = laplacian.stiffness.mul_vec(u);
    let w = CholeskyFactor::new(&op.mass)?.solve(&kgu);
    let kpu = op.stiffness.mul_vec(u);
    let lhs: f64 = kpu.iter().zip(&w).map(|(a, b)| a * b).sum();
    let energy: f64 = u.iter().zip(&kgu).map(|(a, b)| a * b).sum();
    Ok((lhs - mu * energy).abs() / (mu * energy).abs())
}
