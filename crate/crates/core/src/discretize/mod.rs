//! Finite-element discretization of `□` on closed triangle meshes and
//! periodic grids.

pub mod assemble;
pub mod coefficient;
pub mod consistency;
pub mod grid;
pub mod mesh;
pub mod sparse;

pub use assemble::{assemble_grid, assemble_mesh, cotangent_stiffness, AssembledOperator, OperatorChecks, Provenance};
pub use coefficient::{ImplicitSurface, MeshCoefficient, Quadrature, SurfaceTensor};
pub use consistency::{grid_consistency, mesh_consistency, nodal_error, ConsistencyLevel, ConsistencyReport};
pub use grid::{GridStats, PeriodicGrid};
pub use mesh::{MeshStats, SurfaceMesh};
pub use sparse::{CholeskyFactor, CsrMatrix};
