//! Intrinsic Riemannian geometry on chart-based manifolds.

pub mod curvature;
pub mod derivatives;
pub mod fields;
pub mod manifold;
pub mod tensor;

pub use curvature::{
    codazzi_defect, curvature_at, divergence_identity_suite, min_ricci, min_sectional, tensor_divergence,
    CurvatureBundle, DivergenceReport, SamplePlan,
};
pub use derivatives::DerivativeMode;
pub use fields::{parse_tensor, FnTensorSource, RandomSpdSource, ScalarField, SymmetricTensorField, TensorKind, TensorSource};
pub use manifold::{sphere_point_from_unit, stereographic_unit, chart_sign, AtlasKind, Chart, ChartManifold, JetMap, ManifoldPoint, TorusPerturbation};
