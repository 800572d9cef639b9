//! Property trials, refinement pipelines and config-driven verification suites.

pub mod pipeline;
pub mod suites;
pub mod trials;

pub use pipeline::{compare_surface, l1_mesh_problem, l1_refinement, CompareRow, LevelResult, RefinementStudy, SurfaceComparison};
pub use suites::{
    bochner_case, fd_order, newton_divergence_defect, run_one, run_suite, run_suite_file, Assertion, BochnerCase, RunConfig,
    SuiteName, SuiteOutcome, SuiteSummary,
};
pub use trials::{
    distance_to_scalar, newton_defect, newton_inequality_trials, q_min_diagonal, qa_bound_trials, KappaSign, NewtonTrialReport,
    QaBranchReport, QaTrialReport, TrialConfig,
};
