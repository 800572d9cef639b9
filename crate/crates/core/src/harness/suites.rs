//! Named verification suites driven by a TOML config.
//!
//! ```toml
//! [manifold]
//! manifolds = ["torus2", "sphere:n=4,K=1"]
//! tensors = ["metric", "schouten", "custom:random"]
//! surface = "ellipsoid:1,1,1.1"
//! points = 200
//!
//! [solver]
//! tol = 1e-9
//! levels = [3, 4, 5]
//!
//! [suites]
//! run = ["bochner", "newton", "sphere-equality"]
//! trials = 100000
//! ```

use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::pipeline::{compare_surface, l1_refinement};
use super::trials::{newton_inequality_trials, q_min_diagonal, qa_bound_trials, TrialConfig};
use crate::boxop::BoxOperator;
use crate::bounds::{
    compare, newton_bound, schouten_bound, BoundInput, MuSource, NewtonBoundInput, SchoutenBoundInput, Verdict,
};
use crate::discretize::Quadrature;
use crate::error::{Error, Result};
use crate::geometry::{
    divergence_identity_suite, parse_tensor, tensor_divergence, ChartManifold, DerivativeMode, SamplePlan, ScalarField,
};
use crate::hypersurface::{q_lower_bound, ImmersedHypersurface};
use crate::spectral::{analytic_sphere_spectrum, EigenOptions, SphereOperator};

/// Bochner residual ceiling (absolute).
pub const BOCHNER_TOL: f64 = 1e-8;
/// Ceiling on the spread of per-point residuals across `c`.
pub const BOCHNER_SPREAD_TOL: f64 = 1e-10;
/// Ceiling on analytic divergence defects.
pub const DIVERGENCE_TOL: f64 = 1e-8;
/// Finite-difference defects below this are treated as rounding noise.
pub const FD_NOISE_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldSection {
    /// Manifold descriptors for the bochner and divergence suites; empty
    /// selects the built-in list.
    pub manifolds: Vec<String>,
    /// Tensor descriptors for the bochner suite; empty selects
    /// `metric`, `schouten` and `custom:random`.
    pub tensors: Vec<String>,
    /// Surfaces for the divergence-free `P₁` check; empty selects the built-in list.
    pub hypersurfaces: Vec<String>,
    /// Surface for ellipsoid-compare.
    pub surface: String,
    /// Test function for the bochner suite.
    pub field: String,
    pub points: usize,
}

impl Default for ManifoldSection {
    fn default() -> Self {
        ManifoldSection {
            manifolds: vec![],
            tensors: vec![],
            hypersurfaces: vec![],
            surface: "ellipsoid:1,1,1.1".into(),
            field: "generic".into(),
            points: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub seed: u64,
    pub quadrature: Quadrature,
    /// Icosphere subdivisions for refinement studies.
    pub levels: Vec<usize>,
    /// Two finite-difference steps for the order check.
    pub fd_steps: Vec<f64>,
    /// Points sampled for `(α, a, σ)`.
    pub pinching_points: usize,
    pub max_restarts: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tol: 1e-9,
            seed: 42,
            quadrature: Quadrature::Barycentric,
            levels: vec![3, 4, 5],
            fd_steps: vec![1e-2, 5e-3],
            pinching_points: 400,
            max_restarts: 40,
        }
    }
}

impl SolverSection {
    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions { k: 1, tol: self.tol, seed: self.seed, max_restarts: self.max_restarts, max_basis: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuitesSection {
    pub run: Vec<String>,
    pub trials: usize,
    pub dim_min: usize,
    pub dim_max: usize,
    pub seed: u64,
}

impl Default for SuitesSection {
    fn default() -> Self {
        SuitesSection { run: vec![], trials: 100_000, dim_min: 2, dim_max: 8, seed: 42 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: ManifoldSection,
    pub solver: SolverSection,
    pub suites: SuitesSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        for name in &cfg.suites.run {
            SuiteName::from_str(name)?;
        }
        if cfg.solver.fd_steps.len() != 2 || cfg.solver.fd_steps.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::ConfigParse("solver.fd_steps needs two positive steps".into()));
        }
        if cfg.suites.dim_min < 1 || cfg.suites.dim_min > cfg.suites.dim_max {
            return Err(Error::ConfigParse("suites.dim_min must be in 1..=dim_max".into()));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Override every seed in the config.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.solver.seed = seed;
        self.suites.seed = seed;
        self
    }

    pub fn trial_config(&self) -> TrialConfig {
        TrialConfig {
            trials: self.suites.trials,
            dim_min: self.suites.dim_min,
            dim_max: self.suites.dim_max,
            seed: self.suites.seed,
            ..TrialConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Bochner,
    Divergence,
    Newton,
    Qa,
    SphereEquality,
    EllipsoidCompare,
}

impl SuiteName {
    pub const ALL: [SuiteName; 6] = [
        SuiteName::Bochner,
        SuiteName::Divergence,
        SuiteName::Newton,
        SuiteName::Qa,
        SuiteName::SphereEquality,
        SuiteName::EllipsoidCompare,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Bochner => "bochner",
            SuiteName::Divergence => "divergence",
            SuiteName::Newton => "newton",
            SuiteName::Qa => "qa",
            SuiteName::SphereEquality => "sphere-equality",
            SuiteName::EllipsoidCompare => "ellipsoid-compare",
        }
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::ConfigParse(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub suite: SuiteName,
    pub passed: bool,
    pub seconds: f64,
    pub assertions: Vec<Assertion>,
    /// Error that aborted the suite, with its variant name.
    pub error: Option<String>,
    pub error_kind: Option<String>,
    #[serde(skip)]
    pub error_exit_code: Option<i32>,
    pub data: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub passed: bool,
    pub suites: Vec<SuiteOutcome>,
}

impl SuiteSummary {
    /// `suite: assertion` for each failing assertion or aborting error.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.suites {
            if let (Some(kind), Some(msg)) = (&s.error_kind, &s.error) {
                out.push(format!("{}: {kind}: {msg}", s.suite.as_str()));
            }
            for a in s.assertions.iter().filter(|a| !a.passed) {
                out.push(format!("{}: {} ({})", s.suite.as_str(), a.name, a.detail));
            }
        }
        out
    }

    /// 0 when everything passed, 3 if a suite hit a numerical failure, 2 for
    /// bad input, otherwise 1.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            return 0;
        }
        let codes: Vec<i32> = self.suites.iter().filter_map(|s| s.error_exit_code).collect();
        if codes.contains(&3) {
            3
        } else if codes.contains(&2) {
            2
        } else {
            1
        }
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::SuiteFailure { failures: self.failures() })
        }
    }
}

/// Collects assertions for one suite.
#[derive(Default)]
struct Checks {
    items: Vec<Assertion>,
}

impl Checks {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.items.push(Assertion { name: name.into(), passed, detail: detail.into() });
    }
}

/// Run every suite listed in `cfg.suites.run`, in order.
pub fn run_suite(cfg: &RunConfig) -> Result<SuiteSummary> {
    let names: Vec<SuiteName> = cfg.suites.run.iter().map(|s| SuiteName::from_str(s)).collect::<Result<_>>()?;
    let suites: Vec<SuiteOutcome> = names.into_iter().map(|n| run_one(n, cfg)).collect();
    Ok(SuiteSummary { passed: suites.iter().all(|s| s.passed), suites })
}

/// Load a config file and run it.
pub fn run_suite_file(path: &Path) -> Result<SuiteSummary> {
    run_suite(&RunConfig::from_file(path)?)
}

pub fn run_one(name: SuiteName, cfg: &RunConfig) -> SuiteOutcome {
    let t = Instant::now();
    let mut checks = Checks::default();
    let result = match name {
        SuiteName::Bochner => bochner_suite(cfg, &mut checks),
        SuiteName::Divergence => divergence_suite(cfg, &mut checks),
        SuiteName::Newton => newton_suite(cfg, &mut checks),
        SuiteName::Qa => qa_suite(cfg, &mut checks),
        SuiteName::SphereEquality => sphere_equality_suite(cfg, &mut checks),
        SuiteName::EllipsoidCompare => ellipsoid_compare_suite(cfg, &mut checks),
    };
    let (data, error) = match result {
        Ok(d) => (d, None),
        Err(e) => (serde_json::Value::Null, Some(e)),
    };
    let passed = error.is_none() && checks.items.iter().all(|a| a.passed);
    SuiteOutcome {
        suite: name,
        passed,
        seconds: t.elapsed().as_secs_f64(),
        assertions: checks.items,
        error_kind: error.as_ref().map(|e| e.kind().to_string()),
        error_exit_code: error.as_ref().map(Error::exit_code),
        error: error.map(|e| e.to_string()),
        data,
    }
}

fn or_default(list: &[String], default: &[&str]) -> Vec<String> {
    if list.is_empty() { default.iter().map(|s| s.to_string()).collect() } else { list.to_vec() }
}

/// Per-case maxima of the Bochner residual sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BochnerCase {
    pub manifold: String,
    pub tensor: String,
    /// Set when the requested tensor does not exist in this dimension and
    /// another one took its place.
    pub substituted_for: Option<String>,
    pub points: usize,
    pub cs: Vec<f64>,
    pub max_residual: f64,
    pub max_spread: f64,
    /// Largest left-hand side, for scale.
    pub max_lhs: f64,
}

/// Residuals of the Bochner identity for one `(manifold, φ)` over sample
/// points and several `c`. A non-symmetric `φ` is rejected with
/// `NonSymmetricCoefficient` naming the offending sample.
pub fn bochner_case(m: &ChartManifold, tensor: &str, field: &ScalarField, points: usize, seed: u64, cs: &[f64]) -> Result<BochnerCase> {
    let n = m.dim();
    let (desc, substituted_for) =
        if n < 3 && tensor == "schouten" { ("ricci", Some(tensor.to_string())) } else { (tensor, None) };
    let phi = parse_tensor(desc, n)?;
    let op = BoxOperator::custom(m, phi.clone());
    let pts = m.sample_points(points, seed);
    let per: Vec<(f64, f64, f64)> = pts
        .par_iter()
        .enumerate()
        .map(|(idx, pt)| -> Result<(f64, f64, f64)> {
            let asym = phi.asymmetry(m, pt)?;
            if asym > 1e-12 {
                return Err(Error::NonSymmetricCoefficient { element: idx, asymmetry: asym });
            }
            let res = op.bochner_residual(field, pt, cs)?;
            let worst = res.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
            let lo = res.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
            let hi = res.iter().map(|r| r.residual).fold(f64::NEG_INFINITY, f64::max);
            let lhs = res.iter().map(|r| r.lhs.abs()).fold(0.0, f64::max);
            Ok((worst, hi - lo, lhs))
        })
        .collect::<Result<_>>()?;
    Ok(BochnerCase {
        manifold: m.label().to_string(),
        tensor: desc.to_string(),
        substituted_for,
        points,
        cs: cs.to_vec(),
        max_residual: per.iter().map(|p| p.0).fold(0.0, f64::max),
        max_spread: per.iter().map(|p| p.1).fold(0.0, f64::max),
        max_lhs: per.iter().map(|p| p.2).fold(0.0, f64::max),
    })
}

pub const BOCHNER_MANIFOLDS: [&str; 4] =
    ["torus2", "torus2:perturb=sin,eps=0.2", "torus3:perturb=mix,eps=0.1", "sphere:n=4,K=1"];
pub const BOCHNER_TENSORS: [&str; 3] = ["metric", "schouten", "custom:random"];
pub const BOCHNER_CS: [f64; 3] = [0.0, 1.0, 7.3];

fn bochner_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<serde_json::Value> {
    let field = ScalarField::parse(&cfg.manifold.field)?;
    let mut cases = Vec::new();
    for desc in or_default(&cfg.manifold.manifolds, &BOCHNER_MANIFOLDS) {
        let m = ChartManifold::parse(&desc)?;
        for tensor in or_default(&cfg.manifold.tensors, &BOCHNER_TENSORS) {
            let c = bochner_case(&m, &tensor, &field, cfg.manifold.points, cfg.solver.seed, &BOCHNER_CS)?;
            checks.check(
                format!("residual on {desc} with {}", c.tensor),
                c.max_residual <= BOCHNER_TOL,
                format!("max {:.3e} (lhs scale {:.3e})", c.max_residual, c.max_lhs),
            );
            checks.check(
                format!("c-independence on {desc} with {}", c.tensor),
                c.max_spread <= BOCHNER_SPREAD_TOL,
                format!("spread {:.3e}", c.max_spread),
            );
            cases.push(c);
        }
    }
    Ok(json!({ "field": cfg.manifold.field, "cases": cases }))
}

/// Observed order `log(d₁/d₂)/log(h₁/h₂)`, or `None` when both defects are
/// below the rounding floor.
pub fn fd_order(h: [f64; 2], d: [f64; 2]) -> Option<f64> {
    if d[0] <= FD_NOISE_FLOOR && d[1] <= FD_NOISE_FLOOR {
        None
    } else {
        Some((d[0] / d[1]).ln() / (h[0] / h[1]).ln())
    }
}

pub const DIVERGENCE_MANIFOLDS: [&str; 4] =
    ["torus2:perturb=sin,eps=0.2", "torus3:perturb=mix,eps=0.1", "sphere:n=3,K=1", "sphere:n=4,K=1"];
pub const DIVERGENCE_SURFACES: [&str; 3] =
    ["ellipsoid:1,1,1.1", "ellipsoid:1,1.2,1.5,0.9", "geodesic-sphere:kappa=1,alpha=0.8,n=3"];

/// `max |div P₁|` over sample points of the induced metric.
pub fn newton_divergence_defect(hs: &ImmersedHypersurface, points: usize, seed: u64) -> Result<f64> {
    let p1 = hs.newton_p1();
    let m = hs.induced();
    let defects: Vec<f64> = m
        .sample_points(points, seed)
        .par_iter()
        .map(|pt| tensor_divergence(&p1, m, pt).map(|v| v.iter().fold(0.0f64, |a, x| a.max(x.abs()))))
        .collect::<Result<_>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

fn fd_check(checks: &mut Checks, label: &str, h: [f64; 2], d: [f64; 2], analytic: f64) -> serde_json::Value {
    let order = fd_order(h, d);
    let ok = match order {
        Some(p) => (1.7..=2.3).contains(&p),
        None => true,
    };
    checks.check(
        format!("finite-difference order on {label}"),
        ok,
        match order {
            Some(p) => format!("defects {:.3e} -> {:.3e}, order {p:.3}", d[0], d[1]),
            None => format!("defects {:.3e}, {:.3e} at rounding level", d[0], d[1]),
        },
    );
    json!({ "label": label, "analytic": analytic, "fd_steps": h, "fd_defects": d, "fd_order": order })
}

fn divergence_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<serde_json::Value> {
    let h = [cfg.solver.fd_steps[0], cfg.solver.fd_steps[1]];
    let points = cfg.manifold.points.min(50).max(1);
    let mut rows = Vec::new();
    for desc in or_default(&cfg.manifold.manifolds, &DIVERGENCE_MANIFOLDS) {
        let m = ChartManifold::parse(&desc)?;
        let pts = m.sample_points(points, cfg.solver.seed);
        let an = divergence_identity_suite(&m, &pts, 0.0)?;
        checks.check(format!("divergence identities on {desc}"), an.max_defect() <= DIVERGENCE_TOL, format!("{:.3e}", an.max_defect()));
        let mut d = [0.0; 2];
        for (k, step) in h.iter().enumerate() {
            d[k] = divergence_identity_suite(&m.with_mode(DerivativeMode::FiniteDifference(*step)), &pts, 0.0)?.max_defect();
        }
        let mut row = fd_check(checks, &desc, h, d, an.max_defect());
        row["flags"] = json!(an.flags);
        rows.push(row);
    }
    for desc in or_default(&cfg.manifold.hypersurfaces, &DIVERGENCE_SURFACES) {
        let hs = ImmersedHypersurface::parse(&desc)?;
        let an = newton_divergence_defect(&hs, points, cfg.solver.seed)?;
        checks.check(format!("div P1 = 0 on {desc}"), an <= DIVERGENCE_TOL, format!("{an:.3e}"));
        let mut d = [0.0; 2];
        for (k, step) in h.iter().enumerate() {
            let fd = ImmersedHypersurface::parse(&format!("{desc},fd={step}"))?;
            d[k] = newton_divergence_defect(&fd, points, cfg.solver.seed)?;
        }
        rows.push(fd_check(checks, &format!("div P1 on {desc}"), h, d, an));
    }
    Ok(json!({ "points": points, "rows": rows }))
}

fn newton_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<serde_json::Value> {
    use super::trials::newton_defect;
    let hand = newton_defect(&[1.0, 0.0, 0.0, 2.0], &[1.0, 0.0, 0.0, 1.0], 2);
    checks.check("diag(1,2) with B = I gives 1/2", (hand - 0.5).abs() < 1e-15, format!("{hand}"));
    let r = newton_inequality_trials(&cfg.trial_config());
    checks.check("no violations", r.violations == 0, format!("{} of {} (worst {:.3e})", r.violations, r.trials, r.worst_defect));
    checks.check("no false equality", r.false_positives == 0, format!("{} of {} hits", r.false_positives, r.equality_hits));
    checks.check("scalar A detected", r.missed_equalities == 0, format!("{} missed of {}", r.missed_equalities, r.scalar_trials));
    Ok(serde_json::to_value(r).expect("serializable"))
}

fn qa_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<serde_json::Value> {
    let q = q_min_diagonal(&[1.0, 1.1, 1.2], 1.0);
    let b = q_lower_bound(3, 1.0, 1.0, 1.2);
    checks.check("h = (1, 1.1, 1.2), kappa = 1 example", (b - 14.24).abs() < 1e-12 && q >= b, format!("min Q_ii {q:.6} vs {b:.6}"));
    let tc = cfg.trial_config();
    let clean = qa_bound_trials(&tc);
    for br in &clean.branches {
        checks.check(
            format!("no violations for kappa {:?}", br.kappa_sign),
            br.violations == 0,
            format!("{} of {} (worst margin {:.3e})", br.violations, br.trials, br.worst_margin),
        );
        checks.check(
            format!("scalar A attains the bound for kappa {:?}", br.kappa_sign),
            br.equality_mismatches == 0,
            format!("{} of {}", br.equality_mismatches, br.equality_trials),
        );
    }
    let planted = qa_bound_trials(&TrialConfig { widen: true, trials: tc.trials.min(10_000), ..tc });
    checks.check("planted violation detected", planted.violations() > 0, format!("{} violations", planted.violations()));
    Ok(json!({ "clean": clean, "planted": planted }))
}

fn equality_check(checks: &mut Checks, label: String, input: BoundInput, mu: MuSource) -> Result<serde_json::Value> {
    let r = compare(&input, mu)?;
    checks.check(label, r.verdict == Verdict::EqualityCase, format!("bound {} vs mu1 {} ({})", r.bound_value, r.computed_mu1, r.verdict));
    Ok(serde_json::to_value(r).expect("serializable"))
}

fn sphere_equality_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<serde_json::Value> {
    let mut reports = Vec::new();
    for n in 4..=6 {
        let nf = n as f64;
        let mu = analytic_sphere_spectrum(n, 1.0, SphereOperator::Schouten, 1)?[0].value;
        let input = SchoutenBoundInput::new(n, nf * (nf - 1.0), 1.0, nf - 1.0);
        let rel = (schouten_bound(&input)? - mu).abs() / mu;
        checks.check(format!("S^{n} Schouten bound matches to 1e-12"), rel <= 1e-12, format!("relative gap {rel:.2e}"));
        reports.push(equality_check(checks, format!("S^{n} Schouten"), BoundInput::Schouten(input), MuSource::Analytic { value: mu })?);
    }
    let sampled = SchoutenBoundInput::from_manifold(&ChartManifold::parse("sphere:n=4,K=1")?, &SamplePlan::new(20, 4, cfg.solver.seed))?;
    reports.push(equality_check(checks, "S^4 Schouten from sampled curvature".into(), BoundInput::Schouten(sampled), MuSource::Analytic { value: 4.0 })?);

    for (n, kappa, alpha) in [(2usize, 0.0, 1.0), (2, 0.0, 2.0), (3, 1.0, 1.0), (2, -1.0, 2.0)] {
        let mu = analytic_sphere_spectrum(n, 0.0, SphereOperator::NewtonL1 { alpha, kappa }, 1)?[0].value;
        let input = NewtonBoundInput::new(n, kappa, alpha, 1.0, 0.0);
        let want = n as f64 * (n as f64 - 1.0) * alpha * (alpha * alpha + kappa);
        let b = newton_bound(&input)?;
        checks.check(
            format!("Newton bound (n={n}, kappa={kappa}, alpha={alpha}) matches to 1e-12"),
            (b - want).abs() <= 1e-12 * want && (mu - want).abs() <= 1e-12 * want,
            format!("bound {b}, mu1 {mu}, expected {want}"),
        );
        reports.push(equality_check(checks, format!("L1 on geodesic sphere (n={n}, kappa={kappa}, alpha={alpha})"), BoundInput::NewtonL1(input), MuSource::Analytic { value: mu })?);
    }

    let opts = cfg.solver.eigen_options();
    let mut studies = Vec::new();
    for desc in ["sphere:r=1,n=2", "geodesic-sphere:kappa=-1,alpha=2,n=2"] {
        let hs = ImmersedHypersurface::parse(desc)?;
        let study = l1_refinement(&hs, &cfg.solver.levels, &opts, cfg.solver.quadrature)?;
        let input = NewtonBoundInput::new(2, hs.kappa(), match hs.kind() {
            crate::hypersurface::SurfaceKind::Sphere { r } => 1.0 / r,
            crate::hypersurface::SurfaceKind::GeodesicSphere { alpha, .. } => *alpha,
            _ => unreachable!("umbilic examples only"),
        }, 1.0, 0.0);
        reports.push(equality_check(checks, format!("discrete L1 on {desc}"), BoundInput::NewtonL1(input), study.mu_source())?);
        studies.push(study);
    }
    Ok(json!({ "reports": reports, "studies": studies }))
}

fn ellipsoid_compare_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<serde_json::Value> {
    let hs = ImmersedHypersurface::parse(&cfg.manifold.surface)?;
    let plan = SamplePlan::new(cfg.solver.pinching_points, 0, cfg.solver.seed);
    let cmp = compare_surface(&hs, &cfg.solver.levels, &cfg.solver.eigen_options(), cfg.solver.quadrature, &plan)?;
    let r = &cmp.report;
    let err = r.error_estimate.unwrap_or(0.0);
    checks.check("inequality holds", r.verdict == Verdict::InequalityHolds, format!("{}", r.verdict));
    checks.check(
        "margin exceeds three error estimates",
        r.margin > 3.0 * err,
        format!("margin {:.6} vs 3 x {:.3e}", r.margin, err),
    );
    Ok(serde_json::to_value(&cmp).expect("serializable"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let cfg = RunConfig::from_toml_str("[suites]\nrun = [\"qa\"]\ntrials = 10\n[solver]\nlevels = [2, 3]\n").unwrap();
        assert_eq!(cfg.suites.trials, 10);
        assert_eq!(cfg.solver.levels, vec![2, 3]);
        assert!(matches!(RunConfig::from_toml_str("[suites]\nrun = [\"nope\"]"), Err(Error::ConfigParse(_))));
        assert!(matches!(RunConfig::from_toml_str("[solver]\nwobble = 1"), Err(Error::ConfigParse(_))));
        assert!(matches!(RunConfig::from_toml_str("not toml ="), Err(Error::ConfigParse(_))));
        let empty = run_suite(&RunConfig::default()).unwrap();
        assert!(empty.passed && empty.suites.is_empty() && empty.exit_code() == 0);
    }

    #[test]
    fn fd_order_handles_noise() {
        assert_eq!(fd_order([1e-2, 5e-3], [1e-15, 3e-15]), None);
        assert!((fd_order([1e-2, 5e-3], [4e-6, 1e-6]).unwrap() - 2.0).abs() < 1e-12);
    }
}
