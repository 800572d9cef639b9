use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use bochner_core::bounds::{
    compare, newton_bound, schouten_bound, BoundInput, MuSource, NewtonBoundInput, SchoutenBoundInput,
};
use bochner_core::boxop::BoxOperator;
use bochner_core::discretize::{assemble_mesh, MeshCoefficient, Quadrature, SurfaceMesh};
use bochner_core::geometry::{divergence_identity_suite, parse_tensor, ChartManifold, SamplePlan, ScalarField};
use bochner_core::harness::{
    compare_surface, l1_mesh_problem, newton_inequality_trials, qa_bound_trials, run_suite, RunConfig, SuiteName,
};
use bochner_core::harness::suites::{BOCHNER_TOL, DIVERGENCE_TOL};
use bochner_core::hypersurface::ImmersedHypersurface;
use bochner_core::spectral::{smallest_nonzero, EigenOptions};
use bochner_core::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "spectra-bochner", version, about = "Spectra and Bochner-type identities for Cheng-Yau operators")]
struct Cli {
    /// TOML run configuration with [manifold], [solver] and [suites] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override every seed (solver start vectors, sampling, trials).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pointwise identity checks.
    #[command(subcommand)]
    Verify(Verify),
    /// Smallest nonzero eigenvalues of an assembled operator.
    Eig(EigArgs),
    /// Evaluate a closed-form eigenvalue lower bound.
    #[command(subcommand)]
    Bound(Bound),
    /// Run verification suites (all, or those named in the config).
    Check(CheckArgs),
    /// Randomized trials of the pointwise matrix inequalities.
    Proptest(ProptestArgs),
    /// Refinement reports.
    #[command(subcommand)]
    Report(Report),
}

#[derive(Subcommand)]
enum Verify {
    /// Residual table of the Bochner identity at sample points.
    Bochner {
        /// Manifold descriptor, or a surface descriptor when --phi newton1.
        #[arg(long)]
        manifold: String,
        /// metric, schouten, ricci, einstein, newton1, custom:random[,seed=,amp=], ...
        #[arg(long, default_value = "metric")]
        phi: String,
        #[arg(long = "f", default_value = "generic")]
        field: String,
        #[arg(long, value_delimiter = ',', default_value = "0,1,7.3")]
        c: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Divergence identities of the Ricci-derived tensors.
    Divergence {
        #[arg(long)]
        manifold: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Constant c in div(ric - c g).
        #[arg(long, default_value_t = 0.0)]
        shift: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshOperator {
    Laplacian,
    Newton1,
}

#[derive(Args)]
struct EigArgs {
    /// OFF triangle mesh.
    #[arg(long, conflicts_with = "surface", required_unless_present = "surface")]
    mesh: Option<PathBuf>,
    /// Surface descriptor meshed as a subdivided icosphere.
    #[arg(long)]
    surface: Option<String>,
    #[arg(long, default_value_t = 4)]
    subdiv: usize,
    #[arg(long, value_enum, default_value = "laplacian")]
    operator: MeshOperator,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value = "barycentric")]
    quadrature: String,
}

#[derive(Subcommand)]
enum Bound {
    /// Lower bound for the Schouten operator.
    Schouten {
        #[arg(long)]
        n: usize,
        #[arg(long = "R")]
        r: f64,
        #[arg(long = "K0")]
        k0: f64,
        #[arg(long = "L0")]
        l0: f64,
        /// Compare against this first eigenvalue.
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Lower bound for L1 on a convex hypersurface of a space form.
    L1 {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long)]
        mu: Option<f64>,
    },
}

#[derive(Args)]
struct CheckArgs {
    /// Comma-separated suite names; overrides the config.
    #[arg(long, value_delimiter = ',')]
    suites: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrialKind {
    Newton,
    Qa,
}

#[derive(Args)]
struct ProptestArgs {
    #[arg(value_enum)]
    kind: TrialKind,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    dim_min: Option<usize>,
    #[arg(long)]
    dim_max: Option<usize>,
    /// Plant a violation by widening the claimed Q(A) bound.
    #[arg(long)]
    widen: bool,
}

#[derive(Subcommand)]
enum Report {
    /// Per-level CSV of mu1(L1) against its lower bound.
    Compare {
        #[arg(long)]
        surface: String,
        /// Subdivision range `a..b` (inclusive) or a comma list.
        #[arg(long, default_value = "3..5")]
        refine: String,
        #[arg(long, default_value = "barycentric")]
        quadrature: String,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    Ok(match cli.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn run(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Verify(v) => verify(v, &cfg),
        Command::Eig(a) => eig(a, &cfg),
        Command::Bound(b) => bound(b, cli.json),
        Command::Check(a) => check(a, cfg, cli.json),
        Command::Proptest(a) => proptest(a, &cfg, cli.json),
        Command::Report(r) => report(r, &cfg, cli.json),
    }
}

fn verify(v: &Verify, cfg: &RunConfig) -> Result<i32> {
    match v {
        Verify::Bochner { manifold, phi, field, c, samples } => {
            let op = if phi == "newton1" {
                BoxOperator::newton_l1(&ImmersedHypersurface::parse(manifold)?)
            } else {
                let m = ChartManifold::parse(manifold)?;
                if phi == "schouten" {
                    BoxOperator::schouten(&m)?;
                }
                BoxOperator::custom(&m, parse_tensor(phi, m.dim())?)
            };
            let f = ScalarField::parse(field)?;
            let m = &op.manifold;
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for (idx, pt) in m.sample_points(*samples, cfg.solver.seed).iter().enumerate() {
                let asym = op.phi.asymmetry(m, pt)?;
                if asym > 1e-12 {
                    return Err(Error::NonSymmetricCoefficient { element: idx, asymmetry: asym });
                }
                for r in op.bochner_residual(&f, pt, c)? {
                    worst = worst.max(r.residual.abs());
                    rows.push(json!({
                        "point": idx,
                        "chart": pt.chart,
                        "coords": pt.coords,
                        "c": r.c,
                        "lhs": r.lhs,
                        "rhs": r.rhs_terms.sum(),
                        "residual": r.residual,
                        "terms": r.rhs_terms,
                    }));
                }
            }
            let passed = worst <= BOCHNER_TOL;
            print(&json!({
                "manifold": m.label(),
                "phi": op.phi.label(),
                "field": f.label(),
                "samples": samples,
                "tolerance": BOCHNER_TOL,
                "max_residual": worst,
                "passed": passed,
                "rows": rows,
            }));
            Ok(if passed { 0 } else { 1 })
        }
        Verify::Divergence { manifold, samples, shift } => {
            let m = ChartManifold::parse(manifold)?;
            let r = divergence_identity_suite(&m, &m.sample_points(*samples, cfg.solver.seed), *shift)?;
            let passed = r.max_defect() <= DIVERGENCE_TOL;
            print(&json!({ "report": r, "passed": passed }));
            Ok(if passed { 0 } else { 1 })
        }
    }
}

fn eig(a: &EigArgs, cfg: &RunConfig) -> Result<i32> {
    let rule = Quadrature::parse(&a.quadrature)?;
    let (mesh, coef, source) = match (&a.mesh, &a.surface) {
        (Some(path), _) => {
            let mesh = SurfaceMesh::read_off(path)?;
            let coef = match a.operator {
                MeshOperator::Laplacian => MeshCoefficient::Metric,
                MeshOperator::Newton1 => MeshCoefficient::VertexNormalNewton1,
            };
            (mesh, coef, path.display().to_string())
        }
        (None, Some(desc)) => {
            let hs = ImmersedHypersurface::parse(desc)?;
            let (mesh, newton) = l1_mesh_problem(&hs, a.subdiv)?;
            let coef = match a.operator {
                MeshOperator::Laplacian => MeshCoefficient::Metric,
                MeshOperator::Newton1 => newton,
            };
            (mesh, coef, format!("{desc} (subdiv {})", a.subdiv))
        }
        (None, None) => return Err(Error::InvalidInput("either --mesh or --surface is required".into())),
    };
    let op = assemble_mesh(&mesh, &coef, rule)?;
    let opts = EigenOptions { k: a.k, tol: a.tol, seed: cfg.solver.seed, max_restarts: cfg.solver.max_restarts, max_basis: 0 };
    let r = smallest_nonzero(&op, &opts)?;
    print(&json!({
        "source": source,
        "operator": coef.label(),
        "quadrature": rule,
        "eigenvalues": r.eigenvalues,
        "residuals": r.residuals,
        "scaled_residuals": r.scaled_residuals,
        "diagnostics": r.diagnostics,
        "mesh": mesh.stats(),
    }));
    Ok(0)
}

fn bound(b: &Bound, as_json: bool) -> Result<i32> {
    let (input, mu) = match b {
        Bound::Schouten { n, r, k0, l0, mu } => {
            let input = SchoutenBoundInput::new(*n, *r, *k0, *l0);
            schouten_bound(&input)?;
            (BoundInput::Schouten(input), *mu)
        }
        Bound::L1 { n, kappa, alpha, a, sigma, mu } => {
            let input = NewtonBoundInput::new(*n, *kappa, *alpha, *a, *sigma);
            newton_bound(&input)?;
            (BoundInput::NewtonL1(input), *mu)
        }
    };
    let value = input.value()?;
    let extra = match &input {
        BoundInput::Schouten(s) => json!({ "gamma": s.gamma(), "lambda0": s.lambda0() }),
        BoundInput::NewtonL1(l) => json!({ "c": l.c() }),
    };
    let report = mu.map(|m| compare(&input, MuSource::Analytic { value: m })).transpose()?;
    if as_json {
        print(&json!({ "input": input, "bound": value, "derived": extra, "hypotheses": input.hypotheses(), "report": report }));
    } else {
        println!("bound = {value:.12}");
        if let Value::Object(map) = &extra {
            for (k, v) in map {
                println!("{k} = {v}");
            }
        }
        for (k, v) in input.hypotheses() {
            println!("hypothesis {k}: {v}");
        }
        if let Some(r) = &report {
            println!("mu1 = {}  margin = {:.6e}  verdict = {}", r.computed_mu1, r.margin, r.verdict);
            for n in &r.notes {
                println!("note: {n}");
            }
        }
    }
    let violated = report.is_some_and(|r| r.verdict == bochner_core::bounds::Verdict::ViolationSuspected);
    Ok(if violated { 1 } else { 0 })
}

fn check(a: &CheckArgs, mut cfg: RunConfig, as_json: bool) -> Result<i32> {
    if !a.suites.is_empty() {
        for s in &a.suites {
            SuiteName::from_str(s)?;
        }
        cfg.suites.run = a.suites.clone();
    } else if cfg.suites.run.is_empty() {
        cfg.suites.run = SuiteName::ALL.iter().map(|s| s.as_str().to_string()).collect();
    }
    let summary = run_suite(&cfg)?;
    if as_json {
        print(&serde_json::to_value(&summary).expect("serializable"));
    } else {
        for s in &summary.suites {
            println!("{:<18} {}  ({:.2} s)", s.suite.as_str(), if s.passed { "PASS" } else { "FAIL" }, s.seconds);
        }
        for f in summary.failures() {
            println!("  failed: {f}");
        }
    }
    Ok(summary.exit_code())
}

fn proptest(a: &ProptestArgs, cfg: &RunConfig, as_json: bool) -> Result<i32> {
    let mut tc = cfg.trial_config();
    if let Some(t) = a.trials {
        tc.trials = t;
    }
    if let Some(d) = a.dim_min {
        tc.dim_min = d;
    }
    if let Some(d) = a.dim_max {
        tc.dim_max = d;
    }
    if tc.dim_min < 2 || tc.dim_min > tc.dim_max {
        return Err(Error::InvalidInput(format!("dimension range {}..={} is invalid", tc.dim_min, tc.dim_max)));
    }
    tc.widen = a.widen;
    let (value, passed) = match a.kind {
        TrialKind::Newton => {
            let r = newton_inequality_trials(&tc);
            let ok = r.passed();
            (serde_json::to_value(r).expect("serializable"), ok)
        }
        TrialKind::Qa => {
            let r = qa_bound_trials(&tc);
            let ok = r.violations() == 0 && r.equality_mismatches() == 0;
            (serde_json::to_value(r).expect("serializable"), ok)
        }
    };
    if as_json {
        print(&value);
    } else {
        println!("{}", if passed { "PASS" } else { "FAIL" });
        print(&value);
    }
    Ok(if passed { 0 } else { 1 })
}

fn parse_levels(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidInput(format!("bad refinement range '{s}' (use a..b or a,b,c)"));
    let levels: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if levels.len() < 2 {
        return Err(bad());
    }
    Ok(levels)
}

fn report(r: &Report, cfg: &RunConfig, as_json: bool) -> Result<i32> {
    match r {
        Report::Compare { surface, refine, quadrature, samples } => {
            let hs = ImmersedHypersurface::parse(surface)?;
            let levels = parse_levels(refine)?;
            let rule = Quadrature::parse(quadrature)?;
            let plan = SamplePlan::new(*samples, 0, cfg.solver.seed);
            let cmp = compare_surface(&hs, &levels, &cfg.solver.eigen_options(), rule, &plan)?;
            if as_json {
                print(&serde_json::to_value(&cmp).expect("serializable"));
            } else {
                print!("{}", cmp.to_csv());
            }
            Ok(0)
        }
    }
}
