//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::time::Instant;

use bochner_core::bounds::*;
use bochner_core::discretize::*;
use bochner_core::geometry::{ChartManifold, SamplePlan, ScalarField, SymmetricTensorField};
use bochner_core::harness::*;
use bochner_core::hypersurface::ImmersedHypersurface;
use bochner_core::jet::Jet;
use bochner_core::spectral::{analytic_sphere_spectrum, EigenOptions, SphereOperator};
use bochner_core::Result;

type Outcome = Result<(bool, String)>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn schouten_sphere_equality() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for n in 4..=6 {
        let nf = n as f64;
        let mu = analytic_sphere_spectrum(n, 1.0, SphereOperator::Schouten, 1)?[0].value;
        let b = schouten_bound(&SchoutenBoundInput::new(n, nf * (nf - 1.0), 1.0, nf - 1.0))?;
        ok &= rel(mu, nf * (nf - 2.0) / 2.0) <= 1e-12;
        worst = worst.max(rel(b, mu));
    }
    Ok((ok && worst <= 1e-12, format!("n = 4, 5, 6; worst relative gap {worst:.1e}")))
}

fn newton_sphere_equality() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut branches = [false; 2];
    for (n, kappa, alpha) in [(2usize, 0.0, 1.0), (2, 0.0, 2.0), (3, 1.0, 1.0), (2, -1.0, 2.0)] {
        let want = n as f64 * (n as f64 - 1.0) * alpha * (alpha * alpha + kappa);
        let b = newton_bound(&NewtonBoundInput::new(n, kappa, alpha, 1.0, 0.0))?;
        let mu = analytic_sphere_spectrum(n, 0.0, SphereOperator::NewtonL1 { alpha, kappa }, 1)?[0].value;
        worst = worst.max(rel(b, want)).max(rel(mu, want));
        branches[usize::from(kappa > 0.0)] = true;
    }
    Ok((worst <= 1e-12 && branches == [true, true], format!("4 cases, both kappa branches; worst relative gap {worst:.1e}")))
}

fn fem_sphere_equality() -> Outcome {
    let hs = ImmersedHypersurface::parse("sphere:r=1,n=2")?;
    let study = l1_refinement(&hs, &[4, 5, 6], &EigenOptions::new(1, 1e-9), Quadrature::Barycentric)?;
    let mus: Vec<f64> = study.levels.iter().map(|l| l.mu1).collect();
    let in_range = mus.iter().all(|m| (2.0..=2.1).contains(m));
    let decreasing = mus.windows(2).all(|w| (w[1] - 2.0).abs() < (w[0] - 2.0).abs());
    let order = study.order_against(2.0).unwrap_or(f64::NAN);
    let extrap = rel(study.estimate.extrapolated, 2.0);
    Ok((
        in_range && decreasing && order >= 1.8 && extrap <= 2e-3,
        format!(
            "mu1 = {:.6}, {:.6}, {:.6}; order {order:.3}; extrapolated {:.8} ({:.1e} relative); finest level {:.1} s",
            mus[0],
            mus[1],
            mus[2],
            study.estimate.extrapolated,
            extrap,
            study.finest().seconds
        ),
    ))
}

fn ellipsoid_inequality() -> Outcome {
    let hs = ImmersedHypersurface::parse("ellipsoid:1,1,1.1")?;
    let cmp = compare_surface(&hs, &[3, 4, 5, 6], &EigenOptions::new(1, 1e-9), Quadrature::Barycentric, &SamplePlan::new(400, 0, 42))?;
    let r = &cmp.report;
    let b = &cmp.bound_input;
    let err = cmp.study.estimate.error_estimate;
    Ok((
        r.verdict == Verdict::InequalityHolds && r.margin > 3.0 * err,
        format!(
            "alpha {:.4}, a {:.4}, sigma {:.3e}; bound {:.6}, mu1 {:.6}, margin {:.6} vs 3 x error {:.2e}; {}",
            b.alpha,
            b.a,
            b.sigma,
            r.bound_value,
            r.computed_mu1,
            r.margin,
            3.0 * err,
            r.verdict
        ),
    ))
}

fn suite(name: SuiteName, cfg: &RunConfig) -> Outcome {
    let o = run_one(name, cfg);
    if let Some(e) = &o.error {
        return Ok((false, e.clone()));
    }
    let failed: Vec<String> = o.assertions.iter().filter(|a| !a.passed).map(|a| format!("{}: {}", a.name, a.detail)).collect();
    let detail = if failed.is_empty() {
        format!("{} assertions", o.assertions.len())
    } else {
        failed.join("; ")
    };
    Ok((o.passed, detail))
}

fn bochner_identity() -> Outcome {
    let cfg = RunConfig::default();
    let (ok, detail) = suite(SuiteName::Bochner, &cfg)?;
    let field = ScalarField::parse(&cfg.manifold.field)?;
    let mut worst = (0.0f64, 0.0f64);
    for desc in suites::BOCHNER_MANIFOLDS {
        let m = ChartManifold::parse(desc)?;
        for t in suites::BOCHNER_TENSORS {
            let c = bochner_case(&m, t, &field, 200, cfg.solver.seed, &suites::BOCHNER_CS)?;
            worst = (worst.0.max(c.max_residual), worst.1.max(c.max_spread));
        }
    }
    Ok((ok, format!("{detail}; 200 points, max residual {:.1e}, max spread across c {:.1e}", worst.0, worst.1)))
}

fn newton_trials() -> Outcome {
    let r = newton_inequality_trials(&TrialConfig::default());
    Ok((
        r.trials == 100_000 && r.passed(),
        format!(
            "{} trials, dims 2-8: {} violations, worst {:.2e}; {} of {} scalar trials flagged as equality, {} false positives",
            r.trials, r.violations, r.worst_defect, r.equality_hits, r.scalar_trials, r.false_positives
        ),
    ))
}

fn qa_trials() -> Outcome {
    let cfg = TrialConfig::default();
    let clean = qa_bound_trials(&cfg);
    let planted = qa_bound_trials(&TrialConfig { widen: true, ..cfg });
    let per_branch = clean.branches.iter().all(|b| b.trials == 100_000);
    Ok((
        per_branch && clean.violations() == 0 && clean.equality_mismatches() == 0 && planted.violations() > 0,
        format!(
            "{}; planted control {} violations",
            clean
                .branches
                .iter()
                .map(|b| format!("kappa {:?}: {} trials, {} violations, worst {:.1e}", b.kappa_sign, b.trials, b.violations, b.worst_margin))
                .collect::<Vec<_>>()
                .join(", "),
            planted.violations()
        ),
    ))
}

fn divergence_identities() -> Outcome {
    suite(SuiteName::Divergence, &RunConfig::default())
}

fn discrete_consistency() -> Outcome {
    let mut cot: f64 = 0.0;
    let meshes = (0..5)
        .map(|s| SurfaceMesh::icosphere(s, 1.0))
        .chain([SurfaceMesh::icosphere(3, 1.0).scaled_axes([1.0, 1.2, 0.9])?]);
    for mesh in meshes {
        let op = assemble_mesh(&mesh, &MeshCoefficient::Metric, Quadrature::Barycentric)?;
        let diff = op.stiffness.add_scaled(&cotangent_stiffness(&mesh), -1.0)?;
        cot = diff.triplets().fold(cot, |m, (_, _, v)| m.max(v.abs()));
    }

    let tau = std::f64::consts::TAU;
    let mixed = ChartManifold::parse(&format!("torus2:L={tau},perturb=mix,eps=0.2"))?;
    let grid = grid_consistency(&mixed, &[16, 32, 64], &SymmetricTensorField::metric(), &ScalarField::generic(), Quadrature::Barycentric)?;
    let aniso = SymmetricTensorField::from_fn("constant-anisotropic", |_, x: &[Jet]| {
        let c = |v: f64| x[0].constant_like(v);
        vec![c(1.5), c(0.3), c(0.3), c(0.8)]
    });
    let flat = ChartManifold::parse(&format!("torus2:L={tau}"))?;
    let grid_aniso = grid_consistency(&flat, &[16, 32, 64], &aniso, &ScalarField::generic(), Quadrature::Barycentric)?;
    let levels: Vec<SurfaceMesh> = (2..6).map(|s| SurfaceMesh::icosphere(s, 1.0)).collect();
    let ico = mesh_consistency(&levels, &MeshCoefficient::Metric, Quadrature::Barycentric, &|x| Ok((x[0], 2.0 * x[0])))?;

    let bad = SymmetricTensorField::from_fn("(1+sin/2)g", |_, x: &[Jet]| {
        let s = x[0].sin() * 0.5 + 1.0;
        let z = x[0].constant_like(0.0);
        vec![s.clone(), z.clone(), z, s]
    });
    let control = grid_consistency(&flat, &[16, 32, 64], &bad, &ScalarField::generic(), Quadrature::Barycentric)?;
    let last = control.levels.last().expect("levels");

    let p_grid = grid.observed_order().unwrap_or(f64::NAN);
    let p_aniso = grid_aniso.observed_order().unwrap_or(f64::NAN);
    let p_weak = ico.observed_weak_order().unwrap_or(f64::NAN);
    let near2 = |p: f64| (p - 2.0).abs() <= 0.2;
    let o1 = last.max_error > 0.1 * last.max_target && control.observed_order().unwrap_or(f64::NAN) < 0.5;
    Ok((
        cot <= 1e-12 && near2(p_grid) && near2(p_aniso) && near2(p_weak) && o1,
        format!(
            "cotangent gap {cot:.1e}; grid nodal order {p_grid:.3} (perturbed metric), {p_aniso:.3} (anisotropic); \
             icosphere weak order {p_weak:.3}; control error {:.3} of {:.3} at finest grid",
            last.max_error, last.max_target
        ),
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit_seconds: f64,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "Schouten sphere equality", limit_seconds: 1.0, run: schouten_sphere_equality },
        Criterion { id: 2, name: "Newton sphere equality", limit_seconds: 1.0, run: newton_sphere_equality },
        Criterion { id: 3, name: "FEM sphere equality for L1", limit_seconds: 120.0, run: fem_sphere_equality },
        Criterion { id: 4, name: "strict inequality on an ellipsoid", limit_seconds: 180.0, run: ellipsoid_inequality },
        Criterion { id: 5, name: "Bochner identity residuals", limit_seconds: 30.0, run: bochner_identity },
        Criterion { id: 6, name: "Newton inequality trials", limit_seconds: 10.0, run: newton_trials },
        Criterion { id: 7, name: "Q(A) bound trials", limit_seconds: 10.0, run: qa_trials },
        Criterion { id: 8, name: "divergence identities", limit_seconds: 30.0, run: divergence_identities },
        Criterion { id: 9, name: "discrete operator consistency", limit_seconds: 60.0, run: discrete_consistency },
    ];
    let mut failures = 0;
    for c in &criteria {
        let t = Instant::now();
        let result = (c.run)();
        let secs = t.elapsed().as_secs_f64();
        let (ok, detail) = match result {
            Ok((ok, d)) if secs <= c.limit_seconds => (ok, d),
            Ok((_, d)) => (false, format!("{d}; exceeded the {} s limit", c.limit_seconds)),
            Err(e) => (false, format!("error {}: {e}", e.kind())),
        };
        if !ok {
            failures += 1;
        }
        println!("{} criterion {} {} ({secs:.2} s): {detail}", if ok { "PASS" } else { "FAIL" }, c.id, c.name);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
