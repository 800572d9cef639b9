use bochner_core::error::Error;
use bochner_core::harness::*;
use bochner_core::hypersurface::{q_lower_bound, ImmersedHypersurface};
use proptest::prelude::*;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn newton_trials_are_clean_at_full_size() {
    let r = newton_inequality_trials(&TrialConfig::default());
    assert_eq!(r.trials, 100_000);
    assert_eq!((r.violations, r.false_positives, r.missed_equalities), (0, 0, 0), "{r:?}");
    assert_eq!(r.equality_hits, r.scalar_trials);
}

#[test]
fn trial_streams_do_not_depend_on_thread_count() {
    let cfg = TrialConfig::default().with_trials(20_000).with_seed(7);
    let one = in_pool(1, || (newton_inequality_trials(&cfg), qa_bound_trials(&cfg)));
    let four = in_pool(4, || (newton_inequality_trials(&cfg), qa_bound_trials(&cfg)));
    assert_eq!(serde_json::to_string(&one.0).unwrap(), serde_json::to_string(&four.0).unwrap());
    assert_eq!(serde_json::to_string(&one.1).unwrap(), serde_json::to_string(&four.1).unwrap());
    let other = newton_inequality_trials(&cfg.clone().with_seed(8));
    assert_ne!(one.0.worst_defect, other.worst_defect);
}

#[test]
fn qa_trials_detect_the_planted_violation() {
    let cfg = TrialConfig::default().with_trials(20_000);
    let clean = qa_bound_trials(&cfg);
    assert_eq!(clean.violations(), 0);
    assert!(clean.branches.iter().all(|b| b.equality_trials > 0 && b.equality_mismatches == 0));
    let planted = qa_bound_trials(&TrialConfig { widen: true, ..cfg });
    assert!(planted.planted);
    assert!(planted.branches.iter().all(|b| b.violations > 0), "{planted:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn newton_defect_is_nonnegative(
        n in 2usize..6,
        a in prop::collection::vec(-2.0f64..2.0, 36),
        l in prop::collection::vec(0.05f64..20.0, 6),
        theta in 0.0f64..6.3,
    ) {
        let sym: Vec<f64> = (0..n * n).map(|k| 0.5 * (a[k] + a[(k % n) * n + k / n])).collect();
        // B = R diag(l) Rᵀ with R a rotation in the (0,1) plane
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            b[i * n + i] = l[i];
        }
        let (c, s) = (theta.cos(), theta.sin());
        let (l0, l1) = (l[0], l[1]);
        b[0] = c * c * l0 + s * s * l1;
        b[n + 1] = s * s * l0 + c * c * l1;
        b[1] = c * s * (l0 - l1);
        b[n] = b[1];
        let tr_b: f64 = (0..n).map(|i| b[i * n + i]).sum();
        prop_assert!(newton_defect(&sym, &b, n) / tr_b >= -1e-10);
    }

    #[test]
    fn q_diagonal_respects_its_lower_bound(
        n in 2usize..8,
        alpha in 0.1f64..4.0,
        a in 1.0f64..3.0,
        kappa in -4.0f64..4.0,
        t in prop::collection::vec(0.0f64..=1.0, 8),
    ) {
        let h: Vec<f64> = t[..n].iter().map(|s| alpha * (1.0 + s * (a - 1.0))).collect();
        let margin = (q_min_diagonal(&h, kappa) - q_lower_bound(n, kappa, alpha, a)) / alpha.powi(3);
        prop_assert!(margin >= -1e-10, "margin {margin}");
    }
}

fn config(text: &str) -> RunConfig {
    RunConfig::from_toml_str(text).unwrap()
}

#[test]
fn empty_suite_list_passes() {
    let s = run_suite(&config("")).unwrap();
    assert!(s.passed && s.suites.is_empty());
    assert_eq!(s.exit_code(), 0);
    assert_eq!(serde_json::to_value(&s).unwrap()["suites"], serde_json::json!([]));
}

#[test]
fn sphere_equality_suite_passes() {
    let s = run_suite(&config("[suites]\nrun = [\"sphere-equality\"]\n")).unwrap();
    let o = &s.suites[0];
    assert!(o.passed, "{:?}", s.failures());
    let verdicts: Vec<&str> = o.data["reports"].as_array().unwrap().iter().map(|r| r["verdict"].as_str().unwrap()).collect();
    assert!(verdicts.iter().all(|v| *v == "equality-case"), "{verdicts:?}");
}

#[test]
fn corrupted_phi_names_the_failure() {
    let cfg = config("[manifold]\nmanifolds = [\"torus2\"]\ntensors = [\"metric\", \"skewed:amp=0.3\"]\npoints = 5\n[suites]\nrun = [\"bochner\", \"qa\"]\ntrials = 100\n");
    let s = run_suite(&cfg).unwrap();
    assert!(!s.passed);
    assert_eq!(s.suites[0].error_kind.as_deref(), Some("NonSymmetricCoefficient"));
    assert!(s.suites[1].passed);
    assert_eq!(s.exit_code(), 2);
    match s.into_result() {
        Err(Error::SuiteFailure { failures }) => {
            assert_eq!(failures.len(), 1);
            assert!(failures[0].starts_with("bochner: NonSymmetricCoefficient"), "{failures:?}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn failing_assertions_exit_with_one() {
    // a sphere is umbilic, so the strict inequality check must fail
    let cfg = config("[manifold]\nsurface = \"sphere:r=1,n=2\"\n[solver]\nlevels = [2, 3, 4]\n[suites]\nrun = [\"ellipsoid-compare\"]\n");
    let s = run_suite(&cfg).unwrap();
    assert!(!s.passed && s.suites[0].error.is_none());
    assert_eq!(s.exit_code(), 1);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "[suites]\nrun = [\"newton\", \"qa\"]\ntrials = 2000\nseed = 3\n").unwrap();
    let s = run_suite_file(&path).unwrap();
    assert!(s.passed, "{:?}", s.failures());
    assert_eq!(s.suites[0].data["seed"], 3);
    assert!(matches!(run_suite_file(&dir.path().join("missing.toml")), Err(Error::ConfigParse(_))));
}

#[test]
fn ellipsoid_comparison_rows() {
    let hs = ImmersedHypersurface::parse("ellipsoid:1,1,1.1").unwrap();
    let cmp = compare_surface(
        &hs,
        &[2, 3, 4],
        &bochner_core::spectral::EigenOptions::new(1, 1e-10),
        Default::default(),
        &bochner_core::geometry::SamplePlan::new(200, 0, 1),
    )
    .unwrap();
    let csv = cmp.to_csv();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("subdiv,h,mu1,bound,margin"));
    // μ₁ decreases towards its limit from above
    assert!(cmp.study.levels.windows(2).all(|w| w[0].mu1 > w[1].mu1));
    assert!(cmp.bound_input.a > 1.0 && cmp.bound_input.alpha > 0.0 && cmp.bound_input.hypotheses.estimated);
}

#[test]
fn mesh_problems() {
    assert!(l1_mesh_problem(&ImmersedHypersurface::parse("sphere:r=1,n=3").unwrap(), 1).is_err());
    let hs = ImmersedHypersurface::parse("geodesic-sphere:kappa=1,alpha=1,n=2").unwrap();
    let (mesh, _) = l1_mesh_problem(&hs, 1).unwrap();
    let r = mesh.vertices()[0].iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((r - 0.5f64.sqrt()).abs() < 1e-12);
}
