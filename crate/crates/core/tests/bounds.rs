use bochner_core::bounds::*;
use bochner_core::error::Error;
use bochner_core::geometry::{ChartManifold, SamplePlan};
use bochner_core::spectral::{analytic_sphere_spectrum, SphereOperator};
use proptest::prelude::*;

fn nb(n: usize, kappa: f64, alpha: f64, a: f64, sigma: f64) -> f64 {
    newton_bound(&NewtonBoundInput::new(n, kappa, alpha, a, sigma)).unwrap()
}

proptest! {
    #[test]
    fn schouten_bound_scales_like_curvature_squared(n in 4usize..9, k0 in 0.1f64..2.0, extra in 0.05f64..1.0, t in 0.5f64..2.0) {
        // g → t²g divides curvatures by t²; Γ is quadratic in them and
        // R/(R − 2L0) is scale free, matching μ₁(□_S) ∝ K² on round spheres
        let nf = n as f64;
        let r = nf * (nf - 1.0) * k0;
        let l0 = (nf - 1.0) * k0 * (1.0 - 0.1 * extra);
        let b = schouten_bound(&SchoutenBoundInput::new(n, r, k0, l0)).unwrap();
        let bt = schouten_bound(&SchoutenBoundInput::new(n, r / (t * t), k0 / (t * t), l0 / (t * t))).unwrap();
        prop_assert!((bt - b / t.powi(4)).abs() <= 1e-12 * b.abs().max(1.0));
        let mu = |k: f64| analytic_sphere_spectrum(n, k, SphereOperator::Schouten, 1).unwrap()[0].value;
        prop_assert!((mu(k0 / (t * t)) - mu(k0) / t.powi(4)).abs() <= 1e-12 * mu(k0));
    }

    #[test]
    fn newton_bound_scales_cubically(n in 2usize..7, kappa in -2.0f64..2.0, alpha in 0.2f64..3.0, a in 1.0f64..2.0, sigma in -1.0f64..1.0, t in 0.5f64..2.0) {
        let b = nb(n, kappa, alpha, a, sigma);
        let bt = nb(n, kappa / (t * t), alpha / t, a, sigma / t.powi(3));
        prop_assert!((bt - b / t.powi(3)).abs() <= 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn umbilic_bound_is_continuous_across_kappa_zero(n in 2usize..8, kappa in -3.0f64..3.0, alpha in 0.1f64..3.0) {
        let nf = n as f64;
        let want = nf * (nf - 1.0) * alpha * (alpha * alpha + kappa);
        prop_assert!((nb(n, kappa, alpha, 1.0, 0.0) - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn newton_bound_decreases_in_sigma(n in 2usize..7, kappa in -2.0f64..2.0, alpha in 0.2f64..3.0, a in 1.0f64..2.0, s in -1.0f64..1.0, ds in 1e-3f64..1.0) {
        prop_assert!(nb(n, kappa, alpha, a, s + ds) < nb(n, kappa, alpha, a, s));
    }
}

#[test]
fn newton_bound_decreases_in_a_while_positive() {
    for n in 2..7 {
        for &kappa in &[-1.0, -0.2, 0.0, 0.5, 2.0] {
            for &alpha in &[0.5, 1.0, 2.0] {
                let grid: Vec<f64> = (0..=200).map(|i| 1.0 + ((n as f64).sqrt() - 1.0) * i as f64 / 200.0).collect();
                let vals: Vec<f64> = grid.iter().map(|&a| nb(n, kappa, alpha, a, 0.0)).collect();
                for w in vals.windows(2) {
                    // the prefactor falls with a; once the bracket turns
                    // negative the product is no longer informative
                    if w[0] > 0.0 {
                        assert!(w[1] < w[0], "n={n} kappa={kappa} alpha={alpha}: {w:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn round_sphere_equalities() {
    for n in 4..=6 {
        let nf = n as f64;
        let input = SchoutenBoundInput::new(n, nf * (nf - 1.0), 1.0, nf - 1.0);
        let mu = analytic_sphere_spectrum(n, 1.0, SphereOperator::Schouten, 1).unwrap()[0].value;
        assert_eq!(mu, nf * (nf - 2.0) / 2.0);
        let r = compare(&BoundInput::Schouten(input.clone()), MuSource::Analytic { value: mu }).unwrap();
        assert_eq!(r.verdict, Verdict::EqualityCase);
        assert!(r.margin.abs() <= 1e-12 * mu);
        // the defining combination, not half of it
        assert!((input.gamma() - (nf - 1.0) * (nf - 2.0)).abs() < 1e-12);
        assert!(r.notes.iter().any(|s| s.starts_with("gamma")));
    }
    for (n, kappa, alpha) in [(2, 0.0, 1.0), (2, 0.0, 2.0), (3, 1.0, 1.0), (2, -1.0, 2.0)] {
        let mu = analytic_sphere_spectrum(n, 0.0, SphereOperator::NewtonL1 { alpha, kappa }, 1).unwrap()[0].value;
        let r = compare(&BoundInput::NewtonL1(NewtonBoundInput::new(n, kappa, alpha, 1.0, 0.0)), MuSource::Analytic { value: mu }).unwrap();
        assert_eq!(r.verdict, Verdict::EqualityCase, "{r:?}");
    }
}

#[test]
fn verdicts() {
    let input = BoundInput::NewtonL1(NewtonBoundInput::new(2, 0.0, 1.0, 1.0, 0.0));
    let v = |mu: MuSource| compare(&input, mu).unwrap().verdict;
    assert_eq!(v(MuSource::Computed { value: 2.0007, error_estimate: 0.0005 }), Verdict::EqualityCase);
    assert_eq!(v(MuSource::Computed { value: 2.5, error_estimate: 0.01 }), Verdict::InequalityHolds);
    assert_eq!(v(MuSource::Computed { value: 1.9, error_estimate: 0.01 }), Verdict::ViolationSuspected);
    // within three error estimates below the bound is still equality
    assert_eq!(v(MuSource::Computed { value: 1.975, error_estimate: 0.01 }), Verdict::EqualityCase);
    assert_eq!(v(MuSource::Analytic { value: 2.0 + 1e-7 }), Verdict::EqualityCase);
    assert_eq!(v(MuSource::Analytic { value: 2.0 + 1e-5 }), Verdict::InequalityHolds);

    let mut concave = NewtonBoundInput::new(2, 0.0, 1.0, 1.0, 0.0);
    concave.hypotheses.convex_checked = false;
    let r = compare(&BoundInput::NewtonL1(concave), MuSource::Analytic { value: 2.0 }).unwrap();
    assert_eq!(r.verdict, Verdict::HypothesisFailed);
    assert_eq!(r.hypotheses.get("convex"), Some(&false));
}

#[test]
fn sampled_constants_on_manifolds() {
    let plan = SamplePlan::new(20, 4, 3);
    let s5 = SchoutenBoundInput::from_manifold(&ChartManifold::parse("sphere:n=5,K=1").unwrap(), &plan).unwrap();
    assert!(s5.hypotheses.harmonic_weyl_checked && s5.hypotheses.r_constant_checked && s5.hypotheses.schouten_positive_checked);
    assert!(!s5.hypotheses.estimated);
    assert!((schouten_bound(&s5).unwrap() - 7.5).abs() < 1e-10);

    // a perturbed torus has non-constant R and indefinite Schouten tensor
    let t4 = SchoutenBoundInput::from_manifold(&ChartManifold::parse("torus4:perturb=mix,eps=0.1").unwrap(), &plan).unwrap();
    assert!(t4.hypotheses.estimated);
    assert!(!t4.hypotheses.r_constant_checked && !t4.hypotheses.schouten_positive_checked);
    assert!(matches!(
        SchoutenBoundInput::from_manifold(&ChartManifold::parse("sphere:n=3,K=1").unwrap(), &plan),
        Err(Error::DimensionTooSmall { n: 3, min: 4 })
    ));
}

#[test]
fn newton_input_validation() {
    assert!(newton_bound(&NewtonBoundInput::new(2, 0.0, 0.0, 1.0, 0.0)).is_err());
    assert!(newton_bound(&NewtonBoundInput::new(2, 0.0, 1.0, 0.5, 0.0)).is_err());
    assert!(matches!(newton_bound(&NewtonBoundInput::new(1, 0.0, 1.0, 1.0, 0.0)), Err(Error::DimensionTooSmall { .. })));
}
