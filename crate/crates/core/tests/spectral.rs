use bochner_core::discretize::*;
use bochner_core::error::Error;
use bochner_core::geometry::{ChartManifold, SymmetricTensorField};
use bochner_core::hypersurface::ImmersedHypersurface;
use bochner_core::spectral::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere_op(subdiv: usize) -> AssembledOperator {
    assemble_mesh(&SurfaceMesh::icosphere(subdiv, 1.0), &MeshCoefficient::Metric, Quadrature::Barycentric).unwrap()
}

#[test]
fn flat_torus_first_eigenvalue_is_one() {
    let m = ChartManifold::parse("torus2:L=6.283185307179586").unwrap();
    let op = assemble_grid(&PeriodicGrid::uniform(&m, 128).unwrap(), &SymmetricTensorField::metric(), Quadrature::Barycentric).unwrap();
    let r = smallest_nonzero(&op, &EigenOptions::new(4, 1e-9)).unwrap();
    // e^{±i x₁}, e^{±i x₂}: multiplicity four
    for mu in &r.eigenvalues {
        assert!((mu - 1.0).abs() < 0.01, "{:?}", r.eigenvalues);
    }
    assert!(r.residuals.iter().all(|x| *x <= 1e-9));
}

#[test]
fn icosphere_laplacian_triple_eigenvalue() {
    let op = sphere_op(4);
    let r = smallest_nonzero(&op, &EigenOptions::new(4, 1e-10)).unwrap();
    let spread = r.eigenvalues[2] - r.eigenvalues[0];
    assert!(spread < 1e-3 && (r.mu1() - 2.0).abs() < 0.01, "{:?}", r.eigenvalues);
    // next eigenvalue belongs to degree 2
    assert!((r.eigenvalues[3] - 6.0).abs() < 0.1);
    assert!(r.m_orthonormality_defect(&op.mass) < 1e-10);
    for (mu, u) in r.eigenvalues.iter().zip(&r.eigenvectors) {
        let rq = op.stiffness.quadratic_form(u) / op.mass.quadratic_form(u);
        assert!((rq - mu).abs() < 1e-9 * mu);
    }
}

#[test]
fn refinement_approaches_from_above_at_second_order() {
    let mus: Vec<f64> = (3..6).map(|s| smallest_nonzero(&sphere_op(s), &EigenOptions::new(1, 1e-10)).unwrap().mu1()).collect();
    assert!(mus[0] > mus[1] && mus[1] > mus[2] && mus[2] > 2.0, "{mus:?}");
    let order = ((mus[1] - 2.0) / (mus[2] - 2.0)).log2();
    assert!((order - 2.0).abs() < 0.2, "{order}");
}

#[test]
fn identity_pencil_has_unit_spectrum() {
    let op = sphere_op(1);
    let same = AssembledOperator { stiffness: op.mass.clone(), mass: op.mass.clone(), provenance: op.provenance.clone() };
    let r = smallest_nonzero(&same, &EigenOptions::new(3, 1e-10)).unwrap();
    for mu in r.eigenvalues {
        assert!((mu - 1.0).abs() < 1e-12);
    }
}

#[test]
fn eigenvalues_do_not_depend_on_seed_or_ordering() {
    let hs = ImmersedHypersurface::parse("ellipsoid:1,1,1.1").unwrap();
    let mesh = SurfaceMesh::icosphere(3, 1.0).scaled_axes([1.0, 1.0, 1.1]).unwrap();
    let op = assemble_mesh(&mesh, &MeshCoefficient::newton_p1_of(&hs).unwrap(), Quadrature::Barycentric).unwrap();
    let base = smallest_nonzero(&op, &EigenOptions::new(3, 1e-11)).unwrap();
    let other_seed = smallest_nonzero(&op, &EigenOptions::new(3, 1e-11).with_seed(977)).unwrap();
    let mut perm: Vec<usize> = (0..op.dim()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    let permuted = smallest_nonzero(&op.permuted(&perm), &EigenOptions::new(3, 1e-11)).unwrap();
    for i in 0..3 {
        for other in [&other_seed, &permuted] {
            let rel = (other.eigenvalues[i] - base.eigenvalues[i]).abs() / base.eigenvalues[i];
            assert!(rel < 1e-10, "{:?} vs {:?}", other.eigenvalues, base.eigenvalues);
        }
    }
}

#[test]
fn energy_identity_defect_vanishes_for_eigenvectors_only() {
    let op = sphere_op(3);
    let r = smallest_nonzero(&op, &EigenOptions::new(1, 1e-11)).unwrap();
    let d = discrete_energy_identity_defect(&op, r.mu1(), &r.eigenvectors[0], &op).unwrap();
    assert!(d < 1e-10, "{d}");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u: Vec<f64> = (0..op.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    assert!(discrete_energy_identity_defect(&op, r.mu1(), &u, &op).unwrap() > 0.1);

    // a divergence-free φ ≠ g on a curved torus, checked against its own pencil
    let m = ChartManifold::parse("torus2:L=6.283185307179586,perturb=sin,eps=0.2").unwrap();
    let grid = PeriodicGrid::uniform(&m, 24).unwrap();
    let g_op = assemble_grid(&grid, &SymmetricTensorField::metric(), Quadrature::Barycentric).unwrap();
    let phi = SymmetricTensorField::metric().scaled(2.5);
    let p_op = assemble_grid(&grid, &phi, Quadrature::Barycentric).unwrap();
    let r = smallest_nonzero(&p_op, &EigenOptions::new(1, 1e-11)).unwrap();
    assert!(discrete_energy_identity_defect(&p_op, r.mu1(), &r.eigenvectors[0], &g_op).unwrap() < 1e-8);
}

#[test]
fn energy_identity_is_exact_for_symmetric_assemblies() {
    // K_φ u = μ M u makes uᵀK_φ M⁻¹ K_g u = μ uᵀK_g u hold exactly, so the
    // defect measures eigenpair accuracy on every mesh, not refinement
    let hs = ImmersedHypersurface::parse("ellipsoid:1,1,1.1").unwrap();
    let coef = MeshCoefficient::newton_p1_of(&hs).unwrap();
    let defects: Vec<f64> = (2..5)
        .map(|s| {
            let mesh = SurfaceMesh::icosphere(s, 1.0).scaled_axes([1.0, 1.0, 1.1]).unwrap();
            let p1 = assemble_mesh(&mesh, &coef, Quadrature::Barycentric).unwrap();
            let lap = assemble_mesh(&mesh, &MeshCoefficient::Metric, Quadrature::Barycentric).unwrap();
            let r = smallest_nonzero(&p1, &EigenOptions::new(1, 1e-11)).unwrap();
            discrete_energy_identity_defect(&p1, r.mu1(), &r.eigenvectors[0], &lap).unwrap()
        })
        .collect();
    assert!(defects.iter().all(|d| *d < 1e-10), "{defects:?}");
}

#[test]
fn solver_failures_are_reported() {
    let op = sphere_op(1);
    let neg = AssembledOperator { stiffness: op.stiffness.scaled(-1.0), ..op.clone() };
    assert!(matches!(smallest_nonzero(&neg, &EigenOptions::new(1, 1e-9)), Err(Error::FactorizationFailure(_))));
    let opts = EigenOptions { k: 3, tol: 1e-30, max_restarts: 1, max_basis: 10, ..Default::default() };
    match smallest_nonzero(&sphere_op(3), &opts) {
        Err(Error::NoConvergence { best_value, .. }) => assert!((best_value - 2.0).abs() < 0.1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn analytic_spectra() {
    let s4 = analytic_sphere_spectrum(4, 1.0, SphereOperator::Schouten, 2).unwrap();
    assert_eq!((s4[0].value, s4[0].multiplicity), (4.0, 5));
    let l1 = analytic_sphere_spectrum(2, 0.0, SphereOperator::NewtonL1 { alpha: 2.0, kappa: -1.0 }, 1).unwrap();
    assert_eq!(l1[0].value, 12.0);
    assert!(analytic_sphere_spectrum(2, 1.0, SphereOperator::NewtonL1 { alpha: 0.5, kappa: -1.0 }, 1).is_err());
}
