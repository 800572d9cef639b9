use bochner_core::discretize::*;
use bochner_core::error::Error;
use bochner_core::geometry::{ChartManifold, ScalarField, SymmetricTensorField};
use bochner_core::hypersurface::ImmersedHypersurface;
use bochner_core::jet::Jet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = std::f64::consts::TAU;

fn flat_torus() -> ChartManifold {
    ChartManifold::parse(&format!("torus2:L={TAU}")).unwrap()
}

fn max_abs_diff(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
    a.add_scaled(b, -1.0).unwrap().triplets().fold(0.0, |m, (_, _, v)| m.max(v.abs()))
}

#[test]
fn metric_assembly_matches_cotangent_formula() {
    for s in 0..4 {
        let mesh = SurfaceMesh::icosphere(s, 1.3);
        let op = assemble_mesh(&mesh, &MeshCoefficient::Metric, Quadrature::Barycentric).unwrap();
        let cot = cotangent_stiffness(&mesh);
        assert_eq!(op.stiffness.nnz(), cot.nnz());
        let pattern = |m: &CsrMatrix| m.triplets().map(|(i, j, _)| (i, j)).collect::<Vec<_>>();
        assert_eq!(pattern(&op.stiffness), pattern(&cot));
        assert!(max_abs_diff(&op.stiffness, &cot) < 1e-12);
    }
    let ell = SurfaceMesh::icosphere(2, 1.0).scaled_axes([1.0, 1.4, 0.8]).unwrap();
    let op = assemble_mesh(&ell, &MeshCoefficient::Metric, Quadrature::ThreePoint).unwrap();
    assert!(max_abs_diff(&op.stiffness, &cotangent_stiffness(&ell)) < 1e-12);
}

#[test]
fn stiffness_is_linear_in_the_coefficient() {
    let mesh = SurfaceMesh::icosphere(2, 1.0);
    let a = assemble_mesh(&mesh, &MeshCoefficient::Metric, Quadrature::Barycentric).unwrap();
    let b = assemble_mesh(&mesh, &MeshCoefficient::Metric.scaled(2.0), Quadrature::Barycentric).unwrap();
    assert_eq!(b.stiffness, a.stiffness.scaled(2.0));
    assert_eq!(b.mass, a.mass);
}

#[test]
fn umbilic_newton_tensor_reproduces_the_laplacian() {
    let mesh = SurfaceMesh::icosphere(3, 1.0);
    let hs = ImmersedHypersurface::parse("sphere:r=1,n=2").unwrap();
    let p1 = MeshCoefficient::newton_p1_of(&hs).unwrap();
    let a = assemble_mesh(&mesh, &MeshCoefficient::Metric, Quadrature::Barycentric).unwrap();
    for rule in [Quadrature::Barycentric, Quadrature::ThreePoint] {
        let b = assemble_mesh(&mesh, &p1, rule).unwrap();
        assert!(max_abs_diff(&a.stiffness, &b.stiffness) < 1e-9);
    }
    // vertex-normal P₁ on the same mesh is close, not exact
    let c = assemble_mesh(&mesh, &MeshCoefficient::VertexNormalNewton1, Quadrature::Barycentric).unwrap();
    let rel = max_abs_diff(&a.stiffness, &c.stiffness) / a.stiffness.norm_one();
    assert!(rel < 0.05, "{rel}");
}

#[test]
fn structural_invariants_for_several_coefficients() {
    let ell = SurfaceMesh::icosphere(3, 1.0).scaled_axes([1.0, 1.0, 1.1]).unwrap();
    let hs = ImmersedHypersurface::parse("ellipsoid:1,1,1.1").unwrap();
    let coefs = [
        MeshCoefficient::Metric,
        MeshCoefficient::newton_p1_of(&hs).unwrap(),
        MeshCoefficient::VertexNormalNewton1,
        MeshCoefficient::custom("anisotropic", |_, x| {
            let s = 1.0 + 0.5 * x[2] * x[2];
            [[s, 0.2, 0.0], [0.2, 1.0, 0.1 * x[0]], [0.0, 0.1 * x[0], 2.0]]
        }),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for c in &coefs {
        let op = assemble_mesh(&ell, c, Quadrature::Barycentric).unwrap();
        let ch = op.checks();
        assert!(ch.stiffness_symmetric && ch.mass_symmetric, "{c:?}");
        assert!(ch.max_relative_row_sum < 1e-12, "{c:?}: {}", ch.max_relative_row_sum);
        let ones = vec![1.0; op.dim()];
        let mass1: f64 = op.mass.mul_vec(&ones).iter().sum();
        for _ in 0..5 {
            let mut u: Vec<f64> = (0..op.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = op.mass.mul_vec(&u).iter().sum::<f64>() / mass1;
            u.iter_mut().for_each(|x| *x -= mean);
            assert!(op.stiffness.quadratic_form(&u) > 0.0);
        }
    }
    let m = ChartManifold::parse(&format!("torus3:L={TAU},perturb=mix,eps=0.15")).unwrap();
    let grid = PeriodicGrid::uniform(&m, 6).unwrap();
    for phi in [SymmetricTensorField::metric(), SymmetricTensorField::ricci().scaled(-1.0)] {
        let op = assemble_grid(&grid, &phi, Quadrature::ThreePoint).unwrap();
        let ch = op.checks();
        assert!(ch.stiffness_symmetric && ch.mass_symmetric);
        assert!(ch.max_relative_row_sum < 1e-12);
    }
}

#[test]
fn assembly_is_bit_reproducible_across_thread_counts() {
    let mesh = SurfaceMesh::icosphere(3, 1.0).scaled_axes([1.0, 1.2, 0.9]).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| assemble_mesh(&mesh, &MeshCoefficient::VertexNormalNewton1, Quadrature::ThreePoint).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.stiffness.to_coo_text(), b.stiffness.to_coo_text());
    assert_eq!(a.mass, b.mass);
}

#[test]
fn coordinate_export_round_trips() {
    let op = assemble_mesh(&SurfaceMesh::icosphere(1, 1.0), &MeshCoefficient::Metric, Quadrature::Barycentric).unwrap();
    let text = op.stiffness.to_coo_text();
    let first: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
    assert_eq!((first[0], first[1]), ("1", "1"));
    assert_eq!(CsrMatrix::from_coo_text(op.dim(), &text).unwrap(), op.stiffness);
}

#[test]
fn off_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ico.off");
    let mesh = SurfaceMesh::icosphere(2, 1.0);
    mesh.write_off(&path).unwrap();
    let back = SurfaceMesh::read_off(&path).unwrap();
    assert_eq!(back, mesh);
    assert_eq!(back.stats().euler_characteristic, 2);
}

#[test]
fn degenerate_triangles_are_rejected() {
    let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 1e-4, 0.0], [0.5, 0.3, 1.0]];
    let f = vec![[0, 1, 2], [0, 3, 1], [1, 3, 2], [2, 3, 0]];
    assert!(matches!(SurfaceMesh::new(v, f), Err(Error::DegenerateElement { element: 0, .. })));
}

#[test]
fn non_symmetric_coefficients_are_rejected() {
    let mesh = SurfaceMesh::icosphere(1, 1.0);
    let c = MeshCoefficient::custom("skew", |_, _| [[1.0, 0.3, 0.0], [-0.3, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    assert!(matches!(assemble_mesh(&mesh, &c, Quadrature::Barycentric), Err(Error::NonSymmetricCoefficient { .. })));
    let skew = SymmetricTensorField::from_fn("skew", |_, x: &[Jet]| {
        let c = |v: f64| x[0].constant_like(v);
        vec![c(1.0), c(0.2), c(-0.2), c(1.0)]
    });
    let grid = PeriodicGrid::uniform(&flat_torus(), 4).unwrap();
    assert!(matches!(assemble_grid(&grid, &skew, Quadrature::Barycentric), Err(Error::NonSymmetricCoefficient { .. })));
}

#[test]
fn icosphere_consistency_converges_weakly() {
    let levels: Vec<SurfaceMesh> = (2..6).map(|s| SurfaceMesh::icosphere(s, 1.0)).collect();
    let rep = mesh_consistency(&levels, &MeshCoefficient::Metric, Quadrature::Barycentric, &|x| Ok((x[0], 2.0 * x[0]))).unwrap();
    let w = rep.observed_weak_order().unwrap();
    assert!((1.8..2.3).contains(&w), "{rep:?}");
    // nodal errors near the irregular vertices do not vanish on this mesh family
    assert!(rep.levels.last().unwrap().max_error > 0.1);
    let constant = mesh_consistency(&levels[..2], &MeshCoefficient::Metric, Quadrature::Barycentric, &|_| Ok((3.0, 0.0))).unwrap();
    assert!(constant.levels.iter().all(|l| l.max_error < 1e-12 && l.weak_error < 1e-12));
}

#[test]
fn ellipsoid_newton_operator_is_weakly_consistent() {
    // L₁ is divergence-form on any hypersurface of a space form, so M⁻¹K f
    // tracks −L₁ f computed from jets on the smooth surface.
    let hs = ImmersedHypersurface::parse("ellipsoid:1,1,1.1").unwrap();
    let boxop = bochner_core::boxop::BoxOperator::newton_l1(&hs);
    let f = ScalarField::generic();
    let levels: Vec<SurfaceMesh> =
        (2..5).map(|s| SurfaceMesh::icosphere(s, 1.0).scaled_axes([1.0, 1.0, 1.1]).unwrap()).collect();
    let sample = |x: [f64; 3]| {
        let w = [x[0], x[1], x[2] / 1.1];
        let pt = bochner_core::geometry::sphere_point_from_unit(&w);
        Ok((f.value(hs.induced(), &pt), -boxop.apply(&f, &pt)?))
    };
    let coef = MeshCoefficient::newton_p1_of(&hs).unwrap();
    let rep = mesh_consistency(&levels, &coef, Quadrature::Barycentric, &sample).unwrap();
    let w = rep.observed_weak_order().unwrap();
    assert!(w > 1.7, "{rep:?}");
}

#[test]
fn grid_consistency_is_second_order() {
    let flat = flat_torus();
    let rep = grid_consistency(&flat, &[16, 32, 64], &SymmetricTensorField::metric(), &ScalarField::harmonic(0), Quadrature::Barycentric).unwrap();
    assert!((rep.observed_order().unwrap() - 2.0).abs() < 0.1, "{rep:?}");
    let mixed = ChartManifold::parse(&format!("torus2:L={TAU},perturb=mix,eps=0.2")).unwrap();
    let rep = grid_consistency(&mixed, &[16, 32, 64], &SymmetricTensorField::metric(), &ScalarField::generic(), Quadrature::Barycentric).unwrap();
    assert!((rep.observed_order().unwrap() - 2.0).abs() < 0.15, "{rep:?}");
    let aniso = SymmetricTensorField::from_fn("constant-anisotropic", |_, x: &[Jet]| {
        let c = |v: f64| x[0].constant_like(v);
        vec![c(1.5), c(0.3), c(0.3), c(0.8)]
    });
    let rep = grid_consistency(&flat, &[16, 32, 64], &aniso, &ScalarField::generic(), Quadrature::Barycentric).unwrap();
    assert!((rep.observed_order().unwrap() - 2.0).abs() < 0.15, "{rep:?}");
}

#[test]
fn non_divergence_free_coefficient_shows_order_one_discrepancy() {
    let bad = SymmetricTensorField::from_fn("(1+sin/2)g", |_, x: &[Jet]| {
        let s = x[0].sin() * 0.5 + 1.0;
        let z = x[0].constant_like(0.0);
        vec![s.clone(), z.clone(), z, s]
    });
    let rep = grid_consistency(&flat_torus(), &[16, 32, 64], &bad, &ScalarField::generic(), Quadrature::Barycentric).unwrap();
    let last = rep.levels.last().unwrap();
    assert!(last.max_error > 0.1 * last.max_target && last.weak_error > 0.1, "{rep:?}");
    assert!(rep.observed_order().unwrap() < 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_symmetric_coefficients_keep_constants_in_the_kernel(
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in 0.5f64..2.0, s in 0usize..3
    ) {
        let mesh = SurfaceMesh::icosphere(s, 1.0).scaled_axes([1.0, 1.0 + 0.3 * a.abs(), 1.0]).unwrap();
        let coef = MeshCoefficient::custom("random", move |f, x| {
            let t = (f as f64 * 0.37).sin();
            [[d + a * t, b, c * x[0]], [b, d, a * x[1]], [c * x[0], a * x[1], d + t * t]]
        });
        let op = assemble_mesh(&mesh, &coef, Quadrature::ThreePoint).unwrap();
        let ch = op.checks();
        prop_assert!(ch.stiffness_symmetric && ch.mass_symmetric);
        prop_assert!(ch.max_relative_row_sum < 1e-12);
    }
}
