"""Quick end-to-end check of the Python bindings.

    maturin develop --release -m crates/python/Cargo.toml
    python crates/python/python/smoke_test.py
"""

import math

import spectra_bochner as sb


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    # equality cases of both bounds
    assert close(sb.schouten_bound(4, 12.0, 1.0, 3.0), 4.0)
    assert close(sb.newton_bound(2, -1.0, 2.0), 12.0)
    rep = sb.newton_report(2, -1.0, 2.0, mu=12.0)
    assert rep["verdict"] == "equality-case", rep

    try:
        sb.schouten_bound(3, 6.0, 1.0, 2.0)
    except sb.InputError as e:
        assert "DimensionTooSmall" in str(e)
    else:
        raise AssertionError("n = 3 should be rejected")

    m = sb.Manifold("sphere:n=4,K=1")
    assert m.dim == 4
    k0, l0 = m.curvature_bounds(points=20)
    assert close(k0, 1.0) and close(l0, 3.0)

    op = sb.BoxOperator(m, "schouten")
    chart, x = m.sample_points(3, seed=1)[0]
    rows = op.bochner_residual("generic", chart, x, cs=[0.0, 1.0, 7.3])
    assert len(rows) == 3
    assert all(abs(r["residual"]) < 1e-8 for r in rows), rows
    assert op.hessian_trace_defect("generic", chart, x) >= -1e-12

    hs = sb.Hypersurface("ellipsoid:1,1,1.1")
    pc = hs.pinching_constants(points=100)
    assert 0.0 < pc["alpha"] <= 1.0, pc
    l1 = sb.BoxOperator.newton_l1(hs)
    chart, x = l1.manifold.sample_points(1)[0]
    assert math.isfinite(l1.apply("generic", chart, x))

    mesh = sb.Mesh.icosphere(3)
    assert mesh.stats()["euler_characteristic"] == 2
    again = sb.Mesh.from_off(mesh.to_off())
    assert len(again.vertices) == len(mesh.vertices)
    eig = mesh.eigenvalues("laplacian", k=3)
    assert all(abs(v - 2.0) < 0.05 for v in eig["eigenvalues"]), eig

    fem = sb.surface_eigenvalues("sphere:r=1,n=2", subdiv=4, k=1)
    assert abs(fem["eigenvalues"][0] - 2.0) < 0.01, fem

    newton = sb.newton_trials(trials=2000)
    assert newton["violations"] == 0
    planted = sb.qa_trials(trials=2000, widen=True)
    assert sum(b["violations"] for b in planted["branches"]) > 0

    summary = sb.run_suite('[suites]\nrun = ["newton", "qa"]\ntrials = 500\n')
    assert summary["passed"], summary

    print("smoke test passed")


if __name__ == "__main__":
    main()
