use std::path::Path;
use std::process::{Command, Output};

use bochner_core::discretize::SurfaceMesh;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectra-bochner")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn bound_subcommands() {
    let o = run(&["bound", "schouten", "--n", "4", "--R", "12", "--K0", "1", "--L0", "3", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!((v["bound"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(v["derived"]["gamma"], 6.0);

    let o = run(&["bound", "l1", "--n", "2", "--kappa", "-1", "--alpha", "2", "--a", "1", "--sigma", "0", "--mu", "12", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["report"]["verdict"], "equality-case");

    // below the bound
    let o = run(&["bound", "l1", "--n", "2", "--kappa", "0", "--alpha", "1", "--mu", "1.5"]);
    assert_eq!(code(&o), 1);

    let o = run(&["bound", "schouten", "--n", "3", "--R", "6", "--K0", "1", "--L0", "2", "--json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["error"], "DimensionTooSmall");
    let o = run(&["bound", "schouten", "--n", "4", "--R", "2", "--K0", "1", "--L0", "3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn eig_on_an_off_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sphere.off");
    SurfaceMesh::icosphere(3, 1.0).write_off(&path).unwrap();
    let o = run(&["eig", "--mesh", path.to_str().unwrap(), "--operator", "laplacian", "--k", "5", "--tol", "1e-9", "--seed", "42"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let ev: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(ev.len(), 5);
    assert!(ev[..3].iter().all(|m| (m - 2.0).abs() < 0.05), "{ev:?}");
    assert!(ev[3] > 5.5);
    assert!(v["residuals"].as_array().unwrap().iter().all(|r| r.as_f64().unwrap() <= 1e-9));
    assert_eq!(v["mesh"]["vertices"], 642);
    assert_eq!(v["mesh"]["euler_characteristic"], 2);

    // P₁ = I on the unit sphere, so L₁ = Δ
    let o = run(&["eig", "--mesh", path.to_str().unwrap(), "--operator", "newton1", "--k", "3"]);
    assert_eq!(code(&o), 0);
    let mu = json(&o)["eigenvalues"][0].as_f64().unwrap();
    assert!((mu - ev[0]).abs() < 0.05 * ev[0], "{mu}");

    let bad = write(dir.path(), "bad.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n");
    let o = run(&["eig", "--mesh", &bad, "--json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["error"], "MeshFormat");
}

#[test]
fn verify_emits_a_residual_table() {
    let o = run(&["verify", "bochner", "--manifold", "sphere:n=4,K=1", "--phi", "schouten", "--f", "generic", "--c", "0,1,7.3", "--samples", "4"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["rows"].as_array().unwrap().len(), 12);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-8);

    let o = run(&["verify", "bochner", "--manifold", "ellipsoid:1,1.2,1.5", "--phi", "newton1", "--samples", "3"]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["passed"].as_bool().unwrap());

    assert_eq!(code(&run(&["verify", "bochner", "--manifold", "torus2", "--phi", "schouten"])), 2);
    assert_eq!(code(&run(&["verify", "bochner", "--manifold", "torus2", "--phi", "skewed:amp=0.3", "--samples", "2"])), 2);
    assert_eq!(code(&run(&["verify", "divergence", "--manifold", "torus3:perturb=mix,eps=0.1", "--samples", "5"])), 0);
}

#[test]
fn check_runs_configured_suites() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.toml", "[suites]\nrun = [\"newton\", \"qa\"]\ntrials = 1000\n");
    let o = run(&["--config", &ok, "--seed", "9", "--json", "check"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"][0]["data"]["seed"], 9);

    let corrupted = write(
        dir.path(),
        "corrupt.toml",
        "[manifold]\nmanifolds = [\"torus2\"]\ntensors = [\"skewed:amp=0.3\"]\npoints = 3\n[suites]\nrun = [\"bochner\"]\n",
    );
    let o = run(&["--config", &corrupted, "check"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("NonSymmetricCoefficient"));

    let failing = write(
        dir.path(),
        "fail.toml",
        "[manifold]\nsurface = \"sphere:r=1,n=2\"\n[solver]\nlevels = [2, 3, 4]\n[suites]\nrun = [\"ellipsoid-compare\"]\n",
    );
    assert_eq!(code(&run(&["--config", &failing, "check"])), 1);

    let broken = write(dir.path(), "broken.toml", "[solver]\ntol = \"tight\"\n");
    assert_eq!(code(&run(&["--config", &broken, "check"])), 2);
    assert_eq!(code(&run(&["check", "--suites", "bogus"])), 2);
}

#[test]
fn proptest_subcommand() {
    let o = run(&["--json", "proptest", "newton", "--trials", "3000", "--dim-max", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["violations"], 0);
    // the planted control must be caught
    assert_eq!(code(&run(&["proptest", "qa", "--trials", "3000", "--widen"])), 1);
    assert_eq!(code(&run(&["proptest", "qa", "--trials", "10", "--dim-min", "1"])), 2);
}

#[test]
fn report_compare_emits_csv() {
    let o = run(&["report", "compare", "--surface", "ellipsoid:1,1,1.1", "--refine", "2..4", "--samples", "100"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "subdiv,h,mu1,bound,margin,error_estimate,verdict");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.ends_with("inequality-holds")), "{text}");
    assert_eq!(code(&run(&["report", "compare", "--surface", "ellipsoid:1,1,1.1", "--refine", "4"])), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["bound", "schouten", "--n", "4"])), 2);
    assert_eq!(code(&run(&["eig"])), 2);
}
