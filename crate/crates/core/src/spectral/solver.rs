//! Smallest nonzero eigenpairs of `K u = μ M u` with `K` singular on the
//! constants.
//!
//! Block Krylov iteration on the shift-inverted operator `(K + εM)⁻¹M`
//! restricted to the `M`-orthogonal complement of the constants, with full
//! reorthogonalization and Rayleigh–Ritz extraction on the pencil itself.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{AssembledOperator, CholeskyFactor, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenOptions {
    /// Number of nonzero eigenvalues wanted.
    pub k: usize,
    /// Bound on the residual `‖Ku − μMu‖ / ‖u‖` of every returned pair.
    pub tol: f64,
    pub seed: u64,
    pub max_restarts: usize,
    /// Basis size per cycle; 0 picks `max(40, 8(k+2))`.
    pub max_basis: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { k: 1, tol: 1e-9, seed: 42, max_restarts: 40, max_basis: 0 }
    }
}

impl EigenOptions {
    pub fn new(k: usize, tol: f64) -> Self {
        EigenOptions { k, tol, ..Default::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SolverDiagnostics {
    pub shift: f64,
    pub block_size: usize,
    pub operator_applications: usize,
    pub restarts: usize,
    pub basis_size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenResult {
    /// Ascending; the first entry is the smallest nonzero eigenvalue.
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal eigenvectors, one per eigenvalue.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Ku − μMu‖ / ‖u‖`; all at most `tol`.
    pub residuals: Vec<f64>,
    /// Residuals divided by `‖K‖₁ + |μ|‖M‖₁` (backward error).
    pub scaled_residuals: Vec<f64>,
    pub diagnostics: SolverDiagnostics,
}

impl EigenResult {
    pub fn mu1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest `|uᵢᵀ M uⱼ − δᵢⱼ|`.
    pub fn m_orthonormality_defect(&self, mass: &CsrMatrix) -> f64 {
        let mv: Vec<Vec<f64>> = self.eigenvectors.iter().map(|u| mass.mul_vec(u)).collect();
        let mut worst = 0.0f64;
        for (i, u) in self.eigenvectors.iter().enumerate() {
            for (j, w) in mv.iter().enumerate() {
                let d = dot(u, w) - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(d.abs());
            }
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

struct Basis<'a> {
    k: &'a CsrMatrix,
    m: &'a CsrMatrix,
    /// `M`-normalized constant vector and its `M` image.
    c: Vec<f64>,
    mc: Vec<f64>,
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
    kv: Vec<Vec<f64>>,
}

impl<'a> Basis<'a> {
    fn new(k: &'a CsrMatrix, m: &'a CsrMatrix) -> Self {
        let ones = vec![1.0; k.dim()];
        let m1 = m.mul_vec(&ones);
        let s = 1.0 / dot(&ones, &m1).sqrt();
        Basis { k, m, c: vec![s; k.dim()], mc: m1.iter().map(|x| x * s).collect(), v: vec![], mv: vec![], kv: vec![] }
    }

    fn clear(&mut self) {
        self.v.clear();
        self.mv.clear();
        self.kv.clear();
    }

    /// Remove the constant and current-basis components (`M` inner product).
    fn project_out(&self, x: &mut [f64]) {
        let a = dot(x, &self.mc);
        axpy(x, -a, &self.c);
        let coef: Vec<f64> = self.mv.par_iter().map(|mv| dot(x, mv)).collect();
        for (v, a) in self.v.iter().zip(coef) {
            axpy(x, -a, v);
        }
    }

    /// Orthonormalize `x` against the basis and append it. Returns false if
    /// the vector collapsed (already in the span).
    fn push(&mut self, mut x: Vec<f64>) -> bool {
        let mut mx = self.m.mul_vec(&x);
        let before = dot(&x, &mx).max(0.0).sqrt();
        if before == 0.0 || !before.is_finite() {
            return false;
        }
        for _ in 0..2 {
            self.project_out(&mut x);
        }
        mx = self.m.mul_vec(&x);
        let after = dot(&x, &mx).max(0.0).sqrt();
        if after <= 1e-10 * before {
            return false;
        }
        x.iter_mut().for_each(|v| *v /= after);
        mx.iter_mut().for_each(|v| *v /= after);
        self.kv.push(self.k.mul_vec(&x));
        self.v.push(x);
        self.mv.push(mx);
        true
    }

    fn len(&self) -> usize {
        self.v.len()
    }

    /// Ritz values (ascending) and coefficient vectors of `Vᵀ K V`.
    fn rayleigh_ritz(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let b = self.len();
        let mut h = DMatrix::<f64>::zeros(b, b);
        for i in 0..b {
            for j in i..b {
                let x = 0.5 * (dot(&self.v[i], &self.kv[j]) + dot(&self.v[j], &self.kv[i]));
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut idx: Vec<usize> = (0..b).collect();
        idx.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
        let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = idx.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
        (vals, vecs)
    }

    fn combine(&self, parts: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.c.len()];
        for (p, a) in parts.iter().zip(y) {
            axpy(&mut out, *a, p);
        }
        out
    }
}

/// The `k` smallest nonzero eigenpairs of `K u = μ M u`.
pub fn smallest_nonzero(op: &AssembledOperator, opts: &EigenOptions) -> Result<EigenResult> {
    let (k_mat, m_mat) = (&op.stiffness, &op.mass);
    let n = k_mat.dim();
    if opts.k == 0 || opts.k + 1 >= n {
        return Err(Error::InvalidInput(format!("cannot extract {} eigenvalues from a {n}-dimensional pencil", opts.k)));
    }
    let shift = 1e-8 * k_mat.trace() / m_mat.trace();
    let shifted = k_mat.add_scaled(m_mat, shift)?;
    let factor = CholeskyFactor::new(&shifted)?;
    let (k_norm, m_norm) = (k_mat.norm_one(), m_mat.norm_one());

    let block = (opts.k + 2).min(n - 1);
    let max_basis = if opts.max_basis == 0 { (8 * block).max(40) } else { opts.max_basis.max(2 * block) }.min(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect() };

    let mut basis = Basis::new(k_mat, m_mat);
    let mut start: Vec<Vec<f64>> = (0..block).map(|_| random_vec(&mut rng)).collect();
    let mut applications = 0usize;
    let mut best: Option<(f64, f64)> = None;

    for restart in 0..=opts.max_restarts {
        basis.clear();
        let mut x = std::mem::take(&mut start);
        loop {
            for v in x.drain(..) {
                if !basis.push(v) {
                    // breakdown: replace with a fresh random direction
                    let r = random_vec(&mut rng);
                    basis.push(r);
                }
            }
            if basis.len() + block > max_basis || basis.len() >= n - 1 {
                break;
            }
            let tail = basis.v[basis.len().saturating_sub(block)..].to_vec();
            let rhs: Vec<Vec<f64>> = tail.iter().map(|v| m_mat.mul_vec(v)).collect();
            x = factor.solve_many(&rhs);
            applications += x.len();
        }

        let (vals, coefs) = basis.rayleigh_ritz();
        let take = opts.k.min(vals.len());
        let mut vecs = Vec::with_capacity(take);
        let mut res = Vec::with_capacity(take);
        let mut scaled = Vec::with_capacity(take);
        for i in 0..take {
            let u = basis.combine(&basis.v, &coefs[i]);
            let ku = basis.combine(&basis.kv, &coefs[i]);
            let mu = basis.combine(&basis.mv, &coefs[i]);
            let r: Vec<f64> = ku.iter().zip(&mu).map(|(a, b)| a - vals[i] * b).collect();
            let rn = norm(&r) / norm(&u);
            res.push(rn);
            scaled.push(rn / (k_norm + vals[i].abs() * m_norm));
            vecs.push(u);
        }
        let worst = res.iter().copied().fold(0.0, f64::max);
        if best.is_none_or(|(_, r)| worst < r) {
            best = Some((vals[0], worst));
        }
        if worst <= opts.tol {
            return Ok(EigenResult {
                eigenvalues: vals[..take].to_vec(),
                eigenvectors: vecs,
                residuals: res,
                scaled_residuals: scaled,
                diagnostics: SolverDiagnostics {
                    shift,
                    block_size: block,
                    operator_applications: applications,
                    restarts: restart,
                    basis_size: basis.len(),
                },
            });
        }
        // thick restart from the leading Ritz vectors
        start = (0..block.min(coefs.len())).map(|i| basis.combine(&basis.v, &coefs[i])).collect();
    }
    let (best_value, residual) = best.expect("at least one cycle");
    Err(Error::NoConvergence { restarts: opts.max_restarts, residual, best_value })
}
