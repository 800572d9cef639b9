//! The operator `□f = Σ φ_ij f_ij`, its divergence form, and a pointwise
//! evaluator for the generalized Bochner identity
//!
//! ```text
//! ½□|∇f|² = ⟨∇f, ∇□f⟩ + ⟨φ(∇f), ∇Δf⟩ + 2Σ φ_ij f_jk f_ki + 2Σ f_i f_j φ_im R_mkjk
//!         + c Σ (tr φ)_ij f_i f_j − Σ f_i f_j Δφ_ij + Σ f_i f_j (Σ_k φ_ikk − c φ_kki)_j
//!         + Σ_k (Σ f_i f_j (φ_jik − φ_jki))_k − Σ_k (Σ f_j φ_ij f_ik)_k
//! ```
//!
//! All quantities are evaluated as exact coordinate jets, converted to the
//! Gram–Schmidt orthonormal frame, and contracted there. The two
//! divergence-form groups are expanded by the product rule.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::derivatives::jets_with_mode;
use crate::geometry::fields::riemann_jets;
use crate::geometry::tensor::{self, orthonormal_frame, to_frame, values};
use crate::geometry::{
    tensor_divergence, ChartManifold, ManifoldPoint, ScalarField, SymmetricTensorField,
};
use crate::hypersurface::ImmersedHypersurface;
use crate::jet::Jet;

/// Named operator presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OperatorName {
    Laplacian,
    Schouten,
    NewtonL1,
    Custom,
}

/// `□` for a symmetric tensor field on a manifold.
#[derive(Clone, Debug)]
pub struct BoxOperator {
    pub phi: SymmetricTensorField,
    pub manifold: ChartManifold,
    pub name: OperatorName,
}

impl BoxOperator {
    /// `φ = g`, so `□ = Δ`.
    pub fn laplacian(m: &ChartManifold) -> Self {
        BoxOperator { phi: SymmetricTensorField::metric(), manifold: m.clone(), name: OperatorName::Laplacian }
    }

    /// `φ = S`, the Schouten tensor (`n ≥ 3`).
    pub fn schouten(m: &ChartManifold) -> Result<Self> {
        if m.dim() < 3 {
            return Err(Error::SchoutenUndefined { n: m.dim() });
        }
        Ok(BoxOperator { phi: SymmetricTensorField::schouten(), manifold: m.clone(), name: OperatorName::Schouten })
    }

    /// `φ = P₁ = H I − A` on the induced metric of a hypersurface.
    pub fn newton_l1(hs: &ImmersedHypersurface) -> Self {
        BoxOperator { phi: hs.newton_p1(), manifold: hs.induced().clone(), name: OperatorName::NewtonL1 }
    }

    pub fn custom(m: &ChartManifold, phi: SymmetricTensorField) -> Self {
        BoxOperator { phi, manifold: m.clone(), name: OperatorName::Custom }
    }

    /// `tr(φ · Hess f)` at `pt`.
    pub fn apply(&self, f: &ScalarField, pt: &ManifoldPoint) -> Result<f64> {
        let m = &self.manifold;
        let n = m.dim();
        let g1 = m.metric_jets(pt, 1)?;
        let e = frame(m, pt)?;
        let gamma = tensor::christoffel(&g1, n);
        let f2 = f.jets(m, pt, 2)?;
        let grad: Vec<Jet> = (0..n).map(|i| f2.partial(i)).collect();
        let hess = to_frame(&values(&tensor::covariant_derivative(&grad, 1, n, &gamma)), 2, n, &e);
        let phi = to_frame(&self.phi.values(m, pt)?, 2, n, &e);
        Ok(phi.iter().zip(&hess).map(|(a, b)| a * b).sum())
    }

    /// `|□f − [div(φ∇f) − ⟨div φ, ∇f⟩]|`, with `div(V) = (1/√g) ∂_i(√g V^i)`
    /// computed independently of the Christoffel route used by [`apply`](Self::apply).
    pub fn divergence_form_defect(&self, f: &ScalarField, pt: &ManifoldPoint) -> Result<f64> {
        let m = &self.manifold;
        let n = m.dim();
        let boxf = self.apply(f, pt)?;
        let mode = m.chart(pt.chart).mode;
        let weighted = jets_with_mode(mode, &pt.coords, 1, |q, o| {
            let qp = ManifoldPoint::new(pt.chart, q.to_vec());
            let f1 = f.jets(m, &qp, o + 1)?;
            let phi = self.phi.jets(m, &qp, o)?;
            let g = m.metric_jets(&qp, o)?;
            let ginv = tensor::inverse(&g, n);
            let sqrt_g = tensor::determinant(&g, n).sqrt();
            let df: Vec<Jet> = (0..n).map(|j| f1.partial(j)).collect();
            // V^i = g^{ia} φ_ab g^{bj} f_j
            let mut raised = Vec::with_capacity(n);
            for b in 0..n {
                let mut acc = &ginv[b * n] * &df[0];
                for j in 1..n {
                    acc += &ginv[b * n + j] * &df[j];
                }
                raised.push(acc);
            }
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let mut acc = g[0].zero_like();
                for a in 0..n {
                    for b in 0..n {
                        acc += &ginv[i * n + a] * &phi[a * n + b] * &raised[b];
                    }
                }
                out.push(acc * &sqrt_g);
            }
            Ok(out)
        })?;
        let g0 = m.checked_metric(pt)?;
        let sqrt_g0 = nalgebra::DMatrix::from_row_slice(n, n, &g0).determinant().sqrt();
        let div_v: f64 = (0..n).map(|i| weighted[i].gradient()[i]).sum::<f64>() / sqrt_g0;
        let div_phi = tensor_divergence(&self.phi, m, pt)?;
        let e = frame(m, pt)?;
        let f1 = f.jets(m, pt, 1)?;
        let grad = to_frame(&f1.gradient(), 1, n, &e);
        let pairing: f64 = div_phi.iter().zip(&grad).map(|(a, b)| a * b).sum();
        Ok((boxf - (div_v - pairing)).abs())
    }

    /// Every term of the Bochner identity at `pt` for each `c` in `cs`.
    pub fn bochner_residual(&self, f: &ScalarField, pt: &ManifoldPoint, cs: &[f64]) -> Result<Vec<BochnerResidual>> {
        let ev = BochnerPoint::evaluate(self, f, pt)?;
        Ok(cs.iter().map(|&c| ev.residual(c)).collect())
    }

    /// `Σ φ_ij f_jk f_ki − (□f)² / tr φ` (requires `φ ≻ 0` at `pt`).
    pub fn hessian_trace_defect(&self, f: &ScalarField, pt: &ManifoldPoint) -> Result<f64> {
        let m = &self.manifold;
        let n = m.dim();
        let e = frame(m, pt)?;
        let phi = to_frame(&self.phi.values(m, pt)?, 2, n, &e);
        let min_eig = tensor::min_eigenvalue(&phi, n);
        if !(min_eig > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        let g1 = m.metric_jets(pt, 1)?;
        let gamma = tensor::christoffel(&g1, n);
        let f2 = f.jets(m, pt, 2)?;
        let grad: Vec<Jet> = (0..n).map(|i| f2.partial(i)).collect();
        let hess = to_frame(&values(&tensor::covariant_derivative(&grad, 1, n, &gamma)), 2, n, &e);
        let mut cubic = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    cubic += phi[i * n + j] * hess[j * n + k] * hess[k * n + i];
                }
            }
        }
        let boxf: f64 = phi.iter().zip(&hess).map(|(a, b)| a * b).sum();
        let tr: f64 = (0..n).map(|i| phi[i * n + i]).sum();
        Ok(cubic - boxf * boxf / tr)
    }
}

fn frame(m: &ChartManifold, pt: &ManifoldPoint) -> Result<Vec<f64>> {
    let g = m.checked_metric(pt)?;
    orthonormal_frame(&g, m.dim(), &pt.coords)
}

/// Right-hand-side terms of the Bochner identity, in order of appearance.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BochnerTerms {
    /// `⟨∇f, ∇(□f)⟩`
    pub grad_box: f64,
    /// `⟨φ(∇f), ∇(Δf)⟩`
    pub phi_grad_laplacian: f64,
    /// `2 Σ φ_ij f_jk f_ki`
    pub hessian_square: f64,
    /// `2 Σ f_i f_j φ_im R_mkjk`
    pub curvature: f64,
    /// `c Σ (tr φ)_ij f_i f_j`
    pub trace_hessian: f64,
    /// `−Σ f_i f_j Δφ_ij`
    pub laplacian_phi: f64,
    /// `Σ f_i f_j (Σ_k φ_ikk − c φ_kki)_j`
    pub divergence_gradient: f64,
    /// `Σ_k (Σ f_i f_j (φ_jik − φ_jki))_k`
    pub first_divergence_form: f64,
    /// `−Σ_k (Σ f_j φ_ij f_ik)_k`
    pub second_divergence_form: f64,
}

impl BochnerTerms {
    pub fn sum(&self) -> f64 {
        self.grad_box
            + self.phi_grad_laplacian
            + self.hessian_square
            + self.curvature
            + self.trace_hessian
            + self.laplacian_phi
            + self.divergence_gradient
            + self.first_divergence_form
            + self.second_divergence_form
    }
}

/// Both sides of the identity for one `c`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BochnerResidual {
    pub c: f64,
    pub lhs: f64,
    pub rhs_terms: BochnerTerms,
    pub residual: f64,
}

/// Frame components of every ingredient at one point.
struct BochnerPoint {
    n: usize,
    lhs: f64,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    p0: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
    riem: Vec<f64>,
    grad_box: Vec<f64>,
    grad_lap: Vec<f64>,
    hess_tr: Vec<f64>,
}

impl BochnerPoint {
    fn evaluate(op: &BoxOperator, f: &ScalarField, pt: &ManifoldPoint) -> Result<Self> {
        let m = &op.manifold;
        let n = m.dim();
        if !m.chart(pt.chart).mode.is_analytic() {
            return Err(Error::InsufficientSmoothness { order: 3 });
        }
        let e = frame(m, pt)?;
        let g = m.metric_jets(pt, 3)?;
        let ginv = tensor::inverse(&g, n);
        let gamma = tensor::christoffel(&g, n);
        let cov = |t: &[Jet], rank: usize| tensor::covariant_derivative(t, rank, n, &gamma);

        let fj = f.jets(m, pt, 3)?;
        let df: Vec<Jet> = (0..n).map(|i| fj.partial(i)).collect();
        let hess = cov(&df, 1);
        let third = cov(&hess, 2);

        let phi = op.phi.jets(m, pt, 2)?;
        let dphi = cov(&phi, 2);
        let ddphi = cov(&dphi, 3);

        // raised φ^{ij} = g^{ia} φ_ab g^{bj}
        let mut phi_up = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ginv[0].zero_like();
                for a in 0..n {
                    for b in 0..n {
                        acc += &ginv[i * n + a] * &phi[a * n + b] * &ginv[b * n + j];
                    }
                }
                phi_up.push(acc);
            }
        }
        let contract = |up: &[Jet], t: &[Jet]| -> Jet {
            let mut acc = &up[0] * &t[0];
            for k in 1..n * n {
                acc += &up[k] * &t[k];
            }
            acc
        };
        let boxf = contract(&phi_up, &hess);
        let lapf = contract(&ginv, &hess);
        let covector = |s: &Jet| to_frame(&s.gradient(), 1, n, &e);

        // left side from the composite u = |∇f|²
        let u = contract(&ginv, &{
            let mut outer = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    outer.push(&df[i] * &df[j]);
                }
            }
            outer
        });
        let du: Vec<Jet> = (0..n).map(|i| u.partial(i)).collect();
        let hess_u = cov(&du, 1);
        let lhs = 0.5 * contract(&phi_up, &hess_u).value();

        let tr_phi = contract(&ginv, &phi);
        let dtr: Vec<Jet> = (0..n).map(|i| tr_phi.partial(i)).collect();
        let hess_tr = to_frame(&values(&cov(&dtr, 1)), 2, n, &e);

        let riem = to_frame(&values(&riemann_jets(m, pt.chart, &pt.coords, 0)?), 4, n, &e);
        Ok(BochnerPoint {
            n,
            lhs,
            f1: to_frame(&values(&df), 1, n, &e),
            f2: to_frame(&values(&hess), 2, n, &e),
            f3: to_frame(&values(&third), 3, n, &e),
            p0: to_frame(&values(&phi), 2, n, &e),
            p1: to_frame(&values(&dphi), 3, n, &e),
            p2: to_frame(&values(&ddphi), 4, n, &e),
            riem,
            grad_box: covector(&boxf),
            grad_lap: covector(&lapf),
            hess_tr,
        })
    }

    fn residual(&self, c: f64) -> BochnerResidual {
        let n = self.n;
        let f1 = |i: usize| self.f1[i];
        let f2 = |i: usize, j: usize| self.f2[i * n + j];
        let f3 = |i: usize, j: usize, k: usize| self.f3[(i * n + j) * n + k];
        let p0 = |i: usize, j: usize| self.p0[i * n + j];
        let p1 = |i: usize, j: usize, k: usize| self.p1[(i * n + j) * n + k];
        let p2 = |i: usize, j: usize, k: usize, l: usize| self.p2[((i * n + j) * n + k) * n + l];
        let r = |i: usize, j: usize, k: usize, l: usize| self.riem[((i * n + j) * n + k) * n + l];

        let mut t = BochnerTerms {
            grad_box: 0.0,
            phi_grad_laplacian: 0.0,
            hessian_square: 0.0,
            curvature: 0.0,
            trace_hessian: 0.0,
            laplacian_phi: 0.0,
            divergence_gradient: 0.0,
            first_divergence_form: 0.0,
            second_divergence_form: 0.0,
        };
        for k in 0..n {
            t.grad_box += f1(k) * self.grad_box[k];
        }
        for i in 0..n {
            for j in 0..n {
                let fifj = f1(i) * f1(j);
                t.phi_grad_laplacian += p0(i, j) * f1(i) * self.grad_lap[j];
                t.trace_hessian += c * self.hess_tr[i * n + j] * fifj;
                let mut lap_phi = 0.0;
                let mut div_grad = 0.0;
                for k in 0..n {
                    t.hessian_square += 2.0 * p0(i, j) * f2(j, k) * f2(k, i);
                    lap_phi += p2(i, j, k, k);
                    div_grad += p2(i, k, k, j) - c * p2(k, k, i, j);
                    for mm in 0..n {
                        t.curvature += 2.0 * fifj * p0(i, mm) * r(mm, k, j, k);
                    }
                    t.first_divergence_form += (f2(i, k) * f1(j) + f1(i) * f2(j, k)) * (p1(j, i, k) - p1(j, k, i))
                        + fifj * (p2(j, i, k, k) - p2(j, k, i, k));
                    t.second_divergence_form -=
                        f2(j, k) * p0(i, j) * f2(i, k) + f1(j) * p1(i, j, k) * f2(i, k) + f1(j) * p0(i, j) * f3(i, k, k);
                }
                t.laplacian_phi -= fifj * lap_phi;
                t.divergence_gradient += fifj * div_grad;
            }
        }
        let residual = (self.lhs - t.sum()).abs();
        BochnerResidual { c, lhs: self.lhs, rhs_terms: t, residual }
    }
}
