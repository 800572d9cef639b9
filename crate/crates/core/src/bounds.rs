//! Closed-form lower bounds for `μ₁(□_S)` and `μ₁(L₁)`, hypothesis flags and
//! verdicts against computed or analytic eigenvalues.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    codazzi_defect, curvature_at, min_ricci, min_sectional, tensor::symmetric_eigenvalues, AtlasKind, ChartManifold,
    SamplePlan, SymmetricTensorField,
};
use crate::hypersurface::{q_lower_bound, ImmersedHypersurface, PinchingConstants};

/// Relative tolerance for equality when both sides are exact.
pub const ANALYTIC_EQUALITY_TOL: f64 = 1e-6;
/// Multiple of the refinement error estimate used as tolerance for discrete `μ₁`.
pub const FEM_ERROR_FACTOR: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchoutenHypotheses {
    /// Schouten tensor is Codazzi (equivalently `δW = 0` for `n ≥ 4`).
    pub harmonic_weyl_checked: bool,
    pub r_constant_checked: bool,
    /// `S ≻ 0`; with constant `R` this is `L₀ > R/(2(n−1)) > 0`.
    pub schouten_positive_checked: bool,
    /// Curvature constants come from sampling rather than closed forms.
    pub estimated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchoutenBoundInput {
    pub n: usize,
    /// Constant scalar curvature.
    pub r: f64,
    /// Sectional curvature lower bound.
    pub k0: f64,
    /// Ricci lower bound.
    pub l0: f64,
    pub hypotheses: SchoutenHypotheses,
}

impl SchoutenBoundInput {
    /// Hand-supplied constants. Harmonic Weyl and constant `R` are taken on
    /// trust; positivity of `S` is read off from `L₀`.
    pub fn new(n: usize, r: f64, k0: f64, l0: f64) -> Self {
        let mut s = SchoutenBoundInput {
            n,
            r,
            k0,
            l0,
            hypotheses: SchoutenHypotheses {
                harmonic_weyl_checked: true,
                r_constant_checked: true,
                schouten_positive_checked: true,
                estimated: false,
            },
        };
        s.hypotheses.schouten_positive_checked = s.lambda0() > 0.0 && r > 0.0;
        s
    }

    /// Lower bound of the Schouten tensor implied by `L₀`.
    pub fn lambda0(&self) -> f64 {
        self.l0 - self.r / (2.0 * (self.n as f64 - 1.0))
    }

    /// `Γ = L₀² − (R/(2(n−1)) + K₀)L₀ + ½K₀R`.
    pub fn gamma(&self) -> f64 {
        let nf = self.n as f64;
        self.l0 * self.l0 - (self.r / (2.0 * (nf - 1.0)) + self.k0) * self.l0 + 0.5 * self.k0 * self.r
    }

    /// Sample `R`, `K₀`, `L₀` and the three hypotheses on `m`.
    pub fn from_manifold(m: &ChartManifold, plan: &SamplePlan) -> Result<Self> {
        let n = m.dim();
        if n < 4 {
            return Err(Error::DimensionTooSmall { n, min: 4 });
        }
        let schouten = SymmetricTensorField::schouten();
        let pts = m.sample_points(plan.points.max(1), plan.seed);
        let per: Vec<(f64, f64, f64)> = pts
            .par_iter()
            .map(|pt| -> Result<(f64, f64, f64)> {
                let cb = curvature_at(m, pt)?;
                let s = cb.schouten.as_ref().ok_or(Error::SchoutenUndefined { n })?;
                let smin = symmetric_eigenvalues(s, n)[0];
                Ok((cb.scalar, smin, codazzi_defect(&schouten, m, pt)?))
            })
            .collect::<Result<_>>()?;
        let rmin = per.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let rmax = per.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let r = per.iter().map(|p| p.0).sum::<f64>() / per.len() as f64;
        let smin = per.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let codazzi = per.iter().map(|p| p.2).fold(0.0, f64::max);
        let scale = 1.0 + r.abs();
        Ok(SchoutenBoundInput {
            n,
            r,
            k0: min_sectional(m, plan)?,
            l0: min_ricci(m, plan)?,
            hypotheses: SchoutenHypotheses {
                harmonic_weyl_checked: codazzi <= 1e-8 * scale,
                r_constant_checked: rmax - rmin <= 1e-8 * scale,
                schouten_positive_checked: smin > 0.0,
                estimated: m.atlas_kind() != AtlasKind::AnalyticSphere,
            },
        })
    }
}

/// `(n−2)/(2(n−1)) · R/(R−2L₀) · Γ`.
pub fn schouten_bound(input: &SchoutenBoundInput) -> Result<f64> {
    let n = input.n;
    if n < 4 {
        return Err(Error::DimensionTooSmall { n, min: 4 });
    }
    let denom = input.r - 2.0 * input.l0;
    if !(denom > 0.0) {
        return Err(Error::DenominatorNonpositive { value: denom });
    }
    let nf = n as f64;
    Ok((nf - 2.0) / (2.0 * (nf - 1.0)) * (input.r / denom) * input.gamma())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NewtonHypotheses {
    /// `A ≥ αI` with `α > 0` held at every sample.
    pub convex_checked: bool,
    /// `(α, a, σ)` were sampled rather than known in closed form.
    pub estimated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonBoundInput {
    pub n: usize,
    pub kappa: f64,
    /// `αI ≤ A`.
    pub alpha: f64,
    /// `A ≤ aαI`.
    pub a: f64,
    /// Mean-curvature Hessian term; zero when `H` is constant.
    pub sigma: f64,
    pub hypotheses: NewtonHypotheses,
}

impl NewtonBoundInput {
    pub fn new(n: usize, kappa: f64, alpha: f64, a: f64, sigma: f64) -> Self {
        NewtonBoundInput {
            n,
            kappa,
            alpha,
            a,
            sigma,
            hypotheses: NewtonHypotheses { convex_checked: alpha > 0.0, estimated: false },
        }
    }

    pub fn from_pinching(hs: &ImmersedHypersurface, pc: &PinchingConstants) -> Self {
        let mut s = Self::new(hs.dim(), hs.kappa(), pc.alpha, pc.a, pc.sigma);
        // umbilic analytic surfaces report exact constants
        s.hypotheses.estimated = !(pc.a == 1.0 && pc.sigma == 0.0 && pc.constant_mean_curvature);
        s
    }

    /// Sample `(α, a, σ)` on `hs`. Fails with `NotConvex` when some principal
    /// curvature is nonpositive.
    pub fn from_hypersurface(hs: &ImmersedHypersurface, plan: &SamplePlan) -> Result<Self> {
        Ok(Self::from_pinching(hs, &hs.pinching_constants(plan)?))
    }

    /// `2(n−1)α³(n−a²) + 2κ(n−1)²α` for `κ > 0`, with `aα` in the last term
    /// for `κ ≤ 0`.
    pub fn c(&self) -> f64 {
        q_lower_bound(self.n, self.kappa, self.alpha, self.a)
    }
}

/// `½ · na/(na−1) · (C − σ)`.
pub fn newton_bound(input: &NewtonBoundInput) -> Result<f64> {
    let NewtonBoundInput { n, alpha, a, sigma, .. } = *input;
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    if !(alpha > 0.0) || !(a >= 1.0) || !sigma.is_finite() || !input.kappa.is_finite() {
        return Err(Error::InvalidInput(format!("need alpha > 0 and a >= 1, got alpha={alpha}, a={a}, sigma={sigma}")));
    }
    let na = n as f64 * a;
    Ok(0.5 * na / (na - 1.0) * (input.c() - sigma))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "operator", rename_all = "kebab-case")]
pub enum BoundInput {
    Schouten(SchoutenBoundInput),
    NewtonL1(NewtonBoundInput),
}

impl BoundInput {
    pub fn value(&self) -> Result<f64> {
        match self {
            BoundInput::Schouten(s) => schouten_bound(s),
            BoundInput::NewtonL1(s) => newton_bound(s),
        }
    }

    pub fn hypotheses(&self) -> BTreeMap<String, bool> {
        let mut out = BTreeMap::new();
        match self {
            BoundInput::Schouten(s) => {
                out.insert("harmonic_weyl".into(), s.hypotheses.harmonic_weyl_checked);
                out.insert("r_constant".into(), s.hypotheses.r_constant_checked);
                out.insert("schouten_positive".into(), s.hypotheses.schouten_positive_checked);
            }
            BoundInput::NewtonL1(s) => {
                out.insert("convex".into(), s.hypotheses.convex_checked);
            }
        }
        out
    }

    pub fn estimated(&self) -> bool {
        match self {
            BoundInput::Schouten(s) => s.hypotheses.estimated,
            BoundInput::NewtonL1(s) => s.hypotheses.estimated,
        }
    }
}

/// Where the eigenvalue on the other side of the comparison came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MuSource {
    Analytic { value: f64 },
    /// Discrete `μ₁` with a refinement error estimate.
    Computed { value: f64, error_estimate: f64 },
}

impl MuSource {
    pub fn value(&self) -> f64 {
        match *self {
            MuSource::Analytic { value } | MuSource::Computed { value, .. } => value,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    EqualityCase,
    InequalityHolds,
    HypothesisFailed,
    ViolationSuspected,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::EqualityCase => "equality-case",
            Verdict::InequalityHolds => "inequality-holds",
            Verdict::HypothesisFailed => "hypothesis-failed",
            Verdict::ViolationSuspected => "violation-suspected",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub input: BoundInput,
    pub bound_value: f64,
    pub computed_mu1: f64,
    pub error_estimate: Option<f64>,
    /// `computed_mu1 − bound_value`.
    pub margin: f64,
    /// Absolute tolerance used for the equality test.
    pub tolerance: f64,
    pub hypotheses: BTreeMap<String, bool>,
    pub estimated_hypotheses: bool,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Compare a bound with an eigenvalue. Tolerance is `1e-6·|bound|` for
/// analytic `μ₁` and three times the error estimate for discrete `μ₁`.
pub fn compare(input: &BoundInput, mu: MuSource) -> Result<BoundReport> {
    let bound = input.value()?;
    let computed = mu.value();
    let margin = computed - bound;
    let (tolerance, error_estimate) = match mu {
        MuSource::Analytic { .. } => (ANALYTIC_EQUALITY_TOL * bound.abs().max(f64::MIN_POSITIVE), None),
        MuSource::Computed { error_estimate, .. } => {
            let e = error_estimate.abs();
            ((FEM_ERROR_FACTOR * e).max(1e-12 * bound.abs()), Some(e))
        }
    };
    let hypotheses = input.hypotheses();
    let verdict = if hypotheses.values().any(|ok| !ok) {
        Verdict::HypothesisFailed
    } else if margin.abs() <= tolerance {
        Verdict::EqualityCase
    } else if margin > 0.0 {
        Verdict::InequalityHolds
    } else {
        Verdict::ViolationSuspected
    };
    let mut notes = Vec::new();
    if let BoundInput::Schouten(s) = input {
        let nf = s.n as f64;
        notes.push(format!(
            "gamma = {:.12} from L0^2 - (R/(2(n-1)) + K0) L0 + K0 R/2; on the unit sphere this is (n-1)(n-2) = {}, not (n-1)(n-2)/2",
            s.gamma(),
            (nf - 1.0) * (nf - 2.0)
        ));
    }
    if bound <= 0.0 {
        notes.push("bound is nonpositive and carries no information".into());
    }
    if input.estimated() {
        notes.push("hypothesis constants are sampling estimates".into());
    }
    Ok(BoundReport {
        input: input.clone(),
        bound_value: bound,
        computed_mu1: computed,
        error_estimate,
        margin,
        tolerance,
        hypotheses,
        estimated_hypotheses: input.estimated(),
        verdict,
        notes,
    })
}

/// Richardson extrapolation of a refinement sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementEstimate {
    pub extrapolated: f64,
    /// `|finest − extrapolated|`.
    pub error_estimate: f64,
    /// Order fitted to the last three levels, when they converge monotonically.
    pub observed_order: Option<f64>,
    /// Order used for the extrapolation.
    pub order_used: f64,
}

/// Extrapolate `values` measured at mesh sizes `h` (coarse to fine). With
/// three or more levels the order is fitted to the last three; otherwise, or
/// when the fit is not monotone, `default_order` is used.
pub fn richardson(h: &[f64], values: &[f64], default_order: f64) -> Result<RefinementEstimate> {
    if h.len() != values.len() || h.len() < 2 {
        return Err(Error::InvalidInput("richardson needs at least two (h, value) levels".into()));
    }
    if h.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
        return Err(Error::InvalidInput("mesh sizes must be positive and strictly decreasing".into()));
    }
    let k = h.len();
    let observed = if k >= 3 { fit_order(&h[k - 3..], &values[k - 3..]) } else { None };
    let p = observed.unwrap_or(default_order);
    let (hc, hf) = (h[k - 2], h[k - 1]);
    let (vc, vf) = (values[k - 2], values[k - 1]);
    let extrapolated = vf + (vf - vc) / ((hc / hf).powf(p) - 1.0);
    Ok(RefinementEstimate { extrapolated, error_estimate: (vf - extrapolated).abs(), observed_order: observed, order_used: p })
}

/// Solve `(v₀−v₁)/(v₁−v₂) = (h₀ᵖ−h₁ᵖ)/(h₁ᵖ−h₂ᵖ)` for `p ∈ [0.25, 8]`.
fn fit_order(h: &[f64], v: &[f64]) -> Option<f64> {
    let (d1, d2) = (v[0] - v[1], v[1] - v[2]);
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return None;
    }
    let target = d1 / d2;
    let f = |p: f64| (h[0].powf(p) - h[1].powf(p)) / (h[1].powf(p) - h[2].powf(p)) - target;
    let (mut lo, mut hi) = (0.25, 8.0);
    if f(lo).signum() == f(hi).signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == f(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
