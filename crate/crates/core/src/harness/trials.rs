//! Seeded random trials for the two pointwise matrix inequalities:
//! `tr(A²B) ≥ (tr AB)²/tr B` for symmetric `A` and SPD `B`, and the lower
//! bound on the diagonal of `Q(A)` under the pinching `αI ≤ A ≤ aαI`.
//!
//! Trial `t` draws from ChaCha8 keyed by the seed with stream `t`, so a run
//! is reproducible from `(seed, trials)` alone and does not depend on the
//! thread count. Aggregation only uses counts and min/max reductions done in
//! trial order.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hypersurface::{q_lower_bound, q_polynomial, ShapeData};

pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.9), key = seed, stream = trial index";

/// Normalized defects below this count as violations.
pub const VIOLATION_THRESHOLD: f64 = -1e-10;
/// Normalized defects below this (in absolute value) count as equality.
pub const EQUALITY_THRESHOLD: f64 = 1e-10;
/// `‖A − αI‖_F` above this on an equality hit is a false positive.
pub const SCALAR_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    pub trials: usize,
    pub dim_min: usize,
    pub dim_max: usize,
    pub seed: u64,
    /// Random symmetric `A` has entries uniform in `[−entry_bound, entry_bound]`.
    pub entry_bound: f64,
    /// Eigenvalue range of the SPD factor `B`.
    pub spd_eigen_range: (f64, f64),
    /// Every `scalar_every`-th trial uses a scalar `A` (0 disables).
    pub scalar_every: usize,
    pub alpha_range: (f64, f64),
    pub a_range: (f64, f64),
    /// `|κ|` is drawn from `[0, kappa_max]`.
    pub kappa_max: f64,
    /// Planted violation: draw `h_i ∈ [α/2, 2aα]` while still claiming `(α, a)`.
    pub widen: bool,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            trials: 100_000,
            dim_min: 2,
            dim_max: 8,
            seed: 42,
            entry_bound: 1.0,
            spd_eigen_range: (0.1, 10.0),
            scalar_every: 10,
            alpha_range: (0.2, 3.0),
            a_range: (1.0, 2.5),
            kappa_max: 3.0,
            widen: false,
        }
    }
}

impl TrialConfig {
    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn dim(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(self.dim_min.max(1)..=self.dim_max.max(self.dim_min.max(1)))
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo { rng.random_range(lo..hi) } else { lo }
}

/// `tr(A²B) − (tr AB)²/tr B` for row-major `n × n` matrices.
pub fn newton_defect(a: &[f64], b: &[f64], n: usize) -> f64 {
    let (a, b) = (DMatrix::from_row_slice(n, n, a), DMatrix::from_row_slice(n, n, b));
    let tr_b = b.trace();
    let tr_ab = (&a * &b).trace();
    (&a * &a * &b).trace() - tr_ab * tr_ab / tr_b
}

/// `‖A − (tr AB / tr B) I‖_F`.
pub fn distance_to_scalar(a: &[f64], b: &[f64], n: usize) -> f64 {
    let (am, bm) = (DMatrix::from_row_slice(n, n, a), DMatrix::from_row_slice(n, n, b));
    let alpha = (&am * &bm).trace() / bm.trace();
    (am - DMatrix::identity(n, n) * alpha).norm()
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, bound: f64) -> Vec<f64> {
    let x: Vec<f64> = (0..n * n).map(|_| rng.random_range(-bound..=bound)).collect();
    (0..n * n).map(|k| 0.5 * (x[k] + x[(k % n) * n + k / n])).collect()
}

/// `QΛQᵀ` with Haar-like `Q` (QR of a Gaussian matrix) and `Λ` uniform in `range`.
fn random_spd(rng: &mut ChaCha8Rng, n: usize, range: (f64, f64)) -> Vec<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| uniform(rng, range)));
    let b = &q * lam * q.transpose();
    let b = (&b + b.transpose()) * 0.5;
    (0..n * n).map(|k| b[(k / n, k % n)]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonTrialReport {
    pub generator: String,
    pub seed: u64,
    pub trials: usize,
    pub scalar_trials: usize,
    /// Trials with normalized defect below [`VIOLATION_THRESHOLD`].
    pub violations: usize,
    /// Smallest `defect / tr B` seen.
    pub worst_defect: f64,
    /// Trials with `|defect / tr B| <` [`EQUALITY_THRESHOLD`].
    pub equality_hits: usize,
    /// Equality hits whose `A` is not scalar.
    pub false_positives: usize,
    /// Scalar `A` that did not register as equality.
    pub missed_equalities: usize,
}

impl NewtonTrialReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.false_positives == 0 && self.missed_equalities == 0
    }
}

struct NewtonTrial {
    scalar: bool,
    defect: f64,
    distance: f64,
}

/// Random trials of `tr(A²B) ≥ (tr AB)²/tr B` with the equality detector.
pub fn newton_inequality_trials(cfg: &TrialConfig) -> NewtonTrialReport {
    let outcomes: Vec<NewtonTrial> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = cfg.rng(t as u64);
            let n = cfg.dim(&mut rng);
            let scalar = cfg.scalar_every > 0 && t % cfg.scalar_every == 0;
            let a = if scalar {
                let alpha = rng.random_range(-cfg.entry_bound..=cfg.entry_bound);
                (0..n * n).map(|k| if k / n == k % n { alpha } else { 0.0 }).collect()
            } else {
                random_symmetric(&mut rng, n, cfg.entry_bound)
            };
            let b = random_spd(&mut rng, n, cfg.spd_eigen_range);
            let tr_b: f64 = (0..n).map(|i| b[i * n + i]).sum();
            NewtonTrial { scalar, defect: newton_defect(&a, &b, n) / tr_b, distance: distance_to_scalar(&a, &b, n) }
        })
        .collect();
    let mut report = NewtonTrialReport {
        generator: GENERATOR.into(),
        seed: cfg.seed,
        trials: cfg.trials,
        scalar_trials: 0,
        violations: 0,
        worst_defect: f64::INFINITY,
        equality_hits: 0,
        false_positives: 0,
        missed_equalities: 0,
    };
    for o in &outcomes {
        report.scalar_trials += o.scalar as usize;
        report.worst_defect = report.worst_defect.min(o.defect);
        if o.defect < VIOLATION_THRESHOLD {
            report.violations += 1;
        }
        let hit = o.defect.abs() < EQUALITY_THRESHOLD;
        if hit {
            report.equality_hits += 1;
            if o.distance > SCALAR_TOLERANCE {
                report.false_positives += 1;
            }
        } else if o.scalar {
            report.missed_equalities += 1;
        }
    }
    report
}

/// `min_i Q(A)_ii` for `A = diag(h)`.
pub fn q_min_diagonal(h: &[f64], kappa: f64) -> f64 {
    let n = h.len();
    let a: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { h[k / n] } else { 0.0 }).collect();
    let q = q_polynomial(&ShapeData::from_matrix(n, a), kappa);
    (0..n).map(|i| q[i * n + i]).fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaSign {
    Positive,
    Nonpositive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QaBranchReport {
    pub kappa_sign: KappaSign,
    pub trials: usize,
    /// Trials with `(min Q_ii − bound)/α³ <` [`VIOLATION_THRESHOLD`].
    pub violations: usize,
    pub worst_margin: f64,
    /// Scalar trials with `a = 1`, where the bound is attained.
    pub equality_trials: usize,
    pub equality_mismatches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QaTrialReport {
    pub generator: String,
    pub seed: u64,
    /// True when the `h_i` range was deliberately widened.
    pub planted: bool,
    pub branches: Vec<QaBranchReport>,
}

impl QaTrialReport {
    pub fn violations(&self) -> usize {
        self.branches.iter().map(|b| b.violations).sum()
    }

    pub fn equality_mismatches(&self) -> usize {
        self.branches.iter().map(|b| b.equality_mismatches).sum()
    }
}

struct QaTrial {
    margin: f64,
    equality: bool,
}

/// `cfg.trials` trials per sign of `κ` comparing `min Q(A)_ii` with the
/// sign-matched lower bound. `A` is diagonal: `Q(A)` is a polynomial in `A`,
/// so any symmetric `A` reduces to this case in its eigenbasis.
pub fn qa_bound_trials(cfg: &TrialConfig) -> QaTrialReport {
    let branches = [KappaSign::Positive, KappaSign::Nonpositive]
        .into_iter()
        .enumerate()
        .map(|(bi, sign)| {
            let outcomes: Vec<QaTrial> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = cfg.rng(((bi as u64 + 1) << 40) | t as u64);
                    let n = cfg.dim(&mut rng);
                    let alpha = uniform(&mut rng, cfg.alpha_range);
                    let equality = cfg.scalar_every > 0 && t % cfg.scalar_every == 0 && !cfg.widen;
                    let a = if equality { 1.0 } else { uniform(&mut rng, cfg.a_range).max(1.0) };
                    let mag = uniform(&mut rng, (0.0, cfg.kappa_max));
                    let kappa = match sign {
                        KappaSign::Positive => mag.max(f64::MIN_POSITIVE),
                        KappaSign::Nonpositive => -mag,
                    };
                    let range = if cfg.widen { (0.5 * alpha, 2.0 * a * alpha) } else { (alpha, a * alpha) };
                    let h: Vec<f64> = (0..n).map(|_| uniform(&mut rng, range)).collect();
                    let margin = (q_min_diagonal(&h, kappa) - q_lower_bound(n, kappa, alpha, a)) / alpha.powi(3);
                    QaTrial { margin, equality }
                })
                .collect();
            let mut r = QaBranchReport {
                kappa_sign: sign,
                trials: cfg.trials,
                violations: 0,
                worst_margin: f64::INFINITY,
                equality_trials: 0,
                equality_mismatches: 0,
            };
            for o in &outcomes {
                r.worst_margin = r.worst_margin.min(o.margin);
                if o.margin < VIOLATION_THRESHOLD {
                    r.violations += 1;
                }
                if o.equality {
                    r.equality_trials += 1;
                    if o.margin.abs() > 1e-9 {
                        r.equality_mismatches += 1;
                    }
                }
            }
            r
        })
        .collect();
    QaTrialReport { generator: GENERATOR.into(), seed: cfg.seed, planted: cfg.widen, branches }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        assert!((newton_defect(&[1.0, 0.0, 0.0, 2.0], &[1.0, 0.0, 0.0, 1.0], 2) - 0.5).abs() < 1e-15);
        let b = [2.0, 0.3, 0.3, 0.7];
        assert!(newton_defect(&[3.0, 0.0, 0.0, 3.0], &b, 2).abs() < 1e-14);
        let q = q_min_diagonal(&[1.0, 1.1, 1.2], 1.0);
        assert!(q >= q_lower_bound(3, 1.0, 1.0, 1.2));
        assert!((q_lower_bound(3, 1.0, 1.0, 1.2) - 14.24).abs() < 1e-12);
    }

    #[test]
    fn small_runs_are_clean_and_reproducible() {
        let cfg = TrialConfig::default().with_trials(2000);
        let r = newton_inequality_trials(&cfg);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.equality_hits, r.scalar_trials);
        assert_eq!(r, newton_inequality_trials(&cfg));
        let q = qa_bound_trials(&cfg);
        assert_eq!((q.violations(), q.equality_mismatches()), (0, 0), "{q:?}");
        assert!(qa_bound_trials(&TrialConfig { widen: true, ..cfg }).violations() > 0);
    }
}
