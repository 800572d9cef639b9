//! Derivative modes: exact Taylor jets or central finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{table, Jet};

/// How partial derivatives of chart-level quantities are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DerivativeMode {
    /// Exact derivatives through Taylor-jet arithmetic.
    Analytic,
    /// Central differences with the given step; at most second order.
    FiniteDifference(f64),
}

impl DerivativeMode {
    pub fn is_analytic(&self) -> bool {
        matches!(self, DerivativeMode::Analytic)
    }
}

/// Evaluate `compute` as jets of the requested order at `p`.
///
/// In analytic mode `compute` is called directly with `order`. In finite
/// difference mode it is only ever called with order 0 and the higher
/// coefficients come from a central stencil around `p`. Because `compute`
/// itself may request finite-difference inputs, derived quantities are
/// differenced level by level.
pub fn jets_with_mode<F>(mode: DerivativeMode, p: &[f64], order: usize, compute: F) -> Result<Vec<Jet>>
where
    F: Fn(&[f64], usize) -> Result<Vec<Jet>>,
{
    match mode {
        DerivativeMode::Analytic => compute(p, order),
        DerivativeMode::FiniteDifference(h) => {
            if order == 0 {
                compute(p, 0)
            } else {
                fd_stencil(p, order, h, |q| Ok(compute(q, 0)?.iter().map(Jet::value).collect()))
            }
        }
    }
}

/// Central-difference jets (order ≤ 2) of a vector-valued function.
pub fn fd_stencil<F>(p: &[f64], order: usize, h: f64, f: F) -> Result<Vec<Jet>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if order > 2 {
        return Err(Error::InsufficientSmoothness { order });
    }
    let n = p.len();
    let tab = table(n);
    let f0 = f(p)?;
    let mut coeffs: Vec<Vec<f64>> = f0
        .iter()
        .map(|&v| {
            let mut c = vec![0.0; tab.len(order)];
            c[0] = v;
            c
        })
        .collect();
    if order == 0 {
        return Ok(coeffs.into_iter().map(|c| Jet::from_coefficients(&tab, 0, c)).collect());
    }
    let shifted = |steps: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(i, s) in steps {
            q[i] += s * h;
        }
        f(&q)
    };
    let mut exps = vec![0u8; n];
    for i in 0..n {
        let fp = shifted(&[(i, 1.0)])?;
        let fm = shifted(&[(i, -1.0)])?;
        for (k, c) in coeffs.iter_mut().enumerate() {
            c[1 + i] = (fp[k] - fm[k]) / (2.0 * h);
        }
        if order == 2 {
            exps[i] = 2;
            let idx = tab.index_of(&exps).expect("degree-2 monomial");
            exps[i] = 0;
            for (k, c) in coeffs.iter_mut().enumerate() {
                c[idx] = (fp[k] - 2.0 * f0[k] + fm[k]) / (2.0 * h * h);
            }
        }
    }
    if order == 2 {
        for i in 0..n {
            for j in i + 1..n {
                let fpp = shifted(&[(i, 1.0), (j, 1.0)])?;
                let fpm = shifted(&[(i, 1.0), (j, -1.0)])?;
                let fmp = shifted(&[(i, -1.0), (j, 1.0)])?;
                let fmm = shifted(&[(i, -1.0), (j, -1.0)])?;
                exps[i] = 1;
                exps[j] = 1;
                let idx = tab.index_of(&exps).expect("degree-2 monomial");
                exps[i] = 0;
                exps[j] = 0;
                for (k, c) in coeffs.iter_mut().enumerate() {
                    c[idx] = (fpp[k] - fpm[k] - fmp[k] + fmm[k]) / (4.0 * h * h);
                }
            }
        }
    }
    Ok(coeffs.into_iter().map(|c| Jet::from_coefficients(&tab, order, c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_matches_jets_to_second_order() {
        let p = [0.3, -0.4];
        let f = |x: &[Jet]| vec![(&x[0] * &x[1]).sin() + x[0].exp()];
        let exact = f(&Jet::seed(&p, 2));
        let errs: Vec<f64> = [1e-2, 5e-3]
            .iter()
            .map(|&h| {
                let fd = fd_stencil(&p, 2, h, |q| {
                    let x = Jet::seed(q, 0);
                    Ok(f(&x).iter().map(Jet::value).collect())
                })
                .unwrap();
                fd[0]
                    .coefficients()
                    .iter()
                    .zip(exact[0].coefficients())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn third_order_is_rejected() {
        let r = fd_stencil(&[0.0], 3, 1e-3, |q| Ok(vec![q[0]]));
        assert_eq!(r.unwrap_err(), Error::InsufficientSmoothness { order: 3 });
    }
}
