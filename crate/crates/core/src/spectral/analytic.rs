//! Closed-form spectra on round spheres.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Operator whose spectrum is known in closed form on a round sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SphereOperator {
    Laplacian,
    /// `□_S = ((n−2)K/2) Δ` on `Sⁿ(K)`.
    Schouten,
    /// `L₁ = (n−1)α Δ` on a geodesic sphere with `A = αI` in the space
    /// form of curvature `κ`; the sphere itself has curvature `α² + κ`.
    NewtonL1 { alpha: f64, kappa: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphereEigenvalue {
    /// Spherical-harmonic degree.
    pub degree: usize,
    pub value: f64,
    pub multiplicity: usize,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of degree-`k` spherical harmonics on `Sⁿ`.
pub fn harmonic_multiplicity(n: usize, k: usize) -> usize {
    if k < 2 {
        return binomial(n + k, n);
    }
    binomial(n + k, n) - binomial(n + k - 2, n)
}

/// The first `modes` nonzero eigenvalues (degrees `1..=modes`) of `op` on
/// `Sⁿ(curvature)`. For [`SphereOperator::NewtonL1`] the curvature argument
/// is ignored; the sphere curvature is `α² + κ`.
pub fn analytic_sphere_spectrum(n: usize, curvature: f64, op: SphereOperator, modes: usize) -> Result<Vec<SphereEigenvalue>> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    let (factor, k_sphere) = match op {
        SphereOperator::Laplacian => (1.0, curvature),
        SphereOperator::Schouten => {
            if n < 3 {
                return Err(Error::SchoutenUndefined { n });
            }
            ((n as f64 - 2.0) * curvature / 2.0, curvature)
        }
        SphereOperator::NewtonL1 { alpha, kappa } => {
            if !(alpha > 0.0) || alpha * alpha + kappa <= 0.0 {
                return Err(Error::InvalidInput(format!("no geodesic sphere with alpha={alpha}, kappa={kappa}")));
            }
            ((n as f64 - 1.0) * alpha, alpha * alpha + kappa)
        }
    };
    if !(k_sphere > 0.0) {
        return Err(Error::InvalidInput(format!("sphere curvature must be positive, got {k_sphere}")));
    }
    Ok((1..=modes)
        .map(|k| SphereEigenvalue {
            degree: k,
            value: factor * (k * (k + n - 1)) as f64 * k_sphere,
            multiplicity: harmonic_multiplicity(n, k),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let mu = |n, k, op| analytic_sphere_spectrum(n, k, op, 1).unwrap()[0].value;
        assert_eq!(mu(4, 1.0, SphereOperator::Schouten), 4.0);
        assert_eq!(mu(2, 1.0, SphereOperator::NewtonL1 { alpha: 1.0, kappa: 0.0 }), 2.0);
        assert_eq!(mu(2, 1.0, SphereOperator::Laplacian), 2.0);
        assert_eq!(mu(3, 7.0, SphereOperator::NewtonL1 { alpha: 1.0, kappa: 1.0 }), 12.0);
        assert!(matches!(analytic_sphere_spectrum(2, 1.0, SphereOperator::Schouten, 1), Err(Error::SchoutenUndefined { n: 2 })));
        let s2 = analytic_sphere_spectrum(2, 1.0, SphereOperator::Laplacian, 3).unwrap();
        assert_eq!(s2.iter().map(|e| (e.value, e.multiplicity)).collect::<Vec<_>>(), vec![(2.0, 3), (6.0, 5), (12.0, 7)]);
        assert_eq!(harmonic_multiplicity(4, 1), 5);
    }
}
