//! Coordinate tensor algebra on jets and orthonormal-frame contractions.
//!
//! Tensors are flat row-major vectors. A covariant tensor of rank `r` in
//! dimension `n` has `n^r` entries; index `(i, j, k)` sits at `(i*n + j)*n + k`.
//!
//! Curvature sign convention: [`riemann`] returns
//! `R_ijkl = ⟨Rm(e_i, e_j) e_k, e_l⟩` with
//! `Rm(U,V)W = ∇_V∇_U W − ∇_U∇_V W + ∇_{[U,V]}W`, so a round sphere of
//! curvature `K` has `R_ijkl = K (g_ik g_jl − g_il g_jk)` and
//! `ric_ij = Σ_k R_ikjk`.

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Inverse of a symmetric positive definite jet matrix (Gauss–Jordan, no pivoting).
pub fn inverse(g: &[Jet], n: usize) -> Vec<Jet> {
    let mut a: Vec<Jet> = g.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| g[0].constant_like(if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    for col in 0..n {
        let piv = a[col * n + col].recip();
        for j in 0..n {
            a[col * n + j] = &a[col * n + j] * &piv;
            inv[col * n + j] = &inv[col * n + j] * &piv;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row * n + col].clone();
            for j in 0..n {
                let da = &factor * &a[col * n + j];
                let di = &factor * &inv[col * n + j];
                a[row * n + j] -= da;
                inv[row * n + j] -= di;
            }
        }
    }
    inv
}

/// Determinant of a symmetric positive definite jet matrix.
pub fn determinant(g: &[Jet], n: usize) -> Jet {
    let mut a: Vec<Jet> = g.to_vec();
    let mut det = g[0].constant_like(1.0);
    for col in 0..n {
        let pivot = a[col * n + col].clone();
        det = &det * &pivot;
        let inv = pivot.recip();
        for row in col + 1..n {
            let factor = &a[row * n + col] * &inv;
            for j in col..n {
                let d = &factor * &a[col * n + j];
                a[row * n + j] -= d;
            }
        }
    }
    det
}

/// Christoffel symbols `Γ^l_ij` at `(l*n + i)*n + j`, one order below `g`.
pub fn christoffel(g: &[Jet], n: usize) -> Vec<Jet> {
    let ginv = inverse(g, n);
    let dg: Vec<Vec<Jet>> = g.iter().map(|gij| (0..n).map(|k| gij.partial(k)).collect()).collect();
    // first kind: Γ_kij = ½(∂_i g_jk + ∂_j g_ik − ∂_k g_ij)
    let mut first = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let v = (&dg[j * n + k][i] + &dg[i * n + k][j] - &dg[i * n + j][k]) * 0.5;
                first.push(v);
            }
        }
    }
    let mut out = Vec::with_capacity(n * n * n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = &ginv[l * n] * &first[i * n + j];
                for k in 1..n {
                    acc += &ginv[l * n + k] * &first[(k * n + i) * n + j];
                }
                out.push(acc);
            }
        }
    }
    out
}

/// Fully covariant curvature tensor (see module docs for the sign), two
/// orders below `g`.
pub fn riemann(g: &[Jet], n: usize, gamma: &[Jet]) -> Vec<Jet> {
    let gi = |l: usize, i: usize, j: usize| &gamma[(l * n + i) * n + j];
    // standard R^l_ijk = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik
    let mut up = Vec::with_capacity(n * n * n * n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = gi(l, j, k).partial(i) - gi(l, i, k).partial(j);
                    for m in 0..n {
                        v += gi(l, i, m) * gi(m, j, k) - gi(l, j, m) * gi(m, i, k);
                    }
                    up.push(v);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(n * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = -(&g[l * n] * &up[(i * n + j) * n + k]);
                    for m in 1..n {
                        v -= &g[l * n + m] * &up[((m * n + i) * n + j) * n + k];
                    }
                    out.push(v);
                }
            }
        }
    }
    out
}

/// `ric_ij = g^{kl} R_ikjl`.
pub fn ricci(riem: &[Jet], ginv: &[Jet], n: usize) -> Vec<Jet> {
    let r = |i: usize, j: usize, k: usize, l: usize| &riem[((i * n + j) * n + k) * n + l];
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = r(i, 0, j, 0) * &ginv[0];
            for k in 0..n {
                for l in 0..n {
                    if k == 0 && l == 0 {
                        continue;
                    }
                    acc += r(i, k, j, l) * &ginv[k * n + l];
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Full contraction `g^{ij} T_ij`.
pub fn trace(t: &[Jet], ginv: &[Jet], n: usize) -> Jet {
    let mut acc = &t[0] * &ginv[0];
    for k in 1..n * n {
        acc += &t[k] * &ginv[k];
    }
    acc
}

/// Constant-curvature tensor `K (g_ik g_jl − g_il g_jk)`.
pub fn space_form_riemann(g: &[Jet], n: usize, k: f64) -> Vec<Jet> {
    let mut out = Vec::with_capacity(n.pow(4));
    for i in 0..n {
        for j in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let v = &g[i * n + a] * &g[j * n + b] - &g[i * n + b] * &g[j * n + a];
                    out.push(v * k);
                }
            }
        }
    }
    out
}

/// Covariant derivative of a covariant tensor of rank `rank`; the new
/// derivative index is appended LAST. The result is one order below the
/// lower of `t`'s order and one above `gamma`'s.
pub fn covariant_derivative(t: &[Jet], rank: usize, n: usize, gamma: &[Jet]) -> Vec<Jet> {
    let size = n.pow(rank as u32);
    assert_eq!(t.len(), size);
    let mut out = Vec::with_capacity(size * n);
    let mut idx = vec![0usize; rank];
    for flat in 0..size {
        let mut rem = flat;
        for s in (0..rank).rev() {
            idx[s] = rem % n;
            rem /= n;
        }
        for k in 0..n {
            let mut v = t[flat].partial(k);
            for s in 0..rank {
                let stride = n.pow((rank - 1 - s) as u32);
                let base = flat - idx[s] * stride;
                for m in 0..n {
                    let g = &gamma[(m * n + k) * n + idx[s]];
                    v -= g * &t[base + m * stride];
                }
            }
            out.push(v);
        }
    }
    out
}

/// Values of a slice of jets.
pub fn values(t: &[Jet]) -> Vec<f64> {
    t.iter().map(Jet::value).collect()
}

/// Orthonormal frame by Gram–Schmidt on the coordinate basis in the inner
/// product `g`. Column `a` of the returned row-major matrix holds the
/// coordinate components of `e_a`.
pub fn orthonormal_frame(g: &[f64], n: usize, point: &[f64]) -> Result<Vec<f64>> {
    let ip = |u: &[f64], v: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += u[i] * g[i * n + j] * v[j];
            }
        }
        s
    };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for a in 0..n {
        let mut v = vec![0.0; n];
        v[a] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = ip(&v, b);
                for i in 0..n {
                    v[i] -= c * b[i];
                }
            }
        }
        let norm2 = ip(&v, &v);
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::NonPositiveMetric { point: point.to_vec(), min_eig: min_eigenvalue(g, n) });
        }
        let norm = norm2.sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let mut e = vec![0.0; n * n];
    for (a, b) in basis.iter().enumerate() {
        for i in 0..n {
            e[i * n + a] = b[i];
        }
    }
    Ok(e)
}

/// Components of a covariant tensor in the frame `e` (from [`orthonormal_frame`]).
pub fn to_frame(t: &[f64], rank: usize, n: usize, e: &[f64]) -> Vec<f64> {
    let mut cur = t.to_vec();
    for s in 0..rank {
        let stride = n.pow((rank - 1 - s) as u32);
        let mut next = vec![0.0; cur.len()];
        for (flat, slot) in next.iter_mut().enumerate() {
            let a = (flat / stride) % n;
            let base = flat - a * stride;
            let mut acc = 0.0;
            for i in 0..n {
                acc += cur[base + i * stride] * e[i * n + a];
            }
            *slot = acc;
        }
        cur = next;
    }
    cur
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &[f64], n: usize) -> f64 {
    symmetric_eigenvalues(a, n).into_iter().fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a symmetric matrix (ascending).
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_row_slice(n, n, a);
    let m = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Symmetric positive definiteness check with an error naming the point.
pub fn check_spd(g: &[f64], n: usize, point: &[f64]) -> Result<()> {
    let min_eig = min_eigenvalue(g, n);
    if min_eig > 0.0 && min_eig.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveMetric { point: point.to_vec(), min_eig })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_sphere_metric(x: &[Jet]) -> Vec<Jet> {
        // stereographic chart of the unit sphere
        let n = x.len();
        let r2 = x.iter().map(|v| v.square()).reduce(|a, b| a + b).unwrap();
        let conf = (r2 + 1.0).powi(2).recip() * 4.0;
        (0..n * n).map(|k| if k / n == k % n { conf.clone() } else { conf.zero_like() }).collect()
    }

    #[test]
    fn sphere_curvature_matches_space_form() {
        let n = 3;
        let x = Jet::seed(&[0.2, -0.3, 0.5], 2);
        let g = round_sphere_metric(&x);
        let gamma = christoffel(&g, n);
        let r = riemann(&g, n, &gamma);
        let expect = space_form_riemann(&g, n, 1.0);
        for (a, b) in r.iter().zip(&expect) {
            assert!((a.value() - b.value()).abs() < 1e-12);
        }
        let ric = ricci(&r, &inverse(&g, n), n);
        for i in 0..n {
            for j in 0..n {
                assert!((ric[i * n + j].value() - 2.0 * g[i * n + j].value()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn metric_is_parallel() {
        let n = 2;
        let x = Jet::seed(&[0.4, 0.1], 3);
        let g = round_sphere_metric(&x);
        let gamma = christoffel(&g, n);
        let dg = covariant_derivative(&g, 2, n, &gamma);
        for v in dg {
            assert!(v.coefficients().iter().all(|c| c.abs() < 1e-12));
        }
    }

    #[test]
    fn inverse_and_determinant() {
        let x = Jet::seed(&[0.3, 0.7], 2);
        let g = vec![&x[0] * &x[0] + 2.0, x[0].sin(), x[0].sin(), x[1].exp() + 1.0];
        let inv = inverse(&g, 2);
        let det = determinant(&g, 2);
        let det2 = &g[0] * &g[3] - &g[1] * &g[2];
        for (a, b) in det.coefficients().iter().zip(det2.coefficients()) {
            assert!((a - b).abs() < 1e-13);
        }
        let prod00 = &g[0] * &inv[0] + &g[1] * &inv[2];
        let prod01 = &g[0] * &inv[1] + &g[1] * &inv[3];
        assert!((prod00.value() - 1.0).abs() < 1e-14);
        assert!(prod01.coefficients().iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn frame_is_orthonormal() {
        let g = [2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0];
        let e = orthonormal_frame(&g, 3, &[0.0; 3]).unwrap();
        let gf = to_frame(&g, 2, 3, &e);
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((gf[a * 3 + b] - want).abs() < 1e-14);
            }
        }
    }
}
