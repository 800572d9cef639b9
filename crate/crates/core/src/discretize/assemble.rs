//! Weak-form assembly: `K_ab = ∫ ⟨φ(∇ψ_a), ∇ψ_b⟩`, `M_ab = ∫ ψ_a ψ_b`.

use rayon::prelude::*;
use serde::Serialize;

use super::coefficient::{MeshCoefficient, Quadrature};
use super::grid::PeriodicGrid;
use super::mesh::{dot, SurfaceMesh};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::{ManifoldPoint, SymmetricTensorField};

/// What an assembled operator was built from.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Provenance {
    pub coefficient: String,
    pub domain: String,
    pub quadrature: Quadrature,
    pub nodes: usize,
    pub elements: usize,
    /// Largest element edge (meshes) or grid spacing.
    pub h: f64,
}

/// Stiffness/mass pair of the generalized eigenproblem `K u = μ M u`.
#[derive(Clone, Debug, Serialize)]
pub struct AssembledOperator {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub provenance: Provenance,
}

/// Structural checks on an assembled pair.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OperatorChecks {
    pub stiffness_symmetric: bool,
    pub mass_symmetric: bool,
    /// `max_i |Σ_j K_ij| / Σ_j |K_ij|`.
    pub max_relative_row_sum: f64,
}

impl AssembledOperator {
    pub fn dim(&self) -> usize {
        self.stiffness.dim()
    }

    pub fn checks(&self) -> OperatorChecks {
        let rs = self.stiffness.row_sums();
        let ra = self.stiffness.row_abs_sums();
        let max_relative_row_sum = rs.iter().zip(&ra).map(|(s, a)| if *a > 0.0 { s.abs() / a } else { 0.0 }).fold(0.0, f64::max);
        OperatorChecks {
            stiffness_symmetric: self.stiffness.is_exactly_symmetric(),
            mass_symmetric: self.mass.is_exactly_symmetric(),
            max_relative_row_sum,
        }
    }

    /// Apply the same relabeling of unknowns to both matrices.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        AssembledOperator {
            stiffness: self.stiffness.permuted(perm),
            mass: self.mass.permuted(perm),
            provenance: self.provenance.clone(),
        }
    }
}

type Block = Vec<(usize, usize, f64)>;

fn compress(n: usize, blocks: Vec<(Block, Block)>) -> Result<(CsrMatrix, CsrMatrix)> {
    let mut kt = Vec::with_capacity(blocks.iter().map(|b| b.0.len()).sum());
    let mut mt = Vec::with_capacity(kt.capacity());
    for (k, m) in blocks {
        kt.extend(k);
        mt.extend(m);
    }
    let k = CsrMatrix::from_triplets(n, kt);
    let m = CsrMatrix::from_triplets(n, mt);
    if !k.is_exactly_symmetric() || !m.is_exactly_symmetric() {
        return Err(Error::NonSymmetricCoefficient { element: usize::MAX, asymmetry: f64::NAN });
    }
    Ok((k, m))
}

/// Piecewise-linear assembly on a triangle mesh with a per-face coefficient.
pub fn assemble_mesh(mesh: &SurfaceMesh, coef: &MeshCoefficient, rule: Quadrature) -> Result<AssembledOperator> {
    let prepared = coef.prepare(mesh);
    let blocks: Vec<(Block, Block)> = (0..mesh.faces().len())
        .into_par_iter()
        .map(|f| -> Result<(Block, Block)> {
            let phi = prepared.face_tensor(f, rule)?;
            let area = mesh.face_area(f);
            let grads = mesh.hat_gradients(f);
            let face = mesh.faces()[f];
            let mut e = [[0.0; 3]; 3];
            for a in 0..3 {
                let pg: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| phi[i][j] * grads[a][j]).sum());
                for b in 0..3 {
                    e[a][b] = area * dot(pg, grads[b]);
                }
            }
            let mut kb = Vec::with_capacity(9);
            let mut mb = Vec::with_capacity(9);
            for a in 0..3 {
                for b in 0..3 {
                    kb.push((face[a], face[b], 0.5 * (e[a][b] + e[b][a])));
                    let m = if a == b { area / 6.0 } else { area / 12.0 };
                    mb.push((face[a], face[b], m));
                }
            }
            Ok((kb, mb))
        })
        .collect::<Result<_>>()?;
    let (stiffness, mass) = compress(mesh.vertices().len(), blocks)?;
    let st = mesh.stats();
    Ok(AssembledOperator {
        stiffness,
        mass,
        provenance: Provenance {
            coefficient: coef.label(),
            domain: format!("mesh(V={}, F={})", st.vertices, st.faces),
            quadrature: rule,
            nodes: st.vertices,
            elements: st.faces,
            h: st.max_edge_length,
        },
    })
}

/// Cotangent-weight stiffness `½ Σ (cot α + cot β)(u_i − u_j)²`, built
/// directly from triangle angles. Used as an independent check of
/// [`assemble_mesh`] with `φ = g`.
pub fn cotangent_stiffness(mesh: &SurfaceMesh) -> CsrMatrix {
    let mut trip = Vec::with_capacity(mesh.faces().len() * 9);
    for (f, face) in mesh.faces().iter().enumerate() {
        let p = mesh.face_corners(f);
        for k in 0..3 {
            // angle at corner k is opposite the edge (k+1, k+2)
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let u = super::mesh::sub(p[i], p[k]);
            let v = super::mesh::sub(p[j], p[k]);
            let cot = dot(u, v) / super::mesh::norm(super::mesh::cross(u, v));
            let w = 0.5 * cot;
            trip.push((face[i], face[j], -w));
            trip.push((face[j], face[i], -w));
            trip.push((face[i], face[i], w));
            trip.push((face[j], face[j], w));
        }
    }
    CsrMatrix::from_triplets(mesh.vertices().len(), trip)
}

/// Multilinear assembly on a periodic grid. The coefficient enters as the
/// contravariant density `√g g⁻¹ φ g⁻¹`, sampled at cell centers
/// ([`Quadrature::Barycentric`]) or at the 2ⁿ Gauss points
/// ([`Quadrature::ThreePoint`]); basis products are always integrated
/// exactly by the Gauss rule.
pub fn assemble_grid(grid: &PeriodicGrid, phi: &SymmetricTensorField, rule: Quadrature) -> Result<AssembledOperator> {
    let n = grid.dim();
    let m = grid.manifold();
    let h = grid.spacing();
    let vol: f64 = h.iter().product();
    let corners = 1usize << n;
    let g1 = 0.5 - 0.5 / 3f64.sqrt();
    let gauss: Vec<Vec<f64>> = (0..corners).map(|q| (0..n).map(|d| if q >> d & 1 == 1 { 1.0 - g1 } else { g1 }).collect()).collect();
    let wq = 1.0 / corners as f64;
    // basis values and reference gradients at Gauss points
    let basis = |b: usize, xi: &[f64]| -> f64 { (0..n).map(|d| if b >> d & 1 == 1 { xi[d] } else { 1.0 - xi[d] }).product() };
    let dbasis = |b: usize, xi: &[f64], i: usize| -> f64 {
        let s = if b >> i & 1 == 1 { 1.0 } else { -1.0 };
        s / h[i] * (0..n).filter(|&d| d != i).map(|d| if b >> d & 1 == 1 { xi[d] } else { 1.0 - xi[d] }).product::<f64>()
    };
    let lo: Vec<f64> = m.chart(0).domain.iter().map(|(a, _)| *a).collect();

    let density = |cell: &[usize], xi: &[f64], elem: usize| -> Result<(Vec<f64>, f64)> {
        let x: Vec<f64> = (0..n).map(|d| lo[d] + (cell[d] as f64 + xi[d]) * h[d]).collect();
        let pt = ManifoldPoint::new(0, x);
        let g = m.chart(0).metric_values(&pt.coords);
        let p = phi.values(m, &pt)?;
        let norm = p.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((p[i * n + j] - p[j * n + i]).abs());
            }
        }
        if !(asym <= 1e-12 * norm.max(1.0)) {
            return Err(Error::NonSymmetricCoefficient { element: elem, asymmetry: asym });
        }
        let gm = nalgebra::DMatrix::from_row_slice(n, n, &g);
        let sq = gm.determinant().sqrt();
        let gm = gm.try_inverse().ok_or_else(|| Error::NonPositiveMetric { point: pt.coords.clone(), min_eig: 0.0 })?;
        let gi: Vec<f64> = (0..n * n).map(|k| gm[(k / n, k % n)]).collect();
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += gi[i * n + a] * p[a * n + b] * gi[b * n + j];
                    }
                }
                c[i * n + j] = sq * s;
            }
        }
        Ok((c, sq))
    };

    let cells = grid.node_count();
    let blocks: Vec<(Block, Block)> = (0..cells)
        .into_par_iter()
        .map(|cell_k| -> Result<(Block, Block)> {
            let cell = grid.multi_index(cell_k);
            let nodes: Vec<usize> = (0..corners)
                .map(|b| {
                    let idx: Vec<isize> = (0..n).map(|d| (cell[d] + (b >> d & 1)) as isize).collect();
                    grid.linear_index(&idx)
                })
                .collect();
            let center = vec![0.5; n];
            let at_center = if rule == Quadrature::Barycentric { Some(density(&cell, &center, cell_k)?) } else { None };
            let mut ke = vec![0.0; corners * corners];
            let mut me = vec![0.0; corners * corners];
            for xi in &gauss {
                let (c, sq) = match &at_center {
                    Some(v) => v.clone(),
                    None => density(&cell, xi, cell_k)?,
                };
                let grads: Vec<Vec<f64>> = (0..corners).map(|b| (0..n).map(|i| dbasis(b, xi, i)).collect()).collect();
                let vals: Vec<f64> = (0..corners).map(|b| basis(b, xi)).collect();
                for a in 0..corners {
                    let cg: Vec<f64> = (0..n).map(|i| (0..n).map(|j| c[i * n + j] * grads[a][j]).sum()).collect();
                    for b in 0..corners {
                        let kab: f64 = (0..n).map(|i| cg[i] * grads[b][i]).sum();
                        ke[a * corners + b] += wq * vol * kab;
                        me[a * corners + b] += wq * vol * sq * vals[a] * vals[b];
                    }
                }
            }
            let mut kb = Vec::with_capacity(corners * corners);
            let mut mb = Vec::with_capacity(corners * corners);
            for a in 0..corners {
                for b in 0..corners {
                    kb.push((nodes[a], nodes[b], 0.5 * (ke[a * corners + b] + ke[b * corners + a])));
                    mb.push((nodes[a], nodes[b], 0.5 * (me[a * corners + b] + me[b * corners + a])));
                }
            }
            Ok((kb, mb))
        })
        .collect::<Result<_>>()?;
    let (stiffness, mass) = compress(cells, blocks)?;
    Ok(AssembledOperator {
        stiffness,
        mass,
        provenance: Provenance {
            coefficient: phi.label(),
            domain: format!("grid({}, {:?})", m.label(), grid.resolution()),
            quadrature: rule,
            nodes: cells,
            elements: cells,
            h: h.iter().copied().fold(0.0, f64::max),
        },
    })
}
