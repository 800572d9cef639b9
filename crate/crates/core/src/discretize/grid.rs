//! Uniform periodic grids on flat-chart tori.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{AtlasKind, ChartManifold, ManifoldPoint};

/// Tensor-product grid on `[0, L_1) × … × [0, L_n)` with periodic wrap.
#[derive(Clone, Debug)]
pub struct PeriodicGrid {
    manifold: ChartManifold,
    lengths: Vec<f64>,
    res: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GridStats {
    pub dim: usize,
    pub resolution: Vec<usize>,
    pub lengths: Vec<f64>,
    pub nodes: usize,
    pub spacing: f64,
}

impl PeriodicGrid {
    /// Grid on a periodic-box manifold; the metric must be SPD at every node.
    pub fn new(manifold: &ChartManifold, res: Vec<usize>) -> Result<Self> {
        if manifold.atlas_kind() != AtlasKind::PeriodicBox {
            return Err(Error::InvalidInput(format!("'{}' is not a periodic box", manifold.label())));
        }
        let n = manifold.dim();
        if res.len() != n || res.iter().any(|&r| r < 3) {
            return Err(Error::InvalidInput(format!("need {n} resolutions, each at least 3")));
        }
        let lengths: Vec<f64> = manifold.chart(0).domain.iter().map(|(a, b)| b - a).collect();
        let grid = PeriodicGrid { manifold: manifold.clone(), lengths, res };
        for k in 0..grid.node_count() {
            let p = ManifoldPoint::new(0, grid.node_coords(k));
            let g = manifold.chart(0).metric_values(&p.coords);
            let min = crate::geometry::tensor::min_eigenvalue(&g, n);
            if !(min > 0.0) {
                return Err(Error::NonPositiveMetric { point: p.coords, min_eig: min });
            }
        }
        Ok(grid)
    }

    /// Same resolution along every axis.
    pub fn uniform(manifold: &ChartManifold, per_axis: usize) -> Result<Self> {
        Self::new(manifold, vec![per_axis; manifold.dim()])
    }

    pub fn manifold(&self) -> &ChartManifold {
        &self.manifold
    }

    pub fn dim(&self) -> usize {
        self.res.len()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.res
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.lengths.iter().zip(&self.res).map(|(l, r)| l / *r as f64).collect()
    }

    pub fn node_count(&self) -> usize {
        self.res.iter().product()
    }

    /// Multi-index of a node, first axis fastest.
    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        self.res
            .iter()
            .map(|&r| {
                let i = k % r;
                k /= r;
                i
            })
            .collect()
    }

    /// Linear index of a (possibly out-of-range) multi-index, with wrap.
    pub fn linear_index(&self, idx: &[isize]) -> usize {
        let mut k = 0;
        for d in (0..self.dim()).rev() {
            let r = self.res[d] as isize;
            k = k * self.res[d] + idx[d].rem_euclid(r) as usize;
        }
        k
    }

    pub fn node_coords(&self, k: usize) -> Vec<f64> {
        let h = self.spacing();
        let lo: Vec<f64> = self.manifold.chart(0).domain.iter().map(|(a, _)| *a).collect();
        self.multi_index(k).iter().enumerate().map(|(d, &i)| lo[d] + i as f64 * h[d]).collect()
    }

    pub fn node_point(&self, k: usize) -> ManifoldPoint {
        ManifoldPoint::new(0, self.node_coords(k))
    }

    pub fn stats(&self) -> GridStats {
        GridStats {
            dim: self.dim(),
            resolution: self.res.clone(),
            lengths: self.lengths.clone(),
            nodes: self.node_count(),
            spacing: self.spacing().into_iter().fold(0.0, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_and_indexing() {
        let m = ChartManifold::parse("torus2:L=6.283185307179586").unwrap();
        let g = PeriodicGrid::new(&m, vec![4, 5]).unwrap();
        assert_eq!(g.node_count(), 20);
        for k in 0..20 {
            let mi: Vec<isize> = g.multi_index(k).iter().map(|&i| i as isize).collect();
            assert_eq!(g.linear_index(&mi), k);
        }
        assert_eq!(g.linear_index(&[-1, 5]), g.linear_index(&[3, 0]));
    }
}
