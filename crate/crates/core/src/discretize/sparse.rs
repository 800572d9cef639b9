//! Compressed sparse row storage for the assembled matrices.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Compress `(row, col, value)` triplets. Duplicates are summed in the
    /// order they appear, so a fixed triplet order gives bit-identical output.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        // stable: keeps the element order inside each (row, col) bucket
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len() / 2);
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len() / 2);
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside a {n}x{n} matrix");
            if last == Some((r, c)) {
                *data.last_mut().expect("non-empty") += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { n, indptr, indices, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.data[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// `A x`; rows run in parallel, each row sum is sequential, so the
    /// result does not depend on the thread count.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).into_par_iter().map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.n, self.triplets().map(|(i, j, v)| (j, i, v)).collect())
    }

    /// True iff the matrix equals its transpose bit for bit.
    pub fn is_exactly_symmetric(&self) -> bool {
        self.triplets().all(|(i, j, v)| self.get(j, i).to_bits() == v.to_bits())
            && self.transpose().nnz() == self.nnz()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut col = vec![0.0; self.n];
        for (_, j, v) in self.triplets() {
            col[j] += v.abs();
        }
        col.into_iter().fold(0.0, f64::max)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn row_abs_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum()).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        CsrMatrix { data: self.data.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::InvalidInput(format!("dimension mismatch {} vs {}", self.n, other.n)));
        }
        let trip = self.triplets().chain(other.triplets().map(|(i, j, v)| (i, j, s * v))).collect();
        Ok(Self::from_triplets(self.n, trip))
    }

    /// `P A Pᵀ` where row `i` moves to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_triplets(self.n, self.triplets().map(|(i, j, v)| (perm[i], perm[j], v)).collect())
    }

    /// Coordinate text `i j value`, 1-based, sorted by row then column.
    pub fn to_coo_text(&self) -> String {
        let mut s = String::with_capacity(self.nnz() * 32);
        for (i, j, v) in self.triplets() {
            s.push_str(&format!("{} {} {:.17e}\n", i + 1, j + 1, v));
        }
        s
    }

    pub fn from_coo_text(n: usize, text: &str) -> Result<Self> {
        let mut trip = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.is_empty() {
                continue;
            }
            let parse_err = || Error::InvalidInput(format!("bad coordinate line {}: '{line}'", ln + 1));
            if t.len() != 3 {
                return Err(parse_err());
            }
            let i: usize = t[0].parse().map_err(|_| parse_err())?;
            let j: usize = t[1].parse().map_err(|_| parse_err())?;
            let v: f64 = t[2].parse().map_err(|_| parse_err())?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err(parse_err());
            }
            trip.push((i - 1, j - 1, v));
        }
        Ok(Self::from_triplets(n, trip))
    }
}

/// Sparse Cholesky factorization of a symmetric positive definite matrix
/// (fill-reducing ordering and supernodal factorization from faer).
pub struct CholeskyFactor {
    n: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl CholeskyFactor {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let trip: Vec<Triplet<usize, usize, f64>> = a.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(a.n, a.n, &trip)
            .map_err(|e| Error::FactorizationFailure(format!("{e:?}")))?;
        let llt = mat.sp_cholesky(Side::Lower).map_err(|e| Error::FactorizationFailure(format!("{e:?}")))?;
        Ok(CholeskyFactor { n: a.n, llt })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.llt.solve_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Solve for several right-hand sides stored as columns.
    pub fn solve_many(&self, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut x = Mat::<f64>::from_fn(self.n, cols.len(), |i, j| cols[j][i]);
        self.llt.solve_in_place(x.as_mut());
        (0..cols.len()).map(|j| (0..self.n).map(|i| x[(i, j)]).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let a = CsrMatrix::from_triplets(3, vec![(2, 0, 1.0), (0, 1, 2.0), (2, 0, 0.5), (0, 0, 4.0), (1, 1, 3.0)]);
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.get(2, 0), 1.5);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![6.0, 3.0, 1.5]);
        assert_eq!(a.to_coo_text().lines().next().unwrap(), "1 1 4.00000000000000000e0");
        let back = CsrMatrix::from_coo_text(3, &a.to_coo_text()).unwrap();
        assert_eq!(back, a);
        assert!(!a.is_exactly_symmetric());
        let s = a.add_scaled(&a.transpose(), 1.0).unwrap();
        assert!(s.is_exactly_symmetric());
    }

    #[test]
    fn cholesky_solves_laplacian_plus_identity() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            t.push((i, (i + 1) % n, -1.0));
            t.push(((i + 1) % n, i, -1.0));
        }
        let a = CsrMatrix::from_triplets(n, t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = CholeskyFactor::new(&a).unwrap().solve(&b);
        let r = a.mul_vec(&x);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-12);
        }
        let bad = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(CholeskyFactor::new(&bad), Err(Error::FactorizationFailure(_))));
    }
}
