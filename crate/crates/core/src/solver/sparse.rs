//! Compressed sparse rows and an envelope Cholesky factorization.

use crate::error::{Error, Result};
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries. Entries are accumulated in input order, so two
    /// mirrored triplet streams produce bit-identical mirrored sums.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows: n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zeros(n: usize) -> Self {
        CsrMatrix::from_triplets(n, Vec::new())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.nrows).all(|r| self.row(r).all(|(c, v)| self.get(c, r) == v))
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.nrows {
            t.extend(self.row(r).map(|(c, v)| (r, c, v)));
            t.extend(other.row(r).map(|(c, v)| (r, c, s * v)));
        }
        CsrMatrix::from_triplets(self.nrows, t)
    }

    /// Rows and columns restricted to `keep` (given in the new order).
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.nrows];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut t = Vec::new();
        for (new_r, &old_r) in keep.iter().enumerate() {
            for (c, v) in self.row(old_r) {
                if map[c] != usize::MAX {
                    t.push((new_r, map[c], v));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), t)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.nrows, self.nrows);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                d[(r, c)] = v;
            }
        }
        d
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern; `order[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|r| a.row(r).filter(|&(c, _)| c != r).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_last = |start: usize, visited: &[bool]| -> usize {
        let mut seen = visited.to_vec();
        let mut q = VecDeque::from([start]);
        seen[start] = true;
        let mut last = start;
        while let Some(v) = q.pop_front() {
            last = v;
            for (c, _) in a.row(v) {
                if !seen[c] {
                    seen[c] = true;
                    q.push_back(c);
                }
            }
        }
        last
    };
    loop {
        let Some(seed) = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (degree[v], v))
        else {
            break;
        };
        // Two sweeps towards a pseudo-peripheral start.
        let start = bfs_last(bfs_last(seed, &visited), &visited);
        let mut q = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = a.row(v).map(|(c, _)| c).filter(|&c| !visited[c]).collect();
            nb.sort_by_key(|&c| (degree[c], c));
            for c in nb {
                visited[c] = true;
                q.push_back(c);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope (skyline) `L L^T` factorization of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    order: Vec<usize>,
    first: Vec<usize>,
    ptr: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let order = reverse_cuthill_mckee(a);
        let mut pos = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (old_r, &r) in pos.iter().enumerate() {
            for (old_c, _) in a.row(old_r) {
                let c = pos[old_c];
                if c < r {
                    first[r] = first[r].min(c);
                }
            }
        }
        let mut ptr = vec![0usize; n + 1];
        for r in 0..n {
            ptr[r + 1] = ptr[r] + (r - first[r] + 1);
        }
        let mut values = vec![0.0; ptr[n]];
        let mut diag_scale = vec![0.0; n];
        for (old_r, &r) in pos.iter().enumerate() {
            for (old_c, v) in a.row(old_r) {
                let c = pos[old_c];
                if c <= r {
                    values[ptr[r] + c - first[r]] = v;
                }
                if c == r {
                    diag_scale[r] = v.abs();
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let row_i = ptr[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = values[row_i + j - fi];
                for k in k0..j {
                    s -= values[row_i + k - fi] * values[ptr[j] + k - fj];
                }
                values[row_i + j - fi] = s / values[ptr[j] + j - fj];
            }
            let mut d = values[row_i + i - fi];
            for k in fi..i {
                let l = values[row_i + k - fi];
                d -= l * l;
            }
            if !(d > 1e-13 * diag_scale[i]) {
                return Err(Error::SingularSystem(format!(
                    "matrix is not positive definite (pivot {d:e} at row {})",
                    order[i]
                )));
            }
            values[row_i + i - fi] = d.sqrt();
        }
        Ok(SkylineCholesky {
            order,
            first,
            ptr,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.order.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = self.ptr[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.values[row + k - fi] * y[k];
            }
            y[i] = s / self.values[row + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = self.ptr[i];
            y[i] /= self.values[row + i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.values[row + k - fi] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.order.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn triplets_are_summed() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(1, 0), 2.0);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn cholesky_solves_against_dense() {
        let n = 30;
        let a = laplacian_1d(n).add_scaled(&CsrMatrix::from_triplets(n, vec![(0, n - 1, 0.5), (n - 1, 0, 0.5)]), 1.0);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = SkylineCholesky::factor(&a).unwrap().solve(&b);
        let dense = a.to_dense().cholesky().unwrap().solve(&nalgebra::DVector::from_vec(b));
        for i in 0..n {
            assert!((x[i] - dense[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_detected() {
        let a = CsrMatrix::from_triplets(
            2,
            vec![(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)],
        );
        assert!(matches!(SkylineCholesky::factor(&a), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(17);
        let mut o = reverse_cuthill_mckee(&a);
        o.sort_unstable();
        assert_eq!(o, (0..17).collect::<Vec<_>>());
    }
}
