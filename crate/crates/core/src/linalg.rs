//! Small dense square matrices.
//!
//! Information matrices here are at most a handful of rows, so a plain
//! row-major buffer with an LU factorization is all that is needed.

use std::ops::{Index, IndexMut};

use crate::error::{DesignError, Result};

/// Reciprocal condition number (infinity norm) below which a matrix is
/// treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    /// `self += scale * v vᵀ`
    pub fn add_outer(&mut self, scale: f64, v: &[f64]) {
        debug_assert_eq!(v.len(), self.n);
        for i in 0..self.n {
            let si = scale * v[i];
            for j in 0..self.n {
                self.data[i * self.n + j] += si * v[j];
            }
        }
    }

    pub fn add_scaled(&mut self, scale: f64, other: &Matrix) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn scaled(&self, scale: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| v * scale).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Replaces the matrix with `(A + Aᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `vᵀ A v`
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Lu {
        Lu::new(self)
    }

    pub fn det(&self) -> f64 {
        self.lu().det()
    }

    /// Singular iff the LU factorization breaks down or the reciprocal
    /// condition number `1 / (‖A‖∞ ‖A⁻¹‖∞)` falls below
    /// `SINGULARITY_THRESHOLD`.
    pub fn is_singular(&self) -> bool {
        self.checked_inverse().is_none()
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.checked_inverse().ok_or(DesignError::SingularInformation)
    }

    fn checked_inverse(&self) -> Option<Matrix> {
        let lu = self.lu();
        let det = lu.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = lu.inverse();
        let rcond = 1.0 / (self.norm_inf() * inv.norm_inf());
        (rcond.is_finite() && rcond >= SINGULARITY_THRESHOLD).then_some(inv)
    }

    /// Numerical rank of a (not necessarily square) row set, by Gaussian
    /// elimination with partial pivoting.
    pub fn rank_of_rows(rows: &[Vec<f64>], rel_tol: f64) -> usize {
        if rows.is_empty() {
            return 0;
        }
        let cols = rows[0].len();
        let mut a: Vec<Vec<f64>> = rows.to_vec();
        let scale = a
            .iter()
            .flat_map(|r| r.iter())
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0;
        }
        let tol = rel_tol * scale;
        let mut rank = 0;
        for col in 0..cols {
            if rank == a.len() {
                break;
            }
            let (pivot, pivot_val) = (rank..a.len())
                .map(|r| (r, a[r][col].abs()))
                .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pivot_val <= tol {
                continue;
            }
            a.swap(rank, pivot);
            for r in (rank + 1)..a.len() {
                let factor = a[r][col] / a[rank][col];
                for c in col..cols {
                    a[r][c] -= factor * a[rank][c];
                }
            }
            rank += 1;
        }
        rank
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization with partial pivoting, `P A = L U` packed in one buffer.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    fn new(m: &Matrix) -> Self {
        let n = m.n;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for r in (k + 1)..n {
                let v = lu[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            if pivot == 0.0 {
                continue;
            }
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                for c in (k + 1)..n {
                    lu[r * n + c] -= factor * lu[k * n + c];
                }
            }
        }
        Lu { n, lu, perm, sign }
    }

    pub fn det(&self) -> f64 {
        (0..self.n).map(|i| self.lu[i * self.n + i]).product::<f64>() * self.sign
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.lu[i * n + k] * x[k];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.n;
        let mut inv = Matrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn det_and_inverse_of_known_matrix() {
        // F for {v2, v3, v4} of [1,2]^3 and its inverse (1/4)(4I - 11ᵀ).
        let f = Matrix::from_rows(&[vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 2.0]]);
        assert_relative_eq!(f.det(), 4.0, epsilon = 1e-14);
        let inv = f.inverse().unwrap();
        let expected = Matrix::from_rows(&[
            vec![0.75, -0.25, -0.25],
            vec![-0.25, 0.75, -0.25],
            vec![-0.25, -0.25, 0.75],
        ]);
        assert!(inv.max_abs_diff(&expected) < 1e-14);
        assert!(f.matmul(&inv).max_abs_diff(&Matrix::identity(3)) < 1e-14);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_relative_eq!(m.det(), -1.0);
        let inv = m.inverse().unwrap();
        assert!(inv.max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn singular_detection_is_scale_free() {
        let mut m = Matrix::zeros(2);
        m.add_outer(1.0, &[1.0, 2.0]);
        assert!(m.is_singular());
        assert_eq!(m.inverse(), Err(DesignError::SingularInformation));
        let tiny = Matrix::identity(3).scaled(1e-30);
        assert!(!tiny.is_singular());
        assert!(Matrix::zeros(2).is_singular());
        // badly scaled but well within double precision
        let mut m = Matrix::identity(3).scaled(1e-2);
        m.add_outer(1e9, &[1.0, 2.0, 2.0]);
        assert!(!m.is_singular());
        let mut near = Matrix::zeros(2);
        near.add_outer(1.0, &[1.0, 1.0]);
        near.add_outer(1e-15, &[1.0, -1.0]);
        assert!(near.is_singular());
    }

    #[test]
    fn rank_of_rows() {
        let rows = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]];
        assert_eq!(Matrix::rank_of_rows(&rows, 1e-12), 2);
        let full = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(Matrix::rank_of_rows(&full, 1e-12), 2);
    }
}
