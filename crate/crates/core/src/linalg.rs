//! Banded Cholesky factorization for symmetric positive definite systems.
//!
//! The precision matrix `I − P_B` of a box in row-major order has bandwidth
//! `side^{d−1}`, so a banded factor is exact and much smaller than a dense one.

use crate::error::{Error, Result};

/// Lower factor `L` with `A = L Lᵀ`, stored row by row over the band.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    // row i holds L[i][i-bw ..= i]; entries left of column 0 are unused
    data: Vec<f64>,
}

impl BandedCholesky {
    /// Factor the matrix whose lower band entries are `entry(i, j)` for
    /// `i - bw <= j <= i`.
    pub fn factor(n: usize, bw: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = entry(i, j);
                for k in k0..j {
                    s -= data[i * w + (k + bw - i)] * data[j * w + (k + bw - j)];
                }
                if j == i {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::param("matrix", format!("not positive definite at row {i}")));
                    }
                    data[i * w + bw] = s.sqrt();
                } else {
                    data[i * w + (j + bw - i)] = s / data[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.bw + 1) + (j + self.bw - i)]
    }

    /// Solve `L y = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bw);
            let mut s = b[i];
            for j in j0..i {
                s -= self.l(i, j) * b[j];
            }
            b[i] = s / self.l(i, i);
        }
    }

    /// Solve `Lᵀ x = y` in place. With `y ~ N(0, I)` the result has
    /// covariance `A⁻¹`.
    pub fn backward(&self, y: &mut [f64]) {
        for i in (0..self.n).rev() {
            let x = y[i] / self.l(i, i);
            y[i] = x;
            let j0 = i.saturating_sub(self.bw);
            for j in j0..i {
                y[j] -= self.l(i, j) * x;
            }
        }
    }

    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        self.forward(b);
        self.backward(b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_inverse() {
        // I - P on {-1,0,1} with P the killed walk in d=1
        let a = |i: usize, j: usize| if i == j { 1.0 } else if i.abs_diff(j) == 1 { -0.5 } else { 0.0 };
        let f = BandedCholesky::factor(3, 1, a).unwrap();
        let mut e = vec![0.0, 1.0, 0.0];
        f.solve(&mut e);
        assert!((e[0] - 1.0).abs() < 1e-14);
        assert!((e[1] - 2.0).abs() < 1e-14);
        assert!((e[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_dense_product() {
        let n = 12;
        let bw = 3;
        let a = |i: usize, j: usize| {
            let k = i.abs_diff(j);
            if k == 0 { 4.0 + i as f64 * 0.1 } else if k <= bw { 0.3 / k as f64 } else { 0.0 }
        };
        let f = BandedCholesky::factor(n, bw, a).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a(i, j) * x[j]).sum()).collect();
        f.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = |i: usize, j: usize| if i == j { 1.0 } else { -2.0 };
        assert!(BandedCholesky::factor(2, 1, a).is_err());
    }
}
