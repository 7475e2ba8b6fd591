//! Symmetric banded linear algebra: storage, Cholesky factorization, solves.
//!
//! The discretized Dirichlet generator is, in its weighted-symmetric form, a
//! positive definite banded matrix (bandwidth 1 in 1D, one grid line in 2D).
//! A dedicated banded Cholesky keeps the desk-scale solves dependency-free
//! and comfortably fast up to 512x512 interior grids.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BandError {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("dimension mismatch: matrix order {n}, vector length {len}")]
    DimensionMismatch { n: usize, len: usize },
}

/// Symmetric banded matrix in lower-triangle row storage.
///
/// `ab[i * (bw + 1) + d]` holds entry `(i, i - bw + d)` for
/// `d in 0..=bw`; the diagonal sits at `d = bw`.
#[derive(Debug, Clone)]
pub struct SymBandMatrix {
    n: usize,
    bw: usize,
    ab: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBandMatrix {
            n,
            bw,
            ab: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw - (i - j))
    }

    /// Set entry (i, j) with j <= i inside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j);
        self.ab[o] = v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i >= j { (j, i) } else { (i, j) };
        if hi - lo > self.bw {
            return 0.0;
        }
        self.ab[self.offset(hi, lo)]
    }

    /// y = A x, using symmetry.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = &self.ab[i * (self.bw + 1) + (self.bw - (i - lo))..i * (self.bw + 1) + self.bw + 1];
            let mut acc = 0.0;
            for (k, &a) in row.iter().enumerate() {
                let j = lo + k;
                acc += a * x[j];
                if j < i {
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
    }

    /// Infinity norm (max absolute row sum), symmetry-aware.
    pub fn norm_inf(&self) -> f64 {
        let mut rowsum = vec![0.0f64; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.ab[self.offset(i, j)].abs();
                rowsum[i] += a;
                if j < i {
                    rowsum[j] += a;
                }
            }
        }
        rowsum.into_iter().fold(0.0, f64::max)
    }

    /// In-place banded Cholesky: A = L Lᵀ with L in the same storage.
    pub fn cholesky(mut self) -> Result<BandCholesky, BandError> {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        for j in 0..n {
            // pivot
            let mut d = self.ab[j * w + bw];
            let lo = j.saturating_sub(bw);
            for k in lo..j {
                let l = self.ab[self.offset(j, k)];
                d -= l * l;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(BandError::NotPositiveDefinite { row: j, pivot: d });
            }
            let d = d.sqrt();
            self.ab[j * w + bw] = d;
            let hi = (j + bw).min(n - 1);
            for i in (j + 1)..=hi {
                let mut s = self.ab[self.offset(i, j)];
                let lo_ij = i.saturating_sub(bw).max(lo);
                // dot of overlapping parts of rows i and j
                for k in lo_ij..j {
                    s -= self.ab[self.offset(i, k)] * self.ab[self.offset(j, k)];
                }
                let o = self.offset(i, j);
                self.ab[o] = s / d;
            }
        }
        Ok(BandCholesky {
            n,
            bw,
            ab: self.ab,
        })
    }
}

/// Banded Cholesky factor; solves A x = b by forward/back substitution.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    ab: Vec<f64>,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, BandError> {
        if b.len() != self.n {
            return Err(BandError::DimensionMismatch {
                n: self.n,
                len: b.len(),
            });
        }
        let w = self.bw + 1;
        let mut x = b.to_vec();
        // L y = b
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut s = x[i];
            let base = i * w + (self.bw - (i - lo));
            for (k, j) in (lo..i).enumerate() {
                s -= self.ab[base + k] * x[j];
            }
            x[i] = s / self.ab[i * w + self.bw];
        }
        // Lᵀ x = y
        for i in (0..self.n).rev() {
            let hi = (i + self.bw).min(self.n - 1);
            let mut s = x[i];
            for j in (i + 1)..=hi {
                s -= self.ab[j * w + (self.bw - (j - i))] * x[j];
            }
            x[i] = s / self.ab[i * w + self.bw];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplacian(n: usize) -> SymBandMatrix {
        let mut a = SymBandMatrix::zeros(n, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
        }
        a
    }

    #[test]
    fn tridiagonal_solve_matches_direct() {
        let n = 64;
        let a = laplacian(n);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let chol = a.clone().cholesky().unwrap();
        let x = chol.solve(&b).unwrap();
        let mut ax = vec![0.0; n];
        a.mul_vec(&x, &mut ax);
        for i in 0..n {
            assert_relative_eq!(ax[i], b[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn wide_band_solve() {
        // 2D 5-point Laplacian on a 9x9 interior grid, bandwidth 9
        let m = 9;
        let n = m * m;
        let mut a = SymBandMatrix::zeros(n, m);
        for i in 0..n {
            a.set(i, i, 4.0);
            if i % m != 0 {
                a.set(i, i - 1, -1.0);
            }
            if i >= m {
                a.set(i, i - m, -1.0);
            }
        }
        let b = vec![1.0; n];
        let x = a.clone().cholesky().unwrap().solve(&b).unwrap();
        let mut ax = vec![0.0; n];
        a.mul_vec(&x, &mut ax);
        for i in 0..n {
            assert_relative_eq!(ax[i], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = SymBandMatrix::zeros(3, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, -1.0);
        a.set(2, 2, 1.0);
        assert!(matches!(
            a.cholesky(),
            Err(BandError::NotPositiveDefinite { .. })
        ));
    }
}
