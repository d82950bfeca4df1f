//! Symmetric banded matrices and their Cholesky factorization.
//!
//! The stiffness and H-inner-product matrices of the radial discretization
//! have half-bandwidth at most 3, so a dense factorization would waste
//! O(n³) work on zeros.

use crate::error::{Error, Result};

/// Symmetric matrix stored by its lower band: `band[i * (bw + 1) + d] = A[i][i - d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    bw: usize,
    band: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            band: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Entry `A[i][j]`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bw {
            0.0
        } else {
            self.band[hi * (self.bw + 1) + d]
        }
    }

    /// Adds `value` to `A[i][j]` (and implicitly `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(d <= self.bw, "entry ({i}, {j}) outside bandwidth {}", self.bw);
        self.band[hi * (self.bw + 1) + d] += value;
    }

    pub fn add_diagonal(&mut self, diag: &[f64]) {
        assert_eq!(diag.len(), self.n);
        for (i, d) in diag.iter().enumerate() {
            self.band[i * (self.bw + 1)] += d;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let stride = self.bw + 1;
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.band[i * stride..(i + 1) * stride];
            y[i] += row[0] * x[i];
            for d in 1..=self.bw.min(i) {
                let a = row[d];
                y[i] += a * x[i - d];
                y[i - d] += a * x[i];
            }
        }
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        BandCholesky::factor(self)
    }
}

/// `A = L Lᵀ` with `L` lower banded, same storage layout as [`SymBand`].
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    fn factor(a: &SymBand) -> Result<Self> {
        let (n, bw) = (a.n, a.bw);
        let stride = bw + 1;
        let mut l = a.band.clone();
        for i in 0..n {
            for d in (1..=bw.min(i)).rev() {
                let j = i - d;
                // L[i][j] = (A[i][j] - Σ_k L[i][k] L[j][k]) / L[j][j], k < j within both bands
                let mut s = l[i * stride + d];
                for k in j.saturating_sub(bw).max(i.saturating_sub(bw))..j {
                    s -= l[i * stride + (i - k)] * l[j * stride + (j - k)];
                }
                l[i * stride + d] = s / l[j * stride];
            }
            let mut s = l[i * stride];
            for k in i.saturating_sub(bw)..i {
                let lik = l[i * stride + (i - k)];
                s -= lik * lik;
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::LinearSolve { row: i, pivot: s });
            }
            l[i * stride] = s.sqrt();
        }
        Ok(Self { n, bw, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let stride = self.bw + 1;
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for d in 1..=self.bw.min(i) {
                s -= self.l[i * stride + d] * y[i - d];
            }
            y[i] = s / self.l[i * stride];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for d in 1..=self.bw.min(self.n - 1 - i) {
                s -= self.l[(i + d) * stride + d] * y[i + d];
            }
            y[i] = s / self.l[i * stride];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_spd(n: usize, bw: usize, seed: u64) -> SymBand {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut a = SymBand::zeros(n, bw);
        for i in 0..n {
            for d in 1..=bw.min(i) {
                a.add(i, i - d, next());
            }
        }
        // diagonal dominance
        for i in 0..n {
            a.add(i, i, 2.0 * bw as f64 + 1.0);
        }
        a
    }

    #[test]
    fn solve_recovers_rhs() {
        for &(n, bw) in &[(1, 0), (5, 1), (17, 3), (64, 3), (9, 8)] {
            let a = random_spd(n, bw, n as u64 * 31 + bw as u64);
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + 0.1).collect();
            let b = a.mul_vec(&x);
            let sol = a.cholesky().unwrap().solve(&b);
            for (s, e) in sol.iter().zip(&x) {
                assert!((s - e).abs() < 1e-12, "n={n} bw={bw}: {s} vs {e}");
            }
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut a = SymBand::zeros(3, 1);
        a.add_diagonal(&[1.0, -1.0, 1.0]);
        assert!(matches!(a.cholesky(), Err(Error::LinearSolve { row: 1, .. })));
    }

    #[test]
    fn bilinear_is_symmetric() {
        let a = random_spd(12, 3, 7);
        let x: Vec<f64> = (0..12).map(|i| i as f64 - 5.0).collect();
        let y: Vec<f64> = (0..12).map(|i| (i as f64).cos()).collect();
        assert!((a.bilinear(&x, &y) - a.bilinear(&y, &x)).abs() < 1e-12);
    }
}
