//! Small dense symmetric matrix kernels.
//!
//! Covariance matrices in this crate are tiny (p rarely exceeds a few dozen),
//! so everything here is a straightforward row-major implementation: Cholesky
//! factorisation, cyclic Jacobi eigendecomposition and the handful of derived
//! quantities (inverse, log-determinant, Mahalanobis forms) the estimators need.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;
const PIVOT_REL_TOL: f64 = 1e-14;

/// A dense, exactly symmetric `p x p` matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, rejecting anything not exactly symmetric.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgs("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if data[i * dim + j] != data[j * dim + i] {
                    return Err(Error::InvalidArgs(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from possibly asymmetric entries by averaging `a_ij` and `a_ji`.
    pub fn symmetrized(dim: usize, mut data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgs("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim.max(1)])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for (i, d) in diag.iter().enumerate() {
            data[i * dim + i] = *d;
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * factor).collect() }
    }

    /// Entry-wise `(1 - t) * self + t * other`.
    pub fn lerp(&self, other: &SymMatrix, t: f64) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let data =
            self.data.iter().zip(&other.data).map(|(a, b)| if t == 1.0 { *b } else { (1.0 - t) * a + t * b }).collect();
        Self { dim: self.dim, data }
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { dim: self.dim, data }
    }

    /// Returns a copy with `a_ij` and `a_ji` both increased by `delta`.
    pub fn perturbed(&self, i: usize, j: usize, delta: f64) -> Self {
        let mut data = self.data.clone();
        data[i * self.dim + j] += delta;
        if i != j {
            data[j * self.dim + i] += delta;
        }
        Self { dim: self.dim, data }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Dense product `self * other` (not necessarily symmetric), row-major.
    pub fn matmul(&self, other: &SymMatrix) -> Vec<f64> {
        let p = self.dim;
        let mut out = vec![0.0; p * p];
        for i in 0..p {
            for k in 0..p {
                let a = self.get(i, k);
                for j in 0..p {
                    out[i * p + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        cholesky(self)
    }
}

/// Lower-triangular Cholesky factor `L` with `L L^T = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    /// Row-major copy of `L` (upper triangle zero).
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    /// Solves `L y = b` in place.
    pub fn forward_substitute(&self, b: &mut [f64]) {
        let p = self.dim;
        for i in 0..p {
            let mut s = b[i];
            for k in 0..i {
                s -= self.lower[i * p + k] * b[k];
            }
            b[i] = s / self.lower[i * p + i];
        }
    }

    /// Solves `L^T x = y` in place.
    pub fn back_substitute(&self, y: &mut [f64]) {
        let p = self.dim;
        for i in (0..p).rev() {
            let mut s = y[i];
            for k in (i + 1)..p {
                s -= self.lower[k * p + i] * y[k];
            }
            y[i] = s / self.lower[i * p + i];
        }
    }

    /// `d^T A^{-1} d` computed as `|L^{-1} d|^2`.
    pub fn mahalanobis_sq(&self, diff: &[f64]) -> f64 {
        let mut y = diff.to_vec();
        self.forward_substitute(&mut y);
        y.iter().map(|v| v * v).sum()
    }

    /// `L z`, used to colour standard normal draws.
    pub fn apply_lower(&self, z: &[f64]) -> Vec<f64> {
        let p = self.dim;
        (0..p).map(|i| (0..=i).map(|k| self.lower[i * p + k] * z[k]).sum()).collect()
    }

    pub fn reconstruct(&self) -> SymMatrix {
        let p = self.dim;
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| self.get(i, k) * self.get(j, k)).sum();
                data[i * p + j] = s;
                data[j * p + i] = s;
            }
        }
        SymMatrix { dim: p, data }
    }

    pub fn inverse(&self) -> SymMatrix {
        let p = self.dim;
        let mut data = vec![0.0; p * p];
        for col in 0..p {
            let mut e = vec![0.0; p];
            e[col] = 1.0;
            self.forward_substitute(&mut e);
            self.back_substitute(&mut e);
            for row in 0..p {
                data[row * p + col] = e[row];
            }
        }
        SymMatrix::symmetrized(p, data).expect("dimension is consistent")
    }
}

/// Cholesky factorisation. A pivot at or below `p * 1e-14 * max|diag|` is
/// treated as loss of positive definiteness.
pub fn cholesky(a: &SymMatrix) -> Result<Cholesky> {
    let p = a.dim;
    let max_diag = (0..p).map(|i| a.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
    let threshold = p as f64 * PIVOT_REL_TOL * max_diag;
    if !(max_diag > 0.0) || !max_diag.is_finite() {
        return Err(Error::NotPositiveDefinite { index: 0, pivot: max_diag });
    }
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l[j * p + k] * l[j * p + k];
        }
        if !(d > threshold) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[j * p + j] = ljj;
        for i in (j + 1)..p {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / ljj;
        }
    }
    Ok(Cholesky { dim: p, lower: l })
}

pub fn logdet_spd(a: &SymMatrix) -> Result<f64> {
    Ok(cholesky(a)?.logdet())
}

pub fn spd_inverse(a: &SymMatrix) -> Result<SymMatrix> {
    Ok(cholesky(a)?.inverse())
}

/// Eigenvalues sorted descending with the matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomp {
    pub eigenvalues: Vec<f64>,
    /// Row-major `p x p`; column `l` pairs with `eigenvalues[l]`.
    pub eigenvectors: Vec<f64>,
}

impl EigenDecomp {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Column `l` of the eigenvector matrix.
    pub fn eigenvector(&self, l: usize) -> Vec<f64> {
        let p = self.dim();
        (0..p).map(|i| self.eigenvectors[i * p + l]).collect()
    }

    /// `V diag(values) V^T`.
    pub fn compose(&self, values: &[f64]) -> SymMatrix {
        let p = self.dim();
        let v = &self.eigenvectors;
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..=i {
                let s: f64 = (0..p).map(|l| v[i * p + l] * values[l] * v[j * p + l]).sum();
                data[i * p + j] = s;
                data[j * p + i] = s;
            }
        }
        SymMatrix { dim: p, data }
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.compose(&self.eigenvalues)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("dim >= 1")
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn sym_eigen(a: &SymMatrix) -> Result<EigenDecomp> {
    let p = a.dim;
    let mut m = a.data.clone();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }
    let tol = JACOBI_REL_TOL * a.frobenius_norm();
    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    s += m[i * p + j] * m[i * p + j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        if off_norm(&m) <= tol {
            converged = true;
            break;
        }
        for r in 0..p {
            for q in (r + 1)..p {
                let arq = m[r * p + q];
                if arq == 0.0 {
                    continue;
                }
                let theta = (m[q * p + q] - m[r * p + r]) / (2.0 * arq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    let mkr = m[k * p + r];
                    let mkq = m[k * p + q];
                    m[k * p + r] = c * mkr - s * mkq;
                    m[k * p + q] = s * mkr + c * mkq;
                }
                for k in 0..p {
                    let mrk = m[r * p + k];
                    let mqk = m[q * p + k];
                    m[r * p + k] = c * mrk - s * mqk;
                    m[q * p + k] = s * mrk + c * mqk;
                }
                m[r * p + q] = 0.0;
                m[q * p + r] = 0.0;
                for k in 0..p {
                    let vkr = v[k * p + r];
                    let vkq = v[k * p + q];
                    v[k * p + r] = c * vkr - s * vkq;
                    v[k * p + q] = s * vkr + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "jacobi eigendecomposition", iterations: JACOBI_MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| m[j * p + j].total_cmp(&m[i * p + i]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| m[i * p + i]).collect();
    let mut eigenvectors = vec![0.0; p * p];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..p {
            eigenvectors[row * p + new_col] = v[row * p + old_col];
        }
    }
    Ok(EigenDecomp { eigenvalues, eigenvectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_frob(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        num / den
    }

    fn m(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn cholesky_identity() {
        let l = cholesky(&SymMatrix::identity(2)).unwrap();
        assert_eq!(l.lower(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn cholesky_two_by_two() {
        let a = m(&[&[4.0, 2.0], &[2.0, 3.0]]);
        let l = cholesky(&a).unwrap();
        let expected = [2.0, 0.0, 1.0, 2f64.sqrt()];
        for (x, y) in l.lower().iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        // L L^T by direct multiplication
        let lt = l.lower();
        let prod = [lt[0] * lt[0], lt[0] * lt[2], lt[2] * lt[0], lt[2] * lt[2] + lt[3] * lt[3]];
        assert!(rel_frob(&prod, a.as_slice()) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = m(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(cholesky(&SymMatrix::zeros(3)), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn logdet_cases() {
        assert_eq!(logdet_spd(&SymMatrix::identity(3)).unwrap(), 0.0);
        let v = logdet_spd(&SymMatrix::diagonal(&[2.0, 8.0])).unwrap();
        assert!((v - 16f64.ln()).abs() < 1e-14);
        let v = logdet_spd(&SymMatrix::diagonal(&[1e-6, 1e-6])).unwrap();
        assert!((v - 1e-12f64.ln()).abs() < 1e-12);
        assert!((v + 27.631021).abs() < 1e-6);
    }

    #[test]
    fn eigen_diagonal_and_identity() {
        let e = sym_eigen(&SymMatrix::diagonal(&[1.0, 3.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(e.eigenvector(0).iter().map(|x| x.abs()).collect::<Vec<_>>(), vec![0.0, 1.0]);
        let e = sym_eigen(&SymMatrix::identity(5)).unwrap();
        assert!(e.eigenvalues.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn eigen_two_by_two() {
        let e = sym_eigen(&m(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.eigenvector(0);
        let v1 = e.eigenvector(1);
        // Up to sign.
        assert!((v0[0] * v0[1] - 0.5).abs() < 1e-14 && (v0[0].abs() - s).abs() < 1e-14);
        assert!((v1[0] * v1[1] + 0.5).abs() < 1e-14 && (v1[0].abs() - s).abs() < 1e-14);
    }

    #[test]
    fn inverse_cases() {
        let i = spd_inverse(&SymMatrix::identity(2)).unwrap();
        assert_eq!(i, SymMatrix::identity(2));
        let inv = spd_inverse(&SymMatrix::diagonal(&[4.0, 0.25])).unwrap();
        assert!(rel_frob(inv.as_slice(), &[0.25, 0.0, 0.0, 4.0]) < 1e-15);
        let a = m(&[&[4.0, 2.0], &[2.0, 3.0]]);
        let inv = spd_inverse(&a).unwrap();
        let prod = a.matmul(&inv);
        assert!(rel_frob(&prod, SymMatrix::identity(2).as_slice()) < 1e-10);
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(SymMatrix::new(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(SymMatrix::new(2, vec![1.0; 3]).is_err());
    }
}
