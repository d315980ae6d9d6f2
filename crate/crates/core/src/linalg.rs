//! Dense and sparse eigenvalue helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Seed of the start vector for every power iteration in this crate.
pub const POWER_SEED: u64 = 0x6a09_e667_f3bc_c908;

const HERMITIAN_TOL: f64 = 1e-13;

/// Spectral norm of a dense square matrix given row-major.
pub fn dense_norm(n: usize, entries: &[Complex64]) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if entries.iter().all(|z| z.im == 0.0) {
        let m = DMatrix::from_row_iterator(n, n, entries.iter().map(|z| z.re));
        if is_symmetric_real(&m) {
            return m.symmetric_eigenvalues().iter().fold(0.0, |a, &b| a.max(b.abs()));
        }
        return m.singular_values().max();
    }
    let m = DMatrix::from_row_iterator(n, n, entries.iter().copied());
    if is_hermitian(&m) {
        return m.symmetric_eigenvalues().iter().fold(0.0, |a, &b| a.max(b.abs()));
    }
    m.singular_values().max()
}

fn is_symmetric_real(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= HERMITIAN_TOL))
}

fn is_hermitian(m: &DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..=i).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= HERMITIAN_TOL))
}

/// Eigenpairs of a Hermitian matrix: `(values, vectors)` with orthonormal
/// eigenvectors as columns.
pub fn hermitian_eigen(n: usize, entries: &[Complex64]) -> (Vec<f64>, DMatrix<Complex64>) {
    let m = DMatrix::from_row_iterator(n, n, entries.iter().copied());
    // symmetrize away rounding before the solver sees it
    let m = (&m + m.adjoint()).map(|z| z * 0.5);
    let eig = m.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Real symmetric sparse matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct SymmetricCsr {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymmetricCsr {
    /// Builds from per-row `(col, value)` lists; symmetry is the caller's
    /// responsibility and is checked by [`SymmetricCsr::symmetry_defect`].
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_start.push(cols.len());
        }
        SymmetricCsr { n, row_start, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            *out = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                m[(i, c)] += v;
            }
        }
        m
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                let back: f64 = self.row(c).filter(|&(cc, _)| cc == i).map(|(_, w)| w).sum();
                worst = worst.max((v - back).abs());
            }
        }
        worst
    }

    /// Largest |eigenvalue| by dense decomposition.
    pub fn dense_norm(&self) -> f64 {
        self.to_dense().symmetric_eigenvalues().iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    /// Largest |eigenvalue| by power iteration on the square of the matrix,
    /// which handles the `+-lambda` pairs of bipartite operators. Returns
    /// the estimate and the number of iterations.
    pub fn power_norm(&self, tol: f64, max_iter: usize) -> Result<(f64, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
        let start: Vec<f64> = (0..self.n).map(|_| rng.gen_range(0.5..1.5)).collect();
        self.power_norm_from(start, tol, max_iter)
    }

    /// Power iteration from a caller-chosen start vector.
    pub fn power_norm_from(&self, start: Vec<f64>, tol: f64, max_iter: usize) -> Result<(f64, usize)> {
        let mut v = start;
        normalize(&mut v);
        let mut w = vec![0.0; self.n];
        let mut u = vec![0.0; self.n];
        let mut previous = f64::NAN;
        for iter in 1..=max_iter {
            self.matvec(&v, &mut w);
            let estimate = dot(&w, &w).sqrt();
            self.matvec(&w, &mut u);
            if normalize(&mut u) == 0.0 {
                return Ok((estimate, iter));
            }
            std::mem::swap(&mut v, &mut u);
            if (estimate - previous).abs() < tol {
                return Ok((estimate, iter));
            }
            previous = estimate;
        }
        Err(Error::NoConvergence { max_iter, lower_bound: if previous.is_nan() { 0.0 } else { previous } })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal.
pub fn tridiagonal_max_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    m.symmetric_eigenvalues().max()
}

pub fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
