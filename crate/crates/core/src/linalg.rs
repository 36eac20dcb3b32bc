//! Small dense symmetric linear algebra.
//!
//! `SpdMatrix` is the information-matrix type used throughout: Fisher
//! matrices, design matrices and their ridged variants. Solves go through a
//! Cholesky factorization with an eigendecomposition fallback for matrices
//! that are PSD but numerically borderline.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest one are treated as zero.
pub const EIG_CLIP: f64 = 1e-12;

/// Symmetric positive semidefinite `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    m: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn zeros(d: usize) -> Self {
        Self {
            m: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: DMatrix::identity(d, d),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            m: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    /// Wraps a matrix, symmetrizing it. Fails if it is not square or
    /// clearly asymmetric.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let asym = (&m - m.transpose())
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        if asym > 1e-10 * scale {
            return Err(Error::InvalidArgument(format!(
                "matrix not symmetric (gap {asym:e})"
            )));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { m: sym })
    }

    pub fn from_row_major(d: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: entries.len(),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(d, d, entries))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    /// `self += scale * x x^T`.
    pub fn add_outer(&mut self, scale: f64, x: &[f64]) {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        for i in 0..d {
            let si = scale * x[i];
            if si == 0.0 {
                continue;
            }
            for (j, xj) in x.iter().enumerate() {
                self.m[(i, j)] += si * xj;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m: &self.m * s }
    }

    /// `self - other`; the result need not be PSD, so a raw matrix is returned.
    pub fn minus(&self, other: &SpdMatrix) -> DMatrix<f64> {
        &self.m - &other.m
    }

    /// Default solver ridge: `1e-10 * trace / d`.
    pub fn default_ridge(&self) -> f64 {
        1e-10 * self.trace() / self.dim().max(1) as f64
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.m)
    }

    /// Factorizes `self + ridge * I`.
    ///
    /// With `ridge == 0` a numerically singular matrix yields
    /// [`Error::Singular`]; with a positive ridge the eigen fallback clips
    /// tiny eigenvalues instead.
    pub fn factor(&self, ridge: f64) -> Result<SpdFactor> {
        let d = self.dim();
        let mut a = self.m.clone();
        if ridge > 0.0 {
            for i in 0..d {
                a[(i, i)] += ridge;
            }
        }
        if !a.iter().all(|v| v.is_finite()) {
            return Err(Error::Singular);
        }
        let max_diag = (0..d).fold(0.0f64, |m, i| m.max(a[(i, i)]));
        if max_diag <= 0.0 {
            return Err(Error::Singular);
        }
        if let Some(ch) = a.clone().cholesky() {
            let l = ch.l_dirty();
            let min_pivot = (0..d).fold(f64::INFINITY, |m, i| m.min(l[(i, i)] * l[(i, i)]));
            if min_pivot > 1e3 * EIG_CLIP * max_diag {
                return Ok(SpdFactor::Cholesky(ch));
            }
        }
        let eig = nalgebra::SymmetricEigen::new(a);
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v));
        let floor = EIG_CLIP * lmax;
        let lmin = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        if lmin <= floor && ridge == 0.0 {
            return Err(Error::Singular);
        }
        let vals = eig.eigenvalues.map(|v| v.max(floor));
        Ok(SpdFactor::Eigen {
            vectors: eig.eigenvectors,
            values: vals,
        })
    }

    /// `x^T (A + ridge I)^{-1} x`.
    pub fn inv_quad(&self, x: &[f64], ridge: f64) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.factor(ridge)?.inv_quad(x))
    }
}

/// Factorization handle for repeated solves against one matrix.
#[derive(Debug, Clone)]
pub enum SpdFactor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Eigen {
        vectors: DMatrix<f64>,
        values: DVector<f64>,
    },
}

impl SpdFactor {
    pub fn solve(&self, b: &[f64]) -> DVector<f64> {
        let b = DVector::from_column_slice(b);
        match self {
            SpdFactor::Cholesky(ch) => ch.solve(&b),
            SpdFactor::Eigen { vectors, values } => {
                let mut c = vectors.transpose() * b;
                for (ci, li) in c.iter_mut().zip(values.iter()) {
                    *ci /= li;
                }
                vectors * c
            }
        }
    }

    pub fn inv_quad(&self, x: &[f64]) -> f64 {
        match self {
            SpdFactor::Cholesky(ch) => {
                // ||L^{-1} x||^2
                let mut y = DVector::from_column_slice(x);
                ch.l_dirty().solve_lower_triangular_mut(&mut y);
                // l_dirty may carry garbage above the diagonal; solve_lower ignores it.
                y.norm_squared()
            }
            SpdFactor::Eigen { vectors, values } => {
                let c = vectors.transpose() * DVector::from_column_slice(x);
                c.iter()
                    .zip(values.iter())
                    .map(|(ci, li)| ci * ci / li)
                    .sum()
            }
        }
    }

    /// `x^T A^{-1} y`.
    pub fn inv_bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let s = self.solve(y);
        x.iter().zip(s.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        match self {
            SpdFactor::Cholesky(ch) => ch.inverse(),
            SpdFactor::Eigen { vectors, values } => {
                let inv = DMatrix::from_diagonal(&values.map(|v| 1.0 / v));
                vectors * inv * vectors.transpose()
            }
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    nalgebra::SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, v| a.min(*v))
}

/// Numerical rank of the span of `vectors` (each of length `d`).
pub fn span_rank(vectors: &[&[f64]], d: usize) -> usize {
    let mut g = SpdMatrix::zeros(d);
    for v in vectors {
        g.add_outer(1.0, v);
    }
    let eig = nalgebra::SymmetricEigen::new(g.m);
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v));
    if lmax <= 0.0 {
        return 0;
    }
    eig.eigenvalues
        .iter()
        .filter(|v| **v > 1e-10 * lmax)
        .count()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inv_quad_identity_and_scaling() {
        let a = SpdMatrix::identity(3);
        assert!((a.inv_quad(&[0.0, 1.0, 0.0], 0.0).unwrap() - 1.0).abs() < 1e-15);
        let b = SpdMatrix::identity(3).scaled(2.0);
        let x = [0.6, 0.0, 0.8];
        assert!((b.inv_quad(&x, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inv_quad_diagonal() {
        // 1/0.25 + 1/0.5
        let a = SpdMatrix::from_diagonal(&[0.25, 0.5]);
        assert!((a.inv_quad(&[1.0, 1.0], 0.0).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn singular_without_ridge() {
        let a = SpdMatrix::from_diagonal(&[1.0, 0.0]);
        assert_eq!(a.inv_quad(&[1.0, 0.0], 0.0), Err(Error::Singular));
        let ridge = 1e-6;
        let v = a.inv_quad(&[1.0, 0.0], ridge).unwrap();
        assert!((v - 1.0 / (1.0 + ridge)).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let a = SpdMatrix::identity(2);
        assert!(matches!(
            a.inv_quad(&[1.0], 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inv_quad_agrees_with_explicit_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let d = rng.random_range(1..=6);
            let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
            let a = &b * b.transpose() + DMatrix::identity(d, d) * 0.05;
            let spd = SpdMatrix::from_matrix(a.clone()).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let inv = a.clone().try_inverse().unwrap();
            let xv = DVector::from_column_slice(&x);
            let expect = (xv.transpose() * inv * &xv)[(0, 0)];
            let got = spd.inv_quad(&x, 0.0).unwrap();
            assert!(
                (got - expect).abs() <= 1e-9 * expect.abs().max(1e-12),
                "{got} vs {expect}"
            );
        }
    }

    #[test]
    fn eigen_fallback_matches_cholesky() {
        let a = SpdMatrix::from_row_major(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let ch = a.factor(0.0).unwrap();
        let inv = ch.inverse();
        let eig = nalgebra::SymmetricEigen::new(a.matrix().clone());
        let f = SpdFactor::Eigen {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues,
        };
        let x = [0.3, -0.7];
        assert!((f.inv_quad(&x) - ch.inv_quad(&x)).abs() < 1e-12);
        assert!((f.inverse() - inv).abs().max() < 1e-12);
    }

    #[test]
    fn span_rank_counts() {
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        let v = [1.0, 1.0, 0.0];
        assert_eq!(span_rank(&[&e1, &e2, &v], 3), 2);
        assert_eq!(span_rank(&[&e1], 3), 1);
    }
}
