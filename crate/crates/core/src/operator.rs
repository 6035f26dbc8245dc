//! Dense complex operators on a finite-dimensional Hilbert space.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::HERMITIAN_TOL;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A square complex matrix, tagged when it is Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    hermitian: bool,
}

impl Operator {
    /// Wraps a square matrix; the Hermitian tag is set when `A = A†` within
    /// [`HERMITIAN_TOL`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "operator must be a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let hermitian = hermiticity_deviation(&matrix) <= HERMITIAN_TOL;
        Ok(Self { matrix, hermitian })
    }

    /// Wraps a matrix that must be Hermitian.
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        let op = Self::new(matrix)?;
        if !op.hermitian {
            return Err(Error::NotHermitian {
                deviation: hermiticity_deviation(&op.matrix),
            });
        }
        Ok(op)
    }

    /// Builds from a matrix known to be square; the tag is still checked.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        let hermitian = hermiticity_deviation(&matrix) <= HERMITIAN_TOL;
        Self { matrix, hermitian }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = CMatrix::from_fn(n, rows.first().map_or(0, |r| r.len()), |i, j| {
            c(rows[i][j], 0.0)
        });
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_matrix_unchecked(&self.matrix * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * c(factor, 0.0),
            hermitian: self.hermitian,
        }
    }

    /// Operator norm (largest singular value).
    pub fn norm(&self) -> f64 {
        if self.hermitian {
            return self
                .eigh()
                .0
                .iter()
                .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        }
        self.matrix
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(*v))
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Operator) -> Complex64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.matrix[(i, k)] * other.matrix[(k, i)];
            }
        }
        acc
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Operator) -> Operator {
        &(self * other) + &(other * self)
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
            hermitian: self.hermitian && other.hermitian,
        }
    }

    pub fn powi(&self, n: u32) -> Operator {
        let mut out = Operator::identity(self.dim());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Eigen-decomposition of a Hermitian operator: ascending eigenvalues and
    /// the matching orthonormal eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let sym = symmetrize(&self.matrix);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(self.dim(), order.len(), |i, j| {
            eig.eigenvectors[(i, order[j])]
        });
        (values, vectors)
    }

    /// Applies a real function to a Hermitian operator through its spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> Operator {
        let (values, vectors) = self.eigh();
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| f(v)),
        ));
        Operator::from_matrix_unchecked(&vectors * diag * vectors.adjoint())
    }

    /// Spectral projectors grouped by distinct eigenvalue.
    pub fn spectral_projectors(&self, tol: f64) -> Vec<(f64, Operator)> {
        let (values, vectors) = self.eigh();
        let mut out: Vec<(f64, CMatrix)> = Vec::new();
        for (k, &v) in values.iter().enumerate() {
            let col = vectors.column(k);
            let proj = col * col.adjoint();
            match out.last_mut() {
                Some((last, p)) if (v - *last).abs() <= tol => *p += proj,
                _ => out.push((v, proj)),
            }
        }
        out.into_iter()
            .map(|(v, p)| (v, Operator::from_matrix_unchecked(p)))
            .collect()
    }

    /// Entrywise distance `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix + &rhs.matrix,
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix - &rhs.matrix,
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator::from_matrix_unchecked(&self.matrix * &rhs.matrix)
    }
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Partial trace over the trailing factor of a `keep ⊗ traced` space.
pub fn partial_trace_last(m: &CMatrix, keep: usize, traced: usize) -> CMatrix {
    CMatrix::from_fn(keep, keep, |i, j| {
        (0..traced).fold(ZERO, |acc, k| acc + m[(i * traced + k, j * traced + k)])
    })
}

/// Trace norm `Σ|λ|` of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .sum()
}

pub mod pauli {
    use super::*;

    pub fn identity() -> Operator {
        Operator::identity(2)
    }

    pub fn x() -> Operator {
        Operator::from_matrix_unchecked(CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
    }

    pub fn y() -> Operator {
        Operator::from_matrix_unchecked(CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]))
    }

    pub fn z() -> Operator {
        Operator::from_matrix_unchecked(CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]))
    }

    /// `[σx, σy, σz]`.
    pub fn xyz() -> [Operator; 3] {
        [x(), y(), z()]
    }
}
