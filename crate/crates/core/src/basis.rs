//! Complete Hermitian operator bases with `B₀ ∝ 𝟙`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{c, pauli, CMatrix, Operator, ZERO};

const ORTHO_TOL: f64 = 1e-12;

/// `D²` Hermitian operators, trace-orthogonal with `Tr(B_a B_b) = c·δ_ab`, and
/// `B₀` proportional to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<Operator>,
    normalization: f64,
}

impl OperatorBasis {
    pub fn new(elements: Vec<Operator>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
        let dim = first.dim();
        if elements.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "a basis for dimension {dim} needs {} elements, got {}",
                dim * dim,
                elements.len()
            )));
        }
        for b in &elements {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: b.dim(),
                });
            }
            if !b.is_hermitian() {
                return Err(Error::NotHermitian {
                    deviation: crate::operator::hermiticity_deviation(b.matrix()),
                });
            }
        }
        let normalization = first.trace_product(first).re;
        for (a, ba) in elements.iter().enumerate() {
            for (b, bb) in elements.iter().enumerate() {
                let t = ba.trace_product(bb);
                let target = if a == b { normalization } else { 0.0 };
                if (t - c(target, 0.0)).norm() > ORTHO_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "basis elements {a},{b} are not trace-orthogonal (Tr = {t})"
                    )));
                }
            }
        }
        let scaled_identity = Operator::identity(dim).scale_real(first.trace().re / dim as f64);
        if first.max_abs_diff(&scaled_identity) > ORTHO_TOL {
            return Err(Error::InvalidArgument(
                "first basis element must be proportional to the identity".into(),
            ));
        }
        Ok(Self {
            dim,
            elements,
            normalization,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements, `D²`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn element(&self, a: usize) -> &Operator {
        &self.elements[a]
    }

    /// The traceless elements `B₁ … B_{D²-1}`.
    pub fn observables(&self) -> &[Operator] {
        &self.elements[1..]
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Expansion coefficients `x_a = Tr(B_a X)/c`.
    pub fn coefficients(&self, op: &Operator) -> Vec<Complex64> {
        self.elements
            .iter()
            .map(|b| b.trace_product(op) / self.normalization)
            .collect()
    }

    pub fn compose(&self, coeffs: &[Complex64]) -> Operator {
        let m = self
            .elements
            .iter()
            .zip(coeffs)
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, (b, &x)| {
                acc + b.matrix() * x
            });
        Operator::from_matrix_unchecked(m)
    }

    pub fn max_norm(&self) -> f64 {
        self.elements.iter().map(Operator::norm).fold(0.0, f64::max)
    }

    /// True when every element has the same operator norm within `tol`.
    pub fn equal_norm(&self, tol: f64) -> bool {
        let norms: Vec<f64> = self.elements.iter().map(Operator::norm).collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        norms.iter().all(|n| (max - n).abs() <= tol)
    }
}

/// `{𝟙, σx, σy, σz}/√2`.
pub fn pauli_basis() -> OperatorBasis {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let elements = vec![
        pauli::identity().scale_real(s),
        pauli::x().scale_real(s),
        pauli::y().scale_real(s),
        pauli::z().scale_real(s),
    ];
    OperatorBasis::new(elements).expect("scaled Paulis form a basis")
}

/// Generalized Gell-Mann basis normalized to `Tr(B_a B_b) = δ_ab`, with
/// `B₀ = 𝟙/√D`. Ordering: identity, then for each `j < k` the symmetric and
/// antisymmetric off-diagonal pair, then the `D-1` diagonal elements. For
/// `D = 2` this coincides with [`pauli_basis`].
pub fn gell_mann_basis(dim: usize) -> Result<OperatorBasis> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "Gell-Mann basis needs D >= 2, got {dim}"
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut elements = vec![Operator::identity(dim).scale_real(1.0 / (dim as f64).sqrt())];
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut sym = CMatrix::from_element(dim, dim, ZERO);
            sym[(j, k)] = c(s, 0.0);
            sym[(k, j)] = c(s, 0.0);
            let mut anti = CMatrix::from_element(dim, dim, ZERO);
            anti[(j, k)] = c(0.0, -s);
            anti[(k, j)] = c(0.0, s);
            elements.push(Operator::hermitian(sym)?);
            elements.push(Operator::hermitian(anti)?);
        }
    }
    for l in 1..dim {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut d = CMatrix::from_element(dim, dim, ZERO);
        for m in 0..l {
            d[(m, m)] = c(norm, 0.0);
        }
        d[(l, l)] = c(-(l as f64) * norm, 0.0);
        elements.push(Operator::hermitian(d)?);
    }
    OperatorBasis::new(elements)
}
