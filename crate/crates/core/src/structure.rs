//! Structure constants `[B_a,B_b] = i f_abc B_c`, `{B_a,B_b} = g_abc B_c`.

use num_complex::Complex64;

use crate::basis::OperatorBasis;
use crate::operator::{c, Operator};

#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensors {
    n: usize,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl StructureTensors {
    /// Side length `D²` of each tensor.
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, k: usize) -> usize {
        (a * self.n + b) * self.n + k
    }

    pub fn f(&self, a: usize, b: usize, k: usize) -> f64 {
        self.f[self.idx(a, b, k)]
    }

    pub fn g(&self, a: usize, b: usize, k: usize) -> f64 {
        self.g[self.idx(a, b, k)]
    }

    /// Coefficient of `B_k` in the product `B_a B_b`, i.e. `(i f_abk + g_abk)/2`.
    pub fn product(&self, a: usize, b: usize, k: usize) -> Complex64 {
        c(self.g(a, b, k), self.f(a, b, k)) * 0.5
    }

    /// Largest entrywise error when rebuilding every commutator and
    /// anticommutator of `basis` from the tensors.
    pub fn reconstruction_error(&self, basis: &OperatorBasis) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let comm: Vec<Complex64> = (0..n).map(|k| c(0.0, self.f(a, b, k))).collect();
                let anti: Vec<Complex64> = (0..n).map(|k| c(self.g(a, b, k), 0.0)).collect();
                let (ba, bb) = (basis.element(a), basis.element(b));
                worst = worst
                    .max(basis.compose(&comm).max_abs_diff(&ba.commutator(bb)))
                    .max(basis.compose(&anti).max_abs_diff(&ba.anticommutator(bb)));
            }
        }
        worst
    }
}

// products[a][b] and products[b][a] are both needed, so index loops are clearer
#[allow(clippy::needless_range_loop)]
pub fn structure_tensors(basis: &OperatorBasis) -> StructureTensors {
    let n = basis.len();
    let norm = basis.normalization();
    let mut f = vec![0.0; n * n * n];
    let mut g = vec![0.0; n * n * n];
    let products: Vec<Vec<Operator>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| basis.element(a) * basis.element(b))
                .collect()
        })
        .collect();
    for a in 0..n {
        for b in 0..n {
            let comm = &products[a][b] - &products[b][a];
            let anti = &products[a][b] + &products[b][a];
            for k in 0..n {
                let idx = (a * n + b) * n + k;
                // f = -(i/c) Tr([B_a,B_b] B_k)
                f[idx] = (comm.trace_product(basis.element(k)) * c(0.0, -1.0 / norm)).re;
                g[idx] = anti.trace_product(basis.element(k)).re / norm;
            }
        }
    }
    StructureTensors { n, f, g }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{gell_mann_basis, pauli_basis};

    fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
        match (i, j, k) {
            (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
            (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
            _ => 0.0,
        }
    }

    #[test]
    fn pauli_f_is_scaled_levi_civita() {
        let t = structure_tensors(&pauli_basis());
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let expect = std::f64::consts::SQRT_2 * levi_civita(i, j, k);
                    assert!((t.f(i, j, k) - expect).abs() < 1e-14, "f{i}{j}{k}");
                }
            }
        }
    }

    #[test]
    fn pauli_g_pattern() {
        let t = structure_tensors(&pauli_basis());
        let r2 = std::f64::consts::SQRT_2;
        for a in 0..4 {
            for b in 0..4 {
                for k in 0..4 {
                    let expect = if (k == 0 && a == b) || (b == 0 && a == k) || (a == 0 && b == k) {
                        r2
                    } else {
                        0.0
                    };
                    assert!((t.g(a, b, k) - expect).abs() < 1e-14, "g{a}{b}{k}");
                }
            }
        }
    }

    #[test]
    fn symmetry_and_round_trip() {
        for d in [2, 3, 4] {
            let basis = gell_mann_basis(d).unwrap();
            let t = structure_tensors(&basis);
            let n = t.size();
            for a in 0..n {
                for b in 0..n {
                    for k in 0..n {
                        assert!((t.f(a, b, k) + t.f(b, a, k)).abs() < 1e-13);
                        assert!((t.g(a, b, k) - t.g(b, a, k)).abs() < 1e-13);
                    }
                    if a == b {
                        for k in 0..n {
                            assert_eq!(t.f(a, a, k), 0.0);
                        }
                    }
                }
            }
            assert!(t.reconstruction_error(&basis) < 1e-10, "D={d}");
        }
    }
}
