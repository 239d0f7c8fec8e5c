//! Pauli-basis expansion of three-qubit states,
//!
//! ```text
//! ρ = 1/8 (I + α_i σ_i¹ + β_i σ_i² + γ_i σ_i³
//!          + R_ij σ_i¹σ_j² + S_ij σ_i¹σ_j³ + T_ij σ_i²σ_j³ + Q_ijk σ_i¹σ_j²σ_k³)
//! ```
//!
//! and the local-unitary invariant norms of the coefficient tensors.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quantum_core::{kron3, ComplexMatrix, Pauli, C64};
use crate::states::DensityMatrix;

/// Real coefficient tensors of the Pauli expansion. Indices run over
/// `x, y, z`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PauliDecomposition {
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
    pub gamma: [f64; 3],
    #[serde(rename = "R")]
    pub r: [[f64; 3]; 3],
    #[serde(rename = "S")]
    pub s: [[f64; 3]; 3],
    #[serde(rename = "T")]
    pub t: [[f64; 3]; 3],
    #[serde(rename = "Q")]
    pub q: [[[f64; 3]; 3]; 3],
}

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// All 64 Pauli strings `σ_a ⊗ σ_b ⊗ σ_c`, `a,b,c ∈ {I,X,Y,Z}`, indexed by
/// `16a + 4b + c`.
fn pauli_strings() -> &'static [ComplexMatrix] {
    static TABLE: OnceLock<Vec<ComplexMatrix>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(64);
        for a in PAULIS {
            for b in PAULIS {
                for c in PAULIS {
                    out.push(kron3(&a.matrix(), &b.matrix(), &c.matrix()).expect("dim 8"));
                }
            }
        }
        out
    })
}

impl PauliDecomposition {
    /// Coefficient of the string with per-qubit labels `0 = I, 1..=3 = x,y,z`.
    /// The identity coefficient is 1.
    pub fn coefficient(&self, p1: usize, p2: usize, p3: usize) -> f64 {
        match (p1, p2, p3) {
            (0, 0, 0) => 1.0,
            (i, 0, 0) => self.alpha[i - 1],
            (0, j, 0) => self.beta[j - 1],
            (0, 0, k) => self.gamma[k - 1],
            (i, j, 0) => self.r[i - 1][j - 1],
            (i, 0, k) => self.s[i - 1][k - 1],
            (0, j, k) => self.t[j - 1][k - 1],
            (i, j, k) => self.q[i - 1][j - 1][k - 1],
        }
    }

    fn set_coefficient(&mut self, p1: usize, p2: usize, p3: usize, value: f64) {
        match (p1, p2, p3) {
            (0, 0, 0) => {}
            (i, 0, 0) => self.alpha[i - 1] = value,
            (0, j, 0) => self.beta[j - 1] = value,
            (0, 0, k) => self.gamma[k - 1] = value,
            (i, j, 0) => self.r[i - 1][j - 1] = value,
            (i, 0, k) => self.s[i - 1][k - 1] = value,
            (0, j, k) => self.t[j - 1][k - 1] = value,
            (i, j, k) => self.q[i - 1][j - 1][k - 1] = value,
        }
    }

    /// Single-qubit Bloch vector of `qubit` (α, β or γ).
    pub fn local(&self, qubit: crate::quantum_core::QubitIndex) -> [f64; 3] {
        match qubit.value() {
            1 => self.alpha,
            2 => self.beta,
            _ => self.gamma,
        }
    }

    /// Largest absolute coefficient; at most 1 for any valid state.
    pub fn max_abs(&self) -> f64 {
        let mut worst = 0.0_f64;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    if (a, b, c) != (0, 0, 0) {
                        worst = worst.max(self.coefficient(a, b, c).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &PauliDecomposition) -> f64 {
        let mut worst = 0.0_f64;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let d = self.coefficient(a, b, c) - other.coefficient(a, b, c);
                    worst = worst.max(d.abs());
                }
            }
        }
        worst
    }
}

/// `coefficient(a,b,c) = tr(ρ σ_a ⊗ σ_b ⊗ σ_c)` for all 63 non-identity strings.
pub fn decompose(rho: &DensityMatrix) -> PauliDecomposition {
    let strings = pauli_strings();
    let mut d = PauliDecomposition::default();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                if (a, b, c) == (0, 0, 0) {
                    continue;
                }
                let v = rho.matrix().trace_product(&strings[16 * a + 4 * b + c]).re;
                d.set_coefficient(a, b, c, v);
            }
        }
    }
    d
}

/// `1/8 Σ coefficient · σ ⊗ σ ⊗ σ`; positivity is not checked.
pub fn reconstruct(d: &PauliDecomposition) -> ComplexMatrix {
    let strings = pauli_strings();
    let mut entries = vec![C64::new(0.0, 0.0); 64];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let w = d.coefficient(a, b, c) / 8.0;
                if w == 0.0 {
                    continue;
                }
                for (e, p) in entries.iter_mut().zip(strings[16 * a + 4 * b + c].entries()) {
                    *e += p * w;
                }
            }
        }
    }
    ComplexMatrix::from_row_major(8, entries).expect("dim 8")
}

/// [`reconstruct`] followed by full density-matrix validation.
pub fn reconstruct_state(d: &PauliDecomposition) -> Result<DensityMatrix> {
    DensityMatrix::new(reconstruct(d))
}

/// `(|R|² + |S|² + |T|², |Q|² + |α|² + |β|² + |γ|²)`; `(3, 4)` for every
/// pure state.
pub fn invariant_norms(d: &PauliDecomposition) -> (f64, f64) {
    let sq3 = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>();
    let sq33 = |m: &[[f64; 3]; 3]| m.iter().map(sq3).sum::<f64>();
    let two_body = sq33(&d.r) + sq33(&d.s) + sq33(&d.t);
    let q_sq: f64 = d.q.iter().map(sq33).sum();
    (two_body, q_sq + sq3(&d.alpha) + sq3(&d.beta) + sq3(&d.gamma))
}

/// `|Q|`; lies in `[1, 2]` for pure states.
pub fn q_norm(d: &PauliDecomposition) -> f64 {
    d.q.iter()
        .flat_map(|m| m.iter().flatten())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}
