//! Dense complex operators on one, two and three qubits.
//!
//! Basis ordering is `|000>, |001>, ..., |111>` with qubit 1 the leftmost
//! (most significant) tensor factor and qubit 3 the least significant.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Maximum allowed deviation `|O - O†|` for an observable.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Maximum allowed `|Im tr(ρ O)|` for a Hermitian observable.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Qubit slot in `{1, 2, 3}`; slot 1 is the leftmost tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitIndex(u8);

impl QubitIndex {
    pub const ONE: QubitIndex = QubitIndex(1);
    pub const TWO: QubitIndex = QubitIndex(2);
    pub const THREE: QubitIndex = QubitIndex(3);

    pub fn new(value: u8) -> Result<Self> {
        match value {
            1..=3 => Ok(QubitIndex(value)),
            _ => Err(Error::QubitIndex(value)),
        }
    }

    pub fn all() -> [QubitIndex; 3] {
        [Self::ONE, Self::TWO, Self::THREE]
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Zero-based position, for indexing `[_; 3]` arrays.
    pub fn pos(self) -> usize {
        self.0 as usize - 1
    }

    /// The two remaining slots in ascending order.
    pub fn others(self) -> (QubitIndex, QubitIndex) {
        match self.0 {
            1 => (Self::TWO, Self::THREE),
            2 => (Self::ONE, Self::THREE),
            _ => (Self::ONE, Self::TWO),
        }
    }
}

impl fmt::Display for QubitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bit of basis index `index` (0..8) belonging to qubit `slot`.
#[inline]
pub(crate) fn slot_bit(index: usize, slot: QubitIndex) -> usize {
    (index >> (3 - slot.0 as usize)) & 1
}

/// Square complex matrix of dimension 2, 4 or 8, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(ComplexMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for k in 0..dim {
            m.data[k * dim + k] = ONE;
        }
        Ok(m)
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a
    /// supported `dim²`.
    pub fn from_row_major(dim: usize, entries: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { dim, data: entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self::from_row_major(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = self.clone();
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> ComplexMatrix {
        self.scale(C64::new(factor, 0.0))
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for r in 0..n {
            for c in r..n {
                let d = (self.get(r, c) - self.get(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> C64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut acc = ZERO;
        for r in 0..n {
            for c in 0..n {
                acc += self.data[r * n + c] * other.data[c * n + r];
            }
        }
        acc
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|r| (0..n).map(|c| self.data[r * n + c] * v[c]).sum())
            .collect()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        1 | 2 | 4 | 8 => Ok(()),
        _ => Err(Error::DimensionMismatch {
            expected: 8,
            got: dim,
        }),
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        ComplexMatrix { dim: n, data }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// The four single-qubit Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `X, Y, Z` in the order of the Bloch-vector components.
    pub const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let entries = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix {
            dim: 2,
            data: entries.to_vec(),
        }
    }
}

pub fn sigma_x() -> ComplexMatrix {
    Pauli::X.matrix()
}

pub fn sigma_y() -> ComplexMatrix {
    Pauli::Y.matrix()
}

pub fn sigma_z() -> ComplexMatrix {
    Pauli::Z.matrix()
}

pub fn identity2() -> ComplexMatrix {
    Pauli::I.matrix()
}

/// Kronecker product `a ⊗ b`; the result must not exceed dimension 8.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.dim * b.dim;
    if n > 8 {
        return Err(Error::DimensionOverflow(a.dim, b.dim));
    }
    let mut data = vec![ZERO; n * n];
    for ar in 0..a.dim {
        for ac in 0..a.dim {
            let x = a.get(ar, ac);
            for br in 0..b.dim {
                for bc in 0..b.dim {
                    data[(ar * b.dim + br) * n + ac * b.dim + bc] = x * b.get(br, bc);
                }
            }
        }
    }
    Ok(ComplexMatrix { dim: n, data })
}

/// `p1 ⊗ p2 ⊗ p3` for three single-qubit operators.
pub fn kron3(p1: &ComplexMatrix, p2: &ComplexMatrix, p3: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron(&kron(p1, p2)?, p3)
}

/// Places a single-qubit operator on `slot`, identity elsewhere.
pub fn embed_single(op: &ComplexMatrix, slot: QubitIndex) -> Result<ComplexMatrix> {
    if op.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: op.dim,
        });
    }
    let mut out = ComplexMatrix::zeros(8)?;
    for r in 0..8 {
        for c in 0..8 {
            let rest_equal = QubitIndex::all()
                .into_iter()
                .filter(|&s| s != slot)
                .all(|s| slot_bit(r, s) == slot_bit(c, s));
            if rest_equal {
                out.set(r, c, op.get(slot_bit(r, slot), slot_bit(c, slot)));
            }
        }
    }
    Ok(out)
}

/// Places a two-qubit operator on the two slots other than `excluded`
/// (its first factor on the lower slot), identity on `excluded`.
pub fn embed_pair(op: &ComplexMatrix, excluded: QubitIndex) -> Result<ComplexMatrix> {
    if op.dim != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: op.dim,
        });
    }
    let (p, q) = excluded.others();
    let pair = |idx: usize| 2 * slot_bit(idx, p) + slot_bit(idx, q);
    let mut out = ComplexMatrix::zeros(8)?;
    for r in 0..8 {
        for c in 0..8 {
            if slot_bit(r, excluded) == slot_bit(c, excluded) {
                out.set(r, c, op.get(pair(r), pair(c)));
            }
        }
    }
    Ok(out)
}

/// Eigenvalues of the Hermitian part `(M + M†)/2`, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim;
    let mat = nalgebra::DMatrix::<C64>::from_fn(n, n, |r, c| m.get(r, c));
    let herm = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
    let mut eig: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// `Re tr(ρ O)` for a Hermitian 8×8 observable.
pub fn expectation_matrix(obs: &ComplexMatrix, rho: &crate::states::DensityMatrix) -> Result<f64> {
    if obs.dim != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            got: obs.dim,
        });
    }
    let dev = obs.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let z = rho.matrix().trace_product(obs);
    if z.im.abs() >= IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}
