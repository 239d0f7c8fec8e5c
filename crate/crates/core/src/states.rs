//! Three-qubit pure and mixed states: named families and seeded samplers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quantum_core::{
    embed_pair, embed_single, hermitian_eigenvalues, kron3, slot_bit, ComplexMatrix, QubitIndex, C64,
    HERMITIAN_TOL,
};

pub const NORM_TOL: f64 = 1e-9;
pub const DENSITY_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Seeded generator used by every sampler in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Normalized three-qubit state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: [C64; 8],
}

impl PureState {
    pub fn new(amplitudes: [C64; 8]) -> Result<Self> {
        Self::with_tolerance(amplitudes, NORM_TOL)
    }

    /// Like [`PureState::new`] with an explicit norm tolerance.
    pub fn with_tolerance(amplitudes: [C64; 8], tol: f64) -> Result<Self> {
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState {
                invariant: "finite",
                detail: "amplitude is NaN or infinite".into(),
            });
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > tol {
            return Err(Error::InvalidState {
                invariant: "norm",
                detail: format!("squared norm {norm_sq} differs from 1 by more than {tol:e}"),
            });
        }
        Ok(PureState { amplitudes })
    }

    fn normalized(mut amplitudes: [C64; 8]) -> Self {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut amplitudes {
            *z /= norm;
        }
        PureState { amplitudes }
    }

    pub fn amplitudes(&self) -> &[C64; 8] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(U1 ⊗ U2 ⊗ U3)|ψ>` for single-qubit unitaries.
    pub fn apply_local(&self, unitaries: &[ComplexMatrix; 3]) -> Result<PureState> {
        let u = kron3(&unitaries[0], &unitaries[1], &unitaries[2])?;
        let out = u.apply(&self.amplitudes);
        PureState::new(out.try_into().expect("8 amplitudes"))
    }
}

/// Hermitian, unit-trace, positive semidefinite 8×8 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DENSITY_TOL)
    }

    /// Validates Hermiticity, trace and positivity against `tol`.
    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if matrix.dim() != 8 {
            return Err(Error::InvalidState {
                invariant: "dimension",
                detail: format!("expected 8x8, got {0}x{0}", matrix.dim()),
            });
        }
        // Expectation values need a tighter Hermitian part than `tol` may give.
        let dev = matrix.hermitian_deviation();
        if dev > tol.min(HERMITIAN_TOL) {
            return Err(Error::InvalidState {
                invariant: "hermitian",
                detail: format!("max |ρ - ρ†| = {dev:e}"),
            });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState {
                invariant: "trace",
                detail: format!("trace {tr} differs from 1 by more than {tol:e}"),
            });
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < -tol {
            return Err(Error::InvalidState {
                invariant: "positivity",
                detail: format!("smallest eigenvalue {min_eig:e}"),
            });
        }
        Ok(DensityMatrix { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.dim(), 8);
        DensityMatrix { matrix }
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            matrix: ComplexMatrix::identity(8).expect("dim 8").scale_real(0.125),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    /// `U ρ U†` with `U = U1 ⊗ U2 ⊗ U3`.
    pub fn conjugate_local(&self, unitaries: &[ComplexMatrix; 3]) -> Result<DensityMatrix> {
        let u = kron3(&unitaries[0], &unitaries[1], &unitaries[2])?;
        let out = &(&u * &self.matrix) * &u.adjoint();
        Ok(DensityMatrix { matrix: out })
    }

    /// Reduced 2×2 state of a single qubit.
    pub fn reduced_single(&self, slot: QubitIndex) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(2).expect("dim 2");
        for r in 0..8 {
            for c in 0..8 {
                let same_rest = QubitIndex::all()
                    .into_iter()
                    .filter(|&s| s != slot)
                    .all(|s| slot_bit(r, s) == slot_bit(c, s));
                if same_rest {
                    let (br, bc) = (slot_bit(r, slot), slot_bit(c, slot));
                    let v = out.get(br, bc) + self.matrix.get(r, c);
                    out.set(br, bc, v);
                }
            }
        }
        out
    }
}

fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

/// Parameters of the five-term canonical form
/// `λ0|000> + λ1 e^{iφ}|100> + λ2|101> + λ3|110> + λ4|111>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcinParameters {
    lambdas: [f64; 5],
    phi: f64,
}

impl AcinParameters {
    pub fn new(lambdas: [f64; 5], phi: f64) -> Result<Self> {
        if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidParameters("λ_i must be finite and non-negative".into()));
        }
        let sum_sq: f64 = lambdas.iter().map(|l| l * l).sum();
        if (sum_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameters(format!("Σλ² = {sum_sq}, expected 1")));
        }
        if !(0.0..=PI).contains(&phi) {
            return Err(Error::InvalidParameters(format!("φ = {phi} outside [0, π]")));
        }
        Ok(AcinParameters { lambdas, phi })
    }

    pub fn lambdas(&self) -> [f64; 5] {
        self.lambdas
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Which qubit is split off from the other two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bipartition {
    /// `ρ1 ⊗ ρ23`
    S1_23,
    /// `ρ2 ⊗ ρ13`
    S2_13,
    /// `ρ12 ⊗ ρ3`
    S12_3,
}

impl Bipartition {
    pub const ALL: [Bipartition; 3] = [Bipartition::S1_23, Bipartition::S2_13, Bipartition::S12_3];

    pub fn separated(self) -> QubitIndex {
        match self {
            Bipartition::S1_23 => QubitIndex::ONE,
            Bipartition::S2_13 => QubitIndex::TWO,
            Bipartition::S12_3 => QubitIndex::THREE,
        }
    }

    pub fn from_separated(slot: QubitIndex) -> Self {
        match slot.value() {
            1 => Bipartition::S1_23,
            2 => Bipartition::S2_13,
            _ => Bipartition::S12_3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bipartition::S1_23 => "1-23",
            Bipartition::S2_13 => "2-13",
            Bipartition::S12_3 => "12-3",
        }
    }
}

/// Convex separability classes: fully separable, or one of the three
/// bi-separable hulls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeparabilityClass {
    FullySeparable,
    Biseparable(Bipartition),
}

impl SeparabilityClass {
    pub const ALL: [SeparabilityClass; 4] = [
        SeparabilityClass::FullySeparable,
        SeparabilityClass::Biseparable(Bipartition::S1_23),
        SeparabilityClass::Biseparable(Bipartition::S2_13),
        SeparabilityClass::Biseparable(Bipartition::S12_3),
    ];

    pub fn label(self) -> &'static str {
        match self {
            SeparabilityClass::FullySeparable => "fully-separable",
            SeparabilityClass::Biseparable(p) => p.label(),
        }
    }
}

impl fmt::Display for SeparabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SeparabilityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fully-separable" => Ok(SeparabilityClass::FullySeparable),
            "1-23" => Ok(SeparabilityClass::Biseparable(Bipartition::S1_23)),
            "2-13" => Ok(SeparabilityClass::Biseparable(Bipartition::S2_13)),
            "12-3" => Ok(SeparabilityClass::Biseparable(Bipartition::S12_3)),
            other => Err(Error::UnknownClass(other.to_string())),
        }
    }
}

impl Serialize for SeparabilityClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for SeparabilityClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Computational basis state `|index>`; qubit 3 is the least significant bit.
pub fn basis_state(index: usize) -> PureState {
    let mut amps = [ZERO; 8];
    amps[index] = C64::new(1.0, 0.0);
    PureState { amplitudes: amps }
}

pub fn ghz() -> PureState {
    generalized_ghz(PI / 4.0)
}

/// `cos α|000> + sin α|111>`.
pub fn generalized_ghz(alpha: f64) -> PureState {
    let mut amps = [ZERO; 8];
    if alpha == PI / 4.0 {
        amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
        amps[7] = C64::new(FRAC_1_SQRT_2, 0.0);
    } else {
        amps[0] = C64::new(alpha.cos(), 0.0);
        amps[7] = C64::new(alpha.sin(), 0.0);
    }
    PureState { amplitudes: amps }
}

pub fn acin_state(p: &AcinParameters) -> PureState {
    let [l0, l1, l2, l3, l4] = p.lambdas;
    let mut amps = [ZERO; 8];
    amps[0b000] = C64::new(l0, 0.0);
    amps[0b100] = C64::from_polar(l1, p.phi);
    amps[0b101] = C64::new(l2, 0.0);
    amps[0b110] = C64::new(l3, 0.0);
    amps[0b111] = C64::new(l4, 0.0);
    PureState { amplitudes: amps }
}

/// `(cos α|01> - sin α|10>)` on the joined pair, `|0>` on the separated qubit.
pub fn canonical_biseparable(partition: Bipartition, alpha: f64) -> PureState {
    let (p, q) = partition.separated().others();
    let index = |bit_p: usize, bit_q: usize| (bit_p << (3 - p.value())) | (bit_q << (3 - q.value()));
    let mut amps = [ZERO; 8];
    amps[index(0, 1)] = C64::new(alpha.cos(), 0.0);
    amps[index(1, 0)] = C64::new(-alpha.sin(), 0.0);
    PureState { amplitudes: amps }
}

/// `(|001> + |010> + |100>)/√3`.
pub fn w_state() -> PureState {
    let v = C64::new(1.0 / 3f64.sqrt(), 0.0);
    let mut amps = [ZERO; 8];
    amps[0b001] = v;
    amps[0b010] = v;
    amps[0b100] = v;
    PureState { amplitudes: amps }
}

/// `(|00> + |11>)/√2` on qubits 1,2 and `|0>` on qubit 3.
pub fn phi_plus_otimes_zero() -> PureState {
    let mut amps = [ZERO; 8];
    amps[0b000] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[0b110] = C64::new(FRAC_1_SQRT_2, 0.0);
    PureState { amplitudes: amps }
}

/// `|+>` on qubit 1 and `(|00> + |11>)/√2` on qubits 2,3.
pub fn plus_otimes_phi_plus() -> PureState {
    let mut amps = [ZERO; 8];
    for idx in [0b000, 0b011, 0b100, 0b111] {
        amps[idx] = C64::new(0.5, 0.0);
    }
    PureState { amplitudes: amps }
}

/// Haar-random pure state from eight standard complex Gaussians.
pub fn random_pure(seed: u64) -> PureState {
    random_pure_with(&mut seeded_rng(seed))
}

pub fn random_pure_with<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    let v = gaussian_vector(8, rng);
    PureState::normalized(v.try_into().expect("8 amplitudes"))
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    (0..dim).map(|_| gaussian_complex(rng)).collect()
}

/// Rank of the random factors drawn by the class samplers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorRank {
    /// Ginibre `G G† / tr(G G†)` with square `G`.
    Full,
    /// Haar-random pure factors.
    Pure,
}

/// Random `dim × dim` state `G G† / tr(G G†)` with `G` a `dim × rank`
/// complex Ginibre matrix. `rank = 1` yields a Haar pure state.
pub fn ginibre_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let g: Vec<C64> = gaussian_vector(dim * rank, rng);
    let mut m = ComplexMatrix::zeros(dim).expect("supported dim");
    let mut tr = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            let v: C64 = (0..rank).map(|k| g[r * rank + k] * g[c * rank + k].conj()).sum();
            m.set(r, c, v);
        }
        tr += m.get(r, r).re;
    }
    m.scale_real(1.0 / tr)
}

fn random_factor<R: Rng + ?Sized>(dim: usize, rank: FactorRank, rng: &mut R) -> ComplexMatrix {
    match rank {
        FactorRank::Full => ginibre_density(dim, dim, rng),
        FactorRank::Pure => ginibre_density(dim, 1, rng),
    }
}

/// Haar-random 2×2 unitary: Gram-Schmidt (QR) of a complex Ginibre matrix.
pub fn random_unitary2<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    let c0 = [gaussian_complex(rng), gaussian_complex(rng)];
    let c1 = [gaussian_complex(rng), gaussian_complex(rng)];
    let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
    let q0 = [c0[0] / n0, c0[1] / n0];
    let proj = q0[0].conj() * c1[0] + q0[1].conj() * c1[1];
    let w = [c1[0] - proj * q0[0], c1[1] - proj * q0[1]];
    let n1 = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    let q1 = [w[0] / n1, w[1] / n1];
    ComplexMatrix::from_row_major(2, vec![q0[0], q1[0], q0[1], q1[1]]).expect("2x2")
}

pub fn random_local_unitaries<R: Rng + ?Sized>(rng: &mut R) -> [ComplexMatrix; 3] {
    [random_unitary2(rng), random_unitary2(rng), random_unitary2(rng)]
}

/// One product state of the given class with random factors.
pub fn random_product<R: Rng + ?Sized>(
    class: SeparabilityClass,
    rank: FactorRank,
    rng: &mut R,
) -> DensityMatrix {
    let m = match class {
        SeparabilityClass::FullySeparable => {
            let f: Vec<ComplexMatrix> = (0..3).map(|_| random_factor(2, rank, rng)).collect();
            kron3(&f[0], &f[1], &f[2]).expect("dim 8")
        }
        SeparabilityClass::Biseparable(p) => {
            let single = random_factor(2, rank, rng);
            let pair = random_factor(4, rank, rng);
            let sep = p.separated();
            &embed_single(&single, sep).expect("2x2") * &embed_pair(&pair, sep).expect("4x4")
        }
    };
    DensityMatrix::from_matrix_unchecked(m)
}

/// Weights uniform on the probability simplex.
pub fn simplex_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Convex mixture of `n_mix` random products from `class`, with full-rank
/// Ginibre factors.
pub fn random_in_class(class: SeparabilityClass, n_mix: usize, seed: u64) -> Result<DensityMatrix> {
    random_in_class_with_rank(class, n_mix, FactorRank::Full, seed)
}

pub fn random_in_class_with_rank(
    class: SeparabilityClass,
    n_mix: usize,
    rank: FactorRank,
    seed: u64,
) -> Result<DensityMatrix> {
    if n_mix == 0 {
        return Err(Error::InvalidParameters("n_mix must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let products: Vec<DensityMatrix> = (0..n_mix).map(|_| random_product(class, rank, &mut rng)).collect();
    let weights = simplex_weights(n_mix, &mut rng);
    mix(&products, &weights)
}

/// `|ψ><ψ|`.
pub fn to_density(psi: &PureState) -> DensityMatrix {
    let a = &psi.amplitudes;
    let m = ComplexMatrix::from_fn(8, |r, c| a[r] * a[c].conj()).expect("dim 8");
    DensityMatrix::from_matrix_unchecked(m)
}

/// Convex combination `Σ w_k ρ_k`.
pub fn mix(states: &[DensityMatrix], weights: &[f64]) -> Result<DensityMatrix> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} states but {} weights",
            states.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights("weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, expected 1")));
    }
    let mut acc = ComplexMatrix::zeros(8)?;
    for (rho, &w) in states.iter().zip(weights) {
        acc = &acc + &rho.matrix.scale_real(w);
    }
    Ok(DensityMatrix::from_matrix_unchecked(acc))
}
