//! Measurement settings, the Bell operators `D^(i)`, and their expectation
//! values.
//!
//! Two independent evaluation paths exist:
//!
//! * [`expectation_bell`] builds the 8×8 operator and takes `Re tr(ρ D)`;
//! * [`expectation_bell_fast`] contracts the Pauli tensors of `ρ` with the
//!   derived vectors `s_j = (a_j + b_j)/2`, `t_j = (a_j - b_j)/2`.
//!
//! With `C_j = s_j·σ`, `D_j = t_j·σ` the operator for `i = 1` expands to
//! `C1C2C3 + C1C2D3 + C1D2C3 - C1D2D3 + D1`, and cyclically for `i = 2, 3`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliDecomposition;
use crate::quantum_core::{
    embed_pair, embed_single, expectation_matrix, kron, ComplexMatrix, Pauli, QubitIndex,
};
use crate::states::DensityMatrix;

pub type Vec3 = [f64; 3];

pub const UNIT_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Real unit Bloch vector of a dichotomic observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "[f64; 3]")]
pub struct UnitVector3(Vec3);

impl From<UnitVector3> for Vec3 {
    fn from(v: UnitVector3) -> Vec3 {
        v.0
    }
}

impl UnitVector3 {
    pub const X: UnitVector3 = UnitVector3([1.0, 0.0, 0.0]);
    pub const Y: UnitVector3 = UnitVector3([0.0, 1.0, 0.0]);
    pub const Z: UnitVector3 = UnitVector3([0.0, 0.0, 1.0]);

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::with_tolerance([x, y, z], UNIT_TOL)
    }

    pub fn with_tolerance(v: Vec3, tol: f64) -> Result<Self> {
        let n2 = dot(&v, &v);
        if !n2.is_finite() || (n2 - 1.0).abs() > tol {
            return Err(Error::InvalidVector(format!(
                "|v|² = {n2} for ({}, {}, {}), expected 1",
                v[0], v[1], v[2]
            )));
        }
        Ok(UnitVector3(v))
    }

    /// Rescales a non-zero vector onto the sphere.
    pub fn normalize(v: Vec3) -> Result<Self> {
        let n = norm(&v);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::InvalidVector("cannot normalize a zero vector".into()));
        }
        Ok(UnitVector3([v[0] / n, v[1] / n, v[2] / n]))
    }

    /// Unit vector at angle `theta` in the x–y plane.
    pub fn planar(theta: f64) -> Self {
        UnitVector3([theta.cos(), theta.sin(), 0.0])
    }

    /// Uniformly distributed on the sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            if let Ok(u) = Self::normalize(v) {
                return u;
            }
        }
    }

    pub fn as_array(&self) -> &Vec3 {
        &self.0
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn neg(&self) -> Self {
        UnitVector3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// The six vectors `a_j`, `b_j` (`j = 1, 2, 3`) fixing `A_j = a_j·σ^j` and
/// `B_j = b_j·σ^j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementSettings {
    pub a: [UnitVector3; 3],
    pub b: [UnitVector3; 3],
}

impl MeasurementSettings {
    pub fn new(a: [UnitVector3; 3], b: [UnitVector3; 3]) -> Self {
        MeasurementSettings { a, b }
    }

    /// Validates each row against the unit-norm tolerance `tol`.
    pub fn from_arrays(a: [Vec3; 3], b: [Vec3; 3], tol: f64) -> Result<Self> {
        let conv = |rows: [Vec3; 3]| -> Result<[UnitVector3; 3]> {
            Ok([
                UnitVector3::with_tolerance(rows[0], tol)?,
                UnitVector3::with_tolerance(rows[1], tol)?,
                UnitVector3::with_tolerance(rows[2], tol)?,
            ])
        };
        Ok(MeasurementSettings { a: conv(a)?, b: conv(b)? })
    }

    /// `a_j = b_j = v` for every qubit.
    pub fn uniform(v: UnitVector3) -> Self {
        MeasurementSettings { a: [v; 3], b: [v; 3] }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let a = [UnitVector3::random(rng), UnitVector3::random(rng), UnitVector3::random(rng)];
        let b = [UnitVector3::random(rng), UnitVector3::random(rng), UnitVector3::random(rng)];
        MeasurementSettings { a, b }
    }

    pub fn a_arrays(&self) -> [Vec3; 3] {
        self.a.map(|v| v.0)
    }

    pub fn b_arrays(&self) -> [Vec3; 3] {
        self.b.map(|v| v.0)
    }

    /// Exchanges `a_j` and `b_j` for one qubit.
    pub fn swap_ab(&self, j: QubitIndex) -> Self {
        let mut out = *self;
        std::mem::swap(&mut out.a[j.pos()], &mut out.b[j.pos()]);
        out
    }
}

/// `s_j = (a_j + b_j)/2`, `t_j = (a_j - b_j)/2`. For unit settings,
/// `|s_j|² + |t_j|² = 1` and `s_j·t_j = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedSettingVectors {
    pub s: [Vec3; 3],
    pub t: [Vec3; 3],
}

pub fn derive_st(m: &MeasurementSettings) -> DerivedSettingVectors {
    derive_st_raw(&m.a_arrays(), &m.b_arrays())
}

/// [`derive_st`] for arbitrary (not necessarily unit) vectors.
pub fn derive_st_raw(a: &[Vec3; 3], b: &[Vec3; 3]) -> DerivedSettingVectors {
    let mut s = [[0.0; 3]; 3];
    let mut t = [[0.0; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            s[j][k] = 0.5 * (a[j][k] + b[j][k]);
            t[j][k] = 0.5 * (a[j][k] - b[j][k]);
        }
    }
    DerivedSettingVectors { s, t }
}

/// `v·σ` for a unit vector: Hermitian, traceless, squares to the identity.
pub fn observable(v: &UnitVector3) -> ComplexMatrix {
    observable_raw(&v.0)
}

/// `v·σ` without the unit-norm requirement.
pub fn observable_raw(v: &Vec3) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(2).expect("dim 2");
    for (axis, &c) in Pauli::AXES.iter().zip(v) {
        acc = &acc + &axis.matrix().scale_real(c);
    }
    acc
}

/// Two-qubit operator `½(A_p A_q + A_p B_q + B_p A_q - B_p B_q)` on the
/// pair `(p, q)` that excludes `excluded`; the first factor is qubit `p`.
pub fn wwzb_pair(m: &MeasurementSettings, excluded: QubitIndex) -> ComplexMatrix {
    wwzb_pair_raw(&m.a_arrays(), &m.b_arrays(), excluded)
}

pub fn wwzb_pair_raw(a: &[Vec3; 3], b: &[Vec3; 3], excluded: QubitIndex) -> ComplexMatrix {
    let (p, q) = excluded.others();
    let ap = observable_raw(&a[p.pos()]);
    let bp = observable_raw(&b[p.pos()]);
    let aq = observable_raw(&a[q.pos()]);
    let bq = observable_raw(&b[q.pos()]);
    let k = |x: &ComplexMatrix, y: &ComplexMatrix| kron(x, y).expect("2x2 ⊗ 2x2");
    let sum = &(&(&k(&ap, &aq) + &k(&ap, &bq)) + &k(&bp, &aq)) - &k(&bp, &bq);
    sum.scale_real(0.5)
}

/// `D^(i) = B2^(i) · C_i + D_i` as an 8×8 operator, with `C_i = (A_i+B_i)/2`
/// and `D_i = (A_i-B_i)/2` on slot `i` and the pair operator on the other two.
pub fn bell_operator(m: &MeasurementSettings, i: QubitIndex) -> ComplexMatrix {
    bell_operator_raw(&m.a_arrays(), &m.b_arrays(), i)
}

/// [`bell_operator`] for arbitrary vectors; linear in each `a_j`, `b_j`.
pub fn bell_operator_raw(a: &[Vec3; 3], b: &[Vec3; 3], i: QubitIndex) -> ComplexMatrix {
    let st = derive_st_raw(a, b);
    let c_i = observable_raw(&st.s[i.pos()]);
    let d_i = observable_raw(&st.t[i.pos()]);
    let pair = embed_pair(&wwzb_pair_raw(a, b, i), i).expect("4x4");
    let prod = &pair * &embed_single(&c_i, i).expect("2x2");
    &prod + &embed_single(&d_i, i).expect("2x2")
}

/// `Re tr(ρ D^(i))` through the full operator.
pub fn expectation_bell(rho: &DensityMatrix, m: &MeasurementSettings, i: QubitIndex) -> Result<f64> {
    expectation_matrix(&bell_operator(m, i), rho)
}

/// `Σ_{jkl} u_j v_k w_l Q_jkl`.
#[inline]
pub(crate) fn contract_q(q: &[[[f64; 3]; 3]; 3], u: &Vec3, v: &Vec3, w: &Vec3) -> f64 {
    let mut acc = 0.0;
    for j in 0..3 {
        if u[j] == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for k in 0..3 {
            inner += v[k] * dot(&q[j][k], w);
        }
        acc += u[j] * inner;
    }
    acc
}

/// `<D^(i)>` from the Pauli tensors: slot `i` always carries `s_i`, the
/// pair `(p, q)` runs over `ss + st + ts - tt`, plus `t_i` against the
/// Bloch vector of qubit `i`.
pub fn expectation_bell_fast(d: &PauliDecomposition, st: &DerivedSettingVectors, i: QubitIndex) -> f64 {
    let (p, q) = i.others();
    let (ip, pp, qp) = (i.pos(), p.pos(), q.pos());
    let term = |xp: &Vec3, xq: &Vec3| {
        let mut slots = [&st.s[ip]; 3];
        slots[pp] = xp;
        slots[qp] = xq;
        contract_q(&d.q, slots[0], slots[1], slots[2])
    };
    let (sp, tp, sq, tq) = (&st.s[pp], &st.t[pp], &st.s[qp], &st.t[qp]);
    term(sp, sq) + term(sp, tq) + term(tp, sq) - term(tp, tq) + dot(&st.t[ip], &d.local(i))
}

/// `Σ_i <D^(i)>²` at one shared setting, through the full operators.
pub fn omega(rho: &DensityMatrix, m: &MeasurementSettings) -> Result<f64> {
    let mut total = 0.0;
    for i in QubitIndex::all() {
        let v = expectation_bell(rho, m, i)?;
        total += v * v;
    }
    Ok(total)
}

/// [`omega`] through the Pauli tensors.
pub fn omega_fast(d: &PauliDecomposition, st: &DerivedSettingVectors) -> f64 {
    QubitIndex::all()
        .into_iter()
        .map(|i| expectation_bell_fast(d, st, i).powi(2))
        .sum()
}
