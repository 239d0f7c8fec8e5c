//! Maximization of `|<D^(i)>|` and of `ω = Σ_i <D^(i)>²` over measurement
//! settings for a fixed state.
//!
//! `<D^(i)>` is affine in every single setting vector when the other five
//! are held fixed, so a block update can be solved exactly: with
//! `<D> = g·v + c`, the best unit `v` for `|<D>|` is `sign(c) g/|g|`. The
//! see-saw cycles `a_1, b_1, a_2, b_2, a_3, b_3` until a sweep gains less
//! than `abs_tol`. For `ω` the block objective `Σ_i (g_i·v + c_i)²` is a
//! quadratic on the sphere; it is climbed by projected gradient steps with
//! step halving. Both run from `n_starts` random settings, each start with
//! its own RNG stream, in parallel.

use std::f64::consts::{FRAC_PI_4, PI};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{self, derive_st_raw, expectation_bell_fast, norm, omega_fast, MeasurementSettings, UnitVector3, Vec3};
use crate::error::{Error, Result};
use crate::pauli::{decompose, PauliDecomposition};
use crate::quantum_core::QubitIndex;
use crate::states::{self, DensityMatrix};

/// Below this gradient norm a block update is skipped.
pub const DEGENERATE_GRADIENT: f64 = 1e-14;
/// Allowed per-update decrease before it counts as a monotonicity violation.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Tolerance between the closed-form planar `ω` and the operator route.
pub const PLANAR_ORACLE_TOL: f64 = 1e-10;

const MAX_INNER_STEPS: usize = 100;
const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub n_starts: usize,
    pub max_sweeps: usize,
    pub abs_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            n_starts: 32,
            max_sweeps: 500,
            abs_tol: 1e-12,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        OptimizerConfig { seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidConfig("n_starts must be at least 1".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidConfig("abs_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Counters accumulated over every start.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Telemetry {
    pub updates: usize,
    /// Block updates skipped because the gradient vanished.
    pub degenerate_updates: usize,
    /// Updates that lowered the objective by more than [`MONOTONE_SLACK`].
    pub monotonicity_violations: usize,
    /// Largest single-update decrease seen (0 when monotone).
    pub max_decrease: f64,
    pub starts_converged: usize,
}

impl Telemetry {
    fn merge(mut self, other: &Telemetry) -> Telemetry {
        self.updates += other.updates;
        self.degenerate_updates += other.degenerate_updates;
        self.monotonicity_violations += other.monotonicity_violations;
        self.max_decrease = self.max_decrease.max(other.max_decrease);
        self.starts_converged += other.starts_converged;
        self
    }

    fn record_step(&mut self, before: f64, after: f64) {
        self.updates += 1;
        let drop = before - after;
        if drop > self.max_decrease {
            self.max_decrease = drop;
        }
        if drop > MONOTONE_SLACK {
            self.monotonicity_violations += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    /// Best objective: `max |<D^(i)>|` or `max ω`.
    pub value: f64,
    /// `<D^(i)>` with sign at `settings` (equals `value` for `ω`).
    pub signed_value: f64,
    pub settings: MeasurementSettings,
    /// Sweeps taken by the winning start.
    pub sweeps_used: usize,
    /// Whether the winning start met `abs_tol` before `max_sweeps`.
    pub converged: bool,
    pub best_start: usize,
    pub per_start_values: Vec<f64>,
    pub telemetry: Telemetry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    A(usize),
    B(usize),
}

const SLOTS: [Slot; 6] = [Slot::A(0), Slot::B(0), Slot::A(1), Slot::B(1), Slot::A(2), Slot::B(2)];

/// Working (possibly non-unit) setting vectors.
#[derive(Debug, Clone, Copy)]
struct Working {
    a: [Vec3; 3],
    b: [Vec3; 3],
}

impl Working {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let s = MeasurementSettings::random(rng);
        Working {
            a: s.a_arrays(),
            b: s.b_arrays(),
        }
    }

    fn get(&self, slot: Slot) -> Vec3 {
        match slot {
            Slot::A(j) => self.a[j],
            Slot::B(j) => self.b[j],
        }
    }

    fn set(&mut self, slot: Slot, v: Vec3) {
        match slot {
            Slot::A(j) => self.a[j] = v,
            Slot::B(j) => self.b[j] = v,
        }
    }

    fn value(&self, d: &PauliDecomposition, i: QubitIndex) -> f64 {
        expectation_bell_fast(d, &derive_st_raw(&self.a, &self.b), i)
    }

    fn omega(&self, d: &PauliDecomposition) -> f64 {
        omega_fast(d, &derive_st_raw(&self.a, &self.b))
    }

    /// `(g, c)` with `<D^(i)> = g·v + c` as a function of the vector in
    /// `slot`, from evaluations at `0` and the three basis vectors.
    fn affine(&self, d: &PauliDecomposition, slot: Slot, indices: &[QubitIndex]) -> Vec<(Vec3, f64)> {
        let mut probe = *self;
        probe.set(slot, [0.0; 3]);
        let base: Vec<f64> = indices.iter().map(|&i| probe.value(d, i)).collect();
        let mut grads = vec![[0.0; 3]; indices.len()];
        for k in 0..3 {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            probe.set(slot, e);
            for (n, &i) in indices.iter().enumerate() {
                grads[n][k] = probe.value(d, i) - base[n];
            }
        }
        grads.into_iter().zip(base).collect()
    }

    fn into_settings(self) -> MeasurementSettings {
        let unit = |v: Vec3| UnitVector3::normalize(v).expect("optimizer keeps vectors on the sphere");
        MeasurementSettings::new(self.a.map(unit), self.b.map(unit))
    }
}

struct StartOutcome {
    value: f64,
    working: Working,
    sweeps: usize,
    converged: bool,
    telemetry: Telemetry,
}

fn run_starts<F>(cfg: &OptimizerConfig, run: F) -> Vec<StartOutcome>
where
    F: Fn(Working) -> StartOutcome + Sync,
{
    (0..cfg.n_starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = states::seeded_rng(cfg.seed);
            rng.set_stream(start as u64);
            run(Working::random(&mut rng))
        })
        .collect()
}

/// Index of the largest value; the first one wins ties.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    best
}

fn seesaw_start(d: &PauliDecomposition, i: QubitIndex, cfg: &OptimizerConfig, mut w: Working) -> StartOutcome {
    let mut tel = Telemetry::default();
    let mut current = w.value(d, i).abs();
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let before = current;
        for slot in SLOTS {
            let (g, c) = w.affine(d, slot, &[i])[0];
            let gn = norm(&g);
            if gn < DEGENERATE_GRADIENT {
                tel.degenerate_updates += 1;
                continue;
            }
            let sign = if c >= 0.0 { 1.0 } else { -1.0 };
            w.set(slot, g.map(|x| sign * x / gn));
            let next = w.value(d, i).abs();
            tel.record_step(current, next);
            current = next;
        }
        if (current - before).abs() < cfg.abs_tol {
            converged = true;
            break;
        }
    }
    if converged {
        tel.starts_converged = 1;
    }
    StartOutcome {
        value: current,
        working: w,
        sweeps,
        converged,
        telemetry: tel,
    }
}

fn finish(outcomes: Vec<StartOutcome>, signed: impl Fn(&Working) -> f64) -> OptimizationResult {
    let per_start_values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let best = argmax(&per_start_values);
    let telemetry = outcomes.iter().fold(Telemetry::default(), |acc, o| acc.merge(&o.telemetry));
    let win = &outcomes[best];
    OptimizationResult {
        value: win.value,
        signed_value: signed(&win.working),
        settings: win.working.into_settings(),
        sweeps_used: win.sweeps,
        converged: win.converged,
        best_start: best,
        per_start_values,
        telemetry,
    }
}

/// Largest `|<D^(i)>_ρ|` found by multi-start see-saw.
pub fn seesaw_max_abs_d(rho: &DensityMatrix, i: QubitIndex, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let d = decompose(rho);
    Ok(seesaw_decomposed(&d, i, cfg))
}

pub(crate) fn seesaw_decomposed(d: &PauliDecomposition, i: QubitIndex, cfg: &OptimizerConfig) -> OptimizationResult {
    let outcomes = run_starts(cfg, |w| seesaw_start(d, i, cfg, w));
    finish(outcomes, |w| w.value(d, i))
}

fn omega_block(coeffs: &[(Vec3, f64)], v: &Vec3) -> f64 {
    coeffs.iter().map(|(g, c)| (bell::dot(g, v) + c).powi(2)).sum()
}

/// Projected gradient ascent of `Σ (g_i·v + c_i)²` over unit `v`.
fn omega_block_ascent(coeffs: &[(Vec3, f64)], start: Vec3, abs_tol: f64, tel: &mut Telemetry) -> Vec3 {
    let mut v = start;
    let mut value = omega_block(coeffs, &v);
    let mut step = 1.0;
    for _ in 0..MAX_INNER_STEPS {
        let mut grad = [0.0; 3];
        for (g, c) in coeffs {
            let r = 2.0 * (bell::dot(g, &v) + c);
            for k in 0..3 {
                grad[k] += r * g[k];
            }
        }
        if norm(&grad) < DEGENERATE_GRADIENT {
            tel.degenerate_updates += 1;
            break;
        }
        let mut eta = step;
        let mut accepted = None;
        while eta > MIN_STEP {
            let raw = [v[0] + eta * grad[0], v[1] + eta * grad[1], v[2] + eta * grad[2]];
            let n = norm(&raw);
            if n > 0.0 {
                let cand = raw.map(|x| x / n);
                let cv = omega_block(coeffs, &cand);
                if cv > value {
                    accepted = Some((cand, cv));
                    break;
                }
            }
            eta *= 0.5;
        }
        let Some((cand, cv)) = accepted else { break };
        let gain = cv - value;
        v = cand;
        value = cv;
        step = (2.0 * eta).min(1e3);
        if gain < abs_tol {
            break;
        }
    }
    v
}

fn omega_start(d: &PauliDecomposition, cfg: &OptimizerConfig, mut w: Working) -> StartOutcome {
    let all = QubitIndex::all();
    let mut tel = Telemetry::default();
    let mut current = w.omega(d);
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let before = current;
        for slot in SLOTS {
            let coeffs = w.affine(d, slot, &all);
            let v = omega_block_ascent(&coeffs, w.get(slot), cfg.abs_tol, &mut tel);
            let previous = w.get(slot);
            w.set(slot, v);
            let next = w.omega(d);
            if next < current {
                // Rounding in the block model; keep the old vector.
                w.set(slot, previous);
                tel.record_step(current, next);
                continue;
            }
            tel.record_step(current, next);
            current = next;
        }
        if (current - before).abs() < cfg.abs_tol {
            converged = true;
            break;
        }
    }
    if converged {
        tel.starts_converged = 1;
    }
    StartOutcome {
        value: current,
        working: w,
        sweeps,
        converged,
        telemetry: tel,
    }
}

/// Largest `ω = Σ_i <D^(i)>²` at a single shared setting.
pub fn maximize_omega(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let d = decompose(rho);
    Ok(maximize_omega_decomposed(&d, cfg))
}

pub(crate) fn maximize_omega_decomposed(d: &PauliDecomposition, cfg: &OptimizerConfig) -> OptimizationResult {
    let outcomes = run_starts(cfg, |w| omega_start(d, cfg, w));
    finish(outcomes, |w| w.omega(d))
}

/// Settings with `s_i = (cos θ_i, sin θ_i, 0)/√2` and
/// `t_i = (-sin θ_i, cos θ_i, 0)/√2` on every qubit, i.e. `a_i` at angle
/// `θ_i + π/4` and `b_i` at `θ_i - π/4`.
pub fn planar_case_settings(theta: [f64; 3]) -> MeasurementSettings {
    MeasurementSettings::new(
        theta.map(|t| UnitVector3::planar(t + FRAC_PI_4)),
        theta.map(|t| UnitVector3::planar(t - FRAC_PI_4)),
    )
}

/// Closed form `3/2 (cos Θ - sin Θ)²`, `Θ = θ1 + θ2 + θ3`, for `ω` of the
/// GHZ state at [`planar_case_settings`]. Fails if the operator route
/// disagrees by more than [`PLANAR_ORACLE_TOL`].
pub fn omega_planar_oracle(theta1: f64, theta2: f64, theta3: f64) -> Result<f64> {
    let total = theta1 + theta2 + theta3;
    let closed = 1.5 * (total.cos() - total.sin()).powi(2);
    let settings = planar_case_settings([theta1, theta2, theta3]);
    let direct = bell::omega(&states::to_density(&states::ghz()), &settings)?;
    if (direct - closed).abs() > PLANAR_ORACLE_TOL {
        return Err(Error::Consistency(format!(
            "planar ω: closed form {closed} vs operator {direct}"
        )));
    }
    Ok(closed)
}

/// Three-angle planar family used for brute force on `D^(i)`: qubit `i`
/// measures `a_i = b_i` at `θ_i`; each other qubit `j` uses `a_j` at
/// `θ_j + π/4` and `b_j` at `θ_j - π/4`.
pub fn planar_grid_settings(i: QubitIndex, theta: [f64; 3]) -> MeasurementSettings {
    let mut a = [UnitVector3::X; 3];
    let mut b = [UnitVector3::X; 3];
    for j in 0..3 {
        if j == i.pos() {
            a[j] = UnitVector3::planar(theta[j]);
            b[j] = a[j];
        } else {
            a[j] = UnitVector3::planar(theta[j] + FRAC_PI_4);
            b[j] = UnitVector3::planar(theta[j] - FRAC_PI_4);
        }
    }
    MeasurementSettings::new(a, b)
}

/// Exhaustive `max |<D^(i)>|` over [`planar_grid_settings`] with each angle
/// on `n_angles` equally spaced points of `[0, 2π)`.
pub fn planar_grid_max_abs_d(rho: &DensityMatrix, i: QubitIndex, n_angles: usize) -> f64 {
    let d = decompose(rho);
    let angles: Vec<f64> = (0..n_angles).map(|k| 2.0 * PI * k as f64 / n_angles as f64).collect();
    let mut best = 0.0_f64;
    for &t1 in &angles {
        for &t2 in &angles {
            for &t3 in &angles {
                let st = bell::derive_st(&planar_grid_settings(i, [t1, t2, t3]));
                best = best.max(expectation_bell_fast(&d, &st, i).abs());
            }
        }
    }
    best
}
