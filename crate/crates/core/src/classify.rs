//! Separability-class exclusion from optimized Bell values, and sampling of
//! the `(<D^(1)>, <D^(2)>, <D^(3)>)` coordinate space.
//!
//! Bounds used:
//!
//! | class       | `m1`  | `m2`  | `m3`  |
//! |-------------|-------|-------|-------|
//! | fully sep.  | 1     | 1     | 1     |
//! | `S_{1-23}`  | √2    | 1     | 1     |
//! | `S_{2-13}`  | 1     | √2    | 1     |
//! | `S_{12-3}`  | 1     | 1     | √2    |
//!
//! so `m_i > 1` rules out full separability and the two bi-separable classes
//! that do not split off qubit `i`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{expectation_bell_fast, derive_st, MeasurementSettings};
use crate::error::{Error, Result};
use crate::optimize::{maximize_omega_decomposed, seesaw_decomposed, OptimizerConfig};
use crate::pauli::decompose;
use crate::quantum_core::QubitIndex;
use crate::states::{self, Bipartition, DensityMatrix, FactorRank, SeparabilityClass};

/// Default slack above 1 before a value counts as a violation.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Slack on the region boundaries `|u|, |v| <= 1`.
pub const REGION_TOL: f64 = 1e-9;

/// Wording attached to every report.
pub const REPORT_NOTE: &str = "Exclusions are necessary conditions only: a class missing from \
`excluded` is not certified to contain the state. Classes are convex hulls of products across one \
named partition; mixtures across different partitions fall outside all three bi-separable classes.";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    /// Optimized `max |<D^(i)>|` for `i = 1, 2, 3`.
    pub m: [f64; 3],
    pub omega_max: f64,
    pub excluded: Vec<SeparabilityClass>,
    pub margin: f64,
    /// All four classes excluded.
    pub genuine_tripartite_indicated: bool,
    /// Every optimization converged within `max_sweeps`.
    pub converged: bool,
    /// Maximizing settings for each `i`.
    pub settings: [MeasurementSettings; 3],
    pub note: &'static str,
}

/// Classes ruled out by the optimized values `m`.
pub fn exclusions(m: &[f64; 3], margin: f64) -> Vec<SeparabilityClass> {
    let mut out: Vec<SeparabilityClass> = Vec::new();
    for i in QubitIndex::all() {
        if m[i.pos()] > 1.0 + margin {
            out.push(SeparabilityClass::FullySeparable);
            for p in Bipartition::ALL {
                if p.separated() != i {
                    out.push(SeparabilityClass::Biseparable(p));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn classify(rho: &DensityMatrix, cfg: &OptimizerConfig, margin: f64) -> Result<ClassificationReport> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::InvalidParameters(format!("margin must be positive, got {margin}")));
    }
    cfg.validate()?;
    let d = decompose(rho);
    let runs: Vec<_> = QubitIndex::all().iter().map(|&i| seesaw_decomposed(&d, i, cfg)).collect();
    let omega = maximize_omega_decomposed(&d, cfg);
    let m = [runs[0].value, runs[1].value, runs[2].value];
    let excluded = exclusions(&m, margin);
    Ok(ClassificationReport {
        m,
        omega_max: omega.value,
        genuine_tripartite_indicated: excluded.len() == SeparabilityClass::ALL.len(),
        excluded,
        margin,
        converged: runs.iter().all(|r| r.converged) && omega.converged,
        settings: [runs[0].settings, runs[1].settings, runs[2].settings],
        note: REPORT_NOTE,
    })
}

/// State families available to [`sample_region`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceClass {
    FullySeparable,
    Biseparable(Bipartition),
    HaarPure,
    /// `cos α|000> + sin α|111>` under a random local unitary.
    GhzFamily,
}

impl SourceClass {
    pub fn label(self) -> &'static str {
        match self {
            SourceClass::FullySeparable => "fully-separable",
            SourceClass::Biseparable(p) => p.label(),
            SourceClass::HaarPure => "haar-pure",
            SourceClass::GhzFamily => "ghz-family",
        }
    }
}

impl fmt::Display for SourceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SourceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar-pure" => Ok(SourceClass::HaarPure),
            "ghz-family" => Ok(SourceClass::GhzFamily),
            other => match other.parse::<SeparabilityClass>()? {
                SeparabilityClass::FullySeparable => Ok(SourceClass::FullySeparable),
                SeparabilityClass::Biseparable(p) => Ok(SourceClass::Biseparable(p)),
            },
        }
    }
}

impl Serialize for SourceClass {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// All three coordinates at one random setting drawn per state.
    FixedSettings,
    /// Each coordinate is the signed optimum of its own see-saw run.
    Optimized,
}

impl FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-settings" | "fixed" => Ok(SampleMode::FixedSettings),
            "optimized" => Ok(SampleMode::Optimized),
            other => Err(Error::InvalidParameters(format!("unknown sample mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub d: [f64; 3],
    pub source: SourceClass,
}

fn draw_state<R: Rng + ?Sized>(source: SourceClass, rng: &mut R) -> DensityMatrix {
    match source {
        SourceClass::FullySeparable => {
            states::random_product(SeparabilityClass::FullySeparable, FactorRank::Pure, rng)
        }
        SourceClass::Biseparable(p) => {
            states::random_product(SeparabilityClass::Biseparable(p), FactorRank::Pure, rng)
        }
        SourceClass::HaarPure => states::to_density(&states::random_pure_with(rng)),
        SourceClass::GhzFamily => {
            let alpha = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
            let us = states::random_local_unitaries(rng);
            let psi = states::generalized_ghz(alpha)
                .apply_local(&us)
                .expect("local unitaries preserve the norm");
            states::to_density(&psi)
        }
    }
}

/// `n` points from `source`, deterministic in `seed`.
pub fn sample_region(source: SourceClass, n: usize, seed: u64, mode: SampleMode) -> Result<Vec<RegionPoint>> {
    if n == 0 {
        return Err(Error::InvalidParameters("n must be at least 1".into()));
    }
    let mut master = states::seeded_rng(seed);
    let point_seeds: Vec<u64> = (0..n).map(|_| master.next_u64()).collect();
    let points = point_seeds
        .into_par_iter()
        .map(|point_seed| {
            let mut rng = states::seeded_rng(point_seed);
            let rho = draw_state(source, &mut rng);
            let d = decompose(&rho);
            let coords = match mode {
                SampleMode::FixedSettings => {
                    let st = derive_st(&MeasurementSettings::random(&mut rng));
                    QubitIndex::all().map(|i| expectation_bell_fast(&d, &st, i))
                }
                SampleMode::Optimized => {
                    let cfg = OptimizerConfig::with_seed(rng.next_u64());
                    QubitIndex::all().map(|i| seesaw_decomposed(&d, i, &cfg).signed_value)
                }
            };
            RegionPoint { d: coords, source }
        })
        .collect();
    Ok(points)
}

/// Coordinate plane kept by [`figure_projection`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    P12,
    P13,
    P23,
}

impl Plane {
    fn axes(self) -> (usize, usize) {
        match self {
            Plane::P12 => (0, 1),
            Plane::P13 => (0, 2),
            Plane::P23 => (1, 2),
        }
    }
}

impl FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "12" => Ok(Plane::P12),
            "13" => Ok(Plane::P13),
            "23" => Ok(Plane::P23),
            other => Err(Error::InvalidParameters(format!("unknown plane `{other}` (use 12, 13 or 23)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    I,
    II,
    III,
    #[serde(rename = "corner")]
    Corner,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::Corner => "corner",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Region of a projected point: `I` inside the unit square, `II` beyond it
/// along `u` only, `III` along `v` only, `corner` beyond it along both.
pub fn region_of(u: f64, v: f64) -> Region {
    let out_u = u.abs() > 1.0 + REGION_TOL;
    let out_v = v.abs() > 1.0 + REGION_TOL;
    match (out_u, out_v) {
        (false, false) => Region::I,
        (true, false) => Region::II,
        (false, true) => Region::III,
        (true, true) => Region::Corner,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRow {
    pub u: f64,
    pub v: f64,
    pub region: Region,
    pub class: String,
}

/// Drops the coordinate not in `plane` and labels each point's region.
pub fn figure_projection<'a, I>(points: I, plane: Plane) -> Vec<FigureRow>
where
    I: IntoIterator<Item = (&'a [f64; 3], &'a str)>,
{
    let (ku, kv) = plane.axes();
    points
        .into_iter()
        .map(|(d, class)| FigureRow {
            u: d[ku],
            v: d[kv],
            region: region_of(d[ku], d[kv]),
            class: class.to_string(),
        })
        .collect()
}

/// [`figure_projection`] over sampled points.
pub fn project_points(points: &[RegionPoint], plane: Plane) -> Vec<FigureRow> {
    let labels: Vec<(&[f64; 3], &str)> = points.iter().map(|p| (&p.d, p.source.label())).collect();
    figure_projection(labels, plane)
}
