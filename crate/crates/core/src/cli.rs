//! `tribell` command-line front end.
//!
//! State arguments accept a JSON file path or `builtin:<name>`; settings
//! arguments accept a JSON file path or `builtin:all-x|all-y|all-z`.
//!
//! State file:
//!
//! ```json
//! {"kind": "pure", "data": [[re, im], ... 8 pairs]}
//! {"kind": "density", "data": [[[re, im], ... 8], ... 8 rows]}
//! ```
//!
//! Settings file: `{"a": [[x, y, z], ... 3], "b": [[x, y, z], ... 3]}`.
//!
//! Numbers are printed with 9 significant digits. Exit codes: 0 success,
//! 2 input or validation error, 3 internal consistency failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bell::{self, derive_st, expectation_bell_fast, MeasurementSettings, UnitVector3, Vec3};
use crate::classify::{self, Plane, SampleMode, SourceClass, DEFAULT_MARGIN};
use crate::error::Error;
use crate::optimize::{self, OptimizerConfig};
use crate::pauli::{self, PauliDecomposition};
use crate::quantum_core::{ComplexMatrix, QubitIndex, C64};
use crate::states::{self, AcinParameters, DensityMatrix, PureState};

/// Norm/trace tolerance for states and settings read from disk.
pub const FILE_TOL: f64 = 1e-8;
/// Largest allowed gap between the two expectation paths.
pub const DUAL_PATH_TOL: f64 = 1e-10;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid input (exit 2).
    Input(String),
    /// The two evaluation routes disagree (exit 3).
    Consistency(String),
    /// Argument parsing failure or `--help`; clap picks the exit code.
    Usage(clap::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Consistency(_) => EXIT_CONSISTENCY,
            CliError::Usage(e) => e.exit_code(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Consistency(m) => write!(f, "consistency error: {m}"),
            CliError::Usage(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Consistency(_) | Error::ImaginaryResidue(_) => CliError::Consistency(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "tribell", version, about = "Tripartite Bell operators and bi-separability classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OptimizerArgs {
    /// Number of random starts.
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
}

impl OptimizerArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            n_starts: self.starts,
            max_sweeps: self.max_sweeps,
            abs_tol: self.abs_tol,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pauli coefficients, invariant norms and |Q| of a state.
    Decompose {
        state: String,
    },
    /// <D^(i)> at given settings, checked against the Pauli route.
    Evaluate {
        state: String,
        settings: String,
        #[arg(long, short)]
        index: u8,
    },
    /// Maximize |<D^(i)>| or ω over settings.
    Optimize {
        state: String,
        #[arg(long, short, conflicts_with = "omega", required_unless_present = "omega")]
        index: Option<u8>,
        #[arg(long)]
        omega: bool,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Separability classes excluded by the optimized values.
    Classify {
        state: String,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// CSV of (d1, d2, d3) points for states drawn from a class.
    Sample {
        /// fully-separable, 1-23, 2-13, 12-3, haar-pure or ghz-family.
        #[arg(long)]
        class: String,
        #[arg(short = 'n', long = "n", default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// fixed-settings or optimized.
        #[arg(long, default_value = "fixed-settings")]
        mode: String,
    },
    /// Project sample CSV onto a coordinate plane and label regions.
    Figure {
        /// 12, 13 or 23.
        #[arg(long, default_value = "12")]
        plane: String,
        /// Sample CSV; stdin when omitted or `-`.
        input: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs one subcommand,
/// writing its output to `out`.
pub fn run<I, T, W>(args: I, out: &mut W) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    match cli.command {
        Command::Decompose { state } => cmd_decompose(&state, out),
        Command::Evaluate { state, settings, index } => cmd_evaluate(&state, &settings, index, out),
        Command::Optimize { state, index, omega, opt } => cmd_optimize(&state, index, omega, &opt.config(), out),
        Command::Classify { state, margin, opt } => cmd_classify(&state, margin, &opt.config(), out),
        Command::Sample { class, n, seed, mode } => cmd_sample(&class, n, seed, &mode, out),
        Command::Figure { plane, input } => {
            let text = match input {
                Some(p) if p.as_os_str() != "-" => fs::read_to_string(&p)
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
                _ => {
                    let mut s = String::new();
                    io::stdin().read_to_string(&mut s)?;
                    s
                }
            };
            cmd_figure(&plane, &text, out)
        }
    }
}

/// Rounds to 9 significant digits; `-0` becomes `0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Decimal text of [`round_sig`].
pub fn format_number(x: f64) -> String {
    format!("{}", round_sig(x))
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *v = Value::from(round_sig(x));
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn emit_json<T: Serialize, W: Write>(value: &T, out: &mut W) -> CliResult<()> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Input(e.to_string()))?;
    round_json(&mut v);
    let text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Input(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum StateFile {
    Pure { data: Vec<[f64; 2]> },
    Density { data: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SettingsFile {
    a: Vec<Vec3>,
    b: Vec<Vec3>,
}

fn length_error(what: &str, expected: usize, got: usize) -> CliError {
    CliError::Input(Error::InvalidState {
        invariant: "length",
        detail: format!("{what}: expected {expected} entries, got {got}"),
    }
    .to_string())
}

fn parse_state_json(text: &str) -> CliResult<DensityMatrix> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed state file: {e}")))?;
    match file {
        StateFile::Pure { data } => {
            if data.len() != 8 {
                return Err(length_error("pure state", 8, data.len()));
            }
            let amps: Vec<C64> = data.iter().map(|[re, im]| C64::new(*re, *im)).collect();
            let psi = PureState::with_tolerance(amps.try_into().expect("8 amplitudes"), FILE_TOL)?;
            Ok(states::to_density(&psi))
        }
        StateFile::Density { data } => {
            if data.len() != 8 {
                return Err(length_error("density matrix rows", 8, data.len()));
            }
            let mut entries = Vec::with_capacity(64);
            for row in &data {
                if row.len() != 8 {
                    return Err(length_error("density matrix row", 8, row.len()));
                }
                entries.extend(row.iter().map(|[re, im]| C64::new(*re, *im)));
            }
            let m = ComplexMatrix::from_row_major(8, entries)?;
            Ok(DensityMatrix::with_tolerance(m, FILE_TOL)?)
        }
    }
}

fn parse_f64_list(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Input(format!("bad number `{s}`: {e}")))
        })
        .collect()
}

fn builtin_state(name: &str) -> CliResult<DensityMatrix> {
    let psi = match name {
        "ghz" => states::ghz(),
        "w" => states::w_state(),
        "000" => states::basis_state(0),
        "mixed-identity" => return Ok(DensityMatrix::maximally_mixed()),
        "phi-plus-otimes-0" => states::phi_plus_otimes_zero(),
        "plus-otimes-phi-plus" => states::plus_otimes_phi_plus(),
        other => {
            if let Some(alpha) = other.strip_prefix("generalized-ghz:") {
                let alpha: f64 = alpha
                    .parse()
                    .map_err(|e| CliError::Input(format!("bad alpha `{alpha}`: {e}")))?;
                states::generalized_ghz(alpha)
            } else if let Some(params) = other.strip_prefix("acin:") {
                let v = parse_f64_list(params)?;
                if v.len() != 6 {
                    return Err(CliError::Input(format!(
                        "acin needs 6 numbers (λ0..λ4, φ), got {}",
                        v.len()
                    )));
                }
                let p = AcinParameters::new([v[0], v[1], v[2], v[3], v[4]], v[5])?;
                states::acin_state(&p)
            } else {
                return Err(CliError::Input(format!("unknown builtin state `{other}`")));
            }
        }
    };
    Ok(states::to_density(&psi))
}

/// Loads a state from `builtin:<name>` or a JSON file.
pub fn load_state(arg: &str) -> CliResult<DensityMatrix> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return builtin_state(name);
    }
    let text = fs::read_to_string(arg).map_err(|e| CliError::Input(format!("{arg}: {e}")))?;
    parse_state_json(&text).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{arg}: {m}")),
        other => other,
    })
}

fn parse_settings_json(text: &str) -> CliResult<MeasurementSettings> {
    let file: SettingsFile =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed settings file: {e}")))?;
    let rows = |v: Vec<Vec3>, name: &str| -> CliResult<[Vec3; 3]> {
        let n = v.len();
        v.try_into()
            .map_err(|_| CliError::Input(format!("settings `{name}`: expected 3 vectors, got {n}")))
    };
    Ok(MeasurementSettings::from_arrays(rows(file.a, "a")?, rows(file.b, "b")?, FILE_TOL)?)
}

/// Loads settings from `builtin:all-x|all-y|all-z` or a JSON file.
pub fn load_settings(arg: &str) -> CliResult<MeasurementSettings> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        let v = match name {
            "all-x" => UnitVector3::X,
            "all-y" => UnitVector3::Y,
            "all-z" => UnitVector3::Z,
            other => return Err(CliError::Input(format!("unknown builtin settings `{other}`"))),
        };
        return Ok(MeasurementSettings::uniform(v));
    }
    let text = fs::read_to_string(arg).map_err(|e| CliError::Input(format!("{arg}: {e}")))?;
    parse_settings_json(&text)
}

fn qubit(i: u8) -> CliResult<QubitIndex> {
    Ok(QubitIndex::new(i)?)
}

#[derive(Serialize)]
struct Norms {
    two_body: f64,
    q_local: f64,
}

#[derive(Serialize)]
struct DecomposeOutput {
    #[serde(flatten)]
    coefficients: PauliDecomposition,
    invariant_norms: Norms,
    q_norm: f64,
}

pub fn cmd_decompose<W: Write>(state: &str, out: &mut W) -> CliResult<()> {
    let rho = load_state(state)?;
    let d = pauli::decompose(&rho);
    let (two_body, q_local) = pauli::invariant_norms(&d);
    let q_norm = pauli::q_norm(&d);
    emit_json(
        &DecomposeOutput {
            coefficients: d,
            invariant_norms: Norms { two_body, q_local },
            q_norm,
        },
        out,
    )
}

#[derive(Serialize)]
struct EvaluateOutput {
    index: u8,
    value: f64,
    dual_path_residual: f64,
}

pub fn cmd_evaluate<W: Write>(state: &str, settings: &str, index: u8, out: &mut W) -> CliResult<()> {
    let i = qubit(index)?;
    let rho = load_state(state)?;
    let m = load_settings(settings)?;
    let value = bell::expectation_bell(&rho, &m, i)?;
    let fast = expectation_bell_fast(&pauli::decompose(&rho), &derive_st(&m), i);
    let residual = (value - fast).abs();
    if residual > DUAL_PATH_TOL {
        return Err(CliError::Consistency(format!(
            "operator route {value} and Pauli route {fast} differ by {residual:e}"
        )));
    }
    emit_json(
        &EvaluateOutput {
            index,
            value,
            dual_path_residual: residual,
        },
        out,
    )
}

#[derive(Serialize)]
struct OptimizeOutput {
    objective: String,
    #[serde(flatten)]
    result: optimize::OptimizationResult,
    config: OptimizerConfig,
}

pub fn cmd_optimize<W: Write>(
    state: &str,
    index: Option<u8>,
    omega: bool,
    cfg: &OptimizerConfig,
    out: &mut W,
) -> CliResult<()> {
    let rho = load_state(state)?;
    let (objective, result) = match (omega, index) {
        (true, _) => ("omega".to_string(), optimize::maximize_omega(&rho, cfg)?),
        (false, Some(i)) => {
            let q = qubit(i)?;
            let r = optimize::seesaw_max_abs_d(&rho, q, cfg)?;
            let check = bell::expectation_bell(&rho, &r.settings, q)?;
            if (check - r.signed_value).abs() > DUAL_PATH_TOL {
                return Err(CliError::Consistency(format!(
                    "optimized value {} not reproduced by the operator route ({check})",
                    r.signed_value
                )));
            }
            (format!("d{i}"), r)
        }
        (false, None) => return Err(CliError::Input("either --index or --omega is required".into())),
    };
    emit_json(
        &OptimizeOutput {
            objective,
            result,
            config: *cfg,
        },
        out,
    )
}

pub fn cmd_classify<W: Write>(state: &str, margin: f64, cfg: &OptimizerConfig, out: &mut W) -> CliResult<()> {
    let rho = load_state(state)?;
    let report = classify::classify(&rho, cfg, margin)?;
    emit_json(&report, out)
}

pub fn cmd_sample<W: Write>(class: &str, n: usize, seed: u64, mode: &str, out: &mut W) -> CliResult<()> {
    let source: SourceClass = class.parse()?;
    let mode: SampleMode = mode.parse()?;
    let points = classify::sample_region(source, n, seed, mode)?;
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(["d1", "d2", "d3", "class"]).map_err(io_err)?;
    for p in &points {
        w.write_record([
            format_number(p.d[0]),
            format_number(p.d[1]),
            format_number(p.d[2]),
            p.source.label().to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses sample CSV (`d1,d2,d3,class` with header) into points and labels.
pub fn parse_sample_csv(text: &str) -> CliResult<Vec<([f64; 3], String)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("line 1: {e}")))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["d1", "d2", "d3", "class"] {
        return Err(CliError::Input("line 1: expected header `d1,d2,d3,class`".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Input(format!("line {line}: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 4 {
            return Err(CliError::Input(format!(
                "line {line}: expected 4 fields, got {}",
                record.len()
            )));
        }
        let mut d = [0.0; 3];
        for k in 0..3 {
            d[k] = record[k]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Input(format!("line {line}: bad number `{}`", &record[k])))?;
        }
        rows.push((d, record[3].to_string()));
    }
    Ok(rows)
}

pub fn cmd_figure<W: Write>(plane: &str, csv_text: &str, out: &mut W) -> CliResult<()> {
    let plane: Plane = plane.parse()?;
    let rows = parse_sample_csv(csv_text)?;
    let projected = classify::figure_projection(rows.iter().map(|(d, c)| (d, c.as_str())), plane);
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(["u", "v", "region", "class"]).map_err(io_err)?;
    for r in &projected {
        w.write_record([format_number(r.u), format_number(r.v), r.region.label().to_string(), r.class.clone()])
            .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}
