//! Command-line front end.
//!
//! Every subcommand builds a [`Table`] and writes it as CSV (header row,
//! fixed column order, floats with 17 significant digits) or JSON. Output
//! goes to `--out`, else the config's `output.path`, else stdout. Nothing is
//! written unless the command succeeds.
//!
//! Exit codes: 0 success, 2 invalid input or config, 3 resource cap
//! exceeded, 1 I/O failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bath::{BathModel, BathSpec};
use crate::codes::{
    build_codebook_with, count_and_bounds, encode_n_qubit, encode_w, exchange_eigencheck,
    ghz_phase, ghz_phase_numeric, parse_bits, uniform_h_ex, wrap_phase, Construction, MAX_COUNT_N,
};
use crate::error::Error;
use crate::linalg::{basis_label, C64};
use crate::system::{HamiltonianSpec, PairLayout, TermFlags};
use crate::zeno::{
    demo_protected, demo_unprotected, fit_sweep, time_grid, zeno_sweep, Initial, Mode, ZenoConfig,
};

// ---------------------------------------------------------------------------
// Errors

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Cap(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Cap(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::CapExceeded { .. } => CliError::Cap(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

type CliResult<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------------------------
// Experiment config

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A complex number written as `0.5` or `[0.5, -0.1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Parts([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> C64 {
        match self {
            ComplexValue::Real(re) => C64::new(re, 0.0),
            ComplexValue::Parts([re, im]) => C64::new(re, im),
        }
    }
}

/// One value for every pair, or one per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerPair<T> {
    Uniform(T),
    Each(Vec<T>),
}

impl<T: Clone> PerPair<T> {
    fn expand(&self, n_pairs: usize, name: &str) -> CliResult<Vec<T>> {
        match self {
            PerPair::Uniform(v) => Ok(vec![v.clone(); n_pairs]),
            PerPair::Each(v) if v.len() == n_pairs => Ok(v.clone()),
            PerPair::Each(v) => Err(invalid(format!(
                "hamiltonian.{name} has {} entries but the code uses {n_pairs} pairs",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HamiltonianSection {
    pub epsilon0: f64,
    pub lambda_z: PerPair<f64>,
    pub lambda_plus: PerPair<ComplexValue>,
    pub j: PerPair<f64>,
    pub terms: TermFlags,
}

impl Default for HamiltonianSection {
    fn default() -> Self {
        HamiltonianSection {
            epsilon0: 1.0,
            lambda_z: PerPair::Uniform(0.3),
            lambda_plus: PerPair::Uniform(ComplexValue::Real(0.1)),
            j: PerPair::Uniform(0.5),
            terms: TermFlags::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathSection {
    pub dim: usize,
    pub model: BathModel,
    pub omega: f64,
    /// Defaults to the global seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub shared: bool,
}

impl Default for BathSection {
    fn default() -> Self {
        let d = BathSpec::default();
        BathSection { dim: d.dim, model: d.model, omega: d.omega, seed: None, shared: d.shared }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    PostSelect,
    Trajectories,
    Ensemble,
}

/// Either `alpha` and `beta`, or `coeffs` keyed by logical bitstring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ComplexValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<ComplexValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<BTreeMap<String, ComplexValue>>,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            alpha: Some(ComplexValue::Real(0.6)),
            beta: Some(ComplexValue::Real(0.8)),
            coeffs: None,
        }
    }
}

impl InitialSection {
    pub fn to_initial(&self) -> CliResult<Initial> {
        match (self.alpha, self.beta, &self.coeffs) {
            (Some(a), Some(b), None) => Ok(Initial::Qubit { alpha: a.value(), beta: b.value() }),
            (None, None, Some(map)) => {
                Ok(Initial::Logical(map.iter().map(|(k, v)| (k.clone(), v.value())).collect()))
            }
            _ => Err(invalid("zeno.initial needs either alpha and beta, or coeffs")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZenoSection {
    pub t0: f64,
    pub n: usize,
    pub mode: ModeName,
    /// Trajectory count in `trajectories` mode.
    pub trajectories: usize,
    /// Round counts for `zeno-sweep`.
    pub ns: Vec<usize>,
    pub initial: InitialSection,
    pub construction: Construction,
    /// Qubit labels of each pair; defaults to `(0,1), (2,3), ...`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(usize, usize)>>,
    /// Defaults to one past the largest pair label.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_qubit: Option<usize>,
}

impl Default for ZenoSection {
    fn default() -> Self {
        ZenoSection {
            t0: 1.0,
            n: 16,
            mode: ModeName::PostSelect,
            trajectories: 200,
            ns: vec![8, 16, 32, 64, 128, 256, 512],
            initial: InitialSection::default(),
            construction: Construction::Standard,
            pairs: None,
            test_qubit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { path: None, format: Format::Csv }
    }
}

/// Top-level config file. Every section and key is optional; missing ones
/// take the weak-coupling defaults. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output: OutputSection,
    pub hamiltonian: HamiltonianSection,
    pub bath: BathSection,
    pub zeno: ZenoSection,
}

impl ExperimentConfig {
    /// Parses JSON; errors name the offending key path.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                invalid(format!("config: {inner}"))
            } else {
                invalid(format!("config at `{path}`: {inner}"))
            }
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn zeno_config(&self, seed: u64) -> CliResult<ZenoConfig> {
        let z = &self.zeno;
        let initial = z.initial.to_initial()?;
        let book = build_codebook_with(initial.n_logical()?, z.construction)?;
        let n_pairs = book.n_pairs;
        let layout = match &z.pairs {
            None => {
                let pairs = (0..n_pairs).map(|k| (2 * k, 2 * k + 1)).collect();
                PairLayout::new(pairs, Some(z.test_qubit.unwrap_or(2 * n_pairs)))?
            }
            Some(pairs) => {
                let next = pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
                PairLayout::new(pairs.clone(), Some(z.test_qubit.unwrap_or(next)))?
            }
        };
        let h = &self.hamiltonian;
        let spec = HamiltonianSpec {
            epsilon0: h.epsilon0,
            lambda_z: h.lambda_z.expand(n_pairs, "lambda_z")?,
            lambda_plus: h
                .lambda_plus
                .expand(n_pairs, "lambda_plus")?
                .into_iter()
                .map(ComplexValue::value)
                .collect(),
            j_per_pair: h.j.expand(n_pairs, "j")?,
            bath: BathSpec {
                dim: self.bath.dim,
                model: self.bath.model,
                omega: self.bath.omega,
                seed: self.bath.seed.unwrap_or(seed),
                shared: self.bath.shared,
            },
            terms: h.terms,
        };
        let mode = match z.mode {
            ModeName::PostSelect => Mode::PostSelect,
            ModeName::Ensemble => Mode::Ensemble,
            ModeName::Trajectories => Mode::Trajectories { count: z.trajectories, seed },
        };
        let config = ZenoConfig {
            t0: z.t0,
            n: z.n,
            mode,
            spec,
            layout,
            initial,
            construction: z.construction,
        };
        config.validate()?;
        Ok(config)
    }
}

// ---------------------------------------------------------------------------
// Tables

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Rows under a fixed header. JSON output is an array of objects with the
/// same fields, unless a command supplies its own document.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub json: Option<Value>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new(), json: None }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        if let Some(doc) = &self.json {
            return doc.clone();
        }
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, v)| (k.to_string(), v.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.to_json())
                    .map_err(|e| CliError::Io(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Arguments

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstructionArg {
    Standard,
    General,
}

impl From<ConstructionArg> for Construction {
    fn from(c: ConstructionArg) -> Self {
        match c {
            ConstructionArg::Standard => Construction::Standard,
            ConstructionArg::General => Construction::General,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dfs-zeno",
    version,
    about = "Pair-encoded qubits under exchange and Zeno-style parity tests"
)]
struct Cli {
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (defaults to stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Amplitudes of an encoded logical state.
    Encode {
        /// Amplitude of |0_L⟩, as `re` or `re:im`.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        /// Number of logical qubits for `--coeffs`.
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated amplitudes of the 2^n logical basis states.
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
        #[arg(long, value_enum, default_value = "standard")]
        construction: ConstructionArg,
    },
    /// Leakage, success and fidelity against the number of test rounds.
    ZenoSweep {
        /// Comma-separated round counts, ascending.
        #[arg(long, alias = "Ns", value_delimiter = ',')]
        ns: Option<Vec<usize>>,
    },
    /// Codeword counts and the bounds on them.
    DfsCount {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
    /// Logical-state to pair-bit assignment.
    Codebook {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "standard")]
        construction: ConstructionArg,
    },
    /// Exchange eigenvalue of the encoded W-class state.
    WCheck {
        #[arg(long)]
        n: usize,
        /// Comma-separated amplitudes (default: uniform).
        #[arg(long, allow_hyphen_values = true)]
        alphas: Option<String>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        j: f64,
    },
    /// Relative phase of the encoded GHZ components under exchange.
    GhzPhase {
        /// Bit pattern of the first component, e.g. `0110`.
        #[arg(long)]
        bits: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        /// One coupling, or one per qubit, comma-separated.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        j: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
    },
    /// Two-qubit code against the four-qubit code under exchange.
    DemoExchange {
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        beta: String,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        j: f64,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        t_max: f64,
        #[arg(long, default_value_t = 33)]
        points: usize,
    },
}

/// Parses `re` or `re:im`.
pub fn parse_complex(token: &str) -> CliResult<C64> {
    let bad = || invalid(format!("`{token}` is not a number or `re:im` pair"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let z = match token.split_once(':') {
        Some((re, im)) => C64::new(num(re)?, num(im)?),
        None => C64::new(num(token)?, 0.0),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

fn parse_complex_list(list: &str) -> CliResult<Vec<C64>> {
    list.split(',').map(parse_complex).collect()
}

fn parse_real_list(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| invalid(format!("`{s}` is not a number")))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_encode(
    config: &ExperimentConfig,
    alpha: Option<&str>,
    beta: Option<&str>,
    n: Option<usize>,
    coeffs: Option<&str>,
    construction: Construction,
) -> CliResult<Table> {
    let map: BTreeMap<String, C64> = match (alpha, beta, n, coeffs) {
        (None, None, Some(n), Some(list)) => {
            let values = parse_complex_list(list)?;
            let book = build_codebook_with(n, construction)?;
            if values.len() != book.len() {
                return Err(invalid(format!(
                    "--coeffs has {} entries, {n} logical qubits need {}",
                    values.len(),
                    book.len()
                )));
            }
            values.into_iter().enumerate().map(|(i, c)| (book.logical_label(i), c)).collect()
        }
        (Some(a), Some(b), None, None) => {
            Initial::Qubit { alpha: parse_complex(a)?, beta: parse_complex(b)? }.coefficients()
        }
        (None, None, None, None) => config.zeno.initial.to_initial()?.coefficients(),
        _ => return Err(invalid("give --alpha and --beta, or --n and --coeffs")),
    };
    let initial = Initial::Logical(map);
    let book = build_codebook_with(initial.n_logical()?, construction)?;
    let psi = encode_n_qubit(&initial.coefficients(), &book)?;
    let mut table = Table::new(&["basis", "re", "im"]);
    for (i, a) in psi.amplitudes().iter().enumerate() {
        if a.norm() > 1e-15 {
            table.push(vec![basis_label(i, psi.factor_dims()).into(), a.re.into(), a.im.into()]);
        }
    }
    Ok(table)
}

fn cmd_zeno_sweep(config: &ExperimentConfig, seed: u64, ns: Option<&[usize]>) -> CliResult<Table> {
    let zc = config.zeno_config(seed)?;
    let ns = ns.unwrap_or(&config.zeno.ns);
    let rows = zeno_sweep(&zc, ns)?;
    let mut table = Table::new(&[
        "record",
        "n",
        "leakage",
        "success",
        "fidelity",
        "slope",
        "intercept",
        "r_squared",
    ]);
    for r in &rows {
        table.push(vec![
            "point".into(),
            r.n.into(),
            r.leakage.into(),
            r.success.into(),
            r.fidelity.into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    // Zero leakage (a pure DFS run) or too few points leave the fit empty.
    let fit = fit_sweep(&rows).ok();
    let f = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Float);
    table.push(vec![
        "fit".into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        f(fit.map(|x| x.slope)),
        f(fit.map(|x| x.intercept)),
        f(fit.map(|x| x.r_squared)),
    ]);
    Ok(table)
}

fn cmd_dfs_count(n_max: usize) -> CliResult<Table> {
    if !(1..=MAX_COUNT_N).contains(&n_max) {
        return Err(invalid(format!("--n-max must lie in 1..={MAX_COUNT_N}")));
    }
    let mut table = Table::new(&[
        "n",
        "m_star",
        "count",
        "log2_count",
        "bounds_hold",
        "sufficient",
        "n_plus_1_insufficient",
    ]);
    for n in 1..=n_max {
        let b = count_and_bounds(n)?;
        let count = i64::try_from(b.count).map_err(|_| invalid("count overflows i64"))?;
        table.push(vec![
            n.into(),
            b.m_star.into(),
            Cell::Int(count),
            b.log2_count.into(),
            b.bounds_hold.into(),
            b.sufficient.into(),
            b.n_plus_1_insufficient.into(),
        ]);
    }
    Ok(table)
}

fn cmd_codebook(n: usize, construction: Construction) -> CliResult<Table> {
    let book = build_codebook_with(n, construction)?;
    let mut table = Table::new(&["logical", "pair_bits", "weight"]);
    for (i, bits) in book.logical_map.iter().enumerate() {
        table.push(vec![
            book.logical_label(i).into(),
            crate::codes::bits_to_string(bits).into(),
            book.m_star.into(),
        ]);
    }
    table.json = Some(serde_json::to_value(&book).map_err(|e| CliError::Io(e.to_string()))?);
    Ok(table)
}

fn cmd_w_check(n: usize, alphas: Option<&str>, j: f64) -> CliResult<Table> {
    if n < 3 {
        return Err(invalid("--n must be at least 3"));
    }
    let alphas = match alphas {
        Some(list) => parse_complex_list(list)?,
        None => vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n],
    };
    if alphas.len() != n {
        return Err(invalid(format!("--alphas has {} entries, expected {n}", alphas.len())));
    }
    let psi = encode_w(&alphas)?;
    let check = exchange_eigencheck(&psi, &uniform_h_ex(n, j)?)?;
    let mut table = Table::new(&["n", "j", "eigenvalue", "expected", "residual", "is_eigenstate"]);
    table.push(vec![
        n.into(),
        j.into(),
        check.eigenvalue.into(),
        ((n as f64 - 2.0) * j).into(),
        check.residual.into(),
        check.is_eigenstate.into(),
    ]);
    Ok(table)
}

fn cmd_ghz_phase(
    bits: &str,
    t: f64,
    j: &str,
    alpha: Option<&str>,
    beta: Option<&str>,
) -> CliResult<Table> {
    let bits_v = parse_bits(bits)?;
    if bits_v.is_empty() {
        return Err(invalid("--bits is empty"));
    }
    let mut j_list = parse_real_list(j)?;
    if j_list.len() == 1 {
        j_list = vec![j_list[0]; bits_v.len()];
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let alpha = alpha.map_or(Ok(C64::new(h, 0.0)), parse_complex)?;
    let beta = beta.map_or(Ok(C64::new(h, 0.0)), parse_complex)?;
    let formula = ghz_phase(t, &j_list, &bits_v)?;
    let numeric = ghz_phase_numeric(alpha, beta, t, &j_list, &bits_v)?;
    let mut table = Table::new(&[
        "n",
        "bits",
        "t",
        "phi_formula",
        "phi_formula_wrapped",
        "phi_numeric",
        "difference",
    ]);
    table.push(vec![
        bits_v.len().into(),
        bits.into(),
        t.into(),
        formula.into(),
        wrap_phase(formula).into(),
        numeric.into(),
        wrap_phase(formula - numeric).abs().into(),
    ]);
    Ok(table)
}

fn cmd_demo_exchange(
    alpha: &str,
    beta: &str,
    j: f64,
    t_max: f64,
    points: usize,
) -> CliResult<Table> {
    if points == 0 || !(t_max.is_finite() && t_max >= 0.0) {
        return Err(invalid("--points must be positive and --t-max finite and nonnegative"));
    }
    let (a, b) = (parse_complex(alpha)?, parse_complex(beta)?);
    let grid = time_grid(t_max, points);
    let bare = demo_unprotected(a, b, j, &grid)?;
    let coded = demo_protected(a, b, j, &grid)?;
    let mut table = Table::new(&["t", "jt", "fidelity_unprotected", "fidelity_protected"]);
    for (u, p) in bare.iter().zip(&coded) {
        table.push(vec![u.t.into(), (j * u.t).into(), u.fidelity.into(), p.fidelity.into()]);
    }
    Ok(table)
}

fn execute(cli: &Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let seed = cli.seed.unwrap_or(config.seed);
    let table = match &cli.command {
        Command::Encode { alpha, beta, n, coeffs, construction } => cmd_encode(
            &config,
            alpha.as_deref(),
            beta.as_deref(),
            *n,
            coeffs.as_deref(),
            (*construction).into(),
        )?,
        Command::ZenoSweep { ns } => cmd_zeno_sweep(&config, seed, ns.as_deref())?,
        Command::DfsCount { n_max } => cmd_dfs_count(*n_max)?,
        Command::Codebook { n, construction } => cmd_codebook(*n, (*construction).into())?,
        Command::WCheck { n, alphas, j } => cmd_w_check(*n, alphas.as_deref(), *j)?,
        Command::GhzPhase { bits, t, j, alpha, beta } => {
            cmd_ghz_phase(bits, *t, j, alpha.as_deref(), beta.as_deref())?
        }
        Command::DemoExchange { alpha, beta, j, t_max, points } => {
            cmd_demo_exchange(alpha, beta, *j, *t_max, *points)?
        }
    };
    let format = cli.format.unwrap_or(config.output.format);
    let bytes = table.render(format)?;
    match cli.out.as_ref().or(config.output.path.as_ref()) {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
