//! `ftt`: run, sweep, threshold, calibrate, fit, modes and parse commands
//! over the bundled protocols or user `.ftc` files.

pub mod format;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use ftqed::analysis::{
    calibrate_placement, compare_specs, find_threshold, fit_error_rate, sweep, AnalysisError, CalibrationReport,
    Candidate, Comparison, FitObjective, SweepResult, ThresholdOptions, ThresholdResult,
};
use ftqed::circuit::{parse_circuit, render_circuit};
use ftqed::noise::{evaluate_exact, mc_correct_probability, ExactResult, PlacementPolicy, Strategy};
use ftqed::protocols::{build_protocol, ProtocolName, ProtocolSpec, Registry};
use ftqed::statekit::Pauli;

use format::{cell, number, optional, pretty};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Engine(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Engine(_) => 3,
            CliError::Output { .. } => 4,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Noise(_) => CliError::Engine(e.to_string()),
            AnalysisError::Protocol(ref p) if matches!(p, ftqed::protocols::ProtocolError::Noise(_)) => {
                CliError::Engine(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn engine_err(e: impl std::fmt::Display) -> CliError {
    CliError::Engine(e.to_string())
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ftt", version, about = "Exact noisy-circuit analysis for the [[4,2,2]] code")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// F_p, f_p and D_p at one success probability.
    Run(RunArgs),
    /// F_p, f_p and D_p over a grid of p.
    Sweep(SweepArgs),
    /// Locate the largest p where D_p changes sign.
    Threshold(ThresholdArgs),
    /// Evaluate every placement candidate against the target thresholds.
    Calibrate(CalibrateArgs),
    /// Fit p to an observed mode distribution.
    Fit(FitArgs),
    /// Basis-state populations at p.
    Modes(ModesArgs),
    /// Check a .ftc file and print its canonical form.
    Parse(ParseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ErrorKind {
    X,
    Y,
    Z,
}

impl From<ErrorKind> for Pauli {
    fn from(e: ErrorKind) -> Self {
        match e {
            ErrorKind::X => Pauli::X,
            ErrorKind::Y => Pauli::Y,
            ErrorKind::Z => Pauli::Z,
        }
    }
}

impl ErrorKind {
    fn as_str(self) -> &'static str {
        match self {
            ErrorKind::X => "x",
            ErrorKind::Y => "y",
            ErrorKind::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    SvgData,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Bundled protocol name or path to a .ftc file.
    #[arg(long)]
    pub protocol: String,
    /// Pauli error applied at every location.
    #[arg(long, value_enum, default_value = "x")]
    pub error: ErrorKind,
    /// Placement for the encoded circuit (standard or calibrated).
    #[arg(long)]
    pub placement: Option<String>,
    /// Bare circuit to compare against (name or .ftc path).
    #[arg(long)]
    pub baseline: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub engine: Engine,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.9)]
    pub p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.0)]
    pub p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_max: f64,
    /// Scan step of the sign grid.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with `mode,probability` rows (or a single probability column).
    #[arg(long)]
    pub observed: PathBuf,
    /// Minimise the multinomial negative log-likelihood instead of squared distance.
    #[arg(long)]
    pub likelihood: bool,
}

#[derive(Debug, Args)]
pub struct ModesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub p: f64,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args`, runs the command, and maps failures onto exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match configure_workers().and_then(|_| execute(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ftt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var("FTT_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| config_err(format!("FTT_WORKERS must be an integer, got `{raw}`")))?;
    // Fails only if a pool already exists, which keeps the earlier setting.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    let registry = Registry::bundled();
    match &cli.command {
        Command::Run(a) => cmd_run(a, &registry),
        Command::Sweep(a) => cmd_sweep(a, &registry),
        Command::Threshold(a) => cmd_threshold(a, &registry),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Fit(a) => cmd_fit(a, &registry),
        Command::Modes(a) => cmd_modes(a, &registry),
        Command::Parse(a) => cmd_parse(a, &registry),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Output { path: path.to_path_buf(), source }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Output { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))
}

fn load_file(path: &Path, placement: Option<&str>, registry: &Registry) -> Result<ProtocolSpec> {
    let text = read_text(path)?;
    let doc = parse_circuit(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let encoded = doc.measurement.postselect.is_some();
    let policy = match placement {
        Some(name) => PlacementPolicy::named(name).map_err(config_err)?,
        None if encoded => PlacementPolicy::calibrated(),
        None => PlacementPolicy::standard(),
    };
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "custom".into());
    ProtocolSpec::from_document(&name, doc, policy, registry).map_err(config_err)
}

/// A bundled name, or a path to a `.ftc` file.
fn load(arg: &str, placement: Option<&str>, registry: &Registry) -> Result<ProtocolSpec> {
    if let Ok(name) = ProtocolName::from_str(arg) {
        let mut spec = build_protocol(name, registry).map_err(config_err)?;
        if let Some(p) = placement {
            if name.is_encoded() {
                spec.placement = PlacementPolicy::named(p).map_err(config_err)?;
            }
        }
        return Ok(spec);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(config_err(format!("unknown protocol `{arg}` (not a bundled name or an existing file)")));
    }
    load_file(path, placement, registry)
}

/// `(encoded, bare)` for a command; either may be absent for user files.
fn load_pair(c: &Common, registry: &Registry) -> Result<(Option<ProtocolSpec>, Option<ProtocolSpec>)> {
    let placement = c.placement.as_deref();
    let baseline = c.baseline.as_deref().map(|b| load(b, None, registry)).transpose()?;
    if let Ok(name) = ProtocolName::from_str(&c.protocol) {
        let (enc, bare) = name.pair();
        let encoded = load(enc.as_str(), placement, registry)?;
        let bare = match baseline {
            Some(b) => b,
            None => load(bare.as_str(), None, registry)?,
        };
        return Ok((Some(encoded), Some(bare)));
    }
    let spec = load(&c.protocol, placement, registry)?;
    Ok(if spec.is_encoded() { (Some(spec), baseline) } else { (baseline, Some(spec)) })
}

fn comparison(c: &Common, registry: &Registry) -> Result<Comparison> {
    match load_pair(c, registry)? {
        (Some(enc), Some(bare)) => Ok(compare_specs(&enc, &bare, c.error.into(), registry)?),
        _ => Err(config_err("this command needs an encoded circuit and a bare baseline (use --baseline)")),
    }
}

fn exact(spec: &ProtocolSpec, pauli: Pauli, registry: &Registry) -> Result<ExactResult> {
    let program = spec.program(pauli, registry).map_err(engine_err)?;
    evaluate_exact(&program, Strategy::Merged).map_err(engine_err)
}

fn cmd_run(a: &RunArgs, registry: &Registry) -> Result<()> {
    let c = &a.common;
    if !(0.0..=1.0).contains(&a.p) {
        return Err(config_err(format!("--p {} outside [0, 1]", a.p)));
    }
    let pauli: Pauli = c.error.into();
    let (encoded, bare) = load_pair(c, registry)?;
    let mut report = Map::new();
    report.insert("protocol".into(), json!(c.protocol));
    report.insert("error".into(), json!(c.error.as_str()));
    report.insert("p".into(), number(a.p));
    let (f_enc, f_bare) = match a.engine {
        Engine::Exact => {
            report.insert("engine".into(), json!("exact"));
            let value = |spec: &Option<ProtocolSpec>| -> Result<Option<f64>> {
                spec.as_ref().map(|s| Ok(exact(s, pauli, registry)?.correct.eval(a.p))).transpose()
            };
            (value(&encoded)?, value(&bare)?)
        }
        Engine::Mc => {
            let (Some(samples), Some(seed)) = (a.samples, a.seed) else {
                return Err(config_err("--engine mc requires --samples and --seed"));
            };
            report.insert("engine".into(), json!("mc"));
            report.insert("samples".into(), json!(samples));
            report.insert("seed".into(), json!(seed));
            let estimate = |spec: &Option<ProtocolSpec>| -> Result<Option<(f64, f64)>> {
                spec.as_ref()
                    .map(|s| {
                        let program = s.program(pauli, registry).map_err(engine_err)?;
                        let e = mc_correct_probability(&program, a.p, samples, seed).map_err(engine_err)?;
                        Ok((e.estimate, e.stderr))
                    })
                    .transpose()
            };
            let (e, b) = (estimate(&encoded)?, estimate(&bare)?);
            let mut stderr = Map::new();
            stderr.insert("F_p".into(), optional(e.map(|x| x.1)));
            stderr.insert("f_p".into(), optional(b.map(|x| x.1)));
            report.insert("stderr".into(), Value::Object(stderr));
            (e.map(|x| x.0), b.map(|x| x.0))
        }
    };
    report.insert("F_p".into(), optional(f_enc));
    report.insert("f_p".into(), optional(f_bare));
    report.insert("D_p".into(), optional(f_enc.zip(f_bare).map(|(x, y)| x - y)));
    let text = match c.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&Value::Object(report)),
        Format::Csv => {
            let s = |v: Option<f64>| v.map(cell).unwrap_or_default();
            format!("p,F_p,f_p,D_p\n{},{},{},{}\n", cell(a.p), s(f_enc), s(f_bare), s(f_enc.zip(f_bare).map(|(x, y)| x - y)))
        }
        Format::SvgData => return Err(config_err("svg-data is only available for sweep")),
    };
    emit(c.output.as_deref(), &text)
}

fn sweep_csv(s: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| engine_err(e);
    w.write_record(["p", "F_p", "f_p", "D_p"]).map_err(io)?;
    for r in &s.rows {
        w.write_record([cell(r.p), cell(r.encoded), cell(r.bare), cell(r.d)]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(engine_err)?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

fn svg_path(csv: &Path) -> PathBuf {
    csv.with_extension("svg")
}

fn cmd_sweep(a: &SweepArgs, registry: &Registry) -> Result<()> {
    let c = &a.common;
    let cmp = comparison(c, registry)?;
    let s = sweep(&cmp, a.p_min, a.p_max, a.steps)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(c.output.as_deref(), &sweep_csv(&s)?),
        Format::Json => {
            let rows: Vec<Value> = s
                .rows
                .iter()
                .map(|r| json!({"p": number(r.p), "F_p": number(r.encoded), "f_p": number(r.bare), "D_p": number(r.d)}))
                .collect();
            let v = json!({"protocol": s.encoded_name, "baseline": s.bare_name, "error": c.error.as_str(), "rows": rows});
            emit(c.output.as_deref(), &pretty(&v))
        }
        Format::SvgData => {
            let Some(out) = c.output.as_deref() else {
                return Err(config_err("svg-data writes two files and needs --output"));
            };
            let threshold = find_threshold(&cmp, ThresholdOptions::default())?.p_star;
            let svg_out = svg_path(out);
            emit(Some(out), &sweep_csv(&s)?)?;
            emit(Some(&svg_out), &format::sweep_svg(&s, threshold))
        }
    }
}

fn threshold_json(t: &ThresholdResult) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("status".into(), json!(t.status.as_str()));
    m.insert("p_star".into(), optional(t.p_star));
    m.insert("bracket".into(), t.bracket.map(|(a, b)| json!([number(a), number(b)])).unwrap_or(Value::Null));
    m.insert("residual".into(), optional(t.residual));
    m.insert("other_roots".into(), Value::Array(t.other_roots.iter().map(|&r| number(r)).collect()));
    m.insert("max_interior_d".into(), number(t.max_interior_d));
    m
}

fn cmd_threshold(a: &ThresholdArgs, registry: &Registry) -> Result<()> {
    let c = &a.common;
    let cmp = comparison(c, registry)?;
    let t = find_threshold(&cmp, ThresholdOptions { lo: a.p_min, hi: a.p_max, step: a.step, tol: a.tol })?;
    let text = match c.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut m = threshold_json(&t);
            m.insert("protocol".into(), json!(cmp.encoded_name));
            m.insert("baseline".into(), json!(cmp.bare_name));
            m.insert("error".into(), json!(c.error.as_str()));
            pretty(&Value::Object(m))
        }
        Format::Csv => format!(
            "status,p_star,residual\n{},{},{}\n",
            t.status,
            t.p_star.map(cell).unwrap_or_default(),
            t.residual.map(cell).unwrap_or_default()
        ),
        Format::SvgData => return Err(config_err("svg-data is only available for sweep")),
    };
    emit(c.output.as_deref(), &text)
}

const ENCODED_NAMES: [&str; 3] = ["prep", "h2", "cnot21-h2"];

fn calibration_json(r: &CalibrationReport) -> Value {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|row| {
            let mut thresholds = Map::new();
            let mut locations = Map::new();
            for (name, e) in ENCODED_NAMES.iter().zip(&row.evaluations) {
                thresholds.insert((*name).into(), optional(e.p_star()));
                locations.insert((*name).into(), json!(e.locations));
            }
            json!({
                "placement": row.candidate.to_string(),
                "locations": locations,
                "thresholds": thresholds,
                "prep_vs_four_location_bare": optional(row.prep_four_location_bare),
                "max_deviation": optional(Some(row.max_deviation)),
                "matches": row.matches,
            })
        })
        .collect();
    let holdout = r.holdout.as_ref().map(|h| {
        json!({
            "y_h2": Value::Object(threshold_json(&h.y_h2)),
            "z_h2": Value::Object(threshold_json(&h.z_h2)),
            "y_matches": h.y_matches,
        })
    });
    json!({
        "selected": r.selected_row().map(|row| row.candidate.to_string()),
        "nearest": r.rows.get(r.nearest).map(|row| row.candidate.to_string()),
        "selected_is_bundled": r.selected_is_bundled,
        "four_location_bare_prep_feasible": r.four_location_bare_prep_feasible,
        "holdout": holdout,
        "candidates": rows,
    })
}

fn calibration_csv(r: &CalibrationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "placement",
        "L_prep",
        "L_h2",
        "L_cnot21_h2",
        "p_prep",
        "p_h2",
        "p_cnot21_h2",
        "p_prep_four_location_bare",
        "max_deviation",
        "matches",
        "selected",
    ])
    .map_err(engine_err)?;
    for (i, row) in r.rows.iter().enumerate() {
        let p = |x: Option<f64>| x.map(cell).unwrap_or_default();
        let mut rec = vec![row.candidate.to_string()];
        rec.extend(row.evaluations.iter().map(|e| e.locations.to_string()));
        rec.extend(row.evaluations.iter().map(|e| p(e.p_star())));
        rec.push(p(row.prep_four_location_bare));
        rec.push(p(Some(row.max_deviation).filter(|d| d.is_finite())));
        rec.push(row.matches.to_string());
        rec.push((r.selected == Some(i)).to_string());
        w.write_record(&rec).map_err(engine_err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(engine_err)?).expect("ascii"))
}

fn cmd_calibrate(a: &CalibrateArgs) -> Result<()> {
    let report = calibrate_placement(&Candidate::all()).map_err(engine_err)?;
    let text = match a.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&calibration_json(&report)),
        Format::Csv => calibration_csv(&report)?,
        Format::SvgData => return Err(config_err("svg-data is only available for sweep")),
    };
    emit(a.output.as_deref(), &text)?;
    if report.selected.is_none() {
        let nearest = &report.rows[report.nearest];
        return Err(engine_err(format!(
            "no candidate matches every target; nearest is `{}` (max deviation {:.4})",
            nearest.candidate, nearest.max_deviation
        )));
    }
    Ok(())
}

fn mode_label(index: usize, n_qubits: usize) -> String {
    format!("{index:0n_qubits$b}")
}

fn read_observed(path: &Path, n_qubits: usize) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    let dim = 1usize << n_qubits;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = vec![None; dim];
    let mut next = 0;
    for (line, rec) in rdr.records().enumerate() {
        let bad = |msg: String| config_err(format!("{}: row {}: {msg}", path.display(), line + 1));
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let (index, value) = match rec.len() {
            1 => (next, &rec[0]),
            2 => {
                let label = &rec[0];
                let index = if label.len() == n_qubits && label.chars().all(|c| c == '0' || c == '1') {
                    usize::from_str_radix(label, 2).expect("binary")
                } else {
                    label.parse().map_err(|_| bad(format!("bad mode `{label}`")))?
                };
                (index, &rec[1])
            }
            n => return Err(bad(format!("expected 1 or 2 columns, got {n}"))),
        };
        let value: f64 = value.parse().map_err(|_| bad(format!("bad probability `{value}`")))?;
        let slot = out.get_mut(index).ok_or_else(|| bad(format!("mode {index} outside 0..{dim}")))?;
        if slot.replace(value).is_some() {
            return Err(bad(format!("mode {index} given twice")));
        }
        next = index + 1;
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| config_err(format!("{}: missing mode {}", path.display(), mode_label(i, n_qubits)))))
        .collect()
}

fn cmd_fit(a: &FitArgs, registry: &Registry) -> Result<()> {
    let c = &a.common;
    let spec = load(&c.protocol, c.placement.as_deref(), registry)?;
    let model = exact(&spec, c.error.into(), registry)?;
    let observed = read_observed(&a.observed, spec.document.circuit.n_qubits())?;
    let objective = if a.likelihood { FitObjective::Likelihood } else { FitObjective::LeastSquares };
    let fit = fit_error_rate(&observed, &model, objective)?;
    let text = match c.format.unwrap_or(Format::Csv) {
        Format::Csv => format!("p_hat,residual\n{},{}\n", cell(fit.p_hat), cell(fit.residual)),
        Format::Json => pretty(&json!({
            "protocol": spec.name,
            "error": c.error.as_str(),
            "objective": if a.likelihood { "likelihood" } else { "least-squares" },
            "p_hat": number(fit.p_hat),
            "residual": number(fit.residual),
        })),
        Format::SvgData => return Err(config_err("svg-data is only available for sweep")),
    };
    emit(c.output.as_deref(), &text)
}

fn cmd_modes(a: &ModesArgs, registry: &Registry) -> Result<()> {
    let c = &a.common;
    if !(0.0..=1.0).contains(&a.p) {
        return Err(config_err(format!("--p {} outside [0, 1]", a.p)));
    }
    let spec = load(&c.protocol, c.placement.as_deref(), registry)?;
    let n = spec.document.circuit.n_qubits();
    let dist = exact(&spec, c.error.into(), registry)?.mode_distribution(a.p);
    let text = match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("mode,probability\n");
            for (i, v) in dist.iter().enumerate() {
                s.push_str(&format!("{},{}\n", mode_label(i, n), cell(*v)));
            }
            s
        }
        Format::Json => {
            let mut m = Map::new();
            for (i, v) in dist.iter().enumerate() {
                m.insert(mode_label(i, n), number(*v));
            }
            pretty(&json!({"protocol": spec.name, "error": c.error.as_str(), "p": number(a.p), "modes": m}))
        }
        Format::SvgData => return Err(config_err("svg-data is only available for sweep")),
    };
    emit(c.output.as_deref(), &text)
}

fn cmd_parse(a: &ParseArgs, registry: &Registry) -> Result<()> {
    let text = read_text(&a.file)?;
    let doc = parse_circuit(&text).map_err(|e| config_err(format!("{}: {e}", a.file.display())))?;
    if doc.measurement.ideal.is_some() {
        registry
            .resolve_measurement(&doc.measurement, doc.circuit.n_qubits())
            .map_err(|e| config_err(format!("{}: {e}", a.file.display())))?;
    }
    emit(a.output.as_deref(), &render_circuit(&doc.circuit, &doc.measurement))
}
