//! Command-line front end.
//!
//! Every command is an ordinary function returning a [`CmdOutput`], so the
//! binary is a thin wrapper and tests can drive commands in-process.
//!
//! Exit codes: 0 success, 1 verdict mismatch, 2 usage or parse error,
//! 3 input validation error.
//!
//! Matrix files are JSON objects `{"dim": N, "entries": [[re, im], ...]}`
//! with the N² entries in row-major order.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Number, Value};

use crate::curve::{partition, verify_partition_spacing, CurveSpec};
use crate::decomposition::{cartan_decompose, check_omega, verify_decomposition};
use crate::error::Error;
use crate::hvmodels::{CryptoNonlocalModel, LeggettModel, ModelKind, QmFaithful};
use crate::operators::{
    devectorize, hs_inner, max_asymmetry, transpose_partner, vectorize, CMatrix, CoefficientVector,
    HermitianOperator, Side, C64,
};
use crate::random::{random_hermitian, random_omega, seeded_rng, SimRng};
use crate::sampling::Execution;
use crate::states::{joint_average, local_average, make_state, square_average, MaxEntangledState, SchmidtBasis};
use crate::theorem::{final_bound, verify_theorem, Budget, TheoremReport, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// Residual threshold of the identities suite.
pub const IDENTITY_TOL: f64 = 1e-10;
const IDENTITY_TRIALS: usize = 25;
/// Coefficients below this are treated as absent in decomposition output.
const ALPHA_ZERO_TOL: f64 = 1e-12;
/// `E_τ|f|` of the Leggett model, the threshold for its expected verdict.
const LEGGETT_ABS_F: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the basis, transpose-partner and average identities on random instances.
    Identities,
    /// Decompose a Hermitian matrix into commuting Ω_N components.
    Decompose,
    /// Print the partition of the rotation curve from a to -a.
    Curve,
    /// Run the chained-bound verification for one model.
    Theorem,
    /// Scan partition sizes for the Leggett model and find the first violation.
    LeggettScan,
}

#[derive(Debug, Parser)]
#[command(name = "cnlverify", version, about = "Verify that crypto-nonlocal models of maximally entangled states have no local parts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Hilbert space dimension N.
    #[arg(long, global = true, default_value_t = 2)]
    dim: usize,
    /// Partition size, or a comma-separated list of sizes.
    #[arg(long = "n", global = true, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 10_000)]
    samples_tau: u64,
    #[arg(long, global = true, default_value_t = 1_000)]
    samples_mu: u64,
    #[arg(long, global = true, default_value = "qm-faithful")]
    model: String,
    /// Matrix file (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Worker count; part of the seed-splitting contract. Defaults to the
    /// available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dim: usize,
    /// Empty means the command's default.
    pub n: Vec<usize>,
    pub seed: u64,
    pub n_tau: u64,
    pub n_mu: u64,
    pub model: String,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            dim: 2,
            n: Vec::new(),
            seed: 1,
            n_tau: 10_000,
            n_mu: 1_000,
            model: ModelKind::QmFaithful.name().to_string(),
            input: None,
            output: None,
            format: Format::Human,
            workers: Execution::default().workers,
        }
    }

    fn budget(&self) -> Budget {
        Budget::new(self.n_tau, self.n_mu, Execution::new(self.workers))
    }
}

/// Exit code, report text, and diagnostics of one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmdOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CmdOutput {
    fn failure(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: message.into(),
        }
    }
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::DimensionTooSmall(_) | Error::Unsupported(_) => EXIT_USAGE,
            _ => EXIT_VALIDATION,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A report ready to emit: the text plus the exit code it implies.
struct Report {
    code: i32,
    text: String,
    note: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CmdOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                CmdOutput {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                CmdOutput::failure(code, text)
            };
        }
    };
    let config = RunConfig {
        command: cli.command,
        dim: cli.dim,
        n: cli.n,
        seed: cli.seed,
        n_tau: cli.samples_tau,
        n_mu: cli.samples_mu,
        model: cli.model,
        input: cli.input,
        output: cli.output,
        format: cli.format,
        workers: cli.workers.unwrap_or_else(|| Execution::default().workers),
    };
    execute(&config)
}

/// Runs the command named in `config`.
pub fn execute(config: &RunConfig) -> CmdOutput {
    match config.command {
        Command::Identities => cmd_identities(config),
        Command::Decompose => cmd_decompose(config),
        Command::Curve => cmd_curve(config),
        Command::Theorem => cmd_theorem(config),
        Command::LeggettScan => cmd_leggett_scan(config),
    }
}

fn finish(config: &RunConfig, result: CliResult<Report>) -> CmdOutput {
    let report = match result {
        Ok(r) => r,
        Err(e) => return CmdOutput::failure(e.code, e.message),
    };
    let mut out = CmdOutput {
        code: report.code,
        stdout: String::new(),
        stderr: report.note,
    };
    match &config.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &report.text) {
                return CmdOutput::failure(EXIT_VALIDATION, format!("cannot write {}: {e}", path.display()));
            }
        }
        None => out.stdout = report.text,
    }
    out
}

fn check_paths(config: &RunConfig) -> CliResult<()> {
    if let Some(input) = &config.input {
        if !input.is_file() {
            return Err(usage(format!("input file {} does not exist", input.display())));
        }
    }
    if let Some(output) = &config.output {
        let parent = output.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(usage(format!("output directory {} does not exist", parent.display())));
        }
    }
    Ok(())
}

fn check_common(config: &RunConfig) -> CliResult<()> {
    if config.dim < 2 {
        return Err(usage(format!("--dim must be at least 2, got {}", config.dim)));
    }
    if config.n.contains(&0) {
        return Err(usage("--n values must be at least 1"));
    }
    if config.workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    check_paths(config)
}

/// Round-trip-safe decimal with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn num(x: f64) -> Value {
    Number::from_str(&fmt_f64(x)).map_or(Value::Null, Value::Number)
}

fn to_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

/// Parses the matrix file format. Errors are parse errors, not validation.
pub fn parse_matrix(text: &str) -> std::result::Result<CMatrix, String> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| format!("malformed matrix file: {e}"))?;
    if file.entries.len() != file.dim * file.dim {
        return Err(format!(
            "matrix file declares dim {} but has {} entries",
            file.dim,
            file.entries.len()
        ));
    }
    Ok(CMatrix::from_row_iterator(
        file.dim,
        file.dim,
        file.entries.iter().map(|[re, im]| C64::new(*re, *im)),
    ))
}

fn matrix_json(m: &CMatrix) -> Value {
    let entries: Vec<Value> = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| Value::Array(vec![num(m[(i, j)].re), num(m[(i, j)].im)]))
        .collect();
    json!({ "dim": m.nrows(), "entries": entries })
}

/// Renders a matrix in the matrix file format.
pub fn format_matrix(m: &CMatrix) -> String {
    to_json(&matrix_json(m))
}

fn read_hermitian(config: &RunConfig) -> CliResult<Option<HermitianOperator>> {
    let Some(path) = &config.input else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let m = parse_matrix(&text).map_err(usage)?;
    if m.nrows() < 2 {
        return Err(usage(format!("matrix dimension must be at least 2, got {}", m.nrows())));
    }
    match HermitianOperator::new(m.clone()) {
        Ok(op) => Ok(Some(op)),
        Err(Error::NotHermitian { .. }) => Err(CliError {
            code: EXIT_VALIDATION,
            message: format!("input is not Hermitian: max asymmetry {}", fmt_f64(max_asymmetry(&m))),
        }),
        Err(e) => Err(e.into()),
    }
}

/// State with a seeded random Schmidt basis, plus the generator that made it.
fn seeded_state(dim: usize, seed: u64) -> CliResult<(MaxEntangledState, SimRng)> {
    let mut rng = seeded_rng(seed);
    let state = make_state(SchmidtBasis::random(dim, &mut rng))?;
    Ok((state, rng))
}

/// The Ω_N setting `a` from `--input` or, without one, generated from the seed.
fn omega_setting(config: &RunConfig, state: &MaxEntangledState, rng: &mut SimRng) -> CliResult<CoefficientVector> {
    let op = match read_hermitian(config)? {
        Some(op) => {
            if op.dim() != state.dim() {
                return Err(usage(format!(
                    "input matrix has dim {} but --dim is {}",
                    op.dim(),
                    state.dim()
                )));
            }
            check_omega(&op)?;
            op
        }
        None => random_omega(state.dim(), rng),
    };
    Ok(vectorize(&op, state.basis(Side::Alice))?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

/// Maximum residuals of the operator and state identities over random
/// instances in dimension `dim`.
pub fn identity_checks(dim: usize, seed: u64) -> crate::error::Result<Vec<IdentityCheck>> {
    let mut rng = seeded_rng(seed);
    let state = make_state(SchmidtBasis::random(dim, &mut rng))?;
    let alice = state.basis(Side::Alice);
    let bob = state.basis(Side::Bob);
    let n = dim as f64;

    let mut orthonormality = 0.0f64;
    for basis in [alice, bob] {
        for (k, x) in basis.elements().iter().enumerate() {
            for (l, y) in basis.elements().iter().enumerate() {
                let delta = if k == l { 1.0 } else { 0.0 };
                orthonormality = orthonormality.max((hs_inner(x, y)? - delta).abs());
            }
        }
    }

    let (mut roundtrip, mut partner, mut joint, mut square, mut local) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let identity = HermitianOperator::identity(dim);
    for _ in 0..IDENTITY_TRIALS {
        let x = random_hermitian(dim, &mut rng);
        let y = random_hermitian(dim, &mut rng);
        let a = vectorize(&x, alice)?;
        roundtrip = roundtrip.max(devectorize(&a, alice)?.max_abs_diff(&x));

        let xt = transpose_partner(&x, state.schmidt())?;
        let diff = state.apply_local(&x, Side::Alice)? - state.apply_local(&xt, Side::Bob)?;
        partner = partner.max(diff.norm());

        let b = vectorize(&y, bob)?;
        joint = joint.max((state.expectation(&x, &y)? - joint_average(&state, &a, &b)?).abs());
        let x2 = HermitianOperator::symmetrized(x.entries() * x.entries())?;
        square = square.max((state.expectation(&x2, &identity)? - square_average(&state, &a)?).abs());
        local = local.max((state.expectation(&x, &identity)? - local_average(&state, &x)?).abs());
        local = local.max((a.trace() / n - local_average(&state, &x)?).abs());
    }

    let checks = [
        ("basis_orthonormality", orthonormality),
        ("vectorize_roundtrip", roundtrip),
        ("transpose_partner", partner),
        ("joint_average", joint),
        ("square_average", square),
        ("local_average", local),
    ];
    Ok(checks
        .into_iter()
        .map(|(name, residual)| IdentityCheck {
            name,
            residual,
            pass: residual < IDENTITY_TOL,
        })
        .collect())
}

pub fn cmd_identities(config: &RunConfig) -> CmdOutput {
    finish(config, identities_report(config))
}

fn identities_report(config: &RunConfig) -> CliResult<Report> {
    check_common(config)?;
    let checks = identity_checks(config.dim, config.seed)?;
    let all_pass = checks.iter().all(|c| c.pass);
    let text = match config.format {
        Format::Human => {
            let mut s = format!("identities dim={} seed={}\n", config.dim, config.seed);
            for c in &checks {
                let _ = writeln!(s, "{:<22} residual={} {}", c.name, fmt_f64(c.residual), pass_word(c.pass));
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("check,residual,pass\n");
            for c in &checks {
                let _ = writeln!(s, "{},{},{}", c.name, fmt_f64(c.residual), c.pass);
            }
            s
        }
        Format::Json => to_json(&json!({
            "dim": config.dim,
            "seed": config.seed,
            "checks": checks
                .iter()
                .map(|c| json!({ "name": c.name, "residual": num(c.residual), "pass": c.pass }))
                .collect::<Vec<_>>(),
        })),
    };
    Ok(Report {
        code: if all_pass { EXIT_OK } else { EXIT_MISMATCH },
        text,
        note: String::new(),
    })
}

fn pass_word(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn cmd_decompose(config: &RunConfig) -> CmdOutput {
    finish(config, decompose_report(config))
}

fn decompose_report(config: &RunConfig) -> CliResult<Report> {
    check_paths(config)?;
    let op = read_hermitian(config)?.ok_or_else(|| usage("decompose requires --input"))?;
    let dec = cartan_decompose(&op, None)?;
    let check = verify_decomposition(&dec, &op)?;
    if !check.passes(IDENTITY_TOL) {
        return Err(CliError {
            code: EXIT_VALIDATION,
            message: format!(
                "decomposition failed verification: residual {}, commutator {}, spectrum deviation {}",
                fmt_f64(check.reconstruct_residual),
                fmt_f64(check.max_commutator),
                fmt_f64(check.max_spectrum_deviation)
            ),
        });
    }
    let terms: Vec<_> = dec.terms.iter().filter(|t| t.alpha.abs() > ALPHA_ZERO_TOL).collect();
    let text = match config.format {
        Format::Human => {
            let mut s = format!("alpha0 {}\n", fmt_f64(dec.alpha0));
            for (k, t) in terms.iter().enumerate() {
                let _ = writeln!(s, "term {} alpha {}", k + 1, fmt_f64(t.alpha));
                s.push_str(&format_matrix(t.component.entries()));
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("term,alpha,row,col,re,im\n");
            let _ = writeln!(s, "0,{},,,,", fmt_f64(dec.alpha0));
            for (k, t) in terms.iter().enumerate() {
                let m = t.component.entries();
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let _ = writeln!(
                            s,
                            "{},{},{i},{j},{},{}",
                            k + 1,
                            fmt_f64(t.alpha),
                            fmt_f64(m[(i, j)].re),
                            fmt_f64(m[(i, j)].im)
                        );
                    }
                }
            }
            s
        }
        Format::Json => to_json(&json!({
            "alpha0": num(dec.alpha0),
            "terms": terms
                .iter()
                .map(|t| json!({ "alpha": num(t.alpha), "component": matrix_json(t.component.entries()) }))
                .collect::<Vec<_>>(),
        })),
    };
    Ok(Report {
        code: EXIT_OK,
        text,
        note: String::new(),
    })
}

pub fn cmd_curve(config: &RunConfig) -> CmdOutput {
    finish(config, curve_report(config))
}

fn curve_report(config: &RunConfig) -> CliResult<Report> {
    check_common(config)?;
    let ns = if config.n.is_empty() { vec![8] } else { config.n.clone() };
    let (state, mut rng) = seeded_state(config.dim, config.seed)?;
    let a = omega_setting(config, &state, &mut rng)?;
    let basis = state.basis(Side::Alice);
    let spec = CurveSpec::new(&a, basis)?;

    let mut rows = Vec::new();
    let mut all_ok = true;
    for &n in &ns {
        let points = partition(&spec, basis, n)?;
        let angles = spec.angles(n)?;
        all_ok &= verify_partition_spacing(&points, spec.total_angle)?.uniform_ok;
        rows.extend(points.into_iter().zip(angles).enumerate().map(|(j, (p, theta))| (n, j, theta, p)));
    }
    let m = a.components().len();
    let text = match config.format {
        Format::Human | Format::Csv => {
            let sep = if config.format == Format::Csv { "," } else { " " };
            let mut s = String::new();
            let header: Vec<String> = ["n", "j", "theta"]
                .iter()
                .map(|h| h.to_string())
                .chain((0..m).map(|k| format!("c{k}")))
                .collect();
            s.push_str(&header.join(sep));
            s.push('\n');
            for (n, j, theta, p) in &rows {
                let fields: Vec<String> = [n.to_string(), j.to_string(), fmt_f64(*theta)]
                    .into_iter()
                    .chain(p.components().iter().map(|c| fmt_f64(*c)))
                    .collect();
                s.push_str(&fields.join(sep));
                s.push('\n');
            }
            s
        }
        Format::Json => to_json(&json!({
            "dim": config.dim,
            "points": rows
                .iter()
                .map(|(n, j, theta, p)| json!({
                    "n": n,
                    "j": j,
                    "theta": num(*theta),
                    "coefficients": p.components().iter().map(|c| num(*c)).collect::<Vec<_>>(),
                }))
                .collect::<Vec<_>>(),
        })),
    };
    Ok(Report {
        code: if all_ok { EXIT_OK } else { EXIT_MISMATCH },
        text,
        note: String::new(),
    })
}

fn parse_model(config: &RunConfig) -> CliResult<ModelKind> {
    ModelKind::from_str(&config.model).map_err(|e| usage(e.to_string()))
}

fn run_model(
    kind: ModelKind,
    state: &MaxEntangledState,
    a: &CoefficientVector,
    n: usize,
    config: &RunConfig,
    seed: u64,
) -> CliResult<TheoremReport> {
    fn go<M: CryptoNonlocalModel>(
        model: &M,
        state: &MaxEntangledState,
        a: &CoefficientVector,
        n: usize,
        config: &RunConfig,
        seed: u64,
    ) -> CliResult<TheoremReport> {
        Ok(verify_theorem(model, state, a, n, &config.budget(), seed)?)
    }
    match kind {
        ModelKind::QmFaithful => go(&QmFaithful::new(state.clone()), state, a, n, config, seed),
        ModelKind::Leggett => go(&LeggettModel, state, a, n, config, seed),
    }
}

/// Whether the report shows what the model should produce: no violation for
/// the quantum-faithful model, and for the Leggett model a violation exactly
/// when the final bound drops below `E_τ|f| = 1/2`.
pub fn expected_outcome(kind: ModelKind, report: &TheoremReport) -> bool {
    match kind {
        ModelKind::QmFaithful => report.all_steps_pass() && !report.violated,
        ModelKind::Leggett => report.violated == (report.final_rhs < LEGGETT_ABS_F),
    }
}

pub fn cmd_theorem(config: &RunConfig) -> CmdOutput {
    finish(config, theorem_report(config))
}

fn theorem_report(config: &RunConfig) -> CliResult<Report> {
    let kind = parse_model(config)?;
    check_common(config)?;
    let n = match config.n.as_slice() {
        [] => 16,
        [n] => *n,
        _ => return Err(usage("theorem takes a single --n value")),
    };
    if kind == ModelKind::Leggett && config.dim != 2 {
        return Err(usage("the leggett model requires --dim 2"));
    }
    let (state, mut rng) = seeded_state(config.dim, config.seed)?;
    let a = omega_setting(config, &state, &mut rng)?;
    let report = run_model(kind, &state, &a, n, config, config.seed)?;
    let ok = expected_outcome(kind, &report);
    let text = match config.format {
        Format::Human => theorem_human(&report),
        Format::Csv => theorem_csv(&report),
        Format::Json => to_json(&theorem_json(&report)),
    };
    let note = if ok {
        String::new()
    } else {
        format!("{}: verdict does not match the expected outcome (violated={})\n", kind.name(), report.violated)
    };
    Ok(Report {
        code: if ok { EXIT_OK } else { EXIT_MISMATCH },
        text,
        note,
    })
}

fn theorem_human(r: &TheoremReport) -> String {
    let mut s = format!("model={} dim={} n={} |a|^2={}\n", r.model, r.dim, r.n, fmt_f64(r.norm_a_sq));
    for step in &r.steps {
        let _ = writeln!(
            s,
            "step j={} theta={} lhs={} stderr={} rhs={} {}",
            step.j,
            fmt_f64(step.theta),
            fmt_f64(step.lhs.mean),
            fmt_f64(step.lhs.stderr),
            fmt_f64(step.rhs),
            step.verdict
        );
    }
    let _ = writeln!(
        s,
        "final lhs={} stderr={} rhs={} {} violated={}",
        fmt_f64(r.final_lhs.mean),
        fmt_f64(r.final_lhs.stderr),
        fmt_f64(r.final_rhs),
        r.verdict,
        r.violated
    );
    s
}

/// CSV rows `j,theta,lhs_mean,lhs_stderr,rhs,verdict`, one per step, then a
/// `final` row whose theta is the total angle.
pub fn theorem_csv(r: &TheoremReport) -> String {
    let mut s = String::from("j,theta,lhs_mean,lhs_stderr,rhs,verdict\n");
    for step in &r.steps {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            step.j,
            fmt_f64(step.theta),
            fmt_f64(step.lhs.mean),
            fmt_f64(step.lhs.stderr),
            fmt_f64(step.rhs),
            step.verdict
        );
    }
    let _ = writeln!(
        s,
        "final,{},{},{},{},{}",
        fmt_f64(r.total_angle),
        fmt_f64(r.final_lhs.mean),
        fmt_f64(r.final_lhs.stderr),
        fmt_f64(r.final_rhs),
        r.verdict
    );
    s
}

fn theorem_json(r: &TheoremReport) -> Value {
    let estimate = |e: &crate::sampling::EstimateResult| {
        json!({ "mean": num(e.mean), "stderr": num(e.stderr), "n_samples": e.n_samples, "seed": e.seed })
    };
    let mut obj = Map::new();
    obj.insert("model".into(), json!(r.model));
    obj.insert("dim".into(), json!(r.dim));
    obj.insert("n".into(), json!(r.n));
    obj.insert("norm_a_sq".into(), num(r.norm_a_sq));
    obj.insert("total_angle".into(), num(r.total_angle));
    obj.insert(
        "steps".into(),
        Value::Array(
            r.steps
                .iter()
                .map(|s| {
                    json!({
                        "j": s.j,
                        "theta": num(s.theta),
                        "lhs": estimate(&s.lhs),
                        "rhs": num(s.rhs),
                        "pass": s.pass,
                        "verdict": s.verdict,
                    })
                })
                .collect(),
        ),
    );
    obj.insert("final_lhs".into(), estimate(&r.final_lhs));
    obj.insert("final_rhs".into(), num(r.final_rhs));
    obj.insert("violated".into(), json!(r.violated));
    obj.insert("verdict".into(), json!(r.verdict));
    Value::Object(obj)
}

/// One row of the Leggett scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: usize,
    pub lhs_mean: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub violated: bool,
    pub verdict: Verdict,
}

pub const DEFAULT_SCAN: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];

pub fn cmd_leggett_scan(config: &RunConfig) -> CmdOutput {
    finish(config, scan_report(config))
}

fn scan_report(config: &RunConfig) -> CliResult<Report> {
    check_common(config)?;
    if config.dim != 2 {
        return Err(usage(format!("leggett-scan requires --dim 2, got {}", config.dim)));
    }
    let ns = if config.n.is_empty() { DEFAULT_SCAN.to_vec() } else { config.n.clone() };
    let (state, mut rng) = seeded_state(config.dim, config.seed)?;
    let a = omega_setting(config, &state, &mut rng)?;

    let mut rows = Vec::with_capacity(ns.len());
    let mut ok = true;
    for &n in &ns {
        let r = run_model(ModelKind::Leggett, &state, &a, n, config, config.seed)?;
        ok &= expected_outcome(ModelKind::Leggett, &r);
        rows.push(ScanRow {
            n,
            lhs_mean: r.final_lhs.mean,
            lhs_stderr: r.final_lhs.stderr,
            rhs: r.final_rhs,
            violated: r.violated,
            verdict: r.verdict,
        });
    }
    let minimal = rows.iter().filter(|r| r.violated).map(|r| r.n).min();
    let summary = match minimal {
        Some(n) => format!("minimal violating n: {n}\n"),
        None => format!(
            "no violation found for n in {{{}}}\n",
            ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
        ),
    };
    let (text, note) = match config.format {
        Format::Csv => (scan_csv(&rows), summary),
        Format::Human => {
            let mut s = String::from("n lhs_mean lhs_stderr rhs verdict\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{} {} {} {} {}",
                    r.n,
                    fmt_f64(r.lhs_mean),
                    fmt_f64(r.lhs_stderr),
                    fmt_f64(r.rhs),
                    r.verdict
                );
            }
            s.push_str(&summary);
            (s, String::new())
        }
        Format::Json => (
            to_json(&json!({
                "rows": rows
                    .iter()
                    .map(|r| json!({
                        "n": r.n,
                        "lhs_mean": num(r.lhs_mean),
                        "lhs_stderr": num(r.lhs_stderr),
                        "rhs": num(r.rhs),
                        "violated": r.violated,
                        "verdict": r.verdict,
                    }))
                    .collect::<Vec<_>>(),
                "minimal_violating_n": minimal,
            })),
            String::new(),
        ),
    };
    Ok(Report {
        code: if ok { EXIT_OK } else { EXIT_MISMATCH },
        text,
        note,
    })
}

/// Plot-ready CSV with columns `n,lhs_mean,lhs_stderr,rhs`.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut s = String::from("n,lhs_mean,lhs_stderr,rhs\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.n, fmt_f64(r.lhs_mean), fmt_f64(r.lhs_stderr), fmt_f64(r.rhs));
    }
    s
}

/// `final_bound(n, ‖a‖², 2) < 1/2`: the partition sizes at which the Leggett
/// model must be caught.
pub fn leggett_should_violate(n: usize, norm_a_sq: f64) -> crate::error::Result<bool> {
    Ok(final_bound(n, norm_a_sq, 2)? < LEGGETT_ABS_F)
}
