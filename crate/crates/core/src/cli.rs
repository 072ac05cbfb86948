//! Command-line front end for `riccati-reduce`.
//!
//! Triples are read from JSON documents of the form
//!
//! ```json
//! { "n": 1, "m": 1, "A": [[2]], "B": [[1]], "Q": [[3]], "R": [[1]],
//!   "S": [[0]], "tol": { "rel": 1e-10, "abs_residual": 1e-8 } }
//! ```
//!
//! where `S` and `tol` (and either of its fields) may be omitted. A candidate
//! solution for `verify` is either a bare nested array or `{ "X": [[...]] }`.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::error::Error as CoreError;
use crate::linalg::{RealMatrix, Tolerance};
use crate::pencil::{self, Diagnosis, DEFAULT_SEED};
use crate::popov::{CandidateSolution, PopovTriple};
use crate::reduction::{self, ReductionChain, ReductionStep, Solved, TerminalEquation};
use crate::solution::SolutionSet;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SOLVER_EMPTY: i32 = 4;

/// Environment variable holding the seed for pencil regularity sampling.
pub const SEED_VAR: &str = "RICCATI_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "riccati-reduce",
    version,
    about = "Reduce, solve and verify constrained generalized discrete-time Riccati equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pencil regularity and singularity diagnostics
    Diagnose(CommonArgs),
    /// Print the reduction chain
    Reduce(CommonArgs),
    /// Compute the complete solution set
    Solve(CommonArgs),
    /// Check a candidate solution given with --x
    Verify(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Triple document (JSON)
    triple: PathBuf,
    /// Candidate solution file (verify only)
    #[arg(long = "x", value_name = "MATRIX-FILE")]
    x: Option<PathBuf>,
    /// Print transforms and reduced triples for every step
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Absolute residual threshold
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    SolverEmpty(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Parse { .. } | CliError::Validation(_) => EXIT_VALIDATION,
            CliError::SolverEmpty(_) => EXIT_SOLVER_EMPTY,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NoRealSolutionFound(_) | CoreError::LiftVerificationFailed { .. } => {
                CliError::SolverEmpty(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolOverride {
    rel: Option<f64>,
    abs_residual: Option<f64>,
}

/// On-disk representation of a Popov triple.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleDocument {
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "S", default)]
    s: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    tol: Option<TolOverride>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixDocument {
    Bare(Vec<Vec<f64>>),
    Named {
        #[serde(rename = "X")]
        x: Vec<Vec<f64>>,
    },
}

/// Converts nested rows to a matrix of the given shape, reporting the first
/// offending row.
pub fn matrix_from_rows(
    name: &str,
    rows: &[Vec<f64>],
    nrows: usize,
    ncols: usize,
) -> Result<RealMatrix, String> {
    if rows.len() != nrows {
        return Err(format!(
            "{name}: expected {nrows} rows, found {}",
            rows.len()
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(format!(
                "{name}: row {} has {} entries, expected {ncols}",
                i + 1,
                row.len()
            ));
        }
    }
    Ok(RealMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl TripleDocument {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| {
            format!(
                "{} at line {}, column {}",
                strip_location(&e),
                e.line(),
                e.column()
            )
        })
    }

    pub fn tolerance(&self, base: Tolerance) -> Result<Tolerance, String> {
        let o = self.tol.as_ref();
        let rel = o.and_then(|t| t.rel).unwrap_or(base.rel);
        let abs = o.and_then(|t| t.abs_residual).unwrap_or(base.abs_residual);
        Tolerance::new(rel, abs).map_err(|e| format!("tol: {e}"))
    }

    pub fn to_triple(&self, tol: &Tolerance) -> Result<PopovTriple, String> {
        let (n, m) = (self.n, self.m);
        let a = matrix_from_rows("A", &self.a, n, n)?;
        let b = matrix_from_rows("B", &self.b, n, m)?;
        let q = matrix_from_rows("Q", &self.q, n, n)?;
        let r = matrix_from_rows("R", &self.r, m, m)?;
        let s = match &self.s {
            Some(rows) => matrix_from_rows("S", rows, n, m)?,
            None => RealMatrix::zeros(n, m),
        };
        PopovTriple::new(a, b, q, r, s, tol).map_err(|e| e.to_string())
    }
}

fn strip_location(e: &serde_json::Error) -> String {
    let full = e.to_string();
    match full.rfind(" at line ") {
        Some(i) => full[..i].to_string(),
        None => full,
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_triple(path: &Path, cli_tol: Option<f64>) -> Result<(PopovTriple, Tolerance), CliError> {
    let parse_err = |message: String| CliError::Parse {
        path: path.display().to_string(),
        message,
    };
    let doc = TripleDocument::parse(&read(path)?).map_err(parse_err)?;
    let mut tol = doc.tolerance(Tolerance::default()).map_err(parse_err)?;
    if let Some(abs) = cli_tol {
        tol = Tolerance::new(tol.rel, abs)
            .map_err(|e| CliError::Validation(format!("--tol: {e}")))?;
    }
    let triple = doc.to_triple(&tol).map_err(parse_err)?;
    Ok((triple, tol))
}

fn load_matrix(path: &Path, n: usize) -> Result<RealMatrix, CliError> {
    let parse_err = |message: String| CliError::Parse {
        path: path.display().to_string(),
        message,
    };
    let text = read(path)?;
    let doc: MatrixDocument = serde_json::from_str(&text).map_err(|e| {
        parse_err(format!(
            "{} at line {}, column {}",
            strip_location(&e),
            e.line(),
            e.column()
        ))
    })?;
    let rows = match doc {
        MatrixDocument::Bare(r) | MatrixDocument::Named { x: r } => r,
    };
    matrix_from_rows("X", &rows, n, n).map_err(parse_err)
}

fn seed_from_env() -> Result<u64, CliError> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Validation(format!("{SEED_VAR} must be an unsigned integer, got {v:?}"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Formats for people: tiny magnitudes print as 0 and trailing zeros are
/// dropped.
pub fn human_number(v: f64) -> String {
    if v.abs() < 1e-12 {
        return "0".into();
    }
    if v.abs() >= 1e10 || v.abs() < 1e-4 {
        return format!("{v:e}");
    }
    let s = format!("{v:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn human_matrix_inline(m: &RealMatrix) -> String {
    if m.shape() == (1, 1) {
        return human_number(m[(0, 0)]);
    }
    let rows: Vec<String> = m
        .row_iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|&v| human_number(v)).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

fn human_matrix_block(
    out: &mut dyn Write,
    indent: &str,
    name: &str,
    m: &RealMatrix,
) -> io::Result<()> {
    writeln!(out, "{indent}{name} ({}x{}):", m.nrows(), m.ncols())?;
    for r in m.row_iter() {
        let cells: Vec<String> = r.iter().map(|&v| human_number(v)).collect();
        writeln!(out, "{indent}  [{}]", cells.join(", "))?;
    }
    Ok(())
}

pub fn matrix_json(m: &RealMatrix) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&v| number_json(v)).collect()))
            .collect(),
    )
}

fn number_json(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn triple_json(t: &PopovTriple) -> Value {
    json!({
        "n": t.n(),
        "m": t.m(),
        "A": matrix_json(t.a()),
        "B": matrix_json(t.b()),
        "Q": matrix_json(t.q()),
        "R": matrix_json(t.r()),
        "S": matrix_json(t.s()),
    })
}

/// Writes every float with 17 significant digits.
struct ExactFloats;

impl serde_json::ser::Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn write_machine(out: &mut dyn Write, value: &Value) -> io::Result<()> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats);
    serde::Serialize::serialize(value, &mut ser).map_err(io::Error::other)?;
    out.write_all(&buf)?;
    writeln!(out)
}

fn terminal_summary(t: &TerminalEquation) -> String {
    match t {
        TerminalEquation::Stein(eq) => format!(
            "Stein(A0={}, Q0={})",
            human_matrix_inline(eq.a0()),
            human_matrix_inline(eq.q0())
        ),
        TerminalEquation::RegularDare(t) => format!("RegularDARE(n={}, m={})", t.n(), t.m()),
        TerminalEquation::Empty => "Empty".into(),
    }
}

fn terminal_json(t: &TerminalEquation) -> Value {
    match t {
        TerminalEquation::Stein(eq) => json!({
            "kind": "Stein",
            "A0": matrix_json(eq.a0()),
            "Q0": matrix_json(eq.q0()),
        }),
        TerminalEquation::RegularDare(t) => {
            json!({ "kind": "RegularDARE", "triple": triple_json(t) })
        }
        TerminalEquation::Empty => json!({ "kind": "Empty" }),
    }
}

fn step_json(step: &ReductionStep) -> Value {
    let mut v = json!({
        "kind": step.kind.name(),
        "input_order": step.input.n(),
        "reduced_order": step.reduced_order,
        "removed": step.removed,
        "state_transform": matrix_json(&step.state_transform),
        "input_transform": matrix_json(&step.input_transform),
        "q_offset": matrix_json(&step.q_offset),
    });
    if let Some(b) = &step.blocks {
        v["blocks"] = json!({
            "Q11": matrix_json(&b.q11),
            "Q12": matrix_json(&b.q12),
            "Q22": matrix_json(&b.q22),
        });
    }
    if let Some(o) = &step.output {
        v["output"] = triple_json(o);
    }
    v
}

fn step_label(step: &ReductionStep) -> String {
    let n = step.input.n();
    match step.kind {
        reduction::StepKind::KernelA0 => {
            format!(
                "KernelA0 nu={} (order {n} -> {})",
                step.removed, step.reduced_order
            )
        }
        reduction::StepKind::KernelR => {
            format!(
                "KernelR eta={} (order {n} -> {})",
                step.removed, step.reduced_order
            )
        }
        kind => format!("{} (order {n})", kind.name()),
    }
}

fn write_triple_human(out: &mut dyn Write, indent: &str, t: &PopovTriple) -> io::Result<()> {
    for (name, m) in [
        ("A", t.a()),
        ("B", t.b()),
        ("Q", t.q()),
        ("R", t.r()),
        ("S", t.s()),
    ] {
        human_matrix_block(out, indent, name, m)?;
    }
    Ok(())
}

fn write_chain_human(out: &mut dyn Write, chain: &ReductionChain, trace: bool) -> io::Result<()> {
    for (i, step) in chain.steps.iter().enumerate() {
        writeln!(out, "step {}: {}", i + 1, step_label(step))?;
        if trace {
            if step.kind.is_kernel() {
                let name = if step.kind == reduction::StepKind::KernelA0 {
                    "U"
                } else {
                    "V"
                };
                human_matrix_block(out, "  ", name, &step.state_transform)?;
            }
            if step.kind == reduction::StepKind::InputSplit {
                human_matrix_block(out, "  ", "Omega", &step.input_transform)?;
            }
            if let Some(o) = &step.output {
                writeln!(out, "  reduced triple:")?;
                write_triple_human(out, "    ", o)?;
            }
        }
    }
    writeln!(out, "terminal: {}", terminal_summary(&chain.terminal))
}

fn solve_or_empty(triple: &PopovTriple, tol: &Tolerance) -> Result<Solved, CliError> {
    let solved = reduction::solve(triple, tol)?;
    if solved.solutions.is_empty() {
        let why = solved
            .terminal
            .failure
            .clone()
            .unwrap_or_else(|| "terminal equation has no solution".into());
        return Err(CliError::SolverEmpty(why));
    }
    Ok(solved)
}

fn cmd_diagnose(args: &CommonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (triple, tol) = load_triple(&args.triple, args.tol)?;
    let seed = seed_from_env()?;
    // Closed-loop entries need solutions; a failed solve only leaves them unset.
    let solutions: Option<SolutionSet> = reduction::solve(&triple, &tol)
        .ok()
        .map(|s| s.solutions)
        .filter(|s| !s.is_empty());
    let d = pencil::diagnose(&triple, &tol, seed, solutions.as_ref())?;
    match args.format {
        Format::Machine => write_machine(
            out,
            &json!({ "command": "diagnose", "n": triple.n(), "m": triple.m(), "diagnosis": d }),
        ),
        Format::Human => write_diagnosis_human(out, &triple, &d),
    }
    .map_err(write_failed)?;
    Ok(EXIT_OK)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn write_diagnosis_human(out: &mut dyn Write, t: &PopovTriple, d: &Diagnosis) -> io::Result<()> {
    writeln!(out, "order: n={}, m={}", t.n(), t.m())?;
    writeln!(out, "pencil regular: {}", yes_no(d.pencil_regular))?;
    writeln!(out, "N singular: {}", yes_no(d.n_singular))?;
    writeln!(
        out,
        "R singular: {} (rank {} of {})",
        yes_no(d.r_singular),
        d.rank_r,
        t.m()
    )?;
    writeln!(out, "A0 singular: {}", yes_no(d.a0_singular))?;
    match d.rank_rx {
        Some(r) => writeln!(out, "rank R_X: {r}")?,
        None => writeln!(out, "rank R_X: unavailable (no verified solution)")?,
    }
    if let (Some(p), Some(o)) = (
        d.closed_loop_singular_predicted,
        d.closed_loop_singular_observed,
    ) {
        writeln!(out, "closed loop singular (predicted): {}", yes_no(p))?;
        writeln!(out, "closed loop singular (observed): {}", yes_no(o))?;
    }
    Ok(())
}

fn cmd_reduce(args: &CommonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (triple, tol) = load_triple(&args.triple, args.tol)?;
    let chain = reduction::reduce(&triple, &tol)?;
    match args.format {
        Format::Machine => write_machine(
            out,
            &json!({
                "command": "reduce",
                "original": triple_json(&triple),
                "steps": chain.steps.iter().map(step_json).collect::<Vec<_>>(),
                "terminal": terminal_json(&chain.terminal),
            }),
        ),
        Format::Human => write_chain_human(out, &chain, args.trace),
    }
    .map_err(write_failed)?;
    Ok(EXIT_OK)
}

fn cmd_solve(args: &CommonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (triple, tol) = load_triple(&args.triple, args.tol)?;
    let solved = solve_or_empty(&triple, &tol)?;
    let mut families = Vec::new();
    for f in solved.solutions.families() {
        let checks: Vec<Value> = f
            .sample_parameters()
            .iter()
            .map(|xi| {
                let res = triple.gdare_residual(&f.member(xi), &tol)?;
                Ok(json!({
                    "xi": xi.iter().map(|&v| number_json(v)).collect::<Vec<_>>(),
                    "residual": number_json(res.norm),
                    "kernel_ok": res.kernel_ok,
                }))
            })
            .collect::<Result<_, CoreError>>()?;
        families.push((f, checks));
    }
    match args.format {
        Format::Machine => write_machine(
            out,
            &json!({
                "command": "solve",
                "terminal": terminal_json(&solved.chain.terminal),
                "stabilizing": solved.terminal.stabilizing,
                "exhaustive": solved.terminal.exhaustive,
                "families": families.iter().map(|(f, checks)| json!({
                    "base": matrix_json(f.base()),
                    "basis": f.basis().iter().map(matrix_json).collect::<Vec<_>>(),
                    "checks": checks,
                })).collect::<Vec<_>>(),
            }),
        ),
        Format::Human => (|| {
            if args.trace {
                write_chain_human(out, &solved.chain, true)?;
            } else {
                writeln!(out, "terminal: {}", terminal_summary(&solved.chain.terminal))?;
            }
            if !solved.terminal.exhaustive {
                writeln!(out, "warning: terminal order too large for full enumeration; only the stabilizing solution was sought")?;
            }
            writeln!(out, "families: {}", families.len())?;
            for (i, (f, checks)) in families.iter().enumerate() {
                let tag = if solved.terminal.stabilizing == Some(i) { " (stabilizing)" } else { "" };
                writeln!(out, "family {}: {} parameter(s){tag}", i + 1, f.dim())?;
                human_matrix_block(out, "  ", "base", f.base())?;
                for (j, h) in f.basis().iter().enumerate() {
                    human_matrix_block(out, "  ", &format!("H{}", j + 1), h)?;
                }
                for c in checks {
                    let xi: Vec<String> = c["xi"]
                        .as_array()
                        .into_iter()
                        .flatten()
                        .map(|v| human_number(v.as_f64().unwrap_or(f64::NAN)))
                        .collect();
                    writeln!(
                        out,
                        "  residual at xi=[{}]: {:.3e}{}",
                        xi.join(", "),
                        c["residual"].as_f64().unwrap_or(f64::NAN),
                        if c["kernel_ok"] == Value::Bool(true) { "" } else { " (kernel condition fails)" }
                    )?;
                }
            }
            Ok(())
        })(),
    }
    .map_err(write_failed)?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &CommonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (triple, tol) = load_triple(&args.triple, args.tol)?;
    let xpath = args
        .x
        .as_ref()
        .ok_or_else(|| CliError::Validation("verify needs --x <matrix-file>".into()))?;
    let x = load_matrix(xpath, triple.n())?;
    let x = CandidateSolution::new(x, &tol)?;
    let res = triple.gdare_residual(x.matrix(), &tol)?;
    let accepted = res.accepted(&tol);
    match args.format {
        Format::Machine => write_machine(
            out,
            &json!({
                "command": "verify",
                "residual": number_json(res.norm),
                "kernel_ok": res.kernel_ok,
                "accepted": accepted,
            }),
        ),
        Format::Human => (|| {
            writeln!(out, "residual: {:.3e}", res.norm)?;
            writeln!(
                out,
                "kernel condition: {}",
                if res.kernel_ok { "holds" } else { "fails" }
            )?;
            writeln!(
                out,
                "verdict: {}",
                if accepted { "accepted" } else { "rejected" }
            )
        })(),
    }
    .map_err(write_failed)?;
    Ok(if accepted { EXIT_OK } else { EXIT_REJECT })
}

fn write_failed(e: io::Error) -> CliError {
    CliError::Io {
        path: "<output>".into(),
        source: e,
    }
}

/// Runs the CLI with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Diagnose(a) => cmd_diagnose(a, out),
        Command::Reduce(a) => cmd_reduce(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn human_numbers() {
        assert_eq!(human_number(-1.0), "-1");
        assert_eq!(human_number(1296.0), "1296");
        assert_eq!(human_number(-1e-17), "0");
        assert_eq!(human_number(0.5), "0.5");
        assert_eq!(human_number(3.0 + 12f64.sqrt()), "6.4641016151");
    }

    #[test]
    fn exact_float_output_round_trips() {
        let v = json!({ "x": [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23] });
        let mut buf = Vec::new();
        write_machine(&mut buf, &v).unwrap();
        let back: Value = serde_json::from_slice(&buf).unwrap();
        for (a, b) in v["x"]
            .as_array()
            .unwrap()
            .iter()
            .zip(back["x"].as_array().unwrap())
        {
            assert_eq!(a.as_f64().unwrap().to_bits(), b.as_f64().unwrap().to_bits());
        }
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = TripleDocument::parse("{\n  \"n\": 1,\n  \"m\": ").unwrap_err();
        assert!(err.contains("line 3"), "{err}");
        let doc = TripleDocument::parse(
            r#"{"n":2,"m":1,"A":[[1,0],[0]],"B":[[1],[0]],"Q":[[1,0],[0,1]],"R":[[1]]}"#,
        )
        .unwrap();
        let err = doc.to_triple(&Tolerance::default()).unwrap_err();
        assert_eq!(err, "A: row 2 has 1 entries, expected 2");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(
            TripleDocument::parse(r#"{"n":0,"m":0,"A":[],"B":[],"Q":[],"R":[],"Z":1}"#).is_err()
        );
    }

    #[test]
    fn tolerance_overrides() {
        let doc = TripleDocument::parse(
            r#"{"n":0,"m":0,"A":[],"B":[],"Q":[],"R":[],"tol":{"abs_residual":1e-6}}"#,
        )
        .unwrap();
        let t = doc.tolerance(Tolerance::default()).unwrap();
        assert_eq!(t.abs_residual, 1e-6);
        assert_eq!(t.rel, Tolerance::default().rel);
    }
}
