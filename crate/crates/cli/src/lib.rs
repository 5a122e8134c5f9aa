//! `mcft`: derive, classify and verify action-dependent field theories
//! from `.mcft` model files.
//!
//! Exit codes: 0 success, 1 a negative verdict (not Noether, law or
//! threshold failed), 2 bad input, 3 the model is valid but the computation
//! is refused (singular Lagrangian, CFL violation, unsupported numerics).

mod commands;
pub mod schema;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use mcft_core::dsl::{parse, parse_decimal, ModelFile};
use mcft_core::Rational;
use mcft_core::expr::ProbeConfig;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Parser, Debug)]
#[command(name = "mcft", version, about = "Multicontact field theory workbench")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Print a JSON run report on stdout
    #[arg(long, global = true)]
    pub json: bool,
    /// Lift candidates with the opposite sign on velocity components
    #[arg(long, global = true)]
    pub paper_sign: bool,
    /// Seed of the numeric zero-probing fallback
    #[arg(long, global = true, default_value_t = ProbeConfig::default().seed)]
    pub seed: u64,
    /// Tolerance of the numeric zero-probing fallback
    #[arg(long, global = true, default_value_t = ProbeConfig::default().tol)]
    pub tol: f64,
    /// Report wall-clock time (reports are then no longer reproducible)
    #[arg(long, global = true)]
    pub timing: bool,
    /// Fix a parameter to an exact decimal value, as `name=value`; repeatable
    #[arg(long = "set", global = true, value_name = "NAME=VALUE", value_parser = parse_assignment)]
    pub set: Vec<(String, Rational)>,
}

fn parse_assignment(s: &str) -> Result<(String, Rational), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let q = parse_decimal(v).ok_or_else(|| format!("`{v}` is not a decimal number"))?;
    Ok((k.trim().to_string(), q))
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Multicontact structure and field equations; with --hamiltonian also the
    /// Legendre map, H, Theta_H and the HDW equations
    Derive {
        model: PathBuf,
        #[arg(long)]
        hamiltonian: bool,
    },
    /// Classify a named candidate as strong Noether, Noether or neither
    CheckSymmetry { model: PathBuf, name: String },
    /// The dissipated current of a candidate and its law over the SOPDE family
    Current { model: PathBuf, name: String },
    /// Solve for the SOPDE family of solution multivector fields
    Sopde { model: PathBuf },
    /// Integrate a scenario and check the discrete dissipation law
    VerifyLaw { model: PathBuf, name: String, scenario: String },
    /// Integrate a scenario and write `t,x,value` CSV of the field
    Simulate {
        model: PathBuf,
        scenario: String,
        /// Grid size; defaults to the scenario's first level
        #[arg(long)]
        nx: Option<usize>,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Derive { .. } => "derive",
            Command::CheckSymmetry { .. } => "check-symmetry",
            Command::Current { .. } => "current",
            Command::Sopde { .. } => "sopde",
            Command::VerifyLaw { .. } => "verify-law",
            Command::Simulate { .. } => "simulate",
        }
    }

    fn model(&self) -> &PathBuf {
        match self {
            Command::Derive { model, .. }
            | Command::CheckSymmetry { model, .. }
            | Command::Current { model, .. }
            | Command::Sopde { model }
            | Command::VerifyLaw { model, .. }
            | Command::Simulate { model, .. } => model,
        }
    }
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const NEGATIVE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const REFUSED: i32 = 3;
}

/// A run that could not produce its result.
#[derive(Debug, Clone)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    pub position: Option<(usize, usize)>,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: exit::INPUT, message: message.into(), position: None }
    }

    pub fn refused(message: impl Into<String>) -> Self {
        Failure { code: exit::REFUSED, message: message.into(), position: None }
    }
}

/// What a command produced: its exit code, JSON outputs and text rendering.
pub struct Outcome {
    pub code: i32,
    pub outputs: Value,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: f64,
    pub paper_sign: bool,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub params: serde_json::Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub model_hash: Option<String>,
    pub config: RunConfig,
    pub exit_code: i32,
    pub outputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) struct Context<'a> {
    pub global: &'a Global,
    pub probe: ProbeConfig,
    pub model: ModelFile,
}

fn load(path: &PathBuf, global: &Global) -> Result<(String, ModelFile), (Option<String>, Failure)> {
    let bytes = std::fs::read(path).map_err(|e| (None, Failure::input(format!("{}: {e}", path.display()))))?;
    let hash = sha256_hex(&bytes);
    let fail = |f: Failure| (Some(hash.clone()), f);
    let text = String::from_utf8(bytes).map_err(|_| fail(Failure::input(format!("{}: not UTF-8", path.display()))))?;
    let mut model = parse(&text).map_err(|e| {
        fail(Failure {
            code: exit::INPUT,
            message: format!("{}:{e}", path.display()),
            position: Some((e.line, e.col)),
        })
    })?;
    for (k, v) in &global.set {
        model.fix_param(k, v).map_err(|e| fail(Failure::input(e)))?;
    }
    Ok((hash, model))
}

/// Runs one command and returns its report; `text` is the human rendering.
pub fn execute(cli: &Cli) -> (RunReport, String) {
    let start = Instant::now();
    let g = &cli.global;
    let probe = ProbeConfig { seed: g.seed, tol: g.tol, ..ProbeConfig::default() };
    let params = g.set.iter().map(|(k, v)| (k.clone(), Value::from(v.to_f64().unwrap_or(f64::NAN)))).collect();
    let config = RunConfig { seed: g.seed, tol: g.tol, paper_sign: g.paper_sign, params };
    let (hash, result) = match load(cli.command.model(), g) {
        Ok((hash, model)) => {
            let ctx = Context { global: g, probe, model };
            (Some(hash), commands::dispatch(&cli.command, &ctx))
        }
        Err((hash, f)) => (hash, Err(f)),
    };
    let (code, outputs, text) = match result {
        Ok(o) => (o.code, o.outputs, o.text),
        Err(f) => {
            let mut err = serde_json::json!({ "message": f.message });
            if let Some((line, col)) = f.position {
                err["line"] = line.into();
                err["col"] = col.into();
            }
            (f.code, serde_json::json!({ "error": err }), format!("error: {}\n", f.message))
        }
    };
    let timing_ms = g.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        command: cli.command.name(),
        model_hash: hash,
        config,
        exit_code: code,
        outputs,
        timing_ms,
    };
    (report, text)
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    let (report, text) = execute(&cli);
    let written = if cli.global.json {
        serde_json::to_string_pretty(&report).map(|s| writeln!(out, "{s}")).map_err(std::io::Error::from)
    } else if report.exit_code >= exit::INPUT {
        Ok(write!(err, "{text}"))
    } else {
        let mut r = write!(out, "{text}");
        if let (Ok(()), Some(ms)) = (&r, report.timing_ms) {
            r = writeln!(out, "elapsed: {ms:.1} ms");
        }
        Ok(r)
    };
    match written {
        Ok(Ok(())) => report.exit_code,
        _ => exit::INPUT,
    }
}
