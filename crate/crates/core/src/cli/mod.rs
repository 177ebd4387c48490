//! Command-line front end: `design`, `simulate` and `verify`.
//!
//! Flags override the config file. The seed is taken from `--seed`, then
//! `CIPHERLOOP_SEED`, then `sim.seed`, then 0.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 verification mismatch, 4 design failure.

mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

pub use config::{
    parse_config, ConfigError, ConfigFile, DesignSection, ExosystemSection, GainsSection, InitialBounds,
    OutputSection, PlantSection, SimSection,
};

use crate::design::{
    compute_modulus_bound, integerize, solve_regulator, validate_design, DesignArtifacts, DesignReport,
};
use crate::he::{AdditiveHe, Backend, InsecureMockHe, KeyFile, PaillierHe};
use crate::simloop::{
    read_trace_csv, run_closed_loop, verify_trace, write_trace_csv, LoopConfig, RunSummary, Scheme, SimError,
    Trace,
};

pub const REPORT_VERSION: &str = concat!("cipherloop-", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_DESIGN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cipherloop", version, about = "Encrypted tracking control over a finite plaintext modulus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integerize the controller, check the design and compute the modulus bound.
    Design {
        /// JSON configuration file.
        config: PathBuf,
        /// Where to write the JSON report; defaults to `output.report_path`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the encrypted loop and write the CSV trace and a summary.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        /// CSV trace path; defaults to `output.trace_path`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Replay a recorded trace against a fresh run and the plaintext oracle.
    Verify {
        config: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    /// Actuator restoration scheme: a, b or naive.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// mock or paillier.
    #[arg(long)]
    pub backend: Option<Backend>,
    /// Plaintext modulus for the mock backend.
    #[arg(long)]
    pub q: Option<BigInt>,
    /// Last simulated step; the trace has horizon + 1 rows.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Seed of the encryption randomness and key generation.
    #[arg(long, env = "CIPHERLOOP_SEED")]
    pub seed: Option<u64>,
    /// Key file. Loaded if it exists, otherwise generated and written there.
    #[arg(long)]
    pub keys: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("design: {0}")]
    Design(String),
    #[error("verification failed with {} mismatch(es)", .0.len())]
    Verify(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Verify(_) => EXIT_VERIFY,
            CliError::Design(_) => EXIT_DESIGN,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Verify(_) => "verify",
            CliError::Design(_) => "design",
        };
        let details = match self {
            CliError::Verify(m) => json!(m),
            _ => serde_json::Value::Null,
        };
        json!({ "error": kind, "message": self.to_string(), "details": details, "exit_code": self.exit_code() })
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn design_err(e: impl std::fmt::Display) -> CliError {
    CliError::Design(e.to_string())
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct GoldenCheck {
    pub name: &'static str,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub design: DesignReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifacts: Option<DesignArtifacts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<RunSummary>,
    pub checks: Vec<GoldenCheck>,
}

/// Everything `design` produces. Fails only when no artifacts can be built.
pub fn run_design(cfg: &ConfigFile) -> Result<RunReport, CliError> {
    let spec = cfg.spec();
    let initial = cfg.initial();
    let d = &cfg.design;
    let reg = solve_regulator(&spec).ok();
    let report = validate_design(&spec, reg.as_ref(), &d.gamma, &d.s, &d.l0, Some(&initial));
    let reg = reg.ok_or_else(|| design_err("regulator equations have no solution"))?;
    let mut art = integerize(&spec, &reg, &d.gamma, &d.s, &d.l0).map_err(design_err)?;
    let bound = compute_modulus_bound(&art, &spec, &reg, &initial, cfg.sim.horizon).map_err(design_err)?;
    let mut checks = vec![GoldenCheck { name: "design checks without failures", pass: !report.has_failures() }];
    if let Some(q) = &cfg.sim.q {
        checks.push(GoldenCheck { name: "configured q >= q_min", pass: *q >= bound.q_min });
    }
    art.bound = Some(bound);
    Ok(RunReport { version: REPORT_VERSION, design: report, artifacts: Some(art), summary: None, checks })
}

pub fn loop_config(cfg: &ConfigFile, flags: &RunFlags) -> Result<LoopConfig, CliError> {
    let spec = cfg.spec();
    let d = &cfg.design;
    let reg = solve_regulator(&spec).map_err(design_err)?;
    let artifacts = integerize(&spec, &reg, &d.gamma, &d.s, &d.l0).map_err(design_err)?;
    Ok(LoopConfig {
        spec,
        reg,
        artifacts,
        scheme: flags.scheme.unwrap_or(cfg.sim.scheme),
        horizon: flags.horizon.unwrap_or(cfg.sim.horizon),
        initial: cfg.initial(),
        seed: flags.seed.or(cfg.sim.seed).unwrap_or(0),
    })
}

fn load_or_create_keys(path: Option<&Path>, fresh: impl FnOnce() -> Result<KeyFile, CliError>) -> Result<KeyFile, CliError> {
    match path {
        Some(p) if p.exists() => KeyFile::read(p).map_err(config_err),
        Some(p) => {
            let k = fresh()?;
            k.write(p).map_err(config_err)?;
            Ok(k)
        }
        None => fresh(),
    }
}

/// Instantiates the chosen backend and runs the loop.
pub fn simulate(cfg: &ConfigFile, flags: &RunFlags) -> Result<Trace, CliError> {
    let lc = loop_config(cfg, flags)?;
    let backend = flags.backend.unwrap_or(cfg.sim.backend);
    let keys = flags.keys.as_deref();
    match backend {
        Backend::Mock => {
            let key = load_or_create_keys(keys, || {
                let q = flags
                    .q
                    .clone()
                    .or_else(|| cfg.sim.q.clone())
                    .ok_or_else(|| config_err("the mock backend needs q"))?;
                Ok(KeyFile::from_mock(&InsecureMockHe::keygen(&q, lc.seed).map_err(config_err)?))
            })?;
            let he = key.to_mock().map_err(config_err)?;
            if let Some(q) = &flags.q {
                if q != he.modulus() {
                    return Err(config_err(format!("--q {q} disagrees with the key file modulus {}", he.modulus())));
                }
            }
            Ok(run_closed_loop(&lc, &he)?)
        }
        Backend::Paillier => {
            if flags.q.is_some() {
                return Err(config_err("--q cannot be set for paillier; the modulus is N"));
            }
            let key = load_or_create_keys(keys, || {
                Ok(KeyFile::from_paillier(&PaillierHe::keygen(cfg.sim.key_bits, lc.seed).map_err(config_err)?))
            })?;
            let he = key.to_paillier().map_err(config_err)?;
            Ok(run_closed_loop(&lc, &he)?)
        }
    }
}

pub fn summary_checks(s: &RunSummary) -> Vec<GoldenCheck> {
    let mut checks = vec![
        GoldenCheck { name: "restoration exact at every step", pass: s.all_exact },
        GoldenCheck { name: "controller state consistent with oracle", pass: s.controller_consistent_all },
        GoldenCheck { name: "history identity holds", pass: s.history_identity_all },
        GoldenCheck { name: "estimation error within bound", pass: s.e_v_bound_all },
    ];
    if s.scheme != Scheme::Naive {
        checks.push(GoldenCheck { name: "history combination below q/2", pass: s.combination_below_half_q });
    }
    checks
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| config_err(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Output paths in a config are relative to the config file.
fn resolve(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Design { config, out } => {
            let cfg = parse_config(config)?;
            let report = run_design(&cfg)?;
            let path = out.clone().or_else(|| cfg.output.report_path.as_ref().map(|p| resolve(config, p)));
            write_json(path.as_deref(), &report)?;
            if report.design.has_failures() {
                return Err(design_err("design checks reported failures"));
            }
            Ok(())
        }
        Command::Simulate { config, run, trace } => {
            let cfg = parse_config(config)?;
            let t = simulate(&cfg, run)?;
            let trace_path = trace.clone().or_else(|| cfg.output.trace_path.as_ref().map(|p| resolve(config, p)));
            if let Some(p) = &trace_path {
                write_trace_csv(p, &t.records)?;
            }
            let report = RunReport {
                version: REPORT_VERSION,
                design: validate_design(
                    &cfg.spec(),
                    solve_regulator(&cfg.spec()).ok().as_ref(),
                    &cfg.design.gamma,
                    &cfg.design.s,
                    &cfg.design.l0,
                    Some(&cfg.initial()),
                ),
                artifacts: None,
                checks: summary_checks(&t.summary),
                summary: Some(t.summary),
            };
            write_json(None, &report)
        }
        Command::Verify { config, trace, run } => {
            let cfg = parse_config(config)?;
            let recorded = read_trace_csv(trace)?;
            let fresh = simulate(&cfg, run)?;
            let mismatches = verify_trace(&recorded, &fresh);
            if mismatches.is_empty() {
                println!("{}", json!({ "verified": true, "rows": recorded.len() }));
                Ok(())
            } else {
                Err(CliError::Verify(mismatches))
            }
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", serde_json::to_string_pretty(&e.to_json()).expect("error serializes"));
            e.exit_code()
        }
    }
}
