//! Command-line front end: configuration handling, subcommands and result files.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 on numerical failure.
//! Errors are written to stderr as one JSON object.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Meta, OutDir};

/// Default output directory when neither `--out` nor `out_dir` is given.
pub const OUT_ENV: &str = "SWINGUP_OUT";

#[derive(Debug, Parser)]
#[command(name = "swingup", version, about = "Collective-state preparation of two coupled emitters")]
pub struct Cli {
    /// JSON run configuration; omitted means all defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps, ensembles and spectra.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Initial Fock cutoff of the cavity.
    #[arg(long, global = true, value_name = "N")]
    pub fock: Option<usize>,
    /// Relative tolerance of the integrator.
    #[arg(long, global = true, value_name = "X")]
    pub tol_rel: Option<f64>,
    /// Override one config key, e.g. `--set pulse.alpha1_pi=68.25`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collective couplings and dressed energies over a separation grid.
    Couplings,
    /// Dressed populations over time from the ground state.
    Simulate,
    /// Long-time run with exponential fits of the collective populations.
    Decay,
    /// Final populations over a two-parameter grid.
    Sweep,
    /// Populations over time for a grid of relative optical phases.
    PhaseSweep,
    /// Normalised cavity emission spectrum.
    Spectrum,
    /// Second-order photon correlation.
    G2,
    /// Bloch vectors of the three target transitions.
    Bloch,
    /// Ensemble statistics under position or energy disorder.
    Disorder,
    /// Convert between meV or ps and scaled units.
    ConvertUnits(ConvertArgs),
    /// Run the acceptance criteria and print a pass/fail table.
    Reproduce {
        /// Criterion numbers; all when omitted.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("conversion").required(true).args(["mev", "ps", "to_mev", "to_ps"])))]
pub struct ConvertArgs {
    /// Energy in meV to scaled frequency.
    #[arg(long, allow_hyphen_values = true)]
    pub mev: Option<f64>,
    /// Time in ps to scaled time.
    #[arg(long, allow_hyphen_values = true)]
    pub ps: Option<f64>,
    /// Scaled frequency to meV.
    #[arg(long, allow_hyphen_values = true)]
    pub to_mev: Option<f64>,
    /// Scaled time to ps.
    #[arg(long, allow_hyphen_values = true)]
    pub to_ps: Option<f64>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Couplings => "couplings",
            Command::Simulate => "simulate",
            Command::Decay => "decay",
            Command::Sweep => "sweep",
            Command::PhaseSweep => "phase-sweep",
            Command::Spectrum => "spectrum",
            Command::G2 => "g2",
            Command::Bloch => "bloch",
            Command::Disorder => "disorder",
            Command::ConvertUnits(_) => "convert-units",
            Command::Reproduce { .. } => "reproduce",
        }
    }
}

/// Config file, then `--set`, then the typed flags; validated last.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut doc = match &cli.config {
        Some(p) => config::read_document(p)?,
        None => Value::Object(Map::new()),
    };
    for s in &cli.set {
        config::apply_override(&mut doc, s)?;
    }
    let mut cfg = config::deserialize_document(doc)?;
    let mut errs = Vec::new();
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.fock {
        match cfg.cavity.as_mut() {
            Some(c) => c.n_fock = n,
            None => errs.push("--fock needs a cavity section".to_string()),
        }
    }
    if let Some(r) = cli.tol_rel {
        cfg.integrator.rtol = r;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = Some(o.clone());
    }
    if let Err(CliError::Validation(v)) = cfg.validate() {
        errs.extend(v);
    }
    if !errs.is_empty() {
        return Err(CliError::Validation(errs));
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Runs a parsed command line and returns its stdout text.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    if let Command::ConvertUnits(a) = &cli.command {
        let v = commands::convert_units(a.mev, a.ps, a.to_mev, a.to_ps);
        return Ok(serde_json::to_string_pretty(&v).expect("plain data"));
    }
    let cfg = load_config(cli)?;
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Validation(vec!["--jobs must be >= 1".into()]));
        }
        // A second initialisation in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let meta = Meta::new(cli.command.name(), &cfg);
    let mut out = OutDir::create(out_dir(&cfg))?;
    let summary = match &cli.command {
        Command::Couplings => commands::couplings(&cfg, &meta, &mut out)?,
        Command::Simulate => commands::simulate_cmd(&cfg, &meta, &mut out)?,
        Command::Decay => commands::decay(&cfg, &meta, &mut out)?,
        Command::Sweep => commands::sweep(&cfg, &meta, &mut out)?,
        Command::PhaseSweep => commands::phase_sweep(&cfg, &meta, &mut out)?,
        Command::Spectrum => commands::spectrum(&cfg, &meta, &mut out)?,
        Command::G2 => commands::g2(&cfg, &meta, &mut out)?,
        Command::Bloch => commands::bloch(&cfg, &meta, &mut out)?,
        Command::Disorder => commands::disorder(&cfg, &meta, &mut out)?,
        Command::Reproduce { criteria } => {
            let s = commands::reproduce(criteria, &meta, &mut out)?;
            let line = format!("reproduce: {}/{} criteria pass", s["passed"], s["total"]);
            return Ok(line);
        }
        Command::ConvertUnits(_) => unreachable!("handled above"),
    };
    let files: Vec<String> = out.written.iter().map(|p| p.display().to_string()).collect();
    let doc = serde_json::json!({ "command": meta.command, "files": files, "result": summary });
    Ok(serde_json::to_string_pretty(&doc).expect("plain data"))
}

/// Full process behaviour: parse, run, report. Returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let err = CliError::Validation(vec![e.to_string().trim_end().to_string()]);
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match execute(&cli) {
        Ok(text) => {
            println!("{text}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
