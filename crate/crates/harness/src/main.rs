use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isac_harness::presets::{preset, PRESETS};
use isac_harness::{parse_config, run_experiment, write_csv, ConfigError, Experiment, ExperimentSpec, HarnessConfig, Sweep};

const CONFIG_ERROR: u8 = 1;
const EXPERIMENT_FAILURE: u8 = 2;

/// Multi-static ISAC experiment runner.
#[derive(Parser)]
#[command(name = "isac", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment sweep and write CSV.
    Run {
        /// Scenario JSON file, or `preset:<name>`.
        #[arg(long)]
        config: String,
        #[arg(long)]
        experiment: String,
        #[arg(long, default_value_t = 1)]
        trials: u32,
        /// Root seed; defaults to the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the sweep, as `name=v1,v2,...`.
        #[arg(long)]
        sweep: Option<String>,
        /// Matched-filter blocks per row (mf_vs_crb).
        #[arg(long)]
        mse_trials: Option<usize>,
        /// Record wall time per row (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[arg(long)]
        config: String,
    },
    /// List shipped presets and experiments.
    Presets {
        /// Print the JSON of one preset.
        #[arg(long)]
        show: Option<String>,
    },
}

fn load(config: &str) -> Result<HarnessConfig, ConfigError> {
    match config.strip_prefix("preset:") {
        Some(name) => preset(name),
        None => parse_config(config.as_ref()),
    }
}

fn config_error(e: &ConfigError) -> ExitCode {
    eprintln!("config error: {e}");
    ExitCode::from(CONFIG_ERROR)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.cmd {
        Cmd::Validate { config } => match load(&config) {
            Ok(c) => {
                let s = &c.scenario;
                println!(
                    "ok: k={} n_t={} n_r={} l={} m={} p_t={:e} W pulse={}",
                    s.k,
                    s.n_t,
                    s.n_r,
                    s.l,
                    s.m,
                    s.p_t,
                    s.pulse.name()
                );
                ExitCode::SUCCESS
            }
            Err(e) => config_error(&e),
        },
        Cmd::Presets { show: Some(name) } => match PRESETS.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            None => config_error(&ConfigError::invalid("show", format!("unknown preset `{name}`"))),
        },
        Cmd::Presets { show: None } => {
            println!("presets (use --config preset:<name>):");
            for (name, _) in PRESETS {
                println!("  {name}");
            }
            println!("experiments (default sweep):");
            for e in Experiment::ALL {
                let s = e.default_sweep();
                let vals: Vec<String> = s.values.iter().map(f64::to_string).collect();
                println!("  {:<18} {}={}", e.name(), s.param.name(), vals.join(","));
            }
            ExitCode::SUCCESS
        }
        Cmd::Run { config, experiment, trials, seed, out, sweep, mse_trials, timing } => {
            let setup = || -> Result<(HarnessConfig, ExperimentSpec), ConfigError> {
                let cfg = load(&config)?;
                let exp: Experiment = experiment.parse()?;
                let mut spec = ExperimentSpec::new(exp, trials, seed.unwrap_or(cfg.scenario.seed));
                if let Some(s) = &sweep {
                    spec.sweep = s.parse::<Sweep>()?;
                }
                if let Some(n) = mse_trials {
                    spec.mse_trials = n;
                }
                spec.timing = timing;
                spec.out = out.clone();
                spec.validate(&cfg)?;
                Ok((cfg, spec))
            };
            let (cfg, spec) = match setup() {
                Ok(x) => x,
                Err(e) => return config_error(&e),
            };
            let rows = match run_experiment(&spec, &cfg) {
                Ok(r) => r,
                Err(e) => return config_error(&e),
            };
            let written = match &spec.out {
                Some(path) => File::create(path)
                    .map_err(|e| e.to_string())
                    .and_then(|f| write_csv(&rows, BufWriter::new(f)).map_err(|e| e.to_string())),
                None => write_csv(&rows, io::stdout().lock()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("cannot write output: {e}");
                return ExitCode::from(EXPERIMENT_FAILURE);
            }
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed == rows.len() {
                eprintln!("experiment failed: all {failed} rows carry errors");
                return ExitCode::from(EXPERIMENT_FAILURE);
            }
            if failed > 0 {
                log::warn!("{failed} of {} rows carry errors", rows.len());
            }
            ExitCode::SUCCESS
        }
    }
}
