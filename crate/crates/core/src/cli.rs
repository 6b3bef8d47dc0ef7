//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for configuration or usage errors, 2 for
//! failures while running or writing results.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::harness::{find_critical_initial_fraction, sweep_fraction, sweep_parameter};
use crate::network::build_graph;
use crate::output::{self, CriticalEntry, OutputSet};
use crate::params::Params;
use crate::rng::{replica_stream, rng_stream};
use crate::sim::simulate;

pub const SEED_ENV: &str = "TAXSIM_SEED";

#[derive(Debug, Parser)]
#[command(name = "taxsim", version, about = "Agent-based tax evasion game")]
pub struct Cli {
    /// Experiment config file (`key = value` with sections).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed. Overrides TAXSIM_SEED and the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for replicas.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Config override, `section.key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Non-adaptive sweep of the taxpayer fraction with threshold report.
    SweepFraction(SweepFractionArgs),
    /// One adaptive run, written as a per-turn time series.
    Run(RunArgs),
    /// Critical initial taxpayer fraction for each (IF, CF) pair.
    FindThreshold(FindThresholdArgs),
    /// Adaptive sweep over d, h or p.
    SweepParam(SweepParamArgs),
    /// Parse and validate the config without running anything.
    ValidateConfig,
}

#[derive(Debug, Args)]
pub struct SweepFractionArgs {
    /// Subtract the all-evader baseline from every capital.
    #[arg(long)]
    pub rescale: bool,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub turns: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub initial_taxpayers: Option<f64>,
    #[arg(long)]
    pub initial_mixed: Option<f64>,
    /// `small-world` or `fully-connected`.
    #[arg(long)]
    pub topology: Option<String>,
    #[arg(long)]
    pub turns: Option<usize>,
    /// Also write the social network as an edge list.
    #[arg(long)]
    pub dump_graph: bool,
}

#[derive(Debug, Args)]
pub struct FindThresholdArgs {
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Comma-separated imitation factors.
    #[arg(long)]
    pub imitation_factors: Option<String>,
    /// Comma-separated capital factors.
    #[arg(long)]
    pub capital_factors: Option<String>,
    /// Comma-separated initial fractions to scan.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub turns: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepParamArgs {
    /// `tax_d`, `penalty_h` or `audit_p`.
    #[arg(long)]
    pub axis: Option<String>,
    /// Comma-separated values; defaults to the axis grid.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub initial_taxpayers: Option<f64>,
    #[arg(long)]
    pub initial_mixed: Option<f64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub turns: Option<usize>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SweepFraction(_) => "sweep-fraction",
            Command::Run(_) => "run",
            Command::FindThreshold(_) => "find-threshold",
            Command::SweepParam(_) => "sweep-param",
            Command::ValidateConfig => "validate-config",
        }
    }

    fn kind(&self) -> Option<ExperimentKind> {
        match self {
            Command::SweepFraction(_) => Some(ExperimentKind::FractionSweep),
            Command::Run(_) => Some(ExperimentKind::AdaptiveRun),
            Command::FindThreshold(_) => Some(ExperimentKind::CriticalFraction),
            Command::SweepParam(_) => Some(ExperimentKind::ParamSweep),
            Command::ValidateConfig => None,
        }
    }

    /// Subcommand flags as `section.key=value` overrides.
    fn overrides(&self) -> Vec<String> {
        fn put<T: ToString>(out: &mut Vec<String>, key: &str, v: &Option<T>) {
            if let Some(v) = v {
                out.push(format!("{key}={}", v.to_string()));
            }
        }
        let mut o = Vec::new();
        match self {
            Command::SweepFraction(a) => {
                if a.rescale {
                    o.push("fraction-sweep.rescale=true".into());
                }
                put(&mut o, "fraction-sweep.replicas", &a.replicas);
                put(&mut o, "fraction-sweep.steps", &a.steps);
                put(&mut o, "fraction-sweep.turns", &a.turns);
            }
            Command::Run(a) => {
                put(&mut o, "adaptive-run.initial_taxpayers", &a.initial_taxpayers);
                put(&mut o, "adaptive-run.initial_mixed", &a.initial_mixed);
                put(&mut o, "adaptive-run.topology", &a.topology);
                put(&mut o, "adaptive-run.turns", &a.turns);
                if a.dump_graph {
                    o.push("adaptive-run.dump_graph=true".into());
                }
            }
            Command::FindThreshold(a) => {
                put(&mut o, "critical-fraction.replicas", &a.replicas);
                put(&mut o, "critical-fraction.imitation_factors", &a.imitation_factors);
                put(&mut o, "critical-fraction.capital_factors", &a.capital_factors);
                put(&mut o, "critical-fraction.grid", &a.grid);
                put(&mut o, "critical-fraction.turns", &a.turns);
            }
            Command::SweepParam(a) => {
                put(&mut o, "param-sweep.axis", &a.axis);
                put(&mut o, "param-sweep.grid", &a.grid);
                put(&mut o, "param-sweep.initial_taxpayers", &a.initial_taxpayers);
                put(&mut o, "param-sweep.initial_mixed", &a.initial_mixed);
                put(&mut o, "param-sweep.replicas", &a.replicas);
                put(&mut o, "param-sweep.turns", &a.turns);
            }
            Command::ValidateConfig => {}
        }
        o
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                1
            } else {
                2
            }
        }
    }
}

/// Config file, then `--set`, then subcommand flags, then the seed chain
/// `--seed` > `TAXSIM_SEED` > config, then `--out` and `--jobs`.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    for o in cli.overrides.iter().chain(&cli.command.overrides()) {
        cfg.apply_override(o)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    } else if let Ok(raw) = std::env::var(SEED_ENV) {
        let seed = raw
            .trim()
            .parse()
            .map_err(|e| Error::config(SEED_ENV, format!("cannot parse `{raw}`: {e}")))?;
        cfg.seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = Some(jobs);
    }
    if let Some(kind) = cli.command.kind() {
        if cfg.experiment.is_some_and(|k| k != kind) {
            warn!(
                "config declares experiment {} but running {}",
                cfg.experiment.unwrap(),
                cli.command.name()
            );
        }
        cfg.experiment = Some(kind);
    }
    Ok(cfg)
}

/// Checks everything a run would check before starting.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.experiment == Some(ExperimentKind::ParamSweep) {
        relaxed_params(cfg, 1)?;
    } else {
        cfg.params_for(1)?;
    }
    cfg.adaptive_initial()?;
    cfg.param_sweep_initial()?;
    for &f in &cfg.critical.grid {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::config("critical-fraction.grid", format!("{f} is outside [0, 1]")));
        }
    }
    for (key, v) in [
        ("fraction-sweep.replicas", cfg.fraction_sweep.replicas),
        ("fraction-sweep.steps", cfg.fraction_sweep.steps),
        ("fraction-sweep.turns", cfg.fraction_sweep.turns),
        ("adaptive-run.turns", cfg.adaptive_run.turns),
        ("critical-fraction.replicas", cfg.critical.replicas),
        ("critical-fraction.turns", cfg.critical.turns),
        ("param-sweep.replicas", cfg.param_sweep.replicas),
        ("param-sweep.turns", cfg.param_sweep.turns),
    ] {
        if v == 0 {
            return Err(Error::config(key, "must be at least 1"));
        }
    }
    if cfg.jobs == Some(0) {
        return Err(Error::config("jobs", "must be at least 1"));
    }
    if cfg.critical.resolution <= 0.0 || !cfg.critical.resolution.is_finite() {
        return Err(Error::config("critical-fraction.resolution", "must be positive"));
    }
    for (key, list) in [
        ("critical-fraction.imitation_factors", &cfg.critical.imitation_factors),
        ("critical-fraction.capital_factors", &cfg.critical.capital_factors),
    ] {
        if list.is_empty() {
            return Err(Error::config(key, "needs at least one value"));
        }
        if list.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::config(key, "values must be finite and non-negative"));
        }
    }
    Ok(())
}

/// Base parameters for a parameter sweep, where `h > d` and `g < d` only warn.
fn relaxed_params(cfg: &ExperimentConfig, turns: usize) -> Result<Params> {
    let (params, warnings) = Params {
        turns,
        seed: cfg.seed.unwrap_or(0),
        ..cfg.params.clone()
    }
    .validate_relaxed()?;
    for w in warnings {
        warn!("base parameters: {w}");
    }
    Ok(params)
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    validate(&cfg)?;
    if let Command::ValidateConfig = cli.command {
        println!("config ok (hash {})", cfg.config_hash());
        return Ok(());
    }
    cfg.require_seed()?;

    let outputs = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("jobs", e.to_string()))?
            .install(|| run_experiment(&cli.command, &cfg))?,
        None => run_experiment(&cli.command, &cfg)?,
    };
    for path in outputs.commit(&cfg.output_dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn run_experiment(command: &Command, cfg: &ExperimentConfig) -> Result<OutputSet> {
    let name = command.name();
    let mut out = OutputSet::new();
    match command {
        Command::SweepFraction(_) => {
            let s = &cfg.fraction_sweep;
            let params = cfg.params_for(s.turns)?;
            info!("fraction sweep: {} points x {} replicas", s.steps + 1, s.replicas);
            let sweep = sweep_fraction(&params, s.rescale, s.replicas, s.steps)?;
            out.add_with_meta("fraction_sweep.csv", output::fraction_sweep_csv(&sweep), name, cfg);
        }
        Command::Run(_) => {
            let s = &cfg.adaptive_run;
            let params = cfg.params_for(s.turns)?;
            let initial = cfg.adaptive_initial()?;
            let stream = replica_stream(0, 0);
            let mut rng = rng_stream(params.seed, stream);
            let graph = build_graph(params.n_players, s.topology, params.rewire_r, &mut rng)?;
            let run = simulate(&params, initial, Some(&graph), &mut rng, stream)?;
            out.add_with_meta("adaptive_run.csv", output::adaptive_run_csv(&run), name, cfg);
            if s.dump_graph {
                out.add_with_meta("network.edges", output::edge_list(&graph), name, cfg);
            }
        }
        Command::FindThreshold(_) => {
            let s = &cfg.critical;
            let params = cfg.params_for(s.turns)?;
            let search = s.search();
            let mut entries = Vec::new();
            for &i in &s.imitation_factors {
                for &c in &s.capital_factors {
                    info!("critical fraction at IF={i} CF={c}");
                    match find_critical_initial_fraction(&params, i, c, &search) {
                        Ok(found) => entries.push(CriticalEntry::Found(found)),
                        Err(Error::NoFlipFound(message)) => {
                            warn!("{message}");
                            entries.push(CriticalEntry::NoFlip {
                                imitation_factor: i,
                                capital_factor: c,
                                message,
                            });
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            out.add_with_meta("critical_fraction.csv", output::critical_csv(&entries), name, cfg);
            out.add_with_meta(
                "critical_fraction_scan.csv",
                output::critical_scan_csv(&entries),
                name,
                cfg,
            );
        }
        Command::SweepParam(_) => {
            let s = &cfg.param_sweep;
            let params = relaxed_params(cfg, s.turns)?;
            let sweep = sweep_parameter(
                &params,
                s.axis,
                &s.effective_grid(),
                cfg.param_sweep_initial()?,
                s.replicas,
                s.topology,
            )?;
            let file = format!("param_sweep_{}.csv", s.axis);
            out.add_with_meta(&file, output::param_sweep_csv(&sweep), name, cfg);
        }
        Command::ValidateConfig => {}
    }
    Ok(out)
}
