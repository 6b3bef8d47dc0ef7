//! Flat `key = value` experiment configuration.
//!
//! ```text
//! experiment = fraction-sweep
//! seed = 42
//! output_dir = out
//!
//! [params]
//! tax_d = 2
//!
//! [fraction-sweep]
//! replicas = 20
//! ```
//!
//! Keys before the first section header are global. Lines starting with `#`
//! are comments. Unknown sections and keys are errors, as are duplicates.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::{CriticalSearch, SweepAxis};
use crate::network::Topology;
use crate::params::Params;
use crate::sim::InitialFractions;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    FractionSweep,
    AdaptiveRun,
    CriticalFraction,
    ParamSweep,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::FractionSweep => "fraction-sweep",
            ExperimentKind::AdaptiveRun => "adaptive-run",
            ExperimentKind::CriticalFraction => "critical-fraction",
            ExperimentKind::ParamSweep => "param-sweep",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fraction-sweep" => Ok(ExperimentKind::FractionSweep),
            "adaptive-run" => Ok(ExperimentKind::AdaptiveRun),
            "critical-fraction" => Ok(ExperimentKind::CriticalFraction),
            "param-sweep" => Ok(ExperimentKind::ParamSweep),
            _ => Err(format!(
                "expected fraction-sweep, adaptive-run, critical-fraction or param-sweep; got `{s}`"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionSweepSettings {
    pub turns: usize,
    pub replicas: usize,
    /// Grid is `k / steps` for `k = 0..=steps`.
    pub steps: usize,
    pub rescale: bool,
}

impl Default for FractionSweepSettings {
    fn default() -> Self {
        Self {
            turns: 100,
            replicas: 20,
            steps: 100,
            rescale: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRunSettings {
    pub turns: usize,
    pub initial_taxpayers: f64,
    pub initial_mixed: f64,
    pub topology: Topology,
    pub dump_graph: bool,
}

impl Default for AdaptiveRunSettings {
    fn default() -> Self {
        Self {
            turns: 2000,
            initial_taxpayers: 0.6,
            initial_mixed: 0.0,
            topology: Topology::SmallWorld,
            dump_graph: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSettings {
    pub turns: usize,
    pub replicas: usize,
    pub grid: Vec<f64>,
    pub resolution: f64,
    pub imitation_factors: Vec<f64>,
    pub capital_factors: Vec<f64>,
    pub topology: Topology,
}

impl Default for CriticalSettings {
    fn default() -> Self {
        let search = CriticalSearch::default();
        Self {
            turns: 2000,
            replicas: search.replicas,
            grid: search.grid,
            resolution: search.resolution,
            imitation_factors: vec![1.0],
            capital_factors: vec![1.0],
            topology: search.topology,
        }
    }
}

impl CriticalSettings {
    pub fn search(&self) -> CriticalSearch {
        CriticalSearch {
            grid: self.grid.clone(),
            replicas: self.replicas,
            resolution: self.resolution,
            topology: self.topology,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSweepSettings {
    pub turns: usize,
    pub replicas: usize,
    pub axis: SweepAxis,
    /// Empty means the axis default grid.
    pub grid: Vec<f64>,
    pub initial_taxpayers: f64,
    pub initial_mixed: f64,
    pub topology: Topology,
}

impl Default for ParamSweepSettings {
    fn default() -> Self {
        Self {
            turns: 2000,
            replicas: 20,
            axis: SweepAxis::PenaltyH,
            grid: Vec::new(),
            initial_taxpayers: 0.6,
            initial_mixed: 0.0,
            topology: Topology::SmallWorld,
        }
    }
}

impl ParamSweepSettings {
    pub fn effective_grid(&self) -> Vec<f64> {
        if self.grid.is_empty() {
            self.axis.default_grid()
        } else {
            self.grid.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    /// Master seed. Required before anything runs.
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    pub jobs: Option<usize>,
    /// `turns` and `seed` here are ignored; each experiment supplies its own.
    pub params: Params,
    pub fraction_sweep: FractionSweepSettings,
    pub adaptive_run: AdaptiveRunSettings,
    pub critical: CriticalSettings,
    pub param_sweep: ParamSweepSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: None,
            output_dir: PathBuf::from("out"),
            jobs: None,
            params: Params::default(),
            fraction_sweep: FractionSweepSettings::default(),
            adaptive_run: AdaptiveRunSettings::default(),
            critical: CriticalSettings::default(),
            param_sweep: ParamSweepSettings::default(),
        }
    }
}

const SECTIONS: [&str; 5] = [
    "params",
    "fraction-sweep",
    "adaptive-run",
    "critical-fraction",
    "param-sweep",
];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::config(
                        format!("[{name}]"),
                        format!("unknown section on line {}", lineno + 1),
                    ));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(line, format!("line {} is not `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let full = qualified(&section, key);
            if !seen.insert(full.clone()) {
                return Err(Error::config(full, "duplicate key"));
            }
            cfg.set(&section, key, value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies a `section.key=value` (or global `key=value`) override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "override must be `section.key=value`"))?;
        let path = path.trim();
        let (section, key) = match path.rsplit_once('.') {
            Some((s, k)) if SECTIONS.contains(&s) => (s, k),
            Some(_) => return Err(Error::config(path, "unknown section")),
            None => ("", path),
        };
        self.set(section, key, value.trim())
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let full = qualified(section, key);
        let bad = |msg: String| Error::config(full.clone(), msg);
        let unknown = || Error::config(full.clone(), "unknown key");
        match section {
            "" => match key {
                "experiment" => self.experiment = Some(parse(value).map_err(bad)?),
                "seed" => self.seed = Some(parse(value).map_err(bad)?),
                "output_dir" => self.output_dir = PathBuf::from(value),
                "jobs" => self.jobs = Some(parse(value).map_err(bad)?),
                _ => return Err(unknown()),
            },
            "params" => {
                let p = &mut self.params;
                match key {
                    "n_players" => p.n_players = parse(value).map_err(bad)?,
                    "tax_d" => p.tax_d = parse(value).map_err(bad)?,
                    "penalty_h" => p.penalty_h = parse(value).map_err(bad)?,
                    "audit_p" => p.audit_p = parse(value).map_err(bad)?,
                    "gain_g" => p.gain_g = parse(value).map_err(bad)?,
                    "imitation_factor" => p.imitation_factor = parse(value).map_err(bad)?,
                    "capital_factor" => p.capital_factor = parse(value).map_err(bad)?,
                    "delta_b" => p.delta_b = parse(value).map_err(bad)?,
                    "rewire_r" => p.rewire_r = parse(value).map_err(bad)?,
                    "believeness_init" => p.believeness_init = parse(value).map_err(bad)?,
                    "update_order" => p.update_order = parse(value).map_err(bad)?,
                    "exit_believeness" => p.exit_believeness = parse(value).map_err(bad)?,
                    _ => return Err(unknown()),
                }
            }
            "fraction-sweep" => {
                let s = &mut self.fraction_sweep;
                match key {
                    "turns" => s.turns = parse(value).map_err(bad)?,
                    "replicas" => s.replicas = parse(value).map_err(bad)?,
                    "steps" => s.steps = parse(value).map_err(bad)?,
                    "rescale" => s.rescale = parse(value).map_err(bad)?,
                    _ => return Err(unknown()),
                }
            }
            "adaptive-run" => {
                let s = &mut self.adaptive_run;
                match key {
                    "turns" => s.turns = parse(value).map_err(bad)?,
                    "initial_taxpayers" => s.initial_taxpayers = parse(value).map_err(bad)?,
                    "initial_mixed" => s.initial_mixed = parse(value).map_err(bad)?,
                    "topology" => s.topology = parse(value).map_err(bad)?,
                    "dump_graph" => s.dump_graph = parse(value).map_err(bad)?,
                    _ => return Err(unknown()),
                }
            }
            "critical-fraction" => {
                let s = &mut self.critical;
                match key {
                    "turns" => s.turns = parse(value).map_err(bad)?,
                    "replicas" => s.replicas = parse(value).map_err(bad)?,
                    "grid" => s.grid = parse_list(value).map_err(bad)?,
                    "resolution" => s.resolution = parse(value).map_err(bad)?,
                    "imitation_factors" => s.imitation_factors = parse_list(value).map_err(bad)?,
                    "capital_factors" => s.capital_factors = parse_list(value).map_err(bad)?,
                    "topology" => s.topology = parse(value).map_err(bad)?,
                    _ => return Err(unknown()),
                }
            }
            "param-sweep" => {
                let s = &mut self.param_sweep;
                match key {
                    "turns" => s.turns = parse(value).map_err(bad)?,
                    "replicas" => s.replicas = parse(value).map_err(bad)?,
                    "axis" => s.axis = parse(value).map_err(bad)?,
                    "grid" => s.grid = parse_list(value).map_err(bad)?,
                    "initial_taxpayers" => s.initial_taxpayers = parse(value).map_err(bad)?,
                    "initial_mixed" => s.initial_mixed = parse(value).map_err(bad)?,
                    "topology" => s.topology = parse(value).map_err(bad)?,
                    _ => return Err(unknown()),
                }
            }
            _ => return Err(Error::config(format!("[{section}]"), "unknown section")),
        }
        Ok(())
    }

    /// Canonical text form; [`ExperimentConfig::parse`] reads it back unchanged.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        if let Some(kind) = self.experiment {
            kv(w, "experiment", kind);
        }
        if let Some(seed) = self.seed {
            kv(w, "seed", seed);
        }
        kv(w, "output_dir", self.output_dir.display());
        if let Some(jobs) = self.jobs {
            kv(w, "jobs", jobs);
        }

        let p = &self.params;
        w.push_str("\n[params]\n");
        kv(w, "n_players", p.n_players);
        kv(w, "tax_d", p.tax_d);
        kv(w, "penalty_h", p.penalty_h);
        kv(w, "audit_p", p.audit_p);
        kv(w, "gain_g", p.gain_g);
        kv(w, "imitation_factor", p.imitation_factor);
        kv(w, "capital_factor", p.capital_factor);
        kv(w, "delta_b", p.delta_b);
        kv(w, "rewire_r", p.rewire_r);
        kv(w, "believeness_init", p.believeness_init.as_str());
        kv(w, "update_order", p.update_order.as_str());
        kv(w, "exit_believeness", p.exit_believeness.as_str());

        let s = &self.fraction_sweep;
        w.push_str("\n[fraction-sweep]\n");
        kv(w, "turns", s.turns);
        kv(w, "replicas", s.replicas);
        kv(w, "steps", s.steps);
        kv(w, "rescale", s.rescale);

        let s = &self.adaptive_run;
        w.push_str("\n[adaptive-run]\n");
        kv(w, "turns", s.turns);
        kv(w, "initial_taxpayers", s.initial_taxpayers);
        kv(w, "initial_mixed", s.initial_mixed);
        kv(w, "topology", s.topology);
        kv(w, "dump_graph", s.dump_graph);

        let s = &self.critical;
        w.push_str("\n[critical-fraction]\n");
        kv(w, "turns", s.turns);
        kv(w, "replicas", s.replicas);
        kv(w, "grid", list(&s.grid));
        kv(w, "resolution", s.resolution);
        kv(w, "imitation_factors", list(&s.imitation_factors));
        kv(w, "capital_factors", list(&s.capital_factors));
        kv(w, "topology", s.topology);

        let s = &self.param_sweep;
        w.push_str("\n[param-sweep]\n");
        kv(w, "turns", s.turns);
        kv(w, "replicas", s.replicas);
        kv(w, "axis", s.axis);
        kv(w, "grid", list(&s.grid));
        kv(w, "initial_taxpayers", s.initial_taxpayers);
        kv(w, "initial_mixed", s.initial_mixed);
        kv(w, "topology", s.topology);
        out
    }

    /// Stable 64-bit FNV-1a digest of the canonical text, as 16 hex digits.
    /// `output_dir` and `jobs` are left out: they do not change results.
    pub fn config_hash(&self) -> String {
        let canonical = Self {
            output_dir: PathBuf::new(),
            jobs: None,
            ..self.clone()
        }
        .to_config_string();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in canonical.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::config("seed", "no seed given (use --seed, TAXSIM_SEED or `seed =` in the config)"))
    }

    /// Strictly validated base parameters with the master seed and `turns` filled in.
    pub fn params_for(&self, turns: usize) -> Result<Params> {
        Params {
            turns,
            seed: self.seed.unwrap_or(0),
            ..self.params.clone()
        }
        .validate()
    }

    pub fn adaptive_initial(&self) -> Result<InitialFractions> {
        InitialFractions::new(self.adaptive_run.initial_taxpayers, self.adaptive_run.initial_mixed)
    }

    pub fn param_sweep_initial(&self) -> Result<InitialFractions> {
        InitialFractions::new(self.param_sweep.initial_taxpayers, self.param_sweep.initial_mixed)
    }
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn kv(out: &mut String, key: &str, value: impl fmt::Display) {
    let _ = writeln!(out, "{key} = {value}");
}

fn list(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| format!("cannot parse `{value}`: {e}"))
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(v.trim())).collect()
}
