//! CSV, edge-list and metadata writers.
//!
//! Every table ends with `#`-prefixed footer lines, the last of which is
//! `#format_version=N`. Missing values (statistics of an empty category) are
//! written as empty fields. Files are staged next to their destination and
//! renamed into place only once all of them have been written.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::harness::{CriticalFraction, FractionSweep, ParamSweep, ScanPoint, Summary};
use crate::network::SocialGraph;
use crate::params::Category;
use crate::sim::RunResult;

pub const FORMAT_VERSION: u32 = 1;

const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// `%g`-style rendering with 9 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        trim_zeros(format!("{x:.*}", (8 - exp) as usize))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn plural(c: Category) -> &'static str {
    match c {
        Category::Taxpayer => "taxpayers",
        Category::Evader => "evaders",
        Category::Mixed => "mixed",
    }
}

fn push_row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

fn push_summary(fields: &mut Vec<String>, s: &Summary) {
    fields.push(opt(s.mean));
    fields.push(opt(s.sd));
}

fn footer_version(out: &mut String) {
    let _ = writeln!(out, "#format_version={FORMAT_VERSION}");
}

/// Final capital per category against the taxpayer fraction, with the
/// threshold report as footer lines.
pub fn fraction_sweep_csv(sweep: &FractionSweep) -> String {
    let mut out = String::from(
        "f,mean_C_all,sd_C_all,mean_C_taxpayers,sd_C_taxpayers,mean_C_evaders,sd_C_evaders,n_replicas\n",
    );
    for p in &sweep.curve.points {
        let mut fields = vec![format_number(p.value)];
        push_summary(&mut fields, &p.avg_capital_all);
        push_summary(&mut fields, p.capital(Category::Taxpayer));
        push_summary(&mut fields, p.capital(Category::Evader));
        fields.push(p.replicas.to_string());
        push_row(&mut out, &fields);
    }
    let _ = writeln!(
        out,
        "#rescaled={} baseline={}",
        sweep.rescaled,
        format_number(sweep.baseline)
    );
    for (name, t) in sweep.thresholds.entries() {
        let _ = writeln!(
            out,
            "#threshold {name}={} half_width={}",
            opt(t.map(|t| t.value)),
            opt(t.map(|t| t.half_width))
        );
    }
    footer_version(&mut out);
    out
}

/// Per-turn fractions and mean capitals of one run, `t = 0..=T`.
pub fn adaptive_run_csv(run: &RunResult) -> String {
    let mut out = String::from(
        "t,frac_taxpayers,frac_evaders,frac_mixed,mean_C_all,mean_C_taxpayers,mean_C_evaders,mean_C_mixed\n",
    );
    for (t, r) in run.records.iter().enumerate() {
        let mut fields = vec![t.to_string()];
        fields.extend(Category::ALL.map(|c| format_number(r.fraction(c))));
        fields.push(format_number(r.avg_capital_all));
        fields.extend(Category::ALL.map(|c| opt(r.avg(c))));
        push_row(&mut out, &fields);
    }
    let _ = writeln!(out, "#stream={}", run.stream);
    footer_version(&mut out);
    out
}

/// Outcome of the critical-fraction search for one (IF, CF) pair.
#[derive(Debug, Clone, PartialEq)]
pub enum CriticalEntry {
    Found(CriticalFraction),
    NoFlip {
        imitation_factor: f64,
        capital_factor: f64,
        message: String,
    },
}

impl CriticalEntry {
    fn factors(&self) -> (f64, f64) {
        match self {
            CriticalEntry::Found(c) => (c.imitation_factor, c.capital_factor),
            CriticalEntry::NoFlip {
                imitation_factor,
                capital_factor,
                ..
            } => (*imitation_factor, *capital_factor),
        }
    }
}

/// One row per (IF, CF); pairs without a flip have empty value columns.
pub fn critical_csv(entries: &[CriticalEntry]) -> String {
    let mut out = String::from("imitation_factor,capital_factor,critical_f,half_width\n");
    for e in entries {
        let (i, c) = e.factors();
        let (v, hw) = match e {
            CriticalEntry::Found(cf) => (Some(cf.value), Some(cf.half_width)),
            CriticalEntry::NoFlip { .. } => (None, None),
        };
        push_row(&mut out, &[format_number(i), format_number(c), opt(v), opt(hw)]);
    }
    for e in entries {
        if let CriticalEntry::NoFlip { message, .. } = e {
            let _ = writeln!(out, "#no_flip {message}");
        }
    }
    footer_version(&mut out);
    out
}

/// Replica tallies behind every critical-fraction estimate. `stage` is
/// `scan` for grid points and `bisect` for refinement midpoints.
pub fn critical_scan_csv(entries: &[CriticalEntry]) -> String {
    let mut out = String::from(
        "imitation_factor,capital_factor,stage,f,replicas,taxpayer_majority,collective_growing,better,majority_better\n",
    );
    for e in entries {
        let CriticalEntry::Found(cf) = e else { continue };
        let stages = cf
            .scan
            .iter()
            .map(|p| ("scan", p))
            .chain(cf.refinements.iter().map(|p| ("bisect", p)));
        for (stage, p) in stages {
            let p: &ScanPoint = p;
            push_row(
                &mut out,
                &[
                    format_number(cf.imitation_factor),
                    format_number(cf.capital_factor),
                    stage.into(),
                    format_number(p.f()),
                    p.replicas.to_string(),
                    p.taxpayer_majority.to_string(),
                    p.collective_growing.to_string(),
                    p.better.to_string(),
                    p.majority_better().to_string(),
                ],
            );
        }
    }
    footer_version(&mut out);
    out
}

/// Final fractions and capitals against the swept parameter.
pub fn param_sweep_csv(sweep: &ParamSweep) -> String {
    let mut out = String::new();
    let mut header = vec![sweep.axis.as_str().to_string()];
    for c in Category::ALL {
        header.push(format!("mean_frac_{}", plural(c)));
        header.push(format!("sd_frac_{}", plural(c)));
    }
    header.push("mean_C_all".into());
    header.push("sd_C_all".into());
    for c in Category::ALL {
        header.push(format!("mean_C_{}", plural(c)));
        header.push(format!("sd_C_{}", plural(c)));
    }
    header.push("n_replicas".into());
    push_row(&mut out, &header);

    for p in &sweep.curve.points {
        let mut fields = vec![format_number(p.value)];
        for c in Category::ALL {
            push_summary(&mut fields, p.fraction(c));
        }
        push_summary(&mut fields, &p.avg_capital_all);
        for c in Category::ALL {
            push_summary(&mut fields, p.capital(c));
        }
        fields.push(p.replicas.to_string());
        push_row(&mut out, &fields);
    }
    for s in &sweep.skipped {
        let _ = writeln!(out, "#skipped value={} reason={}", format_number(s.value), s.reason);
    }
    for w in &sweep.warnings {
        let _ = writeln!(out, "#warning {w}");
    }
    footer_version(&mut out);
    out
}

/// `u v` per undirected edge, `u < v`.
pub fn edge_list(graph: &SocialGraph) -> String {
    let mut buf = Vec::new();
    graph
        .write_edge_list(&mut buf)
        .expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("edge list is ASCII")
}

/// Metadata sidecar: provenance keys followed by the full config echo.
pub fn meta(subcommand: &str, config: &ExperimentConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(out, "subcommand = {subcommand}");
    let _ = writeln!(out, "config_hash = {}", config.config_hash());
    let _ = writeln!(
        out,
        "master_seed = {}",
        config.seed.map(|s| s.to_string()).unwrap_or_default()
    );
    let _ = writeln!(out, "code_version = {CODE_VERSION}");
    out.push_str("\n# config\n");
    out.push_str(&config.to_config_string());
    out
}

/// A set of files that appear together or not at all.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    /// Adds `<name>` and its `<name>.meta` sidecar.
    pub fn add_with_meta(&mut self, name: &str, contents: String, subcommand: &str, config: &ExperimentConfig) {
        self.add(name, contents);
        self.add(format!("{name}.meta"), meta(subcommand, config));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file to a temporary sibling, then renames them all into
    /// `dir`. On failure the temporaries are removed.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let staged: Vec<(PathBuf, PathBuf)> = self
            .files
            .iter()
            .map(|(name, _)| (dir.join(format!(".{name}.tmp")), dir.join(name)))
            .collect();
        let cleanup = |upto: usize| {
            for (tmp, _) in &staged[..upto] {
                let _ = fs::remove_file(tmp);
            }
        };
        for (k, ((tmp, _), (_, contents))) in staged.iter().zip(&self.files).enumerate() {
            if let Err(e) = fs::write(tmp, contents) {
                cleanup(k + 1);
                return Err(Error::io(tmp, e));
            }
        }
        for (k, (tmp, dest)) in staged.iter().enumerate() {
            if let Err(e) = fs::rename(tmp, dest) {
                for (tmp, _) in &staged[k..] {
                    let _ = fs::remove_file(tmp);
                }
                for (_, done) in &staged[..k] {
                    let _ = fs::remove_file(done);
                }
                return Err(Error::io(dest, e));
            }
        }
        Ok(staged.into_iter().map(|(_, dest)| dest).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-20.0), "-20");
        assert_eq!(format_number(100.0), "100");
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333");
        assert_eq!(format_number(-2.0 / 3.0 * 100.0), "-66.6666667");
        assert_eq!(format_number(123456789.4), "123456789");
        assert_eq!(format_number(1234567890.0), "1.23456789e+09");
        assert_eq!(format_number(0.0000123), "1.23e-05");
        assert_eq!(format_number(0.000123), "0.000123");
    }

    #[test]
    fn rounding_that_carries_into_next_decade() {
        assert_eq!(format_number(9.999999999), "10");
        assert_eq!(format_number(999999999.7), "1e+09");
    }

    #[test]
    fn commit_writes_all_files_and_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = OutputSet::new();
        set.add("a.csv", "x\n".into());
        set.add("b.txt", "y\n".into());
        let written = set.commit(dir.path()).unwrap();
        assert_eq!(written.len(), 2);
        assert_eq!(fs::read_to_string(dir.path().join("a.csv")).unwrap(), "x\n");
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert!(names.iter().all(|n| !n.ends_with(".tmp")), "{names:?}");
    }

    #[test]
    fn failed_commit_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        // a directory in the way makes the second rename fail
        fs::create_dir(dir.path().join("b.csv")).unwrap();
        fs::write(dir.path().join("b.csv").join("inner"), "").unwrap();
        let mut set = OutputSet::new();
        set.add("a.csv", "x\n".into());
        set.add("b.csv", "y\n".into());
        assert!(set.commit(dir.path()).is_err());
        assert!(!dir.path().join("a.csv").exists());
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty(), "{leftovers:?}");
    }

    #[test]
    fn meta_names_subcommand_hash_and_seed() {
        let cfg = ExperimentConfig {
            seed: Some(9),
            ..ExperimentConfig::default()
        };
        let m = meta("run", &cfg);
        assert!(m.contains("subcommand = run\n"));
        assert!(m.contains(&format!("config_hash = {}\n", cfg.config_hash())));
        assert!(m.contains("master_seed = 9\n"));
        assert!(m.contains("format_version = 1\n"));
        assert!(m.ends_with(&cfg.to_config_string()));
    }
}
