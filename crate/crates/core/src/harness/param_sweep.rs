//! Adaptive sweeps over tax, penalty and audit probability.

use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::network::Topology;
use crate::params::Params;
use crate::sim::InitialFractions;

use super::{run_batch, run_replica, SweepCurve, SweepPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    TaxD,
    PenaltyH,
    AuditP,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::TaxD => "tax_d",
            SweepAxis::PenaltyH => "penalty_h",
            SweepAxis::AuditP => "audit_p",
        }
    }

    /// d and h over 1..=10, p over 0..=1 in tenths.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepAxis::TaxD | SweepAxis::PenaltyH => (1..=10).map(f64::from).collect(),
            SweepAxis::AuditP => (0..=10).map(|k| k as f64 / 10.0).collect(),
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &Params, value: f64) -> std::result::Result<Params, String> {
        let mut p = base.clone();
        match self {
            SweepAxis::TaxD | SweepAxis::PenaltyH => {
                if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
                    return Err(format!("{} must be a positive integer", self.as_str()));
                }
                if self == SweepAxis::TaxD {
                    p.tax_d = value as u32;
                } else {
                    p.penalty_h = value as u32;
                }
            }
            SweepAxis::AuditP => p.audit_p = value,
        }
        Ok(p)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tax_d" => Ok(SweepAxis::TaxD),
            "penalty_h" => Ok(SweepAxis::PenaltyH),
            "audit_p" => Ok(SweepAxis::AuditP),
            _ => Err(format!("expected tax_d, penalty_h or audit_p; got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPoint {
    pub value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSweep {
    pub axis: SweepAxis,
    pub curve: SweepCurve,
    pub skipped: Vec<SkippedPoint>,
    /// Relaxed ordering constraints (`d >= h`, `g >= d`) crossed by kept points.
    pub warnings: Vec<String>,
}

/// Adaptive runs at every grid value of `axis`.
///
/// Points that break a hard invariant are reported in `skipped`; the d/h/g
/// ordering constraints only produce warnings here.
pub fn sweep_parameter(
    params: &Params,
    axis: SweepAxis,
    grid: &[f64],
    initial: InitialFractions,
    replicas: usize,
    topology: Topology,
) -> Result<ParamSweep> {
    if replicas == 0 {
        return Err(Error::InvalidParam {
            name: "replicas",
            value: "0".into(),
            constraint: ">=1",
        });
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParam {
            name: "grid",
            value: format!("{grid:?}"),
            constraint: "strictly increasing",
        });
    }

    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    let mut warnings = Vec::new();
    for (k, &value) in grid.iter().enumerate() {
        let checked = axis
            .apply(params, value)
            .and_then(|p| p.validate_relaxed().map_err(|e| e.to_string()));
        match checked {
            Ok((p, w)) => {
                for msg in w {
                    warn!("{axis} = {value}: {msg}");
                    warnings.push(format!("{axis}={value}: {msg}"));
                }
                kept.push((k, value, p));
            }
            Err(reason) => skipped.push(SkippedPoint { value, reason }),
        }
    }

    let jobs: Vec<_> = kept
        .iter()
        .map(|(k, _, p)| move |r| run_replica(p, initial, Some(topology), *k, r))
        .collect();
    let runs = run_batch(&jobs, replicas)?;
    let points = kept
        .iter()
        .zip(&runs)
        .map(|((_, value, _), rs)| SweepPoint::from_runs(*value, rs))
        .collect();
    Ok(ParamSweep {
        axis,
        curve: SweepCurve {
            variable: axis.as_str().into(),
            points,
            replicas,
        },
        skipped,
        warnings,
    })
}
