//! Experiment orchestration: replicas, sweeps and threshold extraction.
//!
//! Every `(grid point, replica)` pair draws from its own stream
//! `rng_stream(master_seed, replica_stream(point, replica))`, so results do
//! not depend on how rayon schedules the work.

mod critical;
mod fraction;
mod param_sweep;

pub use critical::{
    find_critical_initial_fraction, run_outcome, CriticalFraction, CriticalSearch, RunOutcome,
    ScanPoint,
};
pub use fraction::{
    classify_cipolla, sweep_fraction, zero_crossing, CipollaLabel, FractionSweep, Threshold,
    ThresholdReport,
};
pub use param_sweep::{sweep_parameter, ParamSweep, SkippedPoint, SweepAxis};

use rayon::prelude::*;

use crate::error::Result;
use crate::network::{build_graph, Topology};
use crate::params::{Category, Params};
use crate::rng::{replica_stream, rng_stream};
use crate::sim::{simulate, InitialFractions, RunResult, TurnRecord};

/// Replica mean and sample standard deviation of one observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    /// `None` when no replica produced a value (empty category).
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    /// Replicas that contributed.
    pub count: usize,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let xs: Vec<f64> = values.into_iter().flatten().collect();
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: None,
                sd: None,
                count: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean: Some(mean),
            sd: Some(sd),
            count: n,
        }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> Option<f64> {
        self.sd.map(|sd| sd / (self.count as f64).sqrt())
    }

    pub(crate) fn shifted(self, by: f64) -> Self {
        Self {
            mean: self.mean.map(|m| m - by),
            ..self
        }
    }
}

/// Replica statistics of the final state at one grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// Final category fractions, indexed by [`Category::index`].
    pub fractions: [Summary; 3],
    pub avg_capital_all: Summary,
    pub avg_capital: [Summary; 3],
    pub replicas: usize,
}

impl SweepPoint {
    pub fn from_runs(value: f64, runs: &[RunSummary]) -> Self {
        let finals: Vec<&TurnRecord> = runs.iter().map(|r| &r.final_record).collect();
        Self {
            value,
            fractions: std::array::from_fn(|k| Summary::of(finals.iter().map(|r| Some(r.fractions[k])))),
            avg_capital_all: Summary::of(finals.iter().map(|r| Some(r.avg_capital_all))),
            avg_capital: std::array::from_fn(|k| Summary::of(finals.iter().map(|r| r.avg_capital[k]))),
            replicas: runs.len(),
        }
    }

    pub fn fraction(&self, cat: Category) -> &Summary {
        &self.fractions[cat.index()]
    }

    pub fn capital(&self, cat: Category) -> &Summary {
        &self.avg_capital[cat.index()]
    }
}

/// Final-state statistics against one swept variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub variable: String,
    /// Strictly increasing in `value`.
    pub points: Vec<SweepPoint>,
    pub replicas: usize,
}

impl SweepCurve {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn point_at(&self, value: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| (p.value - value).abs() < 1e-9)
    }
}

/// What the harness keeps from one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_record: TurnRecord,
    /// Per-turn growth of the overall mean capital over the last tenth of the run.
    pub late_slope: f64,
}

impl RunSummary {
    pub fn of(run: &RunResult) -> Self {
        let turns = run.records.len() - 1;
        Self {
            final_record: *run.final_record(),
            late_slope: run.late_capital_slope((turns / 10).max(1)),
        }
    }
}

/// One replica of a grid point. Adaptive runs build a fresh graph from the
/// replica's own stream before placing players.
pub fn run_replica(
    params: &Params,
    initial: InitialFractions,
    adaptive: Option<Topology>,
    point: usize,
    replica: usize,
) -> Result<RunResult> {
    let stream = replica_stream(point, replica);
    let mut rng = rng_stream(params.seed, stream);
    match adaptive {
        None => simulate(params, initial, None, &mut rng, stream),
        Some(topology) => {
            let graph = build_graph(params.n_players, topology, params.rewire_r, &mut rng)?;
            simulate(params, initial, Some(&graph), &mut rng, stream)
        }
    }
}

/// Runs `replicas` replicas for each job in parallel and returns the
/// summaries grouped per job, in job order.
pub(crate) fn run_batch<J>(jobs: &[J], replicas: usize) -> Result<Vec<Vec<RunSummary>>>
where
    J: Fn(usize) -> Result<RunResult> + Sync,
{
    let flat: Vec<RunSummary> = (0..jobs.len() * replicas)
        .into_par_iter()
        .map(|k| jobs[k / replicas](k % replicas).map(|r| RunSummary::of(&r)))
        .collect::<Result<_>>()?;
    Ok(flat.chunks(replicas.max(1)).map(<[RunSummary]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let s = Summary::of([Some(1.0), Some(2.0), None, Some(3.0)]);
        assert_eq!(s.mean, Some(2.0));
        assert_eq!(s.sd, Some(1.0));
        assert_eq!(s.count, 3);
        assert!((s.se().unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);

        let empty = Summary::of([None, None]);
        assert_eq!((empty.mean, empty.count), (None, 0));

        let single = Summary::of([Some(4.0)]);
        assert_eq!(single.sd, Some(0.0));
    }

    #[test]
    fn replicas_are_independent_of_batch_shape() {
        let params = Params {
            n_players: 100,
            turns: 20,
            seed: 5,
            ..Params::default()
        };
        let init = InitialFractions::taxpayers_only(0.5).unwrap();
        let job = |r| run_replica(&params, init, None, 3, r);
        let batch = run_batch(&[job], 4).unwrap();
        let direct = RunSummary::of(&run_replica(&params, init, None, 3, 2).unwrap());
        assert_eq!(batch[0][2], direct);
    }
}
