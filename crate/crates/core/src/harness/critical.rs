//! Search for the critical initial taxpayer fraction of the adaptive model.

use crate::error::{Error, Result};
use crate::network::Topology;
use crate::params::{Category, Params};
use crate::sim::InitialFractions;

use super::{run_batch, run_replica, RunSummary};

/// Final verdict of one adaptive run. Both conditions are kept apart so
/// either can be used alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOutcome {
    /// More taxpayers than evaders at the end.
    pub taxpayer_majority: bool,
    /// Overall mean capital still growing over the last tenth of the run.
    pub collective_growing: bool,
}

impl RunOutcome {
    pub fn better(&self) -> bool {
        self.taxpayer_majority && self.collective_growing
    }
}

pub fn run_outcome(run: &RunSummary) -> RunOutcome {
    let fin = &run.final_record;
    RunOutcome {
        taxpayer_majority: fin.fraction(Category::Taxpayer) > fin.fraction(Category::Evader),
        collective_growing: run.late_slope > 0.0,
    }
}

/// Replica tallies at one initial fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanPoint {
    pub f_permille: u32,
    pub replicas: usize,
    pub taxpayer_majority: usize,
    pub collective_growing: usize,
    pub better: usize,
}

impl ScanPoint {
    fn tally(f: f64, runs: &[RunSummary]) -> Self {
        let outcomes: Vec<RunOutcome> = runs.iter().map(run_outcome).collect();
        Self {
            f_permille: (f * 1000.0).round() as u32,
            replicas: runs.len(),
            taxpayer_majority: outcomes.iter().filter(|o| o.taxpayer_majority).count(),
            collective_growing: outcomes.iter().filter(|o| o.collective_growing).count(),
            better: outcomes.iter().filter(|o| o.better()).count(),
        }
    }

    pub fn f(&self) -> f64 {
        self.f_permille as f64 / 1000.0
    }

    /// Strict replica majority of "better" outcomes.
    pub fn majority_better(&self) -> bool {
        2 * self.better > self.replicas
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSearch {
    /// Initial taxpayer fractions to scan, strictly increasing.
    pub grid: Vec<f64>,
    pub replicas: usize,
    /// Bisection stops once the bracket is at most this wide.
    pub resolution: f64,
    pub topology: Topology,
}

impl Default for CriticalSearch {
    fn default() -> Self {
        Self {
            grid: (40..=70).map(|k| k as f64 / 100.0).collect(),
            replicas: 20,
            resolution: 0.005,
            topology: Topology::SmallWorld,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalFraction {
    pub imitation_factor: f64,
    pub capital_factor: f64,
    /// Midpoint of the final bracket.
    pub value: f64,
    pub half_width: f64,
    pub scan: Vec<ScanPoint>,
    /// Bisection midpoints in evaluation order.
    pub refinements: Vec<ScanPoint>,
}

/// Scans the grid, locates the last switch from a worse to a better
/// replica-majority outcome and bisects that bracket down to `resolution`.
pub fn find_critical_initial_fraction(
    params: &Params,
    imitation_factor: f64,
    capital_factor: f64,
    search: &CriticalSearch,
) -> Result<CriticalFraction> {
    let params = Params {
        imitation_factor,
        capital_factor,
        ..params.clone()
    }
    .validate()?;
    check_grid(&search.grid)?;
    if search.replicas == 0 {
        return Err(Error::InvalidParam {
            name: "replicas",
            value: "0".into(),
            constraint: ">=1",
        });
    }

    let evaluate = |point: usize, fs: &[f64]| -> Result<Vec<ScanPoint>> {
        let jobs: Vec<_> = fs
            .iter()
            .enumerate()
            .map(|(k, &f)| {
                let params = &params;
                let topology = search.topology;
                move |r| {
                    run_replica(params, InitialFractions::taxpayers_only(f)?, Some(topology), point + k, r)
                }
            })
            .collect();
        let runs = run_batch(&jobs, search.replicas)?;
        Ok(fs.iter().zip(&runs).map(|(&f, rs)| ScanPoint::tally(f, rs)).collect())
    };

    let scan = evaluate(0, &search.grid)?;
    let better: Vec<bool> = scan.iter().map(ScanPoint::majority_better).collect();
    let flip = (1..better.len())
        .rev()
        .find(|&k| !better[k - 1] && better[k..].iter().all(|&b| b))
        .ok_or_else(|| {
            Error::NoFlipFound(format!(
                "IF={imitation_factor} CF={capital_factor}: majority-better pattern {}",
                better.iter().map(|&b| if b { '+' } else { '-' }).collect::<String>()
            ))
        })?;

    let (mut lo, mut hi) = (search.grid[flip - 1], search.grid[flip]);
    let mut refinements = Vec::new();
    let mut point = search.grid.len();
    while hi - lo > search.resolution + 1e-12 {
        let mid = 0.5 * (lo + hi);
        let p = evaluate(point, &[mid])?[0];
        point += 1;
        if p.majority_better() {
            hi = mid;
        } else {
            lo = mid;
        }
        refinements.push(p);
    }
    Ok(CriticalFraction {
        imitation_factor,
        capital_factor,
        value: 0.5 * (lo + hi),
        half_width: 0.5 * (hi - lo),
        scan,
        refinements,
    })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    let in_range = grid.iter().all(|f| (0.0..=1.0).contains(f));
    if grid.len() < 2 || !increasing || !in_range {
        return Err(Error::InvalidParam {
            name: "grid",
            value: format!("{grid:?}"),
            constraint: "at least two strictly increasing fractions in [0,1]",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TurnRecord;

    fn summary(t: f64, e: f64, slope: f64) -> RunSummary {
        RunSummary {
            final_record: TurnRecord {
                fractions: [t, e, 1.0 - t - e],
                avg_capital_all: 0.0,
                avg_capital: [None; 3],
            },
            late_slope: slope,
        }
    }

    #[test]
    fn outcome_needs_both_conditions() {
        assert!(run_outcome(&summary(0.6, 0.3, 0.1)).better());
        assert!(!run_outcome(&summary(0.6, 0.3, -0.1)).better());
        assert!(!run_outcome(&summary(0.3, 0.6, 0.1)).better());
        assert!(!run_outcome(&summary(0.4, 0.4, 0.1)).taxpayer_majority);
    }

    #[test]
    fn tally_and_majority() {
        let runs = [summary(0.6, 0.3, 0.1), summary(0.6, 0.3, -0.1), summary(0.7, 0.2, 0.2)];
        let p = ScanPoint::tally(0.55, &runs);
        assert_eq!((p.taxpayer_majority, p.collective_growing, p.better), (3, 2, 2));
        assert!(p.majority_better());
        assert_eq!(p.f(), 0.55);
        let tie = ScanPoint::tally(0.5, &runs[..2]);
        assert!(!tie.majority_better());
    }

    #[test]
    fn grid_validation() {
        let params = Params::default();
        for grid in [vec![0.5], vec![0.6, 0.5], vec![0.5, 1.2]] {
            let search = CriticalSearch {
                grid,
                ..CriticalSearch::default()
            };
            assert!(find_critical_initial_fraction(&params, 1.0, 1.0, &search).is_err());
        }
    }

    #[test]
    fn no_flip_when_nothing_changes() {
        // without adaptation a minority of taxpayers never wins
        let params = Params {
            n_players: 100,
            turns: 50,
            ..Params::default()
        };
        let search = CriticalSearch {
            grid: vec![0.2, 0.3, 0.4],
            replicas: 3,
            ..CriticalSearch::default()
        };
        let err = find_critical_initial_fraction(&params, 0.0, 0.0, &search).unwrap_err();
        assert!(matches!(err, Error::NoFlipFound(_)), "{err}");
    }

    #[test]
    fn frozen_population_flips_at_half() {
        // IF = CF = 0: the taxpayer majority is decided at t = 0
        let params = Params {
            n_players: 200,
            turns: 40,
            ..Params::default()
        };
        let search = CriticalSearch {
            grid: vec![0.40, 0.48, 0.56],
            replicas: 3,
            resolution: 0.01,
            ..CriticalSearch::default()
        };
        let crit = find_critical_initial_fraction(&params, 0.0, 0.0, &search).unwrap();
        assert!(crit.half_width <= 0.005 + 1e-12);
        assert!((crit.value - 0.5).abs() <= 0.01, "{crit:?}");
        assert_eq!(crit.refinements.len(), 3);
    }
}
