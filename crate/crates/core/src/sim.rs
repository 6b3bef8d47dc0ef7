//! Whole runs: population set-up, the turn loop and per-turn statistics.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::adaptation::adaptation_step;
use crate::engine::step_turn;
use crate::error::{Error, Result};
use crate::network::SocialGraph;
use crate::params::{BelievenessInit, Category, Params, PlayerState};
use crate::rng::SimRng;

/// Starting composition. Evaders fill whatever is left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialFractions {
    pub taxpayers: f64,
    pub mixed: f64,
}

impl InitialFractions {
    pub fn new(taxpayers: f64, mixed: f64) -> Result<Self> {
        let ok = |x: f64| (0.0..=1.0).contains(&x);
        if !ok(taxpayers) {
            return Err(Error::InvalidParam {
                name: "initial_taxpayers",
                value: taxpayers.to_string(),
                constraint: "0<=f<=1",
            });
        }
        if !ok(mixed) || taxpayers + mixed > 1.0 + 1e-12 {
            return Err(Error::InvalidParam {
                name: "initial_mixed",
                value: mixed.to_string(),
                constraint: "0<=mixed<=1-taxpayers",
            });
        }
        Ok(Self { taxpayers, mixed })
    }

    pub fn taxpayers_only(taxpayers: f64) -> Result<Self> {
        Self::new(taxpayers, 0.0)
    }

    pub fn evaders(&self) -> f64 {
        (1.0 - self.taxpayers - self.mixed).max(0.0)
    }

    /// Head counts `(taxpayers, evaders, mixed)` for `n` players.
    pub fn counts(&self, n: usize) -> (usize, usize, usize) {
        let a = ((self.taxpayers * n as f64).round() as usize).min(n);
        let m = ((self.mixed * n as f64).round() as usize).min(n - a);
        (a, n - a - m, m)
    }
}

/// Builds a shuffled population with believeness drawn per `params.believeness_init`.
pub fn initialize_population<R: Rng + ?Sized>(
    params: &Params,
    initial: InitialFractions,
    rng: &mut R,
) -> Vec<PlayerState> {
    let n = params.n_players;
    let (a, s, _) = initial.counts(n);
    let mut categories: Vec<Category> = (0..n)
        .map(|i| {
            if i < a {
                Category::Taxpayer
            } else if i < a + s {
                Category::Evader
            } else {
                Category::Mixed
            }
        })
        .collect();
    categories.shuffle(rng);
    categories
        .into_iter()
        .map(|cat| {
            let b = match (params.believeness_init, cat) {
                (BelievenessInit::Zealot, Category::Mixed) => 0.5,
                (BelievenessInit::Zealot, _) => 1.0,
                (BelievenessInit::UpperHalf, Category::Taxpayer | Category::Evader) => {
                    rng.gen_range(0.5..=1.0)
                }
                _ => rng.gen::<f64>(),
            };
            PlayerState::new(cat, b)
        })
        .collect()
}

/// Snapshot statistics of one turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnRecord {
    /// Indexed by [`Category::index`].
    pub fractions: [f64; 3],
    pub avg_capital_all: f64,
    /// `None` when the category is empty.
    pub avg_capital: [Option<f64>; 3],
}

impl TurnRecord {
    pub fn of(players: &[PlayerState]) -> Self {
        let mut counts = [0usize; 3];
        let mut sums = [0i64; 3];
        for p in players {
            let k = p.category.index();
            counts[k] += 1;
            sums[k] += p.capital;
        }
        let n = players.len() as f64;
        let total: i64 = sums.iter().sum();
        let fractions = counts.map(|c| c as f64 / n);
        let mut avg_capital = [None; 3];
        for k in 0..3 {
            if counts[k] > 0 {
                avg_capital[k] = Some(sums[k] as f64 / counts[k] as f64);
            }
        }
        Self {
            fractions,
            avg_capital_all: total as f64 / n,
            avg_capital,
        }
    }

    pub fn fraction(&self, cat: Category) -> f64 {
        self.fractions[cat.index()]
    }

    pub fn avg(&self, cat: Category) -> Option<f64> {
        self.avg_capital[cat.index()]
    }
}

/// Time series of one run. `records[t]` is the state after `t` turns.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub params: Params,
    pub seed: u64,
    pub stream: u64,
    pub adaptive: bool,
    pub records: Vec<TurnRecord>,
    pub final_players: Vec<PlayerState>,
}

impl RunResult {
    pub fn final_record(&self) -> &TurnRecord {
        self.records.last().expect("a run records at least t = 0")
    }

    pub fn series(&self, f: impl Fn(&TurnRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// Average per-turn change of the overall mean capital across the last
    /// `window` turns (at least one).
    pub fn late_capital_slope(&self, window: usize) -> f64 {
        let t = self.records.len() - 1;
        let w = window.clamp(1, t.max(1));
        if t == 0 {
            return 0.0;
        }
        (self.records[t].avg_capital_all - self.records[t - w].avg_capital_all) / w as f64
    }
}

/// Plays `params.turns` turns. With a graph the believeness dynamics run
/// after every turn; without one categories stay fixed.
pub fn simulate(
    params: &Params,
    initial: InitialFractions,
    graph: Option<&SocialGraph>,
    rng: &mut SimRng,
    stream: u64,
) -> Result<RunResult> {
    if let Some(g) = graph {
        if g.n_players() != params.n_players {
            return Err(Error::InvalidParam {
                name: "n_players",
                value: params.n_players.to_string(),
                constraint: "graph and population sizes must match",
            });
        }
    }
    let mut players = initialize_population(params, initial, rng);
    let mut records = Vec::with_capacity(params.turns + 1);
    records.push(TurnRecord::of(&players));
    for _ in 0..params.turns {
        let before: i64 = if cfg!(debug_assertions) {
            players.iter().map(|p| p.capital).sum()
        } else {
            0
        };
        let outcome = step_turn(&mut players, params, rng)?;
        debug_assert_eq!(
            players.iter().map(|p| p.capital).sum::<i64>() - before,
            outcome.capital_change(params)
        );
        if let Some(g) = graph {
            adaptation_step(&mut players, g, params, rng);
        }
        records.push(TurnRecord::of(&players));
    }
    Ok(RunResult {
        params: params.clone(),
        seed: params.seed,
        stream,
        adaptive: graph.is_some(),
        records,
        final_players: players,
    })
}

/// Non-adaptive run on the complete graph.
pub fn run_fixed(
    params: &Params,
    initial: InitialFractions,
    rng: &mut SimRng,
    stream: u64,
) -> Result<RunResult> {
    simulate(params, initial, None, rng, stream)
}

/// Interleaves game turns and adaptation steps on `graph`.
pub fn run_adaptive(
    params: &Params,
    initial: InitialFractions,
    graph: &SocialGraph,
    rng: &mut SimRng,
    stream: u64,
) -> Result<RunResult> {
    simulate(params, initial, Some(graph), rng, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_graph, Topology};
    use crate::rng::rng_stream;

    #[test]
    fn counts_round_and_fill() {
        let f = InitialFractions::new(0.6, 0.0).unwrap();
        assert_eq!(f.counts(1000), (600, 400, 0));
        let f = InitialFractions::new(0.333, 0.333).unwrap();
        assert_eq!(f.counts(10), (3, 4, 3));
        assert!(InitialFractions::new(0.7, 0.4).is_err());
    }

    #[test]
    fn record_lengths_and_empty_categories() {
        let params = Params {
            n_players: 50,
            turns: 7,
            ..Params::default()
        };
        let mut rng = rng_stream(1, 0);
        let r = run_fixed(&params, InitialFractions::taxpayers_only(0.0).unwrap(), &mut rng, 0).unwrap();
        assert_eq!(r.records.len(), 8);
        assert_eq!(r.final_record().avg(Category::Taxpayer), None);
        assert!(r.final_record().avg(Category::Evader).is_some());
    }

    #[test]
    fn all_taxpayers_are_deterministic_in_aggregate() {
        let params = Params::default();
        let mut rng = rng_stream(1, 0);
        let r = run_fixed(&params, InitialFractions::taxpayers_only(1.0).unwrap(), &mut rng, 0).unwrap();
        assert_eq!(r.final_record().avg_capital_all, 100.0);
        assert_eq!(r.final_record().avg(Category::Taxpayer), Some(100.0));
    }

    #[test]
    fn fixed_run_keeps_composition() {
        let params = Params {
            n_players: 200,
            ..Params::default()
        };
        let mut rng = rng_stream(2, 0);
        let r = run_fixed(&params, InitialFractions::new(0.3, 0.2).unwrap(), &mut rng, 0).unwrap();
        for rec in &r.records {
            assert_eq!(rec.fractions, [0.3, 0.5, 0.2]);
        }
    }

    #[test]
    fn adaptation_disabled_keeps_fractions_constant() {
        let params = Params {
            n_players: 300,
            imitation_factor: 0.0,
            capital_factor: 0.0,
            turns: 200,
            ..Params::default()
        };
        let mut rng = rng_stream(3, 0);
        let g = build_graph(300, Topology::SmallWorld, 0.02, &mut rng).unwrap();
        let r = run_adaptive(&params, InitialFractions::taxpayers_only(0.6).unwrap(), &g, &mut rng, 0).unwrap();
        assert!(r.records.iter().all(|rec| rec.fractions == r.records[0].fractions));
    }

    #[test]
    fn zealot_initialisation() {
        let params = Params {
            n_players: 20,
            believeness_init: BelievenessInit::Zealot,
            ..Params::default()
        };
        let pop = initialize_population(&params, InitialFractions::new(0.5, 0.25).unwrap(), &mut rng_stream(0, 0));
        for p in pop {
            let want = if p.category == Category::Mixed { 0.5 } else { 1.0 };
            assert_eq!(p.believeness, want);
        }
    }

    #[test]
    fn upper_half_initialisation() {
        let params = Params::default();
        let pop = initialize_population(&params, InitialFractions::taxpayers_only(0.5).unwrap(), &mut rng_stream(0, 0));
        assert!(pop.iter().all(|p| (0.5..=1.0).contains(&p.believeness)));
    }
}
