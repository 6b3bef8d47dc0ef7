//! Believeness dynamics and category switching.
//!
//! Applied once per turn after the game step. All players read the same
//! frozen snapshot of categories, so no one reacts to a same-turn switch.

use rand::Rng;

use crate::network::SocialGraph;
use crate::params::{clamp_unit, Category, ExitBelieveness, Params, PlayerState, UpdateOrder};

/// Category counts over one player's neighbours.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NeighborhoodCensus {
    pub taxpayer_count: usize,
    pub evader_count: usize,
    pub mixed_count: usize,
}

impl NeighborhoodCensus {
    pub fn new(taxpayer_count: usize, evader_count: usize, mixed_count: usize) -> Self {
        Self {
            taxpayer_count,
            evader_count,
            mixed_count,
        }
    }

    pub fn of_categories<'a>(cats: impl IntoIterator<Item = &'a Category>) -> Self {
        let mut c = Self::default();
        for &cat in cats {
            c.add(cat);
        }
        c
    }

    #[inline]
    fn add(&mut self, cat: Category) {
        match cat {
            Category::Taxpayer => self.taxpayer_count += 1,
            Category::Evader => self.evader_count += 1,
            Category::Mixed => self.mixed_count += 1,
        }
    }

    #[inline]
    fn remove(&mut self, cat: Category) {
        match cat {
            Category::Taxpayer => self.taxpayer_count -= 1,
            Category::Evader => self.evader_count -= 1,
            Category::Mixed => self.mixed_count -= 1,
        }
    }

    pub fn total(&self) -> usize {
        self.taxpayer_count + self.evader_count + self.mixed_count
    }

    pub fn count(&self, cat: Category) -> usize {
        match cat {
            Category::Taxpayer => self.taxpayer_count,
            Category::Evader => self.evader_count,
            Category::Mixed => self.mixed_count,
        }
    }

    pub fn same_category_count(&self, cat: Category) -> usize {
        self.count(cat)
    }

    pub fn other_categories_count(&self, cat: Category) -> usize {
        self.total() - self.count(cat)
    }
}

/// Census of `player`'s neighbours in `snapshot`.
///
/// `totals` must be the census of the whole snapshot; it is only consulted
/// on the complete graph.
pub fn census(
    graph: &SocialGraph,
    snapshot: &[Category],
    totals: &NeighborhoodCensus,
    player: usize,
) -> NeighborhoodCensus {
    match graph {
        SocialGraph::FullyConnected { .. } => {
            let mut c = *totals;
            c.remove(snapshot[player]);
            c
        }
        SocialGraph::SmallWorld { adjacency, .. } => {
            NeighborhoodCensus::of_categories(adjacency[player].iter().map(|&j| &snapshot[j]))
        }
    }
}

/// Believeness after the neighbourhood-imitation rule.
pub fn imitation_update(player: &PlayerState, census: &NeighborhoodCensus, params: &Params) -> f64 {
    let step = params.imitation_factor * params.delta_b;
    let b = player.believeness;
    let cat = player.category;
    let outnumbered = census.same_category_count(cat) < census.other_categories_count(cat);
    let next = match cat {
        Category::Taxpayer | Category::Evader => {
            if outnumbered {
                b - step
            } else {
                b + step
            }
        }
        Category::Mixed if outnumbered => {
            if census.evader_count > census.taxpayer_count {
                b - step
            } else {
                b + step
            }
        }
        // mixed majority: drift towards undecided without crossing 0.5
        Category::Mixed => {
            if b > 0.5 {
                (b - step).max(0.5)
            } else {
                (b + step).min(0.5)
            }
        }
    };
    clamp_unit(next)
}

/// Believeness after the negative-capital rule. No-op for capital >= 0.
pub fn capital_factor_update(player: &PlayerState, params: &Params) -> f64 {
    let b = player.believeness;
    if player.capital >= 0 {
        return b;
    }
    let step = params.capital_factor * params.delta_b;
    let next = match player.category {
        Category::Taxpayer | Category::Evader => b - step,
        Category::Mixed if b >= 0.5 => b + step,
        Category::Mixed => b - step,
    };
    clamp_unit(next)
}

/// Category switch triggered by believeness reaching a bound.
///
/// Entering the mixed category always redraws believeness uniformly on
/// `[0, 1]`; leaving it follows `exit`.
pub fn resolve_transition<R: Rng + ?Sized>(
    player: &PlayerState,
    exit: ExitBelieveness,
    rng: &mut R,
) -> PlayerState {
    let b = player.believeness;
    let new_category = match player.category {
        Category::Taxpayer | Category::Evader if b <= 0.0 => Category::Mixed,
        Category::Mixed if b <= 0.0 => Category::Evader,
        Category::Mixed if b >= 1.0 => Category::Taxpayer,
        _ => return *player,
    };
    let believeness = match (new_category, exit) {
        (Category::Mixed, _) | (_, ExitBelieveness::Redraw) => rng.gen::<f64>(),
        (_, ExitBelieveness::Keep) => b,
    };
    PlayerState {
        category: new_category,
        believeness,
        ..*player
    }
}

pub fn adaptation_step<R: Rng + ?Sized>(
    players: &mut [PlayerState],
    graph: &SocialGraph,
    params: &Params,
    rng: &mut R,
) {
    let snapshot: Vec<Category> = players.iter().map(|p| p.category).collect();
    update_believeness(players, &snapshot, graph, params, 0..players.len());
    for p in players.iter_mut() {
        *p = resolve_transition(p, params.exit_believeness, rng);
    }
}

/// [`adaptation_step`] visiting players in `order`. Believeness updates and
/// the resulting categories do not depend on the order; only which player
/// consumes which redraw does.
pub fn adaptation_step_in_order<R: Rng + ?Sized>(
    players: &mut [PlayerState],
    graph: &SocialGraph,
    params: &Params,
    order: &[usize],
    rng: &mut R,
) {
    let snapshot: Vec<Category> = players.iter().map(|p| p.category).collect();
    update_believeness(players, &snapshot, graph, params, order.iter().copied());
    for &i in order {
        players[i] = resolve_transition(&players[i], params.exit_believeness, rng);
    }
}

fn update_believeness(
    players: &mut [PlayerState],
    snapshot: &[Category],
    graph: &SocialGraph,
    params: &Params,
    order: impl Iterator<Item = usize>,
) {
    let totals = NeighborhoodCensus::of_categories(snapshot);
    for i in order {
        let c = census(graph, snapshot, &totals, i);
        let mut p = players[i];
        match params.update_order {
            UpdateOrder::ImitationFirst => {
                p.believeness = imitation_update(&p, &c, params);
                p.believeness = capital_factor_update(&p, params);
            }
            UpdateOrder::CapitalFirst => {
                p.believeness = capital_factor_update(&p, params);
                p.believeness = imitation_update(&p, &c, params);
            }
        }
        players[i] = p;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_graph, Topology};
    use crate::rng::rng_stream;

    const EPS: f64 = 1e-12;
    const REDRAW: ExitBelieveness = ExitBelieveness::Redraw;

    fn player(category: Category, b: f64, capital: i64) -> PlayerState {
        PlayerState {
            category,
            capital,
            believeness: b,
        }
    }

    fn unit_factors() -> Params {
        Params::default()
    }

    #[test]
    fn taxpayer_in_taxpayer_majority_gains() {
        let b = imitation_update(
            &player(Category::Taxpayer, 0.7, 0),
            &NeighborhoodCensus::new(3, 1, 0),
            &unit_factors(),
        );
        assert!((b - 0.71).abs() < EPS);
    }

    #[test]
    fn tie_counts_as_increase_for_pure_categories() {
        let b = imitation_update(
            &player(Category::Evader, 0.7, 0),
            &NeighborhoodCensus::new(1, 2, 1),
            &unit_factors(),
        );
        assert!((b - 0.71).abs() < EPS);
    }

    #[test]
    fn outnumbered_evader_loses_and_is_clamped() {
        let b = imitation_update(
            &player(Category::Evader, 0.005, 0),
            &NeighborhoodCensus::new(3, 1, 0),
            &unit_factors(),
        );
        assert_eq!(b, 0.0);
        let b = imitation_update(
            &player(Category::Taxpayer, 0.995, 0),
            &NeighborhoodCensus::new(4, 0, 0),
            &unit_factors(),
        );
        assert_eq!(b, 1.0);
    }

    #[test]
    fn undecided_mixed_stays_undecided() {
        let b = imitation_update(
            &player(Category::Mixed, 0.5, 0),
            &NeighborhoodCensus::new(1, 0, 3),
            &unit_factors(),
        );
        assert_eq!(b, 0.5);
    }

    #[test]
    fn mixed_majority_pulls_towards_half_without_overshoot() {
        let params = Params {
            imitation_factor: 3.0,
            ..Params::default()
        };
        let c = NeighborhoodCensus::new(1, 1, 2);
        let up = imitation_update(&player(Category::Mixed, 0.49, 0), &c, &params);
        let down = imitation_update(&player(Category::Mixed, 0.8, 0), &c, &params);
        assert_eq!(up, 0.5);
        assert!((down - 0.77).abs() < EPS);
    }

    #[test]
    fn outnumbered_mixed_follows_evaders() {
        let b = imitation_update(
            &player(Category::Mixed, 0.3, 0),
            &NeighborhoodCensus::new(1, 2, 1),
            &unit_factors(),
        );
        assert!((b - 0.29).abs() < EPS);
    }

    #[test]
    fn outnumbered_mixed_with_balanced_others_increases() {
        let b = imitation_update(
            &player(Category::Mixed, 0.3, 0),
            &NeighborhoodCensus::new(2, 2, 0),
            &unit_factors(),
        );
        assert!((b - 0.31).abs() < EPS);
    }

    #[test]
    fn capital_factor_only_below_zero() {
        let params = unit_factors();
        let b = capital_factor_update(&player(Category::Evader, 0.40, -5), &params);
        assert!((b - 0.39).abs() < EPS);
        for cat in Category::ALL {
            assert_eq!(capital_factor_update(&player(cat, 0.4, 0), &params), 0.4);
            assert_eq!(capital_factor_update(&player(cat, 0.4, 12), &params), 0.4);
        }
    }

    #[test]
    fn capital_factor_pushes_mixed_away_from_half() {
        let params = Params {
            capital_factor: 2.0,
            ..Params::default()
        };
        let up = capital_factor_update(&player(Category::Mixed, 0.50, -1), &params);
        let down = capital_factor_update(&player(Category::Mixed, 0.30, -1), &params);
        assert!((up - 0.52).abs() < EPS);
        assert!((down - 0.28).abs() < EPS);
    }

    #[test]
    fn transitions() {
        let mut rng = rng_stream(4, 0);
        let t = resolve_transition(&player(Category::Taxpayer, 0.0, 3), REDRAW, &mut rng);
        assert_eq!(t.category, Category::Mixed);
        assert!((0.0..=1.0).contains(&t.believeness));
        assert_eq!(t.capital, 3);

        let e = resolve_transition(&player(Category::Evader, 0.0, 0), REDRAW, &mut rng);
        assert_eq!(e.category, Category::Mixed);

        let m = player(Category::Mixed, 0.7, 0);
        assert_eq!(resolve_transition(&m, REDRAW, &mut rng), m);

        let up = resolve_transition(&player(Category::Mixed, 1.0, 0), REDRAW, &mut rng);
        assert_eq!(up.category, Category::Taxpayer);
        let down = resolve_transition(&player(Category::Mixed, 0.0, 0), REDRAW, &mut rng);
        assert_eq!(down.category, Category::Evader);

        let kept = resolve_transition(&player(Category::Mixed, 1.0, 0), ExitBelieveness::Keep, &mut rng);
        assert_eq!((kept.category, kept.believeness), (Category::Taxpayer, 1.0));
        let kept = resolve_transition(&player(Category::Mixed, 0.0, 0), ExitBelieveness::Keep, &mut rng);
        assert_eq!((kept.category, kept.believeness), (Category::Evader, 0.0));

        let zealot = player(Category::Taxpayer, 1.0, 0);
        assert_eq!(resolve_transition(&zealot, REDRAW, &mut rng), zealot);
    }

    #[test]
    fn census_on_ring_and_complete_graph() {
        let mut rng = rng_stream(0, 0);
        let ring = build_graph(6, Topology::SmallWorld, 0.0, &mut rng).unwrap();
        use Category::*;
        let snap = [Taxpayer, Evader, Mixed, Taxpayer, Evader, Mixed];
        let totals = NeighborhoodCensus::of_categories(&snap);
        // neighbours of 0 are 1, 2, 4, 5
        assert_eq!(census(&ring, &snap, &totals, 0), NeighborhoodCensus::new(0, 2, 2));

        let full = build_graph(6, Topology::FullyConnected, 0.0, &mut rng).unwrap();
        assert_eq!(census(&full, &snap, &totals, 0), NeighborhoodCensus::new(1, 2, 2));
        let c = census(&full, &snap, &totals, 3);
        assert_eq!(c.same_category_count(Taxpayer) + c.other_categories_count(Taxpayer), 5);
    }

    #[test]
    fn zero_factors_freeze_everything() {
        let params = Params {
            imitation_factor: 0.0,
            capital_factor: 0.0,
            ..Params::default()
        };
        let mut rng = rng_stream(8, 0);
        let graph = build_graph(50, Topology::SmallWorld, 0.1, &mut rng).unwrap();
        let mut players: Vec<PlayerState> = (0..50)
            .map(|i| player(Category::ALL[i % 3], 0.2 + 0.01 * i as f64, -(i as i64)))
            .collect();
        let before = players.clone();
        for _ in 0..20 {
            adaptation_step(&mut players, &graph, &params, &mut rng);
        }
        assert_eq!(players, before);
    }

    #[test]
    fn synchronous_update_ignores_visit_order() {
        let params = Params {
            imitation_factor: 7.0,
            capital_factor: 5.0,
            ..Params::default()
        };
        let mut rng = rng_stream(11, 0);
        let graph = build_graph(60, Topology::SmallWorld, 0.2, &mut rng).unwrap();
        let players: Vec<PlayerState> = (0..60)
            .map(|i| player(Category::ALL[(i * 7) % 3], (i % 10) as f64 / 10.0, 5 - (i as i64 % 11)))
            .collect();

        let mut forward = players.clone();
        adaptation_step(&mut forward, &graph, &params, &mut rng_stream(1, 0));
        let order: Vec<usize> = (0..60).rev().collect();
        let mut backward = players.clone();
        adaptation_step_in_order(&mut backward, &graph, &params, &order, &mut rng_stream(1, 0));

        let mut switched = 0;
        for ((f, b), orig) in forward.iter().zip(&backward).zip(&players) {
            assert_eq!(f.category, b.category);
            if f.category == orig.category {
                assert_eq!(f.believeness, b.believeness);
            } else {
                switched += 1;
            }
        }
        assert!(switched > 0);
    }
}
