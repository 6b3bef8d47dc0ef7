//! One synchronous turn of the base game.
//!
//! Every player first receives the external gain, then plays in ascending
//! index order: taxpayers play game A, evaders game B, mixed players toss a
//! fair coin between the two.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::params::{Category, Params, PlayerState};

/// Bookkeeping for one turn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TurnOutcome {
    /// Game-B plays that were audited, mixed players included.
    pub caught_evaders: u64,
    pub game_a_plays: u64,
    pub total_donated: i64,
    pub total_gain: i64,
}

impl TurnOutcome {
    /// Change of the population's total capital implied by this turn.
    pub fn capital_change(&self, params: &Params) -> i64 {
        self.total_gain - params.penalty_h as i64 * self.caught_evaders as i64
    }
}

pub fn apply_gain(players: &mut [PlayerState], params: &Params) {
    let g = params.gain_g as i64;
    for p in players.iter_mut() {
        p.capital += g;
    }
}

const STACK_RECIPIENTS: usize = 16;

/// Game A: the donor gives one unit to each of `tax_d` distinct other players.
pub fn play_game_a<R: Rng + ?Sized>(
    donor: usize,
    players: &mut [PlayerState],
    params: &Params,
    rng: &mut R,
) -> Result<()> {
    let n = players.len();
    let d = params.tax_d as usize;
    if donor >= n {
        return Err(Error::IndexOutOfRange {
            index: donor,
            n_players: n,
        });
    }
    let others = n - 1;
    if others < d {
        return Err(Error::PopulationTooSmall {
            n_players: n,
            reason: "game A needs tax_d distinct recipients besides the donor",
        });
    }

    players[donor].capital -= d as i64;
    // Draw from 0..n-1 and skip over the donor's own slot.
    let shift = |r: usize| if r >= donor { r + 1 } else { r };

    if d <= STACK_RECIPIENTS && 2 * d <= others {
        let mut chosen = [0usize; STACK_RECIPIENTS];
        let mut k = 0;
        while k < d {
            let r = rng.gen_range(0..others);
            if !chosen[..k].contains(&r) {
                chosen[k] = r;
                k += 1;
            }
        }
        for &r in &chosen[..d] {
            players[shift(r)].capital += 1;
        }
    } else {
        for r in index::sample(rng, others, d).into_iter() {
            players[shift(r)].capital += 1;
        }
    }
    Ok(())
}

/// Game B: with probability `audit_p` the player loses `penalty_h` units,
/// which vanish. Returns whether the player was audited.
pub fn play_game_b<R: Rng + ?Sized>(
    index: usize,
    players: &mut [PlayerState],
    params: &Params,
    rng: &mut R,
) -> bool {
    let caught = rng.gen_bool(params.audit_p);
    if caught {
        players[index].capital -= params.penalty_h as i64;
    }
    caught
}

pub fn step_turn<R: Rng + ?Sized>(
    players: &mut [PlayerState],
    params: &Params,
    rng: &mut R,
) -> Result<TurnOutcome> {
    apply_gain(players, params);
    let mut outcome = TurnOutcome {
        total_gain: params.gain_g as i64 * players.len() as i64,
        ..TurnOutcome::default()
    };
    for i in 0..players.len() {
        let plays_a = match players[i].category {
            Category::Taxpayer => true,
            Category::Evader => false,
            Category::Mixed => rng.gen_bool(0.5),
        };
        if plays_a {
            play_game_a(i, players, params, rng)?;
            outcome.game_a_plays += 1;
        } else if play_game_b(i, players, params, rng) {
            outcome.caught_evaders += 1;
        }
    }
    outcome.total_donated = params.tax_d as i64 * outcome.game_a_plays as i64;
    Ok(outcome)
}
