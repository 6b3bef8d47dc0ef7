#![allow(dead_code)]

use taxsim::{Category, PlayerState, SocialGraph, TurnRecord};

/// Every believeness value lies in [0, 1].
pub fn believeness_in_bounds(players: &[PlayerState]) -> Result<(), String> {
    match players
        .iter()
        .position(|p| !(0.0..=1.0).contains(&p.believeness))
    {
        Some(i) => Err(format!("player {i} has B = {}", players[i].believeness)),
        None => Ok(()),
    }
}

/// Undirected, loop-free and, for the small world, of total degree 4N.
pub fn graph_invariants(graph: &SocialGraph) -> Result<(), String> {
    let n = graph.n_players();
    let mut degree_sum = 0;
    for u in 0..n {
        let nb = graph.neighbors(u).map_err(|e| e.to_string())?;
        if nb.contains(&u) {
            return Err(format!("self-loop at {u}"));
        }
        if nb.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("neighbours of {u} not sorted or duplicated"));
        }
        for &v in &nb {
            if !graph.neighbors(v).map_err(|e| e.to_string())?.contains(&u) {
                return Err(format!("edge {u}-{v} is one-sided"));
            }
        }
        degree_sum += nb.len();
    }
    let expected = match graph {
        SocialGraph::FullyConnected { .. } => n * (n - 1),
        SocialGraph::SmallWorld { .. } => 4 * n,
    };
    if degree_sum != expected {
        return Err(format!("degree sum {degree_sum}, expected {expected}"));
    }
    Ok(())
}

/// Category fractions sum to one and match the population counts.
pub fn fractions_normalized(record: &TurnRecord, players: &[PlayerState]) -> Result<(), String> {
    let sum: f64 = record.fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(format!("fractions sum to {sum}"));
    }
    let n = players.len() as f64;
    for c in Category::ALL {
        let count = players.iter().filter(|p| p.category == c).count() as f64;
        if (record.fraction(c) - count / n).abs() > 1e-12 {
            return Err(format!("{c} fraction {} but count {count}", record.fraction(c)));
        }
    }
    Ok(())
}

pub fn total_capital(players: &[PlayerState]) -> i64 {
    players.iter().map(|p| p.capital).sum()
}
