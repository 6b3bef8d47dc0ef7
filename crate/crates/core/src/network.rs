//! Imitation topology: complete graph or Watts–Strogatz small world.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Short-range ties on each side of a node in the ring lattice.
const RING_HALF_DEGREE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    FullyConnected,
    SmallWorld,
}

impl Topology {
    pub fn as_str(self) -> &'static str {
        match self {
            Topology::FullyConnected => "fully-connected",
            Topology::SmallWorld => "small-world",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fully-connected" => Ok(Topology::FullyConnected),
            "small-world" => Ok(Topology::SmallWorld),
            _ => Err(format!(
                "expected fully-connected or small-world; got `{s}`"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SocialGraph {
    /// Everybody is everybody's neighbour. No adjacency is stored.
    FullyConnected { n_players: usize },
    SmallWorld {
        /// Sorted, duplicate-free, symmetric adjacency lists.
        adjacency: Vec<Vec<usize>>,
        /// Ring edges whose far endpoint was replaced.
        rewired_edges: usize,
    },
}

pub fn build_graph<R: Rng + ?Sized>(
    n_players: usize,
    topology: Topology,
    rewire_r: f64,
    rng: &mut R,
) -> Result<SocialGraph> {
    match topology {
        Topology::FullyConnected => Ok(SocialGraph::FullyConnected { n_players }),
        Topology::SmallWorld => build_small_world(n_players, rewire_r, rng),
    }
}

fn build_small_world<R: Rng + ?Sized>(
    n: usize,
    rewire_r: f64,
    rng: &mut R,
) -> Result<SocialGraph> {
    if n < 2 * RING_HALF_DEGREE + 1 {
        return Err(Error::PopulationTooSmall {
            n_players: n,
            reason: "the k=4 ring lattice needs at least 5 nodes",
        });
    }
    if !(0.0..=1.0).contains(&rewire_r) {
        return Err(Error::InvalidParam {
            name: "rewire_r",
            value: rewire_r.to_string(),
            constraint: "0<=r<=1",
        });
    }

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::with_capacity(2 * RING_HALF_DEGREE); n];
    for u in 0..n {
        for offset in 1..=RING_HALF_DEGREE {
            let v = (u + offset) % n;
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }

    // Visit every ring edge once, in a fixed order, and with probability r
    // move its far endpoint to a random node not yet tied to u.
    let mut rewired_edges = 0;
    for offset in 1..=RING_HALF_DEGREE {
        for u in 0..n {
            let v = (u + offset) % n;
            if !rng.gen_bool(rewire_r) {
                continue;
            }
            // the edge may already be gone if v rewired it away
            if !adjacency[u].contains(&v) || adjacency[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.gen_range(0..n);
                if w != u && !adjacency[u].contains(&w) {
                    break w;
                }
            };
            remove_edge(&mut adjacency, u, v);
            adjacency[u].push(w);
            adjacency[w].push(u);
            rewired_edges += 1;
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    Ok(SocialGraph::SmallWorld {
        adjacency,
        rewired_edges,
    })
}

fn remove_edge(adjacency: &mut [Vec<usize>], u: usize, v: usize) {
    adjacency[u].retain(|&x| x != v);
    adjacency[v].retain(|&x| x != u);
}

impl SocialGraph {
    pub fn n_players(&self) -> usize {
        match self {
            SocialGraph::FullyConnected { n_players } => *n_players,
            SocialGraph::SmallWorld { adjacency, .. } => adjacency.len(),
        }
    }

    pub fn topology(&self) -> Topology {
        match self {
            SocialGraph::FullyConnected { .. } => Topology::FullyConnected,
            SocialGraph::SmallWorld { .. } => Topology::SmallWorld,
        }
    }

    /// Neighbours of `player` in ascending order.
    pub fn neighbors(&self, player: usize) -> Result<Vec<usize>> {
        let n = self.n_players();
        if player >= n {
            return Err(Error::IndexOutOfRange {
                index: player,
                n_players: n,
            });
        }
        Ok(match self {
            SocialGraph::FullyConnected { .. } => (0..n).filter(|&j| j != player).collect(),
            SocialGraph::SmallWorld { adjacency, .. } => adjacency[player].clone(),
        })
    }

    pub fn degree(&self, player: usize) -> usize {
        match self {
            SocialGraph::FullyConnected { n_players } => n_players.saturating_sub(1),
            SocialGraph::SmallWorld { adjacency, .. } => adjacency[player].len(),
        }
    }

    pub fn edge_count(&self) -> usize {
        match self {
            SocialGraph::FullyConnected { n_players } => n_players * n_players.saturating_sub(1) / 2,
            SocialGraph::SmallWorld { adjacency, .. } => {
                adjacency.iter().map(Vec::len).sum::<usize>() / 2
            }
        }
    }

    /// Undirected edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_players();
        match self {
            SocialGraph::FullyConnected { .. } => (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect(),
            SocialGraph::SmallWorld { adjacency, .. } => adjacency
                .iter()
                .enumerate()
                .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
                .collect(),
        }
    }

    /// One `u v` pair per line.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    /// Average local clustering coefficient. Nodes of degree < 2 count as 0.
    pub fn average_clustering(&self) -> f64 {
        let n = self.n_players();
        match self {
            SocialGraph::FullyConnected { .. } => {
                if n >= 3 {
                    1.0
                } else {
                    0.0
                }
            }
            SocialGraph::SmallWorld { adjacency, .. } => {
                let mut sum = 0.0;
                for list in adjacency {
                    let k = list.len();
                    if k < 2 {
                        continue;
                    }
                    let mut links = 0usize;
                    for (i, &a) in list.iter().enumerate() {
                        for &b in &list[i + 1..] {
                            if adjacency[a].binary_search(&b).is_ok() {
                                links += 1;
                            }
                        }
                    }
                    sum += 2.0 * links as f64 / (k * (k - 1)) as f64;
                }
                sum / n as f64
            }
        }
    }

    /// Mean BFS distance over all connected ordered pairs.
    pub fn mean_shortest_path(&self) -> f64 {
        let n = self.n_players();
        let adjacency = match self {
            SocialGraph::FullyConnected { .. } => return if n >= 2 { 1.0 } else { 0.0 },
            SocialGraph::SmallWorld { adjacency, .. } => adjacency,
        };
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::with_capacity(n);
        let (mut total, mut pairs) = (0u64, 0u64);
        for source in 0..n {
            dist.fill(usize::MAX);
            dist[source] = 0;
            queue.push_back(source);
            while let Some(u) = queue.pop_front() {
                for &v in &adjacency[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        total += dist[v] as u64;
                        pairs += 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        if pairs == 0 {
            0.0
        } else {
            total as f64 / pairs as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    fn ring(n: usize) -> SocialGraph {
        build_graph(n, Topology::SmallWorld, 0.0, &mut rng_stream(0, 0)).unwrap()
    }

    #[test]
    fn ring_neighbours() {
        let g = ring(10);
        assert_eq!(g.neighbors(0).unwrap(), vec![1, 2, 8, 9]);
        assert!((0..10).all(|i| g.degree(i) == 4));
        assert_eq!(g.edge_count(), 20);
    }

    #[test]
    fn complete_graph_neighbours() {
        let g = build_graph(4, Topology::FullyConnected, 0.0, &mut rng_stream(0, 0)).unwrap();
        assert_eq!(g.neighbors(2).unwrap(), vec![0, 1, 3]);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.edges().len(), 6);
    }

    #[test]
    fn out_of_range_index() {
        assert!(matches!(
            ring(10).neighbors(10),
            Err(Error::IndexOutOfRange { index: 10, .. })
        ));
    }

    #[test]
    fn small_world_needs_five_nodes() {
        let err = build_graph(4, Topology::SmallWorld, 0.0, &mut rng_stream(0, 0));
        assert!(matches!(err, Err(Error::PopulationTooSmall { n_players: 4, .. })));
        assert!(build_graph(5, Topology::SmallWorld, 1.0, &mut rng_stream(0, 0)).is_ok());
    }

    #[test]
    fn full_rewiring_keeps_edge_count() {
        for seed in 0..5 {
            let g = build_graph(200, Topology::SmallWorld, 1.0, &mut rng_stream(seed, 0)).unwrap();
            assert_eq!(g.edge_count(), 400);
            let degrees: Vec<usize> = (0..200).map(|i| g.degree(i)).collect();
            assert!(degrees.iter().any(|&k| k != 4));
            let mean = degrees.iter().sum::<usize>() as f64 / 200.0;
            assert_eq!(mean, 4.0);
        }
    }

    #[test]
    fn ring_clustering_and_path_length() {
        let g = ring(100);
        // k=4 ring lattice: C = 3(k-2)/(4(k-1)) = 0.5
        assert!((g.average_clustering() - 0.5).abs() < 1e-12);
        // distances 1..=25 from each node, each twice except the antipode layer
        let l = g.mean_shortest_path();
        let brute: f64 = (1..100usize)
            .map(|j| {
                let ring_dist = j.min(100 - j);
                ring_dist.div_ceil(2) as f64
            })
            .sum::<f64>()
            / 99.0;
        assert!((l - brute).abs() < 1e-12, "{l} vs {brute}");
    }

    #[test]
    fn edge_list_format() {
        let mut buf = Vec::new();
        ring(5).write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert_eq!(text.lines().next(), Some("0 1"));
    }
}
