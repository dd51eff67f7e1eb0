//! Maximum-weight common independent sets of two partition matroids, as a
//! bipartite b-matching solved by successive longest augmenting paths.

use super::set::ElementSet;
use crate::scalar::Scalar;

pub(super) struct TwoPartitions<'a> {
    pub left_of: &'a [usize],
    pub left_caps: &'a [usize],
    pub right_of: &'a [usize],
    pub right_caps: &'a [usize],
}

struct Edge<T> {
    to: usize,
    cap: usize,
    gain: T,
}

struct Network<T> {
    edges: Vec<Edge<T>>,
    adj: Vec<Vec<usize>>,
}

impl<T: Scalar> Network<T> {
    fn new(nodes: usize) -> Self {
        Network {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: usize, gain: T) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge {
            to,
            cap,
            gain: gain.clone(),
        });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge {
            to: from,
            cap: 0,
            gain: -gain,
        });
    }

    /// Longest source-to-sink path in the residual graph (Bellman-Ford).
    fn longest_path(&self, source: usize, sink: usize) -> Option<(T, Vec<usize>)> {
        let n = self.adj.len();
        let mut dist: Vec<Option<T>> = vec![None; n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        dist[source] = Some(T::zero());
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                let Some(du) = dist[u].clone() else { continue };
                for &id in &self.adj[u] {
                    let e = &self.edges[id];
                    if e.cap == 0 {
                        continue;
                    }
                    let cand = du.clone() + e.gain.clone();
                    let better = match &dist[e.to] {
                        None => true,
                        Some(dv) => cand.definitely_gt(dv),
                    };
                    if better {
                        dist[e.to] = Some(cand);
                        via[e.to] = Some(id);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let total = dist[sink].clone()?;
        let mut path = Vec::new();
        let mut v = sink;
        while v != source {
            let id = via[v]?;
            path.push(id);
            v = self.edges[id ^ 1].to;
            if path.len() > self.edges.len() {
                return None;
            }
        }
        Some((total, path))
    }
}

/// `best[k]` is the largest total weight of a common independent set of
/// size `k` inside `allowed`, for every attainable `k`.
pub(super) fn best_by_cardinality<T: Scalar>(
    parts: &TwoPartitions<'_>,
    weights: &[T],
    allowed: ElementSet,
) -> Vec<T> {
    let nl = parts.left_caps.len();
    let nr = parts.right_caps.len();
    let source = 0;
    let sink = 1 + nl + nr;
    let mut net = Network::new(sink + 1);
    for (b, &cap) in parts.left_caps.iter().enumerate() {
        net.add(source, 1 + b, cap, T::zero());
    }
    for (b, &cap) in parts.right_caps.iter().enumerate() {
        net.add(1 + nl + b, sink, cap, T::zero());
    }
    for e in allowed.iter() {
        net.add(
            1 + parts.left_of[e],
            1 + nl + parts.right_of[e],
            1,
            weights[e].clone(),
        );
    }
    let mut best = vec![T::zero()];
    while let Some((gain, path)) = net.longest_path(source, sink) {
        for id in path {
            net.edges[id].cap -= 1;
            net.edges[id ^ 1].cap += 1;
        }
        let next = best.last().unwrap().clone() + gain;
        best.push(next);
    }
    best
}
