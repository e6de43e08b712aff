//! Seeded random instances for verification sweeps.
//!
//! All generators take a caller-owned RNG; [`rng`] builds the ChaCha8 stream
//! used throughout, so a seed fixes every instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gadgets::GadgetTree;
use crate::spin::FieldedGraph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vertex count and edge list of a multigraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphShape {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphShape {
    pub fn with_field<W: Clone>(&self, field: W) -> Result<FieldedGraph<W>> {
        FieldedGraph::uniform(self.n, &self.edges, field)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }
}

/// Graph on `1..=max_n` vertices. Each pair is joined with a random density,
/// occasionally twice; self-loops appear with small probability. No vertex
/// exceeds `max_degree`.
pub fn random_graph<R: Rng>(rng: &mut R, max_n: usize, max_degree: usize) -> GraphShape {
    let n = rng.random_range(1..=max_n);
    let density = rng.random_range(0.15..0.6);
    let mut deg = vec![0; n];
    let mut edges = Vec::new();
    for u in 0..n {
        if deg[u] + 2 <= max_degree && rng.random_bool(0.05) {
            edges.push((u, u));
            deg[u] += 2;
        }
        for v in u + 1..n {
            let copies = if rng.random_bool(density) { 1 + rng.random_bool(0.1) as usize } else { 0 };
            for _ in 0..copies {
                if deg[u] < max_degree && deg[v] < max_degree {
                    edges.push((u, v));
                    deg[u] += 1;
                    deg[v] += 1;
                }
            }
        }
    }
    GraphShape { n, edges }
}

/// Bipartite multigraph on `2..=max_n` vertices with both sides non-empty,
/// and its side labels (`true` = left).
pub fn random_bipartite<R: Rng>(rng: &mut R, max_n: usize, max_degree: usize) -> (GraphShape, Vec<bool>) {
    let n = rng.random_range(2..=max_n.max(2));
    let mut left: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    left[0] = true;
    left[n - 1] = false;
    let density = rng.random_range(0.2..0.7);
    let mut deg = vec![0; n];
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if left[u] != left[v] && deg[u] < max_degree && deg[v] < max_degree && rng.random_bool(density) {
                edges.push((u, v));
                deg[u] += 1;
                deg[v] += 1;
            }
        }
    }
    (GraphShape { n, edges }, left)
}

/// Graph on `3..=max_n` vertices with minimum degree at least 2: a
/// Hamiltonian cycle plus random chords.
pub fn random_min_degree_two<R: Rng>(rng: &mut R, max_n: usize) -> GraphShape {
    let n = rng.random_range(3..=max_n.max(3));
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let chords = rng.random_range(0..=n);
    for _ in 0..chords {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        edges.push((u, v));
    }
    GraphShape { n, edges }
}

/// Gadget tree whose materialized graph has at most `max_size` vertices.
pub fn random_gadget<R: Rng>(rng: &mut R, max_size: u64) -> GadgetTree {
    let budget = rng.random_range(1..=max_size.max(1));
    gadget_within(rng, budget)
}

fn gadget_within<R: Rng>(rng: &mut R, budget: u64) -> GadgetTree {
    if budget <= 1 {
        return GadgetTree::star(0);
    }
    match rng.random_range(0..3) {
        0 => GadgetTree::star(rng.random_range(0..budget)),
        1 => {
            let d = rng.random_range(1..=3u32);
            let mut t = 0;
            while GadgetTree::tree(d, t + 1).size() <= budget as u128 && rng.random_bool(0.7) {
                t += 1;
            }
            GadgetTree::tree(d, t)
        }
        _ => {
            let mut left = budget - 1;
            let mut children = Vec::new();
            while left > 0 && (children.is_empty() || rng.random_bool(0.6)) {
                let share = rng.random_range(1..=left);
                let child = gadget_within(rng, share);
                left -= child.size() as u64;
                children.push(child);
            }
            GadgetTree::comb(children).expect("at least one child")
        }
    }
}
