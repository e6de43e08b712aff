use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::reductions::certificate::{Instance, Orientation, ReductionCertificate, Verifiable};
use crate::spin::{FieldedGraph, SpinParams};

/// Sides of a proper 2-colouring; `true` marks the left part. The first vertex
/// of every component goes left. Self-loops and odd cycles are domain errors.
pub fn two_coloring<W: Clone>(g: &FieldedGraph<W>) -> Result<Vec<bool>> {
    let n = g.len();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in g.edges() {
        if u == v {
            return Err(Error::domain(format!("self-loop at {} breaks bipartiteness", g.id(u))));
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut side: Vec<Option<bool>> = vec![None; n];
    for start in 0..n {
        if side[start].is_some() {
            continue;
        }
        side[start] = Some(true);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let s = side[u].unwrap();
            for &v in &adj[u] {
                match side[v] {
                    None => {
                        side[v] = Some(!s);
                        queue.push_back(v);
                    }
                    Some(t) if t == s => {
                        return Err(Error::domain(format!(
                            "edge ({}, {}) joins two vertices on the same side",
                            g.id(u),
                            g.id(v)
                        )));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(side.into_iter().map(Option::unwrap).collect())
}

/// Re-expresses a bipartite anti-ferromagnetic Ising instance as a
/// ferromagnetic `(beta, gamma)` instance on the same graph.
///
/// The input instance has edge weights `b = 1 / sqrt(beta gamma)` on both
/// diagonal entries and every field equal to `target.mu` (the fields of
/// `graph` are ignored). With `s = sqrt(gamma / beta)` the output gives a left
/// vertex of degree `d` the field `mu s^d` and a right vertex `s^d / mu`, and
/// `Z_out = mu^-|R| gamma^|E| Z_in`.
pub fn bipartite_transform<W: Verifiable>(
    graph: &FieldedGraph<W>,
    left: &[bool],
    target: &SpinParams<W>,
) -> Result<ReductionCertificate<W>> {
    let SpinParams { beta, gamma, mu } = target.clone();
    if left.len() != graph.len() {
        return Err(Error::domain(format!(
            "side labels cover {} of {} vertices",
            left.len(),
            graph.len()
        )));
    }
    if !(beta < gamma) || !(beta.clone() * gamma.clone() > W::one()) {
        return Err(Error::domain(format!(
            "need beta < gamma and beta gamma > 1, got beta = {beta}, gamma = {gamma}"
        )));
    }
    if !(mu > W::one()) {
        return Err(Error::domain(format!("anti-ferromagnetic field must exceed 1, got {mu}")));
    }
    for &(u, v) in graph.edges() {
        if left[u] == left[v] {
            return Err(Error::domain(format!(
                "edge ({}, {}) does not cross the bipartition",
                graph.id(u),
                graph.id(v)
            )));
        }
    }
    let s = (gamma.clone() / beta.clone())
        .sqrt()
        .ok_or_else(|| Error::domain("sqrt(gamma / beta) is not representable in this number type"))?;
    let b = W::one() / (beta.clone() * s.clone());

    let degrees = graph.degrees();
    let fields: Vec<W> = (0..graph.len())
        .map(|v| {
            let boost = s.powi(degrees[v] as i64);
            if left[v] {
                mu.clone() * boost
            } else {
                boost / mu.clone()
            }
        })
        .collect();
    let right = left.iter().filter(|&&l| !l).count() as i64;
    let scale = mu.powi(-right) * gamma.powi(graph.edges().len() as i64);

    let input = Instance {
        graph: graph.with_fields(vec![mu.clone(); graph.len()]),
        params: SpinParams::new(b.clone(), b, mu.clone())?,
    };
    let output = Instance {
        graph: graph.with_fields(fields),
        params: target.clone(),
    };
    Ok(ReductionCertificate::new(input, output, scale, Orientation::OutputIsScaledInput))
}
