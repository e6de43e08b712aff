use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::reductions::certificate::{Instance, Orientation, ReductionCertificate, Verifiable};
use crate::spin::{FieldedGraph, SpinParams};

/// Repeatedly deletes a degree-one vertex `u` with neighbour `v`, folding it
/// into `v`'s field: `mu_v <- mu_v h(mu_u)`, scale `*= mu_u + gamma`.
///
/// Vertices are removed first-in first-out: the initial degree-one vertices in
/// index order, then vertices in the order they drop to degree one. The result
/// satisfies `Z_in = scale * Z_out` and has no degree-one vertex.
pub fn contract_degree_one<W: Verifiable>(
    graph: &FieldedGraph<W>,
    params: &SpinParams<W>,
) -> Result<ReductionCertificate<W>> {
    let n = graph.len();
    let mut degree = graph.degrees();
    let mut incident = vec![Vec::new(); n];
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        incident[u].push(e);
        if u != v {
            incident[v].push(e);
        }
    }
    let mut edge_alive = vec![true; graph.edges().len()];
    let mut alive = vec![true; n];
    let mut fields = graph.fields().to_vec();
    let mut scale = W::one();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| degree[v] == 1).collect();

    while let Some(u) = queue.pop_front() {
        if !alive[u] || degree[u] != 1 {
            continue;
        }
        let e = *incident[u].iter().find(|&&e| edge_alive[e]).expect("degree-one vertex has an edge");
        let (a, b) = graph.edges()[e];
        let v = if a == u { b } else { a };
        scale = scale * (fields[u].clone() + params.gamma.clone());
        fields[v] = fields[v].clone() * params.h(&fields[u]);
        edge_alive[e] = false;
        alive[u] = false;
        degree[u] = 0;
        degree[v] -= 1;
        if degree[v] == 1 {
            queue.push_back(v);
        }
    }

    let reduced = graph.with_fields(fields).induced(&alive);
    let output = Instance {
        graph: reduced,
        params: params.clone(),
    };
    let input = Instance {
        graph: graph.clone(),
        params: params.clone(),
    };
    Ok(ReductionCertificate::new(input, output, scale, Orientation::InputIsScaledOutput))
}

/// Rewrites a `(beta, gamma)` instance without degree-one vertices as a
/// ferromagnetic Ising instance `(a, a)` with `a = sqrt(beta gamma)`.
///
/// A vertex of degree `d` gets `mu_v (beta / gamma)^(d/2)`; then
/// `Z_in = sqrt(gamma / beta)^|E| Z_out`. Requires `beta < gamma`,
/// `beta gamma > 1`, `params.mu <= gamma / beta` and every field at most
/// `params.mu`; every vertex of degree at least 2 then ends with field at
/// most 1. Isolated vertices keep their fields.
pub fn to_ising<W: Verifiable>(
    graph: &FieldedGraph<W>,
    params: &SpinParams<W>,
) -> Result<ReductionCertificate<W>> {
    let SpinParams { beta, gamma, mu } = params.clone();
    if !(beta < gamma) || !(beta.clone() * gamma.clone() > W::one()) {
        return Err(Error::domain(format!(
            "need beta < gamma and beta gamma > 1, got beta = {beta}, gamma = {gamma}"
        )));
    }
    let ratio = gamma.clone() / beta.clone();
    if !mu.at_most(&ratio) {
        return Err(Error::domain(format!("mu = {mu} exceeds gamma / beta = {ratio}")));
    }
    let s = ratio
        .sqrt()
        .ok_or_else(|| Error::domain("sqrt(gamma / beta) is not representable in this number type"))?;
    let a = beta.clone() * s.clone();

    let degrees = graph.degrees();
    let mut fields = Vec::with_capacity(graph.len());
    for (v, field) in graph.fields().iter().enumerate() {
        if degrees[v] == 1 {
            return Err(Error::domain(format!("vertex {} has degree one", graph.id(v))));
        }
        if !field.at_most(&mu) {
            return Err(Error::domain(format!(
                "vertex {} has field {field} above mu = {mu}",
                graph.id(v)
            )));
        }
        let reduced = field.clone() / s.powi(degrees[v] as i64);
        if degrees[v] >= 2 && !reduced.at_most(&W::one()) {
            return Err(Error::internal(format!(
                "vertex {} ends with Ising field {reduced} > 1",
                graph.id(v)
            )));
        }
        fields.push(reduced);
    }
    let scale = s.powi(graph.edges().len() as i64);
    let input = Instance {
        graph: graph.clone(),
        params: params.clone(),
    };
    let output = Instance {
        graph: graph.with_fields(fields),
        params: SpinParams::new(a.clone(), a, W::one())?,
    };
    Ok(ReductionCertificate::new(input, output, scale, Orientation::InputIsScaledOutput))
}

/// Both stages and their composition `Z_in = scale_1 scale_2 Z_ising`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pipeline<W = f64> {
    pub contraction: ReductionCertificate<W>,
    pub ising: ReductionCertificate<W>,
    pub composed: ReductionCertificate<W>,
}

/// [`contract_degree_one`] followed by [`to_ising`].
pub fn contract_then_ising<W: Verifiable>(graph: &FieldedGraph<W>, params: &SpinParams<W>) -> Result<Pipeline<W>> {
    let contraction = contract_degree_one(graph, params)?;
    let ising = to_ising(&contraction.output.graph, params)?;
    let composed = contraction.then(&ising);
    Ok(Pipeline {
        contraction,
        ising,
        composed,
    })
}
