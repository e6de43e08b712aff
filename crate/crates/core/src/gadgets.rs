//! Tree-shaped vertex weight gadgets and their effective fields.
//!
//! A gadget is a graph with an output vertex; its effective field is
//! `Z(out = 0) / Z(out = 1)`. For trees this obeys
//! `field(comb(G_1..G_k)) = mu * prod_i h(field(G_i))`, so fields of gadgets
//! with exponentially many vertices are evaluated in time linear in the
//! description.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recursion::{decay_constants, fixed_point_gaps, RecursionParams};
use crate::spin::{FieldedGraph, SpinParams};

/// Vertex cap for [`GadgetTree::materialize`] when emitting gadgets.
pub const DEFAULT_MATERIALIZE_LIMIT: u128 = 1_000_000;

/// Recursive gadget description. Serialized as
/// `{"kind": "star", "w": ..}`, `{"kind": "tree", "d": .., "t": ..}` or
/// `{"kind": "comb", "children": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GadgetTree {
    /// Output vertex with `w` pendant vertices; `Star { w: 0 }` is a single vertex.
    Star { w: u64 },
    /// Complete `d`-ary tree of depth `t` rooted at the output.
    #[serde(rename = "tree")]
    DaryTree { d: u32, t: u32 },
    /// Fresh output vertex joined to the outputs of every child.
    Comb { children: Vec<GadgetTree> },
    /// Child with a prescribed field. Test scaffolding; never serialized.
    #[serde(skip)]
    Leaf { field: f64 },
}

impl GadgetTree {
    pub fn star(w: u64) -> Self {
        GadgetTree::Star { w }
    }

    pub fn tree(d: u32, t: u32) -> Self {
        GadgetTree::DaryTree { d, t }
    }

    pub fn leaf(field: f64) -> Self {
        GadgetTree::Leaf { field }
    }

    /// Joins the outputs of `children` to a new output vertex.
    pub fn comb(children: Vec<GadgetTree>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::domain("comb needs at least one child"));
        }
        Ok(GadgetTree::Comb { children })
    }

    /// Vertex count of the materialized graph, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        match self {
            GadgetTree::Star { w } => *w as u128 + 1,
            GadgetTree::DaryTree { d, t } => dary_tree_size(*d, *t),
            GadgetTree::Comb { children } => children
                .iter()
                .fold(1u128, |acc, c| acc.saturating_add(c.size())),
            GadgetTree::Leaf { .. } => 1,
        }
    }

    /// Natural log of the vertex count, finite even when [`Self::size`] saturates.
    pub fn log_size(&self) -> f64 {
        match self {
            GadgetTree::Star { w } => (*w as f64).ln_1p(),
            GadgetTree::DaryTree { d: 1, t } => (*t as f64).ln_1p(),
            GadgetTree::DaryTree { d, t } => {
                let d = *d as f64;
                // ln((d^(t+1) - 1) / (d - 1))
                (*t as f64 + 1.0) * d.ln() + (-d.powf(-(*t as f64 + 1.0))).ln_1p() - (d - 1.0).ln()
            }
            GadgetTree::Comb { children } => {
                let logs: Vec<f64> = children.iter().map(Self::log_size).collect();
                let top = logs.iter().copied().fold(0.0, f64::max);
                let sum: f64 = (-top).exp() + logs.iter().map(|l| (l - top).exp()).sum::<f64>();
                top + sum.ln()
            }
            GadgetTree::Leaf { .. } => 0.0,
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> u64 {
        match self {
            GadgetTree::Star { w } => u64::from(*w > 0),
            GadgetTree::DaryTree { t, .. } => *t as u64,
            GadgetTree::Comb { children } => 1 + children.iter().map(Self::height).max().unwrap_or(0),
            GadgetTree::Leaf { .. } => 0,
        }
    }

    /// Builds the tree graph: every field `mu`, output at vertex 0.
    pub fn materialize(&self, mu: f64, limit: u128) -> Result<FieldedGraph> {
        let size = self.size();
        if size > limit {
            return Err(Error::capacity(format!(
                "gadget has {size} vertices, above the materialization limit {limit}"
            )));
        }
        let mut g = FieldedGraph::new();
        let root = build(self, mu, &mut g)?;
        g.set_output(Some(root))?;
        Ok(g)
    }
}

fn dary_tree_size(d: u32, t: u32) -> u128 {
    if d == 1 {
        return t as u128 + 1;
    }
    // 1 + d + d^2 + ... + d^t
    let mut total = 0u128;
    let mut layer = 1u128;
    for _ in 0..=t {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(d as u128);
    }
    total
}

fn build(gadget: &GadgetTree, mu: f64, g: &mut FieldedGraph) -> Result<usize> {
    let root = g.add_vertex(g.len().to_string(), mu);
    match gadget {
        GadgetTree::Star { w } => {
            for _ in 0..*w {
                let leaf = g.add_vertex(g.len().to_string(), mu);
                g.add_edge(root, leaf)?;
            }
        }
        GadgetTree::DaryTree { d, t } => {
            if *t > 0 {
                for _ in 0..*d {
                    let child = build(&GadgetTree::DaryTree { d: *d, t: t - 1 }, mu, g)?;
                    g.add_edge(root, child)?;
                }
            }
        }
        GadgetTree::Comb { children } => {
            for c in children {
                let child = build(c, mu, g)?;
                g.add_edge(root, child)?;
            }
        }
        GadgetTree::Leaf { .. } => {
            return Err(Error::domain("a leaf with a prescribed field has no graph"));
        }
    }
    Ok(root)
}

/// `x^n` for a possibly huge exponent.
pub(crate) fn pow_u64(x: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(e) => x.powi(e),
        Err(_) => x.powf(n as f64),
    }
}

/// Memoizing field evaluator; one per parameter set.
#[derive(Clone, Debug)]
pub struct GadgetEvaluator {
    params: SpinParams,
    stars: HashMap<u64, f64>,
    // trees[d][t] = field of the depth-t d-ary tree
    trees: HashMap<u32, Vec<f64>>,
}

impl GadgetEvaluator {
    pub fn new(params: SpinParams) -> Self {
        GadgetEvaluator {
            params,
            stars: HashMap::new(),
            trees: HashMap::new(),
        }
    }

    pub fn params(&self) -> &SpinParams {
        &self.params
    }

    fn h(&self, x: f64) -> f64 {
        crate::recursion::h(x, &self.params)
    }

    /// `mu h(mu)^w`.
    pub fn star_field(&mut self, w: u64) -> f64 {
        if let Some(&v) = self.stars.get(&w) {
            return v;
        }
        let mu = self.params.mu;
        let rate = self.h(mu);
        let v = mu * pow_u64(rate, w);
        self.stars.insert(w, v);
        v
    }

    /// `field(T_t) = mu h(field(T_{t-1}))^d` with `field(T_0) = mu`.
    pub fn tree_field(&mut self, d: u32, t: u32) -> f64 {
        let mu = self.params.mu;
        let params = self.params.clone();
        let row = self.trees.entry(d).or_insert_with(|| vec![mu]);
        while row.len() <= t as usize {
            let prev = *row.last().unwrap();
            row.push(mu * crate::recursion::h(prev, &params).powi(d as i32));
        }
        row[t as usize]
    }

    pub fn field(&mut self, gadget: &GadgetTree) -> f64 {
        match gadget {
            GadgetTree::Star { w } => self.star_field(*w),
            GadgetTree::DaryTree { d, t } => self.tree_field(*d, *t),
            GadgetTree::Leaf { field } => *field,
            GadgetTree::Comb { children } => {
                let mut acc = self.params.mu;
                for c in children {
                    let x = self.field(c);
                    acc *= self.h(x);
                }
                acc
            }
        }
    }
}

/// Effective field of `gadget` under `params`.
pub fn gadget_field(gadget: &GadgetTree, params: &SpinParams) -> f64 {
    GadgetEvaluator::new(params.clone()).field(gadget)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarRow {
    pub w: u64,
    pub field: f64,
    /// `mu beta^w`.
    pub bound: f64,
}

/// `mu(S_w)` for `w = 0..=w_max` with the checks that stars realize 0:
/// strict decrease, and `mu(S_w) < mu beta^w` for `w >= 1` when `beta < 1`.
pub fn star_convergence(params: &SpinParams, w_max: u64) -> Result<Vec<StarRow>> {
    let mut eval = GadgetEvaluator::new(params.clone());
    let rows: Vec<StarRow> = (0..=w_max)
        .map(|w| StarRow {
            w,
            field: eval.star_field(w),
            bound: params.mu * params.beta.powf(w as f64),
        })
        .collect();
    for pair in rows.windows(2) {
        if !(pair[1].field < pair[0].field) {
            return Err(Error::Verification(format!(
                "star fields not strictly decreasing at w = {}",
                pair[1].w
            )));
        }
    }
    if params.beta < 1.0 {
        if let Some(row) = rows.iter().skip(1).find(|r| !(r.field < r.bound)) {
            return Err(Error::Verification(format!(
                "mu(S_{}) = {} is not below mu beta^w = {}",
                row.w, row.field, row.bound
            )));
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeRow {
    pub t: u32,
    pub field: f64,
    /// `ln(mu(T_t) / mu*)`.
    pub log_ratio: f64,
    /// `c^t iota`.
    pub log_bound: f64,
}

/// `mu(T_t)` for `t = 0..=t_max`, checking `1 < mu(T_t)/mu* <= exp(c^t iota)`.
pub fn tree_convergence(rp: &RecursionParams, t_max: u32) -> Result<Vec<TreeRow>> {
    let dc = decay_constants(rp)?;
    let mut eval = GadgetEvaluator::new(rp.params.clone());
    let gaps = fixed_point_gaps(rp, dc.mu_star, t_max as usize + 1);
    let mut rows = Vec::with_capacity(gaps.len());
    for (t, gap) in gaps.into_iter().enumerate() {
        let t = t as u32;
        let row = TreeRow {
            t,
            field: eval.tree_field(rp.d, t),
            log_ratio: (gap / dc.mu_star).ln_1p(),
            log_bound: dc.tree_log_bound(t),
        };
        if !(row.log_ratio > 0.0 && row.log_ratio <= row.log_bound) {
            return Err(Error::Verification(format!(
                "tree depth {t}: ln(mu(T_t)/mu*) = {:e} outside (0, {:e}]",
                row.log_ratio, row.log_bound
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}
