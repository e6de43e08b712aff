//! Graph model and exhaustive partition-function evaluation.
//!
//! Everything else in the crate is checked against the enumerator in this
//! module, so it is deliberately simple: a depth-first walk over all `2^n`
//! spin configurations with a fixed visiting order.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{LogWeight, Scalar, Weight};

/// Default cap on the number of vertices enumerated exhaustively.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

/// Spin of a single vertex. `Zero` carries the external field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Zero,
    One,
}

/// Sign class of `beta * gamma - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Ferromagnetic,
    Antiferromagnetic,
    Degenerate,
}

/// Edge interaction `[[beta, 1], [1, gamma]]` and uniform field `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinParams<W = f64> {
    pub beta: W,
    pub gamma: W,
    pub mu: W,
}

impl<W: Scalar> SpinParams<W> {
    pub fn new(beta: W, gamma: W, mu: W) -> Result<Self> {
        if !(beta >= W::zero()) || !(gamma >= W::zero()) {
            return Err(Error::domain(format!(
                "edge weights must be non-negative, got beta = {beta:?}, gamma = {gamma:?}"
            )));
        }
        if !mu.is_positive() {
            return Err(Error::domain(format!("external field must be positive, got {mu:?}")));
        }
        Ok(SpinParams { beta, gamma, mu })
    }

    pub fn interaction(&self) -> Interaction {
        let prod = self.beta.clone() * self.gamma.clone();
        let one = W::one();
        if prod > one {
            Interaction::Ferromagnetic
        } else if prod < one {
            Interaction::Antiferromagnetic
        } else {
            Interaction::Degenerate
        }
    }

    /// `h(x) = (beta*x + 1) / (x + gamma)`: the factor a pendant subtree with
    /// effective field `x` contributes to its parent's field.
    pub fn h(&self, x: &W) -> W {
        (self.beta.clone() * x.clone() + W::one()) / (x.clone() + self.gamma.clone())
    }

    /// Same parameters with a different uniform field.
    pub fn with_mu(&self, mu: W) -> Result<Self> {
        Self::new(self.beta.clone(), self.gamma.clone(), mu)
    }
}

impl SpinParams<f64> {
    pub fn to_log(&self) -> SpinParams<LogWeight> {
        SpinParams {
            beta: LogWeight::from_value(self.beta),
            gamma: LogWeight::from_value(self.gamma),
            mu: LogWeight::from_value(self.mu),
        }
    }
}

/// Multigraph with per-vertex external fields and an optional output vertex.
///
/// Vertices are addressed by index; string ids are kept for I/O. Parallel
/// edges and self-loops are allowed. A self-loop adds 2 to the degree.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldedGraph<W = f64> {
    ids: Vec<String>,
    fields: Vec<W>,
    edges: Vec<(usize, usize)>,
    output: Option<usize>,
}

impl<W> Default for FieldedGraph<W> {
    fn default() -> Self {
        FieldedGraph {
            ids: Vec::new(),
            fields: Vec::new(),
            edges: Vec::new(),
            output: None,
        }
    }
}

impl<W: Clone> FieldedGraph<W> {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n` vertices with ids `"0".."n-1"`, all carrying `field`.
    pub fn uniform(n: usize, edges: &[(usize, usize)], field: W) -> Result<Self> {
        let mut g = Self::new();
        for i in 0..n {
            g.add_vertex(i.to_string(), field.clone());
        }
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, id: impl Into<String>, field: W) -> usize {
        self.ids.push(id.into());
        self.fields.push(field);
        self.ids.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.len();
        if u >= n || v >= n {
            return Err(Error::domain(format!(
                "edge ({u}, {v}) refers to a vertex outside 0..{n}"
            )));
        }
        self.edges.push((u, v));
        Ok(())
    }

    pub fn set_output(&mut self, v: Option<usize>) -> Result<()> {
        if let Some(v) = v {
            if v >= self.len() {
                return Err(Error::domain(format!("output vertex {v} does not exist")));
            }
        }
        self.output = v;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn fields(&self) -> &[W] {
        &self.fields
    }

    pub fn field(&self, v: usize) -> &W {
        &self.fields[v]
    }

    pub fn set_field(&mut self, v: usize, field: W) {
        self.fields[v] = field;
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn output(&self) -> Option<usize> {
        self.output
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.len()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Same structure with fields replaced by `f(field)`.
    pub fn map_fields<U, F: FnMut(&W) -> U>(&self, f: F) -> FieldedGraph<U> {
        FieldedGraph {
            ids: self.ids.clone(),
            fields: self.fields.iter().map(f).collect(),
            edges: self.edges.clone(),
            output: self.output,
        }
    }

    pub fn try_map_fields<U, F: FnMut(&W) -> Result<U>>(&self, f: F) -> Result<FieldedGraph<U>> {
        Ok(FieldedGraph {
            ids: self.ids.clone(),
            fields: self.fields.iter().map(f).collect::<Result<_>>()?,
            edges: self.edges.clone(),
            output: self.output,
        })
    }

    /// Same structure with the given fields.
    pub fn with_fields<U>(&self, fields: Vec<U>) -> FieldedGraph<U> {
        assert_eq!(fields.len(), self.len(), "one field per vertex");
        FieldedGraph {
            ids: self.ids.clone(),
            fields,
            edges: self.edges.clone(),
            output: self.output,
        }
    }

    /// Keeps the vertices for which `keep` is true, dropping incident edges.
    pub fn induced(&self, keep: &[bool]) -> FieldedGraph<W> {
        let mut remap = vec![usize::MAX; self.len()];
        let mut g = FieldedGraph::new();
        for v in 0..self.len() {
            if keep[v] {
                remap[v] = g.add_vertex(self.ids[v].clone(), self.fields[v].clone());
            }
        }
        for &(u, v) in &self.edges {
            if keep[u] && keep[v] {
                g.edges.push((remap[u], remap[v]));
            }
        }
        g.output = self.output.filter(|&o| keep[o]).map(|o| remap[o]);
        g
    }
}

/// Partial assignment of spins used to condition the partition function.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PinAssignment {
    pins: BTreeMap<usize, Spin>,
}

impl PinAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(v: usize, spin: Spin) -> Self {
        let mut p = Self::new();
        p.pins.insert(v, spin);
        p
    }

    /// Pins `v`; pinning the same vertex twice is an error.
    pub fn pin(&mut self, v: usize, spin: Spin) -> Result<()> {
        if self.pins.insert(v, spin).is_some() {
            return Err(Error::domain(format!("vertex {v} pinned more than once")));
        }
        Ok(())
    }

    pub fn get(&self, v: usize) -> Option<Spin> {
        self.pins.get(&v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Spin)> + '_ {
        self.pins.iter().map(|(&v, &s)| (v, s))
    }
}

/// Exhaustive evaluator with a configurable vertex cap.
#[derive(Clone, Copy, Debug)]
pub struct Enumerator {
    pub limit: usize,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator {
            limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }
}

impl Enumerator {
    pub fn with_limit(limit: usize) -> Self {
        Enumerator { limit }
    }

    pub fn partition_function<W: Weight>(&self, g: &FieldedGraph<W>, p: &SpinParams<W>) -> Result<W> {
        self.pinned_partition(g, p, &PinAssignment::new())
    }

    /// Sum over configurations agreeing with `pins` of
    /// `prod_v field_v^[s_v = 0] * prod_(u,v) A[s_u][s_v]`.
    pub fn pinned_partition<W: Weight>(
        &self,
        g: &FieldedGraph<W>,
        p: &SpinParams<W>,
        pins: &PinAssignment,
    ) -> Result<W> {
        let n = g.len();
        if n > self.limit {
            return Err(Error::capacity(format!(
                "{n} vertices exceed the enumeration limit of {}",
                self.limit
            )));
        }
        if let Some(v) = g.fields.iter().position(|f| !f.is_positive()) {
            return Err(Error::domain(format!(
                "vertex {} has non-positive field {:?}",
                g.ids[v], g.fields[v]
            )));
        }
        let mut allowed = vec![[true, true]; n];
        for (v, spin) in pins.iter() {
            if v >= n {
                return Err(Error::domain(format!("pinned vertex {v} does not exist")));
            }
            allowed[v] = match spin {
                Spin::Zero => [true, false],
                Spin::One => [false, true],
            };
        }

        // earlier[i]: neighbours j < i with multiplicity; loops[i]: self-loops at i
        let mut earlier = vec![Vec::new(); n];
        let mut loops = vec![0usize; n];
        for &(u, v) in &g.edges {
            if u == v {
                loops[u] += 1;
            } else {
                let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                earlier[hi].push(lo);
            }
        }
        let max_pow = (0..n).map(|i| earlier[i].len() + loops[i]).max().unwrap_or(0);
        let beta_pow = powers(&p.beta, max_pow);
        let gamma_pow = powers(&p.gamma, max_pow);

        let walk = Walk {
            fields: &g.fields,
            earlier: &earlier,
            loops: &loops,
            allowed: &allowed,
            beta_pow: &beta_pow,
            gamma_pow: &gamma_pow,
        };
        let mut spins = vec![Spin::Zero; n];
        let mut total = W::zero();
        walk.visit(0, W::one(), &mut spins, &mut total);
        Ok(total)
    }

    /// Ratio `Z(v* = 0) / Z(v* = 1)` at the output vertex.
    pub fn effective_field<W: Scalar>(&self, g: &FieldedGraph<W>, p: &SpinParams<W>) -> Result<W> {
        let out = g
            .output
            .ok_or_else(|| Error::domain("graph has no output vertex"))?;
        let z0 = self.pinned_partition(g, p, &PinAssignment::single(out, Spin::Zero))?;
        let z1 = self.pinned_partition(g, p, &PinAssignment::single(out, Spin::One))?;
        Ok(z0 / z1)
    }

    /// Natural logarithm of the partition function, accumulated in log space.
    pub fn ln_partition_function(&self, g: &FieldedGraph<f64>, p: &SpinParams<f64>) -> Result<f64> {
        if let Some(v) = g.fields.iter().position(|f| !f.is_positive()) {
            return Err(Error::domain(format!(
                "vertex {} has non-positive field {}",
                g.ids[v], g.fields[v]
            )));
        }
        let lg = g.map_fields(|&f| LogWeight::from_value(f));
        self.partition_function(&lg, &p.to_log()).map(LogWeight::ln)
    }
}

fn powers<W: Weight>(base: &W, max: usize) -> Vec<W> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(W::one());
    for k in 0..max {
        let next = out[k].clone() * base.clone();
        out.push(next);
    }
    out
}

struct Walk<'a, W> {
    fields: &'a [W],
    earlier: &'a [Vec<usize>],
    loops: &'a [usize],
    allowed: &'a [[bool; 2]],
    beta_pow: &'a [W],
    gamma_pow: &'a [W],
}

impl<W: Weight> Walk<'_, W> {
    fn visit(&self, i: usize, weight: W, spins: &mut [Spin], total: &mut W) {
        if i == spins.len() {
            *total = total.clone() + weight;
            return;
        }
        let zeros_before = self.earlier[i]
            .iter()
            .filter(|&&j| spins[j] == Spin::Zero)
            .count();
        let ones_before = self.earlier[i].len() - zeros_before;
        if self.allowed[i][0] {
            spins[i] = Spin::Zero;
            let w = weight.clone()
                * self.fields[i].clone()
                * self.beta_pow[zeros_before + self.loops[i]].clone();
            self.visit(i + 1, w, spins, total);
        }
        if self.allowed[i][1] {
            spins[i] = Spin::One;
            let w = weight * self.gamma_pow[ones_before + self.loops[i]].clone();
            self.visit(i + 1, w, spins, total);
        }
    }
}

/// [`Enumerator::partition_function`] with the default vertex cap.
pub fn partition_function<W: Weight>(g: &FieldedGraph<W>, p: &SpinParams<W>) -> Result<W> {
    Enumerator::default().partition_function(g, p)
}

/// [`Enumerator::pinned_partition`] with the default vertex cap.
pub fn pinned_partition<W: Weight>(
    g: &FieldedGraph<W>,
    p: &SpinParams<W>,
    pins: &PinAssignment,
) -> Result<W> {
    Enumerator::default().pinned_partition(g, p, pins)
}

/// [`Enumerator::effective_field`] with the default vertex cap.
pub fn effective_field<W: Scalar>(g: &FieldedGraph<W>, p: &SpinParams<W>) -> Result<W> {
    Enumerator::default().effective_field(g, p)
}

/// On-disk graph format.
///
/// `{"beta": r, "gamma": r, "vertices": [{"id": s, "field": r}], "edges": [[u, v], ...], "output": s | null}`
/// with a self-loop written `[v, v]`. An optional `"mu"` records the uniform
/// field the instance was derived from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub beta: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub vertices: Vec<VertexDocument>,
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDocument {
    pub id: String,
    pub field: f64,
}

impl GraphDocument {
    pub fn from_graph(g: &FieldedGraph<f64>, p: &SpinParams<f64>) -> Self {
        GraphDocument {
            beta: p.beta,
            gamma: p.gamma,
            mu: Some(p.mu),
            vertices: g
                .ids
                .iter()
                .zip(&g.fields)
                .map(|(id, &field)| VertexDocument {
                    id: id.clone(),
                    field,
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|&(u, v)| [g.ids[u].clone(), g.ids[v].clone()])
                .collect(),
            output: g.output.map(|o| g.ids[o].clone()),
        }
    }

    /// Validates the document and builds the graph and parameters.
    ///
    /// Without `"mu"` the largest vertex field is used as the uniform field.
    pub fn to_instance(&self) -> Result<(FieldedGraph<f64>, SpinParams<f64>)> {
        let mut g = FieldedGraph::new();
        let mut index = HashMap::new();
        for v in &self.vertices {
            if !(v.field > 0.0 && v.field.is_finite()) {
                return Err(Error::domain(format!(
                    "vertex {} has non-positive field {}",
                    v.id, v.field
                )));
            }
            if index.insert(v.id.clone(), g.len()).is_some() {
                return Err(Error::domain(format!("duplicate vertex id {}", v.id)));
            }
            g.add_vertex(v.id.clone(), v.field);
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::domain(format!("edge endpoint {id} is not a declared vertex")))
        };
        for [u, v] in &self.edges {
            g.add_edge(lookup(u)?, lookup(v)?)?;
        }
        if let Some(o) = &self.output {
            g.set_output(Some(lookup(o)?))?;
        }
        let mu = self
            .mu
            .unwrap_or_else(|| self.vertices.iter().map(|v| v.field).fold(1.0, f64::max));
        let p = SpinParams::new(self.beta, self.gamma, mu)?;
        Ok((g, p))
    }
}
