//! Recursive gadget construction for arbitrary targets in `(0, mu*]`.
//!
//! `construct(ell, target)` combines exact basic gadgets (singletons, long
//! stars that realize roughly 0, deep trees that realize roughly `mu*`) with
//! one recursively built child. Correlation decay shrinks the leaf error by a
//! factor `alpha` per level, so
//! `|ln(field / target)| <= (ln gamma + ell) alpha^ell`.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gadgets::{pow_u64, GadgetEvaluator, GadgetTree};
use crate::recursion::{decay_constants, solve_h_inverse, DecayConstants, RecursionParams};

/// Relative slack for the closed upper end of the loop invariant and for
/// clamping the inverted child target onto `mu*`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Absolute slack on the per-substitution and end-to-end log bounds.
const LOG_TOLERANCE: f64 = 1e-12;

/// State of the split loop at step `i`: the remaining product `mu_i` must be
/// reachable as `mu h(x)^(d - i + 1)` with `0 < x <= mu*`.
#[derive(Clone, Copy, Debug)]
pub struct LevelState<'a> {
    pub rp: &'a RecursionParams,
    pub mu_star: f64,
    pub i: u32,
    pub mu_i: f64,
}

/// True iff `mu h(0)^(d-i+1) < mu_i <= mu h(mu*)^(d-i+1)`.
///
/// The upper end is closed and tolerates a relative error of
/// [`BOUNDARY_TOLERANCE`], since `mu*` itself is a floating-point root.
pub fn check_invariant(state: &LevelState<'_>) -> bool {
    let rp = state.rp;
    let remaining = (rp.d + 1).saturating_sub(state.i) as i32;
    let lower = rp.mu() * rp.h(0.0).powi(remaining);
    let upper = rp.mu() * rp.h(state.mu_star).powi(remaining);
    lower < state.mu_i && state.mu_i <= upper * (1.0 + BOUNDARY_TOLERANCE)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasicGadget {
    /// Stands in for a child of field 0.
    Star { w: u64 },
    /// Stands in for a child of field `mu*`.
    Tree { t: u32 },
}

/// One pass of the split loop.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitStep {
    pub i: u32,
    pub mu_i: f64,
    /// `mu h(mu*) h(0)^(d-i)`; the zero branch is taken iff this is `>= mu_i`.
    pub threshold: f64,
    /// Ideal child field `y_i`, either 0 or `mu*`.
    pub y: f64,
    pub gadget: BasicGadget,
    /// Effective field of the substituted gadget.
    pub field: f64,
    /// `ln h(field) - ln h(y)`, at most `alpha^ell / d`.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Terminal {
    /// Depth exhausted: a single star approximates the target.
    Base,
    /// Child target below the cutoff: a star stands in for it.
    Cutoff { w: u64, field: f64, slack: f64 },
    /// Child built by the next level.
    Recurse,
}

/// Record of the choices made at one recursion level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelTrace {
    pub ell: u32,
    pub target: f64,
    /// Number of singleton children (level 0: the star size).
    pub k: u64,
    /// `mu_1, ..., mu_d`; empty at level 0.
    pub mu_sequence: Vec<f64>,
    pub steps: Vec<SplitStep>,
    pub child_target: Option<f64>,
    pub delta: Option<f64>,
    pub terminal: Terminal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructReport {
    pub gadget: GadgetTree,
    pub ell: u32,
    pub target: f64,
    pub achieved: f64,
    /// `ln(achieved / target)`.
    pub log_error: f64,
    /// `(ln gamma + ell) alpha^ell`.
    pub bound: f64,
    pub within_bound: bool,
    /// Largest per-substitution slack over all levels, relative to `alpha^ell / d`
    /// of the level where it occurred.
    pub max_slack_ratio: f64,
    /// Every branch matched its condition and every slack was in `[0, alpha^ell / d]`.
    pub trace_consistent: bool,
    /// Vertex count; serialized as a string beyond `u64::MAX`.
    #[serde(serialize_with = "serialize_count")]
    pub size: u128,
    pub log_size: f64,
    pub trace: Vec<LevelTrace>,
}

fn serialize_count<S: Serializer>(n: &u128, s: S) -> std::result::Result<S::Ok, S::Error> {
    match u64::try_from(*n) {
        Ok(v) => s.serialize_u64(v),
        Err(_) => s.serialize_str(&n.to_string()),
    }
}

/// Reusable construction context for one parameter set.
///
/// Holds the decay constants and a field memo shared across calls.
#[derive(Clone, Debug)]
pub struct Constructor {
    rp: RecursionParams,
    constants: DecayConstants,
    eval: GadgetEvaluator,
    /// `h(mu)`, the exact per-singleton factor.
    singleton_factor: f64,
    /// Rates whose powers bound `mu(S_w)`; the stricter one drives `w` and `delta`.
    star_rates: Vec<f64>,
}

impl Constructor {
    /// Fails unless `mu` exceeds the construction field bound.
    pub fn new(rp: &RecursionParams) -> Result<Self> {
        rp.require_construction_field()?;
        let constants = decay_constants(rp)?;
        let singleton_factor = rp.h(rp.mu());
        let mut star_rates = vec![singleton_factor];
        if rp.params.beta < 1.0 {
            star_rates.push(rp.params.beta);
        }
        Ok(Constructor {
            rp: rp.clone(),
            eval: GadgetEvaluator::new(rp.params.clone()),
            constants,
            singleton_factor,
            star_rates,
        })
    }

    pub fn constants(&self) -> &DecayConstants {
        &self.constants
    }

    pub fn mu_star(&self) -> f64 {
        self.constants.mu_star
    }

    pub fn field(&mut self, gadget: &GadgetTree) -> f64 {
        self.eval.field(gadget)
    }

    /// Bound `(ln gamma + ell) alpha^ell` on the log error at depth `ell`.
    pub fn error_bound(&self, ell: u32) -> f64 {
        (self.rp.params.gamma.ln() + ell as f64) * self.constants.alpha.powi(ell as i32)
    }

    pub fn construct(&mut self, ell: u32, target: f64) -> Result<GadgetTree> {
        self.construct_traced(ell, target).map(|(g, _)| g)
    }

    /// Builds the gadget and the per-level trace, outermost level first.
    pub fn construct_traced(&mut self, ell: u32, target: f64) -> Result<(GadgetTree, Vec<LevelTrace>)> {
        if !(target > 0.0 && target <= self.mu_star()) {
            return Err(Error::domain(format!(
                "target {target} outside (0, mu*] with mu* = {}",
                self.mu_star()
            )));
        }
        let mut trace = Vec::new();
        let gadget = self.level(ell, target, &mut trace)?;
        Ok((gadget, trace))
    }

    pub fn certify(&mut self, ell: u32, target: f64) -> Result<ConstructReport> {
        let (gadget, trace) = self.construct_traced(ell, target)?;
        let achieved = self.eval.field(&gadget);
        let log_error = (achieved / target).ln();
        let bound = self.error_bound(ell);
        let d = self.rp.d as f64;
        let mut max_slack_ratio: f64 = 0.0;
        let mut trace_consistent = true;
        for level in &trace {
            let allowed = self.constants.alpha.powi(level.ell as i32) / d;
            let cutoff = match level.terminal {
                Terminal::Cutoff { slack, .. } => Some(slack),
                _ => None,
            };
            for slack in level.steps.iter().map(|s| s.slack).chain(cutoff) {
                max_slack_ratio = max_slack_ratio.max(slack / allowed);
                trace_consistent &= slack >= -LOG_TOLERANCE && slack <= allowed + LOG_TOLERANCE;
            }
            for step in &level.steps {
                let zero_branch = step.threshold >= step.mu_i;
                trace_consistent &= zero_branch == (step.y == 0.0);
            }
        }
        Ok(ConstructReport {
            ell,
            target,
            achieved,
            log_error,
            bound,
            within_bound: log_error.abs() <= bound + LOG_TOLERANCE,
            max_slack_ratio,
            trace_consistent,
            size: gadget.size(),
            log_size: gadget.log_size(),
            gadget,
            trace,
        })
    }

    /// Smallest `k >= 0` with `top r^(k+1) < target`, given `target <= top`.
    fn singleton_count(&self, top: f64, target: f64) -> u64 {
        let r = self.singleton_factor;
        let below = |k: u64| top * pow_u64(r, k) < target;
        let mut k = ((target / top).ln() / r.ln()).floor().max(0.0) as u64;
        while k > 0 && below(k) {
            k -= 1;
        }
        while !below(k + 1) {
            k += 1;
        }
        k
    }

    /// Largest `(ell ln alpha - ln(d mu)) / ln r` over the star rates `r`.
    fn star_exponent(&self, ell: u32) -> f64 {
        let numerator = ell as f64 * self.constants.alpha.ln() - (self.rp.d as f64 * self.rp.mu()).ln();
        self.star_rates
            .iter()
            .map(|r| numerator / r.ln())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn zero_star(&self, ell: u32) -> u64 {
        (self.star_exponent(ell).floor() + 1.0).max(0.0) as u64
    }

    fn fixed_point_tree_depth(&self, ell: u32) -> u32 {
        let c = &self.constants;
        let x = (ell as f64 * c.alpha.ln() - (self.rp.d as f64).ln() - c.iota.ln()) / c.decay_rate.ln();
        (x.floor() + 1.0).max(0.0) as u32
    }

    /// `ln delta = ln(mu / gamma) - ln(gamma) * star_exponent`.
    fn log_delta(&self, ell: u32) -> f64 {
        let gamma = self.rp.params.gamma;
        (self.rp.mu() / gamma).ln() - gamma.ln() * self.star_exponent(ell)
    }

    /// Largest `w >= 0` with `mu gamma^-w > delta`.
    fn cutoff_star(&self, log_delta: f64) -> u64 {
        let (log_mu, log_gamma) = (self.rp.mu().ln(), self.rp.params.gamma.ln());
        let above = |w: u64| log_mu - w as f64 * log_gamma > log_delta;
        let mut w = ((log_mu - log_delta) / log_gamma).ceil().max(1.0) as u64 - 1;
        while w > 0 && !above(w) {
            w -= 1;
        }
        while above(w + 1) {
            w += 1;
        }
        w
    }

    fn level(&mut self, ell: u32, target: f64, trace: &mut Vec<LevelTrace>) -> Result<GadgetTree> {
        let mu = self.rp.mu();
        if ell == 0 {
            let k = self.singleton_count(mu, target);
            trace.push(LevelTrace {
                ell,
                target,
                k,
                mu_sequence: vec![],
                steps: vec![],
                child_target: None,
                delta: None,
                terminal: Terminal::Base,
            });
            return Ok(GadgetTree::star(k));
        }

        let mu_star = self.mu_star();
        let d = self.rp.d;
        let k = self.singleton_count(mu_star, target);
        let mut children = vec![GadgetTree::star(0); k as usize];
        let mut mu_i = target / pow_u64(self.singleton_factor, k);
        let mut mu_sequence = vec![mu_i];
        let mut steps = Vec::with_capacity(d as usize - 1);
        let h0 = self.rp.h(0.0);
        let h_star = self.rp.h(mu_star);

        for i in 1..d {
            self.require_invariant(ell, i, mu_i)?;
            let threshold = mu * h_star * h0.powi((d - i) as i32);
            let (y, gadget, basic) = if threshold >= mu_i {
                let w = self.zero_star(ell);
                (0.0, GadgetTree::star(w), BasicGadget::Star { w })
            } else {
                let t = self.fixed_point_tree_depth(ell);
                (mu_star, GadgetTree::tree(d, t), BasicGadget::Tree { t })
            };
            let field = self.eval.field(&gadget);
            let hy = self.rp.h(y);
            steps.push(SplitStep {
                i,
                mu_i,
                threshold,
                y,
                gadget: basic,
                field,
                slack: (self.rp.h(field) / hy).ln(),
            });
            children.push(gadget);
            mu_i /= hy;
            mu_sequence.push(mu_i);
        }
        self.require_invariant(ell, d, mu_i)?;

        let mut child_target = solve_h_inverse(mu_i / mu, &self.rp.params)?;
        if child_target > mu_star {
            if child_target > mu_star * (1.0 + BOUNDARY_TOLERANCE) {
                return Err(Error::internal(format!(
                    "level {ell}: inverted child target {child_target} exceeds mu* = {mu_star}"
                )));
            }
            child_target = mu_star;
        }

        let log_delta = self.log_delta(ell);
        let mut record = LevelTrace {
            ell,
            target,
            k,
            mu_sequence,
            steps,
            child_target: Some(child_target),
            delta: Some(log_delta.exp()),
            terminal: Terminal::Recurse,
        };
        let last = if child_target.ln() <= log_delta {
            let w = self.cutoff_star(log_delta);
            let field = self.eval.star_field(w);
            let slack = (self.rp.h(field) / self.rp.h(child_target)).ln();
            record.terminal = Terminal::Cutoff { w, field, slack };
            trace.push(record);
            GadgetTree::star(w)
        } else {
            trace.push(record);
            self.level(ell - 1, child_target, trace)?
        };
        children.push(last);
        GadgetTree::comb(children)
    }

    fn require_invariant(&self, ell: u32, i: u32, mu_i: f64) -> Result<()> {
        let state = LevelState {
            rp: &self.rp,
            mu_star: self.mu_star(),
            i,
            mu_i,
        };
        if check_invariant(&state) {
            Ok(())
        } else {
            Err(Error::internal(format!(
                "level {ell}, step {i}: mu_i = {mu_i} is not reachable as mu h(x)^{} with 0 < x <= mu*",
                self.rp.d + 1 - i
            )))
        }
    }
}

/// Runs the construction once; see [`Constructor`].
pub fn construct(ell: u32, target: f64, rp: &RecursionParams) -> Result<GadgetTree> {
    Constructor::new(rp)?.construct(ell, target)
}

/// Runs the construction and checks the achieved field against the error bound.
pub fn certify(ell: u32, target: f64, rp: &RecursionParams) -> Result<ConstructReport> {
    Constructor::new(rp)?.certify(ell, target)
}

/// `mu* j / n` for `j = 1..=n`.
pub fn target_grid(mu_star: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|j| mu_star * j as f64 / n as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub ell: u32,
    pub target: f64,
    pub achieved: f64,
    pub log_error: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub trace_consistent: bool,
    pub log_size: f64,
}

/// Least-squares line through `(ell, ln max_size(ell))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeFit {
    pub intercept: f64,
    pub slope: f64,
    pub max_abs_residual: f64,
    /// `A` in `size <= A exp(B ell)`, the fitted line raised to cover every point.
    pub a: f64,
    /// `B` in `size <= A exp(B ell)`.
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructSweep {
    pub rows: Vec<SweepRow>,
    /// `(ell, largest log-size over the targets)`.
    pub max_log_size: Vec<(u32, f64)>,
    /// Fit over the depths `ell >= 1` when there are two of them. Depth 0 is a
    /// lone star whose size depends on the target rather than on `ell`.
    pub size_fit: Option<SizeFit>,
}

impl ConstructSweep {
    pub fn all_within_bound(&self) -> bool {
        self.rows.iter().all(|r| r.within_bound && r.trace_consistent)
    }

    /// Largest `|log_error|` over the targets at each depth.
    pub fn worst_error_by_depth(&self) -> Vec<(u32, f64)> {
        let mut out: Vec<(u32, f64)> = Vec::new();
        for row in &self.rows {
            match out.iter_mut().find(|(ell, _)| *ell == row.ell) {
                Some(entry) => entry.1 = entry.1.max(row.log_error.abs()),
                None => out.push((row.ell, row.log_error.abs())),
            }
        }
        out
    }
}

/// Certifies every `(ell, target)` pair and fits the size growth.
pub fn sweep(rp: &RecursionParams, ells: &[u32], targets: &[f64]) -> Result<ConstructSweep> {
    let mut ctx = Constructor::new(rp)?;
    let mut rows = Vec::with_capacity(ells.len() * targets.len());
    let mut max_log_size = Vec::with_capacity(ells.len());
    for &ell in ells {
        let mut largest = f64::NEG_INFINITY;
        for &target in targets {
            let r = ctx.certify(ell, target)?;
            largest = largest.max(r.log_size);
            rows.push(SweepRow {
                ell,
                target,
                achieved: r.achieved,
                log_error: r.log_error,
                bound: r.bound,
                within_bound: r.within_bound,
                trace_consistent: r.trace_consistent,
                log_size: r.log_size,
            });
        }
        max_log_size.push((ell, largest));
    }
    let recursive: Vec<(u32, f64)> = max_log_size.iter().copied().filter(|p| p.0 > 0).collect();
    let size_fit = fit_line(if recursive.len() >= 2 { &recursive } else { &max_log_size });
    Ok(ConstructSweep {
        rows,
        max_log_size,
        size_fit,
    })
}

fn fit_line(points: &[(u32, f64)]) -> Option<SizeFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = points
        .iter()
        .map(|p| p.1 - (intercept + slope * p.0 as f64))
        .collect();
    let max_abs_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let lift = residuals.iter().copied().fold(0.0f64, f64::max);
    Some(SizeFit {
        intercept,
        slope,
        max_abs_residual,
        a: (intercept + lift).exp(),
        b: slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::SpinParams;

    fn rp(beta: f64, gamma: f64, mu: f64, d: u32) -> RecursionParams {
        RecursionParams::new(SpinParams::new(beta, gamma, mu).unwrap(), d).unwrap()
    }

    #[test]
    fn depth_zero_is_a_star() {
        let r = certify(0, 10.0, &rp(1.0, 2.0, 20.0, 1)).unwrap();
        assert_eq!(r.gadget, GadgetTree::star(14));
        assert!((r.achieved - 10.427).abs() < 1e-3);
        assert!((r.log_error - 0.0418).abs() < 1e-4);
        assert!(r.within_bound);
        assert_eq!(r.size, 15);
        assert_eq!(r.bound, 2f64.ln());
    }

    #[test]
    fn rejects_targets_and_small_fields() {
        let params = rp(1.0, 2.0, 20.0, 1);
        assert!(matches!(construct(1, 0.0, &params), Err(Error::Domain(_))));
        assert!(matches!(construct(1, 19.1, &params), Err(Error::Domain(_))));
        assert!(matches!(construct(1, 1.0, &rp(1.0, 2.0, 7.0, 1)), Err(Error::Domain(_))));
    }

    #[test]
    fn target_at_fixed_point() {
        for params in [rp(1.0, 2.0, 20.0, 1), rp(1.0, 3.0, 60.0, 2), rp(0.5, 4.0, 200.0, 2)] {
            let mut ctx = Constructor::new(&params).unwrap();
            let star = ctx.mu_star();
            for ell in 0..=8 {
                let r = ctx.certify(ell, star).unwrap();
                assert!(r.within_bound, "ell {ell}: {} > {}", r.log_error, r.bound);
                assert!(r.trace_consistent);
            }
        }
    }

    #[test]
    fn invariant_endpoints() {
        let params = rp(1.0, 3.0, 60.0, 2);
        let mu_star = Constructor::new(&params).unwrap().mu_star();
        let at = |i: u32, mu_i: f64| check_invariant(&LevelState { rp: &params, mu_star, i, mu_i });
        let upper = 60.0 * params.h(mu_star).powi(2);
        let lower = 60.0 * params.h(0.0).powi(2);
        assert!(at(1, upper));
        assert!(!at(1, lower));
        assert!(at(1, 0.5 * (upper + lower)));
        assert!(!at(1, upper * 1.01));
    }

    #[test]
    fn traces_satisfy_invariant_and_branch_rules() {
        // h(mu) is small enough here that both branches occur.
        let params = rp(0.3, 10.0, 3000.0, 2);
        let mut ctx = Constructor::new(&params).unwrap();
        let mu_star = ctx.mu_star();
        let mut zero = 0;
        let mut tree = 0;
        for ell in 1..=3 {
            for target in target_grid(mu_star, 20) {
                let (_, trace) = ctx.construct_traced(ell, target).unwrap();
                for level in &trace {
                    for (i, &mu_i) in level.mu_sequence.iter().enumerate() {
                        let state = LevelState { rp: &params, mu_star, i: i as u32 + 1, mu_i };
                        assert!(check_invariant(&state));
                    }
                    for step in &level.steps {
                        match step.gadget {
                            BasicGadget::Star { .. } => {
                                zero += 1;
                                assert!(step.threshold >= step.mu_i);
                            }
                            BasicGadget::Tree { .. } => {
                                tree += 1;
                                assert!(step.threshold < step.mu_i);
                            }
                        }
                    }
                }
            }
        }
        assert!(zero > 0 && tree > 0);
    }

    #[test]
    fn small_sweep_within_bounds() {
        let params = rp(1.0, 2.0, 20.0, 1);
        let star = Constructor::new(&params).unwrap().mu_star();
        let s = sweep(&params, &[0, 1, 2, 3, 4], &target_grid(star, 25)).unwrap();
        assert!(s.all_within_bound());
        assert_eq!(s.rows.len(), 125);
        assert!(s.size_fit.is_some());
    }

    #[test]
    fn deterministic() {
        let params = rp(0.8, 2.0, 30.0, 1);
        let a = certify(5, 3.3, &params).unwrap();
        let b = certify(5, 3.3, &params).unwrap();
        assert_eq!(a, b);
    }
}
