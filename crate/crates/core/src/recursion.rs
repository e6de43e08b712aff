//! Scalar tree recursion for ferromagnetic two-spin systems.
//!
//! A vertex whose `d` children realize field `x` realizes `f(x) = mu * h(x)^d`.
//! The largest fixed point `mu*` of `f` bounds the fields a tree gadget can
//! simulate, and the contraction of `f` (and of a single `h`) around it is what
//! makes the gadget construction converge.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spin::SpinParams;

/// Relative tolerance used by [`solve_mu_star`] in the rest of the crate.
pub const MU_STAR_TOLERANCE: f64 = 1e-12;
/// Iteration cap for the fixed-point iteration.
pub const MU_STAR_MAX_ITERATIONS: usize = 1_000_000;
/// Number of sample points used when bounding `g` on a neighbourhood of `mu*`.
pub const DECAY_GRID_POINTS: usize = 10_000;

/// `h(x) = (beta x + 1) / (x + gamma)`.
pub fn h(x: f64, p: &SpinParams) -> f64 {
    (p.beta * x + 1.0) / (x + p.gamma)
}

/// Logarithmic derivative `x h'(x) / h(x) = (beta gamma - 1) x / ((x + gamma)(beta x + 1))`.
pub fn log_derivative(x: f64, p: &SpinParams) -> f64 {
    (p.beta * p.gamma - 1.0) * x / ((x + p.gamma) * (p.beta * x + 1.0))
}

/// Contraction rate `(sqrt(beta gamma) - 1) / (sqrt(beta gamma) + 1)`, the supremum of
/// [`log_derivative`] over `x > 0`.
pub fn alpha(p: &SpinParams) -> f64 {
    let s = (p.beta * p.gamma).sqrt();
    (s - 1.0) / (s + 1.0)
}

/// Inverse of `h` on its open range `(1/gamma, beta)`.
pub fn solve_h_inverse(t: f64, p: &SpinParams) -> Result<f64> {
    let lo = 1.0 / p.gamma;
    if !(t > lo && t < p.beta) {
        return Err(Error::domain(format!(
            "h^-1({t}) undefined: the range of h is the open interval ({lo}, {})",
            p.beta
        )));
    }
    Ok((t * p.gamma - 1.0) / (p.beta - t))
}

/// Spin parameters together with the arity `d` of the tree recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursionParams {
    pub params: SpinParams,
    pub d: u32,
}

impl RecursionParams {
    /// Requires `beta <= 1`, `beta gamma > 1` and `beta (beta gamma)^d > 1`.
    pub fn new(params: SpinParams, d: u32) -> Result<Self> {
        let (beta, gamma) = (params.beta, params.gamma);
        if d == 0 {
            return Err(Error::domain("arity d must be positive"));
        }
        if !(beta * gamma > 1.0) {
            return Err(Error::domain(format!(
                "beta * gamma = {} must exceed 1",
                beta * gamma
            )));
        }
        if !(beta <= 1.0) {
            return Err(Error::domain(format!(
                "beta = {beta} > 1; the tree recursion needs beta <= 1"
            )));
        }
        if !(beta * (beta * gamma).powi(d as i32) > 1.0) {
            return Err(Error::domain(format!(
                "beta (beta gamma)^d = {} must exceed 1 for d = {d}",
                beta * (beta * gamma).powi(d as i32)
            )));
        }
        Ok(RecursionParams { params, d })
    }

    pub fn mu(&self) -> f64 {
        self.params.mu
    }

    pub fn h(&self, x: f64) -> f64 {
        h(x, &self.params)
    }

    /// `f(x) = mu h(x)^d`.
    pub fn f(&self, x: f64) -> f64 {
        self.params.mu * self.h(x).powi(self.d as i32)
    }

    /// `g(x) = x f'(x) / f(x) = d x h'(x) / h(x)`.
    pub fn g(&self, x: f64) -> f64 {
        self.d as f64 * log_derivative(x, &self.params)
    }

    /// Smallest uniform field for which every target in `(mu* h(mu), mu*]`
    /// can be split over `d` children:
    /// `gamma^d (beta gamma - 1) / beta * (1 + (d + 1) / ln(beta (beta gamma)^d))`.
    pub fn construction_field_bound(&self) -> f64 {
        let (beta, gamma, d) = (self.params.beta, self.params.gamma, self.d as f64);
        let log_margin = (beta * (beta * gamma).powf(d)).ln();
        gamma.powf(d) * (beta * gamma - 1.0) / beta * (1.0 + (d + 1.0) / log_margin)
    }

    /// Fails unless `mu` exceeds [`Self::construction_field_bound`].
    pub fn require_construction_field(&self) -> Result<()> {
        let bound = self.construction_field_bound();
        if self.mu() > bound {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "mu = {} does not exceed the construction bound {bound}",
                self.mu()
            )))
        }
    }

    /// `f(base + gap) - f(base)` evaluated without cancellation.
    pub fn f_increment(&self, base: f64, gap: f64) -> f64 {
        let p = &self.params;
        let a = base + gap;
        let (ha, hb) = (self.h(a), self.h(base));
        let dh = (p.beta * p.gamma - 1.0) * gap / ((a + p.gamma) * (base + p.gamma));
        let sum: f64 = (0..self.d)
            .map(|i| ha.powi(i as i32) * hb.powi((self.d - 1 - i) as i32))
            .sum();
        p.mu * dh * sum
    }
}

/// Largest fixed point of `f`, found by iterating `x <- f(x)` from `x = mu`.
///
/// The iterates decrease monotonically to `mu*`; an increase signals that the
/// parameters violate the preconditions. Stops once the relative step is at
/// most `tol` and then polishes with Newton steps on `f(x) - x`.
pub fn solve_mu_star(rp: &RecursionParams, tol: f64) -> Result<f64> {
    let mut x = rp.mu();
    for _ in 0..MU_STAR_MAX_ITERATIONS {
        let next = rp.f(x);
        if next > x {
            return Err(Error::numeric(format!(
                "fixed-point iteration increased from {x} to {next}"
            )));
        }
        if x - next <= tol * next {
            return Ok(polish(rp, next));
        }
        x = next;
    }
    Err(Error::numeric(format!(
        "fixed-point iteration did not reach relative tolerance {tol} in {MU_STAR_MAX_ITERATIONS} steps"
    )))
}

fn polish(rp: &RecursionParams, mut x: f64) -> f64 {
    for _ in 0..5 {
        let residual = rp.f(x) - x;
        // f'(x) = g(x) f(x) / x
        let slope = rp.g(x) * rp.f(x) / x - 1.0;
        let candidate = x - residual / slope;
        if !(candidate.is_finite() && (rp.f(candidate) - candidate).abs() < residual.abs()) {
            break;
        }
        x = candidate;
    }
    x
}

/// First `count` iterates `x_0 = mu, x_{i+1} = f(x_i)`.
pub fn fixed_point_iterates(rp: &RecursionParams, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut x = rp.mu();
    for _ in 0..count {
        out.push(x);
        x = rp.f(x);
    }
    out
}

/// Gaps `x_t - mu*` for `t = 0..count`, propagated as products of
/// difference quotients so they stay accurate long after `x_t` and `mu*`
/// agree to every printed digit.
pub fn fixed_point_gaps(rp: &RecursionParams, mu_star: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut gap = rp.mu() - mu_star;
    for _ in 0..count {
        out.push(gap);
        gap = rp.f_increment(mu_star, gap);
    }
    out
}

/// Constants that certify the convergence rates used by the gadget construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayConstants {
    /// Contraction rate of a single `h` step in log coordinates.
    pub alpha: f64,
    /// Bound `c < 1` on `g` over `(mu* - eta, mu* + eta)`.
    pub decay_rate: f64,
    pub eta: f64,
    pub iota: f64,
    /// First iterate index with `x_t < mu* + eta`.
    pub t0: u32,
    pub mu_star: f64,
    /// `g(mu*) = f'(mu*)`.
    pub g_at_fixed_point: f64,
}

impl DecayConstants {
    /// `c^t iota`, the bound on `ln(mu(T_t) / mu*)`.
    pub fn tree_log_bound(&self, t: u32) -> f64 {
        self.decay_rate.powi(t as i32) * self.iota
    }
}

/// Sup of `g` on `(lo, hi)`: the dense grid, both ends and the peak of `g`.
fn sampled_sup_g(rp: &RecursionParams, lo: f64, hi: f64) -> f64 {
    let peak = (rp.params.gamma / rp.params.beta).sqrt().clamp(lo, hi);
    let n = DECAY_GRID_POINTS;
    (0..n)
        .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64)
        .chain([lo, hi, peak])
        .map(|x| rp.g(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Computes `alpha`, `c`, `eta`, `t0` and `iota`.
///
/// `c = (g(mu*) + 1) / 2`; `eta` halves from `mu*/2` until `g <= c` on the
/// neighbourhood; `iota` is the largest of `ln mu`, `eta c^-t0` and
/// `c^-t ln(x_t / mu*)` for `t <= t0`, which makes `ln(x_t / mu*) <= c^t iota`
/// hold for every `t`.
pub fn decay_constants(rp: &RecursionParams) -> Result<DecayConstants> {
    let mu_star = solve_mu_star(rp, MU_STAR_TOLERANCE)?;
    let g_star = rp.g(mu_star);
    if !(g_star > 0.0 && g_star < 1.0) {
        return Err(Error::numeric(format!("g(mu*) = {g_star} is not in (0, 1)")));
    }
    let c = (g_star + 1.0) / 2.0;

    let mut eta = mu_star / 2.0;
    let mut found = false;
    for _ in 0..200 {
        if sampled_sup_g(rp, mu_star - eta, mu_star + eta) <= c {
            found = true;
            break;
        }
        eta /= 2.0;
    }
    if !found {
        return Err(Error::numeric("no neighbourhood of mu* keeps g below c"));
    }

    let mut t0 = 0u32;
    let mut gap = rp.mu() - mu_star;
    let mut iota = rp.mu().ln();
    loop {
        iota = iota.max((gap / mu_star).ln_1p() / c.powi(t0 as i32));
        if gap < eta {
            break;
        }
        gap = rp.f_increment(mu_star, gap);
        t0 += 1;
        if t0 as usize > MU_STAR_MAX_ITERATIONS {
            return Err(Error::numeric("iterates never enter the eta-neighbourhood"));
        }
    }
    iota = iota.max(eta / c.powi(t0 as i32));

    Ok(DecayConstants {
        alpha: alpha(&rp.params),
        decay_rate: c,
        eta,
        iota,
        t0,
        mu_star,
        g_at_fixed_point: g_star,
    })
}

/// Critical field of the antiferromagnetic Ising recursion on a tree.
///
/// With `Delta` children per vertex the recursion is
/// `x -> mu ((beta x + 1) / (x + beta))^Delta`; its fixed point is stable iff
/// `|ln mu| >= ln mu_c`. Found by bisection on `ln mu` over the stability of
/// the fixed point. Requires `0 < beta < (Delta - 1) / (Delta + 1)`.
pub fn uniqueness_threshold(beta: f64, delta: u32) -> Result<f64> {
    if delta < 3 {
        return Err(Error::domain(format!("Delta = {delta} must be at least 3")));
    }
    let limit = (delta as f64 - 1.0) / (delta as f64 + 1.0);
    if !(beta > 0.0 && beta < limit) {
        return Err(Error::domain(format!(
            "beta = {beta} must lie in (0, {limit}) for Delta = {delta}"
        )));
    }
    let branching = delta as f64;
    let slope_at = |mu: f64| {
        let x = anti_ising_fixed_point(beta, branching, mu);
        branching * (1.0 - beta * beta) * x / ((beta * x + 1.0) * (x + beta))
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64); // ln mu
    while slope_at(hi.exp()) > 1.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::numeric("critical field exceeds exp(1e4)"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope_at(mid.exp()) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Unique fixed point of the decreasing map `x -> mu ((beta x + 1)/(x + beta))^b`.
fn anti_ising_fixed_point(beta: f64, branching: f64, mu: f64) -> f64 {
    let map = |x: f64| mu * ((beta * x + 1.0) / (x + beta)).powf(branching);
    let (mut lo, mut hi) = (mu * beta.powf(branching), mu / beta.powf(branching));
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid - map(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Degree `floor((1 + b)/(1 - b)) + 1` at which the antiferromagnetic Ising
/// model with edge weight `b < 1` is non-unique just above zero field.
pub fn anti_ising_hard_degree(b: f64) -> Result<u32> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::domain(format!("edge weight {b} must lie in (0, 1)")));
    }
    Ok(((1.0 + b) / (1.0 - b)).floor() as u32 + 1)
}

/// Field thresholds above which the ferromagnetic system is hard.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HardnessThresholds {
    /// `floor((sqrt(beta gamma) + 1)/(sqrt(beta gamma) - 1)) + 1`.
    pub delta: u32,
    /// Smallest positive `d` with `beta (beta gamma)^d > 1`.
    pub d: u32,
    /// `(gamma / beta)^(Delta / 2)`, the bound for vertex-dependent fields in `[1, mu]`.
    pub mu_bound_bounded_fields: f64,
    /// `gamma^d max{(gamma/beta)^(Delta/2), (beta gamma - 1)/beta (1 + (d + 1)/ln(beta (beta gamma)^d))}`
    /// for `beta <= 1`.
    pub mu_bound_uniform_field: Option<f64>,
    /// `(gamma - 1) / (beta - 1)` for `beta > 1`.
    pub mu_bound_beta_gt_1: Option<f64>,
    /// Field bound needed by the gadget construction (`beta <= 1`).
    pub construction_field_bound: Option<f64>,
    pub note: Option<String>,
}

pub fn hardness_thresholds(p: &SpinParams) -> Result<HardnessThresholds> {
    let (beta, gamma) = (p.beta, p.gamma);
    if !(beta * gamma > 1.0) {
        return Err(Error::domain(format!(
            "thresholds need a ferromagnetic system, got beta * gamma = {}",
            beta * gamma
        )));
    }
    if !(beta < gamma) {
        return Err(Error::domain(format!(
            "thresholds need beta < gamma, got beta = {beta}, gamma = {gamma}"
        )));
    }
    let s = (beta * gamma).sqrt();
    let delta = ((s + 1.0) / (s - 1.0)).floor() as u32 + 1;
    let mut d = 1u32;
    while !(beta * (beta * gamma).powi(d as i32) > 1.0) {
        d += 1;
        if d > 1_000_000 {
            return Err(Error::numeric("no arity d with beta (beta gamma)^d > 1"));
        }
    }
    let bounded = (gamma / beta).powf(delta as f64 / 2.0);
    let (uniform, construction, note) = if beta <= 1.0 {
        let log_margin = (beta * (beta * gamma).powi(d as i32)).ln();
        let second = (beta * gamma - 1.0) / beta * (1.0 + (d as f64 + 1.0) / log_margin);
        let uniform = gamma.powi(d as i32) * bounded.max(second);
        let note = (beta == 1.0 && gamma == 2.0).then(|| {
            format!(
                "closed-form bound evaluates to {uniform}; the figure 12 sometimes quoted for (beta, gamma) = (1, 2) does not follow from it"
            )
        });
        (Some(uniform), Some(gamma.powi(d as i32) * second), note)
    } else {
        (None, None, None)
    };
    let beta_gt_1 = (beta > 1.0).then(|| (gamma - 1.0) / (beta - 1.0));
    Ok(HardnessThresholds {
        delta,
        d,
        mu_bound_bounded_fields: bounded,
        mu_bound_uniform_field: uniform,
        mu_bound_beta_gt_1: beta_gt_1,
        construction_field_bound: construction,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(beta: f64, gamma: f64, mu: f64) -> SpinParams {
        SpinParams::new(beta, gamma, mu).unwrap()
    }

    fn rp(beta: f64, gamma: f64, mu: f64, d: u32) -> RecursionParams {
        RecursionParams::new(sp(beta, gamma, mu), d).unwrap()
    }

    #[test]
    fn h_values() {
        let p = sp(1.0, 2.0, 20.0);
        assert_eq!(h(0.0, &p), 0.5);
        assert!((h(20.0, &p) - 21.0 / 22.0).abs() < 1e-15);
        assert!((h(18.0, &p) - 0.95).abs() < 1e-15);
    }

    #[test]
    fn f_values() {
        let r = rp(1.0, 2.0, 20.0, 1);
        assert!((r.f(20.0) - 210.0 / 11.0).abs() < 1e-12);
        assert_eq!(r.f(0.0), 10.0);
    }

    #[test]
    fn mu_star_matches_quadratic_root() {
        let r = rp(1.0, 2.0, 20.0, 1);
        let star = solve_mu_star(&r, MU_STAR_TOLERANCE).unwrap();
        // x = 20 (x + 1)/(x + 2)  <=>  x^2 - 18 x - 20 = 0
        let closed = (18.0 + 404f64.sqrt()) / 2.0;
        assert!((star - closed).abs() < 1e-12 * closed);
        assert!((r.f(star) - star).abs() <= MU_STAR_TOLERANCE * star);
        assert!(10.0 < star && star < 20.0);
    }

    #[test]
    fn iterates_decrease_towards_mu_star() {
        let r = rp(1.0, 2.0, 20.0, 1);
        let xs = fixed_point_iterates(&r, 3);
        assert_eq!(xs[0], 20.0);
        assert!((xs[1] - 19.0909090909).abs() < 1e-9);
        assert!((xs[2] - 19.0517241379).abs() < 1e-9);
        let star = solve_mu_star(&r, MU_STAR_TOLERANCE).unwrap();
        let gaps = fixed_point_gaps(&r, star, 60);
        assert!(gaps.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        assert!((gaps[2] - (xs[2] - star)).abs() < 1e-12);
    }

    #[test]
    fn decay_constants_for_reference_point() {
        let r = rp(1.0, 2.0, 20.0, 1);
        let dc = decay_constants(&r).unwrap();
        assert!((dc.alpha - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
        // g(mu*) = f'(mu*) = 20 / (mu* + 2)^2 for these parameters
        let star = (18.0 + 404f64.sqrt()) / 2.0;
        assert!((dc.g_at_fixed_point - 20.0 / (star + 2.0).powi(2)).abs() < 1e-12);
        assert!((dc.g_at_fixed_point - 0.045137).abs() < 1e-6);
        assert!(dc.decay_rate >= dc.g_at_fixed_point && dc.decay_rate < 1.0);
        assert!(dc.iota >= 20f64.ln());
        assert!(dc.iota >= dc.eta * dc.decay_rate.powi(-(dc.t0 as i32)));
        assert!(dc.eta > 0.0 && dc.eta < dc.mu_star);
    }

    #[test]
    fn h_inverse() {
        let p = sp(1.0, 2.0, 20.0);
        assert!((solve_h_inverse(0.95, &p).unwrap() - 18.0).abs() < 1e-12);
        let r = rp(1.0, 2.0, 20.0, 1);
        let star = solve_mu_star(&r, MU_STAR_TOLERANCE).unwrap();
        let back = solve_h_inverse(h(star, &p), &p).unwrap();
        assert!((back - star).abs() < 1e-9 * star);
        assert!(solve_h_inverse(1.0, &p).is_err());
        assert!(solve_h_inverse(0.5, &p).is_err());
    }

    #[test]
    fn recursion_params_validation() {
        assert!(RecursionParams::new(sp(1.0, 0.9, 1.0), 1).is_err());
        assert!(RecursionParams::new(sp(1.5, 2.0, 1.0), 1).is_err());
        assert!(RecursionParams::new(sp(0.5, 4.0, 1.0), 1).is_err());
        assert!(RecursionParams::new(sp(0.5, 4.0, 1.0), 2).is_ok());
        assert!(RecursionParams::new(sp(1.0, 2.0, 1.0), 0).is_err());
    }

    #[test]
    fn construction_bound_for_reference_point() {
        let r = rp(1.0, 2.0, 20.0, 1);
        let expected = 2.0 * (1.0 + 2.0 / 2f64.ln());
        assert!((r.construction_field_bound() - expected).abs() < 1e-12);
        assert!(r.require_construction_field().is_ok());
        assert!(rp(1.0, 2.0, 5.0, 1).require_construction_field().is_err());
    }

    #[test]
    fn thresholds_reference_values() {
        let t = hardness_thresholds(&sp(1.0, 2.0, 1.0)).unwrap();
        assert_eq!((t.delta, t.d), (6, 1));
        assert!((t.mu_bound_bounded_fields - 8.0).abs() < 1e-12);
        assert!((t.mu_bound_uniform_field.unwrap() - 16.0).abs() < 1e-12);
        assert!(t.note.is_some());
        assert!(t.mu_bound_beta_gt_1.is_none());

        let t = hardness_thresholds(&sp(2.0, 3.0, 1.0)).unwrap();
        assert_eq!(t.mu_bound_beta_gt_1, Some(2.0));
        assert!(t.mu_bound_uniform_field.is_none());

        assert!(hardness_thresholds(&sp(0.5, 1.0, 1.0)).is_err());
        assert!(hardness_thresholds(&sp(2.0, 2.0, 1.0)).is_err());
        assert!(hardness_thresholds(&sp(3.0, 2.0, 1.0)).is_err());
    }

    #[test]
    fn bounded_field_degree_matches_anti_ising_degree() {
        for (beta, gamma) in [(1.0, 2.0), (0.8, 2.0), (2.0, 3.0), (0.5, 4.0), (1.0, 10.0)] {
            let t = hardness_thresholds(&sp(beta, gamma, 1.0)).unwrap();
            let b = 1.0 / (beta * gamma).sqrt();
            assert_eq!(anti_ising_hard_degree(b).unwrap(), t.delta);
        }
    }

    #[test]
    fn uniqueness_threshold_domain() {
        assert!(uniqueness_threshold(0.6, 4).is_err()); // 0.6 = (4 - 1)/(4 + 1)
        assert!(uniqueness_threshold(0.2, 2).is_err());
        assert!(uniqueness_threshold(0.0, 4).is_err());
        for (beta, delta) in [(0.2, 4), (0.59, 4), (0.1, 3), (0.49, 3), (0.7, 6)] {
            assert!(uniqueness_threshold(beta, delta).unwrap() > 1.0);
        }
    }
}
