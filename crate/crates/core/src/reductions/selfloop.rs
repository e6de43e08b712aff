use serde::Serialize;

use crate::error::{Error, Result};
use crate::gadgets::pow_u64;
use crate::spin::{FieldedGraph, SpinParams};

/// Largest number of bristles tried by the direct scan.
pub const BRISTLE_SCAN_LIMIT: u64 = 1_000_000;

/// A single output vertex with `x` self-loops and `y` pendant bristles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfLoopRealization {
    pub x: u64,
    pub y: u64,
    /// `mu (beta/gamma)^x h(mu)^y`.
    pub achieved: f64,
    /// `ln(achieved / target)`.
    pub log_residual: f64,
    #[serde(skip)]
    pub gadget: FieldedGraph,
}

/// Nonzero `q b - p a` with `|q b - p a| <= tol` from the continued fraction
/// of `b / a`, as `(p, q, q b - p a)`.
fn small_combination(a: f64, b: f64, tol: f64) -> Option<(u64, u64, f64)> {
    // p_n / q_n -> b / a, seeded with p_-2 = 0, p_-1 = 1, q_-2 = 1, q_-1 = 0
    let (mut p_prev, mut p) = (0u64, 1u64);
    let (mut q_prev, mut q) = (1u64, 0u64);
    let mut x = b / a;
    for _ in 0..64 {
        let digit = x.floor();
        if digit > u64::MAX as f64 / 4.0 {
            return None;
        }
        let digit_int = digit as u64;
        let p_next = digit_int.checked_mul(p)?.checked_add(p_prev)?;
        let q_next = digit_int.checked_mul(q)?.checked_add(q_prev)?;
        (p_prev, p, q_prev, q) = (p, p_next, q, q_next);
        let step = q as f64 * b - p as f64 * a;
        if step != 0.0 && step.abs() <= tol {
            return Some((p, q, step));
        }
        let frac = x - digit;
        if frac < 1e-15 {
            return None;
        }
        x = 1.0 / frac;
    }
    None
}

/// Walks from a residual of the right sign towards zero in steps of `q b - p a`.
fn lattice_solution(a: f64, b: f64, c: f64, (p, q, step): (u64, u64, f64)) -> Option<(u64, u64)> {
    let (x0, y0) = if step > 0.0 {
        ((-c / a).ceil().max(0.0), 0.0)
    } else {
        (0.0, (c / b).ceil().max(0.0))
    };
    let r0 = y0 * b - x0 * a - c;
    let j = (-r0 / step).round();
    let x = x0 + j * p as f64;
    let y = y0 + j * q as f64;
    (x >= 0.0 && y >= 0.0 && x < 2f64.powi(53) && y < 2f64.powi(53)).then_some((x as u64, y as u64))
}

/// Realizes `target` to within a factor `exp(1/m)` by `x` self-loops and `y`
/// bristles on one vertex, for `gamma > beta > 1` and
/// `mu > (gamma - 1) / (beta - 1)`.
///
/// With `a = ln(gamma/beta)`, `b = ln h(mu)` and `c = ln(target/mu)` this asks
/// for `|y b - x a - c| <= 1/m`. Bristle counts are scanned upwards, each with
/// its best `x`; a continued-fraction solution bounds the scan and serves as
/// the answer when the scan limit is reached first.
pub fn realize_field_selfloops(target: f64, m: u64, params: &SpinParams) -> Result<SelfLoopRealization> {
    let SpinParams { beta, gamma, mu } = *params;
    if !(gamma > beta && beta > 1.0) {
        return Err(Error::domain(format!("need gamma > beta > 1, got beta = {beta}, gamma = {gamma}")));
    }
    let floor = (gamma - 1.0) / (beta - 1.0);
    if !(mu > floor) {
        return Err(Error::domain(format!("mu = {mu} must exceed (gamma - 1)/(beta - 1) = {floor}")));
    }
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::domain(format!("target field must be positive, got {target}")));
    }
    if m == 0 {
        return Err(Error::domain("precision m must be positive"));
    }
    let a = (gamma / beta).ln();
    let b = params.h(&mu).ln();
    let c = (target / mu).ln();
    let tol = 1.0 / m as f64;
    let residual = |x: u64, y: u64| y as f64 * b - x as f64 * a - c;
    let best_x = |y: u64| ((y as f64 * b - c) / a).round().max(0.0) as u64;

    let fallback = small_combination(a, b, tol).and_then(|comb| lattice_solution(a, b, c, comb));
    let scan_end = fallback.map_or(BRISTLE_SCAN_LIMIT, |(_, y)| y.min(BRISTLE_SCAN_LIMIT));
    let mut best = (0u64, 0u64, f64::INFINITY);
    let mut found = None;
    for y in 0..=scan_end {
        let x = best_x(y);
        let r = residual(x, y).abs();
        if r < best.2 {
            best = (x, y, r);
        }
        if r <= tol {
            found = Some((x, y));
            break;
        }
    }
    let (x, y) = match found.or(fallback.filter(|&(x, y)| residual(x, y).abs() <= tol)) {
        Some(xy) => xy,
        None => {
            return Err(Error::Approximation {
                x: best.0,
                y: best.1,
                best_residual: best.2,
                tolerance: tol,
            })
        }
    };
    let achieved = mu * pow_u64(beta / gamma, x) * pow_u64(params.h(&mu), y);
    Ok(SelfLoopRealization {
        x,
        y,
        achieved,
        log_residual: (achieved / target).ln(),
        gadget: loop_bristle_gadget(x, y, mu)?,
    })
}

/// Output vertex `0` carrying `x` self-loops, joined to bristles `1..=y`.
pub fn loop_bristle_gadget(x: u64, y: u64, mu: f64) -> Result<FieldedGraph> {
    let mut edges = vec![(0usize, 0usize); x as usize];
    edges.extend((1..=y as usize).map(|i| (0, i)));
    let mut g = FieldedGraph::uniform(y as usize + 1, &edges, mu)?;
    g.set_output(Some(0))?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::effective_field;

    fn p() -> SpinParams {
        SpinParams::new(2.0, 3.0, 3.0).unwrap()
    }

    #[test]
    fn reference_case() {
        let r = realize_field_selfloops(5.0, 100, &p()).unwrap();
        assert_eq!((r.x, r.y), (1, 6));
        assert!((r.achieved - 2.0 * (7.0f64 / 6.0).powi(6)).abs() < 1e-12);
        assert!((r.achieved - 5.043252).abs() < 1e-6);
        assert!((r.log_residual - 0.00862).abs() < 1e-5);
        assert_eq!(r.gadget.len(), 7);
        let brute = effective_field(&r.gadget, &p()).unwrap();
        assert!((brute - r.achieved).abs() < 1e-12 * r.achieved);
    }

    #[test]
    fn identity_target() {
        let r = realize_field_selfloops(3.0, 7, &p()).unwrap();
        assert_eq!((r.x, r.y), (0, 0));
        assert_eq!(r.achieved, 3.0);
    }

    #[test]
    fn precision_sweep() {
        for target in [0.5, 2.0, 5.0, 10.0, 1e-3, 400.0] {
            for m in [10, 100, 1_000, 10_000] {
                let r = realize_field_selfloops(target, m, &p()).unwrap();
                assert!(r.log_residual.abs() <= 1.0 / m as f64, "{target} {m}");
            }
        }
    }

    #[test]
    fn continued_fraction_fallback_is_valid() {
        let (a, b) = ((1.5f64).ln(), (7.0f64 / 6.0).ln());
        for m in [10.0, 1e3, 1e5] {
            let c = (0.37f64).ln();
            let comb = small_combination(a, b, 1.0 / m).unwrap();
            let (x, y) = lattice_solution(a, b, c, comb).unwrap();
            assert!((y as f64 * b - x as f64 * a - c).abs() <= 1.0 / m);
        }
    }

    #[test]
    fn preconditions() {
        assert!(realize_field_selfloops(1.0, 10, &SpinParams::new(1.0, 2.0, 5.0).unwrap()).is_err());
        assert!(realize_field_selfloops(1.0, 10, &SpinParams::new(2.0, 3.0, 2.0).unwrap()).is_err());
        assert!(realize_field_selfloops(-1.0, 10, &p()).is_err());
        assert!(realize_field_selfloops(1.0, 0, &p()).is_err());
    }
}
