//! Acceptance checks. Each test prints one `[PASS]` or `[FAIL]` line with the
//! measured quantity, then asserts.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use twospin::construct::{sweep, target_grid};
use twospin::gadgets::{gadget_field, star_convergence, tree_convergence};
use twospin::random::{random_bipartite, random_gadget, random_graph, rng};
use twospin::recursion::{alpha, decay_constants, hardness_thresholds, RecursionParams};
use twospin::reductions::{
    bipartite_transform, contract_then_ising, realize_field_selfloops, to_ising, ReductionCertificate, Verifiable,
};
use twospin::scalar::Surd;
use twospin::spin::{Enumerator, FieldedGraph, SpinParams};

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id} ({name}): {detail}");
    assert!(pass, "criterion {id} failed: {detail}");
}

fn within(start: Instant, limit: Duration) -> bool {
    start.elapsed() < limit
}

fn exact(x: f64) -> Surd {
    Surd::from_f64_decimal(x).unwrap()
}

fn exact_params(beta: f64, gamma: f64, mu: f64) -> SpinParams<Surd> {
    SpinParams::new(exact(beta), exact(gamma), exact(mu)).unwrap()
}

fn verified<W: Verifiable>(cert: ReductionCertificate<W>, en: &Enumerator) -> bool {
    cert.verify(en).map(|c| c.verification.passed()).unwrap_or(false)
}

const PAIRS: [(f64, f64); 3] = [(1.0, 2.0), (0.8, 2.0), (2.0, 3.0)];

#[test]
fn criterion_1_bipartite_identity() {
    let start = Instant::now();
    let en = Enumerator::default();
    let mut r = rng(1);
    let mut exact_ok = 0;
    let mut float_ok = 0;
    let trials = 200;
    for i in 0..trials {
        let (beta, gamma) = PAIRS[i % 3];
        let mu = [1.01, 1.1, 2.0][(i / 3) % 3];
        let (shape, left) = random_bipartite(&mut r, 12, 5);
        let g = shape.with_field(exact(1.0)).unwrap();
        if verified(bipartite_transform(&g, &left, &exact_params(beta, gamma, mu)).unwrap(), &en) {
            exact_ok += 1;
        }
        let gf = shape.with_field(1.0).unwrap();
        let pf = SpinParams::new(beta, gamma, mu).unwrap();
        if verified(bipartite_transform(&gf, &left, &pf).unwrap(), &en) {
            float_ok += 1;
        }
    }
    let pass = exact_ok == trials && float_ok == trials && within(start, Duration::from_secs(60));
    report(
        1,
        "bipartite identity",
        pass,
        format!(
            "{exact_ok}/{trials} exact, {float_ok}/{trials} float (rel err <= 1e-9), {:.1?}",
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_2_contraction_ising_pipeline() {
    let start = Instant::now();
    let en = Enumerator::default();
    let mut r = rng(2);
    let trials = 200;
    let mut ok = 0;
    let mut worst_field = Surd::from_integer(0);
    for i in 0..trials {
        let (beta, gamma) = PAIRS[i % 3];
        let params = exact_params(beta, gamma, gamma / beta);
        let g = random_graph(&mut r, 12, 5).with_field(params.mu.clone()).unwrap();
        let run = contract_then_ising(&g, &params).unwrap();
        let ising = &run.ising.output.graph;
        // isolated vertices keep their field; the bound is for vertices with edges
        let degrees = ising.degrees();
        let fields_ok = ising
            .fields()
            .iter()
            .zip(&degrees)
            .filter(|(_, &deg)| deg > 0)
            .all(|(f, _)| {
                if *f > worst_field {
                    worst_field = f.clone();
                }
                *f <= Surd::from_integer(1)
            });
        let all_verified = verified(run.contraction, &en) && verified(run.ising, &en) && verified(run.composed, &en);
        if fields_ok && all_verified {
            ok += 1;
        }
    }

    // the worked triangle: Z = 40 = 2 sqrt 2 * 10 sqrt 2
    let tri = FieldedGraph::uniform(3, &[(0, 1), (1, 2), (2, 0)], 2.0).unwrap();
    let cert = to_ising(&tri, &SpinParams::new(1.0, 2.0, 2.0).unwrap()).unwrap();
    let z_in = en.partition_function(&cert.input.graph, &cert.input.params).unwrap();
    let z_out = en.partition_function(&cert.output.graph, &cert.output.params).unwrap();
    let tri_err = ((cert.scale * z_out - 40.0) / 40.0).abs();
    let tri_ok = (z_in - 40.0).abs() <= 1e-12 * 40.0 && tri_err <= 1e-12;

    let pass = ok == trials && tri_ok && within(start, Duration::from_secs(60));
    report(
        2,
        "contraction + Ising pipeline",
        pass,
        format!(
            "{ok}/{trials} exact with fields <= 1 (largest {worst_field}); triangle Z = {z_in}, rel err {tri_err:.1e}; {:.1?}",
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_3_fixed_point_stars_trees() {
    let start = Instant::now();
    let mut points = 0;
    let mut failures = Vec::new();
    for beta in [0.6f64, 0.8, 0.9, 1.0] {
        for gamma in [2.0f64, 3.0, 5.0] {
            for d in 1..=3u32 {
                if !(beta * gamma > 1.0 && beta * (beta * gamma).powi(d as i32) > 1.0) {
                    continue;
                }
                let probe = RecursionParams::new(SpinParams::new(beta, gamma, 1.0).unwrap(), d);
                let Ok(probe) = probe else { continue };
                let bound = probe.construction_field_bound();
                for factor in [1.05, 1.5, 3.0] {
                    let mu = bound * factor;
                    let rp = RecursionParams::new(SpinParams::new(beta, gamma, mu).unwrap(), d).unwrap();
                    points += 1;
                    let label = format!("({beta},{gamma},{mu:.3},{d})");
                    let dc = decay_constants(&rp).unwrap();
                    let di = d as i32;
                    if !(mu / gamma.powi(di) < dc.mu_star && dc.mu_star < beta.powi(di) * mu) {
                        failures.push(format!("{label} mu* bounds"));
                    }
                    if let Err(e) = star_convergence(&rp.params, 20) {
                        failures.push(format!("{label} stars: {e}"));
                    }
                    match tree_convergence(&rp, 20) {
                        Ok(rows) => {
                            if rows.iter().any(|row| !(row.log_ratio > 0.0 && row.log_ratio <= row.log_bound)) {
                                failures.push(format!("{label} tree ratio"));
                            }
                        }
                        Err(e) => failures.push(format!("{label} trees: {e}")),
                    }
                }
            }
        }
    }
    let pass = points >= 50 && failures.is_empty() && within(start, Duration::from_secs(60));
    report(
        3,
        "fixed point, star and tree bounds",
        pass,
        format!("{points} parameter points, {} failures {:?}; {:.1?}", failures.len(), failures, start.elapsed()),
    );
}

/// Largest tolerated deviation of a depth's log-size from the fitted line.
const SIZE_FIT_MAX_RESIDUAL: f64 = 1.0;

#[test]
fn criterion_4_construction_certification() {
    let start = Instant::now();
    let sets = [(1.0, 2.0, 20.0, 1), (0.8, 2.0, 30.0, 1), (1.0, 3.0, 60.0, 2), (0.5, 4.0, 200.0, 2)];
    let ells: Vec<u32> = (0..=8).collect();
    let mut reports = 0;
    let mut bad = Vec::new();
    let mut fits = Vec::new();
    for (beta, gamma, mu, d) in sets {
        let rp = RecursionParams::new(SpinParams::new(beta, gamma, mu).unwrap(), d).unwrap();
        let mu_star = decay_constants(&rp).unwrap().mu_star;
        let s = sweep(&rp, &ells, &target_grid(mu_star, 100)).unwrap();
        reports += s.rows.len();
        bad.extend(s.rows.iter().filter(|r| r.log_error.abs() > r.bound || r.log_error.is_nan()).map(|r| (r.ell, r.target)));
        let fit = s.size_fit.clone().unwrap();
        if !(fit.slope > 0.0 && fit.max_abs_residual <= SIZE_FIT_MAX_RESIDUAL) {
            bad.push((u32::MAX, fit.slope));
        }
        fits.push(format!("slope {:.3} resid {:.2}", fit.slope, fit.max_abs_residual));
    }
    let pass = bad.is_empty() && within(start, Duration::from_secs(300));
    report(
        4,
        "construction error and size",
        pass,
        format!(
            "{reports} reports, {} outside (ln gamma + ell) alpha^ell; size fits [{}]; {:.1?}",
            bad.len(),
            fits.join(", "),
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_5_gadget_oracle() {
    let start = Instant::now();
    let en = Enumerator::default();
    let params = [(1.0, 2.0, 20.0), (0.8, 2.0, 30.0), (2.0, 3.0, 3.0), (0.5, 4.0, 1.5), (1.0, 3.0, 60.0)];
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for i in 0..500 {
        let (beta, gamma, mu) = params[i % params.len()];
        let p = SpinParams::new(beta, gamma, mu).unwrap();
        let gadget = random_gadget(&mut r, 14);
        let g = gadget.materialize(mu, 14).unwrap();
        let brute = en.effective_field(&g, &p).unwrap();
        worst = worst.max(((gadget_field(&gadget, &p) - brute) / brute).abs());
    }
    let pass = worst <= 1e-10 && within(start, Duration::from_secs(120));
    report(
        5,
        "gadget field oracle",
        pass,
        format!("500 gadgets, worst relative error {worst:.2e}; {:.1?}", start.elapsed()),
    );
}

#[test]
fn criterion_6_selfloop_fields() {
    let start = Instant::now();
    let p = SpinParams::new(2.0, 3.0, 3.0).unwrap();
    let mut misses = Vec::new();
    for target in [0.5, 2.0, 5.0, 10.0] {
        for m in [10u64, 100, 1000] {
            let r = realize_field_selfloops(target, m, &p).unwrap();
            let ratio = r.achieved / target;
            let tol = 1.0 / m as f64;
            if !((-tol).exp() <= ratio && ratio <= tol.exp()) {
                misses.push((target, m));
            }
        }
    }
    let r = realize_field_selfloops(5.0, 100, &p).unwrap();
    let brute = Enumerator::default().effective_field(&r.gadget, &p).unwrap();
    let case_ok = (r.x, r.y) == (1, 6)
        && (r.achieved - 5.043252).abs() < 1e-6
        && ((brute - r.achieved) / r.achieved).abs() < 1e-12;
    let pass = misses.is_empty() && case_ok && within(start, Duration::from_secs(30));
    report(
        6,
        "self-loop and bristle fields",
        pass,
        format!(
            "12 targets, misses {misses:?}; (x,y)=({},{}) achieved {:.6}, brute force {:.6} on {} vertices; {:.1?}",
            r.x,
            r.y,
            r.achieved,
            brute,
            r.gadget.len(),
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_7_thresholds() {
    let t = hardness_thresholds(&SpinParams::new(1.0, 2.0, 1.0).unwrap()).unwrap();
    let note_ok = t.note.as_deref().is_some_and(|n| n.contains("16") && n.contains("12"));
    let pass = t.delta == 6 && t.d == 1 && t.mu_bound_uniform_field == Some(16.0) && note_ok;
    report(
        7,
        "threshold formulas",
        pass,
        format!(
            "delta {} d {} uniform-field bound {:?}, note present: {note_ok}",
            t.delta, t.d, t.mu_bound_uniform_field
        ),
    );
}

#[test]
fn criterion_8_derivative_bound() {
    let start = Instant::now();
    let pairs = [(1.0, 2.0), (0.8, 2.0), (2.0, 3.0), (0.5, 4.0), (1.0, 10.0)];
    let n = 100_000;
    let mut worst_gap = f64::NEG_INFINITY;
    for (beta, gamma) in pairs {
        let p = SpinParams::new(beta, gamma, 1.0).unwrap();
        let a = alpha(&p);
        // log-spaced grid centred on the maximiser sqrt(gamma / beta)
        let centre = (gamma / beta).sqrt().ln();
        for i in 0..n {
            let x = (centre - 20.0 + 40.0 * i as f64 / (n - 1) as f64).exp();
            let g = (beta * gamma - 1.0) * x / ((x + gamma) * (beta * x + 1.0));
            worst_gap = worst_gap.max(g - a);
        }
    }
    let pass = worst_gap <= 1e-12 && within(start, Duration::from_secs(10));
    report(
        8,
        "derivative bound",
        pass,
        format!("5 pairs x {n} points, max(g - alpha) = {worst_gap:.2e}; {:.1?}", start.elapsed()),
    );
}
