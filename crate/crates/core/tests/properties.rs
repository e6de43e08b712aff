use proptest::prelude::*;

use twospin::construct::Constructor;
use twospin::gadgets::{gadget_field, GadgetTree};
use twospin::random::{random_gadget, rng};
use twospin::recursion::{alpha, decay_constants, h, solve_h_inverse, uniqueness_threshold, RecursionParams};
use twospin::scalar::{Scalar, Surd};
use twospin::spin::{Enumerator, FieldedGraph, PinAssignment, Spin, SpinParams};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Small multigraph: vertex count, edges (loops allowed) and per-vertex fields.
fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<f64>)> {
    (1usize..=7).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0..n, 0..n), 0..12),
            prop::collection::vec(0.1f64..5.0, n),
        )
    })
}

fn build(n: usize, edges: &[(usize, usize)], fields: &[f64]) -> FieldedGraph {
    let mut g = FieldedGraph::uniform(n, edges, 1.0).unwrap();
    for (v, &f) in fields.iter().enumerate() {
        g.set_field(v, f);
    }
    g
}

/// Ferromagnetic parameters with beta < gamma.
fn ferro() -> impl Strategy<Value = SpinParams> {
    (0.2f64..3.0, 1.01f64..4.0, 0.5f64..50.0).prop_map(|(beta, ratio, mu)| {
        let gamma = (beta * ratio).max(1.05 / beta).max(beta * 1.01);
        SpinParams::new(beta, gamma, mu).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relabelling_preserves_z(((n, edges, fields), perm) in graph().prop_flat_map(|g| {
        let n = g.0;
        (Just(g), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
    }), p in ferro()) {
        let moved: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let mut moved_fields = vec![0.0; n];
        for v in 0..n {
            moved_fields[perm[v]] = fields[v];
        }
        let z = Enumerator::default().partition_function(&build(n, &edges, &fields), &p).unwrap();
        let z2 = Enumerator::default().partition_function(&build(n, &moved, &moved_fields), &p).unwrap();
        prop_assert!(close(z, z2, 1e-12));
    }

    #[test]
    fn isolated_vertex_scales_z((n, edges, fields) in graph(), extra in 0.1f64..5.0, p in ferro()) {
        let g = build(n, &edges, &fields);
        let mut g2 = g.clone();
        g2.add_vertex("extra", extra);
        let en = Enumerator::default();
        let z = en.partition_function(&g, &p).unwrap();
        prop_assert!(close(en.partition_function(&g2, &p).unwrap(), z * (extra + 1.0), 1e-12));
    }

    #[test]
    fn pinning_splits_z((n, edges, fields) in graph(), v in 0usize..7, p in ferro()) {
        let v = v % n;
        let g = build(n, &edges, &fields);
        let en = Enumerator::default();
        let z0 = en.pinned_partition(&g, &p, &PinAssignment::single(v, Spin::Zero)).unwrap();
        let z1 = en.pinned_partition(&g, &p, &PinAssignment::single(v, Spin::One)).unwrap();
        prop_assert!(close(z0 + z1, en.partition_function(&g, &p).unwrap(), 1e-12));
    }

    #[test]
    fn log_semiring_matches((n, edges, fields) in graph(), p in ferro()) {
        let g = build(n, &edges, &fields);
        let en = Enumerator::default();
        let z = en.partition_function(&g, &p).unwrap();
        prop_assert!(close(en.ln_partition_function(&g, &p).unwrap(), z.ln(), 1e-12));
    }

    #[test]
    fn exact_matches_float(n in 1usize..=6, edges in prop::collection::vec((0usize..6, 0usize..6), 0..9),
                           beta in 1u32..8, gamma in 8u32..20, mu in 1u32..10) {
        let edges: Vec<_> = edges.into_iter().map(|(u, v)| (u % n, v % n)).collect();
        let q = |k: u32| Surd::parse(&format!("{k}/4")).unwrap();
        let pq = SpinParams::new(q(beta), q(gamma), q(mu)).unwrap();
        let pf = SpinParams::new(beta as f64 / 4.0, gamma as f64 / 4.0, mu as f64 / 4.0).unwrap();
        let en = Enumerator::default();
        let exact = en.partition_function(&FieldedGraph::uniform(n, &edges, q(mu)).unwrap(), &pq).unwrap();
        let float = en.partition_function(&FieldedGraph::uniform(n, &edges, mu as f64 / 4.0).unwrap(), &pf).unwrap();
        prop_assert!(close(exact.to_f64(), float, 1e-12));
    }

    #[test]
    fn h_is_increasing(p in ferro(), x in 0.0f64..100.0, dx in 1e-6f64..10.0) {
        prop_assert!(h(x, &p) < h(x + dx, &p));
    }

    #[test]
    fn h_growth_bounds(p in ferro(), x in 0.0f64..100.0, t in 0.0f64..10.0) {
        let tol = 1e-12 * (1.0 + t) * h(x, &p);
        prop_assert!(h(x + t, &p) <= (1.0 + t) * h(x, &p) + tol);
        prop_assert!(h((1.0 + t) * x, &p) <= (1.0 + t) * h(x, &p) + tol);
    }

    #[test]
    fn derivative_below_alpha(p in ferro(), lnx in -20.0f64..20.0) {
        let (beta, gamma, x) = (p.beta, p.gamma, lnx.exp());
        let g = (beta * gamma - 1.0) * x / ((x + gamma) * (beta * x + 1.0));
        prop_assert!(g <= alpha(&p) + 1e-12);
    }

    #[test]
    fn h_inverse_round_trip(p in ferro(), x in 0.01f64..100.0) {
        let back = solve_h_inverse(h(x, &p), &p).unwrap();
        prop_assert!(close(back, x, 1e-8));
    }

    #[test]
    fn split_equation_has_root(beta in 0.6f64..1.0, gamma in 2.0f64..5.0, d in 1u32..=3,
                               factor in 1.01f64..4.0, u in 0.0f64..1.0) {
        prop_assume!(beta * (beta * gamma).powi(d as i32) > 1.0);
        let probe = RecursionParams::new(SpinParams::new(beta, gamma, 1.0).unwrap(), d).unwrap();
        let mu = probe.construction_field_bound() * factor;
        let rp = RecursionParams::new(SpinParams::new(beta, gamma, mu).unwrap(), d).unwrap();
        let mu_star = decay_constants(&rp).unwrap().mu_star;
        // any mu1 in (mu* h(mu), mu*]
        let lo = mu_star * rp.h(mu);
        let mu1 = lo + (mu_star - lo) * u.max(1e-9);
        let f = |x: f64| mu * rp.h(x).powi(d as i32) - mu1;
        prop_assert!(f(0.0) <= 0.0 && f(mu_star) >= 0.0);
    }

    #[test]
    fn construction_within_bound(target in 0.01f64..19.04, ell in 0u32..=6) {
        let rp = RecursionParams::new(SpinParams::new(1.0, 2.0, 20.0).unwrap(), 1).unwrap();
        let r = Constructor::new(&rp).unwrap().certify(ell, target).unwrap();
        prop_assert!(r.within_bound && r.trace_consistent);
        prop_assert!(r.log_error.abs() <= r.bound);
    }

    #[test]
    fn gadget_json_round_trip(seed in any::<u64>()) {
        let gadget = random_gadget(&mut rng(seed), 40);
        let text = serde_json::to_string(&gadget).unwrap();
        let back: GadgetTree = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &gadget);
        let p = SpinParams::new(1.0, 2.0, 20.0).unwrap();
        prop_assert_eq!(gadget_field(&back, &p), gadget_field(&gadget, &p));
    }
}

/// Distinct limits of the two-step map started from both extremes signal
/// non-uniqueness; computed without the fixed point or its derivative.
fn two_phases(beta: f64, delta: u32, mu: f64) -> bool {
    let f = |x: f64| mu * ((beta * x + 1.0) / (x + beta)).powi(delta as i32);
    let (mut lo, mut hi) = (f(1e300), f(0.0));
    for _ in 0..200_000 {
        lo = f(f(lo));
        hi = f(f(hi));
    }
    (hi / lo).ln().abs() > 1e-6
}

#[test]
fn uniqueness_threshold_matches_two_step_oracle() {
    for (beta, delta) in [(0.2, 4), (0.1, 3), (0.3, 5), (0.45, 6)] {
        let mu_c = uniqueness_threshold(beta, delta).unwrap();
        assert!(mu_c > 1.0);
        assert!(two_phases(beta, delta, mu_c * 0.98), "beta {beta} delta {delta}: unique below {mu_c}");
        assert!(!two_phases(beta, delta, mu_c * 1.02), "beta {beta} delta {delta}: two phases above {mu_c}");
        assert!(!two_phases(beta, delta, 1.0 / (mu_c * 1.02)));
    }
}

#[test]
fn uniqueness_threshold_reference_value() {
    // dense scan of ln mu with the two-step oracle brackets mu_c for beta = 0.2, Delta = 4
    let mu_c = uniqueness_threshold(0.2, 4).unwrap();
    let mut last_two = 0.0;
    for i in 0..200 {
        let ln_mu = 7.0 + i as f64 * 0.01;
        if two_phases(0.2, 4, ln_mu.exp()) {
            last_two = ln_mu;
        }
    }
    assert!((mu_c.ln() - last_two).abs() < 0.02, "{} vs {last_two}", mu_c.ln());
}
