//! The largest fixed point of x -> mu h(x)^d, its bracketing bounds and the
//! contraction constants used by the gadget construction.

use twospin::recursion::{decay_constants, fixed_point_gaps, fixed_point_iterates, RecursionParams};
use twospin::spin::SpinParams;

fn main() -> twospin::Result<()> {
    for (beta, gamma, mu, d) in [(1.0, 2.0, 20.0, 1), (0.8, 2.0, 30.0, 1), (1.0, 3.0, 60.0, 2)] {
        let rp = RecursionParams::new(SpinParams::new(beta, gamma, mu)?, d)?;
        let dc = decay_constants(&rp)?;
        println!("beta={beta} gamma={gamma} mu={mu} d={d}");
        println!("  mu* = {:.10}  in ({}, {})", dc.mu_star, mu / gamma.powi(d as i32), beta.powi(d as i32) * mu);
        println!("  iterates {:?}", fixed_point_iterates(&rp, 4));
        println!("  gaps     {:?}", fixed_point_gaps(&rp, dc.mu_star, 4));
        println!(
            "  alpha={:.6} c={:.6} eta={:.6} t0={} iota={:.6}",
            dc.alpha, dc.decay_rate, dc.eta, dc.t0, dc.iota
        );
    }
    Ok(())
}
