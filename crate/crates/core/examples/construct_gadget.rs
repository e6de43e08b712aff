//! Build gadgets for a few targets at increasing depth and show that the
//! log-error stays under (ln gamma + ell) alpha^ell.

use twospin::construct::{sweep, target_grid, Constructor};
use twospin::recursion::RecursionParams;
use twospin::spin::SpinParams;

fn main() -> twospin::Result<()> {
    let rp = RecursionParams::new(SpinParams::new(1.0, 2.0, 20.0)?, 1)?;
    let mut ctx = Constructor::new(&rp)?;
    println!("mu* = {:.10}", ctx.mu_star());

    for target in [2.0, 7.5, 15.0] {
        for ell in [1, 3, 5] {
            let r = ctx.certify(ell, target)?;
            println!(
                "target {target:>5} ell {ell}: achieved {:.10}  |ln err| {:.2e} <= {:.2e}  size {}",
                r.achieved,
                r.log_error.abs(),
                r.bound,
                r.gadget.size()
            );
        }
    }

    let (_, trace) = ctx.construct_traced(2, 7.5)?;
    for level in &trace {
        println!("level {}: target {:.6} k={} splits={} {:?}", level.ell, level.target, level.k, level.steps.len(), level.terminal);
    }

    let ells: Vec<u32> = (0..=6).collect();
    let s = sweep(&rp, &ells, &target_grid(ctx.mu_star(), 50))?;
    println!("sweep: all within bound = {}", s.all_within_bound());
    for (ell, worst) in s.worst_error_by_depth() {
        println!("  ell {ell}: worst |ln err| {worst:.3e}");
    }
    if let Some(fit) = s.size_fit {
        println!("ln size ~ {:.3} + {:.3} ell", fit.intercept, fit.slope);
    }
    Ok(())
}
