//! Realize arbitrary fields with self-loops and pendant bristles when
//! gamma > beta > 1, and confirm the small ones by enumeration.

use twospin::reductions::realize_field_selfloops;
use twospin::spin::{Enumerator, SpinParams};

fn main() -> twospin::Result<()> {
    let params = SpinParams::new(2.0, 3.0, 2.5)?;
    let en = Enumerator::default();
    for target in [0.5, 2.0, 5.0, 10.0] {
        for m in [10, 100, 1000] {
            let r = realize_field_selfloops(target, m, &params)?;
            let check = if r.gadget.len() <= en.limit {
                format!("{:.10}", en.effective_field(&r.gadget, &params)?)
            } else {
                "too large to enumerate".into()
            };
            println!(
                "target {target:>4} m {m:>4}: x={:<4} y={:<6} achieved {:.10} |residual| {:.2e} <= {:.2e}  brute {check}",
                r.x,
                r.y,
                r.achieved,
                r.log_residual.abs(),
                1.0 / m as f64
            );
        }
    }
    Ok(())
}
