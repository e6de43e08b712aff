//! Degree and field thresholds for a few parameter pairs, plus the
//! uniqueness curve of the anti-ferromagnetic Ising model on a 4-regular tree.

use twospin::recursion::{hardness_thresholds, uniqueness_threshold};
use twospin::spin::SpinParams;

fn main() -> twospin::Result<()> {
    for (beta, gamma) in [(1.0, 2.0), (0.5, 4.0), (2.0, 3.0)] {
        let t = hardness_thresholds(&SpinParams::new(beta, gamma, 1.0)?)?;
        println!("({beta}, {gamma}): {}", serde_json::to_string(&t)?);
    }
    for beta in [0.1, 0.2, 0.4, 0.55] {
        println!("Delta=4 beta={beta}: mu_c = {:.6}", uniqueness_threshold(beta, 4)?);
    }
    Ok(())
}
