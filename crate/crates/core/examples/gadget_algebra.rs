//! Stars, d-ary trees and their combinations: closed-form fields checked
//! against brute force on the materialized graphs.

use twospin::gadgets::{star_convergence, tree_convergence, GadgetEvaluator, GadgetTree};
use twospin::recursion::RecursionParams;
use twospin::spin::{Enumerator, SpinParams};

fn main() -> twospin::Result<()> {
    let params = SpinParams::new(1.0, 2.0, 20.0)?;
    let mut eval = GadgetEvaluator::new(params.clone());
    let en = Enumerator::default();

    let gadgets = [
        GadgetTree::star(3),
        GadgetTree::tree(2, 2),
        GadgetTree::comb(vec![GadgetTree::star(2), GadgetTree::tree(1, 3)])?,
        GadgetTree::comb(vec![GadgetTree::comb(vec![GadgetTree::star(1)])?, GadgetTree::star(0)])?,
    ];
    for g in &gadgets {
        let graph = g.materialize(params.mu, 64)?;
        println!(
            "{:<60} size {:>2}  field {:.10}  brute {:.10}",
            serde_json::to_string(g)?,
            g.size(),
            eval.field(g),
            en.effective_field(&graph, &params)?
        );
    }

    println!("star fields decrease towards mu/gamma:");
    for row in star_convergence(&params, 5)? {
        println!("  w={} field={:.6} (bound {})", row.w, row.field, row.bound);
    }
    println!("tree fields approach mu* from above:");
    for row in tree_convergence(&RecursionParams::new(params, 1)?, 5)? {
        println!("  t={} ln(field/mu*)={:.3e} <= {:.3e}", row.t, row.log_ratio, row.log_bound);
    }
    Ok(())
}
