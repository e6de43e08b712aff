//! Contract degree-one vertices, then rewrite as a ferromagnetic Ising
//! instance; all three certificates are verified exactly.

use twospin::reductions::contract_then_ising;
use twospin::scalar::Surd;
use twospin::spin::{Enumerator, FieldedGraph, SpinParams};

fn main() -> twospin::Result<()> {
    // triangle with a pendant path 2-3-4
    let edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)];
    let g = FieldedGraph::uniform(5, &edges, Surd::from_integer(2))?;
    let params = SpinParams::new(Surd::from_integer(2), Surd::from_integer(4), Surd::from_integer(2))?;

    let run = contract_then_ising(&g, &params)?;
    let en = Enumerator::default();
    for (name, cert) in [("contraction", run.contraction), ("ising", run.ising), ("composed", run.composed)] {
        let cert = cert.verify(&en)?;
        println!(
            "{name:<12} {} -> {} vertices, scale {}, {:?}",
            cert.input.graph.len(),
            cert.output.graph.len(),
            cert.scale,
            cert.verification
        );
    }
    Ok(())
}
