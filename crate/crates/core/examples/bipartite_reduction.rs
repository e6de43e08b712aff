//! Anti-ferromagnetic Ising on a bipartite graph becomes a ferromagnetic
//! (beta, gamma) instance; the identity is checked exactly in Q(sqrt 2).

use twospin::reductions::{bipartite_transform, two_coloring};
use twospin::scalar::Surd;
use twospin::spin::{Enumerator, FieldedGraph, SpinParams};

fn main() -> twospin::Result<()> {
    // 6-cycle with a chord between opposite sides
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)];
    let g = FieldedGraph::uniform(6, &edges, Surd::from_integer(1))?;
    let left = two_coloring(&g)?;
    let target = SpinParams::new(Surd::from_integer(1), Surd::from_integer(2), Surd::parse("3/2")?)?;

    let cert = bipartite_transform(&g, &left, &target)?.verify(&Enumerator::default())?;
    let p = &cert.input.params;
    println!("input: beta = gamma = {}, field {}", p.beta, p.mu);
    println!("output fields: {:?}", cert.output.graph.fields().iter().map(|f| f.to_string()).collect::<Vec<_>>());
    println!("scale {} ({:?})", cert.scale, cert.orientation);
    println!("verification: {:?}", cert.verification);
    Ok(())
}
