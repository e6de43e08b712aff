//! Exhaustive partition functions: a 4-cycle with a self-loop, its pinned
//! parts, and the effective field seen at one vertex.

use twospin::spin::{Enumerator, FieldedGraph, PinAssignment, Spin, SpinParams};

fn main() -> twospin::Result<()> {
    let params = SpinParams::new(1.0, 2.0, 3.0)?;
    let mut g = FieldedGraph::uniform(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], 3.0)?;
    g.add_edge(2, 2)?;
    g.set_output(Some(0))?;

    let en = Enumerator::default();
    let z = en.partition_function(&g, &params)?;
    let z0 = en.pinned_partition(&g, &params, &PinAssignment::single(0, Spin::Zero))?;
    let z1 = en.pinned_partition(&g, &params, &PinAssignment::single(0, Spin::One))?;
    println!("Z = {z}");
    println!("Z(v0 = 0) + Z(v0 = 1) = {z0} + {z1} = {}", z0 + z1);
    println!("effective field at v0 = {}", en.effective_field(&g, &params)?);
    println!("ln Z (log semiring) = {}", en.ln_partition_function(&g, &params)?);
    Ok(())
}
