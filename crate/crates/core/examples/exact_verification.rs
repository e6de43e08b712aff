//! Exact arithmetic in Q(sqrt r): the same partition function in f64 and as
//! a surd, and a mismatched radicand caught as an error.

use twospin::scalar::{Scalar, Surd};
use twospin::spin::{Enumerator, FieldedGraph, SpinParams};

fn main() -> twospin::Result<()> {
    let s = Surd::from_integer(2).sqrt().expect("2 is a rational square-root argument");
    let params = SpinParams::new(Surd::from_integer(1), Surd::from_integer(2), s.clone())?;
    let g = FieldedGraph::uniform(3, &[(0, 1), (1, 2), (2, 0)], s)?;
    let en = Enumerator::default();
    let exact = en.partition_function(&g, &params)?;
    let float = en.partition_function(&g.map_fields(|f| f.to_f64()), &SpinParams::new(1.0, 2.0, 2f64.sqrt())?)?;
    println!("exact Z = {exact} ~ {}", exact.to_f64());
    println!("float Z = {float}");

    let mixed = Surd::from_integer(3).sqrt().unwrap() * Surd::from_integer(2).sqrt().unwrap();
    println!("sqrt3 * sqrt2 -> {:?}", mixed.check());
    Ok(())
}
