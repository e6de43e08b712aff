//! Transformations that preserve the partition function up to an explicit
//! factor, each returned as a [`ReductionCertificate`].

pub mod bipartite;
pub mod certificate;
pub mod degree_one;
pub mod selfloop;

pub use bipartite::{bipartite_transform, two_coloring};
pub use certificate::{
    verify_reduction, Instance, Orientation, ReductionCertificate, Verifiable, Verification,
};
pub use degree_one::{contract_degree_one, contract_then_ising, to_ising, Pipeline};
pub use selfloop::{realize_field_selfloops, SelfLoopRealization};
