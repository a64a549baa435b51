//! Exact combinatorial engine for Z_2^r Galois covers of the projective plane.

pub mod cover;
pub mod group;
pub mod lattice;
pub mod normalize;
pub mod invariants;
pub mod config;
pub mod classify;
pub mod census;
