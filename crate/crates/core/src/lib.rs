//! Numerics on the cone of positive-definite symmetric matrices.

pub mod beltrami;
pub mod eisenstein;
pub mod error;
pub mod fd;
pub mod json;
pub mod field;
pub mod geometry;
pub mod kbessel;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod reduction;
pub mod rng;
pub mod selberg;
pub mod special;
pub mod tori;
pub mod volume;

pub use error::{Error, Result};
pub use linalg::{IntMatrix, SpdMatrix, SymMatrix, UnimodularMatrix};
