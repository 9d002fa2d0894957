//! Decision procedures for MDS, involutory, orthogonal, semi-involutory and
//! semi-orthogonal circulant matrices over GF(2^m), plus exhaustive and
//! seeded-random scans that check the trace implications those properties
//! carry.

pub mod circulant;
pub mod cli;
pub mod error;
pub mod exec;
pub mod field;
pub mod matrix;
pub mod props;
pub mod verify;

pub use circulant::Circulant;
pub use error::{Error, Result};
pub use field::{Element, Field};
pub use matrix::{DiagonalMatrix, Matrix};
