//! Spectral analysis of substitution tiling dynamical systems.

pub mod algebraic;
pub mod birkhoff;
pub mod cocycle;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod linalg;
pub mod quadrature;
pub mod selfaffine;
pub mod tiling;
pub mod weakmixing;

pub use error::{Error, Result};
