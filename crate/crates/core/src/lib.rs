//! Numerical workbench for semi-flat G2 structures, Monge-Ampère and Toda
//! reductions, and harmonic sequences of minimal surfaces in quadrics.

pub mod cone;
pub mod error;
pub mod exterior;
pub mod fixtures;
pub mod g2;
pub mod linalg;
pub mod monge_ampere;
pub mod poly;
pub mod quadric;
pub mod report;
pub mod semiflat;
pub mod toda;

pub use error::{Error, Result};
