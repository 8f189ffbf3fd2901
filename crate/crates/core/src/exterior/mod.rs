//! Alternating forms with signature metrics and finite-difference calculus on grids.

pub mod calculus;
pub mod form;
pub mod grid;
pub mod gridfile;

pub use calculus::{dz_dzbar, exterior_derivative_grid, exterior_derivative_mixed, wirtinger};
pub use form::{
    combination_rank, combinations, double_star_sign, volume_form, AlternatingForm, Orientation, Rational,
    Scalar, Signature,
};
pub use grid::GridField;
pub use gridfile::GridFile;
