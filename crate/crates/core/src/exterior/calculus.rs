//! Finite-difference exterior calculus on [`GridField`]s.
//!
//! A k-form field on `R^n` stores its `C(n, k)` coefficients per node in the
//! lexicographic multi-index order of [`combinations`]. The grid axes are the
//! first `d` coordinates; any remaining `n - d` coordinates are directions in
//! which the coefficients are constant (fibre directions), so `d` only sees the
//! grid axes.

use crate::error::{Error, Result};
use crate::exterior::form::{combination_rank, combinations};
use crate::exterior::grid::GridField;

/// For each (k+1)-index `J`: the terms `(axis, rank of J∖{axis}, sign)` with
/// `e^axis ∧ e^{J∖axis} = sign · e^J`.
fn derivative_table(n: usize, k: usize, grid_dim: usize) -> Vec<Vec<(usize, usize, f64)>> {
    combinations(n, k + 1)
        .into_iter()
        .map(|j| {
            j.iter()
                .enumerate()
                .filter(|(_, &a)| a < grid_dim)
                .map(|(pos, &a)| {
                    let rest: Vec<usize> = j.iter().copied().filter(|&b| b != a).collect();
                    let rank = combination_rank(n, &rest).expect("subset of valid index");
                    let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                    (a, rank, sign)
                })
                .collect()
        })
        .collect()
}

/// Discrete `d` of a k-form field on `R^n` whose first `grid.dim()` coordinates are the grid axes.
pub fn exterior_derivative_mixed(field: &GridField, ambient: usize, degree: usize) -> Result<GridField> {
    let d = field.dim();
    if ambient < d {
        return Err(Error::InvalidDegree(format!("ambient dimension {ambient} below grid dimension {d}")));
    }
    let ncomp = combinations(ambient, degree).len();
    if field.components() != ncomp {
        return Err(Error::ShapeMismatch(format!(
            "{degree}-form on R^{ambient} needs {ncomp} components, field has {}",
            field.components()
        )));
    }
    if degree + 1 > ambient {
        return Err(Error::InvalidDegree(format!(
            "cannot differentiate a {degree}-form on R^{ambient}"
        )));
    }
    let partials = field.gradient()?;
    let table = derivative_table(ambient, degree, d);
    let out_comp = table.len();
    field.map_nodes(out_comp, |n, _, out| {
        for (j, terms) in table.iter().enumerate() {
            out[j] = terms
                .iter()
                .map(|&(a, rank, sign)| sign * partials[a].node(n)[rank])
                .sum();
        }
    })
}

/// Discrete `d` of a k-form field on the grid's own coordinate space.
pub fn exterior_derivative_grid(field: &GridField, degree: usize) -> Result<GridField> {
    exterior_derivative_mixed(field, field.dim(), degree)
}

/// `(∂_z f, ∂_z̄ f)` for a field of complex values `(re, im)` pairs on a 2D grid,
/// with `z = x + iy`, `∂_z = ½(∂_x − i∂_y)`, `∂_z̄ = ½(∂_x + i∂_y)`.
pub fn wirtinger(field: &GridField) -> Result<(GridField, GridField)> {
    if field.dim() != 2 {
        return Err(Error::InvalidGrid(format!("Wirtinger derivatives need a 2D grid, got {}D", field.dim())));
    }
    if field.components() % 2 != 0 {
        return Err(Error::ShapeMismatch("complex field needs an even component count".into()));
    }
    let fx = field.partial(0)?;
    let fy = field.partial(1)?;
    let c = field.components();
    let dz = fx.zip_map(&fy, c, |a, b, o| {
        for k in (0..c).step_by(2) {
            o[k] = 0.5 * (a[k] + b[k + 1]);
            o[k + 1] = 0.5 * (a[k + 1] - b[k]);
        }
    })?;
    let dzb = fx.zip_map(&fy, c, |a, b, o| {
        for k in (0..c).step_by(2) {
            o[k] = 0.5 * (a[k] - b[k + 1]);
            o[k + 1] = 0.5 * (a[k + 1] + b[k]);
        }
    })?;
    Ok((dz, dzb))
}

/// `f_{z z̄} = ¼ Δ f` with the compact second-difference stencils.
pub fn dz_dzbar(field: &GridField) -> Result<GridField> {
    if field.dim() != 2 {
        return Err(Error::InvalidGrid("∂_z∂_z̄ needs a 2D grid".into()));
    }
    let fxx = field.second_partial(0, 0)?;
    let fyy = field.second_partial(1, 1)?;
    fxx.zip_map(&fyy, field.components(), |a, b, o| {
        for k in 0..a.len() {
            o[k] = 0.25 * (a[k] + b[k]);
        }
    })
}
