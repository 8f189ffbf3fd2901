//! Per-node symmetric matrices packed as upper triangles, row by row:
//! `(00, 01, …, 0d, 11, …, dd)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exterior::GridField;

pub fn sym_len(d: usize) -> usize {
    d * (d + 1) / 2
}

pub fn sym_index(i: usize, j: usize, d: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * d - i * (i + 1) / 2 + j
}

/// Dimension `d` with `sym_len(d) == len`.
pub fn sym_dim(len: usize) -> Option<usize> {
    (1..=8).find(|&d| sym_len(d) == len)
}

pub fn unpack(packed: &[f64], d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| packed[sym_index(i, j, d)])
}

pub fn pack(m: &DMatrix<f64>, out: &mut [f64]) {
    let d = m.nrows();
    for i in 0..d {
        for j in i..d {
            out[sym_index(i, j, d)] = m[(i, j)];
        }
    }
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// First node (in row-major order) where the packed symmetric field is not
/// positive definite, reported with its eigenvalues.
pub fn require_positive_definite(field: &GridField) -> Result<()> {
    let d = sym_dim(field.components())
        .ok_or_else(|| Error::ShapeMismatch(format!("{} components is not a packed symmetric matrix", field.components())))?;
    for n in 0..field.num_nodes() {
        let m = unpack(field.node(n), d);
        if m.clone().cholesky().is_none() || field.node(n).iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite { node: field.multi_index(n), eigenvalues: eigenvalues(&m) });
        }
    }
    Ok(())
}

/// Inverse of the packed symmetric matrix at each node, packed again.
pub fn inverse_field(field: &GridField) -> Result<GridField> {
    let d = sym_dim(field.components())
        .ok_or_else(|| Error::ShapeMismatch("not a packed symmetric field".into()))?;
    let out = field.map_nodes(field.components(), |_, inp, out| match unpack(inp, d).try_inverse() {
        Some(inv) => pack(&inv, out),
        None => out.iter_mut().for_each(|v| *v = f64::NAN),
    })?;
    if let Some(n) = (0..out.num_nodes()).find(|&n| out.node(n).iter().any(|v| !v.is_finite())) {
        return Err(Error::Singular { node: out.multi_index(n) });
    }
    Ok(out)
}

/// `det` of the packed symmetric matrix at each node.
pub fn det_field(field: &GridField) -> Result<GridField> {
    let d = sym_dim(field.components())
        .ok_or_else(|| Error::ShapeMismatch("not a packed symmetric field".into()))?;
    field.map_nodes(1, |_, inp, out| out[0] = unpack(inp, d).determinant())
}
