//! Uniform rectangular grids in 1-3 dimensions carrying multi-component samples.
//!
//! Storage is node-major: the value of component `c` at flat node `n` lives at
//! `values[n * components + c]`, and flat node indices are row-major over the
//! shape (last axis fastest). Complex quantities are stored as interleaved
//! `(re, im)` pairs.

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    components: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(
        shape: Vec<usize>,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        components: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let d = shape.len();
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("grid dimension {d} not in 1..=3")));
        }
        if origin.len() != d || spacing.len() != d {
            return Err(Error::InvalidGrid("origin/spacing length differs from shape".into()));
        }
        if let Some((axis, &n)) = shape.iter().enumerate().find(|(_, &n)| n < 3) {
            return Err(Error::TooFewNodes { axis, nodes: n });
        }
        if spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing:?}")));
        }
        if components == 0 {
            return Err(Error::InvalidGrid("component count must be positive".into()));
        }
        let expected = components * shape.iter().product::<usize>();
        if values.len() != expected {
            return Err(Error::InvalidGrid(format!(
                "value array has {} entries, expected {expected}",
                values.len()
            )));
        }
        Ok(Self { shape, origin, spacing, components, values })
    }

    pub fn zeros(shape: &[usize], origin: &[f64], spacing: &[f64], components: usize) -> Result<Self> {
        let n: usize = shape.iter().product();
        Self::new(shape.to_vec(), origin.to_vec(), spacing.to_vec(), components, vec![0.0; n * components])
    }

    /// Grid spanning `[lo_i, hi_i]` with `shape[i]` nodes along each axis.
    pub fn from_bounds(
        lo: &[f64],
        hi: &[f64],
        shape: &[usize],
        components: usize,
        f: impl Fn(&[f64], &mut [f64]) + Sync,
    ) -> Result<Self> {
        if lo.len() != shape.len() || hi.len() != shape.len() {
            return Err(Error::InvalidGrid("bounds length differs from shape".into()));
        }
        let spacing: Vec<f64> = (0..shape.len())
            .map(|i| (hi[i] - lo[i]) / (shape[i].max(2) - 1) as f64)
            .collect();
        let mut g = Self::zeros(shape, lo, &spacing, components)?;
        g.fill(f);
        Ok(g)
    }

    /// Same grid, new component count, values from `f(coords, out)`.
    pub fn sample_like(&self, components: usize, f: impl Fn(&[f64], &mut [f64]) + Sync) -> Result<Self> {
        let mut g = Self::zeros(&self.shape, &self.origin, &self.spacing, components)?;
        g.fill(f);
        Ok(g)
    }

    fn fill(&mut self, f: impl Fn(&[f64], &mut [f64]) + Sync) {
        let c = self.components;
        let this = Self { values: Vec::new(), ..self.clone() };
        self.values.par_chunks_mut(c).enumerate().for_each(|(n, out)| {
            let x = this.coords(n);
            f(&x, out);
        });
    }

    /// Node-local map to a field with `components` entries per node.
    pub fn map_nodes(&self, components: usize, f: impl Fn(usize, &[f64], &mut [f64]) + Sync) -> Result<Self> {
        let mut g = Self::zeros(&self.shape, &self.origin, &self.spacing, components)?;
        let c = self.components;
        g.values
            .par_chunks_mut(components)
            .zip(self.values.par_chunks(c))
            .enumerate()
            .for_each(|(n, (out, inp))| f(n, inp, out));
        Ok(g)
    }

    /// Fallible node-local map; the first failing node in index order wins.
    pub fn try_map_nodes(
        &self,
        components: usize,
        f: impl Fn(usize, &[f64], &mut [f64]) -> Result<()> + Sync,
    ) -> Result<Self> {
        let mut g = Self::zeros(&self.shape, &self.origin, &self.spacing, components)?;
        let c = self.components;
        let errors: Vec<(usize, Error)> = g
            .values
            .par_chunks_mut(components)
            .zip(self.values.par_chunks(c))
            .enumerate()
            .filter_map(|(n, (out, inp))| f(n, inp, out).err().map(|e| (n, e)))
            .collect();
        match errors.into_iter().min_by_key(|(n, _)| *n) {
            Some((_, e)) => Err(e),
            None => Ok(g),
        }
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn num_nodes(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    pub fn node(&self, n: usize) -> &[f64] {
        &self.values[n * self.components..(n + 1) * self.components]
    }

    pub fn node_mut(&mut self, n: usize) -> &mut [f64] {
        let c = self.components;
        &mut self.values[n * c..(n + 1) * c]
    }

    pub fn at(&self, idx: &[usize]) -> &[f64] {
        self.node(self.flat(idx))
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut n: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = n % self.shape[a];
            n /= self.shape[a];
        }
        idx
    }

    pub fn coords(&self, n: usize) -> Vec<f64> {
        self.multi_index(n)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.origin[a] + i as f64 * self.spacing[a])
            .collect()
    }

    /// True if the node is at least `margin` nodes away from every face.
    pub fn is_interior(&self, n: usize, margin: usize) -> bool {
        self.multi_index(n)
            .iter()
            .zip(&self.shape)
            .all(|(&i, &len)| i >= margin && i + margin < len)
    }

    pub fn same_grid(&self, other: &GridField) -> bool {
        self.shape == other.shape && self.origin == other.origin && self.spacing == other.spacing
    }

    pub fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "grid {:?} vs {:?}",
                self.shape, other.shape
            )))
        }
    }

    /// Selects components `range` into a new field.
    pub fn select(&self, start: usize, count: usize) -> Result<Self> {
        if start + count > self.components {
            return Err(Error::ShapeMismatch(format!(
                "components {start}..{} out of {}",
                start + count,
                self.components
            )));
        }
        self.map_nodes(count, |_, inp, out| out.copy_from_slice(&inp[start..start + count]))
    }

    /// Concatenates the components of same-grid fields.
    pub fn stack(fields: &[&GridField]) -> Result<Self> {
        let first = fields.first().ok_or_else(|| Error::InvalidGrid("nothing to stack".into()))?;
        for f in fields {
            first.check_same_grid(f)?;
        }
        let total: usize = fields.iter().map(|f| f.components).sum();
        let mut g = Self::zeros(&first.shape, &first.origin, &first.spacing, total)?;
        for n in 0..first.num_nodes() {
            let mut off = 0;
            for f in fields {
                let c = f.components;
                g.values[n * total + off..n * total + off + c].copy_from_slice(f.node(n));
                off += c;
            }
        }
        Ok(g)
    }

    fn line_len_check(&self, axis: usize) -> Result<()> {
        if axis >= self.dim() {
            return Err(Error::InvalidGrid(format!("axis {axis} out of range for {}D grid", self.dim())));
        }
        if self.shape[axis] < 3 {
            return Err(Error::TooFewNodes { axis, nodes: self.shape[axis] });
        }
        Ok(())
    }

    /// First derivative along `axis`: second-order central differences inside,
    /// second-order one-sided three-point stencils on the two faces.
    pub fn partial(&self, axis: usize) -> Result<Self> {
        self.line_len_check(axis)?;
        let stride = self.strides()[axis];
        let len = self.shape[axis];
        let inv = 1.0 / self.spacing[axis];
        let c = self.components;
        let src = &self.values;
        let shape = self.shape.clone();
        let strides = self.strides();
        let mut out = self.clone();
        out.values.par_chunks_mut(c).enumerate().for_each(|(n, o)| {
            let i = (n / strides[axis]) % shape[axis];
            let at = |k: usize, comp: usize| src[k * c + comp];
            for comp in 0..c {
                o[comp] = if i == 0 {
                    (-3.0 * at(n, comp) + 4.0 * at(n + stride, comp) - at(n + 2 * stride, comp)) * 0.5 * inv
                } else if i == len - 1 {
                    (3.0 * at(n, comp) - 4.0 * at(n - stride, comp) + at(n - 2 * stride, comp)) * 0.5 * inv
                } else {
                    (at(n + stride, comp) - at(n - stride, comp)) * 0.5 * inv
                };
            }
        });
        Ok(out)
    }

    /// Second derivative `∂_a ∂_b`. Pure second derivatives use the compact
    /// three-point stencil (four-point one-sided on faces); mixed ones compose
    /// two first derivatives, so `∂_a∂_b = ∂_b∂_a` holds exactly.
    pub fn second_partial(&self, a: usize, b: usize) -> Result<Self> {
        if a != b {
            return self.partial(a)?.partial(b);
        }
        self.line_len_check(a)?;
        let len = self.shape[a];
        if len < 4 {
            return self.partial(a)?.partial(a);
        }
        let stride = self.strides()[a];
        let inv2 = 1.0 / (self.spacing[a] * self.spacing[a]);
        let c = self.components;
        let src = &self.values;
        let shape = self.shape.clone();
        let strides = self.strides();
        let mut out = self.clone();
        out.values.par_chunks_mut(c).enumerate().for_each(|(n, o)| {
            let i = (n / strides[a]) % shape[a];
            let at = |k: usize, comp: usize| src[k * c + comp];
            for comp in 0..c {
                o[comp] = if i == 0 {
                    (2.0 * at(n, comp) - 5.0 * at(n + stride, comp) + 4.0 * at(n + 2 * stride, comp)
                        - at(n + 3 * stride, comp))
                        * inv2
                } else if i == len - 1 {
                    (2.0 * at(n, comp) - 5.0 * at(n - stride, comp) + 4.0 * at(n - 2 * stride, comp)
                        - at(n - 3 * stride, comp))
                        * inv2
                } else {
                    (at(n + stride, comp) - 2.0 * at(n, comp) + at(n - stride, comp)) * inv2
                };
            }
        });
        Ok(out)
    }

    /// All first partials, one field per axis.
    pub fn gradient(&self) -> Result<Vec<Self>> {
        (0..self.dim()).map(|a| self.partial(a)).collect()
    }

    /// Max |value| over all nodes and components.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_where(|_| true).0
    }

    /// Max |value| over nodes at least `margin` from the boundary.
    pub fn sup_norm_interior(&self, margin: usize) -> f64 {
        self.sup_norm_where(|n| self.is_interior(n, margin)).0
    }

    /// Max |value| over the selected nodes and the flat node where it occurs.
    /// Reduction runs in node order, so the result does not depend on threading.
    pub fn sup_norm_where(&self, keep: impl Fn(usize) -> bool) -> (f64, Option<usize>) {
        let mut best = 0.0;
        let mut at = None;
        for n in 0..self.num_nodes() {
            if !keep(n) {
                continue;
            }
            for &v in self.node(n) {
                if v.is_nan() {
                    return (f64::NAN, Some(n));
                }
                if at.is_none() || v.abs() > best {
                    best = v.abs();
                    at = Some(n);
                }
            }
        }
        (best, at)
    }

    /// Per-node Euclidean norm over components.
    pub fn node_norms(&self) -> Self {
        self.map_nodes(1, |_, inp, out| out[0] = inp.iter().map(|v| v * v).sum::<f64>().sqrt())
            .expect("same grid")
    }

    pub fn zip_map(
        &self,
        other: &GridField,
        components: usize,
        f: impl Fn(&[f64], &[f64], &mut [f64]) + Sync,
    ) -> Result<Self> {
        self.check_same_grid(other)?;
        let oc = other.components;
        let ov = &other.values;
        self.map_nodes(components, |n, a, out| f(a, &ov[n * oc..(n + 1) * oc], out))
    }

    pub fn sub(&self, other: &GridField) -> Result<Self> {
        if self.components != other.components {
            return Err(Error::ShapeMismatch("component counts differ".into()));
        }
        self.zip_map(other, self.components, |a, b, o| {
            for i in 0..a.len() {
                o[i] = a[i] - b[i];
            }
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut g = self.clone();
        g.values.iter_mut().for_each(|v| *v *= s);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_axes_and_bad_spacing() {
        assert!(matches!(
            GridField::zeros(&[2, 5], &[0.0, 0.0], &[1.0, 1.0], 1),
            Err(Error::TooFewNodes { axis: 0, nodes: 2 })
        ));
        assert!(GridField::zeros(&[3, 5], &[0.0, 0.0], &[0.0, 1.0], 1).is_err());
        assert!(GridField::new(vec![3], vec![0.0], vec![1.0], 1, vec![0.0; 4]).is_err());
    }

    #[test]
    fn indexing_is_row_major() {
        let g = GridField::zeros(&[3, 4, 5], &[0.0; 3], &[1.0; 3], 2).unwrap();
        assert_eq!(g.strides(), vec![20, 5, 1]);
        assert_eq!(g.flat(&[1, 2, 3]), 33);
        assert_eq!(g.multi_index(33), vec![1, 2, 3]);
    }

    #[test]
    fn partial_exact_on_quadratics() {
        let g = GridField::from_bounds(&[0.0, -1.0], &[1.0, 2.0], &[7, 9], 1, |x, o| {
            o[0] = 3.0 * x[0] * x[0] - x[0] * x[1] + 2.0 * x[1] * x[1] + 1.0
        })
        .unwrap();
        let dx = g.partial(0).unwrap();
        let dy = g.partial(1).unwrap();
        let dxy = g.second_partial(0, 1).unwrap();
        let dyy = g.second_partial(1, 1).unwrap();
        for n in 0..g.num_nodes() {
            let x = g.coords(n);
            assert!((dx.node(n)[0] - (6.0 * x[0] - x[1])).abs() < 1e-12);
            assert!((dy.node(n)[0] - (-x[0] + 4.0 * x[1])).abs() < 1e-12);
            assert!((dxy.node(n)[0] + 1.0).abs() < 1e-11);
            assert!((dyy.node(n)[0] - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn second_derivative_order_two() {
        let err = |n: usize| {
            let g = GridField::from_bounds(&[0.0], &[1.0], &[n], 1, |x, o| o[0] = (2.0 * x[0]).sin()).unwrap();
            let d2 = g.second_partial(0, 0).unwrap();
            let exact = g.sample_like(1, |x, o| o[0] = -4.0 * (2.0 * x[0]).sin()).unwrap();
            d2.sub(&exact).unwrap().sup_norm()
        };
        let (e1, e2) = (err(33), err(65));
        let order = (e1 / e2).log2();
        assert!((1.8..=2.3).contains(&order), "order {order}");
    }

    #[test]
    fn sup_norm_reports_location() {
        let mut g = GridField::zeros(&[3, 3], &[0.0; 2], &[1.0; 2], 1).unwrap();
        g.node_mut(4)[0] = -2.5;
        assert_eq!(g.sup_norm_where(|_| true), (2.5, Some(4)));
        assert_eq!(g.sup_norm_interior(1), 2.5);
    }
}
