//! Metrics on grids, Christoffel symbols, tension fields of maps, metric cones
//! `dr² + r²g`, and the radial extension of maps between cones.
//!
//! Christoffel symbols `Γᵏᵢⱼ` are stored per node at `k·d² + i·d + j`.
//! On cone grids the radial coordinate is the last axis.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exterior::{GridField, Signature};
use crate::linalg::{det_field, inverse_field, sym_dim, sym_index, sym_len};
use crate::quadric::SurfaceMap;
use crate::semiflat::{ImmersionField, pullback_metric};

/// Packed symmetric metric on a grid of the same dimension.
#[derive(Debug, Clone)]
pub struct MetricField {
    g: GridField,
    inverse: GridField,
}

impl MetricField {
    /// Rejects nodes where `|det g|` falls below `1e-12 · |g|^d`.
    pub fn new(g: GridField) -> Result<Self> {
        let d = g.dim();
        if g.components() != sym_len(d) {
            return Err(Error::ShapeMismatch(format!(
                "metric on a {d}D grid needs {} components, got {}",
                sym_len(d),
                g.components()
            )));
        }
        let det = det_field(&g)?;
        for n in 0..g.num_nodes() {
            let scale = g.node(n).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let dv = det.node(n)[0];
            if !(dv.abs() > 1e-12 * scale.powi(d as i32)) {
                return Err(Error::Singular { node: g.multi_index(n) });
            }
        }
        let inverse = inverse_field(&g)?;
        Ok(Self { g, inverse })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn field(&self) -> &GridField {
        &self.g
    }

    pub fn inverse(&self) -> &GridField {
        &self.inverse
    }
}

/// `Γᵏᵢⱼ = ½ gᵏˡ (∂ᵢgⱼₗ + ∂ⱼgᵢₗ − ∂ₗgᵢⱼ)` with central-difference derivatives of `g`.
pub fn christoffel(metric: &MetricField) -> Result<GridField> {
    let d = metric.dim();
    let dg = metric.g.gradient()?;
    let inv = &metric.inverse;
    metric.g.map_nodes(d * d * d, |n, _, out| {
        let first = |l: usize, i: usize, j: usize| {
            0.5 * (dg[i].node(n)[sym_index(j, l, d)] + dg[j].node(n)[sym_index(i, l, d)]
                - dg[l].node(n)[sym_index(i, j, d)])
        };
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let v: f64 = (0..d).map(|l| inv.node(n)[sym_index(k, l, d)] * first(l, i, j)).sum();
                    out[k * d * d + i * d + j] = v;
                    out[k * d * d + j * d + i] = v;
                }
            }
        }
    })
}

/// A metric given in closed form on codomain coordinates.
pub trait CodomainMetric: Sync {
    fn dim(&self) -> usize;
    fn metric(&self, y: &[f64]) -> DMatrix<f64>;
    /// `Γᵞ_αβ` at `γ·m² + α·m + β`.
    fn christoffel(&self, y: &[f64]) -> Vec<f64>;
}

/// Constant diagonal metric of the given signature.
#[derive(Debug, Clone, Copy)]
pub struct Flat(pub Signature);

impl CodomainMetric for Flat {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn metric(&self, _: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| if i == j { self.0.eta(i) as f64 } else { 0.0 })
    }

    fn christoffel(&self, _: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim().pow(3)]
    }
}

/// Round unit sphere in stereographic coordinates: `4|dy|²/(1+|y|²)²`.
#[derive(Debug, Clone, Copy)]
pub struct StereographicSphere;

impl CodomainMetric for StereographicSphere {
    fn dim(&self) -> usize {
        2
    }

    fn metric(&self, y: &[f64]) -> DMatrix<f64> {
        let c = 4.0 / (1.0 + y[0] * y[0] + y[1] * y[1]).powi(2);
        DMatrix::from_diagonal_element(2, 2, c)
    }

    fn christoffel(&self, y: &[f64]) -> Vec<f64> {
        // conformal e^{2f}δ: Γᵏᵢⱼ = δᵢₖ fⱼ + δⱼₖ fᵢ − δᵢⱼ fₖ
        let s = 1.0 + y[0] * y[0] + y[1] * y[1];
        let f = [-2.0 * y[0] / s, -2.0 * y[1] / s];
        let mut out = vec![0.0; 8];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut v = 0.0;
                    if i == k {
                        v += f[j];
                    }
                    if j == k {
                        v += f[i];
                    }
                    if i == j {
                        v -= f[k];
                    }
                    out[k * 4 + i * 2 + j] = v;
                }
            }
        }
        out
    }
}

/// Metric cone `dr² + r²h` over a closed-form metric, `r` the last coordinate.
#[derive(Debug, Clone, Copy)]
pub struct Cone<M>(pub M);

impl<M: CodomainMetric> CodomainMetric for Cone<M> {
    fn dim(&self) -> usize {
        self.0.dim() + 1
    }

    fn metric(&self, y: &[f64]) -> DMatrix<f64> {
        let m = self.0.dim();
        let r = y[m];
        let h = self.0.metric(&y[..m]);
        DMatrix::from_fn(m + 1, m + 1, |i, j| {
            if i == m || j == m {
                if i == j { 1.0 } else { 0.0 }
            } else {
                r * r * h[(i, j)]
            }
        })
    }

    fn christoffel(&self, y: &[f64]) -> Vec<f64> {
        let m = self.0.dim();
        let d = m + 1;
        let r = y[m];
        let base = self.0.christoffel(&y[..m]);
        let h = self.0.metric(&y[..m]);
        let mut out = vec![0.0; d * d * d];
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    out[k * d * d + i * d + j] = base[k * m * m + i * m + j];
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                out[m * d * d + i * d + j] = -r * h[(i, j)];
            }
            out[i * d * d + i * d + m] = 1.0 / r;
            out[i * d * d + m * d + i] = 1.0 / r;
        }
        out
    }
}

/// `τᵞ = gⁱʲ(∂ᵢⱼφᵞ − Γᵏᵢⱼ ∂ₖφᵞ + Γ̂ᵞ_αβ ∂ᵢφ^α ∂ⱼφ^β)` for a sampled map `φ`
/// from a grid with metric `g` into a closed-form codomain.
pub fn tension_field(metric: &MetricField, map: &GridField, codomain: &dyn CodomainMetric) -> Result<GridField> {
    metric.g.check_same_grid(map)?;
    let d = metric.dim();
    let m = codomain.dim();
    if map.components() != m {
        return Err(Error::ShapeMismatch(format!(
            "map has {} components, codomain dimension is {m}",
            map.components()
        )));
    }
    let gamma = christoffel(metric)?;
    let grad = map.gradient()?;
    let mut hess = Vec::with_capacity(sym_len(d));
    for i in 0..d {
        for j in i..d {
            hess.push(map.second_partial(i, j)?);
        }
    }
    let inv = &metric.inverse;
    map.map_nodes(m, |n, phi, out| {
        let target = codomain.christoffel(phi);
        let gi = inv.node(n);
        let gm = gamma.node(n);
        for c in 0..m {
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let w = gi[sym_index(i, j, d)];
                    let mut t = hess[sym_index(i, j, d)].node(n)[c];
                    for k in 0..d {
                        t -= gm[k * d * d + i * d + j] * grad[k].node(n)[c];
                    }
                    for a in 0..m {
                        for b in 0..m {
                            t += target[c * m * m + a * m + b] * grad[i].node(n)[a] * grad[j].node(n)[b];
                        }
                    }
                    acc += w * t;
                }
            }
            out[c] = acc;
        }
    })
}

/// Sample `dr² + r²g` on the product grid `grid(g) × {r-axis}`.
pub fn cone_metric(g: &GridField, r0: f64, hr: f64, nr: usize) -> Result<GridField> {
    let d = g.dim();
    if d > 2 {
        return Err(Error::InvalidGrid("cone over a 3D grid exceeds the supported dimension".into()));
    }
    let sd = sym_dim(g.components()).filter(|&k| k == d).ok_or_else(|| Error::ShapeMismatch("not a metric field".into()))?;
    let mut shape = g.shape().to_vec();
    shape.push(nr);
    let mut origin = g.origin().to_vec();
    origin.push(r0);
    let mut spacing = g.spacing().to_vec();
    spacing.push(hr);
    let e = d + 1;
    let mut out = GridField::zeros(&shape, &origin, &spacing, sym_len(e))?;
    for n in 0..out.num_nodes() {
        let idx = out.multi_index(n);
        let r = r0 + idx[d] as f64 * hr;
        let base = g.at(&idx[..d]).to_vec();
        let o = out.node_mut(n);
        for i in 0..sd {
            for j in i..sd {
                o[sym_index(i, j, e)] = r * r * base[sym_index(i, j, sd)];
            }
        }
        o[sym_index(d, d, e)] = 1.0;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RadialSample {
    pub r: f64,
    /// Sup over interior nodes of `|τᵞ(φ̂) − τᵞ(φ)/r²|`, cone grid against relation.
    pub tangential_mismatch: f64,
    /// Sup of `|τ⁰(φ̂) − (1/r) gⁱʲ(gᵢⱼ − h_αβ ∂ᵢφ^α ∂ⱼφ^β)|`.
    pub radial_mismatch: f64,
    /// Sup of `|τ⁰(φ̂)|` from the cone grid.
    pub radial_tension: f64,
    /// Sup of `|τᵞ(φ̂)|` from the cone grid.
    pub tangential_tension: f64,
    /// Cone-grid `τᵞ(φ̂)` on the slice (interior nodes meaningful).
    pub tangential: GridField,
}

#[derive(Debug, Clone)]
pub struct RadialReport {
    pub samples: Vec<RadialSample>,
    /// Sup of `|τ(φ)|` on the link.
    pub link_tension: f64,
}

/// Compare the radial-extension formulas with a direct evaluation on explicit
/// cone grids. Each sample radius gets a three-layer cone grid centred on it,
/// on which `r`-derivatives of the (quadratic-in-`r`) data are exact.
pub fn radial_tension_relations(
    metric: &MetricField,
    map: &GridField,
    codomain: &dyn CodomainMetric,
    r_samples: &[f64],
    margin: usize,
) -> Result<RadialReport> {
    let d = metric.dim();
    let m = codomain.dim();
    let tau = tension_field(metric, map, codomain)?;
    let interior = |n: usize| map.is_interior(n, margin);
    let link_tension = tau.sup_norm_where(interior).0;
    // (1/r) gⁱʲ(gᵢⱼ − pullback) without the 1/r
    let grad = map.gradient()?;
    let trace = map.map_nodes(1, |n, phi, out| {
        let h = codomain.metric(phi);
        let gi = metric.inverse.node(n);
        let gg = metric.g.node(n);
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut pb = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        pb += h[(a, b)] * grad[i].node(n)[a] * grad[j].node(n)[b];
                    }
                }
                acc += gi[sym_index(i, j, d)] * (gg[sym_index(i, j, d)] - pb);
            }
        }
        out[0] = acc;
    })?;
    let hr = map.max_spacing();
    let cone = Cone(CodomainRef(codomain));
    let mut samples = Vec::new();
    for &r in r_samples {
        if !(r - hr > 0.0) {
            return Err(Error::InvalidGrid(format!("radius {r} too close to the apex")));
        }
        let gc = MetricField::new(cone_metric(&metric.g, r - hr, hr, 3)?)?;
        let mut shape = map.shape().to_vec();
        shape.push(3);
        let mut origin = map.origin().to_vec();
        origin.push(r - hr);
        let mut spacing = map.spacing().to_vec();
        spacing.push(hr);
        let mut lifted = GridField::zeros(&shape, &origin, &spacing, m + 1)?;
        for n in 0..lifted.num_nodes() {
            let idx = lifted.multi_index(n);
            let rr = r - hr + idx[d] as f64 * hr;
            let src = map.at(&idx[..d]).to_vec();
            let o = lifted.node_mut(n);
            o[..m].copy_from_slice(&src);
            o[m] = rr;
        }
        let tau_hat = tension_field(&gc, &lifted, &cone)?;
        let mut slice = map.map_nodes(m, |_, _, _| {})?;
        let mut tangential_mismatch: f64 = 0.0;
        let mut radial_mismatch: f64 = 0.0;
        let mut radial_tension: f64 = 0.0;
        let mut tangential_tension: f64 = 0.0;
        for n in 0..map.num_nodes() {
            let mut idx = map.multi_index(n);
            idx.push(1);
            let th = tau_hat.at(&idx).to_vec();
            slice.node_mut(n).copy_from_slice(&th[..m]);
            if !interior(n) {
                continue;
            }
            for c in 0..m {
                tangential_mismatch = tangential_mismatch.max((th[c] - tau.node(n)[c] / (r * r)).abs());
                tangential_tension = tangential_tension.max(th[c].abs());
            }
            radial_mismatch = radial_mismatch.max((th[m] - trace.node(n)[0] / r).abs());
            radial_tension = radial_tension.max(th[m].abs());
        }
        samples.push(RadialSample { r, tangential_mismatch, radial_mismatch, radial_tension, tangential_tension, tangential: slice });
    }
    Ok(RadialReport { samples, link_tension })
}

struct CodomainRef<'a>(&'a dyn CodomainMetric);

impl CodomainMetric for CodomainRef<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn metric(&self, y: &[f64]) -> DMatrix<f64> {
        self.0.metric(y)
    }
    fn christoffel(&self, y: &[f64]) -> Vec<f64> {
        self.0.christoffel(y)
    }
}

/// Induced metric `⟨∂ᵢφ, ∂ⱼφ⟩` of a sampled map into a flat space.
pub fn induced_metric(map: &GridField, sig: Signature) -> Result<GridField> {
    let d = map.dim();
    let grad = map.gradient()?;
    map.map_nodes(sym_len(d), |n, _, out| {
        for i in 0..d {
            for j in i..d {
                out[sym_index(i, j, d)] = sig.dot(grad[i].node(n), grad[j].node(n));
            }
        }
    })
}

#[derive(Debug, Clone)]
pub struct ConeImmersion {
    pub immersion: ImmersionField,
    /// Sup of `|h − (dr² + r²g_Σ)|` with `h` the semi-flat pullback metric.
    pub metric_residual: f64,
}

/// `u(x, y, r) = r·φ(x, y)` carried into Λ²R⁴ by [`crate::fixtures::r33_to_lambda2`],
/// for a surface in the unit quadric of `R^{3,3}` with definite induced metric.
pub fn cone_immersion(surface: &SurfaceMap, r0: f64, r1: f64, nr: usize) -> Result<ConeImmersion> {
    let sig = surface.signature();
    if (sig.p, sig.q) != (3, 3) || surface.h0() != 1.0 {
        return Err(Error::InvalidSurface("cone immersion needs a surface in the unit quadric of R^{3,3}".into()));
    }
    if !(r0 > 0.0 && r1 > r0) || nr < 3 {
        return Err(Error::InvalidGrid(format!("need 0 < r0 < r1 and at least 3 radial nodes, got [{r0}, {r1}] / {nr}")));
    }
    let phi = surface.field();
    let g_sigma = induced_metric(phi, sig)?;
    crate::linalg::require_positive_definite(&g_sigma)?;
    let hr = (r1 - r0) / (nr - 1) as f64;
    let mut shape = phi.shape().to_vec();
    shape.push(nr);
    let mut origin = phi.origin().to_vec();
    origin.push(r0);
    let mut spacing = phi.spacing().to_vec();
    spacing.push(hr);
    let mut u = GridField::zeros(&shape, &origin, &spacing, 6)?;
    for n in 0..u.num_nodes() {
        let idx = u.multi_index(n);
        let r = r0 + idx[2] as f64 * hr;
        let p: Vec<f64> = phi.at(&idx[..2]).iter().map(|v| r * v).collect();
        u.node_mut(n).copy_from_slice(&crate::fixtures::r33_to_lambda2(&p));
    }
    let immersion = ImmersionField::new(u, 1.0)?;
    let h = pullback_metric(&immersion)?;
    let expected = cone_metric(&g_sigma, r0, hr, nr)?;
    let metric_residual = h.sub(&expected)?.sup_norm();
    Ok(ConeImmersion { immersion, metric_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_metric(n: usize) -> GridField {
        GridField::from_bounds(&[-0.6, -0.5], &[0.5, 0.6], &[n, n], 3, |x, o| {
            let c = 4.0 / (1.0 + x[0] * x[0] + x[1] * x[1]).powi(2);
            o.copy_from_slice(&[c, 0.0, c]);
        })
        .unwrap()
    }

    #[test]
    fn flat_metric_has_zero_symbols() {
        let g = GridField::from_bounds(&[0.0; 3], &[1.0; 3], &[5; 3], 6, |_, o| {
            o.copy_from_slice(&[2.0, 0.3, 0.0, 1.0, 0.0, 1.5])
        })
        .unwrap();
        let gamma = christoffel(&MetricField::new(g).unwrap()).unwrap();
        assert!(gamma.sup_norm() < 1e-14);
    }

    #[test]
    fn sphere_symbols_converge() {
        let mut errs = Vec::new();
        for n in [17, 33, 65] {
            let g = sphere_metric(n);
            let gamma = christoffel(&MetricField::new(g.clone()).unwrap()).unwrap();
            let mut err: f64 = 0.0;
            for k in 0..g.num_nodes() {
                let exact = StereographicSphere.christoffel(&g.coords(k));
                for (a, b) in gamma.node(k).iter().zip(&exact) {
                    err = err.max((a - b).abs());
                }
            }
            errs.push(err);
        }
        let order = (errs[1] / errs[2]).log2();
        assert!(order > 1.8 && order < 2.2, "{errs:?}");
    }

    #[test]
    fn singular_metric_rejected() {
        let g = GridField::from_bounds(&[0.0; 2], &[1.0; 2], &[4; 2], 3, |_, o| o.copy_from_slice(&[1.0, 1.0, 1.0])).unwrap();
        assert!(matches!(MetricField::new(g), Err(Error::Singular { .. })));
    }

    #[test]
    fn cone_table_for_sphere_link() {
        let g = sphere_metric(33);
        let gc = cone_metric(&g, 1.0, 1.0 / 32.0, 33).unwrap();
        let gamma = christoffel(&MetricField::new(gc.clone()).unwrap()).unwrap();
        let mut err: f64 = 0.0;
        for n in 0..gc.num_nodes() {
            let y = gc.coords(n);
            let exact = Cone(StereographicSphere).christoffel(&y);
            for (a, b) in gamma.node(n).iter().zip(&exact) {
                err = err.max((a - b).abs());
            }
        }
        assert!(err < 10.0 / 32.0f64.powi(2), "{err}");
    }

    #[test]
    fn identity_of_flat_torus_is_harmonic() {
        let g = GridField::from_bounds(&[0.0; 2], &[1.0; 2], &[9; 2], 3, |_, o| o.copy_from_slice(&[1.0, 0.0, 1.0])).unwrap();
        let map = g.sample_like(2, |x, o| o.copy_from_slice(x)).unwrap();
        let tau = tension_field(&MetricField::new(g).unwrap(), &map, &Flat(Signature::euclidean(2))).unwrap();
        assert!(tau.sup_norm() < 1e-12);
    }
}
