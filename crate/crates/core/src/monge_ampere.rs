//! Hessian metrics `g = ∂²φ`, Legendre duality, the reduced Monge–Ampère
//! equations and the cylindrical embedding `u ↦ ũ` into `Λ²R⁴`.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::cone::{christoffel, MetricField};
use crate::error::{Error, Result};
use crate::exterior::GridField;
use crate::linalg::{det_field, inverse_field, require_positive_definite, sym_index, unpack};
use crate::semiflat::ImmersionField;

/// Scalar potential `φ(u₁, u₂, u₃)` on a 3D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    phi: GridField,
}

impl PotentialField {
    pub fn new(phi: GridField) -> Result<Self> {
        if phi.dim() != 3 || phi.components() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "potential needs a scalar on a 3D grid, got {} components on {}D",
                phi.components(),
                phi.dim()
            )));
        }
        if let Some((axis, &nodes)) = phi.shape().iter().enumerate().find(|(_, &n)| n < 3) {
            return Err(Error::TooFewNodes { axis, nodes });
        }
        Ok(Self { phi })
    }

    pub fn field(&self) -> &GridField {
        &self.phi
    }
}

/// Packed Hessian `φ_ij`; only `i ≤ j` is computed, so it is symmetric by construction.
pub fn hessian(phi: &PotentialField) -> Result<GridField> {
    let f = &phi.phi;
    let mut parts = Vec::with_capacity(6);
    for i in 0..3 {
        for j in i..3 {
            parts.push(f.second_partial(i, j)?);
        }
    }
    GridField::stack(&parts.iter().collect::<Vec<_>>())
}

/// Hessian, required positive definite at every node.
pub fn hessian_metric(phi: &PotentialField) -> Result<GridField> {
    let h = hessian(phi)?;
    require_positive_definite(&h)?;
    Ok(h)
}

/// `(∂_a det H, ψ^{ij} ∂_a H_ij)` with `ψ = H⁻¹`. Jacobi's formula makes the
/// first equal `det H` times the second.
pub fn ma_residual(phi: &PotentialField) -> Result<(GridField, GridField)> {
    let h = hessian(phi)?;
    let inv = inverse_field(&h)?;
    let det = det_field(&h)?;
    let grad_det = GridField::stack(&det.gradient()?.iter().collect::<Vec<_>>())?;
    let dh = h.gradient()?;
    let trace = inv.map_nodes(3, |n, psi, out| {
        for a in 0..3 {
            let d = dh[a].node(n);
            out[a] = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| psi[sym_index(i, j, 3)] * d[sym_index(i, j, 3)])
                .sum();
        }
    })?;
    Ok((grad_det, trace))
}

/// `sup |d det A − det A · tr(A⁻¹ dA)|` for a 1D field of `d × d` matrices
/// stored row-major.
pub fn jacobi_identity_check(a: &GridField) -> Result<f64> {
    let d = (1..=8)
        .find(|d| d * d == a.components())
        .ok_or_else(|| Error::ShapeMismatch(format!("{} components is not a square matrix", a.components())))?;
    if a.dim() != 1 {
        return Err(Error::ShapeMismatch(format!("matrix path needs a 1D grid, got {}D", a.dim())));
    }
    let mat = |v: &[f64]| DMatrix::from_row_slice(d, d, v);
    let det = a.map_nodes(1, |_, v, out| out[0] = mat(v).determinant())?;
    let ddet = det.partial(0)?;
    let da = a.partial(0)?;
    let mut worst: f64 = 0.0;
    for n in 0..a.num_nodes() {
        let m = mat(a.node(n));
        let inv = m.clone().try_inverse().filter(|_| det.node(n)[0] != 0.0).ok_or_else(|| Error::Singular {
            node: a.multi_index(n),
        })?;
        let tr = (inv * mat(da.node(n))).trace();
        let r = (ddet.node(n)[0] - det.node(n)[0] * tr).abs();
        worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
    }
    Ok(worst)
}

/// Dual potential sampled at the scattered points `v = ∇φ(u)`, indexed like the
/// primal grid.
#[derive(Debug, Clone)]
pub struct DualPair {
    pub primal: PotentialField,
    /// Packed Hessian of `φ`.
    pub hessian: GridField,
    /// `v = ∇φ`, three components.
    pub v: GridField,
    /// `ψ(v) = u·v − φ(u)`.
    pub psi: GridField,
    /// Gradient and packed Hessian of `ψ` in `v` from a local quadratic fit over
    /// the 27-node neighbourhood; `NaN` on boundary nodes.
    pub psi_gradient: GridField,
    pub psi_hessian: GridField,
}

impl DualPair {
    /// `sup |∂²ψ · ∂²φ − I|` over interior nodes at distance `margin`.
    pub fn duality_residual(&self, margin: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for n in (0..self.v.num_nodes()).filter(|&n| self.v.is_interior(n, margin.max(1))) {
            let p = unpack(self.psi_hessian.node(n), 3) * unpack(self.hessian.node(n), 3) - DMatrix::identity(3, 3);
            worst = worst.max(p.abs().max());
        }
        worst
    }

    /// `v·∇ψ − ψ` at every node; equals `φ` when the transform is an involution.
    pub fn double_dual(&self) -> Result<GridField> {
        let psi = &self.psi;
        let g = &self.psi_gradient;
        self.v.map_nodes(1, |n, v, out| {
            out[0] = (0..3).map(|k| v[k] * g.node(n)[k]).sum::<f64>() - psi.node(n)[0];
        })
    }
}

/// Quadratic fit `c + g·δ + ½δᵀMδ` to `(δ, value)` samples.
fn quadratic_fit(samples: &[([f64; 3], f64)]) -> Option<([f64; 3], [f64; 6])> {
    let rows = samples.len();
    let scale = samples.iter().flat_map(|(d, _)| d.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut a = DMatrix::zeros(rows, 10);
    let mut b = DVector::zeros(rows);
    for (r, (d, val)) in samples.iter().enumerate() {
        let x = d.map(|t| t / scale);
        let mut c = 0;
        a[(r, c)] = 1.0;
        c += 1;
        for k in 0..3 {
            a[(r, c)] = x[k];
            c += 1;
        }
        for i in 0..3 {
            for j in i..3 {
                a[(r, c)] = if i == j { 0.5 * x[i] * x[i] } else { x[i] * x[j] };
                c += 1;
            }
        }
        b[r] = *val;
    }
    let qr = a.qr();
    let sol = qr.r().solve_upper_triangular(&(qr.q().transpose() * b))?;
    let grad = [sol[1] / scale, sol[2] / scale, sol[3] / scale];
    let mut hess = [0.0; 6];
    for (k, h) in hess.iter_mut().enumerate() {
        *h = sol[4 + k] / (scale * scale);
    }
    Some((grad, hess))
}

/// Legendre transform at matched points. Needs an SPD Hessian everywhere.
pub fn legendre_dual(phi: &PotentialField) -> Result<DualPair> {
    let hess = hessian_metric(phi)?;
    let f = &phi.phi;
    let v = GridField::stack(&f.gradient()?.iter().collect::<Vec<_>>())?;
    let psi = v.map_nodes(1, |n, vn, out| {
        let u = f.coords(n);
        out[0] = (0..3).map(|k| u[k] * vn[k]).sum::<f64>() - f.node(n)[0];
    })?;
    let strides = v.strides();
    let fit = v.map_nodes(9, |n, v0, out| {
        if !v.is_interior(n, 1) {
            out.fill(f64::NAN);
            return;
        }
        let mut samples = Vec::with_capacity(27);
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                for dk in -1i64..=1 {
                    let m = (n as i64 + di * strides[0] as i64 + dj * strides[1] as i64 + dk * strides[2] as i64) as usize;
                    let vm = v.node(m);
                    samples.push(([vm[0] - v0[0], vm[1] - v0[1], vm[2] - v0[2]], psi.node(m)[0]));
                }
            }
        }
        match quadratic_fit(&samples) {
            Some((g, h)) => {
                out[..3].copy_from_slice(&g);
                out[3..].copy_from_slice(&h);
            }
            None => out.fill(f64::NAN),
        }
    })?;
    Ok(DualPair {
        primal: phi.clone(),
        hessian: hess,
        v,
        psi,
        psi_gradient: fit.select(0, 3)?,
        psi_hessian: fit.select(3, 6)?,
    })
}

/// `½ ψ^{km} φ_{mij}` with `φ_{mij} = ∂_m H_ij`, laid out as `k·9 + i·3 + j`.
pub fn hessian_christoffel(phi: &PotentialField) -> Result<GridField> {
    let h = hessian(phi)?;
    let inv = inverse_field(&h)?;
    let dh = h.gradient()?;
    inv.map_nodes(27, |n, psi, out| {
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    out[k * 9 + i * 3 + j] = 0.5
                        * (0..3).map(|m| psi[sym_index(k, m, 3)] * dh[m].node(n)[sym_index(i, j, 3)]).sum::<f64>();
                }
            }
        }
    })
}

/// Levi-Civita symbols of the Hessian metric, for comparison with [`hessian_christoffel`].
pub fn metric_christoffel(phi: &PotentialField) -> Result<GridField> {
    christoffel(&MetricField::new(hessian_metric(phi)?)?)
}

/// `ũ = u_i dx^i ∧ dx⁴ + ½ ε_ijk v^k dx^i ∧ dx^j` with `v = ∇φ`; in the basis
/// `(12, 13, 14, 23, 24, 34)` this is `(v₃, −v₂, u₁, v₁, u₂, u₃)`. The circle
/// coordinate takes the fourth fibre slot. With `τ = 1` the pulled-back metric
/// is the Hessian.
pub fn cylindrical_embed(phi: &PotentialField) -> Result<ImmersionField> {
    let dual = legendre_dual(phi)?;
    let f = &phi.phi;
    let u = dual.v.map_nodes(6, |n, v, out| {
        let x = f.coords(n);
        out.copy_from_slice(&[v[2], -v[1], x[0], v[0], x[1], x[2]]);
    })?;
    ImmersionField::new(u, 1.0)
}

/// `F'(ρ) = (ρ³ + c)^{1/3}`, the radial solutions of `det ∂²F(|u|) = 1`.
pub fn radial_ma_derivative(rho: f64, c: f64) -> f64 {
    (rho * rho * rho + c).cbrt()
}

/// `F(ρ) = ∫_{ρ₀}^{ρ} F'` by composite five-point Gauss–Legendre quadrature.
pub fn radial_ma_potential(rho: f64, rho0: f64, c: f64) -> f64 {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let panels = 64;
    let step = (rho - rho0) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = rho0 + (p as f64 + 0.5) * step;
            (0..5).map(|k| W[k] * radial_ma_derivative(mid + 0.5 * step * X[k], c)).sum::<f64>() * 0.5 * step
        })
        .sum()
}

/// `F(|u|)` on `[lo, hi]³` with `n³` nodes.
pub fn radial_ma_field(n: usize, lo: f64, hi: f64, c: f64) -> Result<PotentialField> {
    let rho0 = lo * 3f64.sqrt();
    PotentialField::new(GridField::from_bounds(&[lo; 3], &[hi; 3], &[n; 3], 1, |x, o| {
        o[0] = radial_ma_potential((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt(), rho0, c);
    })?)
}

/// `|u|²/2 + ε u₁³` on `[lo, hi]³`.
pub fn cubic_perturbation(n: usize, lo: f64, hi: f64, eps: f64) -> Result<PotentialField> {
    PotentialField::new(GridField::from_bounds(&[lo; 3], &[hi; 3], &[n; 3], 1, |x, o| {
        o[0] = 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) + eps * x[0].powi(3);
    })?)
}

/// Analytic Hessian of `F(|u|)` with `F' = (ρ³+c)^{1/3}`.
pub fn radial_ma_hessian(u: &[f64], c: f64) -> Matrix3<f64> {
    let rho = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let g = radial_ma_derivative(rho, c);
    let gp = rho * rho / (g * g);
    Matrix3::from_fn(|i, j| {
        let rr = u[i] * u[j] / (rho * rho);
        gp * rr + g / rho * (if i == j { 1.0 } else { 0.0 } - rr)
    })
}
