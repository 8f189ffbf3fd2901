//! Semi-flat G2 structures on `B × T⁴` from an immersion `u: B → Λ²R⁴`.
//!
//! Base coordinates `b¹, b², b³` are the grid axes and form indices 0..2 of the
//! 7-dimensional coframe; fibre coordinates `x¹..x⁴` are indices 3..6. The fibre
//! is never discretized: every form is a table of 35 coefficients per base node
//! over the lexicographic monomials of `R⁷`.

use crate::cone::{tension_field, Flat, MetricField};
use crate::error::{Error, Result};
use crate::exterior::{combination_rank, exterior_derivative_mixed, AlternatingForm, GridField, Signature};
use crate::g2::{pairing, LAMBDA2_BASIS};
use crate::linalg::{require_positive_definite, sym_index, unpack};

/// Sampled `u = u_ij dx^{ij}` on a 3D base grid with constant fibre volume `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionField {
    u: GridField,
    tau: f64,
}

impl ImmersionField {
    pub fn new(u: GridField, tau: f64) -> Result<Self> {
        if u.dim() != 3 || u.components() != 6 {
            return Err(Error::ShapeMismatch(format!(
                "immersion needs 6 components on a 3D grid, got {} on {}D",
                u.components(),
                u.dim()
            )));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidTau(tau));
        }
        Ok(Self { u, tau })
    }

    /// Accepts a sampled fibre volume only if it is constant.
    pub fn with_tau_field(u: GridField, tau: &GridField) -> Result<Self> {
        let t0 = tau.values().first().copied().unwrap_or(f64::NAN);
        if let Some(&bad) = tau.values().iter().find(|&&t| t != t0) {
            return Err(Error::InvalidTau(bad));
        }
        Self::new(u, t0)
    }

    pub fn field(&self) -> &GridField {
        &self.u
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// `h_μν = Q(∂_μu, ∂_νu) / (2τ)` with `α ∧ β = Q(α, β) dx¹²³⁴`, checked
/// positive definite at every node.
pub fn pullback_metric(u: &ImmersionField) -> Result<GridField> {
    let grad = u.u.gradient()?;
    let tau = u.tau;
    let h = u.u.map_nodes(6, |n, _, out| {
        for m in 0..3 {
            for v in m..3 {
                out[sym_index(m, v, 3)] = pairing(grad[m].node(n), grad[v].node(n)) / (2.0 * tau);
            }
        }
    })?;
    require_positive_definite(&h)?;
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct SemiflatG2 {
    pub h: GridField,
    /// `θ_μ = ∂_μ u_ij dx^{ij}`, six coefficients per `μ`.
    pub theta: GridField,
    /// 3-form coefficients over `R⁷`.
    pub phi: GridField,
    /// 4-form coefficients over `R⁷`.
    pub psi: GridField,
    pub tau: f64,
}

fn rank7(idx: &[usize]) -> usize {
    combination_rank(7, idx).expect("valid index")
}

/// `φ = √det h db¹²³ + db^μ ∧ θ_μ`, `ψ = τ dx¹²³⁴ + (*₃db^μ) ∧ θ_μ` where
/// `*₃db^μ = √det h h^{μν} ι_{∂ν} db¹²³`.
pub fn build_phi_psi(u: &ImmersionField) -> Result<SemiflatG2> {
    let h = pullback_metric(u)?;
    let grad = u.u.gradient()?;
    let theta = u.u.map_nodes(18, |n, _, out| {
        for m in 0..3 {
            out[m * 6..m * 6 + 6].copy_from_slice(grad[m].node(n));
        }
    })?;
    let base_vol = rank7(&[0, 1, 2]);
    let fibre_vol = rank7(&[3, 4, 5, 6]);
    let phi_slots: Vec<[usize; 6]> = (0..3)
        .map(|m| std::array::from_fn(|k| rank7(&[m, 3 + LAMBDA2_BASIS[k].0, 3 + LAMBDA2_BASIS[k].1])))
        .collect();
    // ι_{∂ν} db¹²³ as (pair, sign)
    let contracted = [((1, 2), 1.0), ((0, 2), -1.0), ((0, 1), 1.0)];
    let psi_slots: Vec<[usize; 6]> = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(a, b)| std::array::from_fn(|k| rank7(&[a, b, 3 + LAMBDA2_BASIS[k].0, 3 + LAMBDA2_BASIS[k].1])))
        .collect();
    let pair_slot = |p: (usize, usize)| match p {
        (0, 1) => 0,
        (0, 2) => 1,
        _ => 2,
    };
    let tau = u.tau;
    let phi = h.map_nodes(35, |n, hn, out| {
        out.fill(0.0);
        out[base_vol] = unpack(hn, 3).determinant().sqrt();
        for m in 0..3 {
            for k in 0..6 {
                out[phi_slots[m][k]] += grad[m].node(n)[k];
            }
        }
    })?;
    let psi = h.map_nodes(35, |n, hn, out| {
        out.fill(0.0);
        out[fibre_vol] = tau;
        let hm = unpack(hn, 3);
        let vol = hm.determinant().sqrt();
        let hinv = hm.try_inverse().expect("positive definite");
        for m in 0..3 {
            let mut star = [0.0; 3];
            for (v, &(p, s)) in contracted.iter().enumerate() {
                star[pair_slot(p)] += s * vol * hinv[(m, v)];
            }
            for (slot, c) in star.iter().enumerate() {
                for k in 0..6 {
                    out[psi_slots[slot][k]] += c * grad[m].node(n)[k];
                }
            }
        }
    })?;
    Ok(SemiflatG2 { h, theta, phi, psi, tau })
}

impl SemiflatG2 {
    pub fn phi_at(&self, n: usize) -> AlternatingForm<f64> {
        AlternatingForm::from_dense(7, 3, self.phi.node(n)).expect("35 coefficients")
    }

    pub fn psi_at(&self, n: usize) -> AlternatingForm<f64> {
        AlternatingForm::from_dense(7, 4, self.psi.node(n)).expect("35 coefficients")
    }

    pub fn theta_at(&self, n: usize, mu: usize) -> AlternatingForm<f64> {
        AlternatingForm::from_dense(4, 2, &self.theta.node(n)[mu * 6..mu * 6 + 6]).expect("6 coefficients")
    }
}

/// Sup norms of `dφ` and `dψ` over nodes at least `margin` from the boundary.
pub fn closure_residuals(s: &SemiflatG2, margin: usize) -> Result<(f64, f64)> {
    let dphi = exterior_derivative_mixed(&s.phi, 7, 3)?;
    let dpsi = exterior_derivative_mixed(&s.psi, 7, 4)?;
    Ok((dphi.sup_norm_interior(margin), dpsi.sup_norm_interior(margin)))
}

/// Laplace–Beltrami of each `u_ij` for the metric `h`:
/// `h^{μν}(∂_μ∂_ν u − Γ^γ_μν ∂_γ u)`.
pub fn harmonicity_residual(u: &ImmersionField) -> Result<GridField> {
    let h = MetricField::new(pullback_metric(u)?)?;
    tension_field(&h, &u.u, &Flat(Signature::euclidean(6)))
}

/// Sup over interior nodes of `|(1/√h) ∂_μ(√h h^{μγ}) + h^{μν}Γ^γ_μν|`, i.e.
/// `Δb^γ` computed in divergence form against the Christoffel form.
pub fn coordinate_laplacian_check(h: &MetricField, margin: usize) -> Result<f64> {
    let gamma = crate::cone::christoffel(h)?;
    let inv = h.inverse();
    let dens = h.field().map_nodes(3, |n, g, out| {
        let vol = unpack(g, 3).determinant().sqrt();
        for c in 0..3 {
            out[c] = vol;
        }
        let _ = n;
    })?;
    let flux: Vec<GridField> = (0..3)
        .map(|m| {
            dens.zip_map(inv, 3, |d, i, out| {
                for c in 0..3 {
                    out[c] = d[c] * i[sym_index(m, c, 3)];
                }
            })
        })
        .collect::<Result<_>>()?;
    let div: Vec<GridField> = (0..3).map(|m| flux[m].partial(m)).collect::<Result<_>>()?;
    let diff = dens.map_nodes(3, |n, d, out| {
        for c in 0..3 {
            let divergence: f64 = (0..3).map(|m| div[m].node(n)[c]).sum::<f64>() / d[c];
            let mut contraction = 0.0;
            for m in 0..3 {
                for v in 0..3 {
                    contraction += inv.node(n)[sym_index(m, v, 3)] * gamma.node(n)[c * 9 + m * 3 + v];
                }
            }
            out[c] = divergence + contraction;
        }
    })?;
    Ok(diff.sup_norm_interior(margin))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSymmetryReport {
    pub lambda: f64,
    /// Sup of `|ℒ_Vφ − λφ − 2λ dvol_B|`.
    pub lie_residual: f64,
    /// Sup of `|div V − 3λ|`.
    pub div_residual: f64,
    /// Sup of `|h(t) − e^{2(t−t₀)} h(t₀)|`.
    pub metric_residual: f64,
}

fn null_slice_check(u0: &GridField) -> Result<()> {
    if u0.dim() != 2 || u0.components() != 6 {
        return Err(Error::ShapeMismatch("slice must be a 6-component field on a 2D grid".into()));
    }
    for n in 0..u0.num_nodes() {
        let v = u0.node(n);
        let scale = v.iter().map(|x| x * x).sum::<f64>();
        if pairing(v, v).abs() <= 1e-12 * scale.max(1e-300) {
            return Err(Error::NullSlice { node: u0.multi_index(n) });
        }
    }
    Ok(())
}

/// Extends a slice to `u(x, y, t) = eᵗ u₀(x, y)` on `t ∈ [t0, t1]` (`nt` nodes).
pub fn scaled_extension(u0: &GridField, t0: f64, t1: f64, nt: usize) -> Result<GridField> {
    if nt < 3 || !(t1 > t0) {
        return Err(Error::InvalidGrid(format!("need t1 > t0 and nt >= 3, got [{t0}, {t1}] / {nt}")));
    }
    let ht = (t1 - t0) / (nt - 1) as f64;
    let mut shape = u0.shape().to_vec();
    shape.push(nt);
    let mut origin = u0.origin().to_vec();
    origin.push(t0);
    let mut spacing = u0.spacing().to_vec();
    spacing.push(ht);
    let mut u = GridField::zeros(&shape, &origin, &spacing, 6)?;
    for n in 0..u.num_nodes() {
        let idx = u.multi_index(n);
        let s = (t0 + idx[2] as f64 * ht).exp();
        let src: Vec<f64> = u0.at(&idx[..2]).iter().map(|v| s * v).collect();
        u.node_mut(n).copy_from_slice(&src);
    }
    Ok(u)
}

/// Checks that `V = ∂_t` is a conformal scaling of the semi-flat structure
/// built from `eᵗu₀`: `ℒ_Vφ = λφ + 2λ dvol_B` and `div V = 3λ`, with `λ`
/// fitted by least squares over interior nodes.
pub fn scaling_symmetry_check(u0: &GridField, t0: f64, t1: f64, nt: usize, tau: f64) -> Result<ScalingSymmetryReport> {
    null_slice_check(u0)?;
    let u = ImmersionField::new(scaled_extension(u0, t0, t1, nt)?, tau)?;
    let s = build_phi_psi(&u)?;
    let iv = s.phi.map_nodes(21, |_, phi, out| {
        let f = AlternatingForm::from_dense(7, 3, phi).expect("35 coefficients");
        let c = f.interior(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).expect("degree 3");
        out.copy_from_slice(&c.to_dense());
    })?;
    let lie = exterior_derivative_mixed(&iv, 7, 2)?;
    let base_vol = rank7(&[0, 1, 2]);
    let target = s.phi.map_nodes(35, |_, phi, out| {
        out.copy_from_slice(phi);
        out[base_vol] += 2.0 * phi[base_vol];
    })?;
    let interior: Vec<usize> = (0..lie.num_nodes()).filter(|&n| lie.is_interior(n, 1)).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for &n in &interior {
        for (a, b) in lie.node(n).iter().zip(target.node(n)) {
            num += a * b;
            den += b * b;
        }
    }
    let lambda = num / den;
    let mut lie_residual: f64 = 0.0;
    for &n in &interior {
        for (a, b) in lie.node(n).iter().zip(target.node(n)) {
            lie_residual = lie_residual.max((a - lambda * b).abs());
        }
    }
    let vol = s.phi.map_nodes(1, |_, phi, out| out[0] = phi[base_vol])?;
    let dvol = vol.partial(2)?;
    let mut div_residual: f64 = 0.0;
    for &n in &interior {
        div_residual = div_residual.max((dvol.node(n)[0] / vol.node(n)[0] - 3.0 * lambda).abs());
    }
    let ht = s.h.spacing()[2];
    let mut metric_residual: f64 = 0.0;
    for n in 0..s.h.num_nodes() {
        let mut idx = s.h.multi_index(n);
        let k = idx[2];
        idx[2] = 0;
        let base = s.h.at(&idx);
        let f = (2.0 * k as f64 * ht).exp();
        for (a, b) in s.h.node(n).iter().zip(base) {
            metric_residual = metric_residual.max((a - f * b).abs());
        }
    }
    Ok(ScalingSymmetryReport { lambda, lie_residual, div_residual, metric_residual })
}

#[derive(Debug, Clone)]
pub struct GaugeSlice {
    pub r: GridField,
    pub s: GridField,
    /// Sup over interior nodes of `|∂_y r − ∂_x s|`.
    pub integrability_residual: f64,
    /// Sup over interior nodes of `|∇c|` where `2c dx¹²³⁴ = u₀ ∧ u₀`.
    pub c_residual: f64,
}

/// `r u∧u = −u∧u_x`, `s u∧u = −u∧u_y` on a 2D slice.
pub fn gauge_slice(u0: &GridField) -> Result<GaugeSlice> {
    null_slice_check(u0)?;
    let ux = u0.partial(0)?;
    let uy = u0.partial(1)?;
    let quotient = |d: &GridField| {
        u0.zip_map(d, 1, |u, du, out| out[0] = -pairing(u, du) / pairing(u, u))
    };
    let r = quotient(&ux)?;
    let s = quotient(&uy)?;
    let integ = r.partial(1)?.sub(&s.partial(0)?)?;
    let c = u0.map_nodes(1, |_, u, out| out[0] = pairing(u, u) / 2.0)?;
    let grad = GridField::stack(&[&c.partial(0)?, &c.partial(1)?])?;
    Ok(GaugeSlice {
        integrability_residual: integ.sup_norm_interior(1),
        c_residual: grad.sup_norm_interior(1),
        r,
        s,
    })
}
