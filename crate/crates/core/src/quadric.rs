//! Conformal minimal surfaces in quadrics `Q_{h₀} ⊂ R^{p,q}`: harmonicity and
//! conformality residuals, harmonic sequences, Toda data, and the Weierstrass
//! representation of null holomorphic curves.
//!
//! Complex vector fields are stored as interleaved `(re, im)` pairs per
//! coordinate. `⟨v, w⟩` is the complex-bilinear extension of the signature
//! form; the Hermitian form is `⟨v, w̄⟩`.
//!
//! Level `i` of a sequence is obtained by `i` nested differentiations, and the
//! one-sided boundary stencils make the first `i` nodes from each face
//! inconsistent at that level. Level-`i` quantities are therefore evaluated on
//! nodes at distance at least `max(margin, i)` from the boundary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{dz_dzbar, wirtinger, GridField, Signature};
use crate::poly::Polynomial;
use crate::report::Check;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMap {
    field: GridField,
    sig: Signature,
    h0: f64,
}

pub const QUADRIC_TOL: f64 = 1e-10;

impl SurfaceMap {
    /// Checks `⟨φ, φ⟩ = h₀` at every node to `1e-10`.
    pub fn new(field: GridField, sig: Signature, h0: f64) -> Result<Self> {
        if field.dim() != 2 {
            return Err(Error::InvalidSurface(format!("surface needs a 2D grid, got {}D", field.dim())));
        }
        if field.components() != sig.dim() {
            return Err(Error::InvalidSurface(format!(
                "{} components for signature ({},{})",
                field.components(),
                sig.p,
                sig.q
            )));
        }
        if h0 != 1.0 && h0 != -1.0 {
            return Err(Error::InvalidSurface(format!("h0 must be +1 or -1, got {h0}")));
        }
        for n in 0..field.num_nodes() {
            let v = field.node(n);
            let dev = (sig.dot(v, v) - h0).abs();
            if !(dev <= QUADRIC_TOL) {
                return Err(Error::InvalidSurface(format!(
                    "<phi,phi> differs from h0 by {dev:e} at node {:?}",
                    field.multi_index(n)
                )));
            }
        }
        Ok(Self { field, sig, h0 })
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }
}

fn cplx(v: &[f64], k: usize) -> Complex64 {
    Complex64::new(v[2 * k], v[2 * k + 1])
}

/// `⟨a, b⟩` for interleaved complex vectors.
pub fn bilinear(a: &[f64], b: &[f64], sig: Signature) -> Complex64 {
    (0..sig.dim()).map(|k| cplx(a, k) * cplx(b, k) * sig.eta(k) as f64).sum()
}

/// `⟨a, b̄⟩`.
pub fn hermitian(a: &[f64], b: &[f64], sig: Signature) -> Complex64 {
    (0..sig.dim()).map(|k| cplx(a, k) * cplx(b, k).conj() * sig.eta(k) as f64).sum()
}

fn complexify(f: &GridField) -> GridField {
    f.map_nodes(2 * f.components(), |_, v, out| {
        for (k, x) in v.iter().enumerate() {
            out[2 * k] = *x;
            out[2 * k + 1] = 0.0;
        }
    })
    .expect("same grid")
}

fn dz(f: &GridField) -> Result<GridField> {
    Ok(wirtinger(f)?.0)
}

fn dzbar(f: &GridField) -> Result<GridField> {
    Ok(wirtinger(f)?.1)
}

/// Per node `φ_{zz̄} + (⟨φ_z, φ_z̄⟩/h₀) φ`.
pub fn harmonicity_residual(s: &SurfaceMap) -> Result<GridField> {
    let sig = s.sig;
    let c = complexify(&s.field);
    let (fz, fzb) = wirtinger(&c)?;
    let lap = dz_dzbar(&s.field)?;
    let h0 = s.h0;
    s.field.map_nodes(sig.dim(), |n, phi, out| {
        let lambda = hermitian(fz.node(n), fz.node(n), sig).re;
        let _ = fzb.node(n);
        for k in 0..sig.dim() {
            out[k] = lap.node(n)[k] + lambda / h0 * phi[k];
        }
    })
}

/// Per node `|⟨φ_z, φ_z⟩|`.
pub fn conformality_residual(s: &SurfaceMap) -> Result<GridField> {
    let sig = s.sig;
    let fz = dz(&complexify(&s.field))?;
    fz.map_nodes(1, |_, v, out| out[0] = bilinear(v, v, sig).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Superminimal,
    Superconformal,
    /// Sequence terminates (`h_{r+1} = 0`) before isotropy reaches the ambient dimension.
    Degenerate,
    /// `h_{r+1} ≠ 0` but the isotropy order does not match the ambient dimension.
    Inapplicable,
}

#[derive(Debug, Clone, Copy)]
pub struct SequenceOptions {
    /// `C` in the vanishing gate `C·h²·scale`.
    pub tol_scale: f64,
    /// Minimum distance from the boundary of analyzed nodes.
    pub margin: usize,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        Self { tol_scale: 10.0, margin: 2 }
    }
}

#[derive(Debug, Clone)]
pub struct HarmonicSequence {
    pub sig: Signature,
    pub h0: f64,
    /// `φ₀ … φ_{r+1}`, complex.
    pub phis: Vec<GridField>,
    /// `h₀ … h_{r+1}` (constant `h₀` first).
    pub h: Vec<GridField>,
    /// `ε₀ = sign h₀, ε₁, …` for every nonvanishing level.
    pub eps: Vec<i32>,
    /// `w_i = ½ log |h_i|` for `1 ≤ i ≤ r` (index `i − 1`).
    pub w: Vec<GridField>,
    pub r: usize,
    pub classification: Classification,
    /// Whether `h_{r+1}` vanishes on the analyzed nodes.
    pub top_vanishes: bool,
    /// Per-level vanishing thresholds (index = level).
    pub tol: Vec<f64>,
    /// Nodes dropped because `h_i` vanishes there but not elsewhere.
    pub excluded: Vec<usize>,
    pub margin: usize,
    pub spacing: f64,
    /// Gated harmonicity and conformality sup norms of the input.
    pub harmonicity: f64,
    pub conformality: f64,
}

impl HarmonicSequence {
    /// Nodes usable for quantities `depth` differentiations deep.
    pub fn analyzed(&self, n: usize, depth: usize) -> bool {
        self.phis[0].is_interior(n, self.margin.max(depth)) && !self.excluded.contains(&n)
    }

    pub fn describe(&self) -> String {
        match self.classification {
            Classification::Degenerate => format!("sequence terminates at level {}", self.r + 1),
            Classification::Superminimal => format!("superminimal, isotropy order {}", self.r),
            Classification::Superconformal => format!("superconformal, isotropy order {}", self.r),
            Classification::Inapplicable => format!("isotropy order {} does not match dimension {}", self.r, self.sig.dim()),
        }
    }
}

fn sup_where(f: &GridField, keep: impl Fn(usize) -> bool) -> (f64, Option<usize>) {
    f.sup_norm_where(keep)
}

/// Builds `φ₀ = φ`, `φ₁ = φ_z`, `φ_{i+1} = (φ_i)_z − (⟨(φ_i)_z, φ̄_i⟩/h_i) φ_i`
/// while `h_i` is nonvanishing and `φ_i` isotropic.
pub fn build_sequence(s: &SurfaceMap, opts: SequenceOptions) -> Result<HarmonicSequence> {
    let sig = s.sig;
    let n = sig.dim();
    let grid = &s.field;
    let spacing = grid.max_spacing();
    let base = |k: usize| move |node: usize| grid.is_interior(node, opts.margin.max(k));
    let phi0 = complexify(grid);
    let phi1 = dz(&phi0)?;
    let grad2 = phi1.map_nodes(1, |_, v, out| out[0] = v.iter().map(|x| x * x).sum())?;
    let mut running_scale = 1.0f64.max(4.0 * sup_where(&grad2, base(1)).0);
    let gate = opts.tol_scale * spacing * spacing * running_scale;
    let harmonicity = sup_where(&harmonicity_residual(s)?, base(2)).0;
    let conformality = sup_where(&conformality_residual(s)?, base(1)).0;
    if !(harmonicity <= gate && conformality <= gate) {
        return Err(Error::InvalidSurface(format!(
            "not a conformal minimal surface within {gate:e}: harmonicity {harmonicity:e}, conformality {conformality:e}"
        )));
    }
    let h0_field = grid.map_nodes(1, |_, _, out| out[0] = s.h0)?;
    let mut phis = vec![phi0, phi1];
    let mut hs = vec![h0_field];
    let mut eps = vec![s.h0 as i32];
    let mut tol = vec![0.0];
    let mut excluded: Vec<usize> = Vec::new();
    let mut w = Vec::new();
    let (r, top_vanishes) = loop {
        let i = phis.len() - 1;
        let phi = &phis[i];
        let hi = phi.map_nodes(1, |_, v, out| out[0] = hermitian(v, v, sig).re)?;
        let norm2 = phi.map_nodes(1, |_, v, out| out[0] = v.iter().map(|x| x * x).sum())?;
        running_scale = running_scale.max(sup_where(&norm2, base(i)).0);
        let t = opts.tol_scale * spacing * spacing * running_scale;
        tol.push(t);
        let nodes: Vec<usize> = (0..grid.num_nodes()).filter(|&k| base(i)(k) && !excluded.contains(&k)).collect();
        let vanishing: Vec<usize> = nodes.iter().copied().filter(|&k| !(hi.node(k)[0].abs() > t)).collect();
        if i == 1 {
            if let Some(&k) = nodes.iter().find(|&&k| !(hi.node(k)[0] > t)) {
                return Err(Error::InvalidSurface(format!(
                    "induced metric h1 = {:e} not positive at node {:?}",
                    hi.node(k)[0],
                    grid.multi_index(k)
                )));
            }
        }
        hs.push(hi);
        if vanishing.len() == nodes.len() {
            break (i - 1, true);
        }
        excluded.extend(vanishing.iter().copied());
        let hi = &hs[i];
        let live: Vec<usize> = nodes.iter().copied().filter(|k| !vanishing.contains(k)).collect();
        let sign = hi.node(live[0])[0].signum() as i32;
        if let Some(&k) = live.iter().find(|&&k| hi.node(k)[0].signum() as i32 != sign) {
            return Err(Error::SignChange { level: i, node: grid.multi_index(k) });
        }
        eps.push(sign);
        w.push(hi.map_nodes(1, |_, v, out| out[0] = 0.5 * v[0].abs().ln())?);
        let iso = phi.map_nodes(1, |_, v, out| out[0] = bilinear(v, v, sig).norm())?;
        let iso_sup = sup_where(&iso, |k| live.contains(&k)).0;
        if !(iso_sup <= t) || i >= n {
            w.pop();
            break (i - 1, false);
        }
        let dphi = dz(phi)?;
        let next = dphi.map_nodes(2 * n, |k, d, out| {
            let p = phi.node(k);
            let c = hermitian(d, p, sig) / hi.node(k)[0];
            for a in 0..n {
                let v = cplx(d, a) - c * cplx(p, a);
                out[2 * a] = v.re;
                out[2 * a + 1] = v.im;
            }
        })?;
        phis.push(next);
    };
    excluded.sort_unstable();
    excluded.dedup();
    let maximal = n == 2 * r + 2 || n == 2 * r + 3;
    let classification = match (top_vanishes, maximal) {
        (true, true) => Classification::Superminimal,
        (true, false) => Classification::Degenerate,
        (false, true) => Classification::Superconformal,
        (false, false) => Classification::Inapplicable,
    };
    Ok(HarmonicSequence {
        sig,
        h0: s.h0,
        phis,
        h: hs,
        eps,
        w,
        r,
        classification,
        top_vanishes,
        tol,
        excluded,
        margin: opts.margin,
        spacing,
        harmonicity,
        conformality,
    })
}

fn located(seq: &HarmonicSequence, name: &str, f: &GridField, depth: usize) -> Check {
    let (v, at) = sup_where(f, |k| seq.analyzed(k, depth));
    Check::new(name, v).at(at.map(|k| f.multi_index(k)))
}

fn max_check(name: &str, checks: Vec<Check>) -> Check {
    checks
        .into_iter()
        .fold(Check::new(name, 0.0), |best, c| {
            if c.sup_norm > best.sup_norm || c.sup_norm.is_nan() {
                Check { name: name.to_string(), ..c }
            } else {
                best
            }
        })
}

/// Sup norms of the six structure relations:
/// `orthogonality` (pairwise Hermitian orthogonality of `φ̄_r..φ̄₁, φ₀, φ₁..φ_r`),
/// `top_orthogonality` (`φ_{r+1}` against that set), `holomorphic_differential`
/// (`∂_z̄ ⟨φ_{r+1}, φ_{r+1}⟩`), `dz_recursion`, `dzbar_recursion`, `toda_w`.
pub fn verify_sequence_relations(seq: &HarmonicSequence) -> Result<Vec<Check>> {
    let sig = seq.sig;
    let r = seq.r;
    let n = sig.dim();
    let phis = &seq.phis;
    let pair = |i: usize, j: usize, conj: bool| -> Result<GridField> {
        phis[i].zip_map(&phis[j], 1, |a, b, out| {
            out[0] = if conj { hermitian(a, b, sig) } else { bilinear(a, b, sig) }.norm()
        })
    };
    let mut ortho = Vec::new();
    for i in 0..=r {
        for j in 0..=r {
            if i != j {
                ortho.push(located(seq, "", &pair(i, j, true)?, i.max(j)));
            }
            if (i, j) != (0, 0) {
                ortho.push(located(seq, "", &pair(i, j, false)?, i.max(j)));
            }
        }
    }
    let mut top = Vec::new();
    for j in 0..=r {
        top.push(located(seq, "", &pair(r + 1, j, true)?, r + 1));
        top.push(located(seq, "", &pair(r + 1, j, false)?, r + 1));
    }
    let top_square = phis[r + 1].map_nodes(2, |_, v, out| {
        let c = bilinear(v, v, sig);
        out[0] = c.re;
        out[1] = c.im;
    })?;
    let holo = dzbar(&top_square)?.node_norms();
    let log_h = |i: usize| -> Result<GridField> { seq.h[i].map_nodes(2, |_, v, out| {
        out[0] = 0.5 * v[0].abs().ln();
        out[1] = 0.0;
    }) };
    let mut rec_z = Vec::new();
    for i in 1..=r {
        let wz = dz(&log_h(i)?)?;
        let d = dz(&phis[i])?;
        let res = d.map_nodes(1, |k, dv, out| {
            let c = 2.0 * cplx(wz.node(k), 0);
            let p = phis[i].node(k);
            let q = phis[i + 1].node(k);
            out[0] = (0..n).map(|a| (cplx(dv, a) - cplx(q, a) - c * cplx(p, a)).norm_sqr()).sum::<f64>().sqrt();
        })?;
        rec_z.push(located(seq, "", &res, i + 1));
    }
    let mut rec_zb = Vec::new();
    for i in 1..=r + 1 {
        let d = dzbar(&phis[i])?;
        let res = d.map_nodes(1, |k, dv, out| {
            let ratio = seq.h[i].node(k)[0] / seq.h[i - 1].node(k)[0];
            let p = phis[i - 1].node(k);
            out[0] = (0..n).map(|a| (cplx(dv, a) + ratio * cplx(p, a)).norm_sqr()).sum::<f64>().sqrt();
        })?;
        rec_zb.push(located(seq, "", &res, i + 1));
    }
    let mut toda = Vec::new();
    for i in 1..=r {
        let wi = seq.h[i].map_nodes(1, |_, v, out| out[0] = 0.5 * v[0].abs().ln())?;
        let lap = dz_dzbar(&wi)?;
        let res = lap.map_nodes(1, |k, l, out| {
            let h = |j: usize| seq.h[j].node(k)[0];
            out[0] = 2.0 * l[0] - h(i + 1) / h(i) + h(i) / h(i - 1);
        })?;
        toda.push(located(seq, "", &res, i + 2));
    }
    Ok(vec![
        max_check("orthogonality", ortho),
        max_check("top_orthogonality", top),
        located(seq, "holomorphic_differential", &holo, r + 2),
        max_check("dz_recursion", rec_z),
        max_check("dzbar_recursion", rec_zb),
        max_check("toda_w", toda),
    ])
}

#[derive(Debug, Clone)]
pub struct TodaData {
    /// `w₁ … w_r`.
    pub w: Vec<GridField>,
    /// `μ₁ … μ_{r+1}` with `μ_i = ε_{i−1}ε_i` and `μ_{r+1} = ε ε_r`.
    pub mu: Vec<i32>,
    /// `ε = ⟨φ̃, φ̃⟩`.
    pub eps: i32,
    /// Complex `q` with `φ_{r+1} = q φ̃`.
    pub q: GridField,
    pub phi_tilde: GridField,
    /// Sup of the imaginary part of `φ_{r+1}/q` and of `|⟨φ̃,φ̃⟩ − ε|`.
    pub reality_residual: f64,
    /// Per-equation sup norms of the signed Toda system.
    pub toda_residuals: Vec<f64>,
    /// Sup of `|∂_z̄ q|`.
    pub q_holomorphy: f64,
}

/// Toda data of a superconformal surface in an even-dimensional quadric.
pub fn extract_toda_data(seq: &HarmonicSequence) -> Result<TodaData> {
    let sig = seq.sig;
    let n = sig.dim();
    let r = seq.r;
    if n % 2 == 1 {
        return Err(Error::Classification(format!("odd ambient dimension {n}")));
    }
    match seq.classification {
        Classification::Superconformal => {}
        Classification::Superminimal => return Err(Error::Classification("q undefined (h_{r+1} = 0)".into())),
        other => return Err(Error::Classification(format!("not superconformal ({other:?})"))),
    }
    let eps = seq.eps[r + 1];
    let top = &seq.phis[r + 1];
    let grid = &seq.phis[0];
    // q = √(ε⟨φ_{r+1}, φ_{r+1}⟩) on a branch continued from the first node along
    // rows, then across rows
    let shape = grid.shape().to_vec();
    let mut q = GridField::zeros(&shape, grid.origin(), grid.spacing(), 2)?;
    for k in 0..grid.num_nodes() {
        let sq = (bilinear(top.node(k), top.node(k), sig) * eps as f64).sqrt();
        let idx = grid.multi_index(k);
        let neighbour = if idx[1] > 0 {
            Some(k - 1)
        } else if idx[0] > 0 {
            Some(k - shape[1])
        } else {
            None
        };
        let pick = match neighbour {
            Some(m) => {
                let prev = Complex64::new(q.node(m)[0], q.node(m)[1]);
                if (sq - prev).norm() <= (sq + prev).norm() { sq } else { -sq }
            }
            None => sq,
        };
        q.node_mut(k).copy_from_slice(&[pick.re, pick.im]);
    }
    if let Some(k) = (0..grid.num_nodes()).find(|&k| seq.analyzed(k, r + 1) && !(q.node(k)[0].hypot(q.node(k)[1]) > 0.0)) {
        return Err(Error::QVanishes { node: grid.multi_index(k) });
    }
    let mut reality: f64 = 0.0;
    let phi_tilde = top.map_nodes(n, |k, v, out| {
        let qk = Complex64::new(q.node(k)[0], q.node(k)[1]);
        for a in 0..n {
            out[a] = (cplx(v, a) / qk).re;
        }
    })?;
    for k in (0..grid.num_nodes()).filter(|&k| seq.analyzed(k, r + 1)) {
        let qk = Complex64::new(q.node(k)[0], q.node(k)[1]);
        let v = top.node(k);
        for a in 0..n {
            reality = reality.max((cplx(v, a) / qk).im.abs());
        }
        let t = phi_tilde.node(k);
        reality = reality.max((sig.dot(t, t) - eps as f64).abs());
    }
    let mut mu: Vec<i32> = (1..=r).map(|i| seq.eps[i - 1] * seq.eps[i]).collect();
    mu.push(eps * seq.eps[r]);
    let q2 = q.map_nodes(1, |_, v, out| out[0] = v[0] * v[0] + v[1] * v[1])?;
    let residuals = toda_residual_fields(&seq.w, &mu, &q2, None)?;
    let toda_residuals = residuals
        .iter()
        .map(|f| sup_where(f, |k| seq.analyzed(k, r + 2)).0)
        .collect();
    let q_holomorphy = sup_where(&dzbar(&q)?.node_norms(), |k| seq.analyzed(k, r + 2)).0;
    Ok(TodaData { w: seq.w.clone(), mu, eps, q, phi_tilde, reality_residual: reality, toda_residuals, q_holomorphy })
}

/// `F_i = 2(w_i)_{zz̄} − μ_{i+1}e^{2w_{i+1}−2w_i} + μ_i e^{2w_i−2w_{i−1}} − f_i`
/// with `w₀ = 0`, the last exchange term replaced by `μ_{r+1}|q|²e^{−2w_r}`,
/// and `(·)_{zz̄} = ¼Δ` on the compact stencil.
pub fn toda_residual_fields(w: &[GridField], mu: &[i32], q_abs2: &GridField, forcing: Option<&[GridField]>) -> Result<Vec<GridField>> {
    let r = w.len();
    if mu.len() != r + 1 {
        return Err(Error::ShapeMismatch(format!("{r} fields need {} signs, got {}", r + 1, mu.len())));
    }
    let laps: Vec<GridField> = w.iter().map(dz_dzbar).collect::<Result<_>>()?;
    (0..r)
        .map(|i| {
            laps[i].map_nodes(1, |k, l, out| {
                let wi = w[i].node(k)[0];
                let lower = if i == 0 { 0.0 } else { w[i - 1].node(k)[0] };
                let exchange = if i + 1 < r {
                    (2.0 * w[i + 1].node(k)[0] - 2.0 * wi).exp()
                } else {
                    q_abs2.node(k)[0] * (-2.0 * wi).exp()
                };
                let f = forcing.map_or(0.0, |f| f[i].node(k)[0]);
                out[0] = 2.0 * l[0] - mu[i + 1] as f64 * exchange + mu[i] as f64 * (2.0 * wi - 2.0 * lower).exp() - f;
            })
        })
        .collect()
}

/// `τ(z) = Σ c_k z^k` with values in `C ⊗ R^{p,q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicCurve {
    pub sig: Signature,
    /// One polynomial per coordinate.
    pub components: Vec<Polynomial>,
    pub base: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveFile {
    signature: String,
    degree: usize,
    base: Vec<f64>,
    /// `coefficients[k][a] = [re, im]` of `z^k` in coordinate `a`.
    coefficients: Vec<Vec<[f64; 2]>>,
}

impl HolomorphicCurve {
    pub fn new(sig: Signature, components: Vec<Polynomial>, base: Vec<f64>) -> Result<Self> {
        if components.len() != sig.dim() || base.len() != sig.dim() {
            return Err(Error::ShapeMismatch(format!(
                "curve in R^{{{},{}}} needs {} components and base coordinates",
                sig.p,
                sig.q,
                sig.dim()
            )));
        }
        Ok(Self { sig, components, base })
    }

    /// JSON curve description (see [`HolomorphicCurve::to_json`]).
    pub fn from_json(text: &str) -> Result<Self> {
        let f: CurveFile = serde_json::from_str(text)?;
        let sig: Signature = f.signature.parse()?;
        if f.coefficients.len() != f.degree + 1 {
            return Err(Error::Parse(format!("degree {} needs {} coefficient rows", f.degree, f.degree + 1)));
        }
        if let Some(row) = f.coefficients.iter().find(|row| row.len() != sig.dim()) {
            return Err(Error::Parse(format!("coefficient row has {} entries, expected {}", row.len(), sig.dim())));
        }
        let components = (0..sig.dim())
            .map(|a| Polynomial::new(f.coefficients.iter().map(|row| Complex64::new(row[a][0], row[a][1])).collect()))
            .collect();
        Self::new(sig, components, f.base)
    }

    pub fn to_json(&self) -> Result<String> {
        let degree = self.components.iter().map(Polynomial::degree).max().unwrap_or(0);
        let coefficients = (0..=degree)
            .map(|k| {
                self.components
                    .iter()
                    .map(|p| {
                        let c = p.coeffs.get(k).copied().unwrap_or_default();
                        [c.re, c.im]
                    })
                    .collect()
            })
            .collect();
        let f = CurveFile { signature: format!("{},{}", self.sig.p, self.sig.q), degree, base: self.base.clone(), coefficients };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    /// `⟨τ, τ⟩` as a polynomial.
    pub fn square(&self) -> Polynomial {
        self.components
            .iter()
            .enumerate()
            .fold(Polynomial::constant(Complex64::new(0.0, 0.0)), |acc, (a, p)| {
                acc.add(&p.mul(p).scale(Complex64::new(self.sig.eta(a) as f64, 0.0)))
            })
    }
}

/// `φ(z) = φ(0) + Re ∫₀^z τ` on the rectangle `[x0, x1] × [y0, y1]` with `n × n` nodes.
pub fn weierstrass_integrate(curve: &HolomorphicCurve, domain: [f64; 4], n: usize) -> Result<GridField> {
    let sig = curve.sig;
    let sq = curve.square();
    let scale: f64 = curve.components.iter().flat_map(|p| p.coeffs.iter()).map(|c| c.norm_sqr()).sum();
    let worst = sq.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if worst > 1e-12 * scale.max(1.0) {
        return Err(Error::NotNull(format!("<tau,tau> has a coefficient of size {worst:e}")));
    }
    let anti: Vec<Polynomial> = curve.components.iter().map(Polynomial::integral).collect();
    let [x0, x1, y0, y1] = domain;
    let field = GridField::from_bounds(&[x0, y0], &[x1, y1], &[n, n], sig.dim(), |x, out| {
        let z = Complex64::new(x[0], x[1]);
        for a in 0..sig.dim() {
            out[a] = curve.base[a] + anti[a].eval(z).re;
        }
    })?;
    for k in 0..field.num_nodes() {
        let c = field.coords(k);
        let z = Complex64::new(c[0], c[1]);
        let v: Vec<Complex64> = curve.components.iter().map(|p| p.eval(z)).collect();
        let herm: f64 = (0..sig.dim()).map(|a| sig.eta(a) as f64 * v[a].norm_sqr()).sum();
        if !(herm > 0.0) {
            return Err(Error::InvalidSurface(format!("<tau, conj tau> = {herm:e} at node {:?}", field.multi_index(k))));
        }
    }
    Ok(field)
}

/// Flat-space residuals of a Weierstrass surface: `(sup |φ_{zz̄}|, sup |⟨φ_z,φ_z⟩|)`.
pub fn flat_minimal_residuals(phi: &GridField, sig: Signature, margin: usize) -> Result<(f64, f64)> {
    let lap = dz_dzbar(phi)?;
    let fz = dz(&complexify(phi))?;
    let conf = fz.map_nodes(1, |_, v, out| out[0] = bilinear(v, v, sig).norm())?;
    Ok((lap.sup_norm_interior(margin), conf.sup_norm_interior(margin)))
}
