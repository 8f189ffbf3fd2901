//! G2 linear algebra: the standard forms, metric recovery from a 3-form,
//! coassociative planes and their deformation forms, the adapted normal frame,
//! and the action of SL(4,Z) on Λ²R⁴.
//!
//! In the coframe `(a¹, a², a³, e¹, …, e⁴)` the normal form of a coassociative
//! splitting is literally `φ₀`, `ψ₀`; the vertical self-dual frame is
//! `ω₁ = e¹²+e³⁴`, `ω₂ = e¹³−e²⁴`, `ω₃ = −e¹⁴−e²³`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::{volume_form, AlternatingForm, Orientation, Rational, Scalar, Signature};

pub const PHI0: &str = "e123 + e145 + e167 + e246 - e257 - e347 - e356";
pub const PSI0: &str = "e4567 + e2345 + e2367 - e1346 + e1357 - e1247 - e1256";

/// `(ω₁, ω₂, ω₃)` on R⁴.
pub const OMEGA: [&str; 3] = ["e12 + e34", "e13 - e24", "-e14 - e23"];

#[derive(Debug, Clone, PartialEq)]
pub struct G2FormPair<T: Scalar = f64> {
    pub phi: AlternatingForm<T>,
    pub psi: AlternatingForm<T>,
}

pub fn standard_forms<T: Scalar>() -> G2FormPair<T> {
    G2FormPair {
        phi: AlternatingForm::parse(7, PHI0).expect("valid literal"),
        psi: AlternatingForm::parse(7, PSI0).expect("valid literal"),
    }
}

pub fn omega_frame<T: Scalar>() -> [AlternatingForm<T>; 3] {
    OMEGA.map(|s| AlternatingForm::parse(4, s).expect("valid literal"))
}

/// Exact or floating ninth roots, for the volume normalization.
pub trait NinthRoot: Sized {
    fn ninth_root(&self) -> Option<Self>;
}

impl NinthRoot for f64 {
    fn ninth_root(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.powf(1.0 / 9.0))
    }
}

fn int_ninth_root(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let guess = (n as f64).powf(1.0 / 9.0).round() as i64;
    (guess.saturating_sub(1)..=guess + 1).find(|&r| r >= 0 && (r as i128).pow(9) == n as i128)
}

impl NinthRoot for Rational {
    fn ninth_root(&self) -> Option<Self> {
        Some(Rational::new(int_ninth_root(*self.numer())?, int_ninth_root(*self.denom())?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricVolume<T: Scalar = f64> {
    /// Row-major 7×7.
    pub metric: Vec<Vec<T>>,
    pub dvol: AlternatingForm<T>,
}

/// `b_AB` with `(1/6) φ ∧ ι_A φ ∧ ι_B φ = b_AB e^{1…7}`.
pub fn g2_bilinear<T: Scalar>(phi: &AlternatingForm<T>) -> Result<Vec<Vec<T>>> {
    if phi.dim() != 7 || phi.degree() != 3 {
        return Err(Error::InvalidDegree(format!(
            "expected a 3-form on R^7, got degree {} on R^{}",
            phi.degree(),
            phi.dim()
        )));
    }
    let basis = |a: usize| (0..7).map(|i| if i == a { T::one() } else { T::zero() }).collect::<Vec<_>>();
    let contracted: Vec<_> = (0..7).map(|a| phi.interior(&basis(a))).collect::<Result<_>>()?;
    let six = T::from_i64(6).expect("small integer");
    let top: Vec<usize> = (0..7).collect();
    let mut b = vec![vec![T::zero(); 7]; 7];
    for a in 0..7 {
        let pa = phi.wedge(&contracted[a])?;
        for c in a..7 {
            let v = pa.wedge(&contracted[c])?.coeff(&top) / six.clone();
            b[a][c] = v.clone();
            b[c][a] = v;
        }
    }
    Ok(b)
}

/// Pivots of Gaussian elimination without row exchange (ratios of leading
/// principal minors). `None` if a leading minor vanishes.
fn leading_pivots<T: Scalar>(m: &[Vec<T>]) -> Option<Vec<T>> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let p = a[k][k].clone();
        if p.is_zero() {
            return None;
        }
        for i in k + 1..n {
            let f = a[i][k].clone() / p.clone();
            for j in k..n {
                let t = a[k][j].clone() * f.clone();
                a[i][j] = a[i][j].clone() - t;
            }
        }
        pivots.push(p);
    }
    Some(pivots)
}

/// Solve `g(A,B)·dvol = (1/6)φ∧ι_Aφ∧ι_Bφ` with `dvol` the unit volume form of `g`.
/// Writing the right side as `b_AB e^{1…7}`: `g = ±b/|det b|^{1/9}`,
/// `dvol = ±|det b|^{1/9} e^{1…7}`, the sign chosen so that `g` is positive.
pub fn metric_from_three_form<T: Scalar + NinthRoot>(phi: &AlternatingForm<T>) -> Result<MetricVolume<T>> {
    let b = g2_bilinear(phi)?;
    let pivots = leading_pivots(&b).ok_or_else(|| Error::NotG2Type("bilinear form is degenerate".into()))?;
    let positive = pivots.iter().all(|p| p.is_positive());
    let negative = pivots.iter().all(|p| p.is_negative());
    if !positive && !negative {
        return Err(Error::NotG2Type("bilinear form is indefinite".into()));
    }
    let det = pivots.into_iter().fold(T::one(), |acc, p| acc * p);
    let lambda = det
        .abs()
        .ninth_root()
        .ok_or_else(|| Error::NotG2Type("determinant has no exact ninth root".into()))?;
    let (sign, orientation) = if positive {
        (T::one(), Orientation::Positive)
    } else {
        (-T::one(), Orientation::Negative)
    };
    let metric = b
        .iter()
        .map(|row| row.iter().map(|v| sign.clone() * v.clone() / lambda.clone()).collect())
        .collect();
    Ok(MetricVolume { metric, dvol: volume_form::<T>(7, orientation).scale(lambda) })
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

fn g_dot(g: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let (x, y) = (DVector::from_column_slice(x), DVector::from_column_slice(y));
    x.dot(&(g * y))
}

/// Hodge star for a positive definite metric `g` (row-major) and volume form
/// `orientation · √det g · e^{1…n}`: pull back to a `g`-orthonormal frame, apply
/// the Euclidean star there, push forward again.
pub fn hodge_star_metric(form: &AlternatingForm<f64>, g: &[Vec<f64>], orientation: Orientation) -> Result<AlternatingForm<f64>> {
    let n = form.dim();
    if g.len() != n {
        return Err(Error::DimensionMismatch(n, g.len()));
    }
    let gm = to_matrix(g);
    let chol = gm
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite { node: vec![], eigenvalues: gm.symmetric_eigenvalues().iter().copied().collect() })?;
    // g = L Lᵀ, so the columns of F = L^{-T} are g-orthonormal with det F > 0
    let f = chol.l().transpose().try_inverse().ok_or(Error::Singular { node: vec![] })?;
    let finv = f.clone().try_inverse().ok_or(Error::Singular { node: vec![] })?;
    let local = form.pullback(&columns(&f))?;
    let starred = local.hodge_star(Signature::euclidean(n), orientation)?;
    starred.pullback(&columns(&finv))
}

/// Smallest over largest singular value of the column matrix.
fn conditioning(vectors: &[Vec<f64>]) -> f64 {
    let m = DMatrix::from_fn(vectors[0].len(), vectors.len(), |i, j| vectors[j][i]);
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

fn check_plane(phi: &AlternatingForm<f64>, plane: &[Vec<f64>]) -> Result<()> {
    if plane.len() != 4 {
        return Err(Error::InvalidDegree(format!("a plane needs 4 spanning vectors, got {}", plane.len())));
    }
    if let Some(v) = plane.iter().find(|v| v.len() != phi.dim()) {
        return Err(Error::DimensionMismatch(phi.dim(), v.len()));
    }
    if conditioning(plane) < 1e-12 {
        return Err(Error::DependentVectors);
    }
    Ok(())
}

pub const COASSOCIATIVE_TOL: f64 = 1e-12;

/// `(φ|_P = 0 within tolerance, max |φ(vᵢ,vⱼ,v_k)|)`.
pub fn coassociative_check(phi: &AlternatingForm<f64>, plane: &[Vec<f64>]) -> Result<(bool, f64)> {
    check_plane(phi, plane)?;
    let norm = phi.pullback(plane)?.max_abs();
    Ok((norm <= COASSOCIATIVE_TOL, norm))
}

#[derive(Debug, Clone)]
pub struct DeformationForm {
    /// 2-form in the oriented orthonormal frame `frame`.
    pub form: AlternatingForm<f64>,
    pub frame: Vec<Vec<f64>>,
    /// `max |*ω − ω|` for the induced metric and orientation.
    pub self_duality_residual: f64,
}

/// Gram–Schmidt with respect to `g`.
fn orthonormalize(vectors: &[Vec<f64>], g: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let c = g_dot(g, &w, u);
            w.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        }
        let n2 = g_dot(g, &w, &w);
        if !(n2 > 1e-24) {
            return Err(Error::DependentVectors);
        }
        let s = n2.sqrt();
        out.push(w.into_iter().map(|a| a / s).collect());
    }
    Ok(out)
}

/// `ι_ν φ` restricted to a coassociative plane, written in a `g`-orthonormal
/// frame of the plane oriented by `ψ|`.
pub fn deformation_form(phi: &AlternatingForm<f64>, plane: &[Vec<f64>], nu: &[f64]) -> Result<DeformationForm> {
    let (ok, norm) = coassociative_check(phi, plane)?;
    if !ok {
        return Err(Error::NotCoassociative(norm));
    }
    let mv = metric_from_three_form(phi)?;
    let orientation = if mv.dvol.coeff(&[0, 1, 2, 3, 4, 5, 6]) > 0.0 { Orientation::Positive } else { Orientation::Negative };
    let psi = hodge_star_metric(phi, &mv.metric, orientation)?;
    let g = to_matrix(&mv.metric);
    let mut frame = orthonormalize(plane, &g)?;
    if psi.evaluate(&frame)? < 0.0 {
        frame[3].iter_mut().for_each(|v| *v = -*v);
    }
    let form = phi.interior(nu)?.pullback(&frame)?;
    let dual = form.hodge_star(Signature::euclidean(4), Orientation::Positive)?;
    let self_duality_residual = dual.sub(&form)?.max_abs();
    Ok(DeformationForm { form, frame, self_duality_residual })
}

#[derive(Debug, Clone)]
pub struct FramedSplitting {
    pub a: [Vec<f64>; 3],
    pub e: [Vec<f64>; 4],
    /// Max deviation of `φ`, `ψ` in the frame from the normal form.
    pub phi_residual: f64,
    pub psi_residual: f64,
}

pub const NORMAL_FORM_TOL: f64 = 1e-10;

/// Complete an oriented orthonormal coassociative frame `e₁..e₄` by `a₁,a₂,a₃`
/// so that `ι_{aᵢ}φ| = ωᵢ`, then confirm `φ`, `ψ` take the normal form.
pub fn normal_form_check(phi: &AlternatingForm<f64>, psi: &AlternatingForm<f64>, vertical: &[Vec<f64>]) -> Result<FramedSplitting> {
    check_plane(phi, vertical)?;
    let mv = metric_from_three_form(phi)?;
    let g = to_matrix(&mv.metric);
    for i in 0..4 {
        for j in 0..4 {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = (g_dot(&g, &vertical[i], &vertical[j]) - target).abs();
            if d > NORMAL_FORM_TOL {
                return Err(Error::NoNormalFrame(format!("vertical frame not orthonormal (deviation {d:e} at {i},{j})")));
            }
        }
    }
    let (ok, norm) = coassociative_check(phi, vertical)?;
    if !ok {
        return Err(Error::NotCoassociative(norm));
    }
    // orthonormal basis of the g-orthogonal complement
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for k in 0..7 {
        let mut w: Vec<f64> = (0..7).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        for u in vertical.iter().chain(candidates.iter()) {
            let c = g_dot(&g, &w, u);
            w.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        }
        let n2 = g_dot(&g, &w, &w);
        if n2 > 1e-8 {
            let s = n2.sqrt();
            candidates.push(w.into_iter().map(|a| a / s).collect());
        }
        if candidates.len() == 3 {
            break;
        }
    }
    if candidates.len() != 3 {
        return Err(Error::NoNormalFrame("complement is not 3-dimensional".into()));
    }
    let omegas = omega_frame::<f64>();
    let euclid = Signature::euclidean(4);
    let mut c = DMatrix::zeros(3, 3);
    for (k, n) in candidates.iter().enumerate() {
        let restricted = phi.interior(n)?.pullback(vertical)?;
        for (i, w) in omegas.iter().enumerate() {
            c[(k, i)] = restricted.inner(w, euclid)? / 2.0;
        }
    }
    let cinv = c
        .try_inverse()
        .ok_or_else(|| Error::NoNormalFrame("normal directions do not map onto the self-dual forms".into()))?;
    let a: [Vec<f64>; 3] = std::array::from_fn(|i| {
        (0..7).map(|m| (0..3).map(|k| cinv[(i, k)] * candidates[k][m]).sum()).collect()
    });
    let frame: Vec<Vec<f64>> = a.iter().chain(vertical.iter()).cloned().collect();
    let std = standard_forms::<f64>();
    let phi_residual = phi.pullback(&frame)?.sub(&std.phi)?.max_abs();
    let psi_residual = psi.pullback(&frame)?.sub(&std.psi)?.max_abs();
    if phi_residual > NORMAL_FORM_TOL || psi_residual > NORMAL_FORM_TOL {
        return Err(Error::NoNormalFrame(format!(
            "frame misses the normal form by {:e} (phi) / {:e} (psi)",
            phi_residual, psi_residual
        )));
    }
    let e = std::array::from_fn(|i| vertical[i].clone());
    Ok(FramedSplitting { a, e, phi_residual, psi_residual })
}

/// Lexicographic Λ² basis `(12, 13, 14, 23, 24, 34)`, 0-based.
pub const LAMBDA2_BASIS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Wedge pairing `α ∧ β = Q(α, β) e¹²³⁴` in the Λ² basis: anti-diagonal.
pub fn wedge_pairing() -> [[i64; 6]; 6] {
    let mut q = [[0; 6]; 6];
    q[0][5] = 1;
    q[5][0] = 1;
    q[1][4] = -1;
    q[4][1] = -1;
    q[2][3] = 1;
    q[3][2] = 1;
    q
}

/// `Q(α, β)` for Λ² coefficient vectors.
pub fn pairing(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[5] - a[1] * b[4] + a[2] * b[3] + a[3] * b[2] - a[4] * b[1] + a[5] * b[0]
}

/// Integer determinant by fraction-free (Bareiss) elimination.
pub fn det_int<const N: usize>(m: &[[i64; N]; N]) -> i128 {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..N {
        if a[k][k] == 0 {
            match (k + 1..N).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..N {
            for j in k + 1..N {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[N - 1][N - 1]
}

pub fn mat_mul_int<const N: usize>(a: &[[i64; N]; N], b: &[[i64; N]; N]) -> [[i64; N]; N] {
    let mut c = [[0i64; N]; N];
    for i in 0..N {
        for j in 0..N {
            c[i][j] = (0..N).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// `Λ²M` on the Λ² basis: `(Λ²M)(eⁱ∧eʲ) = Meⁱ ∧ Meʲ`, so the entry in row
/// `kl`, column `ij` is the 2×2 minor `M_ki M_lj − M_li M_kj`.
pub fn sl4_induced_action(m: &[[i64; 4]; 4]) -> Result<[[i64; 6]; 6]> {
    let det = det_int(m);
    if det != 1 {
        return Err(Error::NotSl4(format!("determinant is {det}")));
    }
    let mut out = [[0i64; 6]; 6];
    for (col, &(i, j)) in LAMBDA2_BASIS.iter().enumerate() {
        for (row, &(k, l)) in LAMBDA2_BASIS.iter().enumerate() {
            out[row][col] = m[k][i] * m[l][j] - m[l][i] * m[k][j];
        }
    }
    Ok(out)
}

/// As [`sl4_induced_action`] for real input, rejecting non-integer entries.
pub fn sl4_induced_action_f64(m: &[[f64; 4]; 4]) -> Result<[[i64; 6]; 6]> {
    let mut mi = [[0i64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let v = m[i][j];
            if v.fract() != 0.0 || !v.is_finite() || v.abs() > 1e15 {
                return Err(Error::NotSl4(format!("entry ({i},{j}) = {v} is not an integer")));
            }
            mi[i][j] = v as i64;
        }
    }
    sl4_induced_action(&mi)
}

/// `Lᵀ Q L = Q`.
pub fn preserves_pairing(l: &[[i64; 6]; 6]) -> bool {
    let q = wedge_pairing();
    let mut lt = [[0i64; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            lt[i][j] = l[j][i];
        }
    }
    mat_mul_int(&mat_mul_int(&lt, &q), l) == q
}
