//! Finite-difference Newton solver for the signed affine Toda system and the
//! Tzitzéica equation on planar domains, the lift `w₂ = log|q| − w₁`, and
//! curvature-sign diagnostics.
//!
//! `(·)_{zz̄}` is a quarter of the five-point Laplacian. Unknowns live on grid
//! nodes strictly inside the domain; every other node carries Dirichlet data.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::GridField;
use crate::poly::Polynomial;

pub const EXP_CLAMP: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Rectangle,
    /// `r0 < |z| < r1`.
    Annulus { r0: f64, r1: f64 },
}

impl Domain {
    fn contains(&self, z: &[f64]) -> bool {
        match *self {
            Domain::Rectangle => true,
            Domain::Annulus { r0, r1 } => {
                let r = z[0].hypot(z[1]);
                r > r0 && r < r1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum System {
    /// `2(w_i)_{zz̄} − μ_{i+1}e^{2w_{i+1}−2w_i} + μ_i e^{2w_i−2w_{i−1}} = f_i`,
    /// with `w₀ = 0` and the last exchange term `μ_{r+1}|q|²e^{−2w_r}`.
    Toda { mu: Vec<i32> },
    /// `2w_{zz̄} + |q|²e^{−4w} + e^{2w} = f`.
    Tzitzeica,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonControls {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonControls {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 30 }
    }
}

#[derive(Debug, Clone)]
pub struct TodaProblem {
    pub system: System,
    pub domain: Domain,
    pub q: Polynomial,
    /// Dirichlet data (and initial values) for all `r` fields at every node.
    pub boundary: GridField,
    pub forcing: Option<GridField>,
    pub newton: NewtonControls,
}

#[derive(Debug, Clone)]
pub struct TodaSolution {
    pub w: GridField,
    /// 1 on unknown nodes, 0 on Dirichlet nodes.
    pub mask: GridField,
    pub residual: f64,
    /// Residual sup norm before each Newton step and after the last one.
    pub trace: Vec<f64>,
    pub converged: bool,
    /// Some exponential argument hit `±EXP_CLAMP` during the solve.
    pub clamped: bool,
}

fn guarded_exp(x: f64, clamped: &mut bool) -> f64 {
    if x.abs() > EXP_CLAMP {
        *clamped = true;
    }
    x.clamp(-EXP_CLAMP, EXP_CLAMP).exp()
}

/// Grid-interior nodes inside `domain`.
pub fn unknown_nodes(grid: &GridField, domain: &Domain) -> Vec<usize> {
    (0..grid.num_nodes()).filter(|&n| grid.is_interior(n, 1) && domain.contains(&grid.coords(n))).collect()
}

/// `|q(z)|²` at every node.
pub fn q_abs2(grid: &GridField, q: &Polynomial) -> Result<GridField> {
    grid.sample_like(1, |x, o| o[0] = q.eval(Complex64::new(x[0], x[1])).norm_sqr())
}

impl TodaProblem {
    pub fn rank(&self) -> usize {
        self.boundary.components()
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.boundary;
        if g.dim() != 2 {
            return Err(Error::ShapeMismatch(format!("Toda problems live on 2D grids, got {}D", g.dim())));
        }
        if let Some((axis, &nodes)) = g.shape().iter().enumerate().find(|(_, &n)| n < 5) {
            return Err(Error::InvalidGrid(format!("axis {axis} has {nodes} nodes; at least 5 are required")));
        }
        match &self.system {
            System::Toda { mu } => {
                if mu.len() != self.rank() + 1 || mu.iter().any(|m| m.abs() != 1) {
                    return Err(Error::ShapeMismatch(format!(
                        "rank {} needs {} signs in {{-1, 1}}, got {mu:?}",
                        self.rank(),
                        self.rank() + 1
                    )));
                }
            }
            System::Tzitzeica if self.rank() != 1 => {
                return Err(Error::ShapeMismatch(format!("Tzitzeica has one field, got {}", self.rank())));
            }
            System::Tzitzeica => {}
        }
        if let Some(f) = &self.forcing {
            g.check_same_grid(f)?;
            if f.components() != self.rank() {
                return Err(Error::ShapeMismatch(format!("{} forcing fields for rank {}", f.components(), self.rank())));
            }
        }
        if let Some(n) = (0..g.num_nodes()).find(|&n| g.node(n).iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidGrid(format!("non-finite boundary data at node {:?}", g.multi_index(n))));
        }
        Ok(())
    }

    /// `F(w)` at every node; zero on Dirichlet nodes.
    pub fn residual(&self, w: &GridField) -> Result<GridField> {
        Ok(self.evaluate(w)?.0)
    }

    fn evaluate(&self, w: &GridField) -> Result<(GridField, bool)> {
        self.validate()?;
        w.check_same_grid(&self.boundary)?;
        if w.components() != self.rank() {
            return Err(Error::ShapeMismatch(format!("{} fields for rank {}", w.components(), self.rank())));
        }
        let mask = self.mask()?;
        let qq = q_abs2(w, &self.q)?;
        let strides = w.strides();
        let [hx, hy] = [w.spacing()[0], w.spacing()[1]];
        let r = self.rank();
        let flags = w.map_nodes(r + 1, |n, wn, out| {
            out.fill(0.0);
            if mask.node(n)[0] == 0.0 {
                return;
            }
            let mut clamped = false;
            for i in 0..r {
                let at = |m: usize| w.node(m)[i];
                let lap = (at(n + strides[0]) + at(n - strides[0]) - 2.0 * wn[i]) / (hx * hx)
                    + (at(n + strides[1]) + at(n - strides[1]) - 2.0 * wn[i]) / (hy * hy);
                let f = self.forcing.as_ref().map_or(0.0, |f| f.node(n)[i]);
                out[i] = 0.5 * lap - f
                    + match &self.system {
                        System::Tzitzeica => {
                            qq.node(n)[0] * guarded_exp(-4.0 * wn[0], &mut clamped) + guarded_exp(2.0 * wn[0], &mut clamped)
                        }
                        System::Toda { mu } => {
                            let exchange = if i + 1 < r {
                                guarded_exp(2.0 * wn[i + 1] - 2.0 * wn[i], &mut clamped)
                            } else {
                                qq.node(n)[0] * guarded_exp(-2.0 * wn[i], &mut clamped)
                            };
                            let lower = if i == 0 { 0.0 } else { wn[i - 1] };
                            -(mu[i + 1] as f64) * exchange + mu[i] as f64 * guarded_exp(2.0 * wn[i] - 2.0 * lower, &mut clamped)
                        }
                    };
            }
            out[r] = if clamped { 1.0 } else { 0.0 };
        })?;
        let clamped = flags.values().chunks(r + 1).any(|c| c[r] != 0.0);
        Ok((flags.select(0, r)?, clamped))
    }

    pub fn mask(&self) -> Result<GridField> {
        let g = &self.boundary;
        let inside = unknown_nodes(g, &self.domain);
        let mut m = g.sample_like(1, |_, o| o[0] = 0.0)?;
        for n in inside {
            m.node_mut(n)[0] = 1.0;
        }
        Ok(m)
    }

    /// Analytic Jacobian of the residual on the unknowns, numbered
    /// `k·r + i` for the `k`-th unknown node and field `i`.
    pub fn jacobian(&self, w: &GridField) -> Result<SparseColMat<usize, f64>> {
        let nodes = unknown_nodes(w, &self.domain);
        let r = self.rank();
        let mut number = vec![usize::MAX; w.num_nodes()];
        for (k, &n) in nodes.iter().enumerate() {
            number[n] = k;
        }
        let qq = q_abs2(w, &self.q)?;
        let strides = w.strides();
        let [hx, hy] = [w.spacing()[0], w.spacing()[1]];
        let rows: Vec<Vec<Triplet<usize, usize, f64>>> = nodes
            .par_iter()
            .enumerate()
            .map(|(k, &n)| {
                let mut clamped = false;
                let wn = w.node(n);
                let mut t = Vec::with_capacity(r * 7);
                for i in 0..r {
                    let row = k * r + i;
                    let mut diag = -1.0 / (hx * hx) - 1.0 / (hy * hy);
                    for (s, h) in [(strides[0], hx), (strides[1], hy)] {
                        for m in [n + s, n - s] {
                            if number[m] != usize::MAX {
                                t.push(Triplet::new(row, number[m] * r + i, 0.5 / (h * h)));
                            }
                        }
                    }
                    match &self.system {
                        System::Tzitzeica => {
                            diag += -4.0 * qq.node(n)[0] * guarded_exp(-4.0 * wn[0], &mut clamped)
                                + 2.0 * guarded_exp(2.0 * wn[0], &mut clamped);
                        }
                        System::Toda { mu } => {
                            let (up, down) = (mu[i + 1] as f64, mu[i] as f64);
                            if i + 1 < r {
                                let e = guarded_exp(2.0 * wn[i + 1] - 2.0 * wn[i], &mut clamped);
                                diag += 2.0 * up * e;
                                t.push(Triplet::new(row, k * r + i + 1, -2.0 * up * e));
                            } else {
                                diag += 2.0 * up * qq.node(n)[0] * guarded_exp(-2.0 * wn[i], &mut clamped);
                            }
                            let lower = if i == 0 { 0.0 } else { wn[i - 1] };
                            let e = guarded_exp(2.0 * wn[i] - 2.0 * lower, &mut clamped);
                            diag += 2.0 * down * e;
                            if i > 0 {
                                t.push(Triplet::new(row, k * r + i - 1, -2.0 * down * e));
                            }
                        }
                    }
                    t.push(Triplet::new(row, row, diag));
                }
                t
            })
            .collect();
        let triplets: Vec<_> = rows.into_iter().flatten().collect();
        let dim = nodes.len() * r;
        SparseColMat::try_new_from_triplets(dim, dim, &triplets).map_err(|e| Error::LinearSolve(format!("{e:?}")))
    }

    /// Boundary data on Dirichlet nodes; unknown nodes get the mean of the linear
    /// interpolants between the nearest Dirichlet nodes along their row and column.
    pub fn initial_guess(&self) -> Result<GridField> {
        let g = &self.boundary;
        let mask = self.mask()?;
        let strides = g.strides();
        let shape = g.shape().to_vec();
        g.map_nodes(g.components(), |n, b, out| {
            out.copy_from_slice(b);
            if mask.node(n)[0] == 0.0 {
                return;
            }
            let idx = g.multi_index(n);
            out.fill(0.0);
            for axis in 0..2 {
                let walk = |dir: i64| {
                    let mut steps = 0i64;
                    loop {
                        steps += 1;
                        let pos = idx[axis] as i64 + dir * steps;
                        let m = (n as i64 + dir * steps * strides[axis] as i64) as usize;
                        if pos == 0 || pos == shape[axis] as i64 - 1 || mask.node(m)[0] == 0.0 {
                            return (steps as f64, m);
                        }
                    }
                };
                let (da, a) = walk(-1);
                let (db, bn) = walk(1);
                for c in 0..out.len() {
                    out[c] += 0.5 * (g.node(a)[c] * db + g.node(bn)[c] * da) / (da + db);
                }
            }
        })
    }

    /// Relative error `|J d − (F(w+εd) − F(w−εd))/2ε| / |J d|` for a direction
    /// `d` on the unknowns.
    pub fn directional_check(&self, w: &GridField, d: &[f64], eps: f64) -> Result<f64> {
        let nodes = unknown_nodes(w, &self.domain);
        let r = self.rank();
        if d.len() != nodes.len() * r {
            return Err(Error::ShapeMismatch(format!("direction has {} entries, expected {}", d.len(), nodes.len() * r)));
        }
        let shifted = |s: f64| -> Result<Vec<f64>> {
            let mut v = w.clone();
            for (k, &n) in nodes.iter().enumerate() {
                for i in 0..r {
                    v.node_mut(n)[i] += s * d[k * r + i];
                }
            }
            let f = self.residual(&v)?;
            Ok(nodes.iter().flat_map(|&n| f.node(n).to_vec()).collect())
        };
        let (plus, minus) = (shifted(eps)?, shifted(-eps)?);
        let j = self.jacobian(w)?;
        let jd = &j * Col::<f64>::from_fn(d.len(), |k| d[k]);
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..d.len() {
            let fd = (plus[k] - minus[k]) / (2.0 * eps);
            num += (jd[k] - fd).powi(2);
            den += jd[k] * jd[k];
        }
        Ok((num / den).sqrt())
    }
}

fn unknown_values(f: &GridField, nodes: &[usize]) -> Vec<f64> {
    nodes.iter().flat_map(|&n| f.node(n).iter().copied()).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Damped Newton from the linear-interpolation initial guess.
pub fn solve_newton(p: &TodaProblem) -> Result<TodaSolution> {
    solve_from(p, p.initial_guess()?)
}

/// Damped Newton from `w0` (Dirichlet values are taken from the problem).
pub fn solve_from(p: &TodaProblem, w0: GridField) -> Result<TodaSolution> {
    p.validate()?;
    faer::set_global_parallelism(faer::Par::Seq);
    let mask = p.mask()?;
    let nodes = unknown_nodes(&p.boundary, &p.domain);
    let r = p.rank();
    let mut w = w0;
    w.check_same_grid(&p.boundary)?;
    for n in (0..w.num_nodes()).filter(|&n| mask.node(n)[0] == 0.0) {
        let b = p.boundary.node(n).to_vec();
        w.node_mut(n).copy_from_slice(&b);
    }
    let (f, mut clamped) = p.evaluate(&w)?;
    let mut fv = unknown_values(&f, &nodes);
    let mut trace = vec![sup(&fv)];
    let diverged = |iterations: usize, trace: Vec<f64>| Error::Diverged {
        iterations,
        residual: *trace.last().expect("nonempty"),
        trace,
    };
    for iter in 0..=p.newton.max_iter {
        let res = *trace.last().expect("nonempty");
        if res <= p.newton.tol {
            return Ok(TodaSolution { w, mask, residual: res, trace, converged: true, clamped });
        }
        if iter == p.newton.max_iter || !res.is_finite() {
            return Err(diverged(iter, trace));
        }
        let j = p.jacobian(&w)?;
        let lu = j.sp_lu().map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        let delta = lu.solve(Col::<f64>::from_fn(fv.len(), |k| -fv[k]));
        if (0..delta.nrows()).any(|k| !delta[k].is_finite()) {
            return Err(Error::LinearSolve(format!("non-finite Newton step at iteration {iter}")));
        }
        let old = norm2(&fv);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=20 {
            let mut trial = w.clone();
            for (k, &n) in nodes.iter().enumerate() {
                for i in 0..r {
                    trial.node_mut(n)[i] += step * delta[k * r + i];
                }
            }
            let (ft, c) = p.evaluate(&trial)?;
            let tv = unknown_values(&ft, &nodes);
            let new = norm2(&tv);
            if new.is_finite() && new < old {
                accepted = Some((trial, tv, c));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, tv, c)) => {
                w = trial;
                fv = tv;
                clamped |= c;
                trace.push(sup(&fv));
            }
            None => return Err(diverged(iter + 1, trace)),
        }
    }
    unreachable!("loop returns")
}

/// `w* = (sin πx sin πy, ½ cos πx cos πy)` for `r = 2`, `μ = (1, −1, 1)`, `q = 1`
/// on `[0,1]²`, with forcing from the continuous operator.
pub fn manufactured_toda(n: usize) -> Result<(TodaProblem, GridField)> {
    use std::f64::consts::PI;
    let exact = GridField::from_bounds(&[0.0, 0.0], &[1.0, 1.0], &[n, n], 2, |x, o| {
        o[0] = (PI * x[0]).sin() * (PI * x[1]).sin();
        o[1] = 0.5 * (PI * x[0]).cos() * (PI * x[1]).cos();
    })?;
    let forcing = exact.map_nodes(2, |_, w, o| {
        let lap = [-2.0 * PI * PI * w[0], -2.0 * PI * PI * w[1]];
        o[0] = 0.5 * lap[0] + (2.0 * w[1] - 2.0 * w[0]).exp() + (2.0 * w[0]).exp();
        o[1] = 0.5 * lap[1] - (-2.0 * w[1]).exp() - (2.0 * w[1] - 2.0 * w[0]).exp();
    })?;
    let p = TodaProblem {
        system: System::Toda { mu: vec![1, -1, 1] },
        domain: Domain::Rectangle,
        q: Polynomial::constant(Complex64::new(1.0, 0.0)),
        boundary: exact.clone(),
        forcing: Some(forcing),
        newton: NewtonControls::default(),
    };
    Ok((p, exact))
}

/// `w* = sin πx sin πy`, `q = 1` for the Tzitzéica equation on `[0,1]²`.
pub fn manufactured_tzitzeica(n: usize) -> Result<(TodaProblem, GridField)> {
    use std::f64::consts::PI;
    let exact = GridField::from_bounds(&[0.0, 0.0], &[1.0, 1.0], &[n, n], 1, |x, o| {
        o[0] = (PI * x[0]).sin() * (PI * x[1]).sin();
    })?;
    let forcing = exact.map_nodes(1, |_, w, o| {
        o[0] = -PI * PI * w[0] + (-4.0 * w[0]).exp() + (2.0 * w[0]).exp();
    })?;
    let p = TodaProblem {
        system: System::Tzitzeica,
        domain: Domain::Rectangle,
        q: Polynomial::constant(Complex64::new(1.0, 0.0)),
        boundary: exact.clone(),
        forcing: Some(forcing),
        newton: NewtonControls::default(),
    };
    Ok((p, exact))
}

/// Sup of `|w − exact|` over the unknown nodes of `p`.
pub fn solution_error(p: &TodaProblem, w: &GridField, exact: &GridField) -> Result<f64> {
    let nodes = unknown_nodes(w, &p.domain);
    let d = w.sub(exact)?;
    Ok(sup(&unknown_values(&d, &nodes)))
}

#[derive(Debug, Clone)]
pub struct LiftReport {
    /// `(w₁, w₂)` with `w₂ = log|q| − w₁`.
    pub w: GridField,
    /// Sup norms of the two `r = 2`, `μ = (1, −1, 1)` residuals over the mask.
    pub residuals: [f64; 2],
    /// Tzitzéica residual of `w₁` over the mask.
    pub tzitzeica_residual: f64,
}

/// Lifts a Tzitzéica field. `mask` marks the nodes where residuals are
/// evaluated (all grid-interior nodes when absent).
pub fn tzitzeica_lift(w1: &GridField, q: &Polynomial, mask: Option<&GridField>) -> Result<LiftReport> {
    if w1.components() != 1 || w1.dim() != 2 {
        return Err(Error::ShapeMismatch("lift needs one scalar field on a 2D grid".into()));
    }
    let active: Vec<usize> = (0..w1.num_nodes())
        .filter(|&n| w1.is_interior(n, 1) && mask.map_or(true, |m| m.node(n)[0] != 0.0))
        .collect();
    let qq = q_abs2(w1, q)?;
    let strides = w1.strides();
    for &n in &active {
        for m in [n, n + strides[0], n - strides[0], n + strides[1], n - strides[1]] {
            if !(qq.node(m)[0] > 0.0) {
                return Err(Error::QVanishes { node: w1.multi_index(m) });
            }
        }
    }
    let w = w1.map_nodes(2, |n, v, o| {
        o[0] = v[0];
        o[1] = 0.5 * qq.node(n)[0].ln() - v[0];
    })?;
    let dirichlet = |system: System, field: GridField| TodaProblem {
        system,
        domain: Domain::Rectangle,
        q: q.clone(),
        boundary: field,
        forcing: None,
        newton: NewtonControls::default(),
    };
    let finite = w.map_nodes(2, |_, v, o| {
        for c in 0..2 {
            o[c] = if v[c].is_finite() { v[c] } else { 0.0 };
        }
    })?;
    let toda = dirichlet(System::Toda { mu: vec![1, -1, 1] }, finite).residual(&w)?;
    let tz = dirichlet(System::Tzitzeica, w1.clone()).residual(w1)?;
    let worst = |f: &GridField, c: usize| sup(&active.iter().map(|&n| f.node(n)[c]).collect::<Vec<_>>());
    Ok(LiftReport { residuals: [worst(&toda, 0), worst(&toda, 1)], tzitzeica_residual: worst(&tz, 0), w })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub k1_min: f64,
    pub k1_min_at: Option<Vec<usize>>,
    pub k2_max: f64,
    pub k2_max_at: Option<Vec<usize>>,
}

impl CurvatureReport {
    /// `K₁ > 0` and `K₂ < 0` everywhere.
    pub fn signs_hold(&self) -> bool {
        self.k1_min > 0.0 && self.k2_max < 0.0
    }
}

/// `K₁ = −4e^{−2w₁}(w₁)_{zz̄}` and `K₂ = −4e^{−2(w₂−w₁)}(w₂−w₁)_{zz̄}` on the
/// masked grid-interior nodes of a two-component field.
pub fn curvature_signs(w: &GridField, mask: Option<&GridField>) -> Result<CurvatureReport> {
    if w.components() != 2 || w.dim() != 2 {
        return Err(Error::ShapeMismatch("curvature needs (w1, w2) on a 2D grid".into()));
    }
    let strides = w.strides();
    let [hx, hy] = [w.spacing()[0], w.spacing()[1]];
    let zzbar = |n: usize, f: &dyn Fn(usize) -> f64| {
        0.25 * ((f(n + strides[0]) + f(n - strides[0]) - 2.0 * f(n)) / (hx * hx)
            + (f(n + strides[1]) + f(n - strides[1]) - 2.0 * f(n)) / (hy * hy))
    };
    let mut rep = CurvatureReport { k1_min: f64::INFINITY, k1_min_at: None, k2_max: f64::NEG_INFINITY, k2_max_at: None };
    for n in (0..w.num_nodes()).filter(|&n| w.is_interior(n, 1) && mask.map_or(true, |m| m.node(n)[0] != 0.0)) {
        let w1 = |m: usize| w.node(m)[0];
        let d = |m: usize| w.node(m)[1] - w.node(m)[0];
        let k1 = -4.0 * (-2.0 * w1(n)).exp() * zzbar(n, &w1);
        let k2 = -4.0 * (-2.0 * d(n)).exp() * zzbar(n, &d);
        if !(k1 >= rep.k1_min) {
            rep.k1_min = k1;
            rep.k1_min_at = Some(w.multi_index(n));
        }
        if !(k2 <= rep.k2_max) {
            rep.k2_max = k2;
            rep.k2_max_at = Some(w.multi_index(n));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_problem(n: usize, mu: Vec<i32>) -> TodaProblem {
        let b = GridField::from_bounds(&[0.0, 0.0], &[1.0, 1.0], &[n, n], 2, |_, o| o.fill(0.0)).unwrap();
        TodaProblem {
            system: System::Toda { mu },
            domain: Domain::Rectangle,
            q: Polynomial::constant(Complex64::new(0.0, 0.0)),
            boundary: b,
            forcing: None,
            newton: NewtonControls::default(),
        }
    }

    #[test]
    fn constant_substitution() {
        let p = zero_problem(7, vec![1, -1, 1]);
        let f = p.residual(&p.boundary).unwrap();
        let n = f.flat(&[3, 3]);
        assert_eq!(f.node(n), &[2.0, -1.0]);
    }

    #[test]
    fn bad_signs_rejected() {
        let p = zero_problem(7, vec![1, -1]);
        assert!(p.validate().is_err());
        assert!(zero_problem(4, vec![1, -1, 1]).validate().is_err());
    }

    #[test]
    fn zero_solution_converges_immediately() {
        let mut p = zero_problem(17, vec![1, -1, 1]);
        p.q = Polynomial::constant(Complex64::new(1.0, 0.0));
        p.forcing = Some(p.residual(&p.boundary).unwrap());
        let f0 = p.residual(&p.boundary).unwrap();
        assert_eq!(f0.sup_norm(), 0.0);
        let s = solve_newton(&p).unwrap();
        assert!(s.trace.len() - 1 <= 3);
    }

    #[test]
    fn manufactured_toda_converges() {
        let (p, exact) = manufactured_toda(33).unwrap();
        let s = solve_newton(&p).unwrap();
        assert!(s.converged && s.trace.len() - 1 <= 8);
        assert!(solution_error(&p, &s.w, &exact).unwrap() < 0.02);
    }

    #[test]
    fn jacobian_matches_differences() {
        let (p, exact) = manufactured_toda(9).unwrap();
        let nodes = unknown_nodes(&exact, &p.domain).len() * 2;
        let d: Vec<f64> = (0..nodes).map(|k| ((k * 7919) % 13) as f64 / 13.0 - 0.5).collect();
        assert!(p.directional_check(&exact, &d, 1e-6).unwrap() < 1e-6);
    }

    #[test]
    fn absurd_boundary_diverges() {
        let mut p = zero_problem(9, vec![1, -1, 1]);
        p.boundary = p.boundary.map_nodes(2, |n, _, o| o.fill(if n % 2 == 0 { 1e3 } else { -1e3 })).unwrap();
        p.newton.max_iter = 10;
        match solve_newton(&p) {
            Err(Error::Diverged { trace, .. }) => assert!(!trace.is_empty()),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn lift_rejects_zero_of_q() {
        let w1 = GridField::from_bounds(&[-1.0, -1.0], &[1.0, 1.0], &[9, 9], 1, |_, o| o[0] = 0.0).unwrap();
        let q: Polynomial = "z".parse().unwrap();
        assert!(matches!(tzitzeica_lift(&w1, &q, None), Err(Error::QVanishes { .. })));
    }

    #[test]
    fn constant_fields_have_flat_curvature() {
        let w = GridField::from_bounds(&[0.0, 0.0], &[1.0, 1.0], &[9, 9], 2, |_, o| o.copy_from_slice(&[0.3, -0.1])).unwrap();
        let c = curvature_signs(&w, None).unwrap();
        assert!(!c.signs_hold());
        assert!(c.k1_min.abs() < 1e-12 && c.k2_max.abs() < 1e-12);
    }
}
