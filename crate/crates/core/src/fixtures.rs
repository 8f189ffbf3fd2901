//! Closed-form sampled geometries used by tests, the acceptance suite and the CLI.
//!
//! `R^{3,3}` is identified with `Λ²R⁴` by sending the orthonormal basis to
//! `ω₁, ω₂, ω₃, ω̄₁, ω̄₂, ω̄₃` with `ω̄₁ = e¹²−e³⁴`, `ω̄₂ = e¹³+e²⁴`,
//! `ω̄₃ = −e¹⁴+e²³`, so the wedge pairing is twice the `R^{3,3}` inner product.

use std::f64::consts::PI;

use crate::exterior::GridField;
use crate::semiflat::ImmersionField;

/// `ω₁, ω₂, ω₃` in the Λ² basis `(12, 13, 14, 23, 24, 34)`.
pub fn omega6() -> [[f64; 6]; 3] {
    [
        [1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0, -1.0, 0.0, 0.0],
    ]
}

/// `ω̄₁, ω̄₂, ω̄₃`, anti-self-dual.
pub fn omega_bar6() -> [[f64; 6]; 3] {
    [
        [1.0, 0.0, 0.0, 0.0, 0.0, -1.0],
        [0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
    ]
}

pub fn r33_to_lambda2(x: &[f64]) -> [f64; 6] {
    let (w, wb) = (omega6(), omega_bar6());
    std::array::from_fn(|k| (0..3).map(|i| x[i] * w[i][k] + x[3 + i] * wb[i][k]).sum())
}

/// Unit sphere via inverse stereographic projection.
pub fn stereographic_sphere(x: f64, y: f64) -> [f64; 3] {
    let s = 1.0 + x * x + y * y;
    [2.0 * x / s, 2.0 * y / s, (1.0 - x * x - y * y) / s]
}

/// `u = Σ b^μ ω_μ` on `[0,1]³`, so `h = I/τ`.
pub fn linear_immersion(n: usize, tau: f64) -> ImmersionField {
    let w = omega6();
    let u = GridField::from_bounds(&[0.0; 3], &[1.0; 3], &[n; 3], 6, |b, o| {
        for k in 0..6 {
            o[k] = (0..3).map(|m| b[m] * w[m][k]).sum();
        }
    })
    .expect("valid grid");
    ImmersionField::new(u, tau).expect("valid immersion")
}

/// Cone `r·S(x, y)` over the unit sphere in the `ω`-plane on
/// `(x, y, r) ∈ [−¼, ¼]² × [1, 2]`, plus the non-harmonic bump
/// `ε x² (e¹² − e³⁴)` in an anti-self-dual direction.
pub fn cone_immersion_fixture(n: usize, eps: f64) -> ImmersionField {
    let u = GridField::from_bounds(&[-0.25, -0.25, 1.0], &[0.25, 0.25, 2.0], &[n; 3], 6, |b, o| {
        let s = stereographic_sphere(b[0], b[1]);
        let p = [b[2] * s[0], b[2] * s[1], b[2] * s[2], 0.0, 0.0, 0.0];
        o.copy_from_slice(&r33_to_lambda2(&p));
        o[0] += eps * b[0] * b[0];
        o[5] -= eps * b[0] * b[0];
    })
    .expect("valid grid");
    ImmersionField::new(u, 1.0).expect("valid immersion")
}

/// Stereographic unit sphere in the first three coordinates of `R^{3,3}`, on
/// `[−w, w]²` with `n × n` nodes.
pub fn sphere_surface(n: usize, w: f64) -> GridField {
    GridField::from_bounds(&[-w, -w], &[w, w], &[n, n], 6, |x, o| {
        let s = stereographic_sphere(x[0], x[1]);
        o.copy_from_slice(&[s[0], s[1], s[2], 0.0, 0.0, 0.0]);
    })
    .expect("valid grid")
}

/// `3^{-1/2}(cos u_k, sin u_k)`, `u_k = √2 (x cos θ_k + y sin θ_k)`,
/// `θ_k = 2πk/3`, on `[0, 2π]²` with `n × n` nodes.
pub fn clifford_torus(n: usize) -> GridField {
    let a = 1.0 / 3f64.sqrt();
    GridField::from_bounds(&[0.0, 0.0], &[2.0 * PI, 2.0 * PI], &[n, n], 6, |x, o| {
        for k in 0..3 {
            let th = 2.0 * PI * (k + 1) as f64 / 3.0;
            let u = 2f64.sqrt() * (x[0] * th.cos() + x[1] * th.sin());
            o[2 * k] = a * u.cos();
            o[2 * k + 1] = a * u.sin();
        }
    })
    .expect("valid grid")
}
