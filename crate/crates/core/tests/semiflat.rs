use g2flat::exterior::GridField;
use g2flat::fixtures::{self, omega6};
use g2flat::g2::pairing;
use g2flat::semiflat::{build_phi_psi, closure_residuals, harmonicity_residual, pullback_metric, ImmersionField};
use proptest::prelude::*;

/// `u(b) = Σ b^μ a_μ` with `a_μ = ω_μ + δ_μ`.
fn linear(n: usize, a: &[[f64; 6]; 3], tau: f64) -> ImmersionField {
    let u = GridField::from_bounds(&[-0.5; 3], &[0.5; 3], &[n; 3], 6, |b, o| {
        for k in 0..6 {
            o[k] = (0..3).map(|m| b[m] * a[m][k]).sum();
        }
    })
    .unwrap();
    ImmersionField::new(u, tau).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linear_immersions_are_torsion_free(
        delta in prop::collection::vec(-0.3f64..0.3, 18),
        tau in 0.5f64..2.0,
    ) {
        let mut a = omega6();
        for (k, d) in delta.iter().enumerate() {
            a[k / 6][k % 6] += d;
        }
        let u = linear(5, &a, tau);
        // oracle: h_μν = Q(a_μ, a_ν) / 2τ
        let h = pullback_metric(&u).unwrap();
        let packed = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        for n in 0..h.num_nodes() {
            for (c, &(m, v)) in packed.iter().enumerate() {
                let want = pairing(&a[m], &a[v]) / (2.0 * tau);
                prop_assert!((h.node(n)[c] - want).abs() < 1e-12);
            }
        }
        let s = build_phi_psi(&u).unwrap();
        let (dphi, dpsi) = closure_residuals(&s, 0).unwrap();
        prop_assert!(dphi < 1e-12 && dpsi < 1e-12);
        prop_assert!(harmonicity_residual(&u).unwrap().sup_norm() < 1e-11);
    }
}

#[test]
fn standard_frame_gives_standard_forms() {
    let u = fixtures::linear_immersion(5, 1.0);
    let s = build_phi_psi(&u).unwrap();
    let std = g2flat::g2::standard_forms::<f64>();
    for n in 0..s.phi.num_nodes() {
        assert!(s.phi_at(n).sub(&std.phi).unwrap().max_abs() < 1e-14);
        assert!(s.psi_at(n).sub(&std.psi).unwrap().max_abs() < 1e-14);
    }
}

#[test]
fn closure_tracks_harmonicity_on_the_cone_family() {
    // minimal cone: both residuals shrink like h²; with the bump both stay O(1)
    let res = |n: usize, eps: f64| {
        let u = fixtures::cone_immersion_fixture(n, eps);
        let s = build_phi_psi(&u).unwrap();
        let (_, dpsi) = closure_residuals(&s, 2).unwrap();
        (dpsi, harmonicity_residual(&u).unwrap().sup_norm_interior(2))
    };
    let (a, b) = (res(9, 0.0), res(17, 0.0));
    assert!((a.0 / b.0).log2() > 1.7 && (a.1 / b.1).log2() > 1.7, "{a:?} {b:?}");
    let bumped = res(17, 0.1);
    assert!(bumped.0 > 1e-2 && bumped.1 > 1e-2, "{bumped:?}");
}

#[test]
fn non_constant_tau_rejected() {
    let u = fixtures::linear_immersion(3, 1.0).field().clone();
    let tau = u.sample_like(1, |x, o| o[0] = 1.0 + x[0]).unwrap();
    assert!(ImmersionField::with_tau_field(u.clone(), &tau).is_err());
    assert!(ImmersionField::new(u, -1.0).is_err());
}
