use g2flat::exterior::{
    combinations, double_star_sign, exterior_derivative_grid, AlternatingForm, GridField, GridFile, Orientation, Rational,
    Signature,
};
use proptest::prelude::*;

const N: usize = 5;

fn form(degree: usize) -> impl Strategy<Value = AlternatingForm<Rational>> {
    let len = combinations(N, degree).len();
    prop::collection::vec(-4i64..=4, len).prop_map(move |v| {
        let vals: Vec<Rational> = v.into_iter().map(Rational::from_integer).collect();
        AlternatingForm::from_dense(N, degree, &vals).unwrap()
    })
}

fn vectors(k: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    prop::collection::vec(prop::collection::vec((-3i64..=3).prop_map(Rational::from_integer), N), k)
}

/// Leibniz determinant of the `k×k` matrix `m`.
fn det(m: &[Vec<Rational>]) -> Rational {
    let k = m.len();
    if k == 0 {
        return Rational::from_integer(1);
    }
    (0..k)
        .map(|c| {
            let minor: Vec<Vec<Rational>> =
                m[1..].iter().map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, x)| *x).collect()).collect();
            let s = if c % 2 == 0 { Rational::from_integer(1) } else { Rational::from_integer(-1) };
            s * m[0][c] * det(&minor)
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_associative(a in form(1), b in form(2), c in form(1)) {
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn wedge_is_graded_commutative(a in form(1), b in form(2), c in form(3)) {
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap());
        let ac = a.wedge(&c).unwrap();
        prop_assert_eq!(ac, c.wedge(&a).unwrap().scale(Rational::from_integer(-1)));
        prop_assert_eq!(b.wedge(&c).unwrap(), c.wedge(&b).unwrap());
        prop_assert!(a.wedge(&a).unwrap().is_zero());
    }

    #[test]
    fn wedge_of_covectors_is_a_determinant(a in vectors(3), v in vectors(3)) {
        // (a¹∧a²∧a³)(v₁,v₂,v₃) = det[aⁱ(v_j)]
        let covs: Vec<AlternatingForm<Rational>> =
            a.iter().map(|c| AlternatingForm::from_dense(N, 1, c).unwrap()).collect();
        let w = covs[0].wedge(&covs[1]).unwrap().wedge(&covs[2]).unwrap();
        let m: Vec<Vec<Rational>> =
            a.iter().map(|ai| v.iter().map(|vj| ai.iter().zip(vj).map(|(x, y)| x * y).sum()).collect()).collect();
        prop_assert_eq!(w.evaluate(&v).unwrap(), det(&m));
    }

    #[test]
    fn interior_product_is_an_antiderivation(a in form(1), b in form(2), v in vectors(1)) {
        let v = &v[0];
        let lhs = a.wedge(&b).unwrap().interior(v).unwrap();
        let rhs = a.interior(v).unwrap().wedge(&b).unwrap().sub(&a.wedge(&b.interior(v).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn double_hodge_star_sign(k in 0usize..=N, p in 0usize..=N, seed in form(2)) {
        let sig = Signature::new(p, N - p).unwrap();
        let a = if k == 2 { seed } else { AlternatingForm::monomial(N, &(0..k).collect::<Vec<_>>(), Rational::from_integer(3)).unwrap() };
        let twice = a.hodge_star(sig, Orientation::Positive).unwrap().hodge_star(sig, Orientation::Positive).unwrap();
        prop_assert_eq!(twice, a.scale(Rational::from_integer(double_star_sign(sig, k) as i64)));
    }

    #[test]
    fn hodge_star_pairs_with_volume(a in form(2), b in form(2)) {
        // a ∧ *b = ⟨a, b⟩ vol
        let sig = Signature::euclidean(N);
        let lhs = a.wedge(&b.hodge_star(sig, Orientation::Positive).unwrap()).unwrap();
        let vol = AlternatingForm::monomial(N, &[0, 1, 2, 3, 4], a.inner(&b, sig).unwrap()).unwrap();
        prop_assert_eq!(lhs, vol);
    }

    #[test]
    fn grid_files_round_trip_bitwise(vals in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 24)) {
        let f = GridField::new(vec![3, 4], vec![-1.0, 0.5], vec![0.25, 1.0 / 3.0], 2, vals.clone()).unwrap();
        let text = GridFile::single("f", f).to_json().unwrap();
        let back = GridFile::from_json(&text).unwrap();
        let g = back.get("f").unwrap();
        prop_assert!(g.values().iter().zip(&vals).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(back.to_json().unwrap(), text);
    }
}

#[test]
fn d_squared_vanishes_on_grid_forms() {
    // 1-form on R³ with polynomial coefficients: d(dα) is zero up to rounding
    let f = GridField::from_bounds(&[-1.0; 3], &[1.0; 3], &[9; 3], 3, |x, o| {
        o[0] = x[0] * x[1] * x[2] + x[1].powi(3);
        o[1] = (x[0] * x[2]).sin();
        o[2] = x[0].exp() * x[1];
    })
    .unwrap();
    let d1 = exterior_derivative_grid(&f, 1).unwrap();
    let d2 = exterior_derivative_grid(&d1, 2).unwrap();
    assert!(d2.sup_norm_interior(2) < 1e-12, "{}", d2.sup_norm_interior(2));
}

#[test]
fn d_of_exact_quadratic_is_exact() {
    // d(x y dz) = y dx∧dz + x dy∧dz, reproduced exactly by central differences
    let f = GridField::from_bounds(&[0.0; 3], &[1.0; 3], &[5; 3], 3, |x, o| o.copy_from_slice(&[0.0, 0.0, x[0] * x[1]])).unwrap();
    let d = exterior_derivative_grid(&f, 1).unwrap();
    for n in (0..d.num_nodes()).filter(|&n| d.is_interior(n, 1)) {
        let x = d.coords(n);
        let got = d.node(n);
        // basis (12, 13, 23)
        assert!(got[0].abs() < 1e-14 && (got[1] - x[1]).abs() < 1e-14 && (got[2] - x[0]).abs() < 1e-14);
    }
}
