use num_traits::One;
use polytrope::algebra::{
    determining_scan, parse_rational, reduced_scan, symmetry_residual, Expr, Rat, VarSet, PSI, R,
};
use proptest::prelude::*;

fn q(s: &str) -> Rat {
    parse_rational(s).unwrap()
}

fn rational(num: i64, den: i64) -> Rat {
    Rat::new(num.into(), den.into())
}

/// Rational indices other than 1, with small denominators.
fn index() -> impl Strategy<Value = Rat> {
    (0i64..=40, 1i64..=4).prop_map(|(p, d)| rational(p, d)).prop_filter("n = 1", |n| !n.is_one())
}

fn phase_expr() -> impl Strategy<Value = Expr> {
    prop::collection::vec((-5i64..=5, 1i64..=3, -3i64..=3, 1i64..=2, -3i64..=3, 1i64..=2), 0..=4).prop_map(|terms| {
        terms.into_iter().fold(Expr::zero(VarSet::Phase), |acc, (c, cd, a, ad, b, bd)| {
            &acc + &Expr::monomial(rational(c, cd), &[(R, rational(a, ad)), (PSI, rational(b, bd))])
        })
    })
}

fn generator(n: &Rat) -> (Expr, Expr) {
    let c = -Rat::from_integer(2.into()) / (n - Rat::one());
    (Expr::var(R), Expr::monomial(c, &[(PSI, Rat::one())]))
}

#[test]
fn main_theorem_on_listed_indices() {
    for n in ["2", "3", "4", "5", "3/2", "7/2"] {
        let n = q(n);
        let (xi, eta) = generator(&n);
        assert!(symmetry_residual(&n, &xi, &eta).unwrap().is_zero(), "n = {n}");
    }
}

#[test]
fn reduced_constant_ansatz_is_empty() {
    for n in ["2", "3", "5/2", "6"] {
        assert_eq!(reduced_scan(&q(n), 0).unwrap().kernel_dim, 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_is_a_symmetry_for_any_index(n in index()) {
        let (xi, eta) = generator(&n);
        prop_assert!(symmetry_residual(&n, &xi, &eta).unwrap().is_zero());
    }

    #[test]
    fn residual_is_linear(n in index(), x1 in phase_expr(), e1 in phase_expr(), x2 in phase_expr(), e2 in phase_expr()) {
        let sum = symmetry_residual(&n, &(&x1 + &x2), &(&e1 + &e2)).unwrap();
        let parts = &symmetry_residual(&n, &x1, &e1).unwrap() + &symmetry_residual(&n, &x2, &e2).unwrap();
        prop_assert_eq!(sum, parts);
    }

    #[test]
    fn scan_basis_annihilates_the_condition(n in index(), degree in 0u32..=3) {
        let res = determining_scan(&n, degree).unwrap();
        prop_assert_eq!(res.kernel_dim, res.basis.len());
        // n = 0 is linear and carries extra symmetries.
        if !num_traits::Zero::is_zero(&n) {
            prop_assert!(res.kernel_dim <= 1);
        }
        for v in &res.basis {
            let xi = v.infinitesimal("xi").unwrap();
            let eta = v.infinitesimal("eta").unwrap();
            prop_assert!(symmetry_residual(&n, xi, eta).unwrap().is_zero());
        }
    }
}
