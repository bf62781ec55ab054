use proptest::prelude::*;

use super::*;
use crate::Error;

fn cx() -> Var {
    Var::new("x", "C")
}
fn cy() -> Var {
    Var::new("y", "C")
}
fn x() -> ScalarExpr {
    ScalarExpr::var(&cx())
}
fn y() -> ScalarExpr {
    ScalarExpr::var(&cy())
}
fn n(k: i64) -> ScalarExpr {
    ScalarExpr::int(k)
}

#[test]
fn algebraic_identity_vanishes() {
    let e = (&x() + &n(1)).pow(2).unwrap();
    let e = &(&(&e - &x().pow(2).unwrap()) - &x().scale(&q(2, 1))) - &n(1);
    assert!(e.is_zero());
}

#[test]
fn half_powers_merge() {
    let u = Opaque::plain(Symbol::new("u", &[cx()]));
    let h = ScalarExpr::rational_power(&u, &q(1, 2));
    assert_eq!(h.mul(&h), ScalarExpr::opaque(u.clone()));
    let inv = ScalarExpr::rational_power(&u, &q(-1, 2));
    assert!(h.mul(&inv).is_one());
    assert_eq!(h.inv().unwrap(), inv);
}

#[test]
fn exponentials_cancel() {
    let f = Opaque::plain(Symbol::new("F", &[cx()]));
    let a = ScalarExpr::exp_linear(&[(f.clone(), q(1, 1))]);
    let b = ScalarExpr::exp_linear(&[(f, q(-1, 1))]);
    assert!(a.mul(&b).is_one());
    assert_eq!(a.inv().unwrap(), b);
}

#[test]
fn quotient_rule() {
    let e = x().pow(2).unwrap().div(&(&x() + &n(1))).unwrap();
    let d = e.differentiate(&cx()).unwrap();
    let expected = (&x().pow(2).unwrap() + &x().scale(&q(2, 1)))
        .div(&(&x() + &n(1)).pow(2).unwrap())
        .unwrap();
    assert_eq!(d, expected);
}

#[test]
fn half_power_derivative() {
    let rho = Opaque::plain(Symbol::new("rho", &[cx()]));
    let r = ScalarExpr::rational_power(&rho, &q(1, 2));
    let d = r.differentiate(&cx()).unwrap();
    let rho_x = ScalarExpr::opaque(rho.derive(&cx()).unwrap());
    let expected = ScalarExpr::rational_power(&rho, &q(-1, 2))
        .mul(&rho_x)
        .scale(&q(1, 2));
    assert_eq!(d, expected);
}

#[test]
fn constants_differentiate_to_zero() {
    let c = ScalarExpr::symbol(&Symbol::constant("c"));
    assert!(c.differentiate(&cx()).unwrap().is_zero());
    assert!(n(7).differentiate(&cx()).unwrap().is_zero());
}

#[test]
fn differentiation_rejects_foreign_chart() {
    let other = Var::new("x", "D");
    assert!(matches!(
        x().differentiate(&other),
        Err(Error::ChartMismatch(_))
    ));
}

#[test]
fn substitution_is_a_homomorphism() {
    let s = Substitution::new().var(&cx(), &y() + &n(1));
    let e = x().pow(2).unwrap().substitute(&s).unwrap();
    let expected = &(&y().pow(2).unwrap() + &y().scale(&q(2, 1))) + &n(1);
    assert_eq!(e, expected);
}

#[test]
fn substitution_into_zero_denominator_fails() {
    let s = Substitution::new().var(&cx(), n(0));
    let e = x().inv().unwrap();
    assert_eq!(e.substitute(&s), Err(Error::DivisionByZero));
}

#[test]
fn division_by_zero_normal_form_fails() {
    let z = &x() - &x();
    assert_eq!(n(1).div(&z), Err(Error::DivisionByZero));
}

#[test]
fn grassmann_products() {
    let t1 = SuperExpr::odd(0);
    let t2 = SuperExpr::odd(1);
    assert_eq!(t1.mul(&t2), SuperExpr::term(0b11, n(1)));
    assert_eq!(t2.mul(&t1), SuperExpr::term(0b11, n(-1)));
    assert!(t1.mul(&t1).is_zero());
    let t12 = t1.mul(&t2);
    let a = SuperExpr::scalar(x()).add(&t12);
    let b = SuperExpr::scalar(x()).sub(&t12);
    assert_eq!(a.mul(&b), SuperExpr::scalar(x().pow(2).unwrap()));
}

#[test]
fn left_odd_derivative() {
    let t12 = SuperExpr::odd(0).mul(&SuperExpr::odd(1));
    assert_eq!(t12.odd_diff(0), SuperExpr::odd(1));
    assert_eq!(t12.odd_diff(1), SuperExpr::odd(0).neg());
    let f = SuperExpr::scalar(ScalarExpr::symbol(&Symbol::new("f", &[cx()])));
    assert!(f.odd_diff(0).is_zero());
}

#[test]
fn super_inverse() {
    let a = SuperExpr::scalar(&x() + &n(1)).add(&SuperExpr::term(0b11, y()));
    let ai = a.inv().unwrap();
    assert!(a.mul(&ai).is_one());
}

#[test]
fn opaque_pullback_uses_chain_rule() {
    // f(x) with x = 2u: f_x becomes (1/2) f'_u
    let u = Var::new("u", "D");
    let f = Symbol::new("f", &[cx()]);
    let fx = ScalarExpr::opaque(Opaque::plain(f).derive(&cx()).unwrap());
    let mut s = Substitution::new().var(&cx(), ScalarExpr::var(&u).scale(&q(2, 1)));
    let mut jac = std::collections::BTreeMap::new();
    jac.insert((cx(), u.clone()), ScalarExpr::frac(1, 2));
    s.pullback = Some(Pullback {
        source_chart: "C".into(),
        target_vars: vec![u.clone()],
        inv_jacobian: jac,
    });
    let out = fx.substitute(&s).unwrap();
    let f2 = Opaque::plain(Symbol::new("f", &[u.clone()]));
    assert_eq!(out, ScalarExpr::opaque(f2.derive(&u).unwrap()).scale(&q(1, 2)));
}

#[test]
fn rendering_is_canonical() {
    let e = (&x() + &n(1)).inv().unwrap();
    assert_eq!(e.to_string(), "1/(x + 1)");
    let p = &x().pow(2).unwrap() - &y();
    assert_eq!(p.to_string(), "x^2 - y");
}

fn arb_expr() -> impl Strategy<Value = ScalarExpr> {
    let f = Symbol::new("f", &[cx(), cy()]);
    let leaf = prop_oneof![
        (-3i64..4).prop_map(n),
        Just(x()),
        Just(y()),
        Just(ScalarExpr::symbol(&f)),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a * &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a - &b),
            (inner.clone(), inner).prop_map(|(a, b)| {
                let d = &(&b * &b) + &n(1);
                a.div(&d).unwrap()
            }),
        ]
    })
}

fn arb_super() -> impl Strategy<Value = SuperExpr> {
    proptest::collection::vec((0u64..8, arb_expr()), 0..4).prop_map(|ts| {
        ts.into_iter()
            .fold(SuperExpr::zero(), |acc, (m, c)| acc.add(&SuperExpr::term(m, c)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_idempotent(e in arb_expr()) {
        let again = ScalarExpr::from_parts(e.num().clone(), e.den().clone()).unwrap();
        prop_assert_eq!(again, e);
    }

    #[test]
    fn leibniz_rule(a in arb_expr(), b in arb_expr()) {
        let lhs = (&a * &b).diff(&cx());
        let rhs = &(&a.diff(&cx()) * &b) + &(&a * &b.diff(&cx()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn even_partials_commute(e in arb_expr()) {
        prop_assert_eq!(e.diff(&cx()).diff(&cy()), e.diff(&cy()).diff(&cx()));
    }

    #[test]
    fn odd_partials_anticommute(a in arb_super(), i in 0usize..3, j in 0usize..3) {
        let s = a.odd_diff(j).odd_diff(i).add(&a.odd_diff(i).odd_diff(j));
        prop_assert!(s.is_zero());
    }

    #[test]
    fn super_product_is_associative(a in arb_super(), b in arb_super(), c in arb_super()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn odd_leibniz(a in arb_super(), b in arb_super(), i in 0usize..3) {
        // d(ab) = (da) b + (-1)^{p(a)} a (db) for homogeneous a
        let ae = a.even_part();
        let ao = a.odd_part();
        for (part, sign) in [(ae, 1i64), (ao, -1i64)] {
            let lhs = part.mul(&b).odd_diff(i);
            let rhs = part.odd_diff(i).mul(&b).add(&part.mul(&b.odd_diff(i)).scale(&q(sign, 1)));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
