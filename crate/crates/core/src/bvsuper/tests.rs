use proptest::prelude::*;

use super::*;
use crate::gen::Gen;
use crate::symcore::Symbol;

fn canonical(n: usize) -> (SuperChart, MasterHamiltonian) {
    let sc = SuperChart::standard("D", n);
    let h = MasterHamiltonian::new(sc.chart(), sc.canonical_symbol()).unwrap();
    (sc, h)
}

fn opaque(c: &Chart, name: &str) -> SuperExpr {
    SuperExpr::scalar(ScalarExpr::symbol(&Symbol::new(name, c.even())))
}

fn zero_symbol(c: &Chart) -> Vec<Vec<SuperExpr>> {
    vec![vec![SuperExpr::zero(); c.dim()]; c.dim()]
}

#[test]
fn canonical_pairs() {
    let sc = SuperChart::standard("D", 2);
    let d = Doubled::new(sc.chart()).unwrap();
    for a in 0..4 {
        for b in 0..4 {
            let v = canonical_poisson(&d, &d.chart().coord(d.z(a)), &d.momentum(b));
            assert_eq!(v, if a == b { SuperExpr::one() } else { SuperExpr::zero() });
        }
    }
    // (p², x) = p(p,x) + (p,x)p = -2p
    let (x, p) = (d.chart().coord(d.z(0)), d.momentum(0));
    assert_eq!(canonical_poisson(&d, &p.mul(&p), &x), p.scale(&q(-2, 1)));
}

#[test]
fn even_symbol_squares_to_zero() {
    let mut g = Gen::new(7);
    for c in [Gen::even_chart("C", 2), SuperChart::standard("D", 1).chart().clone()] {
        let h = MasterHamiltonian::new(&c, g.symbol(&c, 0, 2)).unwrap();
        assert!(master_square(&h).is_zero());
    }
}

#[test]
fn darboux_table() {
    for n in 1..=2 {
        let (sc, h) = canonical(n);
        let c = sc.chart();
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { SuperExpr::one() } else { SuperExpr::zero() };
                assert_eq!(derived_bracket(&h, &c.coord(a), &c.coord(n + b)).unwrap(), want);
                assert!(derived_bracket(&h, &c.coord(a), &c.coord(b)).unwrap().is_zero());
                assert!(derived_bracket(&h, &c.coord(n + a), &c.coord(n + b)).unwrap().is_zero());
            }
        }
        let sym = PrincipalSymbol::new(c, Q::zero(), sc.canonical_symbol()).unwrap();
        assert!(darboux_check(&sym).unwrap());
        let doubled: Vec<Vec<SuperExpr>> =
            sc.canonical_symbol().iter().map(|r| r.iter().map(|e| e.scale(&q(2, 1))).collect()).collect();
        assert!(!darboux_check(&PrincipalSymbol::new(c, Q::zero(), doubled).unwrap()).unwrap());
        assert!(!darboux_check(&PrincipalSymbol::new(c, Q::zero(), zero_symbol(c)).unwrap()).unwrap());
    }
}

#[test]
fn brackets_of_functions_of_x() {
    let (sc, h) = canonical(2);
    let c = sc.chart();
    let (f, g) = (opaque(c, "f"), opaque(c, "g"));
    assert!(derived_bracket(&h, &f, &g).unwrap().is_zero());
    let none = MasterHamiltonian::new(c, zero_symbol(c)).unwrap();
    let t = c.coord(2).mul(&f);
    assert!(derived_bracket(&none, &t, &g).unwrap().is_zero());
    let d = h.doubled();
    assert!(derived_bracket(&h, &d.momentum(0), &f).is_err());
}

#[test]
fn jacobiator_examples() {
    let (sc, h) = canonical(2);
    let c = sc.chart();
    for a in 0..4 {
        for b in 0..4 {
            for k in 0..4 {
                assert!(jacobiator(&h, &c.coord(a), &c.coord(b), &c.coord(k)).unwrap().is_zero());
            }
        }
    }
    let none = MasterHamiltonian::new(c, zero_symbol(c)).unwrap();
    let (f, t) = (opaque(c, "f"), c.coord(3));
    assert!(jacobiator(&none, &f, &t, &f).unwrap().is_zero());
}

/// `S^{xx} = xθ` on `1|1` on top of the canonical entries.
fn perturbed() -> MasterHamiltonian {
    let sc = SuperChart::standard("D", 1);
    let c = sc.chart();
    let mut s = sc.canonical_symbol();
    s[0][0] = c.coord(0).mul(&c.coord(1));
    MasterHamiltonian::new(c, s).unwrap()
}

#[test]
fn perturbed_symbol_breaks_jacobi() {
    let h = perturbed();
    assert!(!master_square(&h).is_zero());
    let w = jacobi_witness(&h, 2).unwrap().expect("a monomial triple");
    assert!(!jacobiator(&h, &w[0], &w[1], &w[2]).unwrap().is_zero());
}

#[test]
fn master_square_iff_jacobi_on_family() {
    let mut family = vec![canonical(1).1, canonical(2).1, perturbed()];
    let sc = SuperChart::standard("D", 1);
    let c = sc.chart();
    // a function of x in front of the canonical entries keeps (H,H) = 0 on 1|1
    let mut s = sc.canonical_symbol();
    let f = opaque(c, "f");
    s[0][1] = f.clone();
    s[1][0] = f;
    family.push(MasterHamiltonian::new(c, s).unwrap());
    let mut g = Gen::new(11);
    for _ in 0..4 {
        family.push(MasterHamiltonian::new(c, g.symbol(c, 1, 1)).unwrap());
    }
    let (mut pass, mut fail) = (0, 0);
    for h in &family {
        let zero = master_square(h).is_zero();
        let jac = jacobi_witness(h, 2).unwrap().is_none();
        assert_eq!(zero, jac);
        if zero {
            pass += 1;
        } else {
            fail += 1;
        }
    }
    assert!(pass > 0 && fail > 0);
}

#[test]
fn berezinian_examples() {
    assert_eq!(berezinian(&SuperMatrix::identity(2, 3)).unwrap(), SuperExpr::one());
    let c = Chart::new("B", &["x"], &["u", "v"]).unwrap();
    let (a, d) = (opaque(&c, "a"), opaque(&c, "d"));
    let diag = SuperMatrix::new(vec![vec![a.clone()]], vec![vec![SuperExpr::zero()]], vec![vec![SuperExpr::zero()]], vec![vec![d.clone()]]).unwrap();
    assert_eq!(berezinian(&diag).unwrap(), a.div(&d).unwrap());
    let beta = c.coord(1).mul(&opaque(&c, "b"));
    let gamma = c.coord(2).mul(&opaque(&c, "g"));
    let m = SuperMatrix::new(vec![vec![a.clone()]], vec![vec![beta.clone()]], vec![vec![gamma.clone()]], vec![vec![d.clone()]]).unwrap();
    let expect = a.sub(&beta.mul(&gamma).div(&d).unwrap()).div(&d).unwrap();
    assert_eq!(berezinian(&m).unwrap(), expect);
    let singular = SuperMatrix::new(vec![vec![a]], vec![vec![beta]], vec![vec![gamma]], vec![vec![SuperExpr::zero()]]).unwrap();
    assert!(matches!(berezinian(&singular), Err(Error::NotInvertible(_))));
    assert!(SuperMatrix::new(vec![vec![c.coord(1)]], vec![vec![]], vec![], vec![]).is_err());
}

#[test]
fn khudian_examples() {
    let (sc, _) = canonical(1);
    let c = sc.chart();
    let k = khudian_operator(&sc);
    let half = |e: SuperExpr| Density::new(c, q(1, 2), e);
    assert_eq!(k.apply(&half(c.coord(0).mul(&c.coord(1)))).unwrap(), half(SuperExpr::one()));
    assert!(k.apply(&half(opaque(c, "f"))).unwrap().is_zero());
    for n in 1..=3 {
        let k = khudian_operator(&SuperChart::standard("D", n));
        assert!(k.compose(&k).unwrap().is_zero());
    }
}

#[test]
fn bv_laplacian_examples() {
    let (sc, h) = canonical(1);
    let c = sc.chart();
    let (x, t) = (c.coord(0), c.coord(1));
    let one = SuperExpr::one();
    assert_eq!(bv_laplacian(&h, &one, &x.mul(&t)).unwrap(), one);
    assert!(bv_laplacian(&h, &one, &opaque(c, "f")).unwrap().is_zero());
    // ρ(x): Δ_ρ(xθ) = 1 + x ρ'/(2ρ)
    let rho = opaque(c, "r");
    let expect = one.add(&x.mul(&c.partial(&rho, 0)).div(&rho.scale(&q(2, 1))).unwrap());
    assert_eq!(bv_laplacian(&h, &rho, &x.mul(&t)).unwrap(), expect);
    assert!(bv_laplacian(&h, &SuperExpr::zero(), &x).is_err());
}

#[test]
fn bv_identity_examples() {
    let (sc, h) = canonical(1);
    let c = sc.chart();
    let r = bv_identity_check(&h, &SuperExpr::one(), &SuperExpr::zero()).unwrap();
    assert!(r.lhs.is_zero() && r.rhs.is_zero());
    let f = opaque(c, "F");
    assert!(bv_identity_check(&h, &SuperExpr::one(), &f).unwrap().holds());
    assert!(bv_identity_check(&h, &opaque(c, "r"), &f).unwrap().holds());
    let odd = c.coord(0).mul(&c.coord(1));
    assert!(matches!(bv_identity_check(&h, &SuperExpr::one(), &odd), Err(Error::Parity(_))));
}

#[test]
fn bv_identity_on_two_two() {
    let (sc, h) = canonical(2);
    let c = sc.chart();
    let nil = c.coord(2).mul(&c.coord(3));
    let f = opaque(c, "F").add(&nil.mul(&opaque(c, "G")));
    let rho = opaque(c, "r").add(&nil.mul(&opaque(c, "s")));
    let rep = bv_identity_check(&h, &rho, &f).unwrap();
    assert!(rep.holds(), "residual {}", c.render(&rep.residual()));
}

fn mobius_pair() -> (SuperChart, SuperChart) {
    (SuperChart::standard("D", 1), SuperChart::new(&Chart::new("E", &["y"], &["et"]).unwrap()).unwrap())
}

#[test]
fn point_transformation_is_flat() {
    let (s, t) = mobius_pair();
    let x = ScalarExpr::var(s.chart().var(0));
    let fwd = x.div(&x.add(&ScalarExpr::one())).unwrap();
    let tr = DarbouxTransition::new(&s, &t, &[fwd.clone()], &SuperExpr::zero()).unwrap();
    let rep = darboux_flat_consistency(&tr).unwrap();
    let j = SuperExpr::scalar(fwd.diff(s.chart().var(0)));
    assert_eq!(rep.sqrt_ber, j);
    assert_eq!(rep.berezinian, j.mul(&j));
    assert!(rep.holds());
}

#[test]
fn fiber_translation_is_flat() {
    let s = SuperChart::with_params(&Chart::new("D", &["x"], &["th", "e"]).unwrap()).unwrap();
    let t = SuperChart::with_params(&Chart::new("E", &["y"], &["et", "e"]).unwrap()).unwrap();
    let x = ScalarExpr::var(s.chart().var(0));
    let psi = s.chart().coord(2).mul(&opaque(s.chart(), "F"));
    let tr = DarbouxTransition::new(&s, &t, &[x], &psi).unwrap();
    assert!(!tr.jacobian().c[0][0].is_zero());
    let rep = darboux_flat_consistency(&tr).unwrap();
    assert_eq!(rep.berezinian, SuperExpr::one());
    assert!(rep.holds());
}

#[test]
fn composite_transition_is_flat() {
    let s = SuperChart::with_params(&Chart::new("D", &["x1", "x2"], &["t1", "t2", "e"]).unwrap()).unwrap();
    let t = SuperChart::with_params(&Chart::new("E", &["y1", "y2"], &["u1", "u2", "e"]).unwrap()).unwrap();
    let (x1, x2) = (ScalarExpr::var(s.chart().var(0)), ScalarExpr::var(s.chart().var(1)));
    let fwd = [x1.add(&x2.mul(&x2)), x2.scale(&q(3, 1)).add(&ScalarExpr::one())];
    let psi = s.chart().coord(4).mul(&opaque(s.chart(), "F"));
    let tr = DarbouxTransition::new(&s, &t, &fwd, &psi).unwrap();
    let rep = darboux_flat_consistency(&tr).unwrap();
    assert_eq!(rep.sqrt_ber, SuperExpr::int(3));
    assert!(rep.holds());
}

#[test]
fn non_symplectic_map_is_rejected() {
    let (s, t) = mobius_pair();
    let c = s.chart();
    let tr = DarbouxTransition::from_images(&s, &t, vec![c.coord(0), c.coord(1).scale(&q(2, 1))]).unwrap();
    assert!(!tr.is_symplectic().unwrap());
    assert!(matches!(darboux_flat_consistency(&tr), Err(Error::Transition(_))));
    let even = opaque(c, "F");
    assert!(matches!(DarbouxTransition::new(&s, &t, &[ScalarExpr::var(c.var(0))], &even), Err(Error::Parity(_))));
}

fn arb_super() -> impl Strategy<Value = usize> {
    1usize..3
}

fn homogeneous_expr(g: &mut Gen, c: &Chart, deg: u32) -> SuperExpr {
    let p = g.range(0, 2) as u32;
    g.superexpr(c, deg, Some(p))
}

fn par(e: &SuperExpr) -> u32 {
    e.parity().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn canonical_bracket_laws(seed in any::<u64>(), n in arb_super()) {
        let mut g = Gen::new(seed);
        let d = Doubled::new(SuperChart::standard("D", n).chart()).unwrap();
        let c = d.chart();
        let (f, h, k) = (homogeneous_expr(&mut g, c, 2), homogeneous_expr(&mut g, c, 2), homogeneous_expr(&mut g, c, 2));
        let (pf, ph, pk) = (par(&f), par(&h), par(&k));
        let fh = canonical_poisson(&d, &f, &h);
        let hf = canonical_poisson(&d, &h, &f);
        prop_assert_eq!(fh.clone(), sign_if(pf * ph % 2 == 0, hf));
        let term = |a: &SuperExpr, b: &SuperExpr, e: &SuperExpr, pa: u32, pe: u32| {
            sign_if(pa * pe % 2 == 1, canonical_poisson(&d, &canonical_poisson(&d, a, b), e))
        };
        let jac = term(&f, &h, &k, pf, pk).add(&term(&h, &k, &f, ph, pf)).add(&term(&k, &f, &h, pk, ph));
        prop_assert!(jac.is_zero());
    }

    #[test]
    fn derived_bracket_laws(seed in any::<u64>(), n in arb_super()) {
        let mut g = Gen::new(seed);
        let sc = SuperChart::standard("D", n);
        let c = sc.chart();
        let h = MasterHamiltonian::new(c, g.symbol(c, 1, 1)).unwrap();
        let (f, a, b) = (homogeneous_expr(&mut g, c, 2), homogeneous_expr(&mut g, c, 2), homogeneous_expr(&mut g, c, 2));
        let (pf, pa) = (par(&f), par(&a));
        let fa = derived_bracket(&h, &f, &a).unwrap();
        let af = derived_bracket(&h, &a, &f).unwrap();
        prop_assert_eq!(fa.clone(), sign_if((pf + 1) * (pa + 1) % 2 == 0, af));
        let lhs = derived_bracket(&h, &f, &a.mul(&b)).unwrap();
        let second = a.mul(&derived_bracket(&h, &f, &b).unwrap());
        let rhs = fa.mul(&b).add(&sign_if((pf + 1) * pa % 2 == 1, second));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn berezinian_is_multiplicative(seed in any::<u64>(), n in 1usize..3, m in 1usize..3) {
        let mut g = Gen::new(seed);
        let c = Chart::new("B", &["x"], &["u", "v", "w"]).unwrap();
        let x = c.coord(0);
        let mut block = |rows: usize, cols: usize, parity: u32, diag: bool| -> Vec<Vec<SuperExpr>> {
            (0..rows)
                .map(|i| {
                    (0..cols)
                        .map(|j| {
                            let e = g.superexpr(&c, 1, Some(parity));
                            match (diag, i.cmp(&j)) {
                                (true, std::cmp::Ordering::Equal) => {
                                    let unit = x.mul(&x).add(&SuperExpr::one()).scale(&g.nonzero_rational());
                                    e.sub(&SuperExpr::scalar(e.body())).add(&unit)
                                }
                                (true, std::cmp::Ordering::Greater) => e.sub(&SuperExpr::scalar(e.body())),
                                _ => e,
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let mut mk = || SuperMatrix::new(block(n, n, 0, true), block(n, m, 1, false), block(m, n, 1, false), block(m, m, 0, true)).unwrap();
        let (a, b) = (mk(), mk());
        let lhs = berezinian(&a.mul(&b).unwrap()).unwrap();
        prop_assert_eq!(lhs, berezinian(&a).unwrap().mul(&berezinian(&b).unwrap()));
    }

    #[test]
    fn coordinate_laplacian_is_khudian(seed in any::<u64>(), n in arb_super()) {
        let mut g = Gen::new(seed);
        let (sc, h) = canonical(n);
        let c = sc.chart();
        let f = g.superexpr(c, 4, None);
        let k = khudian_operator(&sc).apply(&Density::new(c, q(1, 2), f.clone())).unwrap();
        prop_assert_eq!(bv_laplacian(&h, &SuperExpr::one(), &f).unwrap(), k.coeff(&q(1, 2)));
    }
}
