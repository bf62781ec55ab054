//! Acceptance criteria 1-10. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; exits nonzero if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use denscalc::{parse_session, run, RunOptions};
use denscalc_core::atlas::{affine, laplace_beltrami, mobius, triangular, Transition};
use denscalc_core::bvsuper::{
    bv_identity_check, darboux_check, darboux_flat_consistency, derived_bracket, jacobi_witness, khudian_operator,
    master_square, DarbouxTransition, MasterHamiltonian, SuperChart,
};
use denscalc_core::chart::Chart;
use denscalc_core::densalg::{divergence, lie_derivative, vertical_projection, DensOp, HatField};
use denscalc_core::gen::Gen;
use denscalc_core::groupoid::{arrow_defect, cocycle_residual, is_arrow, line_family, PrincipalSymbol};
use denscalc_core::pencils::{
    canonical_operator, check_admissible, conjugate_by_power, do_coefficients, duval_ovsienko, evaluate,
    from_connection, lambda_expr, pencil, pencil_from_operator, self_adjoint_defect, SecondOrder,
};
use denscalc_core::projline::{diffeo_cocycle, mobius_diffeo, LineDiffeo};
use denscalc_core::symcore::{q, ScalarExpr, SuperExpr, Symbol, Var, Q};
use denscalc_core::Error;
use num_traits::{One, Zero};
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn opaque(c: &Chart, name: &str) -> SuperExpr {
    SuperExpr::scalar(ScalarExpr::symbol(&Symbol::new(name, c.even())))
}

fn constant(name: &str) -> ScalarExpr {
    ScalarExpr::symbol(&Symbol::constant(name))
}

fn charts_1_to_3() -> Vec<Chart> {
    vec![
        Gen::even_chart("C", 1),
        Gen::even_chart("C", 2),
        Gen::even_chart("C", 3),
        Chart::new("S", &["x"], &["a"]).unwrap(),
        Chart::new("S", &["x", "y"], &["a"]).unwrap(),
        Chart::new("S", &["x"], &["a", "b"]).unwrap(),
    ]
}

// 1. (Δ_λ)⁺ = Δ_{1-λ-δ} on 200 random pencils.
fn pencil_self_adjointness() -> Outcome {
    let charts = charts_1_to_3();
    let start = Instant::now();
    let bad: Vec<String> = (0..200u64)
        .into_par_iter()
        .filter_map(|i| {
            let c = &charts[i as usize % charts.len()];
            let mut g = Gen::new(1000 + i);
            let parity = if c.dim_odd() > 0 { (i / 6 % 2) as u32 } else { 0 };
            let delta = g.weight();
            let p = g.pencil_data(c, parity, delta);
            match self_adjoint_defect(&p) {
                Ok(d) if d.is_zero() => None,
                Ok(d) => Some(format!("seed {}: defect {}", 1000 + i, d.render())),
                Err(e) => Some(format!("seed {}: {e}", 1000 + i)),
            }
        })
        .collect();
    let took = start.elapsed();
    ensure(bad.is_empty(), || bad.join("; "))?;
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("200 pencils in {:.1}s", took.as_secs_f64()))
}

// 2. evaluate(pencil_from_operator(Δ, λ₀, δ), λ₀) = Δ; exceptional λ₀ rejected.
fn universality_round_trip() -> Outcome {
    let mut done = 0;
    let mut rejected = 0;
    let mut seed = 2000u64;
    while done < 200 {
        seed += 1;
        let c = Gen::even_chart("C", 1 + (seed as usize % 3));
        let mut g = Gen::new(seed);
        let delta = g.weight();
        let l0 = g.nonzero_rational();
        let op = g.densop(&c, 2, Some(delta.clone())).at_weight(&ScalarExpr::zero());
        for bad in [Q::zero(), Q::one() - &delta, (Q::one() - &delta) / Q::from_integer(2.into())] {
            match pencil_from_operator(&op, &bad, &delta) {
                Err(Error::ExceptionalWeight(_)) => rejected += 1,
                other => return Err(format!("seed {seed}: λ₀ = {bad}, δ = {delta} accepted: {other:?}")),
            }
        }
        if check_admissible(&l0, &delta).is_err() {
            continue;
        }
        let p = pencil_from_operator(&op, &l0, &delta).map_err(|e| format!("seed {seed}: {e}"))?;
        let back = evaluate(&pencil(&p), &ScalarExpr::from_q(l0.clone())).map_err(|e| e.to_string())?;
        ensure(back == op, || format!("seed {seed}: {} != {}", back.render(), op.render()))?;
        ensure(self_adjoint_defect(&p).map_err(|e| e.to_string())?.is_zero(), || format!("seed {seed}: not self-adjoint"))?;
        done += 1;
    }
    Ok(format!("{done} round trips, {rejected} exceptional weights rejected"))
}

// 3. φ_{λμ} equals pencil transport; coefficients at (2, 3); transitivity.
fn duval_ovsienko_map() -> Outcome {
    let want = [q(5, 3), q(-2, 3), q(3, 1), q(-1, 1)];
    let got = do_coefficients(&q(2, 1), &q(3, 1)).map_err(|e| e.to_string())?;
    ensure(got == want, || format!("coefficients {got:?}"))?;
    let exceptional = [q(0, 1), q(1, 2), q(1, 1)];
    for seed in 3000..3100u64 {
        let c = Gen::even_chart("C", 1 + (seed as usize % 2));
        let mut g = Gen::new(seed);
        let op = g.densop(&c, 2, Some(Q::zero())).at_weight(&ScalarExpr::zero());
        let (a, _) = SecondOrder::from_op(&op).map_err(|e| e.to_string())?;
        let mut pick = |shift: i64| loop {
            let w = g.nonzero_rational() + Q::from_integer(shift.into());
            if !exceptional.contains(&w) {
                return w;
            }
        };
        let (l, m, n) = (pick(3), pick(-4), pick(1));
        let b = duval_ovsienko(&c, &a, &l, &m).map_err(|e| e.to_string())?;
        let p = pencil_from_operator(&op, &l, &Q::zero()).map_err(|e| e.to_string())?;
        let transported = evaluate(&pencil(&p), &ScalarExpr::from_q(m.clone())).map_err(|e| e.to_string())?;
        ensure(b.to_op(&c, &Q::zero()) == transported, || format!("seed {seed}: formula differs from transport"))?;
        let two_step = duval_ovsienko(&c, &b, &m, &n).map_err(|e| e.to_string())?;
        let direct = duval_ovsienko(&c, &a, &l, &n).map_err(|e| e.to_string())?;
        ensure(two_step == direct, || format!("seed {seed}: φ_mn∘φ_lm != φ_ln"))?;
    }
    Ok("100 operators; coefficients 5/3, -2/3, 3, -1".into())
}

fn embedded_mobius(c: &Chart, d: &Chart, [a, b, cc, dd]: [Q; 4]) -> Result<Transition, Error> {
    let s1 = Chart::new("m1", &["u"], &[])?;
    let s2 = Chart::new("m2", &["v"], &[])?;
    let m = mobius(&s1, &s2, [a, b, cc, dd].map(ScalarExpr::from_q))?;
    let rename = |e: &ScalarExpr, from: &Var, to: &Var| {
        e.substitute(&denscalc_core::symcore::Substitution::new().var(from, ScalarExpr::var(to)))
    };
    let mut fwd = vec![rename(&m.forward()[0], s1.var(0), c.var(0))?];
    let mut bwd = vec![rename(&m.backward()[0], s2.var(0), d.var(0))?];
    for i in 1..c.dim_even() {
        fwd.push(ScalarExpr::var(c.var(i)));
        bwd.push(ScalarExpr::var(d.var(i)));
    }
    Transition::new(c, d, fwd, bwd)
}

// 4. Component laws against chain-rule transport.
fn transformation_laws() -> Outcome {
    let mut count = 0;
    for dim in 1..=2usize {
        let (c, d) = (Gen::even_chart("C", dim), Gen::even_chart("D", dim));
        for kind in 0..3 {
            let mut seed = 4000 + 100 * kind as u64 + 10 * dim as u64;
            let mut made = 0;
            while made < 8 {
                seed += 1;
                let mut g = Gen::new(seed);
                let t = match kind {
                    0 => {
                        let m: Vec<Vec<Q>> = (0..dim).map(|_| (0..dim).map(|_| g.rational()).collect()).collect();
                        let v: Vec<Q> = (0..dim).map(|_| g.rational()).collect();
                        affine(&c, &d, &m, &v)
                    }
                    1 => {
                        let k = [0; 4].map(|_| g.rational());
                        if &k[0] * &k[3] == &k[1] * &k[2] || k[2].is_zero() {
                            continue;
                        }
                        embedded_mobius(&c, &d, k)
                    }
                    _ => {
                        let p: Vec<ScalarExpr> = (0..dim)
                            .map(|i| {
                                let mut e = ScalarExpr::from_q(g.rational());
                                for j in 0..i {
                                    let x = ScalarExpr::var(c.var(j));
                                    e = e.add(&x.mul(&x).scale(&g.rational()).add(&x.scale(&g.rational())));
                                }
                                e
                            })
                            .collect();
                        triangular(&c, &d, &p)
                    }
                };
                let Ok(t) = t else { continue };
                let delta = [q(0, 1), q(1, 1), q(2, 1), q(-1, 1), q(1, 2)][g.range(0, 4)].clone();
                if t.det_power(&delta).is_err() {
                    continue;
                }
                let p = g.pencil_data(&c, 0, delta);
                let law = t.transform_pencil_data(&p).map_err(|e| format!("seed {seed}: {e}"))?;
                let by_law = canonical_operator(&law);
                let by_chain = t.transform_operator(&canonical_operator(&p)).map_err(|e| format!("seed {seed}: {e}"))?;
                ensure(by_law == by_chain, || format!("seed {seed} kind {kind} dim {dim}: laws differ"))?;
                made += 1;
                count += 1;
            }
        }
    }
    Ok(format!("{count} transitions (affine, Möbius, triangular; dims 1-2)"))
}

// 5. Line family, cocycle additivity, agreement of both membership tests.
fn groupoid() -> Outcome {
    let line = Gen::even_chart("C", 1);
    let (sym, x) = line_family(&line, &constant("C")).map_err(|e| e.to_string())?;
    let zero = vec![SuperExpr::zero()];
    let d = arrow_defect(&sym, &zero, &x).map_err(|e| e.to_string())?;
    ensure(d.is_zero(), || format!("line family defect {}", d.render()))?;
    // the family is 2/(C + x), read back from the expression itself
    let xv = ScalarExpr::var(line.var(0));
    let expect = ScalarExpr::int(2).div(&constant("C").add(&xv)).unwrap();
    ensure(x[0] == SuperExpr::scalar(expect), || "family differs from 2/(C+x)".into())?;

    for delta in [q(0, 1), q(1, 2), q(2, 1), q(-3, 1)] {
        let sym = PrincipalSymbol::new(&line, delta, vec![vec![opaque(&line, "s")]]).map_err(|e| e.to_string())?;
        let r = cocycle_residual(&sym, &[opaque(&line, "g")], &[opaque(&line, "X")], &[opaque(&line, "Y")])
            .map_err(|e| e.to_string())?;
        ensure(r.is_zero(), || format!("cocycle residual {}", r.render()))?;
    }

    let results: Vec<Result<bool, String>> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let seed = 5000 + i;
            let mut g = Gen::new(seed);
            let err = |e: Error| format!("seed {seed}: {e}");
            let m = match i % 4 {
                // a known arrow from the line family with a rational constant
                0 => {
                    let c = g.nonzero_rational() + Q::from_integer(7.into());
                    let (sym, x) = line_family(&line, &ScalarExpr::from_q(c)).map_err(err)?;
                    is_arrow(&sym, &zero, &x).map_err(err)?
                }
                _ => {
                    let c = Gen::even_chart("C", 1 + (i as usize % 2));
                    let delta = if i % 4 == 1 { q(1, 1) } else { g.weight() };
                    let sym = PrincipalSymbol::new(&c, delta, g.symbol(&c, 0, 2)).map_err(err)?;
                    let cov = |g: &mut Gen| (0..c.dim()).map(|_| g.superexpr(&c, 2, Some(0))).collect::<Vec<_>>();
                    let ga = cov(&mut g);
                    let gb = if g.coin() { ga.clone() } else { cov(&mut g) };
                    is_arrow(&sym, &ga, &gb).map_err(err)?
                }
            };
            if m.agree() {
                Ok(m.is_arrow())
            } else {
                Err(format!("seed {seed}: defect says {}, operators say {}", m.by_defect, m.by_operator))
            }
        })
        .collect();
    let mut arrows = 0;
    for r in results {
        arrows += usize::from(r?);
    }
    ensure(arrows > 0 && arrows < 500, || format!("degenerate sample: {arrows} arrows"))?;
    Ok(format!("line family, cocycle, 500 triples ({arrows} arrows)"))
}

/// Schwarzian computed directly from its definition, as the test oracle.
fn schwarzian_oracle(x: &ScalarExpr, y: &Var) -> ScalarExpr {
    let d1 = x.diff(y);
    let d2 = d1.diff(y);
    let d3 = d2.diff(y);
    let r = d2.div(&d1).unwrap();
    d3.div(&d1).unwrap().sub(&r.mul(&r).scale(&q(3, 2)))
}

// 6. Schwarzian of Möbius maps, S[y²], cocycle at γ = 0.
fn projective_line() -> Outcome {
    let x = Chart::new("X", &["x"], &[]).unwrap();
    let y = Chart::new("Y", &["y"], &[]).unwrap();
    let yv = y.var(0).clone();
    let m = mobius_diffeo(&x, &y, ["a", "b", "c", "d"].map(constant)).map_err(|e| e.to_string())?;
    let s = m.schwarzian().map_err(|e| e.to_string())?;
    ensure(s.is_zero(), || format!("S[Möbius] = {s}"))?;

    let sq = LineDiffeo::new(&x, &y, ScalarExpr::var(&yv).pow(2).unwrap()).map_err(|e| e.to_string())?;
    let got = sq.schwarzian().map_err(|e| e.to_string())?;
    let want = ScalarExpr::frac(-3, 2).div(&ScalarExpr::var(&yv).pow(2).unwrap()).unwrap();
    ensure(got == want, || format!("S[y²] = {got}"))?;
    ensure(schwarzian_oracle(sq.x_of_y(), &yv) == want, || "oracle disagrees on S[y²]".into())?;

    let yy = ScalarExpr::var(&yv);
    let maps = [
        yy.pow(3).unwrap().add(&yy),
        yy.pow(2).unwrap(),
        yy.inv().unwrap(),
        yy.add(&ScalarExpr::int(1)).div(&yy.sub(&ScalarExpr::int(2))).unwrap(),
        ScalarExpr::one().div(&yy.pow(2).unwrap().add(&ScalarExpr::one())).unwrap(),
    ];
    for xy in maps {
        let f = LineDiffeo::new(&x, &y, xy.clone()).map_err(|e| e.to_string())?;
        let c = diffeo_cocycle(&ScalarExpr::zero(), &f).map_err(|e| e.to_string())?;
        let s = schwarzian_oracle(&xy, &yv);
        let want = denscalc_core::densalg::Density::new(&y, q(2, 1), SuperExpr::scalar(s.scale(&q(-1, 4))));
        ensure(c == want, || format!("cocycle for x = {xy}: {}", c.render()))?;
    }
    Ok("Möbius, S[y²] = -3/(2y²), cocycle at zero connection".into())
}

// 7. BV suite.
fn bv_suite() -> Outcome {
    for n in 1..=3 {
        let k = khudian_operator(&SuperChart::standard("D", n));
        let k2 = k.compose(&k).map_err(|e| e.to_string())?;
        ensure(k2.is_zero(), || format!("Δ² on {n}|{n}: {}", k2.render()))?;
    }
    // {x^a, x^b} = 0, {x^a, θ_b} = δ^a_b, {θ_a, θ_b} = 0
    for n in 1..=3 {
        let sc = SuperChart::standard("D", n);
        let c = sc.chart();
        let h = MasterHamiltonian::new(c, sc.canonical_symbol()).map_err(|e| e.to_string())?;
        for a in 0..n {
            for b in 0..n {
                let br = |i, j| derived_bracket(&h, &c.coord(i), &c.coord(j)).map_err(|e| e.to_string());
                ensure(br(a, b)?.is_zero(), || format!("{{x{a},x{b}}} ≠ 0"))?;
                ensure(br(n + a, n + b)?.is_zero(), || format!("{{θ{a},θ{b}}} ≠ 0"))?;
                let want = if a == b { SuperExpr::one() } else { SuperExpr::zero() };
                ensure(br(a, n + b)? == want, || format!("{{x{a},θ{b}}} wrong"))?;
            }
        }
        let sym = PrincipalSymbol::new(c, Q::zero(), sc.canonical_symbol()).map_err(|e| e.to_string())?;
        ensure(darboux_check(&sym).map_err(|e| e.to_string())?, || "darboux_check".into())?;
    }
    // master square against the jacobiator on a generated family
    let sc = SuperChart::standard("D", 1);
    let c = sc.chart();
    let mut family = vec![MasterHamiltonian::new(c, sc.canonical_symbol()).unwrap()];
    let mut pert = sc.canonical_symbol();
    pert[0][0] = c.coord(0).mul(&c.coord(1));
    family.push(MasterHamiltonian::new(c, pert).unwrap());
    let mut g = Gen::new(7000);
    for _ in 0..6 {
        family.push(MasterHamiltonian::new(c, g.symbol(c, 1, 1)).unwrap());
    }
    let sc2 = SuperChart::standard("D", 2);
    family.push(MasterHamiltonian::new(sc2.chart(), sc2.canonical_symbol()).unwrap());
    let (mut pass, mut fail) = (0, 0);
    for h in &family {
        let zero = master_square(h).is_zero();
        let jac = jacobi_witness(h, 2).map_err(|e| e.to_string())?.is_none();
        ensure(zero == jac, || "master square and jacobiator disagree".into())?;
        if zero {
            pass += 1
        } else {
            fail += 1
        }
    }
    ensure(pass > 0 && fail > 0, || format!("family has {pass} passing and {fail} failing members"))?;
    // identity with opaque ρ and F on 1|1 and 2|2
    for n in 1..=2 {
        let sc = SuperChart::standard("D", n);
        let c = sc.chart();
        let h = MasterHamiltonian::new(c, sc.canonical_symbol()).unwrap();
        let (mut rho, mut f) = (opaque(c, "r"), opaque(c, "F"));
        if n == 2 {
            let nil = c.coord(2).mul(&c.coord(3));
            rho = rho.add(&nil.mul(&opaque(c, "s")));
            f = f.add(&nil.mul(&opaque(c, "G")));
        }
        let rep = bv_identity_check(&h, &rho, &f).map_err(|e| e.to_string())?;
        ensure(rep.holds(), || format!("identity on {n}|{n}: {}", c.render(&rep.residual())))?;
    }
    // Δ(√Ber) = 0 for point transformations and fiber translations
    let s = SuperChart::standard("D", 1);
    let t = SuperChart::new(&Chart::new("E", &["y"], &["et"]).unwrap()).unwrap();
    let x = ScalarExpr::var(s.chart().var(0));
    let point = DarbouxTransition::new(&s, &t, &[x.div(&x.add(&ScalarExpr::one())).unwrap()], &SuperExpr::zero())
        .map_err(|e| e.to_string())?;
    let sp = SuperChart::with_params(&Chart::new("D", &["x"], &["th", "e"]).unwrap()).unwrap();
    let tp = SuperChart::with_params(&Chart::new("E", &["y"], &["et", "e"]).unwrap()).unwrap();
    let xp = ScalarExpr::var(sp.chart().var(0));
    let psi = sp.chart().coord(2).mul(&opaque(sp.chart(), "F"));
    let fiber = DarbouxTransition::new(&sp, &tp, &[xp], &psi).map_err(|e| e.to_string())?;
    for (name, tr) in [("point", point), ("fiber", fiber)] {
        let rep = darboux_flat_consistency(&tr).map_err(|e| e.to_string())?;
        ensure(rep.holds() && rep.laplacian.is_zero(), || format!("{name} transition: Δ√Ber = {}", tr.source().chart().render(&rep.laplacian)))?;
    }
    Ok("Δ² = 0 up to 3|3, Darboux table, Jacobi family, identity 1|1 and 2|2, flat transitions".into())
}

// 8. ρ^λ∘(½ div_ρ grad)∘ρ^{-λ} is the canonical pencil with γ = -∂ log ρ.
fn riemannian() -> Outcome {
    for dim in 1..=2usize {
        let c = Gen::even_chart("C", dim);
        let names = ["g1", "g2"];
        let metric: Vec<Vec<ScalarExpr>> = (0..dim)
            .map(|a| (0..dim).map(|b| if a == b { opaque(&c, names[a]).body() } else { ScalarExpr::zero() }).collect())
            .collect();
        let rho = opaque(&c, "rho");
        let lb = laplace_beltrami(&c, &metric, &rho.body()).map_err(|e| e.to_string())?;
        let lhs = conjugate_by_power(&lb, &rho, &lambda_expr()).map_err(|e| e.to_string())?;
        let s: Vec<Vec<SuperExpr>> = (0..dim)
            .map(|a| {
                (0..dim)
                    .map(|b| if a == b { metric[a][a].inv().map(SuperExpr::scalar).unwrap() } else { SuperExpr::zero() })
                    .collect()
            })
            .collect();
        let gamma: Vec<SuperExpr> = (0..dim).map(|a| c.partial(&rho, a).div(&rho).unwrap().neg()).collect();
        let p = from_connection(&c, Q::zero(), s, &gamma).map_err(|e| e.to_string())?;
        let rhs = pencil(&p);
        ensure(lhs == rhs, || format!("dim {dim}: {}", lhs.sub(&rhs).unwrap().render()))?;
    }
    Ok("1-D and diagonal 2-D with opaque g, ρ".into())
}

/// The even part of an operator: coefficient parity matches the odd derivatives.
fn even_terms(a: &DensOp) -> DensOp {
    let mut out = DensOp::zero(a.chart());
    for (k, c) in a.terms() {
        let odd = k.beta.count_ones() % 2 == 1;
        out.add_term(k.clone(), if odd { c.odd_part() } else { c.even_part() });
    }
    out
}

// 9. Operator-algebra properties on 1000 random instances.
fn operator_algebra() -> Outcome {
    let charts = [
        Gen::even_chart("C", 1),
        Gen::even_chart("C", 2),
        Chart::new("S", &["x"], &["a"]).unwrap(),
        Chart::new("S", &["x"], &["a", "b"]).unwrap(),
    ];
    let bad: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|i| {
            let seed = 9000 + i;
            let c = &charts[i as usize % charts.len()];
            let mut g = Gen::new(seed);
            let r = (|| -> Result<(), String> {
                let e = |x: Error| x.to_string();
                match i % 5 {
                    0 => {
                        let a = g.densop(c, 3, None);
                        ensure(a.adjoint().adjoint() == a, || "adjoint is not an involution".into())
                    }
                    1 => {
                        let a = g.densop(c, 2, None);
                        let b = g.densop(c, 2, None);
                        for x in [a.map(|s| s.even_part()), a.map(|s| s.odd_part())] {
                            for y in [b.map(|s| s.even_part()), b.map(|s| s.odd_part())] {
                                let (Some(px), Some(py)) = (x.parity(), y.parity()) else { continue };
                                let lhs = x.compose(&y).map_err(e)?.adjoint();
                                let rhs = y.adjoint().compose(&x.adjoint()).map_err(e)?;
                                let rhs = if px * py == 1 { rhs.neg() } else { rhs };
                                ensure(lhs == rhs, || "(AB)⁺ ≠ ±B⁺A⁺".into())?;
                            }
                        }
                        Ok(())
                    }
                    2 => {
                        let a = even_terms(&g.densop(c, 2, None));
                        let b = even_terms(&g.densop(c, 2, None));
                        let ab = a.compose(&b).map_err(e)?;
                        ensure(ab.order() <= a.order() + b.order(), || "ord(AB) too large".into())?;
                        let m = DensOp::scalar(c, g.superexpr(c, 2, Some(0)));
                        let comm = a.commutator(&m).map_err(e)?;
                        ensure(comm.is_zero() || comm.order() < a.order(), || "ord [A, f] not lowered".into())?;
                        ensure(a.adjoint().order() == a.order(), || "adjoint changes order".into())?;
                        ensure(a.order_by_commutators().map_err(e)? == a.order(), || "commutator order".into())
                    }
                    3 => {
                        let delta = g.weight();
                        let comps: Vec<_> = (0..c.dim()).map(|a| g.superexpr(c, 2, Some(c.parity(a)))).collect();
                        // alternate generic fields with divergence-free ones
                        let f = if i % 2 == 0 || delta == q(1, 1) {
                            HatField::new(c, delta.clone(), comps, g.superexpr(c, 2, Some(0))).map_err(e)?
                        } else {
                            lie_derivative(c, &comps, &delta).map_err(e)?
                        };
                        let op = f.to_op();
                        let anti = op.add(&op.adjoint()).map_err(e)?.is_zero();
                        ensure(divergence(&f).is_zero() == anti, || "div X = 0 disagrees with X⁺ = -X".into())
                    }
                    _ => {
                        let mut delta = g.weight();
                        if delta == q(1, 1) {
                            delta = Q::zero();
                        }
                        let comps: Vec<_> = (0..c.dim()).map(|a| g.superexpr(c, 2, Some(c.parity(a)))).collect();
                        let f = HatField::new(c, delta, comps, g.superexpr(c, 2, Some(0))).map_err(e)?;
                        let p = vertical_projection(&f).map_err(e)?;
                        ensure(divergence(&p) == divergence(&f), || "Π changes the divergence".into())
                    }
                }
            })();
            r.err().map(|m| format!("seed {seed}: {m}"))
        })
        .collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok("1000 instances".into())
}

fn sessions_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("sessions")
}

// 10. Golden reports and exit codes for the shipped sessions.
fn cli_corpus() -> Outcome {
    let mut files: Vec<PathBuf> = fs::read_dir(sessions_dir())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "den"))
        .collect();
    files.sort();
    ensure(!files.is_empty(), || "no sessions".into())?;
    for f in &files {
        let text = fs::read_to_string(f).map_err(|e| e.to_string())?;
        let bin = || {
            Command::new(env!("CARGO_BIN_EXE_denscalc"))
                .args(["run", f.to_str().unwrap()])
                .env("DENSCALC_SEED", "0")
                .output()
                .map_err(|e| e.to_string())
        };
        let (first, second) = (bin()?, bin()?);
        ensure(first.stdout == second.stdout && first.status == second.status, || format!("{}: runs differ", f.display()))?;
        let code = first.status.code();
        match parse_session(&text) {
            Err(_) => ensure(code == Some(2) && first.stdout.is_empty(), || format!("{}: parse error exit {code:?}", f.display()))?,
            Ok(s) => {
                let report = run(&s, &RunOptions::default());
                let golden = fs::read(f.with_extension("golden.jsonl")).map_err(|e| format!("{}: {e}", f.display()))?;
                ensure(first.stdout == golden, || format!("{}: report differs from golden", f.display()))?;
                ensure(report.to_jsonl().as_bytes() == golden, || format!("{}: library report differs", f.display()))?;
                let want = if report.all_pass() { 0 } else { 1 };
                ensure(code == Some(want), || format!("{}: exit {code:?}, expected {want}", f.display()))?;
            }
        }
    }
    Ok(format!("{} sessions byte-identical to goldens", files.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("pencil self-adjointness", pencil_self_adjointness),
        ("universality round trip", universality_round_trip),
        ("Duval-Ovsienko map", duval_ovsienko_map),
        ("transformation laws", transformation_laws),
        ("groupoid", groupoid),
        ("projective line", projective_line),
        ("BV suite", bv_suite),
        ("Riemannian pencil", riemannian),
        ("operator algebra", operator_algebra),
        ("CLI corpus", cli_corpus),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1)
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
