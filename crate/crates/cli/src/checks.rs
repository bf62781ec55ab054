//! Dispatch from check directives to the core library.

use denscalc_core::bvsuper::{
    berezinian, bv_identity_check, darboux_mismatch, jacobi_witness, khudian_operator, master_square, MasterHamiltonian,
    SuperChart,
};
use denscalc_core::chart::Chart;
use denscalc_core::densalg::{DensOp, Density};
use denscalc_core::groupoid::{cocycle_residual, is_arrow, PrincipalSymbol};
use denscalc_core::pencils::{canonical_operator, duval_ovsienko, evaluate, pencil, pencil_from_operator, self_adjoint_defect, PencilData, SecondOrder};
use denscalc_core::projline::{diffeo_cocycle, diffeo_cocycle_direct, schwarzian_cocycle};
use denscalc_core::symcore::{ScalarExpr, SuperExpr, Q};
use num_traits::Zero;

use crate::ast::{Arg, CheckKind};
use crate::eval::{Env, Object, TransitionObj, Value};

/// Result of one check before timing is attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Error(String),
}

type CResult<T> = Result<T, String>;

fn core<T>(r: denscalc_core::Result<T>) -> CResult<T> {
    r.map_err(|e| e.to_string())
}

fn zero_or(is_zero: bool, witness: impl FnOnce() -> String) -> CResult<Outcome> {
    Ok(if is_zero { Outcome::Pass } else { Outcome::Fail(witness()) })
}

fn op_outcome(op: &DensOp) -> CResult<Outcome> {
    zero_or(op.is_zero(), || op.render())
}

fn dens_outcome(d: &Density) -> CResult<Outcome> {
    zero_or(d.is_zero(), || d.render())
}

struct Args<'a> {
    env: &'a Env,
    args: &'a [Arg],
}

impl<'a> Args<'a> {
    fn name(&self, i: usize) -> &'a str {
        match &self.args[i] {
            Arg::Name(s) => s,
            Arg::Rational(_) => unreachable!("signature checked by the parser"),
        }
    }

    fn rational(&self, i: usize) -> Q {
        match &self.args[i] {
            Arg::Rational(q) => q.clone(),
            Arg::Name(_) => unreachable!("signature checked by the parser"),
        }
    }

    fn chart(&self, i: usize) -> &'a Chart {
        &self.env.charts[self.name(i)]
    }

    fn object(&self, i: usize) -> CResult<&'a Object> {
        self.env.object(self.name(i))
    }

    fn pencil(&self, i: usize) -> CResult<&'a PencilData> {
        match self.object(i)? {
            Object::Pencil(p) => Ok(p),
            _ => unreachable!("signature checked by the parser"),
        }
    }

    fn connection(&self, i: usize) -> CResult<(&'a Chart, &'a [SuperExpr])> {
        match self.object(i)? {
            Object::Connection(c, v) => Ok((c, v)),
            _ => unreachable!("signature checked by the parser"),
        }
    }

    fn operator(&self, i: usize) -> CResult<&'a DensOp> {
        match self.object(i)? {
            Object::Value(Value::Op(o)) => Ok(o),
            _ => unreachable!("signature checked by the parser"),
        }
    }

    fn function(&self, i: usize) -> CResult<&'a SuperExpr> {
        match self.object(i)? {
            Object::Value(Value::Fun(f)) => Ok(f),
            _ => unreachable!("signature checked by the parser"),
        }
    }

    fn transition(&self, i: usize) -> CResult<&'a TransitionObj> {
        match self.object(i)? {
            Object::Transition(t) => Ok(t),
            _ => unreachable!("signature checked by the parser"),
        }
    }

    fn matrix(&self, i: usize) -> CResult<(&'a Chart, &'a denscalc_core::bvsuper::SuperMatrix)> {
        match self.object(i)? {
            Object::Matrix(c, m) => Ok((c, m)),
            _ => unreachable!("signature checked by the parser"),
        }
    }
}

fn same_chart(a: &Chart, b: &Chart) -> CResult<()> {
    core(a.check_same(b))
}

fn symbol(p: &PencilData) -> CResult<PrincipalSymbol> {
    core(PrincipalSymbol::new(&p.chart, p.delta.clone(), p.s.clone()))
}

/// Run one check against the environment.
pub fn run_check(env: &Env, kind: CheckKind, args: &[Arg]) -> Outcome {
    let a = Args { env, args };
    let r = match kind {
        CheckKind::SelfadjointPencil => a.pencil(0).and_then(|p| op_outcome(&core(self_adjoint_defect(p))?)),
        CheckKind::Roundtrip => roundtrip(&a),
        CheckKind::DoMap => do_map(&a),
        CheckKind::TransformConsistency => transform_consistency(&a),
        CheckKind::GroupoidArrow => groupoid_arrow(&a),
        CheckKind::Cocycle => cocycle(&a),
        CheckKind::Schwarzian => schwarzian(&a),
        CheckKind::Sturm => sturm(&a),
        CheckKind::BvIdentity => bv_identity(&a),
        CheckKind::Jacobi => jacobi(&a),
        CheckKind::KhudianNilpotent => khudian(&a),
        CheckKind::Darboux => darboux(&a),
        CheckKind::Berezinian => berezinian_check(&a),
    };
    r.unwrap_or_else(Outcome::Error)
}

fn roundtrip(a: &Args) -> CResult<Outcome> {
    let op = a.operator(0)?;
    let (l0, delta) = (a.rational(1), a.rational(2));
    let p = core(pencil_from_operator(op, &l0, &delta))?;
    let l0 = ScalarExpr::from_q(l0);
    let back = core(evaluate(&pencil(&p), &l0))?;
    op_outcome(&core(back.sub(&op.at_weight(&l0)))?)
}

fn do_map(a: &Args) -> CResult<Outcome> {
    let op = a.operator(0)?;
    let (l, m) = (a.rational(1), a.rational(2));
    let c = op.chart();
    let op = op.at_weight(&ScalarExpr::from_q(l.clone()));
    let (so, w) = core(SecondOrder::from_op(&op))?;
    if !op.is_zero() && !w.is_zero() {
        return Err(format!("operator has weight {w}, expected 0"));
    }
    let by_formula = core(duval_ovsienko(c, &so, &l, &m))?.to_op(c, &Q::zero());
    let p = core(pencil_from_operator(&op, &l, &Q::zero()))?;
    let by_pencil = core(evaluate(&pencil(&p), &ScalarExpr::from_q(m)))?;
    op_outcome(&core(by_formula.sub(&by_pencil))?)
}

fn transform_consistency(a: &Args) -> CResult<Outcome> {
    let p = a.pencil(0)?;
    let t = a.transition(1)?;
    let t = t.full.as_ref().map_err(Clone::clone)?;
    same_chart(&p.chart, t.source())?;
    let by_law = canonical_operator(&core(t.transform_pencil_data(p))?);
    let by_chain = core(t.transform_operator(&canonical_operator(p)))?;
    op_outcome(&core(by_law.sub(&by_chain))?)
}

fn groupoid_arrow(a: &Args) -> CResult<Outcome> {
    let p = a.pencil(0)?;
    let (c1, g1) = a.connection(1)?;
    let (c2, g2) = a.connection(2)?;
    same_chart(&p.chart, c1)?;
    same_chart(&p.chart, c2)?;
    let m = core(is_arrow(&symbol(p)?, g1, g2))?;
    if !m.agree() {
        return Err(format!(
            "membership tests disagree: defect {}, operators {}",
            m.by_defect, m.by_operator
        ));
    }
    if m.is_arrow() {
        Ok(Outcome::Pass)
    } else if m.witness.is_zero() {
        Ok(Outcome::Fail("singular operators differ".into()))
    } else {
        Ok(Outcome::Fail(m.witness.render()))
    }
}

fn cocycle(a: &Args) -> CResult<Outcome> {
    let p = a.pencil(0)?;
    let mut comps = Vec::new();
    for i in 1..4 {
        let (c, g) = a.connection(i)?;
        same_chart(&p.chart, c)?;
        comps.push(g);
    }
    dens_outcome(&core(cocycle_residual(&symbol(p)?, comps[0], comps[1], comps[2]))?)
}

fn schwarzian(a: &Args) -> CResult<Outcome> {
    let t = a.transition(0)?;
    let f = t.line.as_ref().map_err(Clone::clone)?;
    let s = core(f.schwarzian())?;
    let via_cocycle = core(diffeo_cocycle(&ScalarExpr::zero(), f))?;
    if via_cocycle != core(schwarzian_cocycle(f))? {
        return Err(format!("cocycle at zero connection is {}, not -S/4", via_cocycle.render()));
    }
    Ok(if s.is_zero() { Outcome::Pass } else { Outcome::Fail(s.to_string()) })
}

fn sturm(a: &Args) -> CResult<Outcome> {
    let (c, g) = a.connection(0)?;
    let t = a.transition(1)?;
    let f = t.line.as_ref().map_err(Clone::clone)?;
    same_chart(c, f.source())?;
    let gamma = g[0].as_scalar().ok_or("connection on the line must be even")?;
    let mult = DensOp::multiplication(&core(diffeo_cocycle(&gamma, f))?);
    let direct = core(diffeo_cocycle_direct(&gamma, f))?;
    op_outcome(&core(mult.sub(&direct))?)
}

fn bv_identity(a: &Args) -> CResult<Outcome> {
    let c = a.chart(0);
    let (rho, f) = (a.function(1)?, a.function(2)?);
    let sc = core(SuperChart::new(c))?;
    let h = core(MasterHamiltonian::new(c, sc.canonical_symbol()))?;
    let r = core(bv_identity_check(&h, rho, f))?;
    zero_or(r.holds(), || c.render(&r.residual()))
}

fn hamiltonian(p: &PencilData) -> CResult<MasterHamiltonian> {
    core(MasterHamiltonian::from_symbol(&symbol(p)?))
}

fn jacobi(a: &Args) -> CResult<Outcome> {
    let h = hamiltonian(a.pencil(0)?)?;
    let sq = master_square(&h);
    let w = core(jacobi_witness(&h, 2))?;
    if sq.is_zero() != w.is_none() {
        return Err(format!("master square {} but jacobiator search found {}", if sq.is_zero() { "vanishes" } else { "does not vanish" }, if w.is_none() { "nothing" } else { "a witness" }));
    }
    zero_or(sq.is_zero(), || h.doubled().chart().render(&sq))
}

fn khudian(a: &Args) -> CResult<Outcome> {
    let sc = core(SuperChart::new(a.chart(0)))?;
    let k = khudian_operator(&sc);
    op_outcome(&core(k.compose(&k))?)
}

fn darboux(a: &Args) -> CResult<Outcome> {
    let p = a.pencil(0)?;
    Ok(match core(darboux_mismatch(&symbol(p)?))? {
        None => Outcome::Pass,
        Some((i, j, diff)) => Outcome::Fail(format!(
            "{{{},{}}}: {}",
            p.chart.coord_name(i),
            p.chart.coord_name(j),
            p.chart.render(&diff)
        )),
    })
}

fn berezinian_check(a: &Args) -> CResult<Outcome> {
    let (c, m) = a.matrix(0)?;
    let (c2, n) = a.matrix(1)?;
    same_chart(c, c2)?;
    let prod = core(m.mul(n))?;
    let diff = core(berezinian(&prod))?.sub(&core(berezinian(m))?.mul(&core(berezinian(n))?));
    zero_or(diff.is_zero(), || c.render(&diff))
}
