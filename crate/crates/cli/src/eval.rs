//! Turns declarations into core objects.

use std::collections::BTreeMap;

use denscalc_core::atlas::Transition;
use denscalc_core::bvsuper::SuperMatrix;
use denscalc_core::chart::Chart;
use denscalc_core::densalg::{DensOp, Density};
use denscalc_core::gen::Gen;
use denscalc_core::pencils::{from_connection, PencilData};
use denscalc_core::projline::LineDiffeo;
use denscalc_core::symcore::{Atom, ScalarExpr, SuperExpr, Symbol, Q};
use num_traits::{One, ToPrimitive};

use crate::ast::{BinOp, Decl, DeclKind, Expr, PencilSpec, RandomSpec, Session};

type EResult<T> = Result<T, String>;

#[derive(Clone, Debug)]
pub enum Value {
    Fun(SuperExpr),
    Dens(Density),
    Op(DensOp),
}

#[derive(Clone, Debug)]
pub struct TransitionObj {
    pub from: Chart,
    pub to: Chart,
    pub full: EResult<Transition>,
    pub line: EResult<LineDiffeo>,
}

#[derive(Clone, Debug)]
pub enum Object {
    Value(Value),
    Connection(Chart, Vec<SuperExpr>),
    Pencil(PencilData),
    Transition(Box<TransitionObj>),
    Matrix(Chart, SuperMatrix),
}

/// Everything declared by a session; failed declarations keep their error.
#[derive(Debug, Default)]
pub struct Env {
    pub charts: BTreeMap<String, Chart>,
    opaques: BTreeMap<String, (Symbol, bool)>,
    objects: BTreeMap<String, EResult<Object>>,
}

fn core<T>(r: denscalc_core::Result<T>) -> EResult<T> {
    r.map_err(|e| e.to_string())
}

/// Mix the session seed with a declaration name (FNV-1a), independent of platform.
fn mix(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl Env {
    pub fn build(session: &Session, seed: u64) -> Env {
        let mut env = Env::default();
        for d in &session.decls {
            env.declare(d, seed);
        }
        env
    }

    fn declare(&mut self, d: &Decl, seed: u64) {
        let obj = match &d.kind {
            DeclKind::Chart { even, odd } => {
                let ev: Vec<&str> = even.iter().map(|s| s.as_str()).collect();
                let od: Vec<&str> = odd.iter().map(|s| s.as_str()).collect();
                let c = Chart::new(&d.name, &ev, &od).expect("names checked by the parser");
                self.charts.insert(d.name.clone(), c);
                return;
            }
            DeclKind::Opaque { chart, depends, positive } => {
                let sym = match chart {
                    None => Symbol::constant(&d.name),
                    Some(c) => {
                        let c = &self.charts[c];
                        let deps: Vec<_> = match depends {
                            None => c.even().to_vec(),
                            Some(names) => c.even().iter().filter(|v| names.iter().any(|n| **n == *v.name)).cloned().collect(),
                        };
                        Symbol::new(&d.name, &deps)
                    }
                };
                self.opaques.insert(d.name.clone(), (sym, *positive));
                return;
            }
            DeclKind::Let { chart, expr } => self.eval(expr, &self.charts[chart]).and_then(|v| match v {
                Value::Fun(f) => Ok(Object::Value(Value::Fun(f))),
                _ => Err("let needs a function; use density or operator".into()),
            }),
            DeclKind::Density { chart, expr } => {
                let c = &self.charts[chart];
                self.eval(expr, c).and_then(|v| match v {
                    Value::Op(_) => Err("density expression evaluates to an operator".into()),
                    v => Ok(Object::Value(Value::Dens(to_dens(c, v)))),
                })
            }
            DeclKind::Operator { chart, expr } => {
                let c = &self.charts[chart];
                self.eval(expr, c).map(|v| Object::Value(Value::Op(to_op(c, v))))
            }
            DeclKind::Connection { chart, comps } => {
                let c = &self.charts[chart];
                self.funs(comps, c).map(|v| Object::Connection(c.clone(), v))
            }
            DeclKind::Pencil { chart, delta, s, spec } => self.pencil(&self.charts[chart], delta, s, spec).map(Object::Pencil),
            DeclKind::Transition { from, to, forward, backward } => {
                self.transition(&self.charts[from], &self.charts[to], forward.as_deref(), backward)
            }
            DeclKind::Matrix { chart, even, rows } => {
                let c = &self.charts[chart];
                rows.iter()
                    .map(|r| self.funs(r, c))
                    .collect::<EResult<Vec<_>>>()
                    .and_then(|m| core(SuperMatrix::from_full(&m, *even)))
                    .map(|m| Object::Matrix(c.clone(), m))
            }
            DeclKind::Random { chart, spec } => {
                let c = &self.charts[chart];
                let mut g = Gen::new(mix(seed, &d.name));
                match spec {
                    RandomSpec::Pencil { delta, parity } => {
                        if *parity == 1 && c.dim_odd() == 0 {
                            Err("an odd symbol needs odd coordinates".to_string())
                        } else {
                            Ok(Object::Pencil(g.pencil_data(c, *parity, delta.clone())))
                        }
                    }
                    RandomSpec::Operator { weight } => {
                        // dropping the λ̂ terms can leave nothing; draw again
                        let op = loop {
                            let op = g.densop(c, 2, Some(weight.clone())).at_weight(&ScalarExpr::zero());
                            if !op.is_zero() {
                                break op;
                            }
                        };
                        Ok(Object::Value(Value::Op(op)))
                    }
                }
            }
            DeclKind::Check { .. } => return,
        };
        self.objects.insert(d.name.clone(), obj);
    }

    pub fn object(&self, name: &str) -> EResult<&Object> {
        match self.objects.get(name) {
            Some(Ok(o)) => Ok(o),
            Some(Err(e)) => Err(format!("declaration {name} failed: {e}")),
            None => Err(format!("{name} is not a value")),
        }
    }

    fn funs(&self, es: &[Expr], c: &Chart) -> EResult<Vec<SuperExpr>> {
        es.iter().map(|e| self.fun(e, c)).collect()
    }

    fn fun(&self, e: &Expr, c: &Chart) -> EResult<SuperExpr> {
        match self.eval(e, c)? {
            Value::Fun(f) => Ok(f),
            _ => Err("expected a function, found a density or operator".into()),
        }
    }

    fn pencil(&self, c: &Chart, delta: &Q, s: &[Vec<Expr>], spec: &PencilSpec) -> EResult<PencilData> {
        let s: Vec<Vec<SuperExpr>> = s.iter().map(|r| self.funs(r, c)).collect::<EResult<_>>()?;
        match spec {
            PencilSpec::Upper { gamma, theta } => {
                core(PencilData::new(c, delta.clone(), s, self.funs(gamma, c)?, self.fun(theta, c)?))
            }
            PencilSpec::Lower { gamma } => core(from_connection(c, delta.clone(), s, &self.funs(gamma, c)?)),
        }
    }

    fn transition(&self, from: &Chart, to: &Chart, forward: Option<&[Expr]>, backward: &[Expr]) -> EResult<Object> {
        let scalars = |es: &[Expr], c: &Chart| -> EResult<Vec<ScalarExpr>> {
            self.funs(es, c)?
                .into_iter()
                .map(|f| f.as_scalar().ok_or_else(|| "transition components must be even".to_string()))
                .collect()
        };
        let back = scalars(backward, to)?;
        let full = match forward {
            Some(f) => scalars(f, from).and_then(|f| core(Transition::new(from, to, f, back.clone()))),
            None => Err("transition has no forward map".into()),
        };
        let line = if from.dim_even() == 1 {
            core(LineDiffeo::new(from, to, back[0].clone()))
        } else {
            Err("not a transition of the line".into())
        };
        Ok(Object::Transition(Box::new(TransitionObj { from: from.clone(), to: to.clone(), full, line })))
    }

    pub fn eval(&self, e: &Expr, c: &Chart) -> EResult<Value> {
        match e {
            Expr::Int(n) => Ok(Value::Fun(SuperExpr::int(*n))),
            Expr::Name(s, _) => self.name(s, c),
            Expr::Weight => Ok(Value::Dens(Density::new(c, Q::one(), SuperExpr::one()))),
            Expr::WeightOp => Ok(Value::Op(DensOp::lambda_hat(c))),
            Expr::Partial(v, _) => Ok(Value::Op(DensOp::partial(c, index(c, v)))),
            Expr::Derivative(inner, v, _) => match self.eval(inner, c)? {
                Value::Fun(f) => Ok(Value::Fun(c.partial(&f, index(c, v)))),
                _ => Err("d(.., ..) applies to functions".into()),
            },
            Expr::Neg(inner) => Ok(match self.eval(inner, c)? {
                Value::Fun(f) => Value::Fun(f.neg()),
                Value::Dens(d) => Value::Dens(d.neg()),
                Value::Op(o) => Value::Op(o.neg()),
            }),
            Expr::Bin(op, a, b, _) => {
                let (a, b) = (self.eval(a, c)?, self.eval(b, c)?);
                binary(c, *op, a, b)
            }
            Expr::Pow(base, exp, _) => {
                let k = match self.eval(exp, c)? {
                    Value::Fun(f) => f.as_q().ok_or_else(|| "exponents must be rational constants".to_string())?,
                    _ => return Err("exponents must be rational constants".into()),
                };
                self.power(c, self.eval(base, c)?, &k)
            }
        }
    }

    fn name(&self, s: &str, c: &Chart) -> EResult<Value> {
        if let Some(i) = c.index_of(s) {
            return Ok(Value::Fun(c.coord(i)));
        }
        if let Some((sym, _)) = self.opaques.get(s) {
            return Ok(Value::Fun(SuperExpr::scalar(ScalarExpr::symbol(sym))));
        }
        match self.object(s)? {
            Object::Value(v) => Ok(v.clone()),
            _ => Err(format!("{s} cannot appear in an expression")),
        }
    }

    fn positive(&self, e: &ScalarExpr) -> bool {
        e.atoms().iter().all(|a| match a {
            Atom::Opaque(o) => o.derivs.is_empty() && self.opaques.get(&*o.sym.name).is_some_and(|(_, p)| *p),
            _ => false,
        })
    }

    fn power(&self, c: &Chart, base: Value, k: &Q) -> EResult<Value> {
        let int = if k.is_integer() { k.to_integer().to_i64() } else { None };
        match base {
            Value::Fun(f) => match int {
                Some(n) => {
                    let b = if n < 0 { core(f.inv())? } else { f };
                    Ok(Value::Fun(b.pow(n.unsigned_abs() as u32)))
                }
                None => {
                    let s = f.as_scalar().ok_or_else(|| "fractional powers need an even body-only base".to_string())?;
                    if !self.positive(&s) {
                        return Err(format!("fractional power of {s} needs positive opaque symbols"));
                    }
                    Ok(Value::Fun(SuperExpr::scalar(core(s.rational_pow(k))?)))
                }
            },
            Value::Dens(d) => {
                let single = d.terms().len() == 1 && d.terms().values().all(|s| s.is_one());
                if single {
                    let w = d.terms().keys().next().expect("one term").clone();
                    return Ok(Value::Dens(Density::new(c, w * k, SuperExpr::one())));
                }
                match int {
                    Some(n) if n >= 0 => {
                        let mut acc = Density::one(c);
                        for _ in 0..n {
                            acc = core(acc.mul(&d))?;
                        }
                        Ok(Value::Dens(acc))
                    }
                    _ => Err("only t^(w) and nonnegative integer powers of densities".into()),
                }
            }
            Value::Op(o) => match int {
                Some(n) if n >= 0 => {
                    let mut acc = DensOp::identity(c);
                    for _ in 0..n {
                        acc = core(acc.compose(&o))?;
                    }
                    Ok(Value::Op(acc))
                }
                _ => Err("operators take nonnegative integer powers".into()),
            },
        }
    }
}

fn index(c: &Chart, v: &str) -> usize {
    c.index_of(v).expect("coordinates checked by the parser")
}

fn to_dens(c: &Chart, v: Value) -> Density {
    match v {
        Value::Fun(f) => Density::function(c, f),
        Value::Dens(d) => d,
        Value::Op(_) => unreachable!("operators are not densities"),
    }
}

fn to_op(c: &Chart, v: Value) -> DensOp {
    match v {
        Value::Op(o) => o,
        v => DensOp::multiplication(&to_dens(c, v)),
    }
}

fn level(v: &Value) -> u8 {
    match v {
        Value::Fun(_) => 0,
        Value::Dens(_) => 1,
        Value::Op(_) => 2,
    }
}

fn binary(c: &Chart, op: BinOp, a: Value, b: Value) -> EResult<Value> {
    if op == BinOp::Div {
        let inv = match b {
            Value::Fun(f) => core(f.inv())?,
            _ => return Err("only functions can divide".into()),
        };
        return binary(c, BinOp::Mul, a, Value::Fun(inv));
    }
    let top = level(&a).max(level(&b));
    Ok(match (op, a, b) {
        (BinOp::Add | BinOp::Sub, Value::Fun(x), Value::Fun(y)) => {
            Value::Fun(if op == BinOp::Add { x.add(&y) } else { x.sub(&y) })
        }
        (BinOp::Mul, Value::Fun(x), Value::Fun(y)) => Value::Fun(x.mul(&y)),
        (op, a, b) if top == 1 => {
            let (x, y) = (to_dens(c, a), to_dens(c, b));
            Value::Dens(match op {
                BinOp::Add => core(x.add(&y))?,
                BinOp::Sub => core(x.sub(&y))?,
                _ => core(x.mul(&y))?,
            })
        }
        (op, a, b) => {
            let (x, y) = (to_op(c, a), to_op(c, b));
            Value::Op(match op {
                BinOp::Add => core(x.add(&y))?,
                BinOp::Sub => core(x.sub(&y))?,
                _ => core(x.compose(&y))?,
            })
        }
    })
}
