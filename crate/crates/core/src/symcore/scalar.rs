//! Canonical rational functions over ℚ in atoms.
//!
//! A value is `num/den` with `gcd(num, den) = 1`, a monic denominator and no
//! power or exponential atoms in the denominator. Equality of values is
//! equality of these normal forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::atom::{Atom, ExpAtom, Opaque, PowAtom, Symbol, Var};
use super::gcd::gcd;
use super::poly::{Mono, Poly};
use super::Q;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScalarExpr {
    num: Poly,
    den: Poly,
}

impl Default for ScalarExpr {
    fn default() -> Self {
        ScalarExpr::zero()
    }
}

fn clear_negatives(num: &mut Poly, den: &mut Poly) {
    let mut mins = num.min_exponents();
    for (a, e) in den.min_exponents() {
        let slot = mins.entry(a).or_insert(0);
        if e < *slot {
            *slot = e;
        }
    }
    let fix: Vec<(Atom, i64)> = mins
        .into_iter()
        .filter(|(_, e)| *e < 0)
        .map(|(a, e)| (a, -e))
        .collect();
    if fix.is_empty() {
        return;
    }
    let m = Mono(fix);
    *num = num.mul_mono(&m, &Q::one());
    *den = den.mul_mono(&m, &Q::one());
}

impl ScalarExpr {
    pub fn zero() -> ScalarExpr {
        ScalarExpr {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> ScalarExpr {
        ScalarExpr::from_q(Q::one())
    }

    pub fn from_q(q: Q) -> ScalarExpr {
        ScalarExpr {
            num: Poly::constant(q),
            den: Poly::one(),
        }
    }

    pub fn int(n: i64) -> ScalarExpr {
        ScalarExpr::from_q(Q::from_integer(n.into()))
    }

    pub fn frac(n: i64, d: i64) -> ScalarExpr {
        ScalarExpr::from_q(Q::new(n.into(), d.into()))
    }

    pub fn atom(a: Atom) -> ScalarExpr {
        ScalarExpr::from_parts(Poly::from_atom(a), Poly::one()).expect("atom is well formed")
    }

    pub fn var(v: &Var) -> ScalarExpr {
        ScalarExpr::atom(Atom::Var(v.clone()))
    }

    pub fn symbol(s: &Symbol) -> ScalarExpr {
        ScalarExpr::atom(Atom::Opaque(Opaque::plain(s.clone())))
    }

    pub fn opaque(o: Opaque) -> ScalarExpr {
        ScalarExpr::atom(Atom::Opaque(o))
    }

    /// `base^q` for an opaque atom and rational `q`.
    pub fn rational_power(base: &Opaque, q: &Q) -> ScalarExpr {
        ScalarExpr::from_parts(
            Poly::from_atom(Atom::Pow(PowAtom {
                base: base.clone(),
                q: q.clone(),
            })),
            Poly::one(),
        )
        .expect("power atom is well formed")
    }

    /// `exp(sum c_i u_i)` for opaque atoms `u_i`.
    pub fn exp_linear(lin: &[(Opaque, Q)]) -> ScalarExpr {
        let ex = ExpAtom::combine([(&ExpAtom { lin: lin.to_vec() }, 1)]);
        if ex.is_trivial() {
            return ScalarExpr::one();
        }
        ScalarExpr::atom(Atom::Exp(ex))
    }

    /// Normalize a raw fraction.
    pub fn from_parts(num: Poly, den: Poly) -> Result<ScalarExpr> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(ScalarExpr::zero());
        }
        let mut num = num.canon();
        let mut den = den.canon();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        clear_negatives(&mut num, &mut den);
        if den.has_ext() {
            let content = den.mono_content();
            let mut fix = Vec::new();
            for (a, e) in &content.0 {
                match a {
                    Atom::Pow(p) => {
                        let need = Q::from_integer((*e).into()) * &p.q;
                        let up = need.ceil() - need;
                        if !up.is_zero() {
                            fix.push((
                                Atom::Pow(PowAtom {
                                    base: p.base.clone(),
                                    q: up,
                                }),
                                1,
                            ));
                        }
                    }
                    Atom::Exp(x) => fix.push((Atom::Exp(x.negated()), *e)),
                    _ => {}
                }
            }
            if !fix.is_empty() {
                fix.sort();
                let m = Mono(fix);
                num = num.mul_mono(&m, &Q::one()).canon();
                den = den.mul_mono(&m, &Q::one()).canon();
                clear_negatives(&mut num, &mut den);
            }
            if den.has_ext() {
                return Err(Error::Unsupported(format!(
                    "denominator {den} carries power or exponential atoms non-monomially"
                )));
            }
        }
        if let Some(c) = den.as_constant() {
            return Ok(ScalarExpr {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            });
        }
        let g = gcd(&num, &den);
        if !g.is_one() {
            num = num.div_exact(&g).expect("gcd divides numerator");
            den = den.div_exact(&g).expect("gcd divides denominator");
        }
        let (den, lc) = den.monic();
        let num = num.scale(&lc.recip());
        Ok(ScalarExpr { num, den })
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_q(&self) -> Option<Q> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.num.atoms();
        s.extend(self.den.atoms());
        s
    }

    /// The single atom this expression consists of, if it is exactly one atom.
    pub fn as_atom(&self) -> Option<Atom> {
        if !self.den.is_one() || self.num.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.num.terms.iter().next()?;
        if !c.is_one() || m.0.len() != 1 || m.0[0].1 != 1 {
            return None;
        }
        Some(m.0[0].0.clone())
    }

    pub fn neg(&self) -> ScalarExpr {
        ScalarExpr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, k: &Q) -> ScalarExpr {
        if k.is_zero() {
            return ScalarExpr::zero();
        }
        ScalarExpr {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &ScalarExpr) -> ScalarExpr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let num = self.num.add(&other.num);
            if num.is_zero() {
                return ScalarExpr::zero();
            }
            if self.den.is_one() {
                return ScalarExpr {
                    num,
                    den: Poly::one(),
                };
            }
            return reduce(num, self.den.clone());
        }
        if self.den.is_one() {
            return ScalarExpr {
                num: self.num.mul(&other.den).add(&other.num),
                den: other.den.clone(),
            };
        }
        if other.den.is_one() {
            return ScalarExpr {
                num: other.num.mul(&self.den).add(&self.num),
                den: self.den.clone(),
            };
        }
        let g = gcd(&self.den, &other.den);
        let ad = self.den.div_exact(&g).expect("gcd divides");
        let bd = other.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&bd).add(&other.num.mul(&ad));
        let den = self.den.mul(&bd);
        if g.is_one() {
            return ScalarExpr { num, den }.fix_zero();
        }
        let h = gcd(&num, &g);
        if h.is_one() {
            return ScalarExpr { num, den }.fix_zero();
        }
        ScalarExpr {
            num: num.div_exact(&h).expect("gcd divides"),
            den: den.div_exact(&h).expect("gcd divides"),
        }
        .fix_zero()
    }

    fn fix_zero(self) -> ScalarExpr {
        if self.num.is_zero() {
            ScalarExpr::zero()
        } else {
            self
        }
    }

    pub fn sub(&self, other: &ScalarExpr) -> ScalarExpr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ScalarExpr) -> ScalarExpr {
        if self.is_zero() || other.is_zero() {
            return ScalarExpr::zero();
        }
        if let Some(c) = self.as_q() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_q() {
            return self.scale(&c);
        }
        let ext = self.num.has_ext() && other.num.has_ext();
        if self.den.is_one() && other.den.is_one() {
            let num = self.num.mul(&other.num);
            if !ext {
                return ScalarExpr {
                    num,
                    den: Poly::one(),
                };
            }
            return ScalarExpr::from_parts(num, Poly::one()).expect("nonzero denominator");
        }
        if ext {
            return ScalarExpr::from_parts(self.num.mul(&other.num), self.den.mul(&other.den))
                .expect("nonzero denominator");
        }
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let (a1, b2) = if g1.is_one() {
            (self.num.clone(), other.den.clone())
        } else {
            (
                self.num.div_exact(&g1).expect("gcd divides"),
                other.den.div_exact(&g1).expect("gcd divides"),
            )
        };
        let (b1, a2) = if g2.is_one() {
            (other.num.clone(), self.den.clone())
        } else {
            (
                other.num.div_exact(&g2).expect("gcd divides"),
                self.den.div_exact(&g2).expect("gcd divides"),
            )
        };
        let den = a2.mul(&b2);
        let (den, lc) = den.monic();
        ScalarExpr {
            num: a1.mul(&b1).scale(&lc.recip()),
            den,
        }
    }

    pub fn inv(&self) -> Result<ScalarExpr> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        ScalarExpr::from_parts(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &ScalarExpr) -> Result<ScalarExpr> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(c) = other.as_q() {
            return Ok(self.scale(&c.recip()));
        }
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<ScalarExpr> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut acc = ScalarExpr::one();
        let mut base = self.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// `self^p` for rational `p`. Non-integer powers need a monomial in opaque,
    /// power and exponential atoms with unit coefficient.
    pub fn rational_pow(&self, p: &Q) -> Result<ScalarExpr> {
        if p.is_integer() {
            let k = num_traits::ToPrimitive::to_i64(&p.to_integer())
                .ok_or_else(|| Error::Unsupported("exponent overflow".into()))?;
            return self.pow(k);
        }
        let unsupported = || Error::Unsupported(format!("({self})^({})", super::atom::fmt_q(p)));
        let mono = |poly: &Poly| -> Result<(Mono, Q)> {
            match poly.terms.iter().next() {
                Some((m, c)) if poly.terms.len() == 1 => Ok((m.clone(), c.clone())),
                _ => Err(unsupported()),
            }
        };
        let mut acc = ScalarExpr::one();
        for (poly, sgn) in [(&self.num, 1i64), (&self.den, -1i64)] {
            let (m, c) = mono(poly)?;
            let r0 = Q::from_integer(sgn.into()) * p;
            let k = exact_rational_power(&c, &r0).ok_or_else(unsupported)?;
            acc = acc.scale(&k);
            for (a, e) in &m.0 {
                let r = Q::from_integer((*e).into()) * &r0;
                let f = match a {
                    Atom::Opaque(o) => ScalarExpr::rational_power(o, &r),
                    Atom::Pow(w) => ScalarExpr::rational_power(&w.base, &(&w.q * &r)),
                    Atom::Exp(x) => ScalarExpr::exp_linear(
                        &x.lin.iter().map(|(u, c)| (u.clone(), c * &r)).collect::<Vec<_>>(),
                    ),
                    Atom::Var(_) => return Err(unsupported()),
                };
                acc = acc.mul(&f);
            }
        }
        Ok(acc)
    }

    /// Partial derivative with respect to an even variable (no chart check).
    pub fn diff(&self, v: &Var) -> ScalarExpr {
        let dn = dpoly(&self.num, v);
        if self.den.is_one() {
            if dn.is_zero() {
                return ScalarExpr::zero();
            }
            return ScalarExpr::from_parts(dn, Poly::one()).expect("nonzero denominator");
        }
        let dd = dpoly(&self.den, v);
        if dd.is_zero() {
            return ScalarExpr::from_parts(dn, self.den.clone()).expect("nonzero denominator");
        }
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        ScalarExpr::from_parts(num, self.den.mul(&self.den)).expect("nonzero denominator")
    }

    /// Partial derivative, rejecting variables from a different chart.
    pub fn differentiate(&self, v: &Var) -> Result<ScalarExpr> {
        self.check_chart(&v.chart)?;
        Ok(self.diff(v))
    }

    pub fn check_chart(&self, chart: &str) -> Result<()> {
        let mut charts = Vec::new();
        for a in self.atoms() {
            a.charts(&mut charts);
        }
        if let Some(c) = charts.iter().find(|c| &***c != chart) {
            return Err(Error::ChartMismatch(format!(
                "expression refers to chart {c}, expected {chart}"
            )));
        }
        Ok(())
    }

    /// Charts referenced by the atoms of this expression.
    pub fn charts(&self) -> BTreeSet<Arc<str>> {
        let mut charts = Vec::new();
        for a in self.atoms() {
            a.charts(&mut charts);
        }
        charts.into_iter().collect()
    }

    pub fn substitute(&self, s: &Substitution) -> Result<ScalarExpr> {
        let atoms = self.atoms();
        if atoms.iter().all(|a| !s.touches(a)) {
            return Ok(self.clone());
        }
        let mut images: BTreeMap<Atom, ScalarExpr> = BTreeMap::new();
        for a in &atoms {
            if let Some(img) = s.image(a)? {
                images.insert(a.clone(), img);
            }
        }
        let (pn, dn) = subst_poly(&self.num, &images)?;
        let (pd, dd) = subst_poly(&self.den, &images)?;
        if pd.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let num = pn.mul(&dd);
        let den = dn.mul(&pd);
        let r = ScalarExpr::from_parts(num, den)?;
        Ok(r)
    }
}

fn reduce(num: Poly, den: Poly) -> ScalarExpr {
    if num.is_zero() {
        return ScalarExpr::zero();
    }
    let g = gcd(&num, &den);
    if g.is_one() {
        return ScalarExpr { num, den };
    }
    let num = num.div_exact(&g).expect("gcd divides");
    let den = den.div_exact(&g).expect("gcd divides");
    let (den, lc) = den.monic();
    ScalarExpr {
        num: num.scale(&lc.recip()),
        den,
    }
}

fn datom(a: &Atom, v: &Var) -> Poly {
    match a {
        Atom::Var(w) => {
            if w == v {
                Poly::one()
            } else {
                Poly::zero()
            }
        }
        Atom::Opaque(o) => match o.derive(v) {
            Some(d) => Poly::from_atom(Atom::Opaque(d)),
            None => Poly::zero(),
        },
        Atom::Pow(p) => {
            let db = datom(&Atom::Opaque(p.base.clone()), v);
            if db.is_zero() {
                return Poly::zero();
            }
            let m = Mono(vec![(Atom::Opaque(p.base.clone()), -1)])
                .mul(&Mono::atom(a.clone(), 1));
            db.mul_mono(&m, &p.q)
        }
        Atom::Exp(e) => {
            let mut inner = Poly::zero();
            for (u, c) in &e.lin {
                inner = inner.add(&datom(&Atom::Opaque(u.clone()), v).scale(c));
            }
            inner.mul_mono(&Mono::atom(a.clone(), 1), &Q::one())
        }
    }
}

fn dpoly(p: &Poly, v: &Var) -> Poly {
    let mut out = Poly::zero();
    let mut cache: BTreeMap<&Atom, Poly> = BTreeMap::new();
    for (m, c) in &p.terms {
        for (i, (a, e)) in m.0.iter().enumerate() {
            let da = cache.entry(a).or_insert_with(|| datom(a, v));
            if da.is_zero() {
                continue;
            }
            let mut rest = m.0.clone();
            if *e == 1 {
                rest.remove(i);
            } else {
                rest[i].1 = e - 1;
            }
            let k = c * Q::from_integer((*e).into());
            let part = da.mul_mono(&Mono(rest), &k);
            out = out.add(&part);
        }
    }
    out.canon()
}

/// Substitute images into a polynomial; returns `(numerator, denominator)`.
fn subst_poly(p: &Poly, images: &BTreeMap<Atom, ScalarExpr>) -> Result<(Poly, Poly)> {
    let mut maxe: BTreeMap<&Atom, i64> = BTreeMap::new();
    for m in p.terms.keys() {
        for (a, e) in &m.0 {
            if let Some(img) = images.get(a) {
                if !img.den.is_one() {
                    let slot = maxe.entry(a).or_insert(0);
                    *slot = (*slot).max(*e);
                }
            }
        }
    }
    let mut den = Poly::one();
    for (a, e) in &maxe {
        den = den.mul(&images[*a].den.pow(*e as u32));
    }
    let mut out = Poly::zero();
    let mut powcache: BTreeMap<(&Atom, i64), Poly> = BTreeMap::new();
    for (m, c) in &p.terms {
        let mut acc = Poly::constant(c.clone());
        let mut keep = Vec::new();
        for (a, e) in &m.0 {
            match images.get(a) {
                None => keep.push((a.clone(), *e)),
                Some(img) => {
                    if *e < 0 {
                        return Err(Error::Unsupported("negative exponent in substitution".into()));
                    }
                    let f = powcache
                        .entry((a, *e))
                        .or_insert_with(|| {
                            let mut f = img.num.pow(*e as u32);
                            if let Some(me) = maxe.get(a) {
                                f = f.mul(&img.den.pow((me - e) as u32));
                            }
                            f
                        })
                        .clone();
                    acc = acc.mul(&f);
                }
            }
        }
        // untouched atoms of this monomial complete the product
        let rest = Mono(keep);
        let mut part = acc.mul_mono(&rest, &Q::one());
        // atoms absent from this monomial still need their denominator power
        for (a, me) in &maxe {
            if m.exp_of(a) == 0 {
                part = part.mul(&images[*a].den.pow(*me as u32));
            }
        }
        out = out.add(&part);
    }
    Ok((out, den))
}

/// Pullback data for a chart transition: source variables become rational
/// expressions in the target chart and opaque symbols become same-named
/// symbols on the target chart, with derivative atoms rewritten by the chain
/// rule `f_{x^a} = sum_b (dy^b/dx^a) f'_{y^b}`.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub source_chart: Arc<str>,
    pub target_vars: Vec<Var>,
    /// `(source var, target var) -> dy/dx` expressed in target variables.
    pub inv_jacobian: BTreeMap<(Var, Var), ScalarExpr>,
}

#[derive(Clone, Debug, Default)]
pub struct Substitution {
    pub map: BTreeMap<Atom, ScalarExpr>,
    pub pullback: Option<Pullback>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn var(mut self, v: &Var, e: ScalarExpr) -> Substitution {
        self.map.insert(Atom::Var(v.clone()), e);
        self
    }

    pub fn constant(mut self, s: &Symbol, e: ScalarExpr) -> Substitution {
        self.map
            .insert(Atom::Opaque(Opaque::plain(s.clone())), e);
        self
    }

    fn maps_var(&self, v: &Var) -> bool {
        self.map.contains_key(&Atom::Var(v.clone()))
    }

    fn opaque_touched(&self, o: &Opaque) -> bool {
        if self.map.contains_key(&Atom::Opaque(o.clone())) {
            return true;
        }
        o.sym.deps.iter().any(|d| self.maps_var(d))
    }

    fn touches(&self, a: &Atom) -> bool {
        match a {
            Atom::Var(_) => self.map.contains_key(a),
            Atom::Opaque(o) => self.opaque_touched(o),
            Atom::Pow(p) => self.opaque_touched(&p.base),
            Atom::Exp(e) => e.lin.iter().any(|(u, _)| self.opaque_touched(u)),
        }
    }

    fn opaque_image(&self, o: &Opaque) -> Result<Option<ScalarExpr>> {
        if let Some(e) = self.map.get(&Atom::Opaque(o.clone())) {
            return Ok(Some(e.clone()));
        }
        if !o.sym.deps.iter().any(|d| self.maps_var(d)) {
            return Ok(None);
        }
        let Some(pb) = &self.pullback else {
            return Err(Error::PartialMap(format!(
                "opaque symbol {} depends on a substituted variable; a chart transition is required",
                o.sym.name
            )));
        };
        let mut new_deps: BTreeSet<Var> = BTreeSet::new();
        for d in o.sym.deps.iter() {
            if &*d.chart != &*pb.source_chart {
                return Err(Error::ChartMismatch(format!(
                    "symbol {} depends on {} outside the source chart",
                    o.sym.name, d.name
                )));
            }
            let img = self
                .map
                .get(&Atom::Var(d.clone()))
                .ok_or_else(|| Error::PartialMap(d.name.to_string()))?;
            for a in img.atoms() {
                if let Atom::Var(w) = a {
                    new_deps.insert(w);
                }
            }
        }
        let deps: Vec<Var> = pb
            .target_vars
            .iter()
            .filter(|v| new_deps.contains(*v))
            .cloned()
            .collect();
        // A source variable outside the dependency set must not move the image
        // variables, otherwise the renamed symbol forgets that it is constant in it.
        for ((a, b), j) in &pb.inv_jacobian {
            if &*a.chart == &*pb.source_chart && !o.sym.deps.contains(a) && new_deps.contains(b) && !j.is_zero() {
                return Err(Error::Unsupported(format!(
                    "pulling back {} loses its independence of {}",
                    o.sym.name, a.name
                )));
            }
        }
        let sym = Symbol {
            name: o.sym.name.clone(),
            deps: Arc::from(deps.clone()),
        };
        let mut e = ScalarExpr::symbol(&sym);
        for a in &o.derivs {
            let mut acc = ScalarExpr::zero();
            for b in &deps {
                let j = pb
                    .inv_jacobian
                    .get(&(a.clone(), b.clone()))
                    .ok_or_else(|| Error::PartialMap(format!("d{}/d{}", b.name, a.name)))?;
                if j.is_zero() {
                    continue;
                }
                acc = acc.add(&j.mul(&e.diff(b)));
            }
            e = acc;
        }
        Ok(Some(e))
    }

    fn image(&self, a: &Atom) -> Result<Option<ScalarExpr>> {
        match a {
            Atom::Var(_) => Ok(self.map.get(a).cloned()),
            Atom::Opaque(o) => self.opaque_image(o),
            Atom::Pow(p) => match self.opaque_image(&p.base)? {
                None => Ok(None),
                Some(img) => match img.as_atom() {
                    Some(Atom::Opaque(nb)) => Ok(Some(ScalarExpr::rational_power(&nb, &p.q))),
                    _ => Err(Error::Unsupported(format!(
                        "rational power of the composite expression {img}"
                    ))),
                },
            },
            Atom::Exp(x) => {
                if !x.lin.iter().any(|(u, _)| self.opaque_touched(u)) {
                    return Ok(None);
                }
                let mut lin = Vec::new();
                for (u, c) in &x.lin {
                    match self.opaque_image(u)? {
                        None => lin.push((u.clone(), c.clone())),
                        Some(img) => match img.as_atom() {
                            Some(Atom::Opaque(nu)) => lin.push((nu, c.clone())),
                            _ => {
                                return Err(Error::Unsupported(format!(
                                    "exponential of the composite expression {img}"
                                )))
                            }
                        },
                    }
                }
                Ok(Some(ScalarExpr::exp_linear(&lin)))
            }
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.terms.len() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        write!(f, "/({})", self.den)
    }
}

impl Add for &ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::add(self, rhs)
    }
}

impl Sub for &ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::sub(self, rhs)
    }
}

impl Mul for &ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::mul(self, rhs)
    }
}

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(self)
    }
}

impl From<i64> for ScalarExpr {
    fn from(n: i64) -> Self {
        ScalarExpr::int(n)
    }
}

impl From<Q> for ScalarExpr {
    fn from(q: Q) -> Self {
        ScalarExpr::from_q(q)
    }
}

/// `c^p` when it is rational: `c > 0` with exact roots of numerator and denominator.
pub fn exact_rational_power(c: &Q, p: &Q) -> Option<Q> {
    use num_bigint::BigInt;
    use num_traits::{Signed, ToPrimitive};
    if c.is_one() {
        return Some(Q::one());
    }
    if !c.is_positive() {
        return None;
    }
    let d = p.denom().to_u32()?;
    let n = p.numer().to_i32()?;
    let root = |x: &BigInt| -> Option<BigInt> {
        let r = x.nth_root(d);
        (r.pow(d) == *x).then_some(r)
    };
    let (a, b) = (root(c.numer())?, root(c.denom())?);
    let base = Q::new(a, b);
    Some(if n >= 0 {
        num_traits::Pow::pow(&base, n.unsigned_abs())
    } else {
        num_traits::Pow::pow(&base.recip(), n.unsigned_abs())
    })
}
