//! Sparse multivariate (Laurent) polynomials over ℚ in [`Atom`]s.
//!
//! Multiplication here is the plain polynomial ring product; the merge rules
//! for power and exponential atoms are applied by [`Poly::canon`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::atom::{fmt_q, Atom, ExpAtom, Opaque, PowAtom};
use super::Q;

/// Product of atoms with nonzero integer exponents, sorted by atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Mono(pub Vec<(Atom, i64)>);

impl Mono {
    pub fn one() -> Mono {
        Mono(Vec::new())
    }

    pub fn atom(a: Atom, e: i64) -> Mono {
        if e == 0 {
            Mono::one()
        } else {
            Mono(vec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exp_of(&self, a: &Atom) -> i64 {
        match self.0.binary_search_by(|(b, _)| b.cmp(a)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    pub fn pow(&self, k: i64) -> Mono {
        if k == 0 {
            return Mono::one();
        }
        Mono(self.0.iter().map(|(a, e)| (a.clone(), e * k)).collect())
    }

    /// `self / other` if every exponent stays nonnegative.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let q = self.mul(&other.pow(-1));
        if q.0.iter().all(|(_, e)| *e > 0) {
            Some(q)
        } else {
            None
        }
    }

    /// Componentwise minimum (over atoms present in either, absent counts as 0).
    pub fn gcd_mono(&self, other: &Mono) -> Mono {
        let mut out = Vec::new();
        let mut keys: BTreeSet<&Atom> = self.0.iter().map(|(a, _)| a).collect();
        keys.extend(other.0.iter().map(|(a, _)| a));
        for a in keys {
            let e = self.exp_of(a).min(other.exp_of(a));
            if e != 0 {
                out.push((a.clone(), e));
            }
        }
        Mono(out)
    }

    fn has_ext(&self) -> bool {
        self.0.last().is_some_and(|(a, _)| a.is_algebraic_ext())
    }

    /// Apply the merge rules u^q·u^r = u^{q+r} and exp(u)·exp(v) = exp(u+v).
    /// Integer parts of power atoms move onto the plain base atom, which may
    /// then carry a negative exponent.
    pub fn canon(&self) -> Mono {
        if !self.has_ext() {
            return self.clone();
        }
        let mut plain: BTreeMap<Atom, i64> = BTreeMap::new();
        let mut powers: BTreeMap<Opaque, Q> = BTreeMap::new();
        let mut exps: Vec<(&ExpAtom, i64)> = Vec::new();
        for (a, e) in &self.0 {
            match a {
                Atom::Pow(p) => {
                    let slot = powers.entry(p.base.clone()).or_insert_with(Q::zero);
                    *slot += &p.q * Q::from_integer((*e).into());
                }
                Atom::Exp(x) => exps.push((x, *e)),
                other => {
                    *plain.entry(other.clone()).or_insert(0) += e;
                }
            }
        }
        let mut out: BTreeMap<Atom, i64> = BTreeMap::new();
        for (base, r) in powers {
            let fl = r.floor();
            let frac = &r - &fl;
            let fl: i64 = num_traits::ToPrimitive::to_i64(fl.numer()).expect("exponent overflow");
            *plain.entry(Atom::Opaque(base.clone())).or_insert(0) += fl;
            if !frac.is_zero() {
                out.insert(Atom::Pow(PowAtom { base, q: frac }), 1);
            }
        }
        if !exps.is_empty() {
            let ex = ExpAtom::combine(exps);
            if !ex.is_trivial() {
                out.insert(Atom::Exp(ex), 1);
            }
        }
        for (a, e) in plain {
            if e != 0 {
                out.insert(a, e);
            }
        }
        Mono(out.into_iter().collect())
    }
}

/// Graded lexicographic order; the smallest atom is the most significant.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.degree().cmp(&other.degree());
        if d != Ordering::Equal {
            return d;
        }
        let (a, b) = (&self.0, &other.0);
        let mut i = 0;
        loop {
            match (a.get(i), b.get(i)) {
                (None, None) => return Ordering::Equal,
                (Some((_, e)), None) => return e.cmp(&0),
                (None, Some((_, e))) => return 0.cmp(e),
                (Some((x, ex)), Some((y, ey))) => match x.cmp(y) {
                    Ordering::Less => return ex.cmp(&0),
                    Ordering::Greater => return 0.cmp(ey),
                    Ordering::Equal => {
                        if ex != ey {
                            return ex.cmp(ey);
                        }
                    }
                },
            }
            i += 1;
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{a}")?;
            } else {
                write!(f, "{a}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    pub terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(), c);
        }
        Poly { terms }
    }

    pub fn from_atom(a: Atom) -> Poly {
        Poly::term(Mono::atom(a, 1), Q::one())
    }

    pub fn term(m: Mono, c: Q) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Mono::one()).is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&Mono::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading(&self) -> Option<(&Mono, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.mul(m), c * k))
                .collect(),
        }
    }

    /// Plain polynomial-ring product (no merge rules).
    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Apply the atom merge rules to every monomial.
    pub fn canon(&self) -> Poly {
        if !self.terms.keys().any(|m| m.has_ext()) {
            return self.clone();
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.canon(), c.clone());
        }
        out
    }

    pub fn has_ext(&self) -> bool {
        self.terms.keys().any(|m| m.has_ext())
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                s.insert(a.clone());
            }
        }
        s
    }

    /// Componentwise minimum exponent over all terms (absent counts as 0).
    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Mono::one();
        };
        let mut acc = first.clone();
        for m in it {
            acc = acc.gcd_mono(m);
            if acc.is_one() {
                break;
            }
        }
        acc
    }

    pub fn degree_in(&self, a: &Atom) -> i64 {
        self.terms.keys().map(|m| m.exp_of(a)).max().unwrap_or(0)
    }

    /// Coefficients as a polynomial in `a`: exponent -> coefficient.
    pub fn coeffs_in(&self, a: &Atom) -> BTreeMap<i64, Poly> {
        let mut out: BTreeMap<i64, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exp_of(a);
            let rest = if e == 0 {
                m.clone()
            } else {
                Mono(m.0.iter().filter(|(b, _)| b != a).cloned().collect())
            };
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Make the leading coefficient 1 (returns the factor divided out).
    pub fn monic(&self) -> (Poly, Q) {
        match self.leading() {
            None => (Poly::zero(), Q::one()),
            Some((_, c)) => {
                let c = c.clone();
                (self.scale(&c.recip()), c)
            }
        }
    }

    /// Exact division in the polynomial ring, `None` if `other` does not divide.
    pub fn div_exact(&self, other: &Poly) -> Option<Poly> {
        if other.is_zero() {
            return None;
        }
        if let Some(c) = other.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (lm, lc) = other.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        if other.is_monomial() {
            let inv = lm.pow(-1);
            let mut terms = BTreeMap::new();
            for (m, c) in &self.terms {
                let q = m.mul(&inv);
                if q.0.iter().any(|(_, e)| *e < 0) {
                    return None;
                }
                terms.insert(q, c / &lc);
            }
            return Some(Poly { terms });
        }
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = rm.div(&lm).or_else(|| {
                if rm == lm {
                    Some(Mono::one())
                } else {
                    None
                }
            })?;
            let qc = &rc / &lc;
            rem = rem.sub(&other.mul_mono(&qm, &qc));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Lowest common denominator of the rational coefficients and the gcd of
    /// the numerators; used to bound coefficient growth.
    pub fn rational_content(&self) -> Q {
        let mut num = num_bigint::BigInt::zero();
        let mut den = num_bigint::BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Q::one();
        }
        Q::new(num, den)
    }

    pub fn min_exponents(&self) -> BTreeMap<Atom, i64> {
        let mut out: BTreeMap<Atom, i64> = BTreeMap::new();
        for m in self.terms.keys() {
            for (a, e) in &m.0 {
                let slot = out.entry(a.clone()).or_insert(0);
                if e < slot {
                    *slot = *e;
                }
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                f.write_str(&fmt_q(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_q(&a))?;
            }
        }
        Ok(())
    }
}
