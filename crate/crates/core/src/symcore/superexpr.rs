//! Grassmann-valued expressions: coefficients indexed by ascending sets of
//! odd generators, stored as bit masks (generator `i` is bit `i`).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::atom::Var;
use super::scalar::{ScalarExpr, Substitution};
use super::Q;
use crate::error::{Error, Result};

pub type OddMask = u64;

/// Sign of `theta^a * theta^b` reordered into ascending order, or `None` if
/// the product vanishes.
pub fn mask_product_sign(a: OddMask, b: OddMask) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        bb &= bb - 1;
        let above = if j >= 63 { 0 } else { a >> (j + 1) };
        swaps += above.count_ones();
    }
    Some(swaps % 2 == 1)
}

pub fn mask_parity(m: OddMask) -> u32 {
    m.count_ones() % 2
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SuperExpr {
    terms: BTreeMap<OddMask, ScalarExpr>,
}

impl SuperExpr {
    pub fn zero() -> SuperExpr {
        SuperExpr::default()
    }

    pub fn one() -> SuperExpr {
        SuperExpr::scalar(ScalarExpr::one())
    }

    pub fn scalar(s: ScalarExpr) -> SuperExpr {
        SuperExpr::term(0, s)
    }

    pub fn term(mask: OddMask, s: ScalarExpr) -> SuperExpr {
        let mut terms = BTreeMap::new();
        if !s.is_zero() {
            terms.insert(mask, s);
        }
        SuperExpr { terms }
    }

    /// The odd generator with index `i`.
    pub fn odd(i: usize) -> SuperExpr {
        SuperExpr::term(1 << i, ScalarExpr::one())
    }

    pub fn int(n: i64) -> SuperExpr {
        SuperExpr::scalar(ScalarExpr::int(n))
    }

    pub fn from_q(q: Q) -> SuperExpr {
        SuperExpr::scalar(ScalarExpr::from_q(q))
    }

    pub fn terms(&self) -> &BTreeMap<OddMask, ScalarExpr> {
        &self.terms
    }

    pub fn coeff(&self, mask: OddMask) -> ScalarExpr {
        self.terms.get(&mask).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// The odd-free part.
    pub fn body(&self) -> ScalarExpr {
        self.coeff(0)
    }

    pub fn as_scalar(&self) -> Option<ScalarExpr> {
        match self.terms.len() {
            0 => Some(ScalarExpr::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn as_q(&self) -> Option<Q> {
        self.as_scalar()?.as_q()
    }

    /// `Some(0|1)` when homogeneous; the zero element counts as even.
    pub fn parity(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| mask_parity(*m));
        let first = it.next().unwrap_or(0);
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn even_part(&self) -> SuperExpr {
        self.filter(|m| mask_parity(m) == 0)
    }

    pub fn odd_part(&self) -> SuperExpr {
        self.filter(|m| mask_parity(m) == 1)
    }

    fn filter(&self, f: impl Fn(OddMask) -> bool) -> SuperExpr {
        SuperExpr {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| f(**m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    fn add_term(&mut self, m: OddMask, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &SuperExpr) -> SuperExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SuperExpr) -> SuperExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SuperExpr {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, k: &Q) -> SuperExpr {
        if k.is_zero() {
            return SuperExpr::zero();
        }
        self.map(|c| c.scale(k))
    }

    pub fn scale_scalar(&self, s: &ScalarExpr) -> SuperExpr {
        if s.is_zero() {
            return SuperExpr::zero();
        }
        let mut out = SuperExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, c.mul(s));
        }
        out
    }

    pub fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> SuperExpr {
        let mut out = SuperExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, f(c));
        }
        out
    }

    pub fn try_map(&self, f: impl Fn(&ScalarExpr) -> Result<ScalarExpr>) -> Result<SuperExpr> {
        let mut out = SuperExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, f(c)?);
        }
        Ok(out)
    }

    /// Supercommutative product with Koszul signs.
    pub fn mul(&self, other: &SuperExpr) -> SuperExpr {
        let mut out = SuperExpr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(neg) = mask_product_sign(*ma, *mb) {
                    let c = ca.mul(cb);
                    out.add_term(ma | mb, if neg { c.neg() } else { c });
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> SuperExpr {
        let mut acc = SuperExpr::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Inverse through the nilpotent expansion `b^{-1} sum (-n/b)^k`.
    pub fn inv(&self) -> Result<SuperExpr> {
        let b = self.body();
        if b.is_zero() {
            return Err(Error::NotInvertible(format!("{self} has zero body")));
        }
        let binv = b.inv()?;
        let mut n = self.clone();
        n.terms.remove(&0);
        let r = n.scale_scalar(&binv).neg();
        let mut acc = SuperExpr::one();
        let mut p = SuperExpr::one();
        loop {
            p = p.mul(&r);
            if p.is_zero() {
                break;
            }
            acc = acc.add(&p);
        }
        Ok(acc.scale_scalar(&binv))
    }

    pub fn div(&self, other: &SuperExpr) -> Result<SuperExpr> {
        if let Some(s) = other.as_scalar() {
            let si = s.inv()?;
            return Ok(self.scale_scalar(&si));
        }
        Ok(self.mul(&other.inv()?))
    }

    /// Even partial derivative, coefficientwise.
    pub fn diff(&self, v: &Var) -> SuperExpr {
        self.map(|c| c.diff(v))
    }

    /// Left derivative with respect to odd generator `i`.
    pub fn odd_diff(&self, i: usize) -> SuperExpr {
        let bit = 1u64 << i;
        let below = bit - 1;
        let mut out = SuperExpr::zero();
        for (m, c) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let neg = (m & below).count_ones() % 2 == 1;
            out.add_term(m & !bit, if neg { c.neg() } else { c.clone() });
        }
        out
    }

    pub fn substitute_scalars(&self, s: &Substitution) -> Result<SuperExpr> {
        self.try_map(|c| c.substitute(s))
    }

    /// Substitute the odd generators by odd images (in order of index) after
    /// the scalar coefficients were substituted by `s`.
    pub fn substitute_odd(&self, s: &Substitution, odd_images: &[SuperExpr]) -> Result<SuperExpr> {
        let mut out = SuperExpr::zero();
        for (m, c) in &self.terms {
            let mut acc = SuperExpr::scalar(c.substitute(s)?);
            let mut mm = *m;
            while mm != 0 {
                let i = mm.trailing_zeros() as usize;
                mm &= mm - 1;
                let img = odd_images
                    .get(i)
                    .ok_or_else(|| Error::PartialMap(format!("odd generator {i}")))?;
                acc = acc.mul(img);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    pub fn render(&self, odd_names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mut gens = Vec::new();
            let mut mm = *m;
            while mm != 0 {
                let i = mm.trailing_zeros() as usize;
                mm &= mm - 1;
                gens.push(
                    odd_names
                        .get(i)
                        .cloned()
                        .unwrap_or_else(|| format!("θ{i}")),
                );
            }
            if gens.is_empty() {
                parts.push(c.to_string());
            } else if c.is_one() {
                parts.push(gens.join("*"));
            } else {
                parts.push(format!("({c})*{}", gens.join("*")));
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Display for SuperExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[]))
    }
}

impl From<ScalarExpr> for SuperExpr {
    fn from(s: ScalarExpr) -> Self {
        SuperExpr::scalar(s)
    }
}
