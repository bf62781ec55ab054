//! Multivariate polynomial gcd by recursive primitive remainder sequences.

use std::collections::BTreeSet;

use super::atom::Atom;
use super::poly::{Mono, Poly};

/// Monic gcd in ℚ[atoms]. Nonzero constants are units, so `gcd(c, p) = 1`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic().0;
    }
    if b.is_zero() {
        return a.monic().0;
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.mono_content();
    let mb = b.mono_content();
    let mg = ma.gcd_mono(&mb);
    let a1 = strip_mono(a, &ma);
    let b1 = strip_mono(b, &mb);
    let g = gcd_prim(&a1, &b1);
    g.mul_mono(&mg, &num_traits::One::one()).monic().0
}

fn strip_mono(p: &Poly, m: &Mono) -> Poly {
    if m.is_one() {
        p.clone()
    } else {
        p.div_exact(&Poly::term(m.clone(), num_traits::One::one()))
            .expect("monomial content divides")
    }
}

fn vars(p: &Poly) -> BTreeSet<Atom> {
    p.atoms()
}

/// gcd of the coefficients of `p` viewed as a polynomial in `v`.
pub fn content_wrt(p: &Poly, v: &Atom) -> Poly {
    let coeffs = p.coeffs_in(v);
    let mut it = coeffs.into_values();
    let mut g = match it.next() {
        Some(c) => c.monic().0,
        None => return Poly::zero(),
    };
    for c in it {
        if g.is_one() {
            break;
        }
        g = gcd(&g, &c);
    }
    g
}

fn primitive_part(p: &Poly, v: &Atom) -> Poly {
    let c = content_wrt(p, v);
    if c.is_one() {
        return p.monic().0;
    }
    p.div_exact(&c).expect("content divides").monic().0
}

fn lead_coeff(p: &Poly, v: &Atom) -> (i64, Poly) {
    let coeffs = p.coeffs_in(v);
    let (d, c) = coeffs.into_iter().next_back().expect("nonzero polynomial");
    (d, c)
}

/// Pseudo-remainder of `p` by `q` in the variable `v`.
fn prem(p: &Poly, q: &Poly, v: &Atom) -> Poly {
    let (n, lq) = lead_coeff(q, v);
    let mut r = p.clone();
    loop {
        if r.is_zero() {
            return r;
        }
        let (d, lr) = lead_coeff(&r, v);
        if d < n {
            return r;
        }
        let shift = Poly::term(Mono::atom(v.clone(), d - n), num_traits::One::one());
        r = lq.mul(&r).sub(&lr.mul(&shift).mul(q));
    }
}

fn gcd_prim(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic().0;
    }
    let (small, big) = if a.terms.len() <= b.terms.len() {
        (a, b)
    } else {
        (b, a)
    };
    if big.div_exact(small).is_some() {
        return small.monic().0;
    }
    let va = vars(a);
    let vb = vars(b);
    let common: BTreeSet<Atom> = va.intersection(&vb).cloned().collect();
    if common.is_empty() {
        return Poly::one();
    }
    let mut a = a.clone();
    let mut b = b.clone();
    for v in va.difference(&common) {
        a = content_wrt(&a, v);
        if a.is_constant() {
            return Poly::one();
        }
    }
    for v in vb.difference(&common) {
        b = content_wrt(&b, v);
        if b.is_constant() {
            return Poly::one();
        }
    }
    if va.len() != common.len() || vb.len() != common.len() {
        return gcd(&a, &b);
    }
    let v = common
        .iter()
        .min_by_key(|v| a.degree_in(v).max(b.degree_in(v)))
        .expect("nonempty")
        .clone();
    let ca = content_wrt(&a, &v);
    let cb = content_wrt(&b, &v);
    let c = gcd(&ca, &cb);
    let mut p = a.div_exact(&ca).expect("content divides");
    let mut q = b.div_exact(&cb).expect("content divides");
    if p.degree_in(&v) < q.degree_in(&v) {
        std::mem::swap(&mut p, &mut q);
    }
    let g = loop {
        let r = prem(&p, &q, &v);
        if r.is_zero() {
            break primitive_part(&q, &v);
        }
        if r.degree_in(&v) == 0 {
            break Poly::one();
        }
        p = q;
        q = primitive_part(&r, &v);
    };
    c.mul(&g).monic().0
}
