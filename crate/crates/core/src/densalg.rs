//! Densities as polynomials in `t = |Dx|` and normal-ordered differential
//! operators `c t^w λ̂^k ∂^α ∂^β` acting on them.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::binomial;
use num_traits::{One, Zero};

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::symcore::atom::fmt_q;
use crate::symcore::{mask_parity, mask_product_sign, OddMask, ScalarExpr, Substitution, SuperExpr, Q};

/// Finite sum of `s_w t^w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Density {
    chart: Chart,
    terms: BTreeMap<Q, SuperExpr>,
}

impl Density {
    pub fn zero(chart: &Chart) -> Density {
        Density {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(chart: &Chart) -> Density {
        Density::new(chart, Q::zero(), SuperExpr::one())
    }

    /// `s t^w`.
    pub fn new(chart: &Chart, w: Q, s: SuperExpr) -> Density {
        let mut d = Density::zero(chart);
        d.add_term(w, s);
        d
    }

    pub fn function(chart: &Chart, s: SuperExpr) -> Density {
        Density::new(chart, Q::zero(), s)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn terms(&self) -> &BTreeMap<Q, SuperExpr> {
        &self.terms
    }

    pub fn coeff(&self, w: &Q) -> SuperExpr {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The single weight of a homogeneous density (zero counts as any weight).
    pub fn weight(&self) -> Option<Q> {
        match self.terms.len() {
            1 => self.terms.keys().next().cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, w: Q, s: SuperExpr) {
        if s.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(s);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let r = o.get().add(&s);
                if r.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = r;
                }
            }
        }
    }

    pub fn add(&self, other: &Density) -> Result<Density> {
        self.chart.check_same(&other.chart)?;
        let mut out = self.clone();
        for (w, s) in &other.terms {
            out.add_term(w.clone(), s.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Density) -> Result<Density> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Density {
        self.map(|s| s.neg())
    }

    pub fn scale(&self, k: &Q) -> Density {
        self.map(|s| s.scale(k))
    }

    pub fn map(&self, f: impl Fn(&SuperExpr) -> SuperExpr) -> Density {
        let mut out = Density::zero(&self.chart);
        for (w, s) in &self.terms {
            out.add_term(w.clone(), f(s));
        }
        out
    }

    pub fn try_map(&self, f: impl Fn(&SuperExpr) -> Result<SuperExpr>) -> Result<Density> {
        let mut out = Density::zero(&self.chart);
        for (w, s) in &self.terms {
            out.add_term(w.clone(), f(s)?);
        }
        Ok(out)
    }

    /// Product of densities: weights add, coefficients multiply with Koszul signs.
    pub fn mul(&self, other: &Density) -> Result<Density> {
        self.chart.check_same(&other.chart)?;
        let mut out = Density::zero(&self.chart);
        for (w1, s1) in &self.terms {
            for (w2, s2) in &other.terms {
                out.add_term(w1 + w2, s1.mul(s2));
            }
        }
        Ok(out)
    }

    /// `λ̂ = t ∂/∂t`.
    pub fn weight_operator(&self) -> Density {
        let mut out = Density::zero(&self.chart);
        for (w, s) in &self.terms {
            out.add_term(w.clone(), s.scale(w));
        }
        out
    }

    pub fn partial(&self, a: usize) -> Density {
        self.map(|s| self.chart.partial(s, a))
    }

    pub fn substitute_scalars(&self, sub: &Substitution) -> Result<Density> {
        self.try_map(|s| s.substitute_scalars(sub))
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (w, s) in &self.terms {
            let c = self.chart.render(s);
            if w.is_zero() {
                parts.push(c);
            } else {
                parts.push(format!("({c})*t^({})", fmt_q(w)));
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Index of a normal-ordered monomial `t^w λ̂^k ∂^α ∂^β`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpKey {
    pub w: Q,
    pub k: u32,
    pub alpha: Vec<u32>,
    pub beta: OddMask,
}

impl OpKey {
    pub fn order(&self) -> u32 {
        self.alpha.iter().sum::<u32>() + self.beta.count_ones()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensOp {
    chart: Chart,
    terms: BTreeMap<OpKey, SuperExpr>,
}

fn sign(neg: bool) -> Q {
    if neg {
        -Q::one()
    } else {
        Q::one()
    }
}

/// Apply `∂^α ∂^β` to a coefficient.
fn apply_partials(chart: &Chart, alpha: &[u32], beta: OddMask, s: &SuperExpr) -> SuperExpr {
    let n = chart.dim_even();
    let mut out = s.clone();
    let mut b = beta;
    while b != 0 && !out.is_zero() {
        let i = 63 - b.leading_zeros() as usize;
        b &= !(1u64 << i);
        out = out.odd_diff(i);
    }
    for (a, &e) in alpha.iter().enumerate().take(n) {
        for _ in 0..e {
            if out.is_zero() {
                return out;
            }
            out = out.diff(chart.var(a));
        }
    }
    out
}

/// `∂^β ∘ c = Σ c_R ∂^R` for a coefficient `c` (graded Leibniz rule).
fn odd_leibniz(beta: OddMask, c: &SuperExpr) -> Vec<(SuperExpr, OddMask)> {
    let mut cur: Vec<(SuperExpr, OddMask)> = vec![(c.clone(), 0)];
    let mut b = beta;
    while b != 0 {
        let i = 63 - b.leading_zeros() as usize;
        b &= !(1u64 << i);
        let mut next: BTreeMap<OddMask, SuperExpr> = BTreeMap::new();
        for (coef, r) in &cur {
            let d = coef.odd_diff(i);
            if !d.is_zero() {
                let slot = next.entry(*r).or_default();
                *slot = slot.add(&d);
            }
            if r & (1 << i) != 0 {
                continue;
            }
            // (-1)^{p(c)} c ∂_i ∂^R, split c by parity
            let below = (r & ((1u64 << i) - 1)).count_ones() % 2 == 1;
            let ev = coef.even_part();
            let od = coef.odd_part();
            let moved = ev.sub(&od);
            let moved = if below { moved.neg() } else { moved };
            if !moved.is_zero() {
                let slot = next.entry(r | (1 << i)).or_default();
                *slot = slot.add(&moved);
            }
        }
        cur = next.into_iter().filter(|(_, c)| !c.is_zero()).map(|(r, c)| (c, r)).collect();
    }
    cur
}

fn multi_indices_below(alpha: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &e in alpha {
        let mut next = Vec::new();
        for pre in &out {
            for g in 0..=e {
                let mut v = pre.clone();
                v.push(g);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn binom_q(n: u32, k: u32) -> Q {
    Q::from_integer(binomial(n as i64, k as i64).into())
}

/// Coefficients of `(λ̂ + w)^k` in powers of `λ̂`.
fn shifted_power(w: &Q, k: u32) -> Vec<(u32, Q)> {
    (0..=k)
        .map(|j| {
            let mut c = binom_q(k, j);
            for _ in 0..(k - j) {
                c *= w;
            }
            (j, c)
        })
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

impl DensOp {
    pub fn zero(chart: &Chart) -> DensOp {
        DensOp {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(chart: &Chart) -> DensOp {
        DensOp::multiplication(&Density::one(chart))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn terms(&self) -> &BTreeMap<OpKey, SuperExpr> {
        &self.terms
    }

    pub fn key(&self, w: Q, k: u32, alpha: Vec<u32>, beta: OddMask) -> OpKey {
        let mut alpha = alpha;
        alpha.resize(self.chart.dim_even(), 0);
        OpKey { w, k, alpha, beta }
    }

    pub fn term(chart: &Chart, key: OpKey, c: SuperExpr) -> DensOp {
        let mut op = DensOp::zero(chart);
        op.add_term(key, c);
        op
    }

    /// Multiplication by a density.
    pub fn multiplication(d: &Density) -> DensOp {
        let mut op = DensOp::zero(d.chart());
        for (w, s) in d.terms() {
            let key = op.key(w.clone(), 0, vec![], 0);
            op.add_term(key, s.clone());
        }
        op
    }

    pub fn scalar(chart: &Chart, s: SuperExpr) -> DensOp {
        DensOp::multiplication(&Density::function(chart, s))
    }

    /// `∂_A`.
    pub fn partial(chart: &Chart, a: usize) -> DensOp {
        let n = chart.dim_even();
        let mut alpha = vec![0; n];
        let mut beta = 0;
        if a < n {
            alpha[a] = 1;
        } else {
            beta = 1u64 << (a - n);
        }
        DensOp::term(
            chart,
            OpKey {
                w: Q::zero(),
                k: 0,
                alpha,
                beta,
            },
            SuperExpr::one(),
        )
    }

    /// The weight operator `λ̂`.
    pub fn lambda_hat(chart: &Chart) -> DensOp {
        DensOp::term(
            chart,
            OpKey {
                w: Q::zero(),
                k: 1,
                alpha: vec![0; chart.dim_even()],
                beta: 0,
            },
            SuperExpr::one(),
        )
    }

    pub fn add_term(&mut self, key: OpKey, c: SuperExpr) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let r = o.get().add(&c);
                if r.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = r;
                }
            }
        }
    }

    pub fn coeff(&self, key: &OpKey) -> SuperExpr {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Differential order `max |α|+|β|` of the normal form (0 for the zero operator).
    pub fn order(&self) -> u32 {
        self.terms.keys().map(OpKey::order).max().unwrap_or(0)
    }

    /// Common weight of all coefficients, if there is exactly one.
    pub fn weight(&self) -> Option<Q> {
        let mut it = self.terms.keys().map(|k| &k.w);
        let first = it.next()?.clone();
        if it.all(|w| *w == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Parity of a homogeneous operator.
    pub fn parity(&self) -> Option<u32> {
        let mut out = None;
        for (k, c) in &self.terms {
            let p = (c.parity()? + mask_parity(k.beta)) % 2;
            match out {
                None => out = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(0))
    }

    pub fn add(&self, other: &DensOp) -> Result<DensOp> {
        self.chart.check_same(&other.chart)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DensOp) -> Result<DensOp> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DensOp {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, k: &Q) -> DensOp {
        self.map(|c| c.scale(k))
    }

    pub fn map(&self, f: impl Fn(&SuperExpr) -> SuperExpr) -> DensOp {
        let mut out = DensOp::zero(&self.chart);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    pub fn try_map(&self, f: impl Fn(&SuperExpr) -> Result<SuperExpr>) -> Result<DensOp> {
        let mut out = DensOp::zero(&self.chart);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Substitute symbolic constants (e.g. the formal pencil parameter).
    pub fn substitute_scalars(&self, sub: &Substitution) -> Result<DensOp> {
        self.try_map(|c| c.substitute_scalars(sub))
    }

    pub fn apply(&self, a: &Density) -> Result<Density> {
        self.chart.check_same(a.chart())?;
        let mut out = Density::zero(&self.chart);
        for (key, c) in &self.terms {
            for (v, s) in a.terms() {
                let ds = apply_partials(&self.chart, &key.alpha, key.beta, s);
                if ds.is_zero() {
                    continue;
                }
                let mut lam = Q::one();
                for _ in 0..key.k {
                    lam *= v;
                }
                if lam.is_zero() {
                    continue;
                }
                out.add_term(&key.w + v, c.mul(&ds).scale(&lam));
            }
        }
        Ok(out)
    }

    /// Operator product `self ∘ other` in normal order.
    pub fn compose(&self, other: &DensOp) -> Result<DensOp> {
        self.chart.check_same(&other.chart)?;
        let chart = &self.chart;
        let mut out = DensOp::zero(chart);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                // ∂^{α1} ∂^{β1} ∘ c2 = Σ binom (∂^γ c_R) ∂^{α1-γ} ∂^R
                for (cr, r) in odd_leibniz(k1.beta, c2) {
                    let (neg, beta) = match mask_product_sign(r, k2.beta) {
                        Some(neg) => (neg, r | k2.beta),
                        None => continue,
                    };
                    for gamma in multi_indices_below(&k1.alpha) {
                        let mut coef = Q::one();
                        for (a, g) in gamma.iter().enumerate() {
                            coef *= binom_q(k1.alpha[a], *g);
                        }
                        let dc = apply_partials(chart, &gamma, 0, &cr);
                        if dc.is_zero() {
                            continue;
                        }
                        let prod = c1.mul(&dc).scale(&(coef * sign(neg)));
                        if prod.is_zero() {
                            continue;
                        }
                        let alpha: Vec<u32> = k1
                            .alpha
                            .iter()
                            .zip(&gamma)
                            .zip(&k2.alpha)
                            .map(|((a, g), b)| a - g + b)
                            .collect();
                        for (j, lc) in shifted_power(&k2.w, k1.k) {
                            let key = OpKey {
                                w: &k1.w + &k2.w,
                                k: j + k2.k,
                                alpha: alpha.clone(),
                                beta,
                            };
                            out.add_term(key, prod.scale(&lc));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Graded commutator `[A, B] = AB - (-1)^{p(A)p(B)} BA` for homogeneous operators.
    pub fn commutator(&self, other: &DensOp) -> Result<DensOp> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        let pa = self.parity().ok_or_else(|| Error::Parity("inhomogeneous operator".into()))?;
        let pb = other.parity().ok_or_else(|| Error::Parity("inhomogeneous operator".into()))?;
        if pa * pb == 1 {
            ab.add(&ba)
        } else {
            ab.sub(&ba)
        }
    }

    /// Adjoint with respect to the canonical pairing: an antihomomorphism fixing
    /// coordinates and `t`, with `∂_A ↦ -∂_A` and `λ̂ ↦ 1 - λ̂`.
    pub fn adjoint(&self) -> DensOp {
        let chart = &self.chart;
        let n = chart.dim_even();
        let mut out = DensOp::zero(chart);
        for (key, c) in &self.terms {
            // (c t^w λ̂^k ∂^α ∂^β)^+ = (-1)^{p(c)|β|} (-1)^{|α|+|β|} ∂^α ∂^β (1-λ̂)^k t^w c
            let nb = key.beta.count_ones();
            let flip = (key.alpha.iter().sum::<u32>() + nb) % 2 == 1;
            let mut deriv = DensOp::zero(chart);
            let mut base_key = OpKey {
                w: Q::zero(),
                k: 0,
                alpha: key.alpha.clone(),
                beta: key.beta,
            };
            base_key.alpha.resize(n, 0);
            for (j, lc) in shifted_power(&-Q::one(), key.k) {
                // (1-λ̂)^k = (-1)^k (λ̂-1)^k
                let mut kk = base_key.clone();
                kk.k = j;
                let s = if key.k % 2 == 1 { -lc } else { lc };
                deriv.add_term(kk, SuperExpr::from_q(s));
            }
            for part in [c.even_part(), c.odd_part()] {
                if part.is_zero() {
                    continue;
                }
                let pc = part.parity().unwrap_or(0);
                let neg = flip ^ (pc * nb % 2 == 1);
                let mult = DensOp::multiplication(&Density::new(chart, key.w.clone(), part));
                let r = deriv.compose(&mult).expect("same chart");
                let r = if neg { r.neg() } else { r };
                for (k, v) in r.terms {
                    out.add_term(k, v);
                }
            }
        }
        out
    }

    /// Order in the commutator sense: 0 when the operator commutes (graded) with
    /// every coordinate function, otherwise one more than the largest order of
    /// `[A, z^A]`.
    pub fn order_by_commutators(&self) -> Result<u32> {
        if self.is_zero() {
            return Ok(0);
        }
        let mut best: Option<u32> = None;
        for a in 0..self.chart.dim() {
            let z = DensOp::scalar(&self.chart, self.chart.coord(a));
            let c = self.commutator(&z)?;
            if !c.is_zero() {
                let o = c.order_by_commutators()? + 1;
                best = Some(best.map_or(o, |b| b.max(o)));
            }
        }
        Ok(best.unwrap_or(0))
    }

    /// `(self + (-1)^n self⁺)/2` and `(self - (-1)^n self⁺)/2`; the second part has
    /// order `≤ n-1`. For odd `n` the first part is anti-self-adjoint.
    pub fn sa_decompose(&self, n: u32) -> Result<(DensOp, DensOp)> {
        if self.order() > n {
            return Err(Error::Invalid(format!(
                "operator of order {} exceeds {n}",
                self.order()
            )));
        }
        let adj = self.adjoint();
        let adj = if n % 2 == 1 { adj.neg() } else { adj };
        let half = Q::new(1.into(), 2.into());
        Ok((
            self.add(&adj)?.scale(&half),
            self.sub(&adj)?.scale(&half),
        ))
    }

    /// Replace every `λ̂^k` by `λ^k` for a scalar `λ` (restriction to `F_λ`).
    pub fn at_weight(&self, lambda: &ScalarExpr) -> DensOp {
        let mut out = DensOp::zero(&self.chart);
        for (key, c) in &self.terms {
            let mut kk = key.clone();
            kk.k = 0;
            let f = lambda.pow(key.k as i64).expect("nonnegative power");
            out.add_term(kk, c.scale_scalar(&f));
        }
        out
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (key, c) in self.terms.iter().rev() {
            let mut f = vec![format!("({})", self.chart.render(c))];
            if !key.w.is_zero() {
                f.push(format!("t^({})", fmt_q(&key.w)));
            }
            if key.k == 1 {
                f.push("L".into());
            } else if key.k > 1 {
                f.push(format!("L^{}", key.k));
            }
            for (a, e) in key.alpha.iter().enumerate() {
                if *e == 1 {
                    f.push(format!("D({})", self.chart.coord_name(a)));
                } else if *e > 1 {
                    f.push(format!("D({})^{e}", self.chart.coord_name(a)));
                }
            }
            let mut b = key.beta;
            while b != 0 {
                let i = b.trailing_zeros() as usize;
                b &= b - 1;
                f.push(format!("D({})", self.chart.odd()[i]));
            }
            parts.push(f.join("*"));
        }
        parts.join(" + ")
    }
}

impl fmt::Display for DensOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A first-order operator `t^δ(X^A ∂_A + X⁰ λ̂)` of homogeneous weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HatField {
    pub chart: Chart,
    pub delta: Q,
    pub comps: Vec<SuperExpr>,
    pub x0: SuperExpr,
}

impl HatField {
    pub fn new(chart: &Chart, delta: Q, comps: Vec<SuperExpr>, x0: SuperExpr) -> Result<HatField> {
        if comps.len() != chart.dim() {
            return Err(Error::Shape(format!(
                "{} components for a chart of dimension {}",
                comps.len(),
                chart.dim()
            )));
        }
        Ok(HatField {
            chart: chart.clone(),
            delta,
            comps,
            x0,
        })
    }

    pub fn to_op(&self) -> DensOp {
        let chart = &self.chart;
        let mut op = DensOp::zero(chart);
        for (a, c) in self.comps.iter().enumerate() {
            let d = DensOp::partial(chart, a);
            for (k, _) in d.terms {
                let mut k = k;
                k.w = self.delta.clone();
                op.add_term(k, c.clone());
            }
        }
        let k = op.key(self.delta.clone(), 1, vec![], 0);
        op.add_term(k, self.x0.clone());
        op
    }

    /// Read a field off a first-order operator with no multiplication part.
    pub fn from_op(op: &DensOp) -> Result<HatField> {
        let chart = op.chart().clone();
        let delta = op.weight().unwrap_or_else(Q::zero);
        if op.weight().is_none() && !op.is_zero() {
            return Err(Error::NonHomogeneous);
        }
        let n = chart.dim_even();
        let mut comps = vec![SuperExpr::zero(); chart.dim()];
        let mut x0 = SuperExpr::zero();
        for (k, c) in op.terms() {
            let ord = k.order();
            match (k.k, ord) {
                (1, 0) => x0 = c.clone(),
                (0, 1) => {
                    let a = if k.beta != 0 {
                        n + k.beta.trailing_zeros() as usize
                    } else {
                        k.alpha.iter().position(|e| *e == 1).expect("order one")
                    };
                    comps[a] = c.clone();
                }
                _ => {
                    return Err(Error::Invalid(format!(
                        "operator is not a vector field on densities: {op}"
                    )))
                }
            }
        }
        HatField::new(&chart, delta, comps, x0)
    }
}

/// `Σ_A (-1)^{p(A)(p(X^A)+1)}... ` realized per parity component as
/// `∂_a X^a + Σ_α (-1)^{p(X^α)} ∂_α X^α`.
pub fn super_divergence(chart: &Chart, comps: &[SuperExpr]) -> SuperExpr {
    let mut acc = SuperExpr::zero();
    for (a, c) in comps.iter().enumerate() {
        if chart.parity(a) == 0 {
            acc = acc.add(&chart.partial(c, a));
        } else {
            acc = acc
                .add(&chart.partial(&c.even_part(), a))
                .sub(&chart.partial(&c.odd_part(), a));
        }
    }
    acc
}

/// `div X = t^δ(∂_A X^A + (δ-1) X⁰)`.
pub fn divergence(x: &HatField) -> Density {
    let d = super_divergence(&x.chart, &x.comps);
    let s = d.add(&x.x0.scale(&(&x.delta - Q::one())));
    Density::new(&x.chart, x.delta.clone(), s)
}

fn check_not_one(delta: &Q, what: &str) -> Result<()> {
    if delta.is_one() {
        return Err(Error::ExceptionalWeight(format!("{what} is undefined at weight 1")));
    }
    Ok(())
}

/// Generalized Lie derivative `t^δ(X^A ∂_A + ∂_A X^A λ̂/(1-δ))`.
pub fn lie_derivative(chart: &Chart, comps: &[SuperExpr], delta: &Q) -> Result<HatField> {
    check_not_one(delta, "the Lie derivative")?;
    let d = super_divergence(chart, comps);
    let x0 = d.scale(&(Q::one() - delta).recip());
    HatField::new(chart, delta.clone(), comps.to_vec(), x0)
}

/// Vertical projection `ΠX = t^δ(∂_A X^A/(δ-1) + X⁰) λ̂`.
pub fn vertical_projection(x: &HatField) -> Result<HatField> {
    check_not_one(&x.delta, "the vertical projection")?;
    let d = super_divergence(&x.chart, &x.comps);
    let x0 = d.scale(&(&x.delta - Q::one()).recip()).add(&x.x0);
    HatField::new(
        &x.chart,
        x.delta.clone(),
        vec![SuperExpr::zero(); x.chart.dim()],
        x0,
    )
}
