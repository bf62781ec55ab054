//! Seeded random instances for property checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atlas::{self, Transition};
use crate::chart::Chart;
use crate::densalg::{DensOp, Density, OpKey};
use crate::pencils::PencilData;
use crate::symcore::{q, ScalarExpr, SuperExpr, Q};

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }

    /// Small nonzero-biased rational.
    pub fn rational(&mut self) -> Q {
        let n: i64 = self.rng.gen_range(-3..=3);
        let d: i64 = *[1, 1, 1, 2, 3].choose(&mut self.rng).expect("nonempty");
        q(n, d)
    }

    pub fn nonzero_rational(&mut self) -> Q {
        loop {
            let r = self.rational();
            if r != Q::from_integer(0.into()) {
                return r;
            }
        }
    }

    /// Weight drawn from a small set of rationals.
    pub fn weight(&mut self) -> Q {
        let ws = [q(0, 1), q(1, 2), q(1, 1), q(2, 1), q(-1, 1), q(1, 3), q(3, 2)];
        ws.choose(&mut self.rng).expect("nonempty").clone()
    }

    /// Polynomial of total degree `≤ deg` in the even chart variables.
    pub fn poly(&mut self, chart: &Chart, deg: u32) -> ScalarExpr {
        let n = chart.dim_even();
        let nterms = self.range(0, 3);
        let mut acc = ScalarExpr::zero();
        for _ in 0..nterms {
            let mut m = ScalarExpr::from_q(self.nonzero_rational());
            let d = self.range(0, deg as usize);
            for _ in 0..d {
                if n == 0 {
                    break;
                }
                let a = self.range(0, n - 1);
                m = m.mul(&ScalarExpr::var(chart.var(a)));
            }
            acc = acc.add(&m);
        }
        acc
    }

    /// Superfunction with polynomial coefficients; `parity` restricts the odd monomials.
    pub fn superexpr(&mut self, chart: &Chart, deg: u32, parity: Option<u32>) -> SuperExpr {
        let m = chart.dim_odd();
        let mut acc = SuperExpr::zero();
        let nterms = if m == 0 { 1 } else { self.range(1, 3) };
        for _ in 0..nterms {
            let mask: u64 = if m == 0 { 0 } else { self.rng.gen_range(0..(1u64 << m)) };
            if let Some(p) = parity {
                if mask.count_ones() % 2 != p {
                    continue;
                }
            }
            acc = acc.add(&SuperExpr::term(mask, self.poly(chart, deg)));
        }
        acc
    }

    pub fn density(&mut self, chart: &Chart, deg: u32) -> Density {
        let mut d = Density::zero(chart);
        for _ in 0..self.range(1, 2) {
            let w = self.weight();
            d = d
                .add(&Density::new(chart, w, self.superexpr(chart, deg, None)))
                .expect("same chart");
        }
        d
    }

    /// Random normal-ordered operator of order `≤ max_order`, homogeneous in weight
    /// when `weight` is given.
    pub fn densop(&mut self, chart: &Chart, max_order: u32, weight: Option<Q>) -> DensOp {
        let n = chart.dim_even();
        let m = chart.dim_odd();
        let mut op = DensOp::zero(chart);
        for _ in 0..self.range(1, 4) {
            let w = weight.clone().unwrap_or_else(|| self.weight());
            let k = self.range(0, 2) as u32;
            let ord = self.range(0, max_order as usize);
            let mut alpha = vec![0u32; n];
            let mut beta = 0u64;
            for _ in 0..ord {
                let a = self.range(0, n + m - 1);
                if a < n {
                    alpha[a] += 1;
                } else {
                    beta |= 1 << (a - n);
                }
            }
            let c = self.superexpr(chart, 2, None);
            op.add_term(OpKey { w, k, alpha, beta }, c);
        }
        op
    }

    /// Random supersymmetric `S` of parity `p` with polynomial coefficients.
    pub fn symbol(&mut self, chart: &Chart, p: u32, deg: u32) -> Vec<Vec<SuperExpr>> {
        let n = chart.dim();
        let mut s = vec![vec![SuperExpr::zero(); n]; n];
        for a in 0..n {
            for b in a..n {
                let both_odd = chart.parity(a) * chart.parity(b) == 1;
                if a == b && both_odd {
                    continue;
                }
                let par = (p + chart.parity(a) + chart.parity(b)) % 2;
                let e = self.superexpr(chart, deg, Some(par));
                s[b][a] = if both_odd { e.neg() } else { e.clone() };
                s[a][b] = e;
            }
        }
        s
    }

    pub fn pencil_data(&mut self, chart: &Chart, p: u32, delta: Q) -> PencilData {
        let s = self.symbol(chart, p, 2);
        let gamma = (0..chart.dim())
            .map(|a| self.superexpr(chart, 2, Some((p + chart.parity(a)) % 2)))
            .collect();
        let theta = self.superexpr(chart, 2, Some(p));
        PencilData::new(chart, delta, s, gamma, theta).expect("generated data is consistent")
    }

    /// Random affine, Möbius (first coordinate) or triangular-polynomial
    /// transition between two even charts of equal dimension.
    pub fn transition(&mut self, source: &Chart, target: &Chart) -> Transition {
        let n = source.dim_even();
        loop {
            let t = match self.range(0, 2) {
                0 => {
                    let m: Vec<Vec<Q>> = (0..n)
                        .map(|_| (0..n).map(|_| self.rational()).collect())
                        .collect();
                    let v: Vec<Q> = (0..n).map(|_| self.rational()).collect();
                    atlas::affine(source, target, &m, &v)
                }
                1 => {
                    let [a, b, c, d] = [0; 4].map(|_| self.rational());
                    if &a * &d == &b * &c || c == Q::from_integer(0.into()) {
                        continue;
                    }
                    let s1 = Chart::new("m1", &["u"], &[]).expect("chart");
                    let s2 = Chart::new("m2", &["v"], &[]).expect("chart");
                    let m = atlas::mobius(&s1, &s2, [a, b, c, d].map(ScalarExpr::from_q)).expect("mobius");
                    // embed the one-dimensional map as the first coordinate
                    let u = s1.var(0).clone();
                    let vv = s2.var(0).clone();
                    let sub_f = crate::symcore::Substitution::new().var(&u, ScalarExpr::var(source.var(0)));
                    let sub_b = crate::symcore::Substitution::new().var(&vv, ScalarExpr::var(target.var(0)));
                    let mut fwd = vec![m.forward()[0].substitute(&sub_f).expect("rename")];
                    let mut bwd = vec![m.backward()[0].substitute(&sub_b).expect("rename")];
                    for i in 1..n {
                        fwd.push(ScalarExpr::var(source.var(i)));
                        bwd.push(ScalarExpr::var(target.var(i)));
                    }
                    Transition::new(source, target, fwd, bwd)
                }
                _ => {
                    let mut p = Vec::with_capacity(n);
                    for i in 0..n {
                        let mut e = ScalarExpr::from_q(self.rational());
                        for j in 0..i {
                            let x = ScalarExpr::var(source.var(j));
                            let k = self.rational();
                            e = e.add(&x.mul(&x).scale(&k).add(&x.scale(&self.rational())));
                        }
                        p.push(e);
                    }
                    atlas::triangular(source, target, &p)
                }
            };
            if let Ok(t) = t {
                return t;
            }
        }
    }

    /// Even chart `x1..xn` with id `id`.
    pub fn even_chart(id: &str, n: usize) -> Chart {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Chart::new(id, &refs, &[]).expect("distinct names")
    }
}
