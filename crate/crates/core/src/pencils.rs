//! Canonical self-adjoint second-order operators on densities and the pencils
//! they define.

use num_traits::{One, Zero};

use crate::chart::Chart;
use crate::densalg::{lie_derivative, DensOp, Density, OpKey};
use crate::error::{Error, Result};
use crate::symcore::{q, ScalarExpr, Substitution, SuperExpr, Symbol, Q};

/// The formal pencil parameter.
pub fn lambda() -> Symbol {
    Symbol::constant("λ")
}

pub fn lambda_expr() -> ScalarExpr {
    ScalarExpr::symbol(&lambda())
}

/// `(S, γ^A, θ, δ)` on one chart. `parity` is the parity of the tensor `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PencilData {
    pub chart: Chart,
    pub delta: Q,
    pub parity: u32,
    pub s: Vec<Vec<SuperExpr>>,
    pub gamma: Vec<SuperExpr>,
    pub theta: SuperExpr,
}

fn ensure_parity(e: &SuperExpr, p: u32, what: &str) -> Result<()> {
    match e.parity() {
        Some(x) if e.is_zero() || x == p => Ok(()),
        _ => Err(Error::Parity(format!("{what} = {e} should have parity {p}"))),
    }
}

impl PencilData {
    pub fn new(
        chart: &Chart,
        delta: Q,
        s: Vec<Vec<SuperExpr>>,
        gamma: Vec<SuperExpr>,
        theta: SuperExpr,
    ) -> Result<PencilData> {
        let n = chart.dim();
        if s.len() != n || s.iter().any(|r| r.len() != n) || gamma.len() != n {
            return Err(Error::Shape(format!("pencil data must be {n}x{n} and {n}")));
        }
        let mut parity = None;
        for (a, row) in s.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                if e.is_zero() {
                    continue;
                }
                let p = e
                    .parity()
                    .ok_or_else(|| Error::Parity(format!("S^{a}{b} is not homogeneous")))?;
                let ps = (p + chart.parity(a) + chart.parity(b)) % 2;
                if *parity.get_or_insert(ps) != ps {
                    return Err(Error::Parity("components of S disagree on parity".into()));
                }
            }
        }
        // a zero S leaves the parity to γ and θ
        let parity = parity
            .or_else(|| {
                (0..n)
                    .find(|&a| !gamma[a].is_zero())
                    .and_then(|a| gamma[a].parity().map(|p| (p + chart.parity(a)) % 2))
            })
            .or_else(|| theta.parity().filter(|_| !theta.is_zero()))
            .unwrap_or(0);
        for a in 0..n {
            for b in 0..n {
                let sym = if chart.parity(a) * chart.parity(b) == 1 {
                    s[b][a].neg()
                } else {
                    s[b][a].clone()
                };
                if s[a][b] != sym {
                    return Err(Error::Invalid(format!("S is not supersymmetric at ({a},{b})")));
                }
            }
            ensure_parity(&gamma[a], (parity + chart.parity(a)) % 2, "γ^A")?;
        }
        ensure_parity(&theta, parity, "θ")?;
        Ok(PencilData {
            chart: chart.clone(),
            delta,
            parity,
            s,
            gamma,
            theta,
        })
    }

    pub fn zero(chart: &Chart, delta: Q) -> PencilData {
        let n = chart.dim();
        PencilData {
            chart: chart.clone(),
            delta,
            parity: 0,
            s: vec![vec![SuperExpr::zero(); n]; n],
            gamma: vec![SuperExpr::zero(); n],
            theta: SuperExpr::zero(),
        }
    }

    /// `(-1)^{p(A)(p(S)+1)}`.
    pub(crate) fn sign(&self, a: usize) -> bool {
        self.chart.parity(a) * (self.parity + 1) % 2 == 1
    }

    /// `Σ_B (-1)^{p(B)(p(S)+1)} ∂_B S^{BA}`.
    pub fn signed_div_s(&self, a: usize) -> SuperExpr {
        let mut acc = SuperExpr::zero();
        for b in 0..self.chart.dim() {
            let t = self.chart.partial(&self.s[b][a], b);
            acc = if self.sign(b) { acc.sub(&t) } else { acc.add(&t) };
        }
        acc
    }

    /// `Σ_B ∂_B S^{BA}`.
    pub fn div_s(&self, a: usize) -> SuperExpr {
        let mut acc = SuperExpr::zero();
        for b in 0..self.chart.dim() {
            acc = acc.add(&self.chart.partial(&self.s[b][a], b));
        }
        acc
    }
}

fn mult(chart: &Chart, w: &Q, s: &SuperExpr) -> DensOp {
    DensOp::multiplication(&Density::new(chart, w.clone(), s.clone()))
}

/// `t^δ/2 (S^{AB}∂_B∂_A ± ∂_BS^{BA}∂_A + (2λ̂+δ-1)γ^A∂_A ± λ̂∂_Aγ^A + λ̂(λ̂+δ-1)θ)`
/// with sign `(-1)^{p(A)(p(S)+1)}`.
pub fn canonical_operator(p: &PencilData) -> DensOp {
    let c = &p.chart;
    let n = c.dim();
    let zero = Q::zero();
    let lam = DensOp::lambda_hat(c);
    let id = DensOp::identity(c);
    let mut acc = DensOp::zero(c);
    let d: Vec<DensOp> = (0..n).map(|a| DensOp::partial(c, a)).collect();
    let flip = |neg: bool, op: DensOp| if neg { op.neg() } else { op };
    for a in 0..n {
        for b in 0..n {
            if !p.s[a][b].is_zero() {
                let t = mult(c, &zero, &p.s[a][b]).compose(&d[b]).unwrap().compose(&d[a]).unwrap();
                acc = acc.add(&t).unwrap();
            }
        }
        let ds = p.signed_div_s(a);
        if !ds.is_zero() {
            let t = mult(c, &zero, &ds).compose(&d[a]).unwrap();
            acc = acc.add(&t).unwrap();
        }
        if !p.gamma[a].is_zero() {
            let coef = lam.scale(&q(2, 1)).add(&id.scale(&(&p.delta - Q::one()))).unwrap();
            let t = coef.compose(&mult(c, &zero, &p.gamma[a])).unwrap().compose(&d[a]).unwrap();
            acc = acc.add(&t).unwrap();
            let dg = c.partial(&p.gamma[a], a);
            let t = lam.compose(&mult(c, &zero, &dg)).unwrap();
            acc = acc.add(&flip(p.sign(a), t)).unwrap();
        }
    }
    if !p.theta.is_zero() {
        let shifted = lam.add(&id.scale(&(&p.delta - Q::one()))).unwrap();
        let t = lam.compose(&shifted).unwrap().compose(&mult(c, &zero, &p.theta)).unwrap();
        acc = acc.add(&t).unwrap();
    }
    mult(c, &p.delta, &SuperExpr::from_q(q(1, 2))).compose(&acc).unwrap()
}

/// `Δ_λ`: the canonical operator with `λ̂` replaced by the formal parameter.
pub fn pencil(p: &PencilData) -> DensOp {
    canonical_operator(p).at_weight(&lambda_expr())
}

/// Substitute a value for the formal parameter.
pub fn evaluate(op: &DensOp, value: &ScalarExpr) -> Result<DensOp> {
    op.substitute_scalars(&Substitution::new().constant(&lambda(), value.clone()))
}

/// `(Δ_λ)⁺ - Δ_{1-λ-δ}`; zero exactly when the pencil is self-adjoint.
pub fn self_adjoint_defect(p: &PencilData) -> Result<DensOp> {
    let pen = pencil(p);
    let dual = ScalarExpr::one()
        .sub(&lambda_expr())
        .sub(&ScalarExpr::from_q(p.delta.clone()));
    let rhs = evaluate(&pen, &dual)?;
    pen.adjoint().sub(&rhs)
}

/// `γ^A = S^{AB}γ_B`, `θ = γ_A S^{AB} γ_B`.
pub fn from_connection(
    chart: &Chart,
    delta: Q,
    s: Vec<Vec<SuperExpr>>,
    gamma_lower: &[SuperExpr],
) -> Result<PencilData> {
    let n = chart.dim();
    if gamma_lower.len() != n {
        return Err(Error::Shape(format!("connection needs {n} components")));
    }
    let upper: Vec<SuperExpr> = (0..n)
        .map(|a| {
            (0..n).fold(SuperExpr::zero(), |acc, b| acc.add(&s[a][b].mul(&gamma_lower[b])))
        })
        .collect();
    let mut theta = SuperExpr::zero();
    for a in 0..n {
        theta = theta.add(&gamma_lower[a].mul(&upper[a]));
    }
    PencilData::new(chart, delta, s, upper, theta)
}

/// Coefficients `(A^{ab}, A^a, A)` of `A^{ab}∂_a∂_b + A^a∂_a + A` on an even chart,
/// with `A^{ab}` symmetric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondOrder {
    pub a2: Vec<Vec<ScalarExpr>>,
    pub a1: Vec<ScalarExpr>,
    pub a0: ScalarExpr,
}

impl SecondOrder {
    /// Read off a `λ̂`-free operator of homogeneous weight; returns the weight too.
    pub fn from_op(op: &DensOp) -> Result<(SecondOrder, Q)> {
        let c = op.chart();
        if c.dim_odd() > 0 {
            return Err(Error::Unsupported("coefficient form needs an even chart".into()));
        }
        let n = c.dim_even();
        let w = op.weight().unwrap_or_else(Q::zero);
        if !op.is_zero() && op.weight().is_none() {
            return Err(Error::NonHomogeneous);
        }
        let mut out = SecondOrder {
            a2: vec![vec![ScalarExpr::zero(); n]; n],
            a1: vec![ScalarExpr::zero(); n],
            a0: ScalarExpr::zero(),
        };
        for (k, v) in op.terms() {
            if k.k != 0 || k.order() > 2 {
                return Err(Error::Invalid(format!(
                    "expected a second-order operator without λ̂, got {op}"
                )));
            }
            let v = v.as_scalar().expect("even chart");
            let idx: Vec<usize> = (0..n).flat_map(|a| std::iter::repeat(a).take(k.alpha[a] as usize)).collect();
            match idx.as_slice() {
                [] => out.a0 = v,
                [a] => out.a1[*a] = v,
                [a, b] if a == b => out.a2[*a][*a] = v,
                [a, b] => {
                    let h = v.scale(&q(1, 2));
                    out.a2[*a][*b] = h.clone();
                    out.a2[*b][*a] = h;
                }
                _ => unreachable!(),
            }
        }
        Ok((out, w))
    }

    pub fn to_op(&self, chart: &Chart, delta: &Q) -> DensOp {
        let n = chart.dim_even();
        let mut op = DensOp::zero(chart);
        let mut add = |alpha: Vec<u32>, v: ScalarExpr| {
            let key = OpKey {
                w: delta.clone(),
                k: 0,
                alpha,
                beta: 0,
            };
            op.add_term(key, SuperExpr::scalar(v));
        };
        for a in 0..n {
            for b in 0..n {
                let mut alpha = vec![0; n];
                alpha[a] += 1;
                alpha[b] += 1;
                add(alpha, self.a2[a][b].clone());
            }
            let mut alpha = vec![0; n];
            alpha[a] = 1;
            add(alpha, self.a1[a].clone());
        }
        add(vec![0; n], self.a0.clone());
        op
    }
}

/// The three exceptional weights `λ = 0`, `λ+δ = 1`, `2λ+δ = 1`.
pub fn check_admissible(l: &Q, delta: &Q) -> Result<()> {
    if l.is_zero() || (l + delta).is_one() || (l * Q::from_integer(2.into()) + delta).is_one() {
        return Err(Error::ExceptionalWeight(format!(
            "λ = {l} is exceptional for δ = {delta}"
        )));
    }
    Ok(())
}

/// Solve for the unique normalized self-adjoint pencil through `Δ` at `λ₀`.
pub fn pencil_from_operator(op: &DensOp, l0: &Q, delta: &Q) -> Result<PencilData> {
    check_admissible(l0, delta)?;
    let chart = op.chart();
    let n = chart.dim_even();
    let op = op.at_weight(&ScalarExpr::from_q(l0.clone()));
    if !op.is_zero() && op.weight() != Some(delta.clone()) {
        return Err(Error::Invalid(format!("operator does not have weight {delta}")));
    }
    let (a, _) = SecondOrder::from_op(&op)?;
    let s: Vec<Vec<SuperExpr>> = a
        .a2
        .iter()
        .map(|r| r.iter().map(|v| SuperExpr::scalar(v.scale(&q(2, 1)))).collect())
        .collect();
    let mut pd = PencilData::new(chart, delta.clone(), s, vec![SuperExpr::zero(); n], SuperExpr::zero())?;
    let two = Q::from_integer(2.into());
    let c1 = (&two * l0 + delta - Q::one()).recip();
    for b in 0..n {
        let g = SuperExpr::scalar(a.a1[b].scale(&two)).sub(&pd.div_s(b)).scale(&c1);
        pd.gamma[b] = g;
    }
    let mut div_g = SuperExpr::zero();
    for b in 0..n {
        div_g = div_g.add(&chart.partial(&pd.gamma[b], b));
    }
    let c2 = (l0 * (l0 + delta - Q::one())).recip();
    pd.theta = SuperExpr::scalar(a.a0.scale(&two)).sub(&div_g.scale(l0)).scale(&c2);
    Ok(pd)
}

fn check_do_weight(l: &Q) -> Result<()> {
    let h = q(1, 2);
    if l.is_zero() || l.is_one() || *l == h {
        return Err(Error::ExceptionalWeight(format!("λ = {l} is one of 0, 1/2, 1")));
    }
    Ok(())
}

/// `[(2μ-1)/(2λ-1), 2(λ-μ)/(2λ-1), μ(μ-1)/(λ(λ-1)), μ(λ-μ)/((2λ-1)(λ-1))]`.
pub fn do_coefficients(l: &Q, m: &Q) -> Result<[Q; 4]> {
    check_do_weight(l)?;
    check_do_weight(m)?;
    let one = Q::one();
    let two = Q::from_integer(2.into());
    let tl = &two * l - &one;
    Ok([
        (&two * m - &one) / &tl,
        &two * (l - m) / &tl,
        m * (m - &one) / (l * (l - &one)),
        m * (l - m) / (&tl * (l - &one)),
    ])
}

/// The intertwining map `φ_{λμ}` on operators acting on functions-weight densities.
pub fn duval_ovsienko(chart: &Chart, a: &SecondOrder, l: &Q, m: &Q) -> Result<SecondOrder> {
    let [c1, c2, c3, c4] = do_coefficients(l, m)?;
    let n = chart.dim_even();
    let v = |i: usize| chart.var(i).clone();
    let mut b1 = Vec::with_capacity(n);
    for i in 0..n {
        let mut div = ScalarExpr::zero();
        for j in 0..n {
            div = div.add(&a.a2[j][i].diff(&v(j)));
        }
        b1.push(a.a1[i].scale(&c1).add(&div.scale(&c2)));
    }
    let mut da = ScalarExpr::zero();
    for j in 0..n {
        da = da.add(&a.a1[j].diff(&v(j)));
        for i in 0..n {
            da = da.sub(&a.a2[i][j].diff(&v(j)).diff(&v(i)));
        }
    }
    Ok(SecondOrder {
        a2: a.a2.clone(),
        a1: b1,
        a0: a.a0.scale(&c3).add(&da.scale(&c4)),
    })
}

/// The exceptional weight `(1-δ)/2`.
pub fn singular_weight(delta: &Q) -> Q {
    (Q::one() - delta) / Q::from_integer(2.into())
}

/// `Δ_sing = t^δ/2 (S∂∂ + ∂S∂ + (1-δ)/2 (∂_Aγ^A + (δ-1)/2 θ))`, the pencil at `(1-δ)/2`.
pub fn singular_specialize(p: &PencilData) -> DensOp {
    let mut q0 = p.clone();
    q0.gamma = vec![SuperExpr::zero(); p.chart.dim()];
    q0.theta = SuperExpr::zero();
    let second = canonical_operator(&q0).at_weight(&ScalarExpr::zero());
    let u = pseudoscalar_part(p);
    second.add(&DensOp::multiplication(&u)).expect("same chart")
}

/// `U = (1-δ)/4 (∂_Aγ^A + (δ-1)/2 θ) t^δ`.
pub fn pseudoscalar_part(p: &PencilData) -> Density {
    let c = &p.chart;
    let mut div = SuperExpr::zero();
    for a in 0..c.dim() {
        let t = c.partial(&p.gamma[a], a);
        div = if p.sign(a) { div.sub(&t) } else { div.add(&t) };
    }
    let one = Q::one();
    let inner = div.add(&p.theta.scale(&((&p.delta - &one) / Q::from_integer(2.into()))));
    let s = inner.scale(&((&one - &p.delta) / Q::from_integer(4.into())));
    Density::new(c, p.delta.clone(), s)
}

/// `γ^a = ∂_bS^{ab} - T^a` for `Δ = ½(S^{ab}∂_a∂_b + T^a∂_a + R)` on functions.
pub fn subprincipal_upper_connection(op: &DensOp) -> Result<Vec<ScalarExpr>> {
    let (a, _) = SecondOrder::from_op(&op.at_weight(&ScalarExpr::zero()))?;
    let c = op.chart();
    let n = c.dim_even();
    Ok((0..n)
        .map(|i| {
            let mut acc = a.a1[i].scale(&q(-2, 1));
            for j in 0..n {
                acc = acc.add(&a.a2[i][j].scale(&q(2, 1)).diff(c.var(j)));
            }
            acc
        })
        .collect())
}

/// `ρ^p ∘ Δ ∘ ρ^q` for a single-term density `ρ = r t^w` with invertible `r`.
pub fn conjugate_by_density(op: &DensOp, rho: &Density, p: &Q, q_: &Q) -> Result<DensOp> {
    let (w, r) = match rho.terms().iter().next() {
        Some((w, r)) if rho.terms().len() == 1 => (w.clone(), r.clone()),
        _ => return Err(Error::NotInvertible(format!("{rho} is not a single-term density"))),
    };
    let r = r
        .as_scalar()
        .ok_or_else(|| Error::NotInvertible(format!("{rho} has a nilpotent part")))?;
    if r.is_zero() {
        return Err(Error::NotInvertible("zero density".into()));
    }
    let c = op.chart();
    let left = mult(c, &(&w * p), &SuperExpr::scalar(r.rational_pow(p)?));
    let right = mult(c, &(&w * q_), &SuperExpr::scalar(r.rational_pow(q_)?));
    left.compose(op)?.compose(&right)
}

/// `r^e ∘ Δ ∘ r^{-e}` for an even invertible function `r` and a symbolic exponent `e`,
/// through `r^e ∂_A r^{-e} = ∂_A - e (∂_A r)/r`.
pub fn conjugate_by_power(op: &DensOp, r: &SuperExpr, e: &ScalarExpr) -> Result<DensOp> {
    let c = op.chart();
    if r.parity() != Some(0) {
        return Err(Error::Parity("conjugating function must be even".into()));
    }
    let rinv = r.inv()?;
    let gens: Vec<DensOp> = (0..c.dim())
        .map(|a| {
            let g = c.partial(r, a).mul(&rinv).scale_scalar(e);
            DensOp::partial(c, a).sub(&DensOp::scalar(c, g)).expect("same chart")
        })
        .collect();
    let n = c.dim_even();
    let mut out = DensOp::zero(c);
    for (k, v) in op.terms() {
        let mut t = DensOp::term(
            c,
            OpKey {
                w: k.w.clone(),
                k: k.k,
                alpha: vec![0; n],
                beta: 0,
            },
            v.clone(),
        );
        for (a, &ea) in k.alpha.iter().enumerate() {
            for _ in 0..ea {
                t = t.compose(&gens[a])?;
            }
        }
        for i in 0..c.dim_odd() {
            if k.beta & (1 << i) != 0 {
                t = t.compose(&gens[n + i])?;
            }
        }
        out = out.add(&t)?;
    }
    Ok(out)
}

/// `½ (L_X L_Y + L_Y L_X)` for weight-0 vector fields.
pub fn symmetrized_lie_square(chart: &Chart, x: &[SuperExpr], y: &[SuperExpr]) -> Result<DensOp> {
    let lx = lie_derivative(chart, x, &Q::zero())?.to_op();
    let ly = lie_derivative(chart, y, &Q::zero())?.to_op();
    Ok(lx.compose(&ly)?.add(&ly.compose(&lx)?)?.scale(&q(1, 2)))
}
