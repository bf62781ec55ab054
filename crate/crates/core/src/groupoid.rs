//! The groupoid of connections with a fixed principal symbol: membership
//! defect, arrows and the cocycle identity.

use num_traits::One;

use crate::chart::Chart;
use crate::densalg::{DensOp, Density};
use crate::error::{Error, Result};
use crate::pencils::{from_connection, singular_specialize, PencilData};
use crate::symcore::{q, ScalarExpr, SuperExpr, Q};

/// Symbol `S^{AB}` of weight `δ` shared by every object of the groupoid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrincipalSymbol {
    pub chart: Chart,
    pub delta: Q,
    pub s: Vec<Vec<SuperExpr>>,
}

impl PrincipalSymbol {
    pub fn new(chart: &Chart, delta: Q, s: Vec<Vec<SuperExpr>>) -> Result<PrincipalSymbol> {
        // validates shape, parity and supersymmetry
        PencilData::new(chart, delta.clone(), s.clone(), vec![SuperExpr::zero(); chart.dim()], SuperExpr::zero())?;
        Ok(PrincipalSymbol { chart: chart.clone(), delta, s })
    }

    fn data(&self, gamma: &[SuperExpr]) -> Result<PencilData> {
        from_connection(&self.chart, self.delta.clone(), self.s.clone(), gamma)
    }

    fn raise(&self, x: &[SuperExpr]) -> Vec<SuperExpr> {
        let n = self.chart.dim();
        (0..n)
            .map(|a| (0..n).fold(SuperExpr::zero(), |acc, b| acc.add(&self.s[a][b].mul(&x[b]))))
            .collect()
    }

    /// `Δ_sing(S, γ)`.
    pub fn singular_operator(&self, gamma: &[SuperExpr]) -> Result<DensOp> {
        Ok(singular_specialize(&self.data(gamma)?))
    }

    fn check(&self, v: &[SuperExpr]) -> Result<()> {
        if v.len() != self.chart.dim() {
            return Err(Error::Shape(format!("covector needs {} components", self.chart.dim())));
        }
        Ok(())
    }
}

fn pair(x: &[SuperExpr], y: &[SuperExpr]) -> SuperExpr {
    x.iter().zip(y).fold(SuperExpr::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
}

/// `div_γ X + (δ-1)/2 X²` with `X^A = S^{AB}X_B`, i.e.
/// `±∂_A X^A + (δ-1)/2 (γ·SX + X·Sγ + X·SX)`; on even charts the bracket is
/// `2γ_aX^a + X_aS^{ab}X_b`.
pub fn arrow_defect(sym: &PrincipalSymbol, gamma: &[SuperExpr], x: &[SuperExpr]) -> Result<Density> {
    sym.check(gamma)?;
    sym.check(x)?;
    let c = &sym.chart;
    let p = sym.data(x)?;
    let up = &p.gamma;
    let mut div = SuperExpr::zero();
    for a in 0..c.dim() {
        let t = c.partial(&up[a], a);
        div = if p.sign(a) { div.sub(&t) } else { div.add(&t) };
    }
    let cross = pair(gamma, up).add(&pair(x, &sym.raise(gamma))).add(&p.theta);
    let half = (&sym.delta - Q::one()) / Q::from_integer(2.into());
    Ok(Density::new(c, sym.delta.clone(), div.add(&cross.scale(&half))))
}

/// `(1-δ)/4` times the defect of `γ → γ'`.
pub fn operator_difference(sym: &PrincipalSymbol, gamma: &[SuperExpr], gamma2: &[SuperExpr]) -> Result<Density> {
    let x = difference(gamma2, gamma);
    Ok(arrow_defect(sym, gamma, &x)?.scale(&((Q::one() - &sym.delta) / Q::from_integer(4.into()))))
}

/// `Δ_sing(S, γ') - Δ_sing(S, γ)` computed on operators.
pub fn operator_difference_direct(sym: &PrincipalSymbol, gamma: &[SuperExpr], gamma2: &[SuperExpr]) -> Result<DensOp> {
    sym.singular_operator(gamma2)?.sub(&sym.singular_operator(gamma)?)
}

fn difference(a: &[SuperExpr], b: &[SuperExpr]) -> Vec<SuperExpr> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

/// Outcome of both membership tests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub by_defect: bool,
    pub by_operator: bool,
    pub witness: Density,
}

impl Membership {
    pub fn is_arrow(&self) -> bool {
        self.by_defect && self.by_operator
    }

    pub fn agree(&self) -> bool {
        self.by_defect == self.by_operator
    }
}

/// Whether `γ → γ'` is an arrow: zero defect, and equal singular operators.
/// At `δ = 1` every pair is an arrow.
pub fn is_arrow(sym: &PrincipalSymbol, gamma: &[SuperExpr], gamma2: &[SuperExpr]) -> Result<Membership> {
    let witness = arrow_defect(sym, gamma, &difference(gamma2, gamma))?;
    let by_defect = sym.delta.is_one() || witness.is_zero();
    let by_operator = operator_difference_direct(sym, gamma, gamma2)?.is_zero();
    Ok(Membership { by_defect, by_operator, witness })
}

/// `defect(γ, X) + defect(γ+X, Y) - defect(γ, X+Y)`; zero when arrows compose.
pub fn cocycle_residual(sym: &PrincipalSymbol, gamma: &[SuperExpr], x: &[SuperExpr], y: &[SuperExpr]) -> Result<Density> {
    let gx: Vec<SuperExpr> = gamma.iter().zip(x).map(|(a, b)| a.add(b)).collect();
    let xy: Vec<SuperExpr> = x.iter().zip(y).map(|(a, b)| a.add(b)).collect();
    arrow_defect(sym, gamma, x)?
        .add(&arrow_defect(sym, &gx, y)?)?
        .sub(&arrow_defect(sym, gamma, &xy)?)
}

/// A verified arrow `γ → γ'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub sym: PrincipalSymbol,
    pub source: Vec<SuperExpr>,
    pub target: Vec<SuperExpr>,
}

impl Arrow {
    pub fn new(sym: &PrincipalSymbol, source: Vec<SuperExpr>, target: Vec<SuperExpr>) -> Result<Arrow> {
        let m = is_arrow(sym, &source, &target)?;
        if !m.agree() {
            return Err(Error::Invalid(format!("membership tests disagree; defect {}", m.witness.render())));
        }
        if !m.is_arrow() {
            return Err(Error::Invalid(format!("not an arrow; defect {}", m.witness.render())));
        }
        Ok(Arrow { sym: sym.clone(), source, target })
    }

    pub fn identity(sym: &PrincipalSymbol, gamma: Vec<SuperExpr>) -> Result<Arrow> {
        Arrow::new(sym, gamma.clone(), gamma)
    }

    /// `X = γ' - γ`.
    pub fn covector(&self) -> Vec<SuperExpr> {
        difference(&self.target, &self.source)
    }

    pub fn inverse(&self) -> Result<Arrow> {
        Arrow::new(&self.sym, self.target.clone(), self.source.clone())
    }

    pub fn then(&self, next: &Arrow) -> Result<Arrow> {
        if self.target != next.source {
            return Err(Error::Invalid("arrows are not composable".into()));
        }
        Arrow::new(&self.sym, self.source.clone(), next.target.clone())
    }
}

/// On the line with `S = 1`, `δ = 2`, `γ = 0`: `X = 2/(C+x)`.
pub fn line_family(chart: &Chart, c: &ScalarExpr) -> Result<(PrincipalSymbol, Vec<SuperExpr>)> {
    if chart.dim_even() != 1 || chart.dim_odd() != 0 {
        return Err(Error::Shape("line family lives on a one-dimensional chart".into()));
    }
    let x = ScalarExpr::from_q(q(2, 1)).div(&c.add(&ScalarExpr::var(chart.var(0))))?;
    let sym = PrincipalSymbol::new(chart, q(2, 1), vec![vec![SuperExpr::one()]])?;
    Ok((sym, vec![SuperExpr::scalar(x)]))
}
