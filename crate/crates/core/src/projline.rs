//! Weight-2 theory on the line: Sturm–Liouville operators, the Schwarzian
//! derivative and the diffeomorphism cocycle.

use std::collections::BTreeMap;

use crate::atlas::Transition;
use crate::chart::Chart;
use crate::densalg::{DensOp, Density};
use crate::error::{Error, Result};
use crate::groupoid::{arrow_defect, PrincipalSymbol};
use crate::symcore::{q, Pullback, ScalarExpr, Substitution, SuperExpr};

/// Orientation-preserving change of coordinate on the line given by `x = x(y)`.
/// No inverse is needed: opaque symbols follow the chain rule with `dy/dx = 1/x_y`.
#[derive(Clone, Debug)]
pub struct LineDiffeo {
    source: Chart,
    target: Chart,
    x_of_y: ScalarExpr,
    x_y: ScalarExpr,
    pull: Substitution,
}

fn check_line(c: &Chart) -> Result<()> {
    if c.dim_even() != 1 || c.dim_odd() != 0 {
        return Err(Error::Shape(format!("{c} is not a line chart")));
    }
    Ok(())
}

impl LineDiffeo {
    pub fn new(source: &Chart, target: &Chart, x_of_y: ScalarExpr) -> Result<LineDiffeo> {
        check_line(source)?;
        check_line(target)?;
        x_of_y.check_chart(target.id())?;
        let (x, y) = (source.var(0), target.var(0));
        let x_y = x_of_y.diff(y);
        if x_y.is_zero() {
            return Err(Error::NotInvertible(format!("{x_of_y} has zero derivative")));
        }
        let mut inv = BTreeMap::new();
        inv.insert((x.clone(), y.clone()), x_y.inv()?);
        let mut pull = Substitution::new().var(x, x_of_y.clone());
        pull.pullback = Some(Pullback {
            source_chart: source.id().into(),
            target_vars: vec![y.clone()],
            inv_jacobian: inv,
        });
        Ok(LineDiffeo { source: source.clone(), target: target.clone(), x_of_y, x_y, pull })
    }

    pub fn from_transition(t: &Transition) -> Result<LineDiffeo> {
        LineDiffeo::new(t.source(), t.target(), t.backward()[0].clone())
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn x_of_y(&self) -> &ScalarExpr {
        &self.x_of_y
    }

    /// `self` then `next`: `x(y(z))`.
    pub fn then(&self, next: &LineDiffeo) -> Result<LineDiffeo> {
        self.target.check_same(&next.source)?;
        let sub = Substitution::new().var(self.target.var(0), next.x_of_y.clone());
        LineDiffeo::new(&self.source, &next.target, self.x_of_y.substitute(&sub)?)
    }

    pub fn pull(&self, e: &ScalarExpr) -> Result<ScalarExpr> {
        e.substitute(&self.pull)
    }

    /// The same expression with `x` renamed to `y`.
    pub fn rename(&self, e: &ScalarExpr) -> Result<ScalarExpr> {
        let id = LineDiffeo::new(&self.source, &self.target, ScalarExpr::var(self.target.var(0)))?;
        id.pull(e)
    }

    /// `s t^w ↦ (s∘x) x_y^w t'^w`.
    pub fn transport_density(&self, d: &Density) -> Result<Density> {
        d.chart().check_same(&self.source)?;
        let mut out = Density::zero(&self.target);
        for (w, s) in d.terms() {
            let f = self.x_y.rational_pow(w)?;
            let c = s.try_map(|e| self.pull(e))?.scale_scalar(&f);
            out = out.add(&Density::new(&self.target, w.clone(), c))?;
        }
        Ok(out)
    }

    /// `γ_y = x_y γ(x(y)) - x_yy/x_y`.
    pub fn transform_connection(&self, gamma: &ScalarExpr) -> Result<ScalarExpr> {
        let y = self.target.var(0);
        let shift = self.x_y.diff(y).div(&self.x_y)?;
        Ok(self.x_y.mul(&self.pull(gamma)?).sub(&shift))
    }

    /// `S[x(y)] = x_yyy/x_y - 3/2 (x_yy/x_y)²`.
    pub fn schwarzian(&self) -> Result<ScalarExpr> {
        schwarzian_of(&self.x_of_y, self.target.var(0))
    }
}

/// Schwarzian of an expression in one variable.
pub fn schwarzian_of(x: &ScalarExpr, y: &crate::symcore::Var) -> Result<ScalarExpr> {
    let x1 = x.diff(y);
    if x1.is_zero() {
        return Err(Error::NotInvertible(format!("{x} has zero derivative")));
    }
    let x2 = x1.diff(y);
    let x3 = x2.diff(y);
    let r = x2.div(&x1)?;
    Ok(x3.div(&x1)?.sub(&r.mul(&r).scale(&q(3, 2))))
}

fn invariant_symbol(chart: &Chart) -> Result<PrincipalSymbol> {
    PrincipalSymbol::new(chart, q(2, 1), vec![vec![SuperExpr::one()]])
}

/// `U = -¼(γ_x + ½γ²)`, coefficient of `|Dx|²`.
pub fn sturm_potential(chart: &Chart, gamma: &ScalarExpr) -> Result<ScalarExpr> {
    check_line(chart)?;
    let g = gamma.diff(chart.var(0)).add(&gamma.mul(gamma).scale(&q(1, 2)));
    Ok(g.scale(&q(-1, 4)))
}

/// `Ψ t^{-1/2} ↦ (½Ψ'' + UΨ) t^{3/2}`.
pub fn sturm_liouville(chart: &Chart, gamma: &ScalarExpr) -> Result<DensOp> {
    let u = sturm_potential(chart, gamma)?;
    let two = q(2, 1);
    let mut op = DensOp::zero(chart);
    op.add_term(op.key(two.clone(), 0, vec![2], 0), SuperExpr::from_q(q(1, 2)));
    op.add_term(op.key(two, 0, vec![0], 0), SuperExpr::scalar(u));
    Ok(op)
}

/// `c_γ(f) = Δ(γ^f) - Δ(γ)` in the target coordinate, where `γ^f` has the
/// same component formula as `γ` and `γ` itself is transformed by `f`.
pub fn diffeo_cocycle(gamma: &ScalarExpr, f: &LineDiffeo) -> Result<Density> {
    let moved = f.transform_connection(gamma)?;
    let same = f.rename(gamma)?;
    let sym = invariant_symbol(f.target())?;
    let x = vec![SuperExpr::scalar(same.sub(&moved))];
    let d = arrow_defect(&sym, &[SuperExpr::scalar(moved)], &x)?;
    Ok(d.scale(&q(-1, 4)))
}

/// The same cocycle as a literal difference of Sturm–Liouville operators.
pub fn diffeo_cocycle_direct(gamma: &ScalarExpr, f: &LineDiffeo) -> Result<DensOp> {
    let t = f.target();
    sturm_liouville(t, &f.rename(gamma)?)?.sub(&sturm_liouville(t, &f.transform_connection(gamma)?)?)
}

/// `-¼ S[x(y)] |Dy|²`.
pub fn schwarzian_cocycle(f: &LineDiffeo) -> Result<Density> {
    Ok(Density::new(f.target(), q(2, 1), SuperExpr::scalar(f.schwarzian()?.scale(&q(-1, 4)))))
}

/// Möbius map `x = (a y + b)/(c y + d)` as a line diffeomorphism.
pub fn mobius_diffeo(source: &Chart, target: &Chart, [a, b, c, d]: [ScalarExpr; 4]) -> Result<LineDiffeo> {
    let y = ScalarExpr::var(target.var(0));
    LineDiffeo::new(source, target, a.mul(&y).add(&b).div(&c.mul(&y).add(&d))?)
}
