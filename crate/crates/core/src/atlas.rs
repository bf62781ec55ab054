//! Rational transitions between even charts and the transport of densities,
//! operators, pencil data and connections along them.

use std::collections::BTreeMap;

use num_traits::One;

use crate::chart::Chart;
use crate::densalg::{DensOp, Density};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::pencils::PencilData;
use crate::symcore::{q, Pullback, ScalarExpr, Substitution, SuperExpr, Q};

/// Invertible coordinate change `x ↦ x'(x)` with inverse `x'(x) ↦ x`.
///
/// Derived data is kept in target variables: `jac[a'][a] = ∂x'^{a'}/∂x^a`,
/// `inv_jac[a][a'] = ∂x^a/∂x'^{a'}`, `J = det(∂x'/∂x)` and `∂_a log J = J_a/J`.
#[derive(Clone, Debug)]
pub struct Transition {
    source: Chart,
    target: Chart,
    forward: Vec<ScalarExpr>,
    backward: Vec<ScalarExpr>,
    jac: Matrix,
    inv_jac: Matrix,
    j: ScalarExpr,
    dlog_j: Vec<ScalarExpr>,
    pull: Substitution,
}

fn var_sub(chart: &Chart, images: &[ScalarExpr]) -> Substitution {
    chart
        .even()
        .iter()
        .zip(images)
        .fold(Substitution::new(), |s, (v, e)| s.var(v, e.clone()))
}

impl Transition {
    /// Builds the transition and checks both round trips symbolically.
    pub fn new(
        source: &Chart,
        target: &Chart,
        forward: Vec<ScalarExpr>,
        backward: Vec<ScalarExpr>,
    ) -> Result<Transition> {
        let n = source.dim_even();
        if source.dim_odd() + target.dim_odd() > 0 {
            return Err(Error::Transition("transitions act on even charts".into()));
        }
        if target.dim_even() != n || forward.len() != n || backward.len() != n {
            return Err(Error::Shape(format!("transition {source} -> {target} needs {n} components")));
        }
        for e in &forward {
            e.check_chart(source.id())?;
        }
        for e in &backward {
            e.check_chart(target.id())?;
        }
        let to_target = var_sub(source, &backward);
        let to_source = var_sub(target, &forward);
        for (i, f) in forward.iter().enumerate() {
            if f.substitute(&to_target)? != ScalarExpr::var(target.var(i)) {
                return Err(Error::Transition(format!(
                    "{} does not invert {}",
                    backward_text(&backward),
                    f
                )));
            }
        }
        for (i, b) in backward.iter().enumerate() {
            if b.substitute(&to_source)? != ScalarExpr::var(source.var(i)) {
                return Err(Error::Transition(format!("{b} is not inverted by the forward map")));
            }
        }
        let jac_src: Matrix = forward
            .iter()
            .map(|f| source.even().iter().map(|v| f.diff(v)).collect())
            .collect();
        let j_src = linalg::det(&jac_src)?;
        if j_src.is_zero() {
            return Err(Error::NotInvertible("Jacobian vanishes identically".into()));
        }
        let jac = jac_src
            .iter()
            .map(|r| r.iter().map(|e| e.substitute(&to_target)).collect())
            .collect::<Result<Matrix>>()?;
        let j = j_src.substitute(&to_target)?;
        let dlog_j = source
            .even()
            .iter()
            .map(|v| j_src.diff(v).div(&j_src)?.substitute(&to_target))
            .collect::<Result<Vec<_>>>()?;
        let inv_jac = backward
            .iter()
            .map(|b| target.even().iter().map(|v| b.diff(v)).collect())
            .collect();
        let mut inv_map = BTreeMap::new();
        for (a, x) in source.even().iter().enumerate() {
            for (b, y) in target.even().iter().enumerate() {
                inv_map.insert((x.clone(), y.clone()), jac[b][a].clone());
            }
        }
        let mut pull = to_target;
        pull.pullback = Some(Pullback {
            source_chart: source.id().into(),
            target_vars: target.even().to_vec(),
            inv_jacobian: inv_map,
        });
        Ok(Transition {
            source: source.clone(),
            target: target.clone(),
            forward,
            backward,
            jac,
            inv_jac,
            j,
            dlog_j,
            pull,
        })
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn forward(&self) -> &[ScalarExpr] {
        &self.forward
    }

    pub fn backward(&self) -> &[ScalarExpr] {
        &self.backward
    }

    /// `∂x'^{a'}/∂x^a` in target variables, indexed `[a'][a]`.
    pub fn jacobian(&self) -> &Matrix {
        &self.jac
    }

    /// `∂x^a/∂x'^{a'}` in target variables, indexed `[a][a']`.
    pub fn inverse_jacobian(&self) -> &Matrix {
        &self.inv_jac
    }

    /// `J = det(∂x'/∂x)` in target variables.
    pub fn det(&self) -> &ScalarExpr {
        &self.j
    }

    /// `∂_a log J` (source index) in target variables.
    pub fn dlog_det(&self) -> &[ScalarExpr] {
        &self.dlog_j
    }

    pub fn inverse(&self) -> Result<Transition> {
        Transition::new(&self.target, &self.source, self.backward.clone(), self.forward.clone())
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Transition) -> Result<Transition> {
        self.target.check_same(&next.source)?;
        let fwd = var_sub(&next.source, &self.forward);
        let bwd = var_sub(&self.target, &next.backward);
        let forward = next.forward.iter().map(|e| e.substitute(&fwd)).collect::<Result<_>>()?;
        let backward = self.backward.iter().map(|e| e.substitute(&bwd)).collect::<Result<_>>()?;
        Transition::new(&self.source, &next.target, forward, backward)
    }

    /// Rewrite a source expression in target variables; opaque symbols keep
    /// their names and their derivative atoms follow the chain rule.
    pub fn pull(&self, e: &ScalarExpr) -> Result<ScalarExpr> {
        e.substitute(&self.pull)
    }

    pub fn pull_super(&self, e: &SuperExpr) -> Result<SuperExpr> {
        e.substitute_scalars(&self.pull)
    }

    /// `J^w`.
    pub fn det_power(&self, w: &Q) -> Result<ScalarExpr> {
        self.j.rational_pow(w)
    }

    /// `s(x) t^w ↦ s(x(x')) J^{-w} t'^w`.
    pub fn transport_density(&self, d: &Density) -> Result<Density> {
        d.chart().check_same(&self.source)?;
        let mut out = Density::zero(&self.target);
        for (w, s) in d.terms() {
            let c = self.pull_super(s)?.scale_scalar(&self.det_power(&-w.clone())?);
            out = out.add(&Density::new(&self.target, w.clone(), c))?;
        }
        Ok(out)
    }

    /// Image of `∂_a`: `x^{b'}_a ∂_{b'} + (J_a/J) λ̂`.
    fn partial_image(&self, a: usize) -> DensOp {
        let t = &self.target;
        let dl = &self.dlog_j[a];
        let mut op = DensOp::lambda_hat(t).map(|c| c.scale_scalar(dl));
        for b in 0..t.dim() {
            let j = &self.jac[b][a];
            let dd = DensOp::partial(t, b).map(|c| c.scale_scalar(j));
            op = op.add(&dd).expect("same chart");
        }
        op
    }

    /// Chain-rule pushforward: `f ↦ f∘x`, `t^w ↦ t'^w J^{-w}`, `λ̂ ↦ λ̂`,
    /// `∂_a ↦ x^{b'}_a ∂_{b'} + (J_a/J) λ̂`.
    pub fn transform_operator(&self, op: &DensOp) -> Result<DensOp> {
        op.chart().check_same(&self.source)?;
        let t = &self.target;
        let dims = self.source.dim();
        let images: Vec<DensOp> = (0..dims).map(|a| self.partial_image(a)).collect();
        let mut powers: BTreeMap<(usize, u32), DensOp> = BTreeMap::new();
        let mut power = |a: usize, e: u32| -> Result<DensOp> {
            if let Some(p) = powers.get(&(a, e)) {
                return Ok(p.clone());
            }
            let mut p = DensOp::identity(t);
            for _ in 0..e {
                p = p.compose(&images[a])?;
            }
            powers.insert((a, e), p.clone());
            Ok(p)
        };
        let lam = DensOp::lambda_hat(t);
        let mut out = DensOp::zero(t);
        for (key, c) in op.terms() {
            let coef = self.pull_super(c)?.scale_scalar(&self.det_power(&-key.w.clone())?);
            let mut term = DensOp::multiplication(&Density::new(t, key.w.clone(), coef));
            for _ in 0..key.k {
                term = term.compose(&lam)?;
            }
            for (a, &e) in key.alpha.iter().enumerate() {
                if e > 0 {
                    term = term.compose(&power(a, e)?)?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Component laws for `(S, γ^a, θ)` of weight `δ`.
    pub fn transform_pencil_data(&self, p: &PencilData) -> Result<PencilData> {
        p.chart.check_same(&self.source)?;
        let n = self.source.dim();
        let pull = |e: &SuperExpr| self.pull(&e.body());
        let s: Matrix = p.s.iter().map(|r| r.iter().map(pull).collect()).collect::<Result<_>>()?;
        let g: Vec<ScalarExpr> = p.gamma.iter().map(pull).collect::<Result<_>>()?;
        let theta = pull(&p.theta)?;
        let jd = self.det_power(&-p.delta.clone())?;
        let dl = &self.dlog_j;
        let sum = |f: &dyn Fn(usize) -> ScalarExpr| (0..n).fold(ScalarExpr::zero(), |acc, i| acc.add(&f(i)));
        let s_dl: Vec<ScalarExpr> = (0..n).map(|a| sum(&|b| s[a][b].mul(&dl[b]))).collect();
        let mut s2 = vec![vec![SuperExpr::zero(); n]; n];
        for (ap, row) in s2.iter_mut().enumerate() {
            for (bp, slot) in row.iter_mut().enumerate() {
                let v = sum(&|a| sum(&|b| self.jac[ap][a].mul(&self.jac[bp][b]).mul(&s[a][b])));
                *slot = SuperExpr::scalar(jd.mul(&v));
            }
        }
        let g2 = (0..n)
            .map(|ap| SuperExpr::scalar(jd.mul(&sum(&|a| self.jac[ap][a].mul(&g[a].add(&s_dl[a]))))))
            .collect();
        let t2 = theta
            .add(&sum(&|a| g[a].mul(&dl[a])).scale(&q(2, 1)))
            .add(&sum(&|a| dl[a].mul(&s_dl[a])));
        PencilData::new(&self.target, p.delta.clone(), s2, g2, SuperExpr::scalar(jd.mul(&t2)))
    }

    /// `γ'_{a'} = x^a_{a'}(γ_a + ∂_a log J)`.
    pub fn transform_connection(&self, gamma: &[ScalarExpr]) -> Result<Vec<ScalarExpr>> {
        let shifted: Vec<ScalarExpr> = gamma
            .iter()
            .map(|g| self.pull(g))
            .zip(&self.dlog_j)
            .map(|(g, d)| g.map(|g| g.add(d)))
            .collect::<Result<_>>()?;
        self.contract_covector(&shifted)
    }

    /// Plain covector law `X'_{a'} = x^a_{a'} X_a`.
    pub fn transform_covector(&self, x: &[ScalarExpr]) -> Result<Vec<ScalarExpr>> {
        let pulled: Vec<ScalarExpr> = x.iter().map(|e| self.pull(e)).collect::<Result<_>>()?;
        self.contract_covector(&pulled)
    }

    fn contract_covector(&self, x: &[ScalarExpr]) -> Result<Vec<ScalarExpr>> {
        let n = self.source.dim();
        if x.len() != n {
            return Err(Error::Shape(format!("covector needs {n} components")));
        }
        Ok((0..n)
            .map(|ap| (0..n).fold(ScalarExpr::zero(), |acc, a| acc.add(&self.inv_jac[a][ap].mul(&x[a]))))
            .collect())
    }
}

/// `x' = (a x + b)/(c x + d)` on the line, inverse `x = (d x' - b)/(a - c x')`.
pub fn mobius(
    source: &Chart,
    target: &Chart,
    [a, b, c, d]: [ScalarExpr; 4],
) -> Result<Transition> {
    let x = ScalarExpr::var(source.var(0));
    let y = ScalarExpr::var(target.var(0));
    let fwd = a.mul(&x).add(&b).div(&c.mul(&x).add(&d))?;
    let bwd = d.mul(&y).sub(&b).div(&a.sub(&c.mul(&y)))?;
    Transition::new(source, target, vec![fwd], vec![bwd])
}

/// `x' = M x + v` with an invertible rational matrix.
pub fn affine(source: &Chart, target: &Chart, m: &[Vec<Q>], v: &[Q]) -> Result<Transition> {
    let n = source.dim_even();
    let mm: Matrix = m.iter().map(|r| r.iter().map(|e| ScalarExpr::from_q(e.clone())).collect()).collect();
    let inv = linalg::inverse(&mm)?;
    let xs: Vec<ScalarExpr> = source.even().iter().map(ScalarExpr::var).collect();
    let ys: Vec<ScalarExpr> = target.even().iter().map(ScalarExpr::var).collect();
    let fwd = (0..n)
        .map(|i| (0..n).fold(ScalarExpr::from_q(v[i].clone()), |acc, j| acc.add(&mm[i][j].mul(&xs[j]))))
        .collect();
    let bwd = (0..n)
        .map(|i| {
            (0..n).fold(ScalarExpr::zero(), |acc, j| {
                acc.add(&inv[i][j].mul(&ys[j].sub(&ScalarExpr::from_q(v[j].clone()))))
            })
        })
        .collect();
    Transition::new(source, target, fwd, bwd)
}

/// Triangular map `x'^i = x^i + p_i(x^1..x^{i-1})`; `p[i]` must only use
/// earlier source variables.
pub fn triangular(source: &Chart, target: &Chart, p: &[ScalarExpr]) -> Result<Transition> {
    let n = source.dim_even();
    let fwd: Vec<ScalarExpr> = (0..n).map(|i| ScalarExpr::var(source.var(i)).add(&p[i])).collect();
    let mut bwd: Vec<ScalarExpr> = Vec::with_capacity(n);
    for i in 0..n {
        // x^i = x'^i - p_i(x^1..x^{i-1}) with the earlier x already solved
        let earlier = var_sub(source, &bwd);
        bwd.push(ScalarExpr::var(target.var(i)).sub(&p[i].substitute(&earlier)?));
    }
    Transition::new(source, target, fwd, bwd)
}

fn backward_text(b: &[ScalarExpr]) -> String {
    b.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
}

/// `γ_A = -∂_A ρ / ρ` for a volume form `ρ t`.
pub fn flat_connection_from_volume(rho: &Density) -> Result<Vec<SuperExpr>> {
    let c = rho.chart();
    if rho.weight() != Some(Q::one()) {
        return Err(Error::Invalid("a volume form has weight 1".into()));
    }
    let r = rho.coeff(&Q::one());
    if r.parity() != Some(0) {
        return Err(Error::Parity("volume form coefficient must be even".into()));
    }
    let inv = r.inv()?;
    Ok((0..c.dim()).map(|a| c.partial(&r, a).mul(&inv).neg()).collect())
}

/// `F_{AB} = ∂_Aγ_B - (-1)^{p(A)p(B)} ∂_Bγ_A`.
pub fn curvature(chart: &Chart, gamma: &[SuperExpr]) -> Vec<Vec<SuperExpr>> {
    let n = chart.dim();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let x = chart.partial(&gamma[b], a);
                    let y = chart.partial(&gamma[a], b);
                    if chart.parity(a) * chart.parity(b) == 1 {
                        x.add(&y)
                    } else {
                        x.sub(&y)
                    }
                })
                .collect()
        })
        .collect()
}

/// `γ_A = -(-1)^{p(B)} Γ^B_{BA}` from Christoffel symbols `gamma[c][a][b] = Γ^c_{ab}`.
pub fn connection_from_affine(chart: &Chart, christoffel: &[Vec<Vec<SuperExpr>>]) -> Result<Vec<SuperExpr>> {
    let n = chart.dim();
    if christoffel.len() != n || christoffel.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
        return Err(Error::Shape(format!("Christoffel symbols must be {n}x{n}x{n}")));
    }
    Ok((0..n)
        .map(|a| {
            (0..n).fold(SuperExpr::zero(), |acc, b| {
                let g = &christoffel[b][b][a];
                if chart.parity(b) == 1 {
                    acc.add(g)
                } else {
                    acc.sub(g)
                }
            })
        })
        .collect())
}

/// Levi-Civita symbols `Γ^c_{ab} = ½g^{cd}(∂_a g_{db} + ∂_b g_{da} - ∂_d g_{ab})`
/// of a metric on an even chart.
pub fn levi_civita(chart: &Chart, g: &Matrix) -> Result<Vec<Matrix>> {
    let n = chart.dim_even();
    if chart.dim_odd() > 0 || g.len() != n {
        return Err(Error::Shape("metric on an even chart expected".into()));
    }
    let ginv = linalg::inverse(g)?;
    let d = |m: &ScalarExpr, a: usize| m.diff(chart.var(a));
    let half = q(1, 2);
    Ok((0..n)
        .map(|c| {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            (0..n)
                                .fold(ScalarExpr::zero(), |acc, e| {
                                    let t = d(&g[e][b], a).add(&d(&g[e][a], b)).sub(&d(&g[a][b], e));
                                    acc.add(&ginv[c][e].mul(&t))
                                })
                                .scale(&half)
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}

/// `f ↦ ½ρ⁻¹∂_a(ρ g^{ab}∂_b f)` for a metric `g_{ab}` and volume coefficient `ρ`.
pub fn laplace_beltrami(chart: &Chart, g: &Matrix, rho: &ScalarExpr) -> Result<DensOp> {
    let n = chart.dim_even();
    if chart.dim_odd() > 0 || g.len() != n {
        return Err(Error::Shape("metric on an even chart expected".into()));
    }
    let ginv = linalg::inverse(g)?;
    let rinv = rho.inv()?;
    let half = q(1, 2);
    let mut op = DensOp::zero(chart);
    let key = |alpha: Vec<u32>| op_key(alpha);
    for a in 0..n {
        for b in 0..n {
            let mut alpha = vec![0; n];
            alpha[a] += 1;
            alpha[b] += 1;
            op.add_term(key(alpha), SuperExpr::scalar(ginv[a][b].scale(&half)));
        }
    }
    for b in 0..n {
        let mut c = ScalarExpr::zero();
        for a in 0..n {
            let v = chart.var(a);
            c = c.add(&ginv[a][b].diff(v)).add(&rho.diff(v).mul(&rinv).mul(&ginv[a][b]));
        }
        let mut alpha = vec![0; n];
        alpha[b] = 1;
        op.add_term(key(alpha), SuperExpr::scalar(c.scale(&half)));
    }
    Ok(op)
}

fn op_key(alpha: Vec<u32>) -> crate::densalg::OpKey {
    crate::densalg::OpKey {
        w: Q::from_integer(0.into()),
        k: 0,
        alpha,
        beta: 0,
    }
}
