//! Odd symplectic geometry on `ΠT*M`: the canonical even bracket on the doubled
//! space, derived odd brackets, the Berezinian, Darboux checks and the odd
//! Laplacian.

use num_traits::Zero;

use crate::chart::Chart;
use crate::densalg::{super_divergence, DensOp, Density};
use crate::error::{Error, Result};
use crate::groupoid::{arrow_defect, is_arrow, Membership, PrincipalSymbol};
use crate::linalg;
use crate::symcore::{q, Atom, ScalarExpr, SuperExpr, Var, Q};

/// Chart `(x^a, θ_a)` of dimension `n|n`, `θ_a` paired with `x^a`. Odd slots
/// past the first `n` are odd constants: they carry no momenta in the bracket
/// and let odd generating functions of `x` alone be written down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperChart {
    chart: Chart,
}

impl SuperChart {
    pub fn new(chart: &Chart) -> Result<SuperChart> {
        if chart.dim_even() != chart.dim_odd() {
            return Err(Error::Shape(format!("{chart} is not of dimension n|n")));
        }
        Ok(SuperChart { chart: chart.clone() })
    }

    pub fn with_params(chart: &Chart) -> Result<SuperChart> {
        if chart.dim_even() > chart.dim_odd() {
            return Err(Error::Shape(format!("{chart} has fewer odd than even coordinates")));
        }
        Ok(SuperChart { chart: chart.clone() })
    }

    /// The `2n` Darboux coordinates.
    pub fn coords(&self) -> Vec<SuperExpr> {
        (0..2 * self.n()).map(|a| self.chart.coord(a)).collect()
    }

    pub fn standard(id: &str, n: usize) -> SuperChart {
        let xs: Vec<String> = (1..=n).map(|i| if n == 1 { "x".into() } else { format!("x{i}") }).collect();
        let ts: Vec<String> = (1..=n).map(|i| if n == 1 { "th".into() } else { format!("th{i}") }).collect();
        let xs: Vec<&str> = xs.iter().map(|s| s.as_str()).collect();
        let ts: Vec<&str> = ts.iter().map(|s| s.as_str()).collect();
        SuperChart { chart: Chart::new(id, &xs, &ts).expect("distinct names") }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn n(&self) -> usize {
        self.chart.dim_even()
    }

    /// `S^{x^aθ_a} = S^{θ_ax^a} = 1`, all other entries zero.
    pub fn canonical_symbol(&self) -> Vec<Vec<SuperExpr>> {
        let n = self.n();
        let mut s = vec![vec![SuperExpr::zero(); self.chart.dim()]; self.chart.dim()];
        for a in 0..n {
            s[a][n + a] = SuperExpr::one();
            s[n + a][a] = SuperExpr::one();
        }
        s
    }
}

/// The chart with fiber momenta `p_A`, `p(p_A) = p(A)`. Base coordinates keep
/// their variables and odd slots, so base expressions embed unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Doubled {
    base: Chart,
    chart: Chart,
}

impl Doubled {
    pub fn new(base: &Chart) -> Result<Doubled> {
        let ev: Vec<String> = base.even().iter().map(|v| v.name.to_string()).collect();
        let od: Vec<String> = base.odd().to_vec();
        let mut even: Vec<String> = ev.clone();
        even.extend(ev.iter().map(|s| format!("p_{s}")));
        let mut odd: Vec<String> = od.clone();
        odd.extend(od.iter().map(|s| format!("p_{s}")));
        let even: Vec<&str> = even.iter().map(|s| s.as_str()).collect();
        let odd: Vec<&str> = odd.iter().map(|s| s.as_str()).collect();
        let chart = Chart::new(base.id(), &even, &odd)?;
        Ok(Doubled { base: base.clone(), chart })
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Index of `z^A` in the doubled chart.
    pub fn z(&self, a: usize) -> usize {
        let ne = self.base.dim_even();
        if a < ne {
            a
        } else {
            ne + a
        }
    }

    /// Index of `p_A` in the doubled chart.
    pub fn p(&self, a: usize) -> usize {
        let (ne, no) = (self.base.dim_even(), self.base.dim_odd());
        if a < ne {
            ne + a
        } else {
            ne + a + no
        }
    }

    pub fn momentum(&self, a: usize) -> SuperExpr {
        self.chart.coord(self.p(a))
    }

    pub fn is_base(&self, f: &SuperExpr) -> bool {
        (0..self.base.dim()).all(|a| self.chart.partial(f, self.p(a)).is_zero())
    }

    fn check_base(&self, f: &SuperExpr) -> Result<()> {
        if !self.is_base(f) {
            return Err(Error::Invalid(format!("{} depends on momenta", self.chart.render(f))));
        }
        Ok(())
    }
}

fn sign_if(neg: bool, e: SuperExpr) -> SuperExpr {
    if neg {
        e.neg()
    } else {
        e
    }
}

fn homogeneous(f: &SuperExpr) -> [(u32, SuperExpr); 2] {
    [(0, f.even_part()), (1, f.odd_part())]
}

fn parity_of(f: &SuperExpr, what: &str) -> Result<u32> {
    f.parity().ok_or_else(|| Error::Parity(format!("{what} is not homogeneous")))
}

/// `(f,g) = Σ_A (-1)^{p(A)(p(f)+1)} ∂_{z^A}f ∂_{p_A}g - (-1)^{p(A)p(f)} ∂_{p_A}f ∂_{z^A}g`,
/// so that `(z^A, p_B) = δ^A_B`.
pub fn canonical_poisson(d: &Doubled, f: &SuperExpr, g: &SuperExpr) -> SuperExpr {
    let c = &d.chart;
    let mut acc = SuperExpr::zero();
    for (pf, fh) in homogeneous(f) {
        if fh.is_zero() {
            continue;
        }
        for a in 0..d.base.dim() {
            let pa = d.base.parity(a);
            let (z, p) = (d.z(a), d.p(a));
            let first = c.partial(&fh, z).mul(&c.partial(g, p));
            let second = c.partial(&fh, p).mul(&c.partial(g, z));
            acc = acc.add(&sign_if(pa * (pf + 1) % 2 == 1, first));
            acc = acc.sub(&sign_if(pa * pf % 2 == 1, second));
        }
    }
    acc
}

/// `H_S = ½ S^{AB} p_A p_B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterHamiltonian {
    doubled: Doubled,
    s: Vec<Vec<SuperExpr>>,
    h: SuperExpr,
}

impl MasterHamiltonian {
    pub fn new(base: &Chart, s: Vec<Vec<SuperExpr>>) -> Result<MasterHamiltonian> {
        let n = base.dim();
        if s.len() != n || s.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("symbol must be {n}x{n}")));
        }
        let doubled = Doubled::new(base)?;
        let mut h = SuperExpr::zero();
        for (a, row) in s.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                e.check_chart(base)?;
                h = h.add(&e.mul(&doubled.momentum(a)).mul(&doubled.momentum(b)));
            }
        }
        Ok(MasterHamiltonian { doubled, s, h: h.scale(&q(1, 2)) })
    }

    pub fn from_symbol(sym: &PrincipalSymbol) -> Result<MasterHamiltonian> {
        MasterHamiltonian::new(&sym.chart, sym.s.clone())
    }

    pub fn doubled(&self) -> &Doubled {
        &self.doubled
    }

    pub fn base(&self) -> &Chart {
        &self.doubled.base
    }

    pub fn symbol(&self) -> &[Vec<SuperExpr>] {
        &self.s
    }

    pub fn expr(&self) -> &SuperExpr {
        &self.h
    }
}

trait CheckChart {
    fn check_chart(&self, c: &Chart) -> Result<()>;
}

impl CheckChart for SuperExpr {
    fn check_chart(&self, c: &Chart) -> Result<()> {
        for s in self.terms().values() {
            s.check_chart(c.id())?;
        }
        if let Some(m) = self.terms().keys().max() {
            if c.dim_odd() < 64 && *m >> c.dim_odd() != 0 {
                return Err(Error::ChartMismatch(format!("odd variable outside {c}")));
            }
        }
        Ok(())
    }
}

/// `{f,g} = ((f,H_S),g)` for momentum-independent `f`, `g`.
pub fn derived_bracket(h: &MasterHamiltonian, f: &SuperExpr, g: &SuperExpr) -> Result<SuperExpr> {
    let d = &h.doubled;
    for e in [f, g] {
        e.check_chart(&d.base)?;
        d.check_base(e)?;
    }
    let fh = canonical_poisson(d, f, &h.h);
    Ok(canonical_poisson(d, &fh, g))
}

/// `(-1)^{(f+1)(h+1)}{{f,g},h} + (-1)^{(g+1)(f+1)}{{g,h},f} + (-1)^{(h+1)(g+1)}{{h,f},g}`.
pub fn jacobiator(h: &MasterHamiltonian, f: &SuperExpr, g: &SuperExpr, k: &SuperExpr) -> Result<SuperExpr> {
    let (pf, pg, pk) = (parity_of(f, "f")?, parity_of(g, "g")?, parity_of(k, "h")?);
    let term = |a: &SuperExpr, b: &SuperExpr, c: &SuperExpr, pa: u32, pc: u32| -> Result<SuperExpr> {
        let inner = derived_bracket(h, a, b)?;
        Ok(sign_if((pa + 1) * (pc + 1) % 2 == 1, derived_bracket(h, &inner, c)?))
    };
    Ok(term(f, g, k, pf, pk)?.add(&term(g, k, f, pg, pf)?).add(&term(k, f, g, pk, pg)?))
}

/// `(H_S, H_S)`.
pub fn master_square(h: &MasterHamiltonian) -> SuperExpr {
    canonical_poisson(&h.doubled, &h.h, &h.h)
}

/// Monomials in the coordinates of `c` of total degree at most `deg`.
pub fn monomials(c: &Chart, deg: u32) -> Vec<SuperExpr> {
    let mut out = vec![SuperExpr::one()];
    let mut frontier = vec![(SuperExpr::one(), 0usize)];
    for _ in 0..deg {
        let mut next = Vec::new();
        for (m, from) in &frontier {
            for a in *from..c.dim() {
                let e = m.mul(&c.coord(a));
                if !e.is_zero() {
                    next.push((e, a));
                }
            }
        }
        out.extend(next.iter().map(|(e, _)| e.clone()));
        frontier = next;
    }
    out
}

/// First triple of monomials of degree `≤ deg` with a nonzero jacobiator.
pub fn jacobi_witness(h: &MasterHamiltonian, deg: u32) -> Result<Option<[SuperExpr; 3]>> {
    let ms = monomials(h.base(), deg);
    for (i, f) in ms.iter().enumerate() {
        for (j, g) in ms.iter().enumerate().skip(i) {
            for k in ms.iter().skip(j) {
                if !jacobiator(h, f, g, k)?.is_zero() {
                    return Ok(Some([f.clone(), g.clone(), k.clone()]));
                }
            }
        }
    }
    Ok(None)
}

/// Block matrix `((A, B), (C, D))` with even `A`, `D` and odd `B`, `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperMatrix {
    pub a: Vec<Vec<SuperExpr>>,
    pub b: Vec<Vec<SuperExpr>>,
    pub c: Vec<Vec<SuperExpr>>,
    pub d: Vec<Vec<SuperExpr>>,
}

fn check_block(m: &[Vec<SuperExpr>], rows: usize, cols: usize, parity: u32, name: &str) -> Result<()> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape(format!("block {name} must be {rows}x{cols}")));
    }
    for e in m.iter().flatten() {
        if !e.is_zero() && e.parity() != Some(parity) {
            return Err(Error::Parity(format!("block {name} needs parity {parity}")));
        }
    }
    Ok(())
}

impl SuperMatrix {
    pub fn new(
        a: Vec<Vec<SuperExpr>>,
        b: Vec<Vec<SuperExpr>>,
        c: Vec<Vec<SuperExpr>>,
        d: Vec<Vec<SuperExpr>>,
    ) -> Result<SuperMatrix> {
        let (n, m) = (a.len(), d.len());
        check_block(&a, n, n, 0, "A")?;
        check_block(&b, n, m, 1, "B")?;
        check_block(&c, m, n, 1, "C")?;
        check_block(&d, m, m, 0, "D")?;
        Ok(SuperMatrix { a, b, c, d })
    }

    pub fn identity(n: usize, m: usize) -> SuperMatrix {
        SuperMatrix {
            a: linalg::identity(n),
            b: vec![vec![SuperExpr::zero(); m]; n],
            c: vec![vec![SuperExpr::zero(); n]; m],
            d: linalg::identity(m),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.len(), self.d.len())
    }

    pub fn full(&self) -> Vec<Vec<SuperExpr>> {
        let mut out: Vec<Vec<SuperExpr>> = self.a.iter().zip(&self.b).map(|(x, y)| [x.clone(), y.clone()].concat()).collect();
        out.extend(self.c.iter().zip(&self.d).map(|(x, y)| [x.clone(), y.clone()].concat()));
        out
    }

    pub fn from_full(m: &[Vec<SuperExpr>], n: usize) -> Result<SuperMatrix> {
        let cut = |rows: &[Vec<SuperExpr>], lo: usize, hi: usize| -> Vec<Vec<SuperExpr>> {
            rows.iter().map(|r| r[lo..hi].to_vec()).collect()
        };
        let k = m.len();
        if n > k || m.iter().any(|r| r.len() != k) {
            return Err(Error::Shape("supermatrix must be square".into()));
        }
        SuperMatrix::new(cut(&m[..n], 0, n), cut(&m[..n], n, k), cut(&m[n..], 0, n), cut(&m[n..], n, k))
    }

    pub fn mul(&self, other: &SuperMatrix) -> Result<SuperMatrix> {
        if self.dims() != other.dims() {
            return Err(Error::Shape("supermatrix dimensions differ".into()));
        }
        SuperMatrix::from_full(&linalg::mul(&self.full(), &other.full()), self.dims().0)
    }
}

/// `Ber M = det(A - B D⁻¹ C) / det D`.
pub fn berezinian(m: &SuperMatrix) -> Result<SuperExpr> {
    let dinv = linalg::inverse(&m.d).map_err(|_| Error::NotInvertible("odd-odd block".into()))?;
    let bdc = linalg::mul(&linalg::mul(&m.b, &dinv), &m.c);
    let schur: Vec<Vec<SuperExpr>> = m
        .a
        .iter()
        .zip(&bdc)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.sub(y)).collect())
        .collect();
    let top = if schur.is_empty() { SuperExpr::one() } else { linalg::det(&schur)? };
    let bottom = if m.d.is_empty() { SuperExpr::one() } else { linalg::det(&m.d)? };
    top.div(&bottom)
}

/// `Σ_a ∂²/∂x^a∂θ_a`, acting on coefficients of any weight.
pub fn khudian_operator(sc: &SuperChart) -> DensOp {
    let c = sc.chart();
    let n = sc.n();
    let mut op = DensOp::zero(c);
    for a in 0..n {
        let mut alpha = vec![0; n];
        alpha[a] = 1;
        op.add_term(op.key(Q::zero(), 0, alpha, 1 << a), SuperExpr::one());
    }
    op
}

/// Components `{f, z^A}` of the Hamiltonian vector field of `f`.
pub fn hamiltonian_field(h: &MasterHamiltonian, f: &SuperExpr) -> Result<Vec<SuperExpr>> {
    let c = h.base();
    (0..c.dim()).map(|a| derived_bracket(h, f, &c.coord(a))).collect()
}

/// `Δ_ρ f = ½ (-1)^{p(f)} div_ρ grad f` with `grad f = {f, z^A}∂_A` and
/// `div_ρ X = ρ⁻¹ ∂_A(ρX^A)` with Koszul signs. The parity factor makes the
/// coordinate volume in Darboux coordinates give `∂²f/∂x^a∂θ_a` for every `f`.
pub fn bv_laplacian(h: &MasterHamiltonian, rho: &SuperExpr, f: &SuperExpr) -> Result<SuperExpr> {
    if rho.parity() != Some(0) || rho.body().is_zero() {
        return Err(Error::NotInvertible("volume density must be even and invertible".into()));
    }
    let c = h.base();
    let mut total = SuperExpr::zero();
    for (pf, fh) in homogeneous(f) {
        if fh.is_zero() {
            continue;
        }
        let x: Vec<SuperExpr> = hamiltonian_field(h, &fh)?.iter().map(|e| rho.mul(e)).collect();
        total = total.add(&sign_if(pf == 1, super_divergence(c, &x)));
    }
    Ok(total.div(rho)?.scale(&q(1, 2)))
}

/// `exp(k F)` for even `F` whose body is a rational combination of opaque
/// atoms; the nilpotent part is expanded as a finite series.
pub fn exp_even(f: &SuperExpr, k: &Q) -> Result<SuperExpr> {
    if f.parity() != Some(0) && !f.is_zero() {
        return Err(Error::Parity("the exponent must be even".into()));
    }
    let body = f.body();
    if !body.den().is_one() {
        return Err(Error::Unsupported(format!("exp of {body}")));
    }
    let mut lin = Vec::new();
    for (m, c) in &body.num().terms {
        match m.0.as_slice() {
            [(Atom::Opaque(o), 1)] => lin.push((o.clone(), c * k)),
            _ => return Err(Error::Unsupported(format!("exp of {body}"))),
        }
    }
    let nil = f.sub(&SuperExpr::scalar(body)).scale(k);
    let mut series = SuperExpr::one();
    let mut term = SuperExpr::one();
    let mut j = 1i64;
    loop {
        term = term.mul(&nil).scale(&q(1, j));
        if term.is_zero() {
            break;
        }
        series = series.add(&term);
        j += 1;
    }
    Ok(series.scale_scalar(&ScalarExpr::exp_linear(&lin)))
}

/// Both sides of `-e^{F/2} Δ_ρ e^{-F/2} = ¼(div_γ X - ½X²)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub lhs: SuperExpr,
    pub rhs: SuperExpr,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn residual(&self) -> SuperExpr {
        self.lhs.sub(&self.rhs)
    }
}

/// Flat connection `γ_A = -∂_A log ρ` of a volume coefficient.
pub fn flat_connection(c: &Chart, rho: &SuperExpr) -> Result<Vec<SuperExpr>> {
    let inv = rho.inv()?;
    Ok((0..c.dim()).map(|a| c.partial(rho, a).mul(&inv).neg()).collect())
}

/// The right side is the weight-zero groupoid defect of `γ → γ + dF` for the
/// symbol of `h`.
pub fn bv_identity_check(h: &MasterHamiltonian, rho: &SuperExpr, f: &SuperExpr) -> Result<IdentityReport> {
    let c = h.base();
    let up = exp_even(f, &q(1, 2))?;
    let down = exp_even(f, &q(-1, 2))?;
    let lhs = up.mul(&bv_laplacian(h, rho, &down)?).neg();
    let sym = PrincipalSymbol::new(c, Q::zero(), h.s.clone())?;
    let gamma = flat_connection(c, rho)?;
    let x: Vec<SuperExpr> = (0..c.dim()).map(|a| c.partial(f, a)).collect();
    let rhs = arrow_defect(&sym, &gamma, &x)?.coeff(&Q::zero()).scale(&q(1, 4));
    Ok(IdentityReport { lhs, rhs })
}

/// First pair `(i, j)` with `{z^i, z^j}` off the Darboux table, and the difference.
fn table_mismatch(h: &MasterHamiltonian, coords: &[SuperExpr]) -> Result<Option<(usize, usize, SuperExpr)>> {
    let n = coords.len() / 2;
    for (i, zi) in coords.iter().enumerate() {
        for (j, zj) in coords.iter().enumerate() {
            let want = if i < n && j == n + i {
                SuperExpr::one()
            } else if j < n && i == n + j {
                // {θ_a, x^a} by shifted antisymmetry
                SuperExpr::int(-1)
            } else {
                SuperExpr::zero()
            };
            let diff = derived_bracket(h, zi, zj)?.sub(&want);
            if !diff.is_zero() {
                return Ok(Some((i, j, diff)));
            }
        }
    }
    Ok(None)
}

/// The first coordinate pair whose bracket is off the Darboux table.
pub fn darboux_mismatch(sym: &PrincipalSymbol) -> Result<Option<(usize, usize, SuperExpr)>> {
    let sc = SuperChart::new(&sym.chart)?;
    let h = MasterHamiltonian::from_symbol(sym)?;
    table_mismatch(&h, &sc.coords())
}

/// Whether the derived brackets of coordinates are `{x^a,θ_b} = δ^a_b`,
/// `{x^a,x^b} = 0`, `{θ_a,θ_b} = 0`.
pub fn darboux_check(sym: &PrincipalSymbol) -> Result<bool> {
    Ok(darboux_mismatch(sym)?.is_none())
}

/// Change of Darboux coordinates: the fiber translation `θ_a ↦ θ_a + ∂_aΨ(x)`
/// for odd `Ψ` followed by the point map `x' = x'(x)`, `θ'_{a'} = (∂x^a/∂x^{a'}) θ_a`.
#[derive(Clone, Debug)]
pub struct DarbouxTransition {
    source: SuperChart,
    target: SuperChart,
    images: Vec<SuperExpr>,
    jac: SuperMatrix,
}

impl DarbouxTransition {
    /// `forward[a']` is `x^{a'}` in source variables; `potential` is `Ψ`,
    /// odd and built from `x` and the odd constants only.
    pub fn new(source: &SuperChart, target: &SuperChart, forward: &[ScalarExpr], potential: &SuperExpr) -> Result<DarbouxTransition> {
        let n = source.n();
        if target.n() != n || forward.len() != n {
            return Err(Error::Shape("transition dimensions differ".into()));
        }
        let sc = source.chart();
        if !potential.is_zero() && potential.parity() != Some(1) {
            return Err(Error::Parity("the generating function must be odd".into()));
        }
        potential.check_chart(sc)?;
        if (n..2 * n).any(|a| !sc.partial(potential, a).is_zero()) {
            return Err(Error::Invalid("the generating function may not depend on θ".into()));
        }
        let xs: Vec<&Var> = sc.even().iter().collect();
        for e in forward {
            e.check_chart(sc.id())?;
        }
        let dx: Vec<Vec<ScalarExpr>> = forward.iter().map(|f| xs.iter().map(|v| f.diff(v)).collect()).collect();
        let dx_inv = linalg::inverse(&dx)?;
        let mut images: Vec<SuperExpr> = forward.iter().cloned().map(SuperExpr::scalar).collect();
        for ap in 0..n {
            let mut th = SuperExpr::zero();
            for a in 0..n {
                let shifted = sc.coord(n + a).add(&sc.partial(potential, a));
                th = th.add(&shifted.scale_scalar(&dx_inv[a][ap]));
            }
            images.push(th);
        }
        DarbouxTransition::from_images(source, target, images)
    }

    /// Arbitrary images of `(x^{a'}, θ_{a'})` in source variables.
    pub fn from_images(source: &SuperChart, target: &SuperChart, images: Vec<SuperExpr>) -> Result<DarbouxTransition> {
        let (n, sc) = (source.n(), source.chart());
        if target.n() != n || images.len() != 2 * n {
            return Err(Error::Shape("transition dimensions differ".into()));
        }
        for z in &images {
            z.check_chart(sc)?;
        }
        let full: Vec<Vec<SuperExpr>> = images.iter().map(|z| (0..2 * n).map(|a| sc.partial(z, a)).collect()).collect();
        let jac = SuperMatrix::from_full(&full, n)?;
        Ok(DarbouxTransition { source: source.clone(), target: target.clone(), images, jac })
    }

    pub fn source(&self) -> &SuperChart {
        &self.source
    }

    pub fn target(&self) -> &SuperChart {
        &self.target
    }

    /// Target coordinates as functions of the source ones.
    pub fn images(&self) -> &[SuperExpr] {
        &self.images
    }

    /// `∂z'^{A'}/∂z^A`.
    pub fn jacobian(&self) -> &SuperMatrix {
        &self.jac
    }

    /// `det(∂x'/∂x)`, the square root of the Berezinian for these maps.
    pub fn point_det(&self) -> Result<SuperExpr> {
        linalg::det(&self.jac.a)
    }

    /// Whether the images satisfy the Darboux table for the canonical source bracket.
    pub fn is_symplectic(&self) -> Result<bool> {
        let h = MasterHamiltonian::new(self.source.chart(), self.source.canonical_symbol())?;
        Ok(table_mismatch(&h, &self.images)?.is_none())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatReport {
    pub berezinian: SuperExpr,
    pub sqrt_ber: SuperExpr,
    /// `Δ(√Ber)` in the source chart.
    pub laplacian: SuperExpr,
    pub membership: Membership,
}

impl FlatReport {
    pub fn holds(&self) -> bool {
        self.laplacian.is_zero() && self.membership.is_arrow()
    }
}

/// `Δ(√Ber) = 0` for the Jacobian of `t`, and the target's zero connection,
/// `X_A = -∂_A log Ber`, is joined to the source's by an arrow at weight 0.
pub fn darboux_flat_consistency(t: &DarbouxTransition) -> Result<FlatReport> {
    if !t.is_symplectic()? {
        return Err(Error::Transition("the map does not preserve the Darboux bracket".into()));
    }
    let c = t.source.chart();
    let ber = berezinian(&t.jac)?;
    let root = t.point_det()?;
    if root.mul(&root) != ber {
        return Err(Error::Invalid("Berezinian is not the square of the point Jacobian".into()));
    }
    let lap = khudian_operator(&t.source).apply(&Density::new(c, q(1, 2), root.clone()))?;
    let sym = PrincipalSymbol::new(c, Q::zero(), t.source.canonical_symbol())?;
    let zero = vec![SuperExpr::zero(); c.dim()];
    let moved = flat_connection(c, &ber)?;
    let membership = is_arrow(&sym, &zero, &moved)?;
    Ok(FlatReport { berezinian: ber, sqrt_ber: root, laplacian: lap.coeff(&q(1, 2)), membership })
}

#[cfg(test)]
mod tests;
