//! Atoms: the indeterminates of the polynomial kernel.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::Q;

/// Even chart coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub chart: Arc<str>,
}

impl Var {
    pub fn new(name: &str, chart: &str) -> Var {
        Var {
            name: Arc::from(name),
            chart: Arc::from(chart),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// An opaque function symbol together with the even variables it depends on.
/// A symbol with no dependencies is a symbolic constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: Arc<str>,
    pub deps: Arc<[Var]>,
}

impl Symbol {
    pub fn new(name: &str, deps: &[Var]) -> Symbol {
        Symbol {
            name: Arc::from(name),
            deps: Arc::from(deps.to_vec()),
        }
    }

    pub fn constant(name: &str) -> Symbol {
        Symbol::new(name, &[])
    }

    pub fn depends_on(&self, v: &Var) -> bool {
        self.deps.iter().any(|d| d == v)
    }
}

/// `f` with a sorted multi-index of applied even partial derivatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Opaque {
    pub sym: Symbol,
    pub derivs: Vec<Var>,
}

impl Opaque {
    pub fn plain(sym: Symbol) -> Opaque {
        Opaque {
            sym,
            derivs: Vec::new(),
        }
    }

    /// The atom obtained by one more partial derivative, or `None` if the
    /// symbol does not depend on `v`.
    pub fn derive(&self, v: &Var) -> Option<Opaque> {
        if !self.sym.depends_on(v) {
            return None;
        }
        let mut derivs = self.derivs.clone();
        let pos = derivs.partition_point(|d| d <= v);
        derivs.insert(pos, v.clone());
        Some(Opaque {
            sym: self.sym.clone(),
            derivs,
        })
    }
}

impl Ord for Opaque {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sym
            .name
            .cmp(&other.sym.name)
            .then_with(|| self.derivs.cmp(&other.derivs))
            .then_with(|| self.sym.deps.cmp(&other.sym.deps))
    }
}

impl PartialOrd for Opaque {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Opaque {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sym.name)?;
        if !self.derivs.is_empty() {
            f.write_str("_{")?;
            for (i, d) in self.derivs.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                f.write_str(&d.name)?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

/// `base^q` with `0 < q < 1`; integer parts live on the plain base atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PowAtom {
    pub base: Opaque,
    pub q: Q,
}

/// `exp(sum c_i u_i)`, terms sorted by atom with nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExpAtom {
    pub lin: Vec<(Opaque, Q)>,
}

impl ExpAtom {
    /// Combine `sum e_k * lin_k`, dropping zero coefficients.
    pub fn combine<'a>(parts: impl IntoIterator<Item = (&'a ExpAtom, i64)>) -> ExpAtom {
        let mut acc: std::collections::BTreeMap<Opaque, Q> = Default::default();
        for (a, e) in parts {
            for (u, c) in &a.lin {
                let slot = acc.entry(u.clone()).or_insert_with(Q::zero);
                *slot += c * Q::from_integer(e.into());
            }
        }
        ExpAtom {
            lin: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.lin.is_empty()
    }

    pub fn negated(&self) -> ExpAtom {
        ExpAtom {
            lin: self.lin.iter().map(|(u, c)| (u.clone(), -c)).collect(),
        }
    }
}

/// Ordering of the variants is the canonical atom order:
/// chart variables, opaque atoms, power atoms, exponential atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Var(Var),
    Opaque(Opaque),
    Pow(PowAtom),
    Exp(ExpAtom),
}

impl Atom {
    pub fn is_algebraic_ext(&self) -> bool {
        matches!(self, Atom::Pow(_) | Atom::Exp(_))
    }

    /// Chart names this atom refers to (through variables or dependencies).
    pub fn charts(&self, out: &mut Vec<Arc<str>>) {
        fn opaque(o: &Opaque, out: &mut Vec<Arc<str>>) {
            for d in o.sym.deps.iter().chain(o.derivs.iter()) {
                out.push(d.chart.clone());
            }
        }
        match self {
            Atom::Var(v) => out.push(v.chart.clone()),
            Atom::Opaque(o) => opaque(o, out),
            Atom::Pow(p) => opaque(&p.base, out),
            Atom::Exp(e) => e.lin.iter().for_each(|(u, _)| opaque(u, out)),
        }
    }
}

pub(crate) fn fmt_q(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else if q.is_negative() {
        format!("-{}/{}", q.numer().abs(), q.denom())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(v) => write!(f, "{v}"),
            Atom::Opaque(o) => write!(f, "{o}"),
            Atom::Pow(p) => write!(f, "{}^({})", p.base, fmt_q(&p.q)),
            Atom::Exp(e) => {
                f.write_str("exp(")?;
                for (i, (u, c)) in e.lin.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    if c.is_one() {
                        write!(f, "{u}")?;
                    } else {
                        write!(f, "({})*{u}", fmt_q(c))?;
                    }
                }
                f.write_str(")")
            }
        }
    }
}
