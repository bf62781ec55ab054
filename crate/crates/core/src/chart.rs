//! Coordinate charts: ordered even variables followed by odd generators.
//! Index `A < dim_even` is the even coordinate `x^A`; larger indices are odd.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symcore::{ScalarExpr, SuperExpr, Var};

#[derive(Debug, PartialEq, Eq, Hash)]
struct ChartData {
    id: Arc<str>,
    even: Vec<Var>,
    odd: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart(Arc<ChartData>);

impl Chart {
    pub fn new(id: &str, even: &[&str], odd: &[&str]) -> Result<Chart> {
        let mut seen = std::collections::BTreeSet::new();
        for n in even.iter().chain(odd) {
            if !seen.insert(*n) {
                return Err(Error::Invalid(format!("duplicate variable {n} in chart {id}")));
            }
        }
        if odd.len() > 63 {
            return Err(Error::Invalid("too many odd variables".into()));
        }
        Ok(Chart(Arc::new(ChartData {
            id: id.into(),
            even: even.iter().map(|n| Var::new(n, id)).collect(),
            odd: odd.iter().map(|s| s.to_string()).collect(),
        })))
    }

    pub fn id(&self) -> &str {
        &self.0.id
    }

    pub fn even(&self) -> &[Var] {
        &self.0.even
    }

    pub fn odd(&self) -> &[String] {
        &self.0.odd
    }

    pub fn dim_even(&self) -> usize {
        self.0.even.len()
    }

    pub fn dim_odd(&self) -> usize {
        self.0.odd.len()
    }

    pub fn dim(&self) -> usize {
        self.dim_even() + self.dim_odd()
    }

    /// Parity of coordinate `A`.
    pub fn parity(&self, a: usize) -> u32 {
        u32::from(a >= self.dim_even())
    }

    pub fn var(&self, a: usize) -> &Var {
        &self.0.even[a]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.0.even.iter().position(|v| &*v.name == name) {
            return Some(i);
        }
        self.0
            .odd
            .iter()
            .position(|n| n == name)
            .map(|i| i + self.dim_even())
    }

    /// The coordinate function `z^A`.
    pub fn coord(&self, a: usize) -> SuperExpr {
        if a < self.dim_even() {
            SuperExpr::scalar(ScalarExpr::var(self.var(a)))
        } else {
            SuperExpr::odd(a - self.dim_even())
        }
    }

    pub fn coord_name(&self, a: usize) -> String {
        if a < self.dim_even() {
            self.var(a).name.to_string()
        } else {
            self.0.odd[a - self.dim_even()].clone()
        }
    }

    /// Left partial derivative `∂_A`.
    pub fn partial(&self, e: &SuperExpr, a: usize) -> SuperExpr {
        if a < self.dim_even() {
            e.diff(self.var(a))
        } else {
            e.odd_diff(a - self.dim_even())
        }
    }

    pub fn render(&self, e: &SuperExpr) -> String {
        e.render(self.odd())
    }

    pub fn check_same(&self, other: &Chart) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ChartMismatch(format!("{} vs {}", self.id(), other.id())))
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}
