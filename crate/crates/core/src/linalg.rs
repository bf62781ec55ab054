//! Small dense matrices of rational expressions.

use crate::error::{Error, Result};
use crate::symcore::{ScalarExpr, SuperExpr};

pub type Matrix = Vec<Vec<ScalarExpr>>;

/// Entries of matrices handled here: commuting (even) elements.
pub trait Entry: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self>;
    fn is_zero(&self) -> bool;
    /// Usable as a pivot.
    fn is_unit(&self) -> bool;
}

impl Entry for ScalarExpr {
    fn zero() -> Self {
        ScalarExpr::zero()
    }
    fn one() -> Self {
        ScalarExpr::one()
    }
    fn add(&self, o: &Self) -> Self {
        ScalarExpr::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        ScalarExpr::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        ScalarExpr::mul(self, o)
    }
    fn neg(&self) -> Self {
        ScalarExpr::neg(self)
    }
    fn inv(&self) -> Result<Self> {
        ScalarExpr::inv(self)
    }
    fn is_zero(&self) -> bool {
        ScalarExpr::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        !ScalarExpr::is_zero(self)
    }
}

impl Entry for SuperExpr {
    fn zero() -> Self {
        SuperExpr::zero()
    }
    fn one() -> Self {
        SuperExpr::one()
    }
    fn add(&self, o: &Self) -> Self {
        SuperExpr::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        SuperExpr::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        SuperExpr::mul(self, o)
    }
    fn neg(&self) -> Self {
        SuperExpr::neg(self)
    }
    fn inv(&self) -> Result<Self> {
        SuperExpr::inv(self)
    }
    fn is_zero(&self) -> bool {
        SuperExpr::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        !self.body().is_zero()
    }
}

pub fn identity<T: Entry>(n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

pub fn mul<T: Entry>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let m = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(T::zero(), |acc, (x, brow)| acc.add(&x.mul(&brow[j])))
                })
                .collect()
        })
        .collect()
}

fn square<T>(a: &[Vec<T>]) -> Result<usize> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("matrix is not square".into()));
    }
    Ok(n)
}

/// Determinant by elimination with exact pivots.
pub fn det<T: Entry>(a: &[Vec<T>]) -> Result<T> {
    let n = square(a)?;
    let mut m = a.to_vec();
    let mut acc = T::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| m[r][col].is_unit()) else {
            if (col..n).all(|r| m[r][col].is_zero()) {
                return Ok(T::zero());
            }
            return Err(Error::Unsupported("determinant needs an invertible pivot".into()));
        };
        if p != col {
            m.swap(p, col);
            acc = acc.neg();
        }
        let piv = m[col][col].clone();
        acc = acc.mul(&piv);
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].mul(&piv.inv()?);
            for c in col..n {
                let t = m[r][c].sub(&f.mul(&m[col][c]));
                m[r][c] = t;
            }
        }
    }
    Ok(acc)
}

/// Gauss–Jordan inverse.
pub fn inverse<T: Entry>(a: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = square(a)?;
    let mut m = a.to_vec();
    let mut inv = identity::<T>(n);
    for col in 0..n {
        let p = (col..n)
            .find(|&r| m[r][col].is_unit())
            .ok_or_else(|| Error::NotInvertible("singular matrix".into()))?;
        m.swap(p, col);
        inv.swap(p, col);
        let piv = m[col][col].inv()?;
        for c in 0..n {
            m[col][c] = m[col][c].mul(&piv);
            inv[col][c] = inv[col][c].mul(&piv);
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in 0..n {
                let t = m[r][c].sub(&f.mul(&m[col][c]));
                m[r][c] = t;
                let t = inv[r][c].sub(&f.mul(&inv[col][c]));
                inv[r][c] = t;
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{Symbol, Var};

    #[test]
    fn two_by_two() {
        let x = ScalarExpr::var(&Var::new("x", "C"));
        let a = ScalarExpr::symbol(&Symbol::constant("a"));
        let m = vec![vec![x.clone(), a.clone()], vec![ScalarExpr::one(), x.clone()]];
        assert_eq!(det(&m).unwrap(), x.mul(&x).sub(&a));
        assert_eq!(mul(&m, &inverse(&m).unwrap()), identity::<ScalarExpr>(2));
        let sing = vec![vec![x.clone(), x.clone()], vec![a.clone(), a.clone()]];
        assert!(det(&sing).unwrap().is_zero());
        assert!(inverse(&sing).is_err());
    }
}
