//! Exact expression kernel: rational functions in atoms and their Grassmann
//! extension. Identity checking downstream reduces to "normal form is zero".

pub mod atom;
pub mod gcd;
pub mod poly;
pub mod scalar;
pub mod superexpr;

pub use atom::{Atom, ExpAtom, Opaque, PowAtom, Symbol, Var};
pub use poly::{Mono, Poly};
pub use scalar::{Pullback, ScalarExpr, Substitution};
pub use superexpr::{mask_parity, mask_product_sign, OddMask, SuperExpr};

pub type Q = num_rational::BigRational;

/// `p/q` as an exact rational.
pub fn q(p: i64, d: i64) -> Q {
    Q::new(p.into(), d.into())
}

#[cfg(test)]
mod tests;
