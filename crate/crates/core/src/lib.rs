//! Exact symbolic calculus of densities on (super)manifolds in local
//! coordinates: operators on the algebra of densities, canonical second-order
//! pencils, transformation laws, groupoids of connections, the Schwarzian on
//! the line and odd symplectic (BV) structures.

pub mod atlas;
pub mod bvsuper;
pub mod chart;
pub mod densalg;
pub mod error;
pub mod gen;
pub mod groupoid;
pub mod linalg;
pub mod pencils;
pub mod projline;
pub mod symcore;

pub use error::{Error, Result};
