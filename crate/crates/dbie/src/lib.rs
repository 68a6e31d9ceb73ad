//! Boundary integral equations for the two-dimensional massive Dirac equation
//! with a mass that changes sign across one or two asymptotically flat interfaces.

pub mod error;
pub mod specfun;
pub mod spinor;

pub use error::{Error, Result};
pub use spinor::{Mat2, Spinor, C64};
pub mod geometry;
pub mod quad;
pub mod mesh;
pub mod operators;
pub mod oracle_flat;
pub mod source;
pub mod solve;
pub mod system;
pub mod field;
pub mod kg;
pub mod verify;
