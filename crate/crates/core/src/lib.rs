//! Legendre-Fenchel transforms, affine deformations of convex functions, and
//! the Bregman / Fenchel-Young divergences built on them.

// `!(a < b)` deliberately treats NaN as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod divergence;
pub mod error;
pub mod funcspace;
pub mod generalized;
pub mod legendre;
pub mod report;
pub mod verify;

pub use affine::{deform, DeformParams, GenParams};
pub use error::{Error, Result};
pub use funcspace::{ConvexFunction, ExtendedReal, GridFunction, GridSpec};
pub use legendre::{ConjugatePair, Engine};
pub use report::{CheckReport, Status};
