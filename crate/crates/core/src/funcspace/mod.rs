//! Extended reals, domains, function representations, sampling and finite
//! differences.

pub mod catalog;
pub mod domain;
pub mod ext;
pub mod fd;
pub mod function;
pub mod grid;

pub use catalog::{catalog_lookup, lookup_spec, parse_function_spec, Params};
pub use domain::Domain;
pub use ext::ExtendedReal;
pub use fd::{grad_fd, hessian_fd};
pub use function::{Boundary, Class, ConvexFunction, Kind};
pub use grid::{AxisSpec, GridFunction, GridSpec};
