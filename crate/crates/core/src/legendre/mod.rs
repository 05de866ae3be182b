//! The Legendre-Fenchel transform F*(η) = sup_θ ⟨θ, η⟩ − F(θ).

pub mod closed;
pub mod discrete;
pub mod engine;
pub mod newton;
pub mod steepness;
pub mod subdiff;

pub use closed::conjugate_closed;
pub use discrete::{
    auto_dual_axes, biconjugate_grid, check_reverse_order, conjugate_grid_brute, conjugate_grid_fast, conjugate_points_brute,
    conjugate_points_fast, GridConjugate,
};
pub use engine::{conjugate_with, default_window, ConjugatePair, Engine, DEFAULT_GRID_NODES};
pub use newton::{conjugate_newton, NewtonOptions, NewtonSolution};
pub use steepness::{check_legendre_type, STEEP_THRESHOLD};
pub use subdiff::{subdiff_1d, Subdifferential1D};
