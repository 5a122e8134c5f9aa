//! Symbolic and numeric workbench for action-dependent (multicontact)
//! classical field theories.
//!
//! Symbolic coefficients are exact ([`Rational`]); everything numeric is
//! generic over [`Scalar`], with `f64` aliases provided below.

pub mod expr;
pub mod exterior;
pub mod random;
pub mod checks;
pub mod linalg;
pub mod verdict;
pub mod lagrangian;
pub mod models;
pub mod hamiltonian;
pub mod symmetry;
pub mod numeric;
pub mod dsl;

pub use expr::{Expr, Rational, Symbol, SymbolKind, ZeroTest};

/// Floating-point scalar used by evaluation and the numeric module.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + std::fmt::Debug
        + std::fmt::Display
        + Default
        + Send
        + Sync
        + 'static
{
}

pub type Bindings64 = expr::Bindings<f64>;
pub type Trajectory64 = numeric::Trajectory<f64>;
pub type Grid64 = numeric::Grid1p1<f64>;
