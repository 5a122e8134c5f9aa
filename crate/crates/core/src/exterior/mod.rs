//! Exterior calculus on coordinate charts.
//!
//! Forms and multivectors store antisymmetric coefficient tables keyed by
//! strictly increasing index vectors; signs of reordered indices are folded
//! into the coefficient.

mod chart;
mod form;
mod multivector;
mod pullback;

use thiserror::Error;

pub use chart::{
    action_name, base_symbol, field_symbol, momentum_name, velocity_name, Chart, Coord, Role,
};
pub use form::{Form, FormJson, Table, TermJson};
pub use multivector::{Multivector, VectorField};
pub use pullback::{partial_symbol, second_jet_symbol, SectionMap};

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExteriorError {
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Sorts in place by insertion sort. Returns the parity of the permutation
/// (`true` when odd), or `None` if an index repeats.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<bool> {
    let mut odd = false;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] >= idx[j] {
            if idx[j - 1] == idx[j] {
                return None;
            }
            idx.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    Some(odd)
}

/// Free-function shorthands mirroring the method API.
pub fn wedge(a: &Form, b: &Form) -> Result<Form, ExteriorError> {
    a.wedge(b)
}

pub fn ext_d(a: &Form) -> Form {
    a.ext_d()
}

pub fn contract(x: &Multivector, a: &Form) -> Result<Form, ExteriorError> {
    x.contract(a)
}

pub fn lie_derivative(x: &Multivector, a: &Form) -> Result<Form, ExteriorError> {
    x.lie_derivative(a)
}

pub fn schouten(x: &Multivector, y: &Multivector) -> Result<Multivector, ExteriorError> {
    x.schouten(y)
}

pub fn bar_d(a: &Form, sigma: &Form) -> Result<Form, ExteriorError> {
    a.bar_d(sigma)
}

pub fn pullback(psi: &SectionMap, a: &Form) -> Result<Form, ExteriorError> {
    psi.pullback(a)
}
