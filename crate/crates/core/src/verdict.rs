use serde::Serialize;

use crate::exterior::Form;
use crate::expr::{Expr, ProbeConfig, ZeroTest};

/// A nonzero coefficient left over by a failed identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub index: Vec<usize>,
    pub basis: String,
    pub coefficient: Expr,
}

/// Outcome of a symbolic "this form vanishes" check.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub result: ZeroTest,
    pub witnesses: Vec<Witness>,
    /// The form that was tested.
    pub residual: Form,
}

impl Verdict {
    pub fn of(residual: Form, cfg: &ProbeConfig) -> Verdict {
        let (result, w) = residual.zero_test(cfg);
        let witnesses = w
            .into_iter()
            .map(|(index, coefficient)| Witness {
                basis: residual.basis_label(&index),
                index,
                coefficient,
            })
            .collect();
        Verdict { result, witnesses, residual }
    }

    pub fn holds(&self) -> bool {
        self.result.holds()
    }

    pub fn is_exact(&self) -> bool {
        self.result.is_exact()
    }

    pub fn to_json(&self) -> VerdictJson {
        VerdictJson {
            holds: self.holds(),
            certificate: self.result,
            witnesses: self
                .witnesses
                .iter()
                .map(|w| WitnessJson { basis: w.basis.clone(), coefficient: w.coefficient.to_string() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictJson {
    pub holds: bool,
    pub certificate: ZeroTest,
    pub witnesses: Vec<WitnessJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessJson {
    pub basis: String,
    pub coefficient: String,
}
