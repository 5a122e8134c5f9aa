use std::io::{self, Write};

use serde::Serialize;

use super::{Array, Convergence, DecayFit, Grid1p1, Norms};
use crate::Scalar;

/// Long-format dump with header `t,x,value`.
pub fn write_csv<T: Scalar, W: Write>(w: &mut W, grid: &Grid1p1<T>, values: &Array<T>, first_step: usize) -> io::Result<()> {
    writeln!(w, "t,x,value")?;
    for (k, row) in values.iter().enumerate() {
        let t = grid.t(first_step + k);
        for (i, v) in row.iter().enumerate() {
            writeln!(w, "{},{},{}", t, grid.x(i), v)?;
        }
    }
    Ok(())
}

/// JSON summary of a law verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary<T> {
    pub norms: Vec<Norms<T>>,
    pub convergence_ratios: Vec<T>,
    pub decay_fit: Option<DecayFit<T>>,
}

impl<T: Scalar> From<&Convergence<T>> for Summary<T> {
    fn from(c: &Convergence<T>) -> Self {
        Summary {
            norms: c.levels.iter().map(|l| l.residual).collect(),
            convergence_ratios: c.ratios.clone(),
            decay_fit: c.levels.last().and_then(|l| l.decay),
        }
    }
}
