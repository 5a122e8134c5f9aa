use super::form::{table_insert, table_wedge, Table};
use super::{Chart, ExteriorError, Form, Role};
use crate::expr::{Expr, Symbol, SymbolKind};

/// Placeholder for the partial derivative of a section component, `D[c,mu]`.
pub fn partial_symbol(target: &Chart, coord: usize, mu: usize) -> Symbol {
    let m = target.m();
    Symbol::new(
        SymbolKind::Partial,
        (coord * m + mu) as u32,
        format!("D[{},{}]", target.name(coord), target.base_names()[mu]),
    )
}

/// Second-order jet placeholder such as `y_tx` (base indices sorted).
pub fn second_jet_symbol(chart: &Chart, a: usize, mu: usize, nu: usize) -> Symbol {
    let m = chart.m();
    let (lo, hi) = if mu <= nu { (mu, nu) } else { (nu, mu) };
    let b = chart.base_names();
    Symbol::new(
        SymbolKind::SecondJet,
        (a * m * m + lo * m + hi) as u32,
        format!("{}_{}{}", chart.field_names()[a], b[lo], b[hi]),
    )
}

/// Map from a base chart into a target chart together with its Jacobian.
/// Component values may be abstract (placeholder symbols), in which case
/// their derivatives are supplied explicitly rather than computed.
#[derive(Debug, Clone)]
pub struct SectionMap {
    source: Chart,
    target: Chart,
    values: Vec<Expr>,
    /// `jacobian[t][s]` = derivative of component `t` along source coordinate `s`.
    jacobian: Vec<Vec<Expr>>,
}

impl SectionMap {
    /// Concrete section; derivatives are computed symbolically.
    pub fn new(source: &Chart, target: &Chart, values: Vec<Expr>) -> Result<SectionMap, ExteriorError> {
        let jacobian = values
            .iter()
            .map(|v| (0..source.dim()).map(|s| v.diff(source.symbol(s))).collect())
            .collect();
        SectionMap::with_jacobian(source, target, values, jacobian)
    }

    pub fn with_jacobian(
        source: &Chart,
        target: &Chart,
        values: Vec<Expr>,
        jacobian: Vec<Vec<Expr>>,
    ) -> Result<SectionMap, ExteriorError> {
        if values.len() != target.dim() || jacobian.len() != target.dim() {
            return Err(ExteriorError::Unsupported(
                "every target coordinate must be assigned".into(),
            ));
        }
        for mu in 0..source.m() {
            let t = target.base(mu);
            if values[t] != source.var(source.base(mu)) {
                return Err(ExteriorError::Unsupported(format!(
                    "base coordinate `{}` must map to itself",
                    target.name(t)
                )));
            }
        }
        Ok(SectionMap {
            source: source.clone(),
            target: target.clone(),
            values,
            jacobian,
        })
    }

    /// Generic section with abstract components: every non-base coordinate
    /// `c` maps to itself with partials `D[c,mu]`. On jet charts the section
    /// is holonomic: `y_mu` maps to `D[y,mu]` and its partials are the
    /// second-jet placeholders.
    pub fn abstract_section(base: &Chart, target: &Chart) -> Result<SectionMap, ExteriorError> {
        let m = target.m();
        let mut values = Vec::with_capacity(target.dim());
        let mut jac = Vec::with_capacity(target.dim());
        for i in 0..target.dim() {
            let mut row = vec![Expr::zero(); base.dim()];
            match target.role(i) {
                Role::Base { mu } => {
                    values.push(base.var(base.base(mu)));
                    row[base.base(mu)] = Expr::one();
                }
                Role::Velocity { a, mu } => {
                    let y = target.field(a);
                    values.push(Expr::sym(&partial_symbol(target, y, mu)));
                    for nu in 0..m {
                        row[base.base(nu)] = Expr::sym(&second_jet_symbol(target, a, mu, nu));
                    }
                }
                _ => {
                    values.push(target.var(i));
                    for nu in 0..m {
                        row[base.base(nu)] = Expr::sym(&partial_symbol(target, i, nu));
                    }
                }
            }
            jac.push(row);
        }
        SectionMap::with_jacobian(base, target, values, jac)
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn value(&self, i: usize) -> &Expr {
        &self.values[i]
    }

    /// `f o psi`.
    pub fn compose(&self, f: &Expr) -> Result<Expr, ExteriorError> {
        let map = (0..self.target.dim())
            .map(|i| (self.target.symbol(i).clone(), self.values[i].clone()))
            .collect();
        Ok(f.substitute(&map)?)
    }

    /// Pullback of a form on the target chart to the source chart.
    pub fn pullback(&self, alpha: &Form) -> Result<Form, ExteriorError> {
        if *alpha.chart() != self.target {
            return Err(ExteriorError::ChartMismatch);
        }
        let differentials: Vec<Table> = (0..self.target.dim())
            .map(|t| {
                let mut row = Table::new();
                for (s, j) in self.jacobian[t].iter().enumerate() {
                    table_insert(&mut row, vec![s], j.clone());
                }
                row
            })
            .collect();
        let mut out = Table::new();
        for (idx, c) in alpha.terms() {
            let mut acc = Table::new();
            table_insert(&mut acc, vec![], self.compose(c)?);
            for &i in idx {
                acc = table_wedge(&acc, &differentials[i]);
                if acc.is_empty() {
                    break;
                }
            }
            for (k, v) in acc {
                table_insert(&mut out, k, v);
            }
        }
        Ok(Form::from_terms(&self.source, alpha.degree(), out))
    }
}
