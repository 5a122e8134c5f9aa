//! Multicontact Lagrangian structure: Theta_L, omega, sigma_L, E_L, the
//! Herglotz-Euler-Lagrange equations and their SOPDE solution family.

use thiserror::Error;

use crate::exterior::{
    partial_symbol, second_jet_symbol, Chart, ExteriorError, Form, Multivector, Role, VectorField,
};
use crate::expr::{Expr, ProbeConfig, Symbol, SymbolKind, ZeroTest};
use crate::linalg::{determinant, solve_linear, SolveError};
use crate::verdict::Verdict;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LagrangianError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("chart is not a jet chart: {0}")]
    NotJetChart(String),
    #[error("singular Lagrangian: Hessian determinant vanishes")]
    Singular,
    #[error("SOPDE solve supports m in {{1, 2}}, got m = {0}")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

/// A multicontact structure `(Theta, omega)` with its dissipation form.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub chart: Chart,
    pub theta: Form,
    pub omega: Form,
    pub sigma: Form,
}

impl Structure {
    pub fn d_theta(&self) -> Form {
        self.theta.ext_d()
    }

    /// `d Theta + sigma ^ Theta`.
    pub fn bar_d_theta(&self) -> Form {
        self.theta.bar_d(&self.sigma).expect("sigma is a one-form on the same chart")
    }
}

/// Hessian regularity of `L` in the velocities.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularity {
    /// Determinant is a nonzero constant.
    Regular,
    /// Determinant is a nonzero expression that may vanish somewhere.
    RegularGenerically(Expr),
    Singular,
}

impl Regularity {
    pub fn is_regular(&self) -> bool {
        !matches!(self, Regularity::Singular)
    }
}

/// Residuals of the field equations for a holonomic section, written with
/// second-jet placeholders (`y_tt`, `y_tx`, ...) and action partials `D[s_t,t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldResiduals {
    pub fields: Vec<Expr>,
    pub action: Expr,
}

/// The solved family of semi-holonomic solution multivector fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SopdeFamily {
    pub chart: Chart,
    pub factors: Vec<VectorField>,
    /// Component unknowns left free by the solve.
    pub free: Vec<Symbol>,
    /// Component unknowns fixed by the solve.
    pub solved: Vec<(Symbol, Expr)>,
}

impl SopdeFamily {
    pub fn multivector(&self) -> Multivector {
        Multivector::decomposable(&self.chart, self.factors.clone())
    }
}

/// Name of the unknown in factor `mu` along chart coordinate `idx`
/// (`A5` is the y_x-component of the first factor on the string chart).
pub fn unknown_symbol(chart: &Chart, mu: usize, idx: usize) -> Symbol {
    let letter = (b'A' + mu as u8) as char;
    Symbol::new(SymbolKind::Free, (mu * chart.dim() + idx) as u32, format!("{letter}{}", idx + 1))
}

/// Total derivative `D_mu f` along holonomic sections.
pub fn total_derivative(chart: &Chart, f: &Expr, mu: usize) -> Expr {
    let mut acc = f.diff(chart.symbol(chart.base(mu)));
    for i in 0..chart.dim() {
        let s = chart.symbol(i);
        if !f.contains(s) {
            continue;
        }
        let df = f.diff(s);
        let factor = match chart.role(i) {
            Role::Field { a } => chart.var(chart.velocity(a, mu)),
            Role::Velocity { a, mu: nu } => Expr::sym(&second_jet_symbol(chart, a, nu, mu)),
            Role::Action { .. } => Expr::sym(&partial_symbol(chart, i, mu)),
            _ => continue,
        };
        acc = acc + factor * df;
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSystem {
    chart: Chart,
    params: Vec<Symbol>,
    lagrangian: Expr,
    energy: Expr,
    structure: Structure,
    hessian: Vec<Vec<Expr>>,
    regularity: Regularity,
}

pub(crate) fn check_symbols(e: &Expr, chart: &Chart, params: &[Symbol]) -> Result<(), String> {
    for s in e.free_symbols() {
        if chart.index_of_symbol(&s).is_none() && !params.contains(&s) {
            return Err(s.name().to_string());
        }
    }
    Ok(())
}

impl LagrangianSystem {
    pub fn new(chart: &Chart, params: &[Symbol], lagrangian: Expr) -> Result<Self, LagrangianError> {
        let (m, n) = (chart.m(), chart.field_names().len());
        if n == 0 || chart.find_role(Role::Velocity { a: 0, mu: 0 }).is_none() {
            return Err(LagrangianError::NotJetChart(format!("{chart:?}")));
        }
        check_symbols(&lagrangian, chart, params).map_err(LagrangianError::UnknownSymbol)?;
        let l = &lagrangian;

        let mut energy = -l.clone();
        let mut theta = Form::zero(chart, m);
        for a in 0..n {
            for mu in 0..m {
                let v = chart.symbol(chart.velocity(a, mu));
                let p = l.diff(v);
                energy = energy + &p * &Expr::sym(v);
                let term = Form::d(chart, chart.field(a)).wedge(&Form::volume_minus(chart, mu))?;
                theta = &theta - &term.scale(&p);
            }
        }
        theta = &theta + &Form::volume(chart).scale(&energy);
        let mut sigma = Form::zero(chart, 1);
        for mu in 0..m {
            theta = &theta
                + &Form::d(chart, chart.action(mu)).wedge(&Form::volume_minus(chart, mu))?;
            let ds = l.diff(chart.symbol(chart.action(mu)));
            sigma = &sigma - &Form::d(chart, chart.base(mu)).scale(&ds);
        }

        let vel: Vec<Symbol> = (0..n)
            .flat_map(|a| (0..m).map(move |mu| (a, mu)))
            .map(|(a, mu)| chart.symbol(chart.velocity(a, mu)).clone())
            .collect();
        let hessian: Vec<Vec<Expr>> = vel
            .iter()
            .map(|u| {
                let du = l.diff(u);
                vel.iter().map(|v| du.diff(v)).collect()
            })
            .collect();
        let det = determinant(&hessian);
        let regularity = match det.is_zero() {
            ZeroTest::Zero | ZeroTest::ProbablyZero => Regularity::Singular,
            ZeroTest::NonZero if det.as_rational().is_some() => Regularity::Regular,
            ZeroTest::NonZero => Regularity::RegularGenerically(det),
        };

        Ok(LagrangianSystem {
            chart: chart.clone(),
            params: params.to_vec(),
            lagrangian,
            energy,
            structure: Structure {
                chart: chart.clone(),
                theta,
                omega: Form::volume(chart),
                sigma,
            },
            hessian,
            regularity,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.lagrangian
    }

    pub fn energy(&self) -> &Expr {
        &self.energy
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn theta(&self) -> &Form {
        &self.structure.theta
    }

    pub fn omega(&self) -> &Form {
        &self.structure.omega
    }

    pub fn sigma(&self) -> &Form {
        &self.structure.sigma
    }

    pub fn hessian(&self) -> &[Vec<Expr>] {
        &self.hessian
    }

    pub fn regularity(&self) -> &Regularity {
        &self.regularity
    }

    /// `dL/dy^a_mu`.
    pub fn momentum(&self, a: usize, mu: usize) -> Expr {
        self.lagrangian.diff(self.chart.symbol(self.chart.velocity(a, mu)))
    }

    pub fn herglotz_el_residuals(&self) -> FieldResiduals {
        let c = &self.chart;
        let l = &self.lagrangian;
        let m = c.m();
        let fields = (0..c.field_names().len())
            .map(|a| {
                let mut r = -l.diff(c.symbol(c.field(a)));
                for mu in 0..m {
                    let p = self.momentum(a, mu);
                    let dl_ds = l.diff(c.symbol(c.action(mu)));
                    r = r + total_derivative(c, &p, mu) - dl_ds * p;
                }
                r
            })
            .collect();
        let mut action = -l.clone();
        for mu in 0..m {
            action = action + Expr::sym(&partial_symbol(c, c.action(mu), mu));
        }
        FieldResiduals { fields, action }
    }

    /// Solves `i_X Theta = 0`, `i_X d̄Theta = 0` over the semi-holonomic ansatz.
    pub fn solve_sopde_family(&self) -> Result<SopdeFamily, LagrangianError> {
        let c = &self.chart;
        let m = c.m();
        if !(1..=2).contains(&m) {
            return Err(LagrangianError::UnsupportedDimension(m));
        }
        if !self.regularity.is_regular() {
            return Err(LagrangianError::Singular);
        }
        let mut unknowns = Vec::new();
        let mut ansatz = Vec::new();
        for mu in 0..m {
            let mut comps = Vec::new();
            for i in 0..c.dim() {
                match c.role(i) {
                    Role::Base { mu: nu } if nu == mu => comps.push((i, Expr::one())),
                    Role::Base { .. } => {}
                    Role::Field { a } => comps.push((i, c.var(c.velocity(a, mu)))),
                    _ => {
                        let u = unknown_symbol(c, mu, i);
                        comps.push((i, Expr::sym(&u)));
                        unknowns.push(u);
                    }
                }
            }
            ansatz.push(VectorField::new(c, comps));
        }
        let x = Multivector::decomposable(c, ansatz.clone());
        let mut eqs = Vec::new();
        eqs.extend(x.contract(self.theta())?.terms().values().cloned());
        eqs.extend(x.contract(&self.structure.bar_d_theta())?.terms().values().cloned());
        let sol = solve_linear(&eqs, &unknowns)?;
        let subst = sol.solved.iter().cloned().collect();
        let factors = ansatz
            .iter()
            .map(|f| f.try_map_components(|e| e.substitute(&subst)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(ExteriorError::from)?;
        Ok(SopdeFamily { chart: c.clone(), factors, free: sol.free, solved: sol.solved })
    }

    /// Checks `sigma ^ i_R Theta = i_R dTheta` for a candidate Reeb field.
    pub fn verify_sigma_property(&self, r: &VectorField, cfg: &ProbeConfig) -> Result<Verdict, LagrangianError> {
        verify_sigma_property(&self.structure, r, cfg)
    }
}

pub fn verify_sigma_property(
    s: &Structure,
    r: &VectorField,
    cfg: &ProbeConfig,
) -> Result<Verdict, LagrangianError> {
    let lhs = s.sigma.wedge(&r.interior(&s.theta)?)?;
    let rhs = r.interior(&s.d_theta())?;
    Ok(Verdict::of(lhs.try_add(&-&rhs)?, cfg))
}
