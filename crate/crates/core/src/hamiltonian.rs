//! Legendre transform and the multicontact Hamiltonian (de Donder-Weyl)
//! structure with its field equations.

use thiserror::Error;

use crate::exterior::{partial_symbol, Chart, ExteriorError, Form, Multivector, Role, SectionMap, VectorField};
use crate::expr::{Expr, ExprError, SubstMap, Symbol};
use crate::lagrangian::{check_symbols, total_derivative, unknown_symbol, LagrangianSystem, Structure};
use crate::linalg::{solve_linear, SolveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("singular Lagrangian: the Legendre map is not invertible")]
    Singular,
    #[error("velocity-momentum relations are not linear in the velocities: {}", .0.join("; "))]
    NonInvertible(Vec<String>),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Field equations of the Hamiltonian side, for a section written with
/// placeholders `D[c,mu]` for the partials of its components.
#[derive(Debug, Clone, PartialEq)]
pub struct HdwResiduals {
    /// `D[y^a,mu] - dH/dp^mu_a`, field-major.
    pub velocity: Vec<Expr>,
    /// `sum_mu D[p^mu_a,mu] + dH/dy^a + p^mu_a dH/ds^mu`, one per field.
    pub momentum: Vec<Expr>,
    /// `sum_mu D[s^mu,mu] - (p^mu_a dH/dp^mu_a - H)`.
    pub action: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSystem {
    chart: Chart,
    params: Vec<Symbol>,
    hamiltonian: Expr,
    structure: Structure,
}

impl HamiltonianSystem {
    pub fn new(chart: &Chart, params: &[Symbol], hamiltonian: Expr) -> Result<Self, HamiltonianError> {
        check_symbols(&hamiltonian, chart, params).map_err(HamiltonianError::UnknownSymbol)?;
        let (m, n) = (chart.m(), chart.field_names().len());
        let mut theta = Form::volume(chart).scale(&hamiltonian);
        let mut sigma = Form::zero(chart, 1);
        for mu in 0..m {
            for a in 0..n {
                let p = chart.var(chart.momentum(a, mu));
                let term = Form::d(chart, chart.field(a)).wedge(&Form::volume_minus(chart, mu))?;
                theta = &theta - &term.scale(&p);
            }
            theta = &theta
                + &Form::d(chart, chart.action(mu)).wedge(&Form::volume_minus(chart, mu))?;
            let dh = hamiltonian.diff(chart.symbol(chart.action(mu)));
            sigma = &sigma + &Form::d(chart, chart.base(mu)).scale(&dh);
        }
        Ok(HamiltonianSystem {
            chart: chart.clone(),
            params: params.to_vec(),
            hamiltonian,
            structure: Structure { chart: chart.clone(), theta, omega: Form::volume(chart), sigma },
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.hamiltonian
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

    fn dh(&self, i: usize) -> Expr {
        self.hamiltonian.diff(self.chart.symbol(i))
    }

    /// `p^mu_a dH/dp^mu_a - H`.
    fn action_source(&self) -> Expr {
        let c = &self.chart;
        let mut acc = -self.hamiltonian.clone();
        for a in 0..c.field_names().len() {
            for mu in 0..c.m() {
                let i = c.momentum(a, mu);
                acc = acc + c.var(i) * self.dh(i);
            }
        }
        acc
    }

    /// `-(dH/dy^a + p^mu_a dH/ds^mu)`.
    fn momentum_source(&self, a: usize) -> Expr {
        let c = &self.chart;
        let mut acc = self.dh(c.field(a));
        for mu in 0..c.m() {
            acc = acc + c.var(c.momentum(a, mu)) * self.dh(c.action(mu));
        }
        -acc
    }

    /// Solution multivector family: `y`-components `dH/dp`, with the traces of
    /// the momentum and action components fixed and every off-trace component
    /// left as a free symbol. The first factor's diagonal entry absorbs the trace.
    pub fn hdw_multivector(&self) -> (Multivector, Vec<Symbol>) {
        let c = &self.chart;
        let (m, n) = (c.m(), c.field_names().len());
        let mut free = Vec::new();
        let mut comps: Vec<Vec<(usize, Expr)>> = vec![Vec::new(); m];
        for (mu, cm) in comps.iter_mut().enumerate() {
            cm.push((c.base(mu), Expr::one()));
            for a in 0..n {
                cm.push((c.field(a), self.dh(c.momentum(a, mu))));
            }
        }
        let mut traced = |target: &dyn Fn(usize) -> usize, trace: Expr, comps: &mut Vec<Vec<(usize, Expr)>>| {
            for mu in 0..m {
                for nu in 0..m {
                    if mu == 0 && nu == 0 {
                        continue;
                    }
                    let u = unknown_symbol(c, mu, target(nu));
                    comps[mu].push((target(nu), Expr::sym(&u)));
                    free.push(u);
                }
            }
            let mut first = trace;
            for mu in 1..m {
                first = first - Expr::sym(&unknown_symbol(c, mu, target(mu)));
            }
            comps[0].push((target(0), first));
        };
        for a in 0..n {
            traced(&|nu| c.momentum(a, nu), self.momentum_source(a), &mut comps);
        }
        traced(&|nu| c.action(nu), self.action_source(), &mut comps);
        free.sort();
        let factors = comps.into_iter().map(|cm| VectorField::new(c, cm)).collect();
        (Multivector::decomposable(c, factors), free)
    }

    pub fn hdw_residuals(&self) -> HdwResiduals {
        let c = &self.chart;
        let (m, n) = (c.m(), c.field_names().len());
        let mut velocity = Vec::new();
        let mut momentum = Vec::new();
        for a in 0..n {
            for mu in 0..m {
                let d = Expr::sym(&partial_symbol(c, c.field(a), mu));
                velocity.push(d - self.dh(c.momentum(a, mu)));
            }
            let mut r = -self.momentum_source(a);
            for mu in 0..m {
                r = r + Expr::sym(&partial_symbol(c, c.momentum(a, mu), mu));
            }
            momentum.push(r);
        }
        let mut action = -self.action_source();
        for mu in 0..m {
            action = action + Expr::sym(&partial_symbol(c, c.action(mu), mu));
        }
        HdwResiduals { velocity, momentum, action }
    }
}

/// The Legendre map of a regular Lagrangian and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Legendre {
    jet: Chart,
    ham: Chart,
    /// `p^mu_a = dL/dy^a_mu`, keyed by momentum symbol.
    forward: Vec<(Symbol, Expr)>,
    /// `y^a_mu` in terms of momenta, keyed by velocity symbol.
    inverse: Vec<(Symbol, Expr)>,
}

impl Legendre {
    pub fn jet_chart(&self) -> &Chart {
        &self.jet
    }

    pub fn ham_chart(&self) -> &Chart {
        &self.ham
    }

    pub fn forward(&self) -> &[(Symbol, Expr)] {
        &self.forward
    }

    pub fn inverse(&self) -> &[(Symbol, Expr)] {
        &self.inverse
    }

    /// Rewrites an expression on the jet chart in multimomentum coordinates.
    pub fn to_momenta(&self, e: &Expr) -> Result<Expr, ExprError> {
        e.substitute(&self.inverse.iter().cloned().collect())
    }

    /// Rewrites an expression on the multimomentum chart in velocities.
    pub fn to_velocities(&self, e: &Expr) -> Result<Expr, ExprError> {
        e.substitute(&self.forward.iter().cloned().collect())
    }

    /// The Legendre map as a chart map `FL: jet -> multimomentum`.
    pub fn map(&self) -> Result<SectionMap, ExteriorError> {
        let values = (0..self.ham.dim())
            .map(|i| match self.ham.role(i) {
                Role::Momentum { .. } => {
                    let s = self.ham.symbol(i);
                    self.forward.iter().find(|(k, _)| k == s).map(|(_, v)| v.clone()).unwrap()
                }
                _ => self.ham.var(i),
            })
            .collect();
        SectionMap::new(&self.jet, &self.ham, values)
    }

    /// `FL^* alpha`.
    pub fn pullback(&self, alpha: &Form) -> Result<Form, ExteriorError> {
        self.map()?.pullback(alpha)
    }

    /// Rewrites Hamiltonian-side section residuals for a holonomic section:
    /// `D[y,mu] -> y_mu`, momenta through the forward map, and their partials
    /// through total derivatives.
    pub fn eliminate_momenta(&self, e: &Expr) -> Result<Expr, ExprError> {
        let (jet, ham) = (&self.jet, &self.ham);
        let mut map = SubstMap::new();
        for (p, v) in &self.forward {
            let i = ham.index_of_symbol(p).unwrap();
            map.insert(p.clone(), v.clone());
            for nu in 0..ham.m() {
                map.insert(partial_symbol(ham, i, nu), total_derivative(jet, v, nu));
            }
        }
        for a in 0..ham.field_names().len() {
            for mu in 0..ham.m() {
                map.insert(partial_symbol(ham, ham.field(a), mu), jet.var(jet.velocity(a, mu)));
            }
        }
        for mu in 0..ham.m() {
            for nu in 0..ham.m() {
                map.insert(
                    partial_symbol(ham, ham.action(mu), nu),
                    Expr::sym(&partial_symbol(jet, jet.action(mu), nu)),
                );
            }
        }
        e.substitute(&map)
    }
}

/// Legendre transform of a regular Lagrangian: the map, its inverse and
/// `H = (FL^-1)^* E_L`.
pub fn legendre(sys: &LagrangianSystem) -> Result<(Legendre, HamiltonianSystem), HamiltonianError> {
    if !sys.regularity().is_regular() {
        return Err(HamiltonianError::Singular);
    }
    let jet = sys.chart();
    let bases: Vec<&str> = jet.base_names().iter().map(String::as_str).collect();
    let fields: Vec<&str> = jet.field_names().iter().map(String::as_str).collect();
    let ham = Chart::hamiltonian(&bases, &fields).map_err(|e| ExteriorError::Unsupported(e))?;

    let mut forward = Vec::new();
    let mut eqs = Vec::new();
    let mut velocities = Vec::new();
    for a in 0..fields.len() {
        for mu in 0..bases.len() {
            let p = ham.symbol(ham.momentum(a, mu)).clone();
            let v = sys.momentum(a, mu);
            eqs.push(&v - &Expr::sym(&p));
            forward.push((p, v));
            velocities.push(jet.symbol(jet.velocity(a, mu)).clone());
        }
    }
    let sol = match solve_linear(&eqs, &velocities) {
        Ok(s) => s,
        Err(SolveError::Nonlinear(_)) => {
            return Err(HamiltonianError::NonInvertible(eqs.iter().map(|e| format!("{e} = 0")).collect()))
        }
        Err(SolveError::Expr(e)) => return Err(e.into()),
        Err(SolveError::Inconsistent(_)) => return Err(HamiltonianError::Singular),
    };
    if !sol.free.is_empty() {
        return Err(HamiltonianError::Singular);
    }
    let lg = Legendre { jet: jet.clone(), ham: ham.clone(), forward, inverse: sol.solved };
    let h = lg.to_momenta(sys.energy())?;
    let hsys = HamiltonianSystem::new(&ham, sys.params(), h)?;
    Ok((lg, hsys))
}
