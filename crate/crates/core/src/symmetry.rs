//! Canonical lifts, Noether classification and the dissipation-law checks
//! that mechanize Noether's theorem.

use serde::Serialize;
use thiserror::Error;

use crate::exterior::{Chart, ExteriorError, Form, Multivector, Role, VectorField};
use crate::expr::{Expr, ProbeConfig, ZeroTest};
use crate::lagrangian::{total_derivative, Structure};
use crate::verdict::{Verdict, Witness, WitnessJson};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("vector field is not projectable: {0}")]
    NotProjectable(String),
    #[error("form has degree {got}, expected m - 1 = {expected}")]
    Degree { expected: usize, got: usize },
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    StrongNoether,
    Noether,
    NotNoether,
}

impl Classification {
    pub fn is_noether(self) -> bool {
        self != Classification::NotNoether
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::StrongNoether => "strong-noether",
            Classification::Noether => "noether",
            Classification::NotNoether => "not-noether",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub candidate: VectorField,
    pub classification: Classification,
    /// `L_Y sigma = 0`.
    pub sigma_invariant: bool,
    /// False only if the candidate is strong Noether yet moves sigma.
    pub lemma_held: bool,
    /// `xi_Y = i_Y Theta`.
    pub current: Form,
    /// Nonzero coefficients of `L_Y Theta`, then of `L_Y omega`.
    pub witnesses: Vec<Witness>,
    /// Some verdict was reached by probing rather than exactly.
    pub numerically_certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReportJson {
    pub candidate: String,
    pub classification: Classification,
    pub sigma_invariant: bool,
    pub lemma_held: bool,
    pub current: String,
    pub witnesses: Vec<WitnessJson>,
    pub numerically_certified: bool,
}

impl SymmetryReport {
    pub fn to_json(&self) -> SymmetryReportJson {
        SymmetryReportJson {
            candidate: self.candidate.to_paper_string(),
            classification: self.classification,
            sigma_invariant: self.sigma_invariant,
            lemma_held: self.lemma_held,
            current: self.current.to_paper_string(),
            witnesses: self
                .witnesses
                .iter()
                .map(|w| WitnessJson { basis: w.basis.clone(), coefficient: w.coefficient.to_string() })
                .collect(),
            numerically_certified: self.numerically_certified,
        }
    }
}

/// Checks the projectability conditions on a configuration-space field:
/// base components depend on base coordinates only, action components on
/// actions only.
fn check_projectable(y: &VectorField) -> Result<(), SymmetryError> {
    let c = y.chart();
    for (&i, e) in y.components() {
        let allowed = |j: usize| match (c.role(i), c.role(j)) {
            (Role::Base { .. }, Role::Base { .. }) => true,
            (Role::Base { .. }, _) => false,
            (Role::Action { .. }, Role::Action { .. }) => true,
            (Role::Action { .. }, _) => false,
            (Role::Field { .. }, _) => true,
            _ => false,
        };
        for s in e.free_symbols() {
            if let Some(j) = c.index_of_symbol(&s) {
                if !allowed(j) {
                    return Err(SymmetryError::NotProjectable(format!(
                        "component along `{}` depends on `{}`",
                        c.name(i),
                        c.name(j)
                    )));
                }
            }
        }
        if !matches!(c.role(i), Role::Base { .. } | Role::Field { .. } | Role::Action { .. }) {
            return Err(SymmetryError::NotProjectable(format!(
                "`{}` is not a configuration coordinate",
                c.name(i)
            )));
        }
    }
    Ok(())
}

/// Copies configuration components onto `target` by coordinate symbol.
fn transfer(y: &VectorField, target: &Chart) -> Result<Vec<(usize, Expr)>, SymmetryError> {
    y.components()
        .iter()
        .map(|(&i, e)| {
            let s = y.chart().symbol(i);
            target
                .index_of_symbol(s)
                .map(|j| (j, e.clone()))
                .ok_or_else(|| SymmetryError::NotProjectable(format!("`{}` not on target chart", s.name())))
        })
        .collect()
}

/// Canonical lift to the jet chart. Velocity components are the flow
/// prolongation `D_mu F^a - y^a_nu df^nu/dx^mu`; `paper_sign` negates them.
pub fn jet_lift(y: &VectorField, jet: &Chart, paper_sign: bool) -> Result<VectorField, SymmetryError> {
    check_projectable(y)?;
    let mut comps = transfer(y, jet)?;
    let comp = |i: usize| -> Expr {
        comps.iter().find(|(j, _)| *j == i).map(|(_, e)| e.clone()).unwrap_or_else(Expr::zero)
    };
    let m = jet.m();
    let mut extra = Vec::new();
    for a in 0..jet.field_names().len() {
        let fa = comp(jet.field(a));
        for mu in 0..m {
            // F depends on s only through the configuration; the prolongation
            // keeps base and field derivatives.
            let mut v = fa.diff(jet.symbol(jet.base(mu)));
            for b in 0..jet.field_names().len() {
                v = v + jet.var(jet.velocity(b, mu)) * fa.diff(jet.symbol(jet.field(b)));
            }
            for nu in 0..m {
                let df = comp(jet.base(nu)).diff(jet.symbol(jet.base(mu)));
                v = v - jet.var(jet.velocity(a, nu)) * df;
            }
            extra.push((jet.velocity(a, mu), if paper_sign { -v } else { v }));
        }
    }
    comps.extend(extra);
    Ok(VectorField::new(jet, comps))
}

/// Canonical lift to the multimomentum chart with momentum components
/// `(df^mu/dx^nu) p^nu_a - (df^nu/dx^nu) p^mu_a - (dF^b/dy^a) p^mu_b`.
pub fn hamiltonian_lift(y: &VectorField, ham: &Chart) -> Result<VectorField, SymmetryError> {
    check_projectable(y)?;
    let mut comps = transfer(y, ham)?;
    let comp = |i: usize| -> Expr {
        comps.iter().find(|(j, _)| *j == i).map(|(_, e)| e.clone()).unwrap_or_else(Expr::zero)
    };
    let (m, n) = (ham.m(), ham.field_names().len());
    let base = |mu: usize| ham.symbol(ham.base(mu));
    let mut div = Expr::zero();
    for nu in 0..m {
        div = div + comp(ham.base(nu)).diff(base(nu));
    }
    let mut extra = Vec::new();
    for a in 0..n {
        for mu in 0..m {
            let p = |b: usize, nu: usize| ham.var(ham.momentum(b, nu));
            let mut v = -(&div * &p(a, mu));
            for nu in 0..m {
                v = v + comp(ham.base(mu)).diff(base(nu)) * p(a, nu);
            }
            for b in 0..n {
                v = v - comp(ham.field(b)).diff(ham.symbol(ham.field(a))) * p(b, mu);
            }
            extra.push((ham.momentum(a, mu), v));
        }
    }
    comps.extend(extra);
    Ok(VectorField::new(ham, comps))
}

fn lie(y: &VectorField, alpha: &Form) -> Result<Form, ExteriorError> {
    y.to_multivector().lie_derivative(alpha)
}

/// Classifies `Y` against `(Theta, omega)` and attaches its current.
pub fn classify(y: &VectorField, s: &Structure, cfg: &ProbeConfig) -> Result<SymmetryReport, SymmetryError> {
    let theta = Verdict::of(lie(y, &s.theta)?, cfg);
    let omega = Verdict::of(lie(y, &s.omega)?, cfg);
    let sigma = Verdict::of(lie(y, &s.sigma)?, cfg);
    let classification = match (theta.holds(), omega.holds()) {
        (true, true) => Classification::StrongNoether,
        (true, false) => Classification::Noether,
        _ => Classification::NotNoether,
    };
    let mut witnesses = theta.witnesses.clone();
    if classification == Classification::NotNoether {
        witnesses.extend(omega.witnesses.clone());
    }
    let used = [&theta, &omega, &sigma];
    let numerically_certified = used.iter().any(|v| v.result == ZeroTest::ProbablyZero);
    Ok(SymmetryReport {
        candidate: y.clone(),
        classification,
        sigma_invariant: sigma.holds(),
        lemma_held: classification != Classification::StrongNoether || sigma.holds(),
        current: y.interior(&s.theta)?,
        witnesses,
        numerically_certified,
    })
}

/// `xi_Y = i_Y Theta`.
pub fn noether_current(y: &VectorField, s: &Structure) -> Result<Form, SymmetryError> {
    Ok(y.interior(&s.theta)?)
}

fn check_degree(xi: &Form, x: &Multivector) -> Result<(), SymmetryError> {
    let m = x.chart().m();
    if xi.degree() + 1 != m {
        return Err(SymmetryError::Degree { expected: m - 1, got: xi.degree() });
    }
    Ok(())
}

/// Dissipation law `i_X d̄xi = 0` over a solution family.
pub fn check_dissipative(
    xi: &Form,
    x: &Multivector,
    sigma: &Form,
    cfg: &ProbeConfig,
) -> Result<Verdict, SymmetryError> {
    check_degree(xi, x)?;
    Ok(Verdict::of(x.contract(&xi.bar_d(sigma)?)?, cfg))
}

/// Conservation law `i_X dxi = 0` over a solution family.
pub fn check_conserved(xi: &Form, x: &Multivector, cfg: &ProbeConfig) -> Result<Verdict, SymmetryError> {
    check_degree(xi, x)?;
    Ok(Verdict::of(x.contract(&xi.ext_d())?, cfg))
}

/// Total-derivative divergence of an (m-1)-form's current components along
/// holonomic sections, useful for reporting the law in PDE form.
pub fn current_components(xi: &Form) -> Vec<Expr> {
    let c = xi.chart();
    (0..c.m())
        .map(|mu| {
            let vol = Form::volume_minus(c, mu);
            let (idx, sign) = vol.terms().iter().next().map(|(k, v)| (k.clone(), v.clone())).unwrap();
            &xi.coefficient(&idx) * &sign
        })
        .collect()
}

/// `D_mu J^mu` of current components.
pub fn divergence(chart: &Chart, j: &[Expr]) -> Expr {
    j.iter().enumerate().fold(Expr::zero(), |acc, (mu, e)| acc + total_derivative(chart, e, mu))
}

/// One run of the Noether pipeline: classify, take the current, and check the
/// dissipation law over the solved SOPDE family.
#[derive(Debug, Clone, PartialEq)]
pub struct NoetherCheck {
    pub report: SymmetryReport,
    pub law: Verdict,
    /// Same current tested as a conservation law (holds iff sigma does not see it).
    pub conserved: Verdict,
}

pub fn verify_noether(
    sys: &crate::lagrangian::LagrangianSystem,
    y: &VectorField,
    cfg: &ProbeConfig,
) -> Result<NoetherCheck, NoetherError> {
    let report = classify(y, sys.structure(), cfg)?;
    let family = sys.solve_sopde_family()?.multivector();
    let law = check_dissipative(&report.current, &family, sys.sigma(), cfg)?;
    let conserved = check_conserved(&report.current, &family, cfg)?;
    Ok(NoetherCheck { report, law, conserved })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoetherError {
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Lagrangian(#[from] crate::lagrangian::LagrangianError),
}
