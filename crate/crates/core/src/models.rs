//! Built-in models used by tests, the CLI and the benchmarks.

use crate::exterior::Chart;
use crate::expr::{Expr, Symbol};
use crate::lagrangian::LagrangianSystem;

/// The linearly damped vibrating string,
/// `L = (rho*y_t^2 - tau*y_x^2)/2 - gamma*s_t`, with symbolic parameters.
#[derive(Debug, Clone)]
pub struct DampedString {
    pub chart: Chart,
    pub rho: Symbol,
    pub tau: Symbol,
    pub gamma: Symbol,
}

impl DampedString {
    pub fn new() -> Self {
        DampedString {
            chart: Chart::jet(&["t", "x"], &["y"]).expect("valid chart"),
            rho: Symbol::param(0, "rho"),
            tau: Symbol::param(1, "tau"),
            gamma: Symbol::param(2, "gamma"),
        }
    }

    pub fn var(&self, name: &str) -> Expr {
        self.chart.var(self.chart.index_of(name).expect("coordinate"))
    }

    pub fn params(&self) -> Vec<Symbol> {
        vec![self.rho.clone(), self.tau.clone(), self.gamma.clone()]
    }

    /// The Lagrangian with `gamma` replaced by `gamma` (symbolic) or a fixed value.
    pub fn lagrangian_with(&self, gamma: Expr) -> Expr {
        let (rho, tau) = (Expr::sym(&self.rho), Expr::sym(&self.tau));
        let (yt, yx, st) = (self.var("y_t"), self.var("y_x"), self.var("s_t"));
        Expr::frac(1, 2) * (rho * &yt * &yt - tau * &yx * &yx) - gamma * st
    }

    pub fn lagrangian(&self) -> Expr {
        self.lagrangian_with(Expr::sym(&self.gamma))
    }

    pub fn system(&self) -> LagrangianSystem {
        LagrangianSystem::new(&self.chart, &self.params(), self.lagrangian()).expect("valid system")
    }

    /// The undamped string (`gamma = 0`).
    pub fn undamped(&self) -> LagrangianSystem {
        LagrangianSystem::new(&self.chart, &self.params(), self.lagrangian_with(Expr::zero()))
            .expect("valid system")
    }
}

impl Default for DampedString {
    fn default() -> Self {
        Self::new()
    }
}

/// Two uncoupled damped strings `u`, `v` with equal constants; rotations in
/// the `(u, v)` plane are symmetries.
pub fn isotropic_pair(gamma: Expr) -> LagrangianSystem {
    let chart = Chart::jet(&["t", "x"], &["u", "v"]).expect("valid chart");
    let var = |n: &str| chart.var(chart.index_of(n).expect("coordinate"));
    let sq = |n: &str| var(n) * var(n);
    let l = Expr::frac(1, 2) * (sq("u_t") + sq("v_t") - sq("u_x") - sq("v_x")) - gamma * var("s_t");
    LagrangianSystem::new(&chart, &[], l).expect("valid system")
}
