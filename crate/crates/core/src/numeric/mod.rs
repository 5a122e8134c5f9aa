//! Finite-difference integration of 1+1 dimensional damped strings and the
//! discrete versions of their conservation and dissipation laws.
//!
//! Arrays are indexed `[n][i]` (time step, grid point). Everything is generic
//! over [`Scalar`]; the `*64` aliases fix `f64`.

mod grid;
mod laws;
mod io;

pub use grid::{Boundary, Grid1p1, Trajectory, Trajectory64, WaveParams};
pub use io::{write_csv, Summary};
pub use laws::{
    convergence_study, decay_fit, dissipation_residual, evaluate_current, evaluate_scalar,
    integrate_action_coordinate, l2_norm, relative_drift, staggered_energy, staggered_momentum,
    Convergence, Current, DecayFit, Level, Norms, Residual,
};

use thiserror::Error;

use crate::expr::{Bindings, Expr, SymbolKind};
use crate::lagrangian::LagrangianSystem;
use crate::Scalar;

pub type Array<T> = Vec<Vec<T>>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("CFL number {cfl:.4} exceeds 1")]
    Cfl { cfl: f64 },
    #[error("need at least 8 grid points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value at step {step}")]
    BlowUp { step: usize },
    #[error("`{0}` is not available on the trajectory")]
    Absent(String),
    #[error("cannot evaluate: {0}")]
    Eval(String),
    #[error("{0}")]
    Unsupported(String),
}

pub(crate) fn lit<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("representable constant")
}

/// Pairwise (cascade) summation: deterministic and with O(log n) error growth.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().fold(T::zero(), |a, &b| a + b);
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Reads `(rho, tau, gamma)` off `L = rho y_t^2/2 - tau y_x^2/2 - gamma s^t`
/// with the parameters bound in `b`. Any other Lagrangian is `Unsupported`.
pub fn damped_wave_params<T: Scalar>(sys: &LagrangianSystem, b: &Bindings<T>) -> Result<WaveParams<T>, NumericError> {
    let c = sys.chart();
    if c.m() != 2 || c.field_names().len() != 1 {
        return Err(NumericError::Unsupported("the integrator handles one field over (t, x)".into()));
    }
    let l = sys.lagrangian();
    let (yt, yx, st) = (c.symbol(c.velocity(0, 0)), c.symbol(c.velocity(0, 1)), c.symbol(c.action(0)));
    let rho = l.diff(yt).diff(yt);
    let tau = -l.diff(yx).diff(yx);
    let gamma = -l.diff(st);
    let half = Expr::frac(1, 2);
    let model = &half * &rho * c.var(c.velocity(0, 0)).pow(2).unwrap()
        - &half * &tau * c.var(c.velocity(0, 1)).pow(2).unwrap()
        - &gamma * c.var(c.action(0));
    let constant = |e: &Expr| e.free_symbols().iter().all(|s| s.kind() == SymbolKind::Param);
    if !(l - &model).is_structurally_zero() || ![&rho, &tau, &gamma].into_iter().all(constant) {
        return Err(NumericError::Unsupported(format!(
            "Lagrangian `{l}` is not of the form rho*y_t^2/2 - tau*y_x^2/2 - gamma*s_t"
        )));
    }
    let eval = |e: &Expr| e.eval(b).map_err(|err| NumericError::Eval(err.to_string()));
    let p = WaveParams { rho: eval(&rho)?, tau: eval(&tau)?, gamma: eval(&gamma)? };
    if !(p.rho > T::zero() && p.tau > T::zero()) {
        return Err(NumericError::Unsupported("rho and tau must be positive".into()));
    }
    Ok(p)
}

/// Leapfrog with semi-implicit damping:
/// `rho (y+ - 2y + y-)/dt^2 - tau d_xx y + gamma rho (y+ - y-)/(2dt) = 0`.
/// The first step is the second-order Taylor step from `(y0, v0)`.
pub fn integrate_damped_wave<T: Scalar>(
    p: &WaveParams<T>,
    y0: &[T],
    v0: &[T],
    grid: &Grid1p1<T>,
) -> Result<Trajectory<T>, NumericError> {
    let damping = |_: T| p.gamma;
    integrate(p, y0, v0, grid, &damping, None)
}

/// Coupling of the field equation to the action through `L = ... - g(s^t)`:
/// `g` and its derivative, which acts as a state-dependent damping rate.
pub struct ActionCoupling<'a, T> {
    pub g: &'a (dyn Fn(T) -> T + Sync),
    pub dg: &'a (dyn Fn(T) -> T + Sync),
}

/// Integrator for `L = rho y_t^2/2 - tau y_x^2/2 - g(s^t)` with `s^x = 0`.
/// Each step uses the damping rate `g'(s^n)`, then advances `s^t` by the
/// explicit midpoint rule on `ds/dt = L` (first order in the coupling).
pub fn integrate_s_coupled<T: Scalar>(
    rho: T,
    tau: T,
    coupling: &ActionCoupling<'_, T>,
    y0: &[T],
    v0: &[T],
    grid: &Grid1p1<T>,
) -> Result<Trajectory<T>, NumericError> {
    let p = WaveParams { rho, tau, gamma: T::zero() };
    integrate(&p, y0, v0, grid, coupling.dg, Some(coupling.g))
}

fn integrate<T: Scalar>(
    p: &WaveParams<T>,
    y0: &[T],
    v0: &[T],
    grid: &Grid1p1<T>,
    rate: &(dyn Fn(T) -> T + Sync),
    g: Option<&(dyn Fn(T) -> T + Sync)>,
) -> Result<Trajectory<T>, NumericError> {
    let nx = grid.nx;
    if y0.len() != nx || v0.len() != nx {
        return Err(NumericError::InvalidGrid(format!(
            "initial data has {} / {} points, grid has {nx}",
            y0.len(),
            v0.len()
        )));
    }
    let (dt, dx) = (grid.dt, grid.dx());
    let c2 = p.tau / p.rho;
    let lam = c2 * dt * dt / (dx * dx);
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);

    let mut y: Array<T> = Vec::with_capacity(grid.nt + 1);
    let mut s: Option<Array<T>> = g.map(|_| vec![vec![T::zero(); nx]]);
    let mut first = y0.to_vec();
    grid.apply_bc(&mut first);
    y.push(first);
    if grid.nt == 0 {
        return Ok(Trajectory::new(grid.clone(), y, v0.to_vec(), s));
    }

    let rates = |sn: Option<&Vec<T>>| -> Vec<T> {
        match sn {
            Some(row) => row.iter().map(|&v| rate(v)).collect(),
            None => vec![rate(T::zero()); nx],
        }
    };

    // Taylor step: y1 = y0 + dt v0 + dt^2/2 (c^2 y0_xx - gamma v0).
    let k0 = rates(s.as_ref().map(|a| &a[0]));
    let mut next = vec![T::zero(); nx];
    for i in 0..nx {
        let lap = grid.second_difference(&y[0], i);
        next[i] = y[0][i] + dt * v0[i] + half * dt * dt * (c2 * lap - k0[i] * v0[i]);
    }
    grid.apply_bc(&mut next);
    check_finite(&next, 1)?;
    y.push(next);
    if let (Some(sa), Some(g)) = (s.as_mut(), g) {
        let row = advance_action(p, grid, g, &y[0], &y[1], &sa[0]);
        sa.push(row);
    }

    for n in 1..grid.nt {
        let k = rates(s.as_ref().map(|a| &a[n]));
        let mut next = vec![T::zero(); nx];
        for i in 0..nx {
            let a = half * k[i] * dt;
            let lap = grid.second_difference(&y[n], i) * dx * dx;
            next[i] = (two * y[n][i] - (T::one() - a) * y[n - 1][i] + lam * lap) / (T::one() + a);
        }
        grid.apply_bc(&mut next);
        check_finite(&next, n + 1)?;
        y.push(next);
        if let (Some(sa), Some(g)) = (s.as_mut(), g) {
            let row = advance_action(p, grid, g, &y[n], &y[n + 1], &sa[n]);
            sa.push(row);
        }
    }
    Ok(Trajectory::new(grid.clone(), y, v0.to_vec(), s))
}

/// `s^{n+1} = s^n + dt L(y^{n+1/2}, s^{n+1/2})` with staggered velocity.
fn advance_action<T: Scalar>(
    p: &WaveParams<T>,
    grid: &Grid1p1<T>,
    g: &(dyn Fn(T) -> T + Sync),
    y0: &[T],
    y1: &[T],
    s0: &[T],
) -> Vec<T> {
    let half = lit::<T>(0.5);
    let dt = grid.dt;
    (0..grid.nx)
        .map(|i| {
            let v = (y1[i] - y0[i]) / dt;
            let yx = half * (grid.first_difference(y0, i) + grid.first_difference(y1, i));
            let kin = half * p.rho * v * v - half * p.tau * yx * yx;
            let mid = s0[i] + half * dt * (kin - g(s0[i]));
            s0[i] + dt * (kin - g(mid))
        })
        .collect()
}

fn check_finite<T: Scalar>(row: &[T], step: usize) -> Result<(), NumericError> {
    if row.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NumericError::BlowUp { step })
    }
}
