use rayon::prelude::*;
use serde::Serialize;

use super::{integrate_damped_wave, lit, pairwise_sum, Array, Boundary, Grid1p1, NumericError, Trajectory, WaveParams};
use crate::exterior::{Chart, Form, Role};
use crate::expr::{Bindings, CompiledExpr, Expr, Symbol};
use crate::Scalar;

/// Where a compiled slot takes its value from.
#[derive(Debug, Clone, Copy)]
enum Source<T> {
    T,
    X,
    Y,
    Yt,
    Yx,
    St,
    Const(T),
}

struct Evaluator<T> {
    code: CompiledExpr<T>,
    sources: Vec<Source<T>>,
    /// Slot of `s^t`, if the expression reads it.
    s_slot: Option<usize>,
}

fn check_chart(chart: &Chart) -> Result<(), NumericError> {
    if chart.m() != 2 || chart.field_names().len() != 1 {
        return Err(NumericError::Unsupported(format!(
            "the integrator handles one field over (t, x); chart has m = {} and {} fields",
            chart.m(),
            chart.field_names().len()
        )));
    }
    Ok(())
}

impl<T: Scalar> Evaluator<T> {
    fn new(chart: &Chart, e: &Expr, params: &Bindings<T>, has_s: bool) -> Result<Self, NumericError> {
        check_chart(chart)?;
        let syms: Vec<Symbol> = e.free_symbols().into_iter().collect();
        let mut sources = Vec::with_capacity(syms.len());
        let mut s_slot = None;
        for (k, s) in syms.iter().enumerate() {
            let src = match chart.index_of_symbol(s).map(|i| chart.role(i)) {
                Some(Role::Base { mu: 0 }) => Source::T,
                Some(Role::Base { .. }) => Source::X,
                Some(Role::Field { .. }) => Source::Y,
                Some(Role::Velocity { mu: 0, .. }) => Source::Yt,
                Some(Role::Velocity { .. }) => Source::Yx,
                Some(Role::Action { mu: 0 }) => {
                    if !has_s {
                        return Err(NumericError::Absent(s.name().to_string()));
                    }
                    s_slot = Some(k);
                    Source::St
                }
                // gauge s^x = 0
                Some(Role::Action { .. }) => Source::Const(T::zero()),
                Some(_) => return Err(NumericError::Absent(s.name().to_string())),
                None => Source::Const(
                    params.get(s.name()).ok_or_else(|| NumericError::Eval(format!("unbound parameter `{}`", s.name())))?,
                ),
            };
            sources.push(src);
        }
        let code = e.compile(&syms).map_err(|err| NumericError::Eval(err.to_string()))?;
        Ok(Evaluator { code, sources, s_slot })
    }

    fn slots(&self, traj: &Trajectory<T>, n: usize, i: usize, buf: &mut Vec<T>) {
        buf.clear();
        for src in &self.sources {
            buf.push(match *src {
                Source::T => traj.grid.t(n),
                Source::X => traj.grid.x(i),
                Source::Y => traj.y[n][i],
                Source::Yt => traj.y_t(n, i),
                Source::Yx => traj.y_x(n, i),
                Source::St => traj.s_t.as_ref().map(|s| s[n][i]).unwrap_or_else(T::zero),
                Source::Const(v) => v,
            });
        }
    }

    fn eval_at(&self, traj: &Trajectory<T>, n: usize, i: usize, buf: &mut Vec<T>) -> T {
        self.slots(traj, n, i, buf);
        self.code.eval(buf)
    }

    fn array(&self, traj: &Trajectory<T>) -> Array<T> {
        let mut buf = Vec::new();
        (0..traj.y.len())
            .map(|n| (0..traj.grid.nx).map(|i| self.eval_at(traj, n, i, &mut buf)).collect())
            .collect()
    }
}

/// Evaluates an expression over the jet chart along the trajectory.
pub fn evaluate_scalar<T: Scalar>(
    chart: &Chart,
    e: &Expr,
    traj: &Trajectory<T>,
    params: &Bindings<T>,
) -> Result<Array<T>, NumericError> {
    Ok(Evaluator::new(chart, e, params, traj.s_t.is_some())?.array(traj))
}

/// Components `f^mu` of `psi^* xi = f^t dx - f^x dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Current<T> {
    pub ft: Array<T>,
    pub fx: Array<T>,
}

/// Pulls a one-form on the jet chart back along the discrete section.
/// `dy` pulls back to `y_t dt + y_x dx`; other fibre differentials are not
/// available on a trajectory.
pub fn evaluate_current<T: Scalar>(
    xi: &Form,
    traj: &Trajectory<T>,
    params: &Bindings<T>,
) -> Result<Current<T>, NumericError> {
    let chart = xi.chart();
    check_chart(chart)?;
    if xi.degree() != 1 {
        return Err(NumericError::Unsupported(format!("current must be a 1-form, got degree {}", xi.degree())));
    }
    let (t, x, y) = (chart.base(0), chart.base(1), chart.field(0));
    let (yt, yx) = (chart.var(chart.velocity(0, 0)), chart.var(chart.velocity(0, 1)));
    for idx in xi.terms().keys() {
        if ![t, x, y].contains(&idx[0]) {
            return Err(NumericError::Absent(format!("d{}", chart.name(idx[0]))));
        }
    }
    let cy = xi.coefficient(&[y]);
    let coeff_dt = xi.coefficient(&[t]) + &cy * &yt;
    let coeff_dx = xi.coefficient(&[x]) + &cy * &yx;
    let ft = evaluate_scalar(chart, &coeff_dx, traj, params)?;
    let fx = evaluate_scalar(chart, &-coeff_dt, traj, params)?;
    Ok(Current { ft, fx })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms<T> {
    pub max: T,
    pub l2: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual<T> {
    /// Rows for `n = 1 .. Nt-1`, columns over the interior points.
    pub values: Array<T>,
    pub norms: Norms<T>,
}

/// Space-time L2 norm `sqrt(sum r^2 dx dt)` and max norm.
pub fn l2_norm<T: Scalar>(values: &Array<T>, dx: T, dt: T) -> Norms<T> {
    let squares: Vec<T> = values.iter().map(|row| pairwise_sum(&row.iter().map(|v| *v * *v).collect::<Vec<_>>())).collect();
    let max = values.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    Norms { max, l2: (pairwise_sum(&squares) * dx * dt).sqrt() }
}

/// `d_t f^t + d_x f^x + sigma_t f^t + sigma_x f^x` by central differences,
/// which is the dissipation law `d_mu f^mu = (dL/ds^mu) f^mu` moved to one side.
pub fn dissipation_residual<T: Scalar>(f: &Current<T>, sigma: &[Array<T>; 2], grid: &Grid1p1<T>) -> Residual<T> {
    let two = lit::<T>(2.0);
    let nt = f.ft.len().saturating_sub(1);
    let values: Array<T> = (1..nt)
        .map(|n| {
            grid.interior_points()
                .map(|i| {
                    let dtf = (f.ft[n + 1][i] - f.ft[n - 1][i]) / (two * grid.dt);
                    let dxf = grid.first_difference(&f.fx[n], i);
                    dtf + dxf + sigma[0][n][i] * f.ft[n][i] + sigma[1][n][i] * f.fx[n][i]
                })
                .collect()
        })
        .collect();
    let norms = l2_norm(&values, grid.dx(), grid.dt);
    Residual { values, norms }
}

/// `s^t` from `d s^t/dt = L` (gauge `s^x = 0`) by the trapezoid rule with
/// `s^t(0, .) = 0`; an `s`-dependent `L` is handled by fixed-point iteration
/// of the implicit step.
pub fn integrate_action_coordinate<T: Scalar>(
    chart: &Chart,
    l: &Expr,
    traj: &Trajectory<T>,
    params: &Bindings<T>,
) -> Result<Array<T>, NumericError> {
    let ev = Evaluator::new(chart, l, params, true)?;
    let nx = traj.grid.nx;
    let half = lit::<T>(0.5);
    let dt = traj.grid.dt;
    let mut s: Array<T> = vec![vec![T::zero(); nx]];
    let mut buf = Vec::new();
    let at = |n: usize, i: usize, sv: T, buf: &mut Vec<T>| -> T {
        ev.slots(traj, n, i, buf);
        if let Some(k) = ev.s_slot {
            buf[k] = sv;
        }
        ev.code.eval(buf)
    };
    for n in 0..traj.steps() {
        let mut row = Vec::with_capacity(nx);
        for i in 0..nx {
            let s0 = s[n][i];
            let l0 = at(n, i, s0, &mut buf);
            let mut s1 = s0 + dt * l0;
            if ev.s_slot.is_some() {
                for _ in 0..50 {
                    let next = s0 + half * dt * (l0 + at(n + 1, i, s1, &mut buf));
                    let done = (next - s1).abs() <= lit::<T>(1e-15) * (T::one() + next.abs());
                    s1 = next;
                    if done {
                        break;
                    }
                }
            } else {
                s1 = s0 + half * dt * (l0 + at(n + 1, i, s1, &mut buf));
            }
            row.push(s1);
        }
        s.push(row);
    }
    Ok(s)
}

/// `Q^{n+1/2} = rho sum_i (y^{n+1}_i - y^n_i)/dt dx` at times `(n+1/2) dt`.
/// For the periodic scheme this decays exactly by `(1-a)/(1+a)`, `a = gamma dt/2`.
pub fn staggered_momentum<T: Scalar>(traj: &Trajectory<T>, rho: T) -> Vec<(T, T)> {
    let g = &traj.grid;
    let half = lit::<T>(0.5);
    (0..traj.steps())
        .map(|n| {
            let v: Vec<T> = (0..g.nx).map(|i| (traj.y[n + 1][i] - traj.y[n][i]) / g.dt).collect();
            (g.t(n) + half * g.dt, rho * pairwise_sum(&v) * g.dx())
        })
        .collect()
}

/// Leapfrog energy `sum (rho v^2/2 + tau (D+ y^{n+1})(D+ y^n)/2) dx` with
/// staggered velocity; conserved to rounding by the undamped scheme.
pub fn staggered_energy<T: Scalar>(traj: &Trajectory<T>, p: &WaveParams<T>) -> Vec<(T, T)> {
    let g = &traj.grid;
    let half = lit::<T>(0.5);
    let dx = g.dx();
    let fwd = |row: &[T], i: usize| -> T {
        let r = match g.bc {
            Boundary::Periodic => row[(i + 1) % g.nx],
            Boundary::DirichletZero => {
                if i + 1 == g.nx {
                    T::zero()
                } else {
                    row[i + 1]
                }
            }
        };
        (r - row[i]) / dx
    };
    (0..traj.steps())
        .map(|n| {
            let (a, b) = (&traj.y[n], &traj.y[n + 1]);
            let dens: Vec<T> = (0..g.nx)
                .map(|i| {
                    let v = (b[i] - a[i]) / g.dt;
                    half * p.rho * v * v + half * p.tau * fwd(b, i) * fwd(a, i)
                })
                .collect();
            (g.t(n) + half * g.dt, pairwise_sum(&dens) * dx)
        })
        .collect()
}

/// `max |q - q0| / |q0|`.
pub fn relative_drift<T: Scalar>(series: &[(T, T)]) -> T {
    let q0 = series[0].1;
    series.iter().fold(T::zero(), |m, &(_, q)| m.max(((q - q0) / q0).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit<T> {
    /// Fitted rate in `q(t) = A exp(-gamma t)`.
    pub gamma_hat: T,
    pub amplitude: T,
    /// Largest deviation of `ln|q|` from the fitted line.
    pub max_log_residual: T,
}

/// Least-squares fit of `ln|q|` against `t`. `None` when some sample is zero
/// or changes sign, so no exponential fits.
pub fn decay_fit<T: Scalar>(series: &[(T, T)]) -> Option<DecayFit<T>> {
    if series.len() < 2 {
        return None;
    }
    let sign = series[0].1.signum();
    if series.iter().any(|&(_, q)| q == T::zero() || q.signum() != sign || !q.is_finite()) {
        return None;
    }
    let n = T::from_usize(series.len()).unwrap();
    let ts: Vec<T> = series.iter().map(|p| p.0).collect();
    let ls: Vec<T> = series.iter().map(|p| p.1.abs().ln()).collect();
    let tm = pairwise_sum(&ts) / n;
    let lm = pairwise_sum(&ls) / n;
    let sxy: Vec<T> = ts.iter().zip(&ls).map(|(&t, &l)| (t - tm) * (l - lm)).collect();
    let sxx: Vec<T> = ts.iter().map(|&t| (t - tm) * (t - tm)).collect();
    let slope = pairwise_sum(&sxy) / pairwise_sum(&sxx);
    let intercept = lm - slope * tm;
    let max_log_residual = ts
        .iter()
        .zip(&ls)
        .fold(T::zero(), |m, (&t, &l)| m.max((l - intercept - slope * t).abs()));
    Some(DecayFit { gamma_hat: -slope, amplitude: sign * intercept.exp(), max_log_residual })
}

/// One resolution of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level<T> {
    pub nx: usize,
    pub nt: usize,
    pub dt: T,
    pub residual: Norms<T>,
    pub decay: Option<DecayFit<T>>,
    /// Relative drift of the staggered momentum.
    pub momentum_drift: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence<T> {
    pub levels: Vec<Level<T>>,
    /// `l2(coarse) / l2(fine)` per halving.
    pub ratios: Vec<T>,
}

/// Integrates at each `nx` (in parallel; results are independent of the
/// schedule) and measures the residual of the dissipation law for `xi`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study<T: Scalar>(
    p: &WaveParams<T>,
    y0: &(dyn Fn(T) -> T + Sync),
    v0: &(dyn Fn(T) -> T + Sync),
    lx: T,
    nxs: &[usize],
    t_final: T,
    cfl: T,
    bc: Boundary,
    xi: &Form,
    sigma: &Form,
    params: &Bindings<T>,
) -> Result<Convergence<T>, NumericError> {
    let levels: Vec<Level<T>> = nxs
        .par_iter()
        .map(|&nx| {
            let grid = Grid1p1::from_cfl(lx, nx, t_final, cfl, p.speed(), bc)?;
            let xs = grid.xs();
            let a: Vec<T> = xs.iter().map(|&x| y0(x)).collect();
            let b: Vec<T> = xs.iter().map(|&x| v0(x)).collect();
            let traj = integrate_damped_wave(p, &a, &b, &grid)?;
            let f = evaluate_current(xi, &traj, params)?;
            let chart = sigma.chart();
            let s = [
                evaluate_scalar(chart, &sigma.coefficient(&[chart.base(0)]), &traj, params)?,
                evaluate_scalar(chart, &sigma.coefficient(&[chart.base(1)]), &traj, params)?,
            ];
            let residual = dissipation_residual(&f, &s, &grid).norms;
            let q = staggered_momentum(&traj, p.rho);
            Ok(Level {
                nx,
                nt: grid.nt,
                dt: grid.dt,
                residual,
                decay: decay_fit(&q),
                momentum_drift: relative_drift(&q),
            })
        })
        .collect::<Result<_, NumericError>>()?;
    let ratios = levels.windows(2).map(|w| w[0].residual.l2 / w[1].residual.l2).collect();
    Ok(Convergence { levels, ratios })
}
