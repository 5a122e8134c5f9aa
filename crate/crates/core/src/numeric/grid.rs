use serde::{Deserialize, Serialize};

use super::{lit, Array, NumericError};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    /// `y = 0` at `x = 0` and `x = Lx`; the grid holds `x_i = i dx`, `i < Nx`,
    /// with the right boundary value implied.
    DirichletZero,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::DirichletZero => "dirichlet-zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams<T> {
    pub rho: T,
    pub tau: T,
    pub gamma: T,
}

impl<T: Scalar> WaveParams<T> {
    pub fn new(rho: T, tau: T, gamma: T) -> Self {
        WaveParams { rho, tau, gamma }
    }

    pub fn speed(&self) -> T {
        (self.tau / self.rho).sqrt()
    }
}

/// Uniform grid on `[0, Lx) x [0, Nt dt]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1p1<T> {
    pub lx: T,
    pub nx: usize,
    pub dt: T,
    pub nt: usize,
    pub bc: Boundary,
}

impl<T: Scalar> Grid1p1<T> {
    /// Validates `Nx >= 8` and `c dt/dx <= 1`.
    pub fn new(lx: T, nx: usize, dt: T, nt: usize, bc: Boundary, speed: T) -> Result<Self, NumericError> {
        if nx < 8 {
            return Err(NumericError::TooFewPoints(nx));
        }
        if !(lx > T::zero()) || !(dt > T::zero()) {
            return Err(NumericError::InvalidGrid("Lx and dt must be positive".into()));
        }
        let g = Grid1p1 { lx, nx, dt, nt, bc };
        let cfl = g.cfl(speed);
        if cfl > T::one() + lit(1e-12) {
            return Err(NumericError::Cfl { cfl: cfl.to_f64().unwrap_or(f64::INFINITY) });
        }
        Ok(g)
    }

    /// Largest step with CFL number at most `cfl` that divides `t_final` evenly.
    pub fn from_cfl(lx: T, nx: usize, t_final: T, cfl: T, speed: T, bc: Boundary) -> Result<Self, NumericError> {
        if nx == 0 {
            return Err(NumericError::TooFewPoints(nx));
        }
        let dx = lx / T::from_usize(nx).unwrap();
        let target = cfl * dx / speed;
        let nt = (t_final / target).ceil().to_usize().unwrap_or(0).max(1);
        let dt = t_final / T::from_usize(nt).unwrap();
        Grid1p1::new(lx, nx, dt, nt, bc, speed)
    }

    pub fn dx(&self) -> T {
        self.lx / T::from_usize(self.nx).unwrap()
    }

    pub fn x(&self, i: usize) -> T {
        T::from_usize(i).unwrap() * self.dx()
    }

    pub fn t(&self, n: usize) -> T {
        T::from_usize(n).unwrap() * self.dt
    }

    pub fn t_final(&self) -> T {
        self.t(self.nt)
    }

    pub fn cfl(&self, speed: T) -> T {
        speed * self.dt / self.dx()
    }

    pub fn xs(&self) -> Vec<T> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub(crate) fn apply_bc(&self, row: &mut [T]) {
        if self.bc == Boundary::DirichletZero {
            row[0] = T::zero();
        }
    }

    fn neighbours(&self, row: &[T], i: usize) -> (T, T) {
        let n = self.nx;
        match self.bc {
            Boundary::Periodic => (row[(i + n - 1) % n], row[(i + 1) % n]),
            Boundary::DirichletZero => (
                if i == 0 { T::zero() } else { row[i - 1] },
                if i + 1 == n { T::zero() } else { row[i + 1] },
            ),
        }
    }

    /// `(y_{i+1} - 2 y_i + y_{i-1}) / dx^2`.
    pub fn second_difference(&self, row: &[T], i: usize) -> T {
        let (l, r) = self.neighbours(row, i);
        let dx = self.dx();
        (r - lit::<T>(2.0) * row[i] + l) / (dx * dx)
    }

    /// Central `(y_{i+1} - y_{i-1}) / (2 dx)`.
    pub fn first_difference(&self, row: &[T], i: usize) -> T {
        let (l, r) = self.neighbours(row, i);
        (r - l) / (lit::<T>(2.0) * self.dx())
    }

    /// Points where a centred stencil is defined without boundary data.
    pub fn interior_points(&self) -> std::ops::Range<usize> {
        match self.bc {
            Boundary::Periodic => 0..self.nx,
            Boundary::DirichletZero => 1..self.nx - 1,
        }
    }
}

/// A discrete holonomic section: `y[n][i]` with derived velocities, and
/// optionally the action density `s^t` (gauge `s^x = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub grid: Grid1p1<T>,
    pub y: Array<T>,
    /// Initial velocity, used for `y_t` at `n = 0`.
    pub v0: Vec<T>,
    pub s_t: Option<Array<T>>,
}

pub type Trajectory64 = Trajectory<f64>;

impl<T: Scalar> Trajectory<T> {
    pub fn new(grid: Grid1p1<T>, y: Array<T>, v0: Vec<T>, s_t: Option<Array<T>>) -> Self {
        Trajectory { grid, y, v0, s_t }
    }

    pub fn steps(&self) -> usize {
        self.y.len() - 1
    }

    /// Central difference in time; `v0` at the start and the second-order
    /// one-sided difference at the end.
    pub fn y_t(&self, n: usize, i: usize) -> T {
        let dt = self.grid.dt;
        let two = lit::<T>(2.0);
        let last = self.steps();
        if n == 0 {
            self.v0[i]
        } else if n == last && n == 1 {
            (self.y[1][i] - self.y[0][i]) / dt
        } else if n == last {
            (lit::<T>(3.0) * self.y[n][i] - lit::<T>(4.0) * self.y[n - 1][i] + self.y[n - 2][i]) / (two * dt)
        } else {
            (self.y[n + 1][i] - self.y[n - 1][i]) / (two * dt)
        }
    }

    /// Central difference; at a clamped end the solution is continued oddly.
    pub fn y_x(&self, n: usize, i: usize) -> T {
        if i == 0 && self.grid.bc == Boundary::DirichletZero {
            return self.y[n][1] / self.grid.dx();
        }
        self.grid.first_difference(&self.y[n], i)
    }

    pub fn y_t_array(&self) -> Array<T> {
        (0..self.y.len()).map(|n| (0..self.grid.nx).map(|i| self.y_t(n, i)).collect()).collect()
    }

    pub fn y_x_array(&self) -> Array<T> {
        (0..self.y.len()).map(|n| (0..self.grid.nx).map(|i| self.y_x(n, i)).collect()).collect()
    }

    /// The section moved by the flow of `d/dy`: `y + eps`.
    pub fn translated(&self, eps: T) -> Self {
        let mut out = self.clone();
        for row in &mut out.y {
            for v in row.iter_mut() {
                *v = *v + eps;
            }
        }
        out
    }
}
