//! Exact linear algebra over the expression field.

use thiserror::Error;

use crate::expr::{Expr, ExprError, Symbol, ZeroTest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("equation `{0}` is not linear in the unknowns")]
    Nonlinear(String),
    #[error("inconsistent system; leftover equation `{0} = 0`")]
    Inconsistent(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Solution of a linear system: pivot unknowns expressed through the free ones.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    /// `(unknown, value)` for every pivot unknown.
    pub solved: Vec<(Symbol, Expr)>,
    pub free: Vec<Symbol>,
}

fn simplify_zero(e: Expr) -> Expr {
    if e.is_structurally_zero() || e.is_zero() == ZeroTest::NonZero {
        e
    } else {
        Expr::zero()
    }
}

/// Pivot preference: rational constants, then monomials, then the rest.
fn pivot_rank(e: &Expr) -> usize {
    if e.as_rational().is_some() {
        0
    } else if e.num_terms() == 1 {
        1
    } else {
        2 + e.num_terms()
    }
}

/// Solves `eqs = 0` for `unknowns` by reduced row echelon form. Pivots are
/// taken column by column in the given unknown order.
pub fn solve_linear(eqs: &[Expr], unknowns: &[Symbol]) -> Result<LinearSolution, SolveError> {
    let n = unknowns.len();
    // rows: [coefficients..., constant], meaning sum a_j u_j + c = 0
    let mut rows: Vec<Vec<Expr>> = Vec::new();
    for e in eqs {
        let mut row = Vec::with_capacity(n + 1);
        let mut rest = e.clone();
        for u in unknowns {
            let a = e.diff(u);
            if unknowns.iter().any(|v| a.contains(v)) {
                return Err(SolveError::Nonlinear(e.to_string()));
            }
            rest = rest - &a * &Expr::sym(u);
            row.push(a);
        }
        if unknowns.iter().any(|v| rest.contains(v)) {
            return Err(SolveError::Nonlinear(e.to_string()));
        }
        row.push(rest);
        rows.push(row);
    }

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let candidate = (r..rows.len())
            .filter(|&i| !rows[i][col].is_structurally_zero())
            .min_by_key(|&i| pivot_rank(&rows[i][col]));
        let Some(p) = candidate else { continue };
        rows.swap(r, p);
        let inv = rows[r][col].recip()?;
        let pivot_row: Vec<Expr> = rows[r].iter().map(|x| simplify_zero(x * &inv)).collect();
        rows[r] = pivot_row.clone();
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_structurally_zero() {
                continue;
            }
            let f = rows[i][col].clone();
            for j in 0..=n {
                let v = &rows[i][j] - &(&f * &pivot_row[j]);
                rows[i][j] = simplify_zero(v);
            }
        }
        pivots.push((r, col));
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    for row in &rows[r..] {
        if !row[n].is_structurally_zero() {
            return Err(SolveError::Inconsistent(row[n].to_string()));
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|p| p.1).collect();
    let free: Vec<Symbol> = (0..n)
        .filter(|c| !pivot_cols.contains(c))
        .map(|c| unknowns[c].clone())
        .collect();
    let solved = pivots
        .iter()
        .map(|&(row, col)| {
            let mut v = -rows[row][n].clone();
            for (j, u) in unknowns.iter().enumerate() {
                if j != col && !rows[row][j].is_structurally_zero() {
                    v = v - &rows[row][j] * &Expr::sym(u);
                }
            }
            (unknowns[col].clone(), v)
        })
        .collect();
    Ok(LinearSolution { solved, free })
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        n => {
            let mut acc = Expr::zero();
            for j in 0..n {
                if m[0][j].is_structurally_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, e)| e.clone())
                            .collect()
                    })
                    .collect();
                let t = &m[0][j] * &determinant(&minor);
                acc = if j % 2 == 0 { acc + t } else { acc - t };
            }
            acc
        }
    }
}
