use std::fmt;

use num_traits::{One, Signed};

use super::{Atom, Expr, Rational, Term};

/// Display adapter that renames symbols on the way out.
pub struct Renamed<'a, F: Fn(&str) -> String> {
    expr: &'a Expr,
    rename: F,
}

impl Expr {
    /// Formats with every symbol name passed through `rename`.
    pub fn display_with<F: Fn(&str) -> String>(&self, rename: F) -> Renamed<'_, F> {
        Renamed { expr: self, rename }
    }

    /// True when printing needs parentheses to act as a product factor.
    pub fn needs_parens(&self) -> bool {
        self.num_terms() > 1
    }
}

impl<F: Fn(&str) -> String> fmt::Display for Renamed<'_, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, &self.rename)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, rn: &dyn Fn(&str) -> String) -> fmt::Result {
    if e.terms().is_empty() {
        return f.write_str("0");
    }
    for (i, t) in e.terms().iter().enumerate() {
        let neg = t.coeff.is_negative();
        match (i, neg) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        write_term(f, t, rn)?;
    }
    Ok(())
}

fn write_atom(
    f: &mut fmt::Formatter<'_>,
    a: &Atom,
    k: i32,
    rn: &dyn Fn(&str) -> String,
) -> fmt::Result {
    match a {
        Atom::Sym(s) => f.write_str(&rn(s.name()))?,
        Atom::Func(func, arg) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, arg, rn)?;
            f.write_str(")")?;
        }
        Atom::Group(g) => {
            f.write_str("(")?;
            write_expr(f, g, rn)?;
            f.write_str(")")?;
        }
    }
    if k != 1 {
        write!(f, "^{k}")?;
    }
    Ok(())
}

/// Writes |coeff| * monomial as `num/den`.
fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, rn: &dyn Fn(&str) -> String) -> fmt::Result {
    let c: Rational = t.coeff.abs();
    let numer = c.numer().clone();
    let denom = c.denom().clone();
    let num_atoms: Vec<_> = t.mono.factors().iter().filter(|(_, k)| *k > 0).collect();
    let den_atoms: Vec<_> = t.mono.factors().iter().filter(|(_, k)| *k < 0).collect();

    let mut first = true;
    if !numer.is_one() || num_atoms.is_empty() {
        write!(f, "{numer}")?;
        first = false;
    }
    for (a, k) in &num_atoms {
        if !first {
            f.write_str("*")?;
        }
        first = false;
        write_atom(f, a, *k, rn)?;
    }

    let den_count = den_atoms.len() + usize::from(!denom.is_one());
    if den_count == 0 {
        return Ok(());
    }
    f.write_str("/")?;
    let single_bare = den_count == 1;
    if !single_bare {
        f.write_str("(")?;
    }
    let mut first = true;
    if !denom.is_one() {
        write!(f, "{denom}")?;
        first = false;
    }
    for (a, k) in &den_atoms {
        if !first {
            f.write_str("*")?;
        }
        first = false;
        write_atom(f, a, -*k, rn)?;
    }
    if !single_bare {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, &|s: &str| s.to_string())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
