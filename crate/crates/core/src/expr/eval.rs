use std::collections::HashMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use super::{Atom, Expr, Func, Rational, Symbol};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Symbol-name to value map used by [`Expr::eval`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings<T> {
    values: HashMap<String, T>,
}

impl<T: Scalar> Bindings<T> {
    pub fn new() -> Self {
        Bindings {
            values: HashMap::new(),
        }
    }

    pub fn set(&mut self, name: impl Into<String>, v: T) -> &mut Self {
        self.values.insert(name.into(), v);
        self
    }

    pub fn with(mut self, name: impl Into<String>, v: T) -> Self {
        self.set(name, v);
        self
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.values.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<T: Scalar, S: Into<String>> FromIterator<(S, T)> for Bindings<T> {
    fn from_iter<I: IntoIterator<Item = (S, T)>>(iter: I) -> Self {
        Bindings {
            values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

pub(crate) fn rational_to<T: Scalar>(c: &Rational) -> T {
    // f64 division of the parts keeps small fractions exact
    let v = match (c.numer().to_f64(), c.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => c.to_f64().unwrap_or(f64::NAN),
    };
    T::from_f64(v).unwrap_or_else(T::nan)
}

fn apply<T: Scalar>(f: Func, x: T) -> T {
    match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Exp => x.exp(),
    }
}

impl Expr {
    /// Floating-point evaluation; every free symbol must be bound.
    pub fn eval<T: Scalar>(&self, b: &Bindings<T>) -> Result<T, EvalError> {
        let mut acc = T::zero();
        for t in self.terms() {
            acc = acc + self.eval_term(t, b)?;
        }
        Ok(acc)
    }

    fn eval_term<T: Scalar>(&self, t: &super::Term, b: &Bindings<T>) -> Result<T, EvalError> {
        let mut v: T = rational_to(&t.coeff);
        for (a, k) in t.mono.factors() {
            let base = match a {
                Atom::Sym(s) => b
                    .get(s.name())
                    .ok_or_else(|| EvalError::Unbound(s.name().to_string()))?,
                Atom::Func(f, arg) => apply(*f, arg.eval(b)?),
                Atom::Group(g) => g.eval(b)?,
            };
            if *k < 0 && base.is_zero() {
                return Err(EvalError::Domain(format!("zero raised to {k}")));
            }
            v = v * base.powi(*k);
        }
        Ok(v)
    }

    /// Per-term absolute values; used to scale probing tolerances.
    pub(crate) fn eval_abs_terms<T: Scalar>(&self, b: &Bindings<T>) -> Result<T, EvalError> {
        let mut acc = T::zero();
        for t in self.terms() {
            acc = acc + self.eval_term(t, b)?.abs();
        }
        Ok(acc)
    }

    /// Compiles for repeated evaluation over positional slots.
    pub fn compile<T: Scalar>(&self, slots: &[Symbol]) -> Result<CompiledExpr<T>, EvalError> {
        let index: HashMap<&Symbol, usize> = slots.iter().enumerate().map(|(i, s)| (s, i)).collect();
        compile_with(self, &index)
    }
}

#[derive(Debug, Clone)]
enum CAtom<T> {
    Slot(usize),
    Func(Func, Box<CompiledExpr<T>>),
    Group(Box<CompiledExpr<T>>),
}

#[derive(Debug, Clone)]
struct CTerm<T> {
    coeff: T,
    factors: Vec<(CAtom<T>, i32)>,
}

/// An expression lowered to slot indices; evaluation allocates nothing.
#[derive(Debug, Clone)]
pub struct CompiledExpr<T> {
    terms: Vec<CTerm<T>>,
}

fn compile_with<T: Scalar>(
    e: &Expr,
    index: &HashMap<&Symbol, usize>,
) -> Result<CompiledExpr<T>, EvalError> {
    let mut terms = Vec::with_capacity(e.terms().len());
    for t in e.terms() {
        let mut factors = Vec::with_capacity(t.mono.factors().len());
        for (a, k) in t.mono.factors() {
            let ca = match a {
                Atom::Sym(s) => CAtom::Slot(
                    *index
                        .get(s)
                        .ok_or_else(|| EvalError::Unbound(s.name().to_string()))?,
                ),
                Atom::Func(f, arg) => CAtom::Func(*f, Box::new(compile_with(arg, index)?)),
                Atom::Group(g) => CAtom::Group(Box::new(compile_with(g, index)?)),
            };
            factors.push((ca, *k));
        }
        terms.push(CTerm {
            coeff: rational_to(&t.coeff),
            factors,
        });
    }
    Ok(CompiledExpr { terms })
}

impl<T: Scalar> CompiledExpr<T> {
    /// Evaluates with `vals[i]` bound to slot `i`. Division by zero yields
    /// non-finite values rather than an error.
    pub fn eval(&self, vals: &[T]) -> T {
        let mut acc = T::zero();
        for t in &self.terms {
            let mut v = t.coeff;
            for (a, k) in &t.factors {
                let base = match a {
                    CAtom::Slot(i) => vals[*i],
                    CAtom::Func(f, arg) => apply(*f, arg.eval(vals)),
                    CAtom::Group(g) => g.eval(vals),
                };
                v = v * if *k == 1 { base } else { base.powi(*k) };
            }
            acc = acc + v;
        }
        acc
    }

    pub fn is_zero_expr(&self) -> bool {
        self.terms.is_empty()
    }
}
