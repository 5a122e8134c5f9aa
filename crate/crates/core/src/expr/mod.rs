//! Computer-algebra kernel.
//!
//! An [`Expr`] is always held in canonical form: an expanded sum of terms,
//! each term an exact rational coefficient times a monomial. A monomial is a
//! sorted product of atoms raised to nonzero integer powers. Atoms are
//! symbols, elementary function applications, and inverted multi-term
//! groups (a non-monomial polynomial that only ever appears with a negative
//! exponent). Positive powers of sums are always expanded.
//!
//! Two expressions are equal iff their canonical forms are identical. For
//! expressions free of elementary functions, [`Expr::zero_test`] is a
//! decision procedure (denominators are cleared before comparing with zero);
//! otherwise it falls back to randomized probing.

mod display;
mod eval;
mod symbol;
mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use eval::{Bindings, CompiledExpr, EvalError};
pub use symbol::{Symbol, SymbolKind};
pub use zero::{ProbeConfig, ZeroTest};

/// Exact coefficient field.
pub type Rational = BigRational;

/// Map used for simultaneous substitution.
pub type SubstMap = BTreeMap<Symbol, Expr>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("undeclared symbol `{0}`")]
    Undeclared(String),
}

/// Elementary functions understood by the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Atom {
    Sym(Symbol),
    Func(Func, Expr),
    /// Multi-term polynomial; its exponent inside a canonical monomial is negative.
    Group(Expr),
}

impl Atom {
    fn contains(&self, v: &Symbol) -> bool {
        match self {
            Atom::Sym(s) => s == v,
            Atom::Func(_, e) | Atom::Group(e) => e.contains(v),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let k = a[i].1 + b[j].1;
                    if k != 0 {
                        out.push((a[i].0.clone(), k));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    fn powi(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::default();
        }
        Monomial(self.0.iter().map(|(a, k)| (a.clone(), k * n)).collect())
    }

    fn has_positive_group(&self) -> bool {
        self.0
            .iter()
            .any(|(a, k)| matches!(a, Atom::Group(_)) && *k > 0)
    }

    pub(crate) fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Term {
    mono: Monomial,
    coeff: Rational,
}

/// Immutable symbolic scalar in canonical form. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Expr(Arc<Vec<Term>>);

/// Read-only view of the top node of an expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Rational),
    Sym(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, i32),
    Apply(Func, Expr),
}

fn accumulate(acc: &mut BTreeMap<Monomial, Rational>, mono: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    match acc.entry(mono) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// Adds `c * mono` to the accumulator, expanding positive powers of groups.
fn accumulate_expanding(acc: &mut BTreeMap<Monomial, Rational>, mono: Monomial, c: Rational) {
    if !mono.has_positive_group() {
        accumulate(acc, mono, c);
        return;
    }
    let mut rest = Vec::new();
    let mut expanded = Expr::rational(c);
    for (atom, k) in mono.0 {
        match atom {
            Atom::Group(g) if k > 0 => expanded = &expanded * &g.pow_nonneg(k as u32),
            other => rest.push((other, k)),
        }
    }
    let rest = Monomial(rest);
    for t in expanded.terms() {
        accumulate_expanding(acc, t.mono.mul(&rest), t.coeff.clone());
    }
}

impl Expr {
    fn from_map(map: BTreeMap<Monomial, Rational>) -> Expr {
        Expr(Arc::new(
            map.into_iter()
                .map(|(mono, coeff)| Term { mono, coeff })
                .collect(),
        ))
    }

    pub(crate) fn terms(&self) -> &[Term] {
        &self.0
    }

    fn single(coeff: Rational, mono: Monomial) -> Expr {
        if coeff.is_zero() {
            return Expr::zero();
        }
        let mut acc = BTreeMap::new();
        accumulate_expanding(&mut acc, mono, coeff);
        Expr::from_map(acc)
    }

    pub fn zero() -> Expr {
        Expr(Arc::new(Vec::new()))
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(Rational::from_integer(BigInt::from(n)))
    }

    /// The exact fraction `num/den`. Panics if `den == 0`.
    pub fn frac(num: i64, den: i64) -> Expr {
        assert!(den != 0, "zero denominator");
        Expr::rational(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn rational(c: Rational) -> Expr {
        if c.is_zero() {
            Expr::zero()
        } else {
            Expr(Arc::new(vec![Term {
                mono: Monomial::default(),
                coeff: c,
            }]))
        }
    }

    pub fn sym(s: &Symbol) -> Expr {
        Expr(Arc::new(vec![Term {
            mono: Monomial(vec![(Atom::Sym(s.clone()), 1)]),
            coeff: Rational::one(),
        }]))
    }

    /// Structural zero test; see [`Expr::zero_test`] for the semantic one.
    pub fn is_structurally_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Returns the value if the expression is a rational constant.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.0.as_slice() {
            [] => Some(Rational::zero()),
            [t] if t.mono.0.is_empty() => Some(t.coeff.clone()),
            _ => None,
        }
    }

    /// Returns the symbol if the expression is exactly one bare symbol.
    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.0.as_slice() {
            [t] if t.coeff.is_one() => match t.mono.0.as_slice() {
                [(Atom::Sym(s), 1)] => Some(s),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|c| c.is_one())
    }

    pub fn num_terms(&self) -> usize {
        self.0.len()
    }

    /// Splits into single-term summands.
    pub fn summands(&self) -> Vec<Expr> {
        self.0
            .iter()
            .map(|t| Expr(Arc::new(vec![t.clone()])))
            .collect()
    }

    /// Coefficient of the leading term (zero for the zero expression).
    pub fn leading_coefficient(&self) -> Rational {
        self.0
            .first()
            .map(|t| t.coeff.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn node(&self) -> Node {
        match self.0.as_slice() {
            [] => Node::Const(Rational::zero()),
            [t] => {
                let mut factors: Vec<Expr> = Vec::new();
                if !t.coeff.is_one() || t.mono.0.is_empty() {
                    factors.push(Expr::rational(t.coeff.clone()));
                }
                for (a, k) in &t.mono.0 {
                    let base = match a {
                        Atom::Sym(s) => Expr::sym(s),
                        Atom::Func(f, e) => Expr::apply(*f, e.clone()),
                        Atom::Group(g) => g.clone(),
                    };
                    factors.push(if *k == 1 {
                        base
                    } else {
                        Expr::single(
                            Rational::one(),
                            Monomial(vec![(a.clone(), *k)]),
                        )
                    });
                }
                if factors.len() > 1 {
                    return Node::Product(factors);
                }
                if t.mono.0.is_empty() {
                    return Node::Const(t.coeff.clone());
                }
                let (a, k) = &t.mono.0[0];
                match (a, *k) {
                    (Atom::Sym(s), 1) => Node::Sym(s.clone()),
                    (Atom::Func(f, e), 1) => Node::Apply(*f, e.clone()),
                    (Atom::Sym(s), k) => Node::Pow(Expr::sym(s), k),
                    (Atom::Func(f, e), k) => Node::Pow(Expr::apply(*f, e.clone()), k),
                    (Atom::Group(g), k) => Node::Pow(g.clone(), k),
                }
            }
            _ => Node::Sum(self.summands()),
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.0.is_empty() {
            return other.clone();
        }
        if other.0.is_empty() {
            return self.clone();
        }
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].mono.cmp(&b[j].mono) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = &a[i].coeff + &b[j].coeff;
                    if !c.is_zero() {
                        out.push(Term {
                            mono: a[i].mono.clone(),
                            coeff: c,
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Expr(Arc::new(out))
    }

    pub fn neg(&self) -> Expr {
        Expr(Arc::new(
            self.0
                .iter()
                .map(|t| Term {
                    mono: t.mono.clone(),
                    coeff: -t.coeff.clone(),
                })
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.0.is_empty() || other.0.is_empty() {
            return Expr::zero();
        }
        if let Some(c) = self.as_rational() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_rational() {
            return self.scale(&c);
        }
        let mut acc = BTreeMap::new();
        for s in self.0.iter() {
            for t in other.0.iter() {
                accumulate_expanding(&mut acc, s.mono.mul(&t.mono), &s.coeff * &t.coeff);
            }
        }
        Expr::from_map(acc)
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        Expr(Arc::new(
            self.0
                .iter()
                .map(|t| Term {
                    mono: t.mono.clone(),
                    coeff: &t.coeff * c,
                })
                .collect(),
        ))
    }

    fn pow_nonneg(&self, n: u32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if let [t] = self.0.as_slice() {
            return Expr::single(num_traits::pow(t.coeff.clone(), n as usize), t.mono.powi(n as i32));
        }
        let mut result = Expr::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Integer power. Negative exponents of zero are an error.
    pub fn pow(&self, n: i32) -> Result<Expr, ExprError> {
        if n >= 0 {
            Ok(self.pow_nonneg(n as u32))
        } else {
            Ok(self.recip()?.pow_nonneg(n.unsigned_abs()))
        }
    }

    /// Multiplicative inverse.
    pub fn recip(&self) -> Result<Expr, ExprError> {
        match self.0.as_slice() {
            [] => Err(ExprError::DivisionByZero),
            [t] => Ok(Expr::single(t.coeff.recip(), t.mono.powi(-1))),
            terms => {
                // Pull out the leading coefficient and the common symbol/function
                // content so that the group atom is normalized.
                let lead = terms[0].coeff.clone();
                let mut atoms: BTreeSet<&Atom> = BTreeSet::new();
                for t in terms {
                    for (a, _) in &t.mono.0 {
                        if !matches!(a, Atom::Group(_)) {
                            atoms.insert(a);
                        }
                    }
                }
                // exponent of the common content is the minimum over terms,
                // counting an absent atom as exponent zero
                let mut content: BTreeMap<Atom, i32> = BTreeMap::new();
                for a in atoms {
                    let k = terms
                        .iter()
                        .map(|t| {
                            t.mono
                                .0
                                .iter()
                                .find(|(b, _)| b == a)
                                .map_or(0, |(_, k)| *k)
                        })
                        .min()
                        .unwrap_or(0);
                    if k != 0 {
                        content.insert(a.clone(), k);
                    }
                }
                let g = Monomial(content.into_iter().collect());
                let unit = Expr::single(lead.recip(), g.powi(-1));
                let normalized = self.mul(&unit);
                let inv_group = Expr::single(
                    Rational::one(),
                    Monomial(vec![(Atom::Group(normalized), -1)]),
                );
                Ok(inv_group.mul(&unit))
            }
        }
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        Ok(self.mul(&other.recip()?))
    }

    /// Elementary function application with exact folding at zero.
    pub fn apply(f: Func, arg: Expr) -> Expr {
        if arg.is_structurally_zero() {
            return match f {
                Func::Sin => Expr::zero(),
                Func::Cos | Func::Exp => Expr::one(),
            };
        }
        Expr(Arc::new(vec![Term {
            mono: Monomial(vec![(Atom::Func(f, arg), 1)]),
            coeff: Rational::one(),
        }]))
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self.clone())
    }

    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self.clone())
    }

    pub fn contains(&self, v: &Symbol) -> bool {
        self.0
            .iter()
            .any(|t| t.mono.0.iter().any(|(a, _)| a.contains(v)))
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for t in self.0.iter() {
            for (a, _) in &t.mono.0 {
                match a {
                    Atom::Sym(s) => {
                        out.insert(s.clone());
                    }
                    Atom::Func(_, e) | Atom::Group(e) => e.collect_symbols(out),
                }
            }
        }
    }

    /// True if any elementary function application occurs.
    pub fn has_functions(&self) -> bool {
        self.0.iter().any(|t| {
            t.mono.0.iter().any(|(a, _)| match a {
                Atom::Sym(_) => false,
                Atom::Func(..) => true,
                Atom::Group(g) => g.has_functions(),
            })
        })
    }

    /// Exact partial derivative; all other symbols are independent.
    pub fn diff(&self, v: &Symbol) -> Expr {
        let mut acc = BTreeMap::new();
        let mut extra = Expr::zero();
        for t in self.0.iter() {
            for (idx, (atom, k)) in t.mono.0.iter().enumerate() {
                if !atom.contains(v) {
                    continue;
                }
                let mut rest = t.mono.0.clone();
                if *k == 1 {
                    rest.remove(idx);
                } else {
                    rest[idx].1 = k - 1;
                }
                let c = &t.coeff * Rational::from_integer(BigInt::from(*k));
                let rest = Monomial(rest);
                match atom {
                    Atom::Sym(_) => accumulate_expanding(&mut acc, rest, c),
                    Atom::Func(f, u) => {
                        let du = u.diff(v);
                        let outer = match f {
                            Func::Sin => Expr::apply(Func::Cos, u.clone()),
                            Func::Cos => Expr::apply(Func::Sin, u.clone()).neg(),
                            Func::Exp => Expr::apply(Func::Exp, u.clone()),
                        };
                        extra = extra.add(&Expr::single(c, rest).mul(&outer).mul(&du));
                    }
                    Atom::Group(g) => {
                        extra = extra.add(&Expr::single(c, rest).mul(&g.diff(v)));
                    }
                }
            }
        }
        Expr::from_map(acc).add(&extra)
    }

    /// Simultaneous substitution followed by canonicalization.
    pub fn substitute(&self, map: &SubstMap) -> Result<Expr, ExprError> {
        if map.is_empty() {
            return Ok(self.clone());
        }
        let touches = |a: &Atom| -> bool {
            match a {
                Atom::Sym(s) => map.contains_key(s),
                _ => map.keys().any(|s| a.contains(s)),
            }
        };
        let mut untouched = BTreeMap::new();
        let mut result = Expr::zero();
        for t in self.0.iter() {
            if !t.mono.0.iter().any(|(a, _)| touches(a)) {
                accumulate(&mut untouched, t.mono.clone(), t.coeff.clone());
                continue;
            }
            let mut prod = Expr::rational(t.coeff.clone());
            for (a, k) in &t.mono.0 {
                let base = match a {
                    Atom::Sym(s) => map.get(s).cloned().unwrap_or_else(|| Expr::sym(s)),
                    Atom::Func(f, u) => Expr::apply(*f, u.substitute(map)?),
                    Atom::Group(g) => g.substitute(map)?,
                };
                prod = prod.mul(&base.pow(*k)?);
            }
            result = result.add(&prod);
        }
        Ok(Expr::from_map(untouched).add(&result))
    }

    /// Substitutes a single symbol.
    pub fn subs(&self, v: &Symbol, with: &Expr) -> Result<Expr, ExprError> {
        let mut m = SubstMap::new();
        m.insert(v.clone(), with.clone());
        self.substitute(&m)
    }

    /// Multiplies through by every top-level inverted group until none
    /// remain. The result vanishes iff `self` does (wherever defined).
    pub fn cleared_numerator(&self) -> Expr {
        let mut e = self.clone();
        loop {
            let mut groups: BTreeMap<Atom, i32> = BTreeMap::new();
            for t in e.0.iter() {
                for (a, k) in &t.mono.0 {
                    if matches!(a, Atom::Group(_)) && *k < 0 {
                        let entry = groups.entry(a.clone()).or_insert(0);
                        *entry = (*entry).max(-k);
                    }
                }
            }
            if groups.is_empty() {
                return e;
            }
            let factor = Monomial(groups.into_iter().collect());
            let mut acc = BTreeMap::new();
            for t in e.0.iter() {
                accumulate_expanding(&mut acc, t.mono.mul(&factor), t.coeff.clone());
            }
            e = Expr::from_map(acc);
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $call:ident) => {
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$call(self, rhs)
            }
        }
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$call(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$call(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$call(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl ops::Div<&Expr> for &Expr {
    type Output = Expr;
    /// Panics on an exact zero divisor; use [`Expr::checked_div`] otherwise.
    fn div(self, rhs: &Expr) -> Expr {
        self.checked_div(rhs).expect("division by zero")
    }
}

impl ops::Div<Expr> for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        &self / &rhs
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        *self = Expr::add(self, rhs);
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<&Symbol> for Expr {
    fn from(s: &Symbol) -> Expr {
        Expr::sym(s)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a.add(&b))
    }
}

#[cfg(test)]
mod tests;
