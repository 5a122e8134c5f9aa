use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::lexer::{lex, Tok, Token};
use super::{pi_symbol, Candidate, DslError, GridSpec, ModelFile, ParamDecl, Scenario, SourceMap, Span};
use crate::exterior::{Chart, Role, VectorField};
use crate::expr::{Expr, Func, Symbol};
use crate::numeric::Boundary;
use crate::Rational;

const KEYWORDS: [&str; 6] = ["coords", "fields", "params", "lagrangian", "symmetry", "scenario"];
const RESERVED: [&str; 5] = ["s", "pi", "sin", "cos", "exp"];

#[derive(Debug, Clone)]
enum Raw {
    Num(Rational),
    Name(String),
    Indexed(String, String),
    Call(Func, Box<RawExpr>),
    Neg(Box<RawExpr>),
    Add(Box<RawExpr>, Box<RawExpr>),
    Sub(Box<RawExpr>, Box<RawExpr>),
    Mul(Box<RawExpr>, Box<RawExpr>),
    Div(Box<RawExpr>, Box<RawExpr>),
    Pow(Box<RawExpr>, i32),
}

#[derive(Debug, Clone)]
struct Spanned<T> {
    node: T,
    span: Span,
}

type RawExpr = Spanned<Raw>;

fn sp<T>(node: T, span: Span) -> Spanned<T> {
    Spanned { node, span }
}

fn join(a: Span, b: Span) -> Span {
    Span::new(a.start.min(b.start), a.end.max(b.end))
}

struct VfTerm {
    negative: bool,
    coeff: Option<RawExpr>,
    target: Spanned<(String, Option<String>)>,
}

struct RawScenario {
    name: Spanned<String>,
    grid: Option<GridSpec>,
    init: BTreeMap<String, RawExpr>,
    bc: Option<Boundary>,
    span: Span,
}

#[derive(Default)]
struct RawModel {
    coords: Option<(Span, Vec<Spanned<String>>)>,
    fields: Option<(Span, Vec<Spanned<String>>)>,
    params: Option<(Span, Vec<(Spanned<String>, Option<f64>)>)>,
    lagrangian: Option<(Span, RawExpr)>,
    symmetries: Vec<(Spanned<String>, Vec<VfTerm>)>,
    scenarios: Vec<RawScenario>,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, span: Span, msg: impl Into<String>) -> DslError {
        DslError::new(self.src, span, msg)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    /// Span of the current token, or of the last character at end of input.
    fn here(&self) -> Span {
        match self.toks.get(self.pos) {
            Some(t) => t.span,
            None => {
                let end = self.src.len();
                let start = self.src[..end].char_indices().last().map_or(0, |(i, _)| i);
                Span::new(start, end)
            }
        }
    }

    fn found(&self) -> String {
        self.peek().map_or("end of input".into(), Tok::describe)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, DslError> {
        if self.peek() == Some(&tok) {
            Ok(self.bump().span)
        } else {
            Err(self.err(self.here(), format!("expected {}, found {}", tok.describe(), self.found())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Spanned<String>, DslError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let t = self.bump();
                let Tok::Ident(s) = t.tok else { unreachable!() };
                Ok(sp(s, t.span))
            }
            _ => Err(self.err(self.here(), format!("expected {what}, found {}", self.found()))),
        }
    }

    fn at_keyword(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if KEYWORDS.contains(&s.as_str()))
    }

    fn number(&mut self) -> Result<(f64, Span), DslError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek() {
            Some(Tok::Number(_)) => {
                let t = self.bump();
                let Tok::Number(s) = &t.tok else { unreachable!() };
                let v: f64 = s.parse().map_err(|_| self.err(t.span, format!("invalid number `{s}`")))?;
                Ok((if neg { -v } else { v }, t.span))
            }
            _ => Err(self.err(self.here(), format!("expected a number, found {}", self.found()))),
        }
    }

    fn count(&mut self) -> Result<usize, DslError> {
        match self.peek() {
            Some(Tok::Number(s)) if s.bytes().all(|c| c.is_ascii_digit()) => {
                let t = self.bump();
                let Tok::Number(s) = &t.tok else { unreachable!() };
                s.parse().map_err(|_| self.err(t.span, format!("count `{s}` out of range")))
            }
            _ => Err(self.err(self.here(), format!("expected a point count, found {}", self.found()))),
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<RawExpr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let add = match self.peek() {
                Some(Tok::Plus) => true,
                Some(Tok::Minus) => false,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            let span = join(lhs.span, rhs.span);
            let (l, r) = (Box::new(lhs), Box::new(rhs));
            lhs = sp(if add { Raw::Add(l, r) } else { Raw::Sub(l, r) }, span);
        }
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<RawExpr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let mul = match self.peek() {
                Some(Tok::Star) => true,
                Some(Tok::Slash) => false,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            let span = join(lhs.span, rhs.span);
            let (l, r) = (Box::new(lhs), Box::new(rhs));
            lhs = sp(if mul { Raw::Mul(l, r) } else { Raw::Div(l, r) }, span);
        }
    }

    fn unary(&mut self) -> Result<RawExpr, DslError> {
        if self.peek() == Some(&Tok::Minus) {
            let s = self.bump().span;
            let inner = self.unary()?;
            let span = join(s, inner.span);
            return Ok(sp(Raw::Neg(Box::new(inner)), span));
        }
        self.power()
    }

    // power := atom ('^' '-'? INT)?
    fn power(&mut self) -> Result<RawExpr, DslError> {
        let base = self.atom()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let neg = self.eat(&Tok::Minus);
        let at = self.here();
        let n = self.count().map_err(|_| self.err(at, format!("expected an integer exponent, found {}", self.found())))?;
        let n = i32::try_from(n).map_err(|_| self.err(at, "exponent out of range"))?;
        let span = join(base.span, at);
        Ok(sp(Raw::Pow(Box::new(base), if neg { -n } else { n }), span))
    }

    fn atom(&mut self) -> Result<RawExpr, DslError> {
        let here = self.here();
        match self.peek().cloned() {
            Some(Tok::Number(s)) => {
                self.pos += 1;
                let q = decimal(&s).ok_or_else(|| self.err(here, format!("invalid number `{s}`")))?;
                Ok(sp(Raw::Num(q), here))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                let close = self.expect(Tok::RParen)?;
                Ok(sp(e.node, join(here, close)))
            }
            Some(Tok::Ident(name)) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(self.err(here, format!("expected an expression, found keyword `{name}`")));
                }
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    let f = Func::from_name(&name).ok_or_else(|| self.err(here, format!("unknown function `{name}`")))?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    let close = self.expect(Tok::RParen)?;
                    return Ok(sp(Raw::Call(f, Box::new(arg)), join(here, close)));
                }
                if self.peek() == Some(&Tok::LBracket) {
                    self.pos += 1;
                    let idx = self.ident("a base coordinate")?;
                    let close = self.expect(Tok::RBracket)?;
                    return Ok(sp(Raw::Indexed(name, idx.node), join(here, close)));
                }
                Ok(sp(Raw::Name(name), here))
            }
            Some(Tok::Deriv(_)) => Err(self.err(here, "basis vector outside a symmetry declaration")),
            _ => Err(self.err(here, format!("expected an expression, found {}", self.found()))),
        }
    }

    // vf := vterm (('+' | '-') vterm)*, each term a product with one `d/d...` factor
    fn vector_field(&mut self) -> Result<Vec<VfTerm>, DslError> {
        let mut terms = Vec::new();
        let mut negative = self.eat(&Tok::Minus);
        loop {
            terms.push(self.vf_term(negative)?);
            negative = match self.peek() {
                Some(Tok::Plus) => false,
                Some(Tok::Minus) => true,
                _ => return Ok(terms),
            };
            self.pos += 1;
        }
    }

    fn vf_term(&mut self, negative: bool) -> Result<VfTerm, DslError> {
        let start = self.here();
        let mut coeff: Option<RawExpr> = None;
        let mut target = None;
        let mut divide = false;
        loop {
            if let Some(Tok::Deriv(name)) = self.peek().cloned() {
                let mut span = self.bump().span;
                if target.is_some() {
                    return Err(self.err(span, "only one basis vector per term"));
                }
                if divide {
                    return Err(self.err(span, "cannot divide by a basis vector"));
                }
                let mut index = None;
                if self.eat(&Tok::LBracket) {
                    index = Some(self.ident("a base coordinate")?.node);
                    span = join(span, self.expect(Tok::RBracket)?);
                }
                target = Some(sp((name, index), span));
            } else {
                let f = self.power()?;
                coeff = Some(match coeff.take() {
                    None if divide => {
                        let one = sp(Raw::Num(Rational::one()), f.span);
                        sp(Raw::Div(Box::new(one), Box::new(f.clone())), f.span)
                    }
                    None => f,
                    Some(c) => {
                        let span = join(c.span, f.span);
                        let (l, r) = (Box::new(c), Box::new(f));
                        sp(if divide { Raw::Div(l, r) } else { Raw::Mul(l, r) }, span)
                    }
                });
            }
            match self.peek() {
                Some(Tok::Star) => divide = false,
                Some(Tok::Slash) if target.is_none() => divide = true,
                Some(Tok::Slash) => return Err(self.err(self.here(), "cannot divide after a basis vector")),
                _ => break,
            }
            self.pos += 1;
        }
        let target = target.ok_or_else(|| self.err(start, "term has no basis vector `d/d...`"))?;
        Ok(VfTerm { negative, coeff, target })
    }

    fn names(&mut self) -> Vec<Spanned<String>> {
        let mut out = Vec::new();
        while let Some(Tok::Ident(_)) = self.peek() {
            if self.at_keyword() {
                break;
            }
            out.push(self.ident("a name").unwrap());
        }
        out
    }

    fn duplicate(&self, span: Span, what: &str) -> DslError {
        self.err(span, format!("duplicate declaration of {what}"))
    }

    fn model(&mut self) -> Result<RawModel, DslError> {
        let mut m = RawModel::default();
        while self.pos < self.toks.len() {
            let kw = self.here();
            let word = match self.peek() {
                Some(Tok::Ident(w)) if KEYWORDS.contains(&w.as_str()) => w.clone(),
                _ => return Err(self.err(kw, format!("expected a declaration, found {}", self.found()))),
            };
            self.pos += 1;
            match word.as_str() {
                "coords" => {
                    if m.coords.is_some() {
                        return Err(self.duplicate(kw, "`coords`"));
                    }
                    m.coords = Some((kw, self.names()));
                }
                "fields" => {
                    if m.fields.is_some() {
                        return Err(self.duplicate(kw, "`fields`"));
                    }
                    m.fields = Some((kw, self.names()));
                }
                "params" => {
                    if m.params.is_some() {
                        return Err(self.duplicate(kw, "`params`"));
                    }
                    let mut ps = Vec::new();
                    while matches!(self.peek(), Some(Tok::Ident(_))) && !self.at_keyword() {
                        let name = self.ident("a parameter name")?;
                        let default = if self.eat(&Tok::Eq) { Some(self.number()?.0) } else { None };
                        ps.push((name, default));
                    }
                    m.params = Some((kw, ps));
                }
                "lagrangian" => {
                    if m.lagrangian.is_some() {
                        return Err(self.duplicate(kw, "`lagrangian`"));
                    }
                    m.lagrangian = Some((kw, self.expr()?));
                }
                "symmetry" => {
                    let name = self.ident("a symmetry name")?;
                    if m.symmetries.iter().any(|(n, _)| n.node == name.node) {
                        return Err(self.duplicate(name.span, &format!("symmetry `{}`", name.node)));
                    }
                    self.expect(Tok::Colon)?;
                    let vf = self.vector_field()?;
                    m.symmetries.push((name, vf));
                }
                _ => {
                    let s = self.scenario(kw)?;
                    if m.scenarios.iter().any(|o| o.name.node == s.name.node) {
                        return Err(self.duplicate(s.name.span, &format!("scenario `{}`", s.name.node)));
                    }
                    m.scenarios.push(s);
                }
            }
        }
        Ok(m)
    }

    fn scenario(&mut self, kw: Span) -> Result<RawScenario, DslError> {
        let name = self.ident("a scenario name")?;
        self.expect(Tok::LBrace)?;
        let mut s = RawScenario { name, grid: None, init: BTreeMap::new(), bc: None, span: kw };
        loop {
            if let Some(Tok::RBrace) = self.peek() {
                s.span = join(kw, self.bump().span);
                break;
            }
            let item = self.ident("`grid`, `init`, `bc` or `}`")?;
            match item.node.as_str() {
                "grid" => {
                    if s.grid.is_some() {
                        return Err(self.duplicate(item.span, "`grid`"));
                    }
                    s.grid = Some(self.grid(item.span)?);
                }
                "init" => loop {
                    let var = self.ident("`y` or `v`")?;
                    if var.node != "y" && var.node != "v" {
                        return Err(self.err(var.span, format!("unknown initial datum `{}`, expected `y` or `v`", var.node)));
                    }
                    if s.init.contains_key(&var.node) {
                        return Err(self.duplicate(var.span, &format!("initial datum `{}`", var.node)));
                    }
                    self.expect(Tok::Eq)?;
                    let e = self.expr()?;
                    s.init.insert(var.node, e);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                },
                "bc" => {
                    if s.bc.is_some() {
                        return Err(self.duplicate(item.span, "`bc`"));
                    }
                    let b = self.ident("a boundary condition")?;
                    s.bc = Some(match b.node.as_str() {
                        "periodic" => Boundary::Periodic,
                        "dirichlet" | "dirichlet-zero" => Boundary::DirichletZero,
                        other => {
                            return Err(self.err(
                                b.span,
                                format!("unknown boundary condition `{other}`, expected `periodic` or `dirichlet`"),
                            ))
                        }
                    });
                }
                other => {
                    return Err(self.err(item.span, format!("expected `grid`, `init` or `bc`, found `{other}`")));
                }
            }
            self.expect(Tok::Semi)?;
        }
        Ok(s)
    }

    fn grid(&mut self, kw: Span) -> Result<GridSpec, DslError> {
        let (mut lx, mut nx, mut t, mut cfl) = (None, None, None, None);
        while let Some(Tok::Ident(_)) = self.peek() {
            let key = self.ident("a grid key")?;
            self.expect(Tok::Eq)?;
            let slot_taken = match key.node.as_str() {
                "lx" => lx.replace(self.number()?.0).is_some(),
                "t" => t.replace(self.number()?.0).is_some(),
                "cfl" => cfl.replace(self.number()?.0).is_some(),
                "nx" => {
                    let mut v = vec![self.count()?];
                    while self.eat(&Tok::Comma) {
                        v.push(self.count()?);
                    }
                    nx.replace(v).is_some()
                }
                other => return Err(self.err(key.span, format!("unknown grid key `{other}`"))),
            };
            if slot_taken {
                return Err(self.duplicate(key.span, &format!("grid key `{}`", key.node)));
            }
        }
        let missing = |k: &str| self.err(kw, format!("grid needs `{k}`"));
        Ok(GridSpec {
            lx: lx.ok_or_else(|| missing("lx"))?,
            nx: nx.ok_or_else(|| missing("nx"))?,
            t_final: t.ok_or_else(|| missing("t"))?,
            cfl: cfl.unwrap_or(0.5),
        })
    }
}

/// Exact value of a signed decimal literal such as `-0.1` or `2.5e-3`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() || !body.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        return None;
    }
    let q = decimal(body)?;
    Some(if neg { -q } else { q })
}

/// Exact value of a decimal literal such as `0.1` or `2.5e-3`.
fn decimal(s: &str) -> Option<Rational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Some(if shift >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, shift as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-shift) as usize))
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Scope {
    Lagrangian,
    Configuration,
    Initial,
}

struct Resolver<'a> {
    src: &'a str,
    jet: Chart,
    params: Vec<String>,
}

impl Resolver<'_> {
    fn symbol(&self, e: &RawExpr, scope: Scope) -> Result<Symbol, DslError> {
        let unresolved = |what: String, hint: &str| DslError::new(self.src, e.span, format!("unresolved symbol `{what}`{hint}"));
        match &e.node {
            Raw::Name(n) => {
                if let Some(i) = self.jet.index_of(n) {
                    match (self.jet.role(i), scope) {
                        (Role::Base { .. }, _) => return Ok(self.jet.symbol(i).clone()),
                        (Role::Field { .. }, Scope::Lagrangian | Scope::Configuration) => {
                            return Ok(self.jet.symbol(i).clone())
                        }
                        (Role::Velocity { a, mu }, _) => {
                            let hint = format!(" (write `d{}[{}]`)", self.jet.field_names()[a], self.jet.base_names()[mu]);
                            return Err(unresolved(n.clone(), &hint));
                        }
                        (Role::Action { mu }, _) => {
                            return Err(unresolved(n.clone(), &format!(" (write `s[{}]`)", self.jet.base_names()[mu])))
                        }
                        _ => {}
                    }
                }
                if let Some(k) = self.params.iter().position(|p| p == n) {
                    return Ok(Symbol::param(k as u32, n));
                }
                if n == "pi" && scope == Scope::Initial {
                    return Ok(pi_symbol());
                }
                Err(unresolved(n.clone(), ""))
            }
            Raw::Indexed(h, idx) => {
                let text = format!("{h}[{idx}]");
                let Some(mu) = self.jet.base_names().iter().position(|b| b == idx) else {
                    return Err(unresolved(text, ""));
                };
                if h == "s" && scope != Scope::Initial {
                    return Ok(self.jet.symbol(self.jet.action(mu)).clone());
                }
                if let Some(f) = h.strip_prefix('d') {
                    if let Some(a) = self.jet.field_names().iter().position(|y| y == f) {
                        if scope == Scope::Lagrangian {
                            return Ok(self.jet.symbol(self.jet.velocity(a, mu)).clone());
                        }
                        return Err(DslError::new(self.src, e.span, format!("jet coordinate `{text}` is not allowed here")));
                    }
                }
                Err(unresolved(text, ""))
            }
            _ => unreachable!(),
        }
    }

    fn expr(&self, e: &RawExpr, scope: Scope) -> Result<Expr, DslError> {
        let fail = |err: crate::expr::ExprError| DslError::new(self.src, e.span, err.to_string());
        Ok(match &e.node {
            Raw::Num(q) => Expr::rational(q.clone()),
            Raw::Name(_) | Raw::Indexed(..) => Expr::sym(&self.symbol(e, scope)?),
            Raw::Call(f, a) => Expr::apply(*f, self.expr(a, scope)?),
            Raw::Neg(a) => -self.expr(a, scope)?,
            Raw::Add(a, b) => self.expr(a, scope)? + self.expr(b, scope)?,
            Raw::Sub(a, b) => self.expr(a, scope)? - self.expr(b, scope)?,
            Raw::Mul(a, b) => self.expr(a, scope)? * self.expr(b, scope)?,
            Raw::Div(a, b) => self.expr(a, scope)?.checked_div(&self.expr(b, scope)?).map_err(fail)?,
            Raw::Pow(a, n) => self.expr(a, scope)?.pow(*n).map_err(fail)?,
        })
    }

    fn vector_field(&self, config: &Chart, terms: &[VfTerm]) -> Result<VectorField, DslError> {
        let mut comps: BTreeMap<usize, Expr> = BTreeMap::new();
        for t in terms {
            let (name, index) = &t.target.node;
            let text = match index {
                Some(i) => format!("{name}[{i}]"),
                None => name.clone(),
            };
            let axis = match index {
                None => config.index_of(name).filter(|&i| matches!(config.role(i), Role::Base { .. } | Role::Field { .. })),
                Some(i) if name == "s" => config.base_names().iter().position(|b| b == i).map(|mu| config.action(mu)),
                Some(_) => None,
            };
            let axis = axis.ok_or_else(|| {
                DslError::new(self.src, t.target.span, format!("`d/d{text}` is not along a declared configuration axis"))
            })?;
            let mut c = match &t.coeff {
                Some(c) => self.expr(c, Scope::Configuration)?,
                None => Expr::one(),
            };
            if t.negative {
                c = -c;
            }
            let slot = comps.entry(axis).or_insert_with(Expr::zero);
            *slot = &*slot + &c;
        }
        Ok(VectorField::new(config, comps))
    }
}

fn check_name(src: &str, n: &Spanned<String>, seen: &mut BTreeMap<String, Span>) -> Result<(), DslError> {
    if RESERVED.contains(&n.node.as_str()) {
        return Err(DslError::new(src, n.span, format!("`{}` is reserved", n.node)));
    }
    if seen.insert(n.node.clone(), n.span).is_some() {
        return Err(DslError::new(src, n.span, format!("duplicate declaration of `{}`", n.node)));
    }
    Ok(())
}

pub fn parse(src: &str) -> Result<ModelFile, DslError> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let raw = p.model()?;
    let start = Span::new(0, src.chars().next().map_or(0, char::len_utf8));

    let (coords_span, coords) = raw.coords.unwrap_or((start, Vec::new()));
    if coords.is_empty() {
        return Err(DslError::new(src, coords_span, "at least one base coordinate required"));
    }
    let (fields_span, fields) = raw.fields.unwrap_or((start, Vec::new()));
    if fields.is_empty() {
        return Err(DslError::new(src, fields_span, "at least one field required"));
    }
    let params = raw.params.map(|(_, v)| v).unwrap_or_default();
    let mut seen = BTreeMap::new();
    for n in coords.iter().chain(&fields).chain(params.iter().map(|(n, _)| n)) {
        check_name(src, n, &mut seen)?;
    }
    let c: Vec<&str> = coords.iter().map(|n| n.node.as_str()).collect();
    let f: Vec<&str> = fields.iter().map(|n| n.node.as_str()).collect();
    let jet = Chart::jet(&c, &f).map_err(|e| DslError::new(src, fields_span, e))?;
    let config = Chart::configuration(&c, &f).map_err(|e| DslError::new(src, fields_span, e))?;
    if let Some(clash) = params.iter().find(|(n, _)| jet.index_of(&n.node).is_some()) {
        return Err(DslError::new(src, clash.0.span, format!("duplicate declaration of `{}`", clash.0.node)));
    }

    let r = Resolver { src, jet, params: params.iter().map(|(n, _)| n.node.clone()).collect() };
    let (lag_span, lag) = raw.lagrangian.ok_or_else(|| DslError::new(src, start, "missing `lagrangian` declaration"))?;
    let lagrangian = r.expr(&lag, Scope::Lagrangian)?;

    let mut symmetries = Vec::new();
    let mut sym_spans = Vec::new();
    for (name, terms) in &raw.symmetries {
        symmetries.push(Candidate { name: name.node.clone(), field: r.vector_field(&config, terms)? });
        sym_spans.push(name.span);
    }

    let mut scenarios = Vec::new();
    let mut scen_spans = Vec::new();
    for s in raw.scenarios {
        let need = |what: &str| DslError::new(src, s.name.span, format!("scenario `{}` needs `{what}`", s.name.node));
        let grid = s.grid.clone().ok_or_else(|| need("grid"))?;
        let y0 = r.expr(s.init.get("y").ok_or_else(|| need("init y"))?, Scope::Initial)?;
        let v0 = match s.init.get("v") {
            Some(e) => r.expr(e, Scope::Initial)?,
            None => Expr::zero(),
        };
        let bc = s.bc.ok_or_else(|| need("bc"))?;
        scenarios.push(Scenario { name: s.name.node.clone(), grid, y0, v0, bc });
        scen_spans.push(s.span);
    }

    Ok(ModelFile {
        coords: coords.into_iter().map(|n| n.node).collect(),
        fields: fields.into_iter().map(|n| n.node).collect(),
        params: params.into_iter().map(|(n, default)| ParamDecl { name: n.node, default }).collect(),
        lagrangian,
        symmetries,
        scenarios,
        spans: SourceMap {
            coords: Some(coords_span),
            fields: Some(fields_span),
            lagrangian: Some(join(lag_span, lag.span)),
            symmetries: sym_spans,
            scenarios: scen_spans,
        },
    })
}
