//! The `.mcft` model format.
//!
//! ```text
//! coords t x
//! fields y
//! params rho=1 tau=1 gamma=0.1
//! lagrangian 0.5*(rho*dy[t]^2 - tau*dy[x]^2) - gamma*s[t]
//! symmetry Y: d/dy
//! scenario decay {
//!   grid lx=1 nx=128,256,512 t=2 cfl=0.5;
//!   init y=sin(2*pi*x), v=1 + cos(2*pi*x);
//!   bc periodic;
//! }
//! ```
//!
//! Jet coordinates are written `d<field>[<base>]` and actions `s[<base>]`.
//! Declarations may come in any order; `#` starts a comment.

mod lexer;
mod parser;
mod render;

use std::fmt;

use num_traits::ToPrimitive;

use thiserror::Error;

use crate::exterior::{Chart, VectorField};
use crate::expr::{Expr, Symbol};
use crate::lagrangian::{LagrangianError, LagrangianSystem};
use crate::numeric::Boundary;
use crate::{Bindings64, Rational};

pub use parser::{parse, parse_decimal};
pub use render::render;

/// Byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub span: Span,
    pub message: String,
}

impl DslError {
    pub(crate) fn new(src: &str, span: Span, message: impl Into<String>) -> Self {
        let (line, col) = line_col(src, span.start);
        DslError { line, col, span, message: message.into() }
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub default: Option<f64>,
}

/// A named configuration-space vector field, on [`ModelFile::configuration_chart`].
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub name: String,
    pub field: VectorField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lx: f64,
    /// One entry per refinement level.
    pub nx: Vec<usize>,
    pub t_final: f64,
    pub cfl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub grid: GridSpec,
    /// Initial displacement and velocity as expressions in the bases,
    /// parameters and `pi`.
    pub y0: Expr,
    pub v0: Expr,
    pub bc: Boundary,
}

/// Where each declaration came from.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    pub coords: Option<Span>,
    pub fields: Option<Span>,
    pub lagrangian: Option<Span>,
    pub symmetries: Vec<Span>,
    pub scenarios: Vec<Span>,
}

#[derive(Debug, Clone)]
pub struct ModelFile {
    pub coords: Vec<String>,
    pub fields: Vec<String>,
    pub params: Vec<ParamDecl>,
    /// Over [`ModelFile::jet_chart`] and [`ModelFile::param_symbols`].
    pub lagrangian: Expr,
    pub symmetries: Vec<Candidate>,
    pub scenarios: Vec<Scenario>,
    pub spans: SourceMap,
}

/// Spans are provenance, not content.
impl PartialEq for ModelFile {
    fn eq(&self, o: &Self) -> bool {
        self.coords == o.coords
            && self.fields == o.fields
            && self.params == o.params
            && self.lagrangian == o.lagrangian
            && self.symmetries == o.symmetries
            && self.scenarios == o.scenarios
    }
}

/// Numeric-only constant allowed in scenario initial data.
pub fn pi_symbol() -> Symbol {
    Symbol::generic("pi")
}

impl ModelFile {
    fn names(v: &[String]) -> Vec<&str> {
        v.iter().map(String::as_str).collect()
    }

    pub fn jet_chart(&self) -> Chart {
        Chart::jet(&Self::names(&self.coords), &Self::names(&self.fields)).expect("validated on parse")
    }

    pub fn configuration_chart(&self) -> Chart {
        Chart::configuration(&Self::names(&self.coords), &Self::names(&self.fields)).expect("validated on parse")
    }

    pub fn param_symbols(&self) -> Vec<Symbol> {
        self.params.iter().enumerate().map(|(i, p)| Symbol::param(i as u32, &p.name)).collect()
    }

    pub fn system(&self) -> Result<LagrangianSystem, LagrangianError> {
        LagrangianSystem::new(&self.jet_chart(), &self.param_symbols(), self.lagrangian.clone())
    }

    pub fn candidate(&self, name: &str) -> Option<&Candidate> {
        self.symmetries.iter().find(|c| c.name == name)
    }

    pub fn scenario(&self, name: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    /// Parameter defaults plus `pi`; parameters without a default are unbound.
    pub fn bindings(&self) -> Bindings64 {
        let mut b = Bindings64::new().with("pi", std::f64::consts::PI);
        for p in &self.params {
            if let Some(v) = p.default {
                b.set(p.name.clone(), v);
            }
        }
        b
    }

    /// Overrides a parameter default. Fails on unknown names.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), String> {
        let p = self.params.iter_mut().find(|p| p.name == name).ok_or_else(|| format!("no parameter `{name}`"))?;
        p.default = Some(value);
        Ok(())
    }

    /// Substitutes an exact value for a parameter everywhere and makes it the
    /// default. The declaration stays, so parameter symbols keep their order.
    pub fn fix_param(&mut self, name: &str, value: &Rational) -> Result<(), String> {
        let k = self.params.iter().position(|p| p.name == name).ok_or_else(|| format!("no parameter `{name}`"))?;
        let sym = Symbol::param(k as u32, name);
        let v = Expr::rational(value.clone());
        let subs = |e: &Expr| e.subs(&sym, &v).map_err(|e| format!("fixing `{name}`: {e}"));
        self.lagrangian = subs(&self.lagrangian)?;
        for c in &mut self.symmetries {
            let comps = c.field.components().iter().map(|(&i, e)| Ok((i, subs(e)?))).collect::<Result<Vec<_>, String>>()?;
            c.field = VectorField::new(c.field.chart(), comps);
        }
        for s in &mut self.scenarios {
            s.y0 = subs(&s.y0)?;
            s.v0 = subs(&s.v0)?;
        }
        self.params[k].default = value.to_f64();
        Ok(())
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}
