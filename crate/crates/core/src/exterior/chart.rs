use std::fmt;
use std::sync::Arc;

use crate::expr::{Expr, Symbol, SymbolKind};

/// Role of a chart coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Base { mu: usize },
    Field { a: usize },
    Velocity { a: usize, mu: usize },
    Momentum { a: usize, mu: usize },
    Action { mu: usize },
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coord {
    pub symbol: Symbol,
    pub role: Role,
}

impl Coord {
    pub fn name(&self) -> &str {
        self.symbol.name()
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct ChartData {
    coords: Vec<Coord>,
    bases: Vec<String>,
    fields: Vec<String>,
}

/// Ordered, role-tagged coordinate system. Cloning shares the data.
#[derive(Clone)]
pub struct Chart(Arc<ChartData>);

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Chart {}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.0.coords.iter().map(|c| c.name()).collect();
        write!(f, "Chart({})", names.join(", "))
    }
}

pub fn base_symbol(mu: usize, name: &str) -> Symbol {
    Symbol::new(SymbolKind::Base, mu as u32, name)
}

pub fn field_symbol(a: usize, name: &str) -> Symbol {
    Symbol::new(SymbolKind::Field, a as u32, name)
}

pub fn velocity_name(field: &str, base: &str) -> String {
    format!("{field}_{base}")
}

pub fn action_name(base: &str) -> String {
    format!("s_{base}")
}

/// `p_<base>` for single-field charts, `p_<field>_<base>` otherwise.
pub fn momentum_name(fields: &[String], a: usize, base: &str) -> String {
    if fields.len() == 1 {
        format!("p_{base}")
    } else {
        format!("p_{}_{base}", fields[a])
    }
}

fn check_names(names: &[&str]) -> Result<(), String> {
    let mut seen = std::collections::BTreeSet::new();
    for n in names {
        if !seen.insert(*n) {
            return Err(format!("duplicate coordinate name `{n}`"));
        }
    }
    Ok(())
}

impl Chart {
    fn build(coords: Vec<Coord>, bases: &[&str], fields: &[&str]) -> Result<Chart, String> {
        let names: Vec<&str> = coords.iter().map(|c| c.name()).collect();
        check_names(&names)?;
        if bases.is_empty() {
            return Err("at least one base coordinate required".into());
        }
        Ok(Chart(Arc::new(ChartData {
            coords,
            bases: bases.iter().map(|s| s.to_string()).collect(),
            fields: fields.iter().map(|s| s.to_string()).collect(),
        })))
    }

    /// First-order jet chart `(x, y, y_mu, s)` with velocities ordered field-major.
    pub fn jet(bases: &[&str], fields: &[&str]) -> Result<Chart, String> {
        let m = bases.len();
        let mut coords = Vec::new();
        for (mu, b) in bases.iter().enumerate() {
            coords.push(Coord { symbol: base_symbol(mu, b), role: Role::Base { mu } });
        }
        for (a, y) in fields.iter().enumerate() {
            coords.push(Coord { symbol: field_symbol(a, y), role: Role::Field { a } });
        }
        for (a, y) in fields.iter().enumerate() {
            for (mu, b) in bases.iter().enumerate() {
                coords.push(Coord {
                    symbol: Symbol::new(
                        SymbolKind::Velocity,
                        (a * m + mu) as u32,
                        velocity_name(y, b),
                    ),
                    role: Role::Velocity { a, mu },
                });
            }
        }
        Self::push_action(&mut coords, bases);
        Self::build(coords, bases, fields)
    }

    /// Multimomentum chart `(x, y, p^mu_a, s)`.
    pub fn hamiltonian(bases: &[&str], fields: &[&str]) -> Result<Chart, String> {
        let m = bases.len();
        let owned: Vec<String> = fields.iter().map(|s| s.to_string()).collect();
        let mut coords = Vec::new();
        for (mu, b) in bases.iter().enumerate() {
            coords.push(Coord { symbol: base_symbol(mu, b), role: Role::Base { mu } });
        }
        for (a, y) in fields.iter().enumerate() {
            coords.push(Coord { symbol: field_symbol(a, y), role: Role::Field { a } });
        }
        for a in 0..fields.len() {
            for (mu, b) in bases.iter().enumerate() {
                coords.push(Coord {
                    symbol: Symbol::new(
                        SymbolKind::Momentum,
                        (a * m + mu) as u32,
                        momentum_name(&owned, a, b),
                    ),
                    role: Role::Momentum { a, mu },
                });
            }
        }
        Self::push_action(&mut coords, bases);
        Self::build(coords, bases, fields)
    }

    /// Configuration chart `(x, y)` on which lifts are specified.
    pub fn configuration(bases: &[&str], fields: &[&str]) -> Result<Chart, String> {
        let mut coords = Vec::new();
        for (mu, b) in bases.iter().enumerate() {
            coords.push(Coord { symbol: base_symbol(mu, b), role: Role::Base { mu } });
        }
        for (a, y) in fields.iter().enumerate() {
            coords.push(Coord { symbol: field_symbol(a, y), role: Role::Field { a } });
        }
        Self::push_action(&mut coords, bases);
        Self::build(coords, bases, fields)
    }

    /// Base-only chart: the source of sections.
    pub fn base_only(bases: &[&str]) -> Result<Chart, String> {
        let coords = bases
            .iter()
            .enumerate()
            .map(|(mu, b)| Coord { symbol: base_symbol(mu, b), role: Role::Base { mu } })
            .collect();
        Self::build(coords, bases, &[])
    }

    /// Chart whose first `m` coordinates are base, the rest generic.
    pub fn generic(names: &[&str], m: usize) -> Result<Chart, String> {
        if m == 0 || m > names.len() {
            return Err("need 1 <= m <= dimension".into());
        }
        let coords = names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                if i < m {
                    Coord { symbol: base_symbol(i, n), role: Role::Base { mu: i } }
                } else {
                    Coord {
                        symbol: Symbol::new(SymbolKind::Generic, i as u32, n),
                        role: Role::Generic,
                    }
                }
            })
            .collect();
        Self::build(coords, &names[..m], &[])
    }

    fn push_action(coords: &mut Vec<Coord>, bases: &[&str]) {
        for (mu, b) in bases.iter().enumerate() {
            coords.push(Coord {
                symbol: Symbol::new(SymbolKind::Action, mu as u32, action_name(b)),
                role: Role::Action { mu },
            });
        }
    }

    pub fn dim(&self) -> usize {
        self.0.coords.len()
    }

    /// Base dimension m.
    pub fn m(&self) -> usize {
        self.0.bases.len()
    }

    pub fn coords(&self) -> &[Coord] {
        &self.0.coords
    }

    pub fn base_names(&self) -> &[String] {
        &self.0.bases
    }

    pub fn field_names(&self) -> &[String] {
        &self.0.fields
    }

    pub fn symbol(&self, i: usize) -> &Symbol {
        &self.0.coords[i].symbol
    }

    pub fn var(&self, i: usize) -> Expr {
        Expr::sym(self.symbol(i))
    }

    pub fn role(&self, i: usize) -> Role {
        self.0.coords[i].role
    }

    pub fn name(&self, i: usize) -> &str {
        self.0.coords[i].name()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.coords.iter().position(|c| c.name() == name)
    }

    pub fn index_of_symbol(&self, s: &Symbol) -> Option<usize> {
        self.0.coords.iter().position(|c| &c.symbol == s)
    }

    pub fn find_role(&self, role: Role) -> Option<usize> {
        self.0.coords.iter().position(|c| c.role == role)
    }

    fn expect_role(&self, role: Role) -> usize {
        self.find_role(role)
            .unwrap_or_else(|| panic!("chart has no coordinate with role {role:?}"))
    }

    pub fn base(&self, mu: usize) -> usize {
        self.expect_role(Role::Base { mu })
    }

    pub fn field(&self, a: usize) -> usize {
        self.expect_role(Role::Field { a })
    }

    pub fn velocity(&self, a: usize, mu: usize) -> usize {
        self.expect_role(Role::Velocity { a, mu })
    }

    pub fn momentum(&self, a: usize, mu: usize) -> usize {
        self.expect_role(Role::Momentum { a, mu })
    }

    pub fn action(&self, mu: usize) -> usize {
        self.expect_role(Role::Action { mu })
    }

    pub fn is_base(&self, i: usize) -> bool {
        matches!(self.role(i), Role::Base { .. })
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        self.0.coords.iter().map(|c| c.symbol.clone()).collect()
    }
}
