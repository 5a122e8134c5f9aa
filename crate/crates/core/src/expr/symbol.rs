use std::fmt;
use std::sync::Arc;

/// Symbol categories. The declaration order is the canonical print order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Param,
    Base,
    Field,
    Velocity,
    Momentum,
    Action,
    /// Second-order jet placeholder such as `y_tx`.
    SecondJet,
    /// Partial derivative placeholder `D[c,mu]` of a section component.
    Partial,
    /// Unknown component function left free by a linear solve.
    Free,
    Generic,
}

/// A named scalar variable. Ordering is by (kind, ordinal, name).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    kind: SymbolKind,
    ordinal: u32,
    name: Arc<str>,
}

impl Symbol {
    pub fn new(kind: SymbolKind, ordinal: u32, name: impl AsRef<str>) -> Self {
        Symbol {
            kind,
            ordinal,
            name: Arc::from(name.as_ref()),
        }
    }

    /// Free-standing symbol, ordered by name among other generic symbols.
    pub fn generic(name: impl AsRef<str>) -> Self {
        Self::new(SymbolKind::Generic, 0, name)
    }

    pub fn param(ordinal: u32, name: impl AsRef<str>) -> Self {
        Self::new(SymbolKind::Param, ordinal, name)
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn ordinal(&self) -> u32 {
        self.ordinal
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}
