use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::Signed;

use super::ModelFile;
use crate::exterior::{Chart, Role, VectorField};
use crate::expr::Expr;
use crate::numeric::Boundary;

/// Chart names that print differently in model files.
fn renames(jet: &Chart) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for i in 0..jet.dim() {
        let name = match jet.role(i) {
            Role::Velocity { a, mu } => format!("d{}[{}]", jet.field_names()[a], jet.base_names()[mu]),
            Role::Action { mu } => format!("s[{}]", jet.base_names()[mu]),
            _ => continue,
        };
        out.insert(jet.name(i).to_string(), name);
    }
    out
}

fn expr(e: &Expr, names: &BTreeMap<String, String>) -> String {
    e.display_with(|s| names.get(s).cloned().unwrap_or_else(|| s.to_string())).to_string()
}

fn vector_field(v: &VectorField, names: &BTreeMap<String, String>) -> String {
    let chart = v.chart();
    let comps: Vec<_> = v.components().iter().filter(|(_, c)| !c.is_structurally_zero()).collect();
    if comps.is_empty() {
        return format!("0*d/d{}", chart.base_names()[0]);
    }
    let mut out = String::new();
    for (k, (&i, c)) in comps.into_iter().enumerate() {
        let basis = format!("d/d{}", names.get(chart.name(i)).map_or(chart.name(i), String::as_str));
        let (neg, body) = if c.num_terms() == 1 {
            let neg = c.leading_coefficient().is_negative();
            let a = if neg { -c.clone() } else { c.clone() };
            (neg, if a.is_one() { basis } else { format!("{}*{basis}", expr(&a, names)) })
        } else {
            (false, format!("({})*{basis}", expr(c, names)))
        };
        out.push_str(match (k, neg) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        });
        out.push_str(&body);
    }
    out
}

/// Canonical text: fixed declaration order, one declaration per line,
/// canonical expressions, no comments.
pub fn render(m: &ModelFile) -> String {
    let names = renames(&m.jet_chart());
    let mut out = String::new();
    writeln!(out, "coords {}", m.coords.join(" ")).unwrap();
    writeln!(out, "fields {}", m.fields.join(" ")).unwrap();
    if !m.params.is_empty() {
        let ps: Vec<String> = m
            .params
            .iter()
            .map(|p| match p.default {
                Some(v) => format!("{}={v}", p.name),
                None => p.name.clone(),
            })
            .collect();
        writeln!(out, "params {}", ps.join(" ")).unwrap();
    }
    writeln!(out, "lagrangian {}", expr(&m.lagrangian, &names)).unwrap();
    for c in &m.symmetries {
        writeln!(out, "symmetry {}: {}", c.name, vector_field(&c.field, &names)).unwrap();
    }
    for s in &m.scenarios {
        let g = &s.grid;
        let nx: Vec<String> = g.nx.iter().map(usize::to_string).collect();
        writeln!(out, "scenario {} {{", s.name).unwrap();
        writeln!(out, "  grid lx={} nx={} t={} cfl={};", g.lx, nx.join(","), g.t_final, g.cfl).unwrap();
        writeln!(out, "  init y={}, v={};", expr(&s.y0, &names), expr(&s.v0, &names)).unwrap();
        let bc = match s.bc {
            Boundary::Periodic => "periodic",
            Boundary::DirichletZero => "dirichlet",
        };
        writeln!(out, "  bc {bc};").unwrap();
        writeln!(out, "}}").unwrap();
    }
    out
}
