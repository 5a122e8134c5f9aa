use std::collections::BTreeMap;
use std::fmt;
use std::ops;

use serde::Serialize;

use super::{sort_with_sign, Chart, ExteriorError, Role};
use crate::expr::{Expr, ExprError, ProbeConfig, ZeroTest};

pub type Table = BTreeMap<Vec<usize>, Expr>;

/// Adds `c` at `idx` (any order); repeated indices vanish.
pub(crate) fn table_insert(t: &mut Table, mut idx: Vec<usize>, c: Expr) {
    if c.is_structurally_zero() {
        return;
    }
    let Some(odd) = sort_with_sign(&mut idx) else {
        return;
    };
    let c = if odd { -c } else { c };
    match t.entry(idx) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get() + &c;
            if sum.is_structurally_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

/// Exterior product of two antisymmetric tables.
pub(crate) fn table_wedge(a: &Table, b: &Table) -> Table {
    let mut out = Table::new();
    for (i, x) in a {
        for (j, y) in b {
            if i.iter().any(|k| j.contains(k)) {
                continue;
            }
            let mut idx = i.clone();
            idx.extend_from_slice(j);
            table_insert(&mut out, idx, x * y);
        }
    }
    out
}

/// Interior product of a vector (given by components) with a table.
pub(crate) fn table_interior(v: &BTreeMap<usize, Expr>, t: &Table) -> Table {
    let mut out = Table::new();
    for (idx, c) in t {
        for (p, i) in idx.iter().enumerate() {
            if let Some(vi) = v.get(i) {
                let mut rest = idx.clone();
                rest.remove(p);
                let term = c * vi;
                table_insert(&mut out, rest, if p % 2 == 1 { -term } else { term });
            }
        }
    }
    out
}

/// Differential k-form on a chart.
#[derive(Clone, PartialEq)]
pub struct Form {
    chart: Chart,
    degree: usize,
    terms: Table,
}

impl Form {
    pub fn zero(chart: &Chart, degree: usize) -> Form {
        Form { chart: chart.clone(), degree, terms: Table::new() }
    }

    pub fn scalar(chart: &Chart, e: Expr) -> Form {
        Form::from_terms(chart, 0, [(vec![], e)])
    }

    /// The coordinate one-form `dx^i`.
    pub fn d(chart: &Chart, i: usize) -> Form {
        Form::from_terms(chart, 1, [(vec![i], Expr::one())])
    }

    /// `dx^{i1} ^ ... ^ dx^{ik}` in the given (not necessarily sorted) order.
    pub fn basis(chart: &Chart, idx: &[usize]) -> Form {
        Form::from_terms(chart, idx.len(), [(idx.to_vec(), Expr::one())])
    }

    /// The volume form `dx^1 ^ ... ^ dx^m` of the base.
    pub fn volume(chart: &Chart) -> Form {
        let idx: Vec<usize> = (0..chart.m()).map(|mu| chart.base(mu)).collect();
        Form::basis(chart, &idx)
    }

    /// `d^{m-1}x_mu`, the contraction of the volume form by `d/dx^mu`.
    pub fn volume_minus(chart: &Chart, mu: usize) -> Form {
        let m = chart.m();
        let mut t = Table::new();
        let idx: Vec<usize> = (0..m).filter(|&n| n != mu).map(|n| chart.base(n)).collect();
        table_insert(&mut t, idx, if mu % 2 == 1 { -Expr::one() } else { Expr::one() });
        Form { chart: chart.clone(), degree: m - 1, terms: t }
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<usize>, Expr)>>(
        chart: &Chart,
        degree: usize,
        terms: I,
    ) -> Form {
        let mut t = Table::new();
        for (idx, c) in terms {
            assert_eq!(idx.len(), degree, "index length must equal the degree");
            assert!(idx.iter().all(|&i| i < chart.dim()), "index out of range");
            table_insert(&mut t, idx, c);
        }
        Form { chart: chart.clone(), degree, terms: t }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &Table {
        &self.terms
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `dx^{idx}` (index in any order, sign applied).
    pub fn coefficient(&self, idx: &[usize]) -> Expr {
        let mut i = idx.to_vec();
        match sort_with_sign(&mut i) {
            None => Expr::zero(),
            Some(odd) => {
                let c = self.terms.get(&i).cloned().unwrap_or_else(Expr::zero);
                if odd { -c } else { c }
            }
        }
    }

    /// The bare expression of a 0-form.
    pub fn as_scalar(&self) -> Option<Expr> {
        (self.degree == 0).then(|| self.coefficient(&[]))
    }

    fn same_chart(&self, other: &Form) -> Result<(), ExteriorError> {
        if self.chart == other.chart {
            Ok(())
        } else {
            Err(ExteriorError::ChartMismatch)
        }
    }

    pub fn try_add(&self, other: &Form) -> Result<Form, ExteriorError> {
        self.same_chart(other)?;
        if other.terms.is_empty() {
            return Ok(self.clone());
        }
        if self.terms.is_empty() {
            return Ok(other.clone());
        }
        if self.degree != other.degree {
            return Err(ExteriorError::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        let mut t = self.terms.clone();
        for (i, c) in &other.terms {
            table_insert(&mut t, i.clone(), c.clone());
        }
        Ok(Form { chart: self.chart.clone(), degree: self.degree, terms: t })
    }

    pub fn scale(&self, e: &Expr) -> Form {
        self.map_terms(|c| c * e)
    }

    fn map_terms(&self, f: impl Fn(&Expr) -> Expr) -> Form {
        let mut t = Table::new();
        for (i, c) in &self.terms {
            table_insert(&mut t, i.clone(), f(c));
        }
        Form { chart: self.chart.clone(), degree: self.degree, terms: t }
    }

    /// Applies a fallible map (e.g. substitution) to every coefficient.
    pub fn try_map_coefficients(
        &self,
        f: impl Fn(&Expr) -> Result<Expr, ExprError>,
    ) -> Result<Form, ExprError> {
        let mut t = Table::new();
        for (i, c) in &self.terms {
            table_insert(&mut t, i.clone(), f(c)?);
        }
        Ok(Form { chart: self.chart.clone(), degree: self.degree, terms: t })
    }

    pub fn wedge(&self, other: &Form) -> Result<Form, ExteriorError> {
        self.same_chart(other)?;
        Ok(Form {
            chart: self.chart.clone(),
            degree: self.degree + other.degree,
            terms: table_wedge(&self.terms, &other.terms),
        })
    }

    /// Coordinate exterior derivative. Symbols that are not chart
    /// coordinates are constants.
    pub fn ext_d(&self) -> Form {
        let mut t = Table::new();
        for (idx, c) in &self.terms {
            for j in 0..self.chart.dim() {
                let s = self.chart.symbol(j);
                if !c.contains(s) || idx.contains(&j) {
                    continue;
                }
                let mut k = Vec::with_capacity(idx.len() + 1);
                k.push(j);
                k.extend_from_slice(idx);
                table_insert(&mut t, k, c.diff(s));
            }
        }
        Form { chart: self.chart.clone(), degree: self.degree + 1, terms: t }
    }

    /// The twisted differential `d beta + sigma ^ beta`.
    pub fn bar_d(&self, sigma: &Form) -> Result<Form, ExteriorError> {
        if sigma.degree != 1 {
            return Err(ExteriorError::DegreeMismatch { expected: 1, got: sigma.degree });
        }
        self.ext_d().try_add(&sigma.wedge(self)?)
    }

    /// Semantic zero test of all coefficients; returns nonzero ones as witnesses.
    pub fn zero_test(&self, cfg: &ProbeConfig) -> (ZeroTest, Vec<(Vec<usize>, Expr)>) {
        let mut verdict = ZeroTest::Zero;
        let mut witnesses = Vec::new();
        for (i, c) in &self.terms {
            let z = c.zero_test(cfg);
            if z == ZeroTest::NonZero {
                witnesses.push((i.clone(), c.clone()));
            }
            verdict = verdict.and(z);
        }
        (verdict, witnesses)
    }

    pub fn is_zero(&self) -> ZeroTest {
        self.zero_test(&ProbeConfig::default()).0
    }

    /// Canonical basis label such as `dt^dx`.
    pub fn basis_label(&self, idx: &[usize]) -> String {
        if idx.is_empty() {
            return "1".into();
        }
        idx.iter()
            .map(|&i| format!("d{}", self.chart.name(i)))
            .collect::<Vec<_>>()
            .join("^")
    }

    /// Display ordering: non-base differentials first, then base ones.
    fn paper_terms(&self) -> Vec<(Vec<usize>, Expr)> {
        let chart = &self.chart;
        let class = |idx: &[usize]| -> u8 {
            match idx.iter().find(|&&i| !chart.is_base(i)).map(|&i| chart.role(i)) {
                None => 1,
                Some(Role::Field { .. } | Role::Velocity { .. } | Role::Momentum { .. }) => 0,
                Some(Role::Action { .. }) => 2,
                Some(_) => 3,
            }
        };
        let mut out: Vec<(u8, Vec<usize>, Vec<usize>, Vec<usize>, Expr)> = Vec::new();
        for (idx, c) in &self.terms {
            let non_base: Vec<usize> = idx.iter().copied().filter(|&i| !chart.is_base(i)).collect();
            let base: Vec<usize> = idx.iter().copied().filter(|&i| chart.is_base(i)).collect();
            let mut order = non_base.clone();
            order.extend_from_slice(&base);
            let mut check = order.clone();
            let odd = sort_with_sign(&mut check).expect("distinct indices");
            let coeff = if odd { -c.clone() } else { c.clone() };
            let missing: Vec<usize> = (0..chart.dim())
                .filter(|&i| chart.is_base(i) && !base.contains(&i))
                .collect();
            out.push((class(idx), non_base, missing, order, coeff));
        }
        out.sort_by(|a, b| (a.0, &a.1, &a.2).cmp(&(b.0, &b.1, &b.2)));
        out.into_iter().map(|(_, _, _, o, c)| (o, c)).collect()
    }

    /// Conventional rendering, e.g. `-rho*y_t dy^dx + ds_t^dx`.
    pub fn to_paper_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        if self.degree == 0 {
            return self.coefficient(&[]).to_string();
        }
        let mut s = String::new();
        for (k, (order, c)) in self.paper_terms().into_iter().enumerate() {
            let basis = self.basis_label(&order);
            let (neg, body) = if c.num_terms() == 1 {
                let neg = c.leading_coefficient() < num_traits::Zero::zero();
                let a = if neg { -c.clone() } else { c.clone() };
                if a.is_one() {
                    (neg, basis)
                } else {
                    (neg, format!("{a} {basis}"))
                }
            } else {
                (false, format!("({c}) {basis}"))
            };
            match (k, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            s.push_str(&body);
        }
        s
    }

    pub fn to_json(&self) -> FormJson {
        FormJson {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(i, c)| TermJson {
                    index: i.clone(),
                    basis: self.basis_label(i),
                    coefficient: c.to_string(),
                })
                .collect(),
        }
    }
}

/// Stable JSON rendering of a form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormJson {
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermJson {
    pub index: Vec<usize>,
    pub basis: String,
    pub coefficient: String,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_paper_string())
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form<{}>({})", self.degree, self.to_paper_string())
    }
}

impl ops::Add for &Form {
    type Output = Form;
    /// Panics if the charts or degrees differ; see [`Form::try_add`].
    fn add(self, rhs: &Form) -> Form {
        self.try_add(rhs).expect("incompatible forms")
    }
}

impl ops::Sub for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        self.try_add(&-rhs).expect("incompatible forms")
    }
}

impl ops::Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.map_terms(|c| -c)
    }
}

impl ops::Add for Form {
    type Output = Form;
    fn add(self, rhs: Form) -> Form {
        &self + &rhs
    }
}

impl ops::Sub for Form {
    type Output = Form;
    fn sub(self, rhs: Form) -> Form {
        &self - &rhs
    }
}

impl ops::Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        -&self
    }
}

impl ops::Mul<&Form> for &Expr {
    type Output = Form;
    fn mul(self, rhs: &Form) -> Form {
        rhs.scale(self)
    }
}
