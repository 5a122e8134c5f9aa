use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use super::form::{table_insert, table_interior, table_wedge, Table};
use super::{Chart, ExteriorError, Form};
use crate::expr::{Expr, ExprError, ProbeConfig, ZeroTest};

/// Vector field given by its components on a chart.
#[derive(Clone, PartialEq)]
pub struct VectorField {
    chart: Chart,
    comps: BTreeMap<usize, Expr>,
}

impl VectorField {
    pub fn new<I: IntoIterator<Item = (usize, Expr)>>(chart: &Chart, comps: I) -> VectorField {
        let mut c = BTreeMap::new();
        for (i, e) in comps {
            assert!(i < chart.dim(), "component index out of range");
            let sum = c.get(&i).map_or(e.clone(), |old: &Expr| old + &e);
            if sum.is_structurally_zero() {
                c.remove(&i);
            } else {
                c.insert(i, sum);
            }
        }
        VectorField { chart: chart.clone(), comps: c }
    }

    /// The coordinate field `d/dx^i`.
    pub fn coordinate(chart: &Chart, i: usize) -> VectorField {
        VectorField::new(chart, [(i, Expr::one())])
    }

    pub fn zero(chart: &Chart) -> VectorField {
        VectorField::new(chart, [])
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &BTreeMap<usize, Expr> {
        &self.comps
    }

    pub fn component(&self, i: usize) -> Expr {
        self.comps.get(&i).cloned().unwrap_or_else(Expr::zero)
    }

    /// Action on functions: `X(f) = X^j df/dx^j`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (j, v) in &self.comps {
            let s = self.chart.symbol(*j);
            if f.contains(s) {
                acc = acc + v * &f.diff(s);
            }
        }
        acc
    }

    /// Lie bracket `[X, Y]^k = X(Y^k) - Y(X^k)`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, ExteriorError> {
        if self.chart != other.chart {
            return Err(ExteriorError::ChartMismatch);
        }
        let comps = (0..self.chart.dim())
            .map(|k| (k, self.apply(&other.component(k)) - other.apply(&self.component(k))))
            .collect::<Vec<_>>();
        Ok(VectorField::new(&self.chart, comps))
    }

    pub fn scale(&self, e: &Expr) -> VectorField {
        VectorField::new(&self.chart, self.comps.iter().map(|(i, c)| (*i, c * e)))
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(
            &self.chart,
            self.comps.iter().chain(other.comps.iter()).map(|(i, c)| (*i, c.clone())),
        )
    }

    pub fn try_map_components(
        &self,
        f: impl Fn(&Expr) -> Result<Expr, ExprError>,
    ) -> Result<VectorField, ExprError> {
        let mut out = Vec::new();
        for (i, c) in &self.comps {
            out.push((*i, f(c)?));
        }
        Ok(VectorField::new(&self.chart, out))
    }

    /// Interior product with a form.
    pub fn interior(&self, alpha: &Form) -> Result<Form, ExteriorError> {
        if self.chart != *alpha.chart() {
            return Err(ExteriorError::ChartMismatch);
        }
        if alpha.degree() == 0 {
            return Ok(Form::zero(&self.chart, 0));
        }
        let t = table_interior(&self.comps, alpha.terms());
        Ok(Form::from_terms(&self.chart, alpha.degree() - 1, t))
    }

    pub fn to_multivector(&self) -> Multivector {
        Multivector::decomposable(&self.chart, vec![self.clone()])
    }

    /// Rendering such as `t*d/dy + d/dy_t`.
    pub fn to_paper_string(&self) -> String {
        if self.comps.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (i, c)) in self.comps.iter().enumerate() {
            let basis = format!("d/d{}", self.chart.name(*i));
            let (neg, body) = if c.num_terms() == 1 {
                let neg = c.leading_coefficient() < num_traits::Zero::zero();
                let a = if neg { -c.clone() } else { c.clone() };
                (neg, if a.is_one() { basis } else { format!("{a}*{basis}") })
            } else {
                (false, format!("({c})*{basis}"))
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
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField({})", self.to_paper_string())
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_paper_string())
    }
}

/// Multivector field: a wedge of vector fields when decomposable, with the
/// antisymmetric coefficient table expanded on demand.
#[derive(Clone)]
pub struct Multivector {
    chart: Chart,
    degree: usize,
    factors: Option<Vec<VectorField>>,
    table: OnceLock<Table>,
}

impl PartialEq for Multivector {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.degree == other.degree && self.table() == other.table()
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multivector<{}>(", self.degree)?;
        for (k, (i, c)) in self.table().iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let names: Vec<_> = i.iter().map(|&j| format!("d/d{}", self.chart.name(j))).collect();
            write!(f, "({c}) {}", names.join("^"))?;
        }
        f.write_str(")")
    }
}

impl From<VectorField> for Multivector {
    fn from(v: VectorField) -> Multivector {
        v.to_multivector()
    }
}

impl Multivector {
    pub fn decomposable(chart: &Chart, factors: Vec<VectorField>) -> Multivector {
        assert!(factors.iter().all(|f| f.chart == *chart), "factor on a different chart");
        Multivector {
            chart: chart.clone(),
            degree: factors.len(),
            factors: Some(factors),
            table: OnceLock::new(),
        }
    }

    pub fn from_table<I: IntoIterator<Item = (Vec<usize>, Expr)>>(
        chart: &Chart,
        degree: usize,
        terms: I,
    ) -> Multivector {
        let mut t = Table::new();
        for (i, c) in terms {
            assert_eq!(i.len(), degree, "index length must equal the degree");
            table_insert(&mut t, i, c);
        }
        let table = OnceLock::new();
        let _ = table.set(t);
        Multivector { chart: chart.clone(), degree, factors: None, table }
    }

    /// `d/dx^{i1} ^ ... ^ d/dx^{ik}`.
    pub fn coordinate(chart: &Chart, idx: &[usize]) -> Multivector {
        Multivector::decomposable(
            chart,
            idx.iter().map(|&i| VectorField::coordinate(chart, i)).collect(),
        )
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn factors(&self) -> Option<&[VectorField]> {
        self.factors.as_deref()
    }

    pub fn is_decomposable(&self) -> bool {
        self.factors.is_some()
    }

    pub fn table(&self) -> &Table {
        self.table.get_or_init(|| {
            let factors = self.factors.as_ref().expect("table or factors present");
            let mut t = Table::new();
            table_insert(&mut t, vec![], Expr::one());
            for f in factors {
                let mut v = Table::new();
                for (i, c) in &f.comps {
                    table_insert(&mut v, vec![*i], c.clone());
                }
                t = table_wedge(&t, &v);
            }
            t
        })
    }

    pub fn wedge(&self, other: &Multivector) -> Result<Multivector, ExteriorError> {
        if self.chart != other.chart {
            return Err(ExteriorError::ChartMismatch);
        }
        match (&self.factors, &other.factors) {
            (Some(a), Some(b)) => {
                let mut f = a.clone();
                f.extend(b.iter().cloned());
                Ok(Multivector::decomposable(&self.chart, f))
            }
            _ => Ok(Multivector::from_table(
                &self.chart,
                self.degree + other.degree,
                table_wedge(self.table(), other.table()),
            )),
        }
    }

    pub fn try_add(&self, other: &Multivector) -> Result<Multivector, ExteriorError> {
        if self.chart != other.chart {
            return Err(ExteriorError::ChartMismatch);
        }
        if other.table().is_empty() {
            return Ok(self.clone());
        }
        if self.table().is_empty() {
            return Ok(other.clone());
        }
        if self.degree != other.degree {
            return Err(ExteriorError::DegreeMismatch { expected: self.degree, got: other.degree });
        }
        let mut t = self.table().clone();
        for (i, c) in other.table() {
            table_insert(&mut t, i.clone(), c.clone());
        }
        Ok(Multivector::from_table(&self.chart, self.degree, t))
    }

    pub fn scale(&self, e: &Expr) -> Multivector {
        match &self.factors {
            Some(f) if !f.is_empty() => {
                let mut f = f.clone();
                f[0] = f[0].scale(e);
                Multivector::decomposable(&self.chart, f)
            }
            _ => Multivector::from_table(
                &self.chart,
                self.degree,
                self.table().iter().map(|(i, c)| (i.clone(), c * e)),
            ),
        }
    }

    /// Splits into decomposable summands. Expanded tables are split term by
    /// term, the coefficient going into the first factor.
    pub fn decompose(&self) -> Vec<Vec<VectorField>> {
        if let Some(f) = &self.factors {
            return vec![f.clone()];
        }
        self.table()
            .iter()
            .map(|(idx, c)| {
                idx.iter()
                    .enumerate()
                    .map(|(k, &i)| {
                        let comp = if k == 0 { c.clone() } else { Expr::one() };
                        VectorField::new(&self.chart, [(i, comp)])
                    })
                    .collect()
            })
            .collect()
    }

    /// Contraction `i_{X1^...^Xm} alpha = i_{Xm} ... i_{X1} alpha`; zero when
    /// the form degree is below the multivector degree.
    pub fn contract(&self, alpha: &Form) -> Result<Form, ExteriorError> {
        if self.chart != *alpha.chart() {
            return Err(ExteriorError::ChartMismatch);
        }
        if alpha.degree() < self.degree {
            return Ok(Form::zero(&self.chart, 0));
        }
        let out_deg = alpha.degree() - self.degree;
        let mut acc = Form::zero(&self.chart, out_deg);
        for factors in self.decompose() {
            let mut a = alpha.clone();
            for f in &factors {
                a = f.interior(&a)?;
            }
            acc = acc.try_add(&a)?;
        }
        Ok(acc)
    }

    /// Graded Lie derivative `d i_X alpha - (-1)^m i_X d alpha`.
    pub fn lie_derivative(&self, alpha: &Form) -> Result<Form, ExteriorError> {
        let first = self.contract(alpha)?.ext_d();
        let second = self.contract(&alpha.ext_d())?;
        let second = if self.degree % 2 == 0 { -second } else { second };
        first.try_add(&second)
    }

    /// Schouten-Nijenhuis bracket, extended bilinearly over decomposable summands.
    pub fn schouten(&self, other: &Multivector) -> Result<Multivector, ExteriorError> {
        if self.chart != other.chart {
            return Err(ExteriorError::ChartMismatch);
        }
        if self.degree == 0 || other.degree == 0 {
            return Err(ExteriorError::Unsupported(
                "Schouten bracket with a degree-0 multivector".into(),
            ));
        }
        let (m, n) = (self.degree, other.degree);
        let mut acc = Table::new();
        for xs in self.decompose() {
            for ys in other.decompose() {
                for (i, xi) in xs.iter().enumerate() {
                    for (j, yj) in ys.iter().enumerate() {
                        let mut factors = vec![xi.bracket(yj)?];
                        factors.extend(xs.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, f)| f.clone()));
                        factors.extend(ys.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, f)| f.clone()));
                        let term = Multivector::decomposable(&self.chart, factors);
                        // (-1)^{i+j} with 1-based positions equals (-1)^{i+j} 0-based
                        let neg = (i + j) % 2 == 1;
                        for (idx, c) in term.table() {
                            table_insert(&mut acc, idx.clone(), if neg { -c } else { c.clone() });
                        }
                    }
                }
            }
        }
        Ok(Multivector::from_table(&self.chart, m + n - 1, acc))
    }

    pub fn zero_test(&self, cfg: &ProbeConfig) -> ZeroTest {
        self.table()
            .values()
            .fold(ZeroTest::Zero, |z, c| z.and(c.zero_test(cfg)))
    }
}
