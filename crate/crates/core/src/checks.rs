//! Randomized verification of the exterior-calculus identities.
//!
//! Every check draws instances from a seeded [`Sampler`] and tests the
//! difference of both sides for zero after canonicalization. Instances whose
//! coefficients contain elementary functions go through the probing
//! fallback and are counted separately.

use serde::Serialize;

use crate::exterior::{sort_with_sign, Chart, ExteriorError, Form, Multivector};
use crate::expr::{Expr, ProbeConfig, ZeroTest};
use crate::random::Sampler;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub name: &'static str,
    pub instances: usize,
    /// Decided exactly by canonical form.
    pub exact: usize,
    /// Passed by probing only.
    pub probed: usize,
    pub failures: usize,
    /// Instances where both sides vanished identically (uninformative).
    pub trivial: usize,
}

impl IdentityReport {
    fn new(name: &'static str) -> Self {
        IdentityReport { name, instances: 0, exact: 0, probed: 0, failures: 0, trivial: 0 }
    }

    fn record(&mut self, verdict: ZeroTest, trivial: bool) {
        self.instances += 1;
        match verdict {
            ZeroTest::Zero => self.exact += 1,
            ZeroTest::ProbablyZero => self.probed += 1,
            ZeroTest::NonZero => self.failures += 1,
        }
        if trivial {
            self.trivial += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.instances > 0
    }
}

fn chart(dim: usize) -> Chart {
    const NAMES: [&str; 7] = ["t", "x", "u", "v", "w", "q", "r"];
    Chart::generic(&NAMES[..dim], 1).expect("valid chart")
}

fn verdict(diff: &Form, cfg: &ProbeConfig) -> ZeroTest {
    diff.zero_test(cfg).0
}

fn sampler(seed: u64, transcendental: bool) -> Sampler {
    let mut s = Sampler::new(seed);
    if transcendental {
        s.transcendental = 0.15;
    }
    s
}

/// d(d(alpha)) = 0.
pub fn d_squared(seed: u64, n: usize, cfg: &ProbeConfig) -> IdentityReport {
    let mut r = IdentityReport::new("d o d = 0");
    let mut s = sampler(seed, true);
    for i in 0..n {
        let c = chart(3 + i % 3);
        let k = i % (c.dim() - 1);
        let a = s.form(&c, k, 3);
        let dd = a.ext_d().ext_d();
        r.record(verdict(&dd, cfg), a.ext_d().is_structurally_zero());
    }
    r
}

/// alpha ^ beta = (-1)^{kl} beta ^ alpha.
pub fn wedge_antisymmetry(seed: u64, n: usize, cfg: &ProbeConfig) -> IdentityReport {
    let mut r = IdentityReport::new("graded wedge antisymmetry");
    let mut s = sampler(seed, true);
    for i in 0..n {
        let c = chart(4 + i % 2);
        let k = s.rng_range(0, 3);
        let l = s.rng_range(0, c.dim() - k);
        let a = s.form(&c, k, 3);
        let b = s.form(&c, l, 3);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let ba = if (k * l) % 2 == 1 { -ba } else { ba };
        r.record(verdict(&(&ab - &ba), cfg), ab.is_structurally_zero());
    }
    r
}

/// Determinant of a square matrix of expressions by permutation expansion.
fn det(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut acc = Expr::zero();
    permute(&mut perm, 0, &mut |p| {
        let mut q = p.to_vec();
        let odd = sort_with_sign(&mut q).expect("permutation");
        let mut t = Expr::one();
        for (row, &col) in p.iter().enumerate() {
            t = t * &m[row][col];
        }
        acc = &acc + &(if odd { -t } else { t });
    });
    acc
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Contraction order against alpha(X1, ..., Xm, d_j1, ..., d_jr) computed by
/// full antisymmetrization.
pub fn contraction_convention(seed: u64, n: usize, cfg: &ProbeConfig) -> IdentityReport {
    let mut r = IdentityReport::new("contraction order vs brute force");
    let mut s = sampler(seed, false);
    for i in 0..n {
        let c = chart(2 + i % 4);
        let dim = c.dim();
        let k = s.rng_range(1, dim + 1);
        let m = s.rng_range(1, k + 1);
        let a = s.form(&c, k, 4);
        let x = s.dense_decomposable(&c, m);
        let got = x.contract(&a).unwrap();
        let mut diff = got.clone();
        for rest in subsets(dim, k - m) {
            let mut vectors: Vec<Vec<Expr>> = x
                .factors()
                .unwrap()
                .iter()
                .map(|f| (0..dim).map(|j| f.component(j)).collect())
                .collect();
            for &j in &rest {
                vectors.push((0..dim).map(|q| if q == j { Expr::one() } else { Expr::zero() }).collect());
            }
            let mut value = Expr::zero();
            for (idx, coeff) in a.terms() {
                let mat: Vec<Vec<Expr>> = vectors
                    .iter()
                    .map(|v| idx.iter().map(|&q| v[q].clone()).collect())
                    .collect();
                value = value + coeff * &det(&mat);
            }
            diff = &diff - &Form::from_terms(&c, k - m, [(rest, value)]);
        }
        r.record(verdict(&diff, cfg), got.is_structurally_zero());
    }
    r
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// i_{[Y,X]} alpha = L_Y i_X alpha - i_X L_Y alpha for vector fields Y.
pub fn bracket_contraction(seed: u64, n: usize, cfg: &ProbeConfig) -> IdentityReport {
    let mut r = IdentityReport::new("i_[Y,X] = L_Y i_X - i_X L_Y");
    let mut s = sampler(seed, true);
    for i in 0..n {
        let c = chart(4 + i % 2);
        let m = 1 + i % 3;
        let x = s.dense_decomposable(&c, m);
        let y = s.dense_vector_field(&c).to_multivector();
        let k = s.rng_range(m, c.dim() + 1);
        let a = s.form(&c, k, 3);
        let lhs = y.schouten(&x).unwrap().contract(&a).unwrap();
        let rhs = y
            .lie_derivative(&x.contract(&a).unwrap())
            .unwrap()
            .try_add(&-&x.contract(&y.lie_derivative(&a).unwrap()).unwrap())
            .unwrap();
        r.record(verdict(&lhs.try_add(&-&rhs).unwrap(), cfg), lhs.is_structurally_zero());
    }
    r
}

fn mv_zero(x: &Multivector, cfg: &ProbeConfig) -> ZeroTest {
    x.zero_test(cfg)
}

fn mv_sub(a: &Multivector, b: &Multivector) -> Result<Multivector, ExteriorError> {
    a.try_add(&b.scale(&-Expr::one()))
}

/// [P,Q] = -(-1)^{(p-1)(q-1)} [Q,P].
pub fn schouten_antisymmetry(seed: u64, n: usize, cfg: &ProbeConfig) -> IdentityReport {
    let mut r = IdentityReport::new("Schouten graded antisymmetry");
    let mut s = sampler(seed, true);
    for i in 0..n {
        let c = chart(4 + i % 2);
        let (p, q) = (1 + i % 3, 1 + (i / 3) % 2);
        let a = s.dense_decomposable(&c, p);
        let b = s.dense_decomposable(&c, q);
        let ab = a.schouten(&b).unwrap();
        let ba = b.schouten(&a).unwrap();
        let sign = if ((p - 1) * (q - 1)) % 2 == 0 { -Expr::one() } else { Expr::one() };
        let d = mv_sub(&ab, &ba.scale(&sign)).unwrap();
        r.record(mv_zero(&d, cfg), ab.table().is_empty());
    }
    r
}

/// [P, Q^R] = [P,Q]^R + (-1)^{(p-1)q} Q^[P,R].
pub fn schouten_leibniz(seed: u64, n: usize, cfg: &ProbeConfig) -> IdentityReport {
    let mut r = IdentityReport::new("Schouten Leibniz rule");
    let mut s = sampler(seed, true);
    for i in 0..n {
        let c = chart(5);
        let (p, q, rr) = (1 + i % 2, 1 + (i / 2) % 2, 1);
        let a = s.dense_decomposable(&c, p);
        let b = s.dense_decomposable(&c, q);
        let d = s.dense_decomposable(&c, rr);
        let lhs = a.schouten(&b.wedge(&d).unwrap()).unwrap();
        let t1 = a.schouten(&b).unwrap().wedge(&d).unwrap();
        let t2 = b.wedge(&a.schouten(&d).unwrap()).unwrap();
        let t2 = if ((p - 1) * q) % 2 == 1 { t2.scale(&-Expr::one()) } else { t2 };
        let diff = mv_sub(&mv_sub(&lhs, &t1).unwrap(), &t2).unwrap();
        r.record(mv_zero(&diff, cfg), lhs.table().is_empty());
    }
    r
}

/// L_{[X,Y]} = (-1)^{(m-1)(n-1)} L_X L_Y - L_Y L_X on forms.
pub fn lie_of_bracket(seed: u64, n: usize, cfg: &ProbeConfig) -> IdentityReport {
    let mut r = IdentityReport::new("L_[X,Y] via graded commutator");
    let mut s = sampler(seed, false);
    for i in 0..n {
        let c = chart(5 + i % 2);
        let (m, q) = (1 + i % 2, 1 + (i / 2) % 2);
        let x = s.dense_decomposable(&c, m);
        let y = s.dense_decomposable(&c, q);
        let k = s.rng_range(m + q - 1, c.dim() + 1);
        let a = s.form(&c, k, 3);
        let lhs = x.schouten(&y).unwrap().lie_derivative(&a).unwrap();
        let xy = x.lie_derivative(&y.lie_derivative(&a).unwrap()).unwrap();
        let yx = y.lie_derivative(&x.lie_derivative(&a).unwrap()).unwrap();
        let xy = if ((m - 1) * (q - 1)) % 2 == 1 { -xy } else { xy };
        let diff = lhs.try_add(&-&xy).unwrap().try_add(&yx).unwrap();
        r.record(verdict(&diff, cfg), lhs.is_structurally_zero());
    }
    r
}

/// Runs every identity with `n` instances each.
pub fn appendix_suite(seed: u64, n: usize, cfg: &ProbeConfig) -> Vec<IdentityReport> {
    vec![
        d_squared(seed, n, cfg),
        wedge_antisymmetry(seed + 1, n, cfg),
        contraction_convention(seed + 2, n, cfg),
        bracket_contraction(seed + 3, n, cfg),
        schouten_antisymmetry(seed + 4, n, cfg),
        schouten_leibniz(seed + 5, n, cfg),
        lie_of_bracket(seed + 6, n, cfg),
    ]
}
