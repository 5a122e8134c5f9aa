//! Seeded generators of random symbolic objects for property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exterior::{Chart, Form, Multivector, VectorField};
use crate::expr::Expr;
use crate::lagrangian::LagrangianSystem;

pub struct Sampler {
    rng: ChaCha8Rng,
    /// Probability that a generated coefficient contains `sin` of a coordinate.
    pub transcendental: f64,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), transcendental: 0.0 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Random polynomial in the chart coordinates: up to `terms` monomials
    /// of total degree at most 2 with coefficients in [-3, 3].
    pub fn poly(&mut self, chart: &Chart, terms: usize) -> Expr {
        let mut acc = Expr::zero();
        for _ in 0..self.rng.random_range(1..=terms) {
            let mut t = Expr::int(self.rng.random_range(-3..=3));
            for _ in 0..self.rng.random_range(0..=2) {
                let i = self.rng.random_range(0..chart.dim());
                t = t * chart.var(i);
            }
            acc = acc + t;
        }
        if self.rng.random_bool(self.transcendental) {
            let i = self.rng.random_range(0..chart.dim());
            acc = acc + chart.var(i).sin();
        }
        acc
    }

    pub fn form(&mut self, chart: &Chart, degree: usize, terms: usize) -> Form {
        let mut f = Form::zero(chart, degree);
        for _ in 0..self.rng.random_range(1..=terms) {
            let idx = self.subset(chart.dim(), degree);
            let c = self.poly(chart, 2);
            f = &f + &Form::basis(chart, &idx).scale(&c);
        }
        f
    }

    pub fn vector_field(&mut self, chart: &Chart, comps: usize) -> VectorField {
        let pairs: Vec<_> = (0..self.rng.random_range(1..=comps))
            .map(|_| {
                let i = self.rng.random_range(0..chart.dim());
                (i, self.poly(chart, 2))
            })
            .collect();
        VectorField::new(chart, pairs)
    }

    pub fn decomposable(&mut self, chart: &Chart, degree: usize) -> Multivector {
        let f = (0..degree).map(|_| self.vector_field(chart, 3)).collect();
        Multivector::decomposable(chart, f)
    }

    /// Vector field with every component populated.
    pub fn dense_vector_field(&mut self, chart: &Chart) -> VectorField {
        let pairs: Vec<_> = (0..chart.dim()).map(|i| (i, self.poly(chart, 2))).collect();
        VectorField::new(chart, pairs)
    }

    pub fn dense_decomposable(&mut self, chart: &Chart, degree: usize) -> Multivector {
        let f = (0..degree).map(|_| self.dense_vector_field(chart)).collect();
        Multivector::decomposable(chart, f)
    }

    /// Uniform integer in `lo..hi`.
    pub fn rng_range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..hi)
    }

    /// `k` distinct indices below `n`, in random order.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut all: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = self.rng.random_range(i..n);
            all.swap(i, j);
        }
        all.truncate(k);
        all
    }
}

impl Sampler {
    /// Random regular Lagrangian on a 1+1 jet chart, quadratic in velocities
    /// and independent of the fields: `v^T A v / 2 + b.v - k.s` with a
    /// nondegenerate integer `A`, base-dependent `b`, and an occasional
    /// quadratic action term.
    pub fn quadratic_lagrangian(&mut self, fields: &[&str]) -> LagrangianSystem {
        let chart = Chart::jet(&["t", "x"], fields).expect("valid chart");
        let n = fields.len() * 2;
        let vel: Vec<Expr> = (0..fields.len())
            .flat_map(|a| (0..2).map(move |mu| (a, mu)))
            .map(|(a, mu)| chart.var(chart.velocity(a, mu)))
            .collect();
        loop {
            let mut l = Expr::zero();
            for i in 0..n {
                for j in i..n {
                    let a = if i == j {
                        let d = self.rng.random_range(1..=4);
                        if self.rng.random_bool(0.5) { d } else { -d }
                    } else if self.rng.random_bool(0.4) {
                        self.rng.random_range(-2..=2)
                    } else {
                        0
                    };
                    let coeff = if i == j { Expr::frac(a, 2) } else { Expr::int(a) };
                    l = l + coeff * &vel[i] * &vel[j];
                }
                if self.rng.random_bool(0.3) {
                    let b = self.rng.random_range(0..2);
                    l = l + Expr::int(self.rng.random_range(-2..=2)) * chart.var(chart.base(b)) * &vel[i];
                }
            }
            for mu in 0..2 {
                let s = chart.var(chart.action(mu));
                l = l - Expr::frac(self.rng.random_range(0..=4), 2) * &s;
            }
            if self.rng.random_bool(0.25) {
                let s = chart.var(chart.action(0));
                l = l - Expr::frac(1, 4) * &s * &s;
            }
            let sys = LagrangianSystem::new(&chart, &[], l).expect("chart symbols only");
            if sys.regularity().is_regular() {
                return sys;
            }
        }
    }
}
