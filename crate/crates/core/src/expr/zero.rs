use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Bindings, EvalError, Expr};

/// Outcome of a semantic zero test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroTest {
    /// Decided exactly by canonical form.
    Zero,
    /// Passed randomized probing; not a proof.
    ProbablyZero,
    NonZero,
}

impl ZeroTest {
    /// Zero or probably zero.
    pub fn holds(self) -> bool {
        !matches!(self, ZeroTest::NonZero)
    }

    pub fn is_exact(self) -> bool {
        matches!(self, ZeroTest::Zero)
    }

    /// Combines two verdicts: non-zero dominates, then probing.
    pub fn and(self, other: ZeroTest) -> ZeroTest {
        use ZeroTest::*;
        match (self, other) {
            (NonZero, _) | (_, NonZero) => NonZero,
            (ProbablyZero, _) | (_, ProbablyZero) => ProbablyZero,
            _ => Zero,
        }
    }
}

/// Parameters of the probing fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    /// Samples are drawn uniformly from `[-range, range]`.
    pub range: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            seed: 0x5eed,
            samples: 16,
            tol: 1e-9,
            range: 2.0,
        }
    }
}

impl Expr {
    /// Semantic zero test with the default probing configuration.
    pub fn is_zero(&self) -> ZeroTest {
        self.zero_test(&ProbeConfig::default())
    }

    pub fn zero_test(&self, cfg: &ProbeConfig) -> ZeroTest {
        if self.is_structurally_zero() {
            return ZeroTest::Zero;
        }
        let numer = self.cleared_numerator();
        if numer.is_structurally_zero() {
            return ZeroTest::Zero;
        }
        if !numer.has_functions() {
            return ZeroTest::NonZero;
        }
        probe(self, cfg)
    }
}

fn probe(e: &Expr, cfg: &ProbeConfig) -> ZeroTest {
    let syms: Vec<_> = e.free_symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut passed = 0usize;
    let mut attempts = 0usize;
    while passed < cfg.samples && attempts < cfg.samples * 4 {
        attempts += 1;
        let b: Bindings<f64> = syms
            .iter()
            .map(|s| (s.name().to_string(), rng.random_range(-cfg.range..=cfg.range)))
            .collect();
        let v = match e.eval(&b) {
            Ok(v) => v,
            Err(EvalError::Domain(_)) => continue,
            Err(EvalError::Unbound(_)) => unreachable!("all free symbols are bound"),
        };
        let scale = e.eval_abs_terms(&b).unwrap_or(1.0).max(1.0);
        if !v.is_finite() {
            continue;
        }
        if v.abs() > cfg.tol * scale {
            return ZeroTest::NonZero;
        }
        passed += 1;
    }
    if passed == 0 {
        ZeroTest::NonZero
    } else {
        ZeroTest::ProbablyZero
    }
}
