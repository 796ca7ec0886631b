//! Cached Gauss-Legendre / Gauss-Hermite rules.
//!
//! Node and weight generation is delegated to `gauss-quad`; rules are built
//! once per order and shared between threads.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, OnceLock, RwLock};

use gauss_quad::{GaussHermite, GaussLegendre};

/// Nodes and weights on the reference interval of a rule.
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type RuleCache = RwLock<HashMap<usize, Arc<Rule>>>;

fn cached(cache: &'static OnceLock<RuleCache>, order: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    let cache = cache.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = cache.read().expect("rule cache poisoned").get(&order) {
        return Arc::clone(rule);
    }
    let mut guard = cache.write().expect("rule cache poisoned");
    Arc::clone(guard.entry(order).or_insert_with(|| Arc::new(build(order))))
}

fn order(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(1)).expect("order is at least one")
}

/// Gauss-Legendre rule on [-1, 1].
pub fn legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    cached(&CACHE, n, |n| {
        let rule = GaussLegendre::new(order(n));
        let (nodes, weights) = rule.into_iter().unzip();
        Rule { nodes, weights }
    })
}

/// Gauss-Hermite rule for the weight `exp(-t^2)` on the real line.
pub fn hermite(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    cached(&CACHE, n, |n| {
        let rule = GaussHermite::new(order(n));
        let (nodes, weights) = rule.into_iter().unzip();
        Rule { nodes, weights }
    })
}

impl Rule {
    /// Map the Legendre rule onto `[lo, hi]` and yield `(x, w)` pairs.
    pub fn on_interval(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }
}

/// Gauss-Legendre integral of `f` over `[lo, hi]` with `n` nodes.
pub fn integrate_legendre<F: FnMut(f64) -> f64>(n: usize, lo: f64, hi: f64, mut f: F) -> f64 {
    legendre(n).on_interval(lo, hi).map(|(x, w)| w * f(x)).sum()
}

/// Adaptive Gauss-Kronrod-free bisection: compares a 10-node rule on the
/// whole panel against the sum over its halves until they agree.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(lo: f64, hi: f64, tol: f64, f: &F) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(lo: f64, hi: f64, whole: f64, tol: f64, depth: u32, f: &F) -> f64 {
        let mid = 0.5 * (lo + hi);
        let left = integrate_legendre(10, lo, mid, f);
        let right = integrate_legendre(10, mid, hi, f);
        let split = left + right;
        if depth == 0 || (split - whole).abs() <= tol.max(1e-15 * split.abs()) {
            return split;
        }
        recurse(lo, mid, left, 0.5 * tol, depth - 1, f)
            + recurse(mid, hi, right, 0.5 * tol, depth - 1, f)
    }
    if lo == hi {
        return 0.0;
    }
    let whole = integrate_legendre(10, lo, hi, f);
    recurse(lo, hi, whole, tol, 40, f)
}
