//! Euler-Maruyama Monte Carlo for `E[exp(-lambda int_0^T r dt)]` on the
//! constant-volatility x-process.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::TransformedModel;

/// Antithetic pairs simulated per random-number stream.
const PAIRS_PER_CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    /// Standard error of the mean over antithetic pair averages.
    pub stderr: f64,
    pub n_paths: usize,
    /// Step actually used (`T` divided into whole steps).
    pub dt: f64,
    pub seed: u64,
}

/// Running mean and sum of squared deviations, merged in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * self.n * other.n / n,
        }
    }
}

/// Discounted payoff of one path driven by `sign * z_k`.
fn discount_along_path<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    x0: f64,
    steps: usize,
    dt: f64,
    shocks: &[f64],
    sign: f64,
) -> f64 {
    if lambda == 0.0 {
        return 1.0;
    }
    let vol = model.sigma() * dt.sqrt();
    let mut x = x0;
    let mut r = model.rate(x);
    let mut integral = 0.0;
    for z in &shocks[..steps] {
        x += model.drift(x) * dt + vol * sign * z;
        let r_next = model.rate(x);
        integral += 0.5 * (r + r_next) * dt;
        r = r_next;
    }
    (-lambda * integral).exp()
}

/// Monte Carlo estimate of `Z_lambda(y0, T)`.
///
/// Paths come in antithetic pairs; pair `i` of chunk `c` draws from the
/// ChaCha8 stream `c` of `seed`, so the estimate is reproducible and
/// independent of the thread count.
pub fn monte_carlo_bond<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    y0: f64,
    horizon: f64,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<McEstimate> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    if !(dt > 0.0 && dt <= horizon) {
        return Err(Error::InvalidParameter(format!("time step {dt} must lie in (0, T]")));
    }
    if n_paths < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 paths, got {n_paths}")));
    }
    let x0 = model.lamperti(y0)?;
    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let dt = horizon / steps as f64;
    let pairs = n_paths.div_ceil(2);
    let chunks = pairs.div_ceil(PAIRS_PER_CHUNK);

    let per_chunk: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = PAIRS_PER_CHUNK.min(pairs - c * PAIRS_PER_CHUNK);
            let mut shocks = vec![0.0; steps];
            let mut moments = Moments::default();
            for _ in 0..count {
                for z in shocks.iter_mut() {
                    *z = StandardNormal.sample(&mut rng);
                }
                let up = discount_along_path(model, lambda, x0, steps, dt, &shocks, 1.0);
                let down = discount_along_path(model, lambda, x0, steps, dt, &shocks, -1.0);
                moments.push(0.5 * (up + down));
            }
            moments
        })
        .collect();
    let total = per_chunk.into_iter().fold(Moments::default(), Moments::merge);
    if !total.mean.is_finite() {
        return Err(Error::NonFinite("Monte Carlo estimate".into()));
    }
    let variance = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Ok(McEstimate {
        value: total.mean,
        stderr: (variance / total.n).sqrt(),
        n_paths: 2 * pairs,
        dt,
        seed,
    })
}
