//! Effective support of the transition density in the x-coordinate.

use crate::models::TransformedModel;

/// Interval that holds all but a negligible part of the density of `X_T`
/// started at `x0`.
///
/// The core `[min(x0, x_eq), max(x0, x_eq)]` is extended on each side by
/// `k sigma sqrt(T)` (free diffusion), but no further than the point where
/// the stationary log-density `-2 W` has dropped by `k^2 / 2`, which is where
/// a restoring drift confines the process (`k` standard deviations for an
/// Ornstein-Uhlenbeck process).
pub fn support_window<M: TransformedModel + ?Sized>(model: &M, x0: f64, horizon: f64, k: f64) -> (f64, f64) {
    let sigma = model.sigma();
    let spread = k * sigma * horizon.sqrt();
    let eq = model.equilibrium().filter(|x| x.is_finite()).unwrap_or(x0);
    let (core_lo, core_hi) = (x0.min(eq), x0.max(eq));
    let drop = 0.5 * k * k;
    let barrier = |from: f64, dir: f64| -> f64 {
        // first distance (doubling) where -2 W(x, from) < -drop
        let mut d = 0.05 * spread.max(1e-12);
        while d < spread {
            let x = from + dir * d;
            if -2.0 * model.drift_primitive(from, x) < -drop {
                return d;
            }
            d *= 1.25;
        }
        spread
    };
    let lo = core_lo - barrier(core_lo, -1.0);
    let hi = core_hi + barrier(core_hi, 1.0);
    let dom = model.x_domain();
    (lo.max(dom.lo), hi.min(dom.hi))
}
