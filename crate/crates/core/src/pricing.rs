//! Arrow-Debreu densities, bonds and European prices from the
//! average-point decomposition
//!
//! ```text
//! psi(x_t, x_0, T) = exp(-W(x_t, x_0)) int dxbar rho_xbar(x_t, x_0, T)
//! ```
//!
//! with the trial reduced density `rho_xbar` from [`crate::gtfk`].

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::NumericsConfig;
use crate::error::{Error, Result};
use crate::gtfk::{solve_self_consistent, GtfkPoint};
use crate::models::{ShortRateModel, TransformedModel};
use crate::quadrature::legendre;
use crate::support::support_window;

/// How a density or price was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gtfk,
    Pde,
    Convolution,
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Gtfk => "gtfk",
            Method::Pde => "pde",
            Method::Convolution => "convolution",
            Method::Exact => "exact",
            Method::MonteCarlo => "mc",
        }
    }
}

/// A sampled density `psi^Y_lambda(., y0, T)` in the original coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub lambda: f64,
    pub horizon: f64,
    pub y0: f64,
    /// `(y, psi)` pairs with increasing `y`.
    pub samples: Vec<(f64, f64)>,
    pub method: Method,
    pub diagnostics: Vec<String>,
}

impl DensityCurve {
    /// Trapezoid integral over the samples.
    pub fn integral(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 + p[1].1))
            .sum()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(0.0, f64::max)
    }

    /// Linear interpolation of the density at `y` (zero outside the samples).
    pub fn interpolate(&self, y: f64) -> f64 {
        let s = &self.samples;
        if s.is_empty() || y < s[0].0 || y > s[s.len() - 1].0 {
            return 0.0;
        }
        let i = s.partition_point(|p| p.0 <= y).clamp(1, s.len() - 1);
        let (a, b) = (s[i - 1], s[i]);
        if b.0 == a.0 {
            return a.1;
        }
        a.1 + (b.1 - a.1) * (y - a.0) / (b.0 - a.0)
    }
}

/// `Z_lambda(y0, T)`: a zero-coupon bond (or survival probability) for
/// `lambda = 1`, the transition mass for `lambda = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondQuote {
    pub horizon: f64,
    pub value: f64,
    pub method: Method,
    pub err_estimate: f64,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionPrice {
    pub value: f64,
    pub err_estimate: f64,
    pub diagnostics: Vec<String>,
}

/// Payout of a European claim as a function of the terminal state `y`.
pub trait Payout: Sync {
    fn value(&self, y: f64) -> f64;

    /// States where the payout is not smooth; quadrature panels break there.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64 + Sync> Payout for F {
    fn value(&self, y: f64) -> f64 {
        self(y)
    }
}

/// Standard payouts on the terminal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vanilla {
    Unit,
    Call { strike: f64 },
    Put { strike: f64 },
    /// Pays one when `y > strike`.
    Digital { strike: f64 },
}

impl Payout for Vanilla {
    fn value(&self, y: f64) -> f64 {
        match *self {
            Vanilla::Unit => 1.0,
            Vanilla::Call { strike } => (y - strike).max(0.0),
            Vanilla::Put { strike } => (strike - y).max(0.0),
            Vanilla::Digital { strike } => {
                if y > strike {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match *self {
            Vanilla::Unit => Vec::new(),
            Vanilla::Call { strike } | Vanilla::Put { strike } | Vanilla::Digital { strike } => {
                vec![strike]
            }
        }
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")))
    }
}

/// `ln sum_i w_i exp(l_i)` for log-values `l_i`, or `-inf` for an empty / all-zero sum.
fn log_weighted_sum(terms: &[(f64, f64)]) -> f64 {
    let m = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = terms.iter().map(|&(w, l)| w * (l - m).exp()).sum();
    m + s.ln()
}

/// Generalized Arrow-Debreu density in the x-coordinate.
///
/// The average-point integral runs over a Gauss-Legendre window centered at
/// the midpoint of `x0, xt`, `xbar_span sqrt(alpha_max)` wide on each side
/// and widened until the integrand at its edges is negligible.
pub fn ad_density<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    x0: f64,
    xt: f64,
    horizon: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    check_horizon(horizon)?;
    let (n, _) = cfg.orders(horizon);
    let mid = 0.5 * (x0 + xt);
    let solve = |xbar: f64| solve_self_consistent(model, lambda, horizon, xbar, cfg);
    let log_integrand = |p: &GtfkPoint| p.ln_reduced_density(x0, xt);

    let center = solve(mid)?;
    let mut alpha_max = center.alpha;
    let mut half = cfg.xbar_span * alpha_max.sqrt();
    let rule = legendre(n);
    for _ in 0..40 {
        let (lo, hi) = (mid - half, mid + half);
        let points: Vec<(f64, GtfkPoint)> = rule
            .on_interval(lo, hi)
            .map(|(x, w)| solve(x).map(|p| (w, p)))
            .collect::<Result<_>>()?;
        let terms: Vec<(f64, f64)> = points
            .iter()
            .map(|(w, p)| log_integrand(p).map(|l| (*w, l)))
            .collect::<Result<_>>()?;
        alpha_max = points.iter().map(|(_, p)| p.alpha).fold(alpha_max, f64::max);
        let wanted = cfg.xbar_span * alpha_max.sqrt();
        if wanted > half * (1.0 + 1e-9) {
            half = wanted;
            continue;
        }
        let peak = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        let edge = log_integrand(&solve(lo)?)?.max(log_integrand(&solve(hi)?)?);
        if peak.is_finite() && edge > peak + cfg.edge_tol.ln() {
            half *= 1.5;
            continue;
        }
        let ln_rho = log_weighted_sum(&terms);
        let value = (ln_rho - model.drift_primitive(x0, xt)).exp();
        return if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite(format!("density at x_t = {xt}")))
        };
    }
    Err(Error::NonFinite(format!(
        "average-point window around {mid} did not close"
    )))
}

/// Density in the original coordinate, `psi^Y = sigma psi(gamma(y_t)) / sigma_y(y_t)`.
pub fn ad_density_y<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    y0: f64,
    yt: f64,
    horizon: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    let x0 = model.lamperti(y0)?;
    let xt = model.lamperti(yt)?;
    Ok(model.sigma() * ad_density(model, lambda, x0, xt, horizon, cfg)? / model.sigma_y(yt))
}

/// Terminal-state grid in y, uniform in the x-coordinate over the support window.
pub fn default_y_grid<M: TransformedModel + ?Sized>(
    model: &M,
    y0: f64,
    horizon: f64,
    cfg: &NumericsConfig,
    points: usize,
) -> Result<Vec<f64>> {
    let x0 = model.lamperti(y0)?;
    let (lo, hi) = support_window(model, x0, horizon, cfg.tail_factor);
    let points = points.max(2);
    (0..points)
        .map(|i| model.lamperti_inverse(lo + (hi - lo) * i as f64 / (points - 1) as f64))
        .collect()
}

/// GTFK density curve on the given y grid (evaluated in parallel).
pub fn density_curve<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    y0: f64,
    horizon: f64,
    ys: &[f64],
    cfg: &NumericsConfig,
) -> Result<DensityCurve> {
    let samples = ys
        .par_iter()
        .map(|&y| ad_density_y(model, lambda, y0, y, horizon, cfg).map(|v| (y, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityCurve {
        lambda,
        horizon,
        y0,
        samples,
        method: Method::Gtfk,
        diagnostics: Vec::new(),
    })
}

/// Outcome of one terminal integration at fixed quadrature orders.
struct TerminalIntegral {
    value: f64,
    edge_share: f64,
}

/// `int dx_t psi_lambda(x_t, x0, T) g(x_t)` with the order of integration
/// swapped: the outer Gauss-Legendre sum runs over average points (each
/// solved once), the inner one over the terminal state, where the reduced
/// density is Gaussian with known mean and width.
fn integrate_terminal<M, G>(
    model: &M,
    lambda: f64,
    x0: f64,
    horizon: f64,
    cfg: &NumericsConfig,
    orders: (usize, usize),
    g: &G,
    breaks: &[f64],
) -> Result<TerminalIntegral>
where
    M: TransformedModel + ?Sized,
    G: Fn(f64) -> f64 + Sync,
{
    let (n_xbar, n_xt) = orders;
    let (mut lo, mut hi) = support_window(model, x0, horizon, cfg.tail_factor);
    let outer_rule = legendre(n_xbar);
    let inner_rule = legendre(n_xt);

    // log-scale representation: (ln mass, weighted payout average, ln mass without payout)
    let inner = |xbar: f64| -> Result<(f64, f64)> {
        let p = solve_self_consistent(model, lambda, horizon, xbar, cfg)?;
        let c = p.end_to_end_coefficient()?;
        let precision = 1.0 / (4.0 * p.alpha) + 2.0 * c;
        if !(precision > 0.0) {
            return Err(Error::BranchBreakdown {
                xbar: Some(xbar),
                phi: p.half_angle,
            });
        }
        let mean = ((2.0 * xbar - x0) / (4.0 * p.alpha) + 2.0 * c * x0) / precision;
        let sd = precision.sqrt().recip();
        let ln_point = |xt: f64| -> Result<f64> {
            Ok(p.ln_reduced_density(x0, xt)? - model.drift_primitive(x0, xt))
        };
        let mut width = cfg.tail_factor * sd;
        for _ in 0..40 {
            let (a, b) = (mean - width, mean + width);
            let mut cuts = vec![a];
            cuts.extend(breaks.iter().copied().filter(|&k| k > a && k < b));
            cuts.push(b);
            let mut terms = Vec::with_capacity(n_xt * (cuts.len() - 1));
            let mut weighted = Vec::with_capacity(terms.capacity());
            for panel in cuts.windows(2) {
                for (x, w) in inner_rule.on_interval(panel[0], panel[1]) {
                    let l = ln_point(x)?;
                    terms.push((w, l));
                    weighted.push((w, l, g(x)));
                }
            }
            let peak = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
            if !peak.is_finite() {
                return Ok((f64::NEG_INFINITY, 0.0));
            }
            let edge = ln_point(a)?.max(ln_point(b)?);
            if edge > peak + cfg.edge_tol.ln() {
                width *= 1.5;
                continue;
            }
            let scaled: f64 = weighted.iter().map(|&(w, l, gv)| w * (l - peak).exp() * gv).sum();
            return Ok((peak, scaled));
        }
        Err(Error::NonFinite(format!("terminal window at xbar = {xbar} did not close")))
    };

    for _ in 0..40 {
        let nodes: Vec<(f64, f64)> = outer_rule.on_interval(lo, hi).collect();
        let values = nodes
            .par_iter()
            .map(|&(x, w)| inner(x).map(|(l, s)| (w, l, s)))
            .collect::<Result<Vec<_>>>()?;
        let peak = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(Error::NonFinite("terminal integral vanished on its window".into()));
        }
        // widen the average-point window while the edges still carry weight
        let (l_lo, _) = inner(lo)?;
        let (l_hi, _) = inner(hi)?;
        let tol = cfg.edge_tol.ln();
        let width = hi - lo;
        if l_lo > peak + tol || l_hi > peak + tol {
            if l_lo > peak + tol {
                lo -= 0.25 * width;
            }
            if l_hi > peak + tol {
                hi += 0.25 * width;
            }
            continue;
        }
        let contributions: Vec<f64> = values.iter().map(|&(w, l, s)| w * (l - peak).exp() * s).collect();
        let total: f64 = contributions.iter().sum();
        let k = contributions.len();
        let edge: f64 = contributions[..2.min(k)]
            .iter()
            .chain(&contributions[k.saturating_sub(2)..])
            .map(|c| c.abs())
            .sum();
        let value = peak.exp() * total;
        if !value.is_finite() {
            return Err(Error::NonFinite("terminal integral overflowed".into()));
        }
        return Ok(TerminalIntegral {
            value,
            edge_share: if total != 0.0 { edge / total.abs() } else { 0.0 },
        });
    }
    Err(Error::NonFinite("average-point window did not close".into()))
}

fn refined(
    run: impl Fn((usize, usize)) -> Result<TerminalIntegral>,
    orders: (usize, usize),
) -> Result<(TerminalIntegral, f64)> {
    let coarse = run(orders)?;
    let fine = run((2 * orders.0, 2 * orders.1))?;
    let err = (fine.value - coarse.value).abs().max(1e-14 * fine.value.abs());
    Ok((fine, err))
}

/// `Z_lambda(y0, T) = int dy_t psi^Y_lambda(y_t, y0, T)`.
///
/// The reported value uses twice the configured quadrature orders; the error
/// estimate is its difference from the configured-order value.
pub fn zero_coupon_bond<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    y0: f64,
    horizon: f64,
    cfg: &NumericsConfig,
) -> Result<BondQuote> {
    check_horizon(horizon)?;
    let x0 = model.lamperti(y0)?;
    let one = |_: f64| 1.0;
    let (fine, err) = refined(
        |o| integrate_terminal(model, lambda, x0, horizon, cfg, o, &one, &[]),
        cfg.orders(horizon),
    )?;
    Ok(BondQuote {
        horizon,
        value: fine.value,
        method: Method::Gtfk,
        err_estimate: err,
        diagnostics: Vec::new(),
    })
}

/// European price `int dy_t psi^Y_lambda(y_t, y0, T) P(y_t)`.
pub fn price_european<M, P>(
    model: &M,
    payout: &P,
    lambda: f64,
    y0: f64,
    horizon: f64,
    cfg: &NumericsConfig,
) -> Result<OptionPrice>
where
    M: TransformedModel + ?Sized,
    P: Payout + ?Sized,
{
    check_horizon(horizon)?;
    let x0 = model.lamperti(y0)?;
    let breaks: Vec<f64> = payout
        .kinks()
        .into_iter()
        .filter_map(|k| model.lamperti(k).ok())
        .collect();
    let g = |xt: f64| model.lamperti_inverse(xt).map_or(0.0, |y| payout.value(y));
    let (fine, err) = refined(
        |o| integrate_terminal(model, lambda, x0, horizon, cfg, o, &g, &breaks),
        cfg.orders(horizon),
    )?;
    let mut diagnostics = Vec::new();
    if fine.edge_share > 1e-6 {
        let msg = format!(
            "payout mass at the window edges is {:.3e} of the price",
            fine.edge_share
        );
        log::warn!("{msg}");
        diagnostics.push(msg);
    }
    Ok(OptionPrice {
        value: fine.value,
        err_estimate: err,
        diagnostics,
    })
}

fn vasicek_params(model: &ShortRateModel) -> Result<(f64, f64, f64)> {
    match *model {
        ShortRateModel::Vasicek { a, b, sigma } => Ok((a, b, sigma)),
        _ => Err(Error::InvalidParameter(format!(
            "the exact density is only available for the Vasicek model, not '{}'",
            model.name()
        ))),
    }
}

/// Closed-form generalized Arrow-Debreu density of the Vasicek model.
pub fn vasicek_exact_density(
    model: &ShortRateModel,
    lambda: f64,
    x0: f64,
    xt: f64,
    horizon: f64,
) -> Result<f64> {
    let (a, b, sigma) = vasicek_params(model)?;
    check_horizon(horizon)?;
    let s2 = sigma * sigma;
    let var = s2 * (-(-2.0 * a * horizon).exp_m1()) / (2.0 * a);
    let shift = lambda * s2 / (a * a);
    let d = (xt - b + shift) - (x0 - b + shift) * (-a * horizon).exp();
    Ok((2.0 * PI * var).powf(-0.5)
        * (lambda * (xt - x0) / a).exp()
        * (-horizon * (lambda * b - lambda * lambda * s2 / (2.0 * a * a))).exp()
        * (-d * d / (2.0 * var)).exp())
}

/// Closed-form `Z_lambda` of the Vasicek model (integral of the density above).
pub fn vasicek_exact_bond(model: &ShortRateModel, lambda: f64, x0: f64, horizon: f64) -> Result<f64> {
    let (a, b, sigma) = vasicek_params(model)?;
    check_horizon(horizon)?;
    let s2 = sigma * sigma;
    let var = s2 * (-(-2.0 * a * horizon).exp_m1()) / (2.0 * a);
    let shift = lambda * s2 / (a * a);
    let mean = b - shift + (x0 - b + shift) * (-a * horizon).exp();
    Ok((lambda * (mean - x0) / a + lambda * lambda * var / (2.0 * a * a)
        - horizon * (lambda * b - lambda * lambda * s2 / (2.0 * a * a)))
        .exp())
}
