//! Self-consistent harmonic (effective-potential) approximation around the
//! average point of a path.
//!
//! For every average point `xbar` the true drift potential is replaced by a
//! trial harmonic potential `w + omega^2 (x - xbar)^2 / 2 sigma^2` whose
//! parameters satisfy
//!
//! ```text
//! omega^2 = sigma^2 <<V''>>_alpha
//! w       = <<V>>_alpha - omega^2 alpha / 2 sigma^2
//! alpha   = (sigma^2 / 2 omega) (coth f - 1/f),   f = omega T / 2
//! ```
//!
//! where `<<.>>_alpha` is a Gaussian average of variance `alpha` around
//! `xbar`. When `omega^2 < 0` the half-angle is imaginary, `f = i phi`, and
//! everything is continued analytically; the approximation breaks down at
//! `phi = pi` where `alpha` diverges.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::NumericsConfig;
use crate::error::{Error, Result};
use crate::models::TransformedModel;
use crate::quadrature::hermite;

/// Gaussian averages of the drift potential and of its curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmearedPotential {
    pub value: f64,
    pub second: f64,
}

/// Which branch the trial frequency lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `omega^2 >= 0`, half-angle `f = omega T / 2`.
    Real,
    /// `omega^2 < 0`, half-angle `phi = |omega| T / 2`.
    Imaginary,
}

/// Converged self-consistent parameters at one average point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtfkPoint {
    pub xbar: f64,
    pub omega2: f64,
    pub alpha: f64,
    pub w: f64,
    /// `f` on the real branch, `phi` on the imaginary one.
    pub half_angle: f64,
    pub branch: Branch,
    pub horizon: f64,
    pub sigma: f64,
    pub iterations: usize,
    /// Relative self-consistency residual on `alpha`.
    pub residual: f64,
}

// Below this |f^2| the closed forms lose digits to cancellation and the
// power series below are used instead.
const SERIES_RADIUS: f64 = 0.1;

// c_n = 2 zeta(2n) / pi^(2n), so that (f coth f - 1) / f^2 = sum c_n (-s)^(n-1).
const ZETA_COEFFS: [f64; 8] = [
    1.0 / 3.0,
    1.0 / 45.0,
    2.0 / 945.0,
    1.0 / 4725.0,
    2.0 / 93555.0,
    1382.0 / 638512875.0,
    4.0 / 18243225.0,
    3617.0 / 162820783125.0,
];

/// `f coth f` as a function of `s = f^2`, continued to `phi cot phi` for `s < 0`.
pub(crate) fn f_coth_f(s: f64) -> f64 {
    if s.abs() < SERIES_RADIUS {
        1.0 + s * alpha_series(s)
    } else if s > 0.0 {
        let f = s.sqrt();
        f / f.tanh()
    } else {
        let phi = (-s).sqrt();
        phi / phi.tan()
    }
}

/// `ln(f / sinh f)` as a function of `s = f^2`, continued to `ln(phi / sin phi)`.
pub(crate) fn ln_f_over_sinh_f(s: f64) -> f64 {
    if s.abs() < SERIES_RADIUS {
        let mut power = 1.0;
        let mut sum = 0.0;
        for (k, c) in ZETA_COEFFS.iter().enumerate() {
            power *= -s;
            sum += c * power / (2.0 * (k + 1) as f64);
        }
        sum
    } else if s > 0.0 {
        let f = s.sqrt();
        let ln_sinh = f + (-(-2.0 * f).exp()).ln_1p() - std::f64::consts::LN_2;
        f.ln() - ln_sinh
    } else {
        let phi = (-s).sqrt();
        (phi / phi.sin()).ln()
    }
}

/// `(f coth f - 1) / f^2` by its Taylor series in `s = f^2`.
pub(crate) fn alpha_series(s: f64) -> f64 {
    ZETA_COEFFS.iter().rev().fold(0.0, |acc, c| acc * -s + c)
}

/// `(f coth f - 1) / f^2` by the closed form.
pub(crate) fn alpha_direct(s: f64) -> f64 {
    if s > 0.0 {
        let f = s.sqrt();
        (f / f.tanh() - 1.0) / s
    } else {
        let phi = (-s).sqrt();
        (1.0 - phi / phi.tan()) / (phi * phi)
    }
}

fn check_branch(omega2: f64, horizon: f64, branch_eps: f64) -> Result<f64> {
    let s = omega2 * horizon * horizon / 4.0;
    if s < 0.0 {
        let phi = (-s).sqrt();
        if phi >= PI - branch_eps || !phi.is_finite() {
            return Err(Error::BranchBreakdown { xbar: None, phi });
        }
    }
    Ok(s)
}

/// Fluctuation variance `alpha` for squared trial frequency `omega2`.
///
/// Continuous and decreasing in `omega2`, equal to `sigma^2 T / 12` at
/// `omega2 = 0`; diverges as the imaginary half-angle approaches `pi`.
pub fn alpha_of_omega(omega2: f64, horizon: f64, sigma: f64, branch_eps: f64) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    if !omega2.is_finite() {
        return Err(Error::NonFinite(format!("squared trial frequency {omega2}")));
    }
    let s = check_branch(omega2, horizon, branch_eps)?;
    let reduced = if s.abs() < SERIES_RADIUS {
        alpha_series(s)
    } else {
        alpha_direct(s)
    };
    Ok(sigma * sigma * horizon / 4.0 * reduced)
}

/// Gaussian average `(2 pi alpha)^{-1/2} int exp(-xi^2 / 2 alpha) f(xbar + xi) dxi`
/// by Gauss-Hermite quadrature, doubling the order until it settles.
pub fn gaussian_smear<F: Fn(f64) -> f64>(
    f: F,
    xbar: f64,
    alpha: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("smearing variance must be >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(f(xbar));
    }
    let scale = (2.0 * alpha).sqrt();
    let eval = |n: usize| -> f64 {
        let rule = hermite(n);
        let sum: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| w * f(xbar + scale * t))
            .sum();
        sum / PI.sqrt()
    };
    let mut order = cfg.gh_order;
    let mut current = eval(order);
    while order * 2 <= cfg.gh_max_order {
        let next = eval(order * 2);
        let settled = (next - current).abs() <= cfg.smear_tol * next.abs().max(1.0);
        current = next;
        order *= 2;
        if settled {
            break;
        }
    }
    if current.is_finite() {
        Ok(current)
    } else {
        Err(Error::NonFinite(format!(
            "Gaussian smear at xbar = {xbar}, alpha = {alpha} diverged"
        )))
    }
}

/// `<<V>>` and `<<V''>>`, closed form when the model provides it.
pub fn smear_potential<M: TransformedModel + ?Sized>(
    model: &M,
    xbar: f64,
    alpha: f64,
    lambda: f64,
    cfg: &NumericsConfig,
) -> Result<SmearedPotential> {
    let smeared = match model.closed_form_smears(xbar, alpha, lambda) {
        Some(s) => s,
        None => SmearedPotential {
            value: gaussian_smear(|x| model.potential(x, lambda), xbar, alpha, cfg)?,
            second: gaussian_smear(|x| model.potential_second(x, lambda), xbar, alpha, cfg)?,
        },
    };
    if smeared.value.is_finite() && smeared.second.is_finite() {
        Ok(smeared)
    } else {
        Err(Error::NonFinite(format!(
            "smeared potential at xbar = {xbar}, alpha = {alpha}"
        )))
    }
}

struct Iterate {
    omega2: f64,
}

/// Solve the self-consistency conditions at the average point `xbar`.
///
/// Relaxed fixed-point iteration on `alpha` starting from the
/// small-fluctuation value `sigma^2 T / 12`; the relaxation weight is halved
/// whenever the residual stops shrinking. If that fails, the scalar equation
/// `sigma^2 <<V''>>_{alpha(s)} = s` is bracketed and bisected on the valid
/// part of the `omega^2` axis.
pub fn solve_self_consistent<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    horizon: f64,
    xbar: f64,
    cfg: &NumericsConfig,
) -> Result<GtfkPoint> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    if !xbar.is_finite() {
        return Err(Error::InvalidParameter(format!("average point must be finite, got {xbar}")));
    }
    let sigma = model.sigma();
    let s2 = sigma * sigma;
    let step = |alpha: f64| -> Result<Iterate> {
        let smeared = smear_potential(model, xbar, alpha, lambda, cfg)?;
        Ok(Iterate {
            omega2: s2 * smeared.second,
        })
    };

    let mut alpha = s2 * horizon / 12.0;
    let mut eta = cfg.sc_damping;
    let mut previous = f64::INFINITY;
    let mut breakdown = None;
    let mut last_residual = f64::NAN;
    for iteration in 1..=cfg.sc_max_iters {
        let it = step(alpha).map_err(|e| e.at_xbar(xbar))?;
        let target = match alpha_of_omega(it.omega2, horizon, sigma, cfg.branch_eps) {
            Ok(a) => a,
            Err(e @ Error::BranchBreakdown { .. }) => {
                breakdown = Some(e);
                break;
            }
            Err(e) => return Err(e.at_xbar(xbar)),
        };
        let residual = (target - alpha).abs() / alpha;
        last_residual = residual;
        if residual <= cfg.sc_tol {
            return finish(model, lambda, horizon, xbar, target, iteration, cfg);
        }
        if residual >= previous {
            eta *= 0.5;
        }
        previous = residual;
        alpha += eta * (target - alpha);
    }

    match bisect_frequency(model, lambda, horizon, xbar, cfg) {
        Ok(Some(alpha)) => finish(model, lambda, horizon, xbar, alpha, cfg.sc_max_iters, cfg),
        Err(Error::BranchBreakdown { .. }) if breakdown.is_some() => {
            Err(breakdown.unwrap().at_xbar(xbar))
        }
        Ok(None) => Err(breakdown
            .unwrap_or(Error::NonConvergence {
                xbar,
                iterations: cfg.sc_max_iters,
                residual: last_residual,
            })
            .at_xbar(xbar)),
        Err(e) => Err(e.at_xbar(xbar)),
    }
}

fn finish<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    horizon: f64,
    xbar: f64,
    alpha: f64,
    iterations: usize,
    cfg: &NumericsConfig,
) -> Result<GtfkPoint> {
    let sigma = model.sigma();
    let s2 = sigma * sigma;
    let smeared = smear_potential(model, xbar, alpha, lambda, cfg).map_err(|e| e.at_xbar(xbar))?;
    let omega2 = s2 * smeared.second;
    let alpha_final =
        alpha_of_omega(omega2, horizon, sigma, cfg.branch_eps).map_err(|e| e.at_xbar(xbar))?;
    let residual = (alpha_final - alpha).abs() / alpha;
    if residual > cfg.sc_tol.max(1e-10) {
        return Err(Error::NonConvergence {
            xbar,
            iterations,
            residual,
        });
    }
    let w = smeared.value - omega2 * alpha_final / (2.0 * s2);
    let s = omega2 * horizon * horizon / 4.0;
    let (half_angle, branch) = if omega2 >= 0.0 {
        (s.sqrt(), Branch::Real)
    } else {
        ((-s).sqrt(), Branch::Imaginary)
    };
    Ok(GtfkPoint {
        xbar,
        omega2,
        alpha: alpha_final,
        w,
        half_angle,
        branch,
        horizon,
        sigma,
        iterations,
        residual,
    })
}

/// Bracket and bisect `g(s) = sigma^2 <<V''>>_{alpha(s)} - s`. Returns the
/// converged `alpha`; a branch breakdown when `g` stays negative down to the
/// breakdown point (the root would need `phi >= pi`); `None` when no bracket
/// could be formed at all.
fn bisect_frequency<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    horizon: f64,
    xbar: f64,
    cfg: &NumericsConfig,
) -> Result<Option<f64>> {
    let sigma = model.sigma();
    let s2 = sigma * sigma;
    let g = |s: f64| -> Option<f64> {
        let alpha = alpha_of_omega(s, horizon, sigma, cfg.branch_eps).ok()?;
        let sm = smear_potential(model, xbar, alpha, lambda, cfg).ok()?;
        let v = s2 * sm.second - s;
        v.is_finite().then_some(v)
    };
    let s_min = -(2.0 * (PI - cfg.branch_eps) / horizon).powi(2);

    let mut hi = 1.0 + s_min.abs();
    let mut g_hi = None;
    for _ in 0..200 {
        match g(hi) {
            Some(v) if v < 0.0 => {
                g_hi = Some(v);
                break;
            }
            _ => hi *= 2.0,
        }
    }
    if g_hi.is_none() {
        return Ok(None);
    }
    let mut lo = None;
    for k in 1..=80 {
        let s = s_min + (hi - s_min) * 0.5f64.powi(k);
        if let Some(v) = g(s) {
            if v > 0.0 {
                lo = Some(s);
                break;
            }
        }
    }
    // g < 0 all the way down to the breakdown point: the root lies beyond phi = pi
    let Some(mut lo) = lo else {
        return Err(Error::BranchBreakdown {
            xbar: Some(xbar),
            phi: PI,
        });
    };
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        match g(mid) {
            Some(v) if v > 0.0 => lo = mid,
            Some(_) => hi = mid,
            None => return Ok(None),
        }
        if (hi - lo) <= 1e-15 * hi.abs().max(lo.abs()).max(1e-300) {
            break;
        }
    }
    Ok(Some(alpha_of_omega(0.5 * (lo + hi), horizon, sigma, cfg.branch_eps)?))
}

impl GtfkPoint {
    /// `ln(f / sinh f)` and `f coth f` on the point's branch.
    fn half_angle_factors(&self) -> Result<(f64, f64)> {
        let s = match self.branch {
            Branch::Real => self.half_angle * self.half_angle,
            Branch::Imaginary => {
                if self.half_angle >= PI {
                    return Err(Error::BranchBreakdown {
                        xbar: Some(self.xbar),
                        phi: self.half_angle,
                    });
                }
                -self.half_angle * self.half_angle
            }
        };
        Ok((ln_f_over_sinh_f(s), f_coth_f(s)))
    }

    /// Logarithm of the trial reduced density matrix `rho_xbar(x_t, x_0, T)`.
    pub fn ln_reduced_density(&self, x0: f64, xt: f64) -> Result<f64> {
        let (ln_ratio, fcoth) = self.half_angle_factors()?;
        let s2t = self.sigma * self.sigma * self.horizon;
        let xi = 0.5 * (xt + x0) - self.xbar;
        let dx = xt - x0;
        Ok(-0.5 * (2.0 * PI * s2t).ln() - self.horizon * self.w + ln_ratio
            - 0.5 * (2.0 * PI * self.alpha).ln()
            - xi * xi / (2.0 * self.alpha)
            - fcoth * dx * dx / (2.0 * s2t))
    }

    /// Gaussian width of the end-to-end factor: the coefficient `c` in
    /// `exp(-c (x_t - x_0)^2)`.
    pub fn end_to_end_coefficient(&self) -> Result<f64> {
        let (_, fcoth) = self.half_angle_factors()?;
        Ok(fcoth / (2.0 * self.sigma * self.sigma * self.horizon))
    }
}

/// Trial reduced density matrix of the average-point class `point.xbar`.
pub fn reduced_density(point: &GtfkPoint, x0: f64, xt: f64) -> Result<f64> {
    Ok(point.ln_reduced_density(x0, xt)?.exp())
}
