//! Repeated short-time kernels: the discretized path integral evaluated
//! as grid-to-grid convolutions.

use serde::{Deserialize, Serialize};

use super::pde::PdeGrid;
use crate::error::{Error, Result};
use crate::models::TransformedModel;
use crate::pricing::{BondQuote, DensityCurve, Method};

/// Where the drift, its derivative and the rate are evaluated in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// At the midpoint of the step, with the `-dt mu'/2` Jacobian term.
    #[default]
    Midpoint,
    /// At the start of the step (the plain Euler kernel).
    Euler,
}

/// Short-time generalized density `psi_lambda(x1, x0, dt)`.
pub fn short_time_kernel<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    x0: f64,
    x1: f64,
    dt: f64,
    convention: Convention,
) -> f64 {
    let s2 = model.sigma().powi(2);
    let (mu, weight) = match convention {
        Convention::Midpoint => {
            let m = 0.5 * (x0 + x1);
            let jet = model.drift_jet(m);
            (jet.value, -dt * (0.5 * jet.d1 + lambda * model.rate(m)))
        }
        Convention::Euler => (model.drift(x0), -dt * lambda * model.rate(x0)),
    };
    let d = x1 - x0 - mu * dt;
    (weight - d * d / (2.0 * s2 * dt)).exp() / (2.0 * std::f64::consts::PI * s2 * dt).sqrt()
}

/// Result of a convolution run in the x-coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionSolution {
    pub x: Vec<f64>,
    pub psi: Vec<f64>,
    pub spacing: f64,
    pub diagnostics: Vec<String>,
}

impl ConvolutionSolution {
    pub fn mass(&self) -> f64 {
        let n = self.psi.len();
        self.spacing * (self.psi.iter().sum::<f64>() - 0.5 * (self.psi[0] + self.psi[n - 1]))
    }
}

/// `n_steps` kernel applications on the nodes of `grid` (its `n_time` and
/// boundary tag are ignored). The first step is evaluated from `x0` exactly;
/// later steps use the trapezoid rule over the grid, restricted to the band
/// where the kernel exceeds `exp(-50)` of its peak.
pub fn short_time_convolution_x<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    x0: f64,
    horizon: f64,
    n_steps: usize,
    grid: &PdeGrid,
    convention: Convention,
) -> Result<ConvolutionSolution> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let (x, _) = grid.nodes(x0)?;
    let h = grid.spacing();
    let dt = horizon / n_steps as f64;
    let sd = model.sigma() * dt.sqrt();
    let mut diagnostics = Vec::new();
    if sd < 2.0 * h {
        diagnostics.push(format!(
            "kernel width {sd:.3e} is under two grid spacings ({h:.3e}); expect aliasing"
        ));
    }
    let kernel = |from: f64, to: f64| short_time_kernel(model, lambda, from, to, dt, convention);
    let mut psi: Vec<f64> = x.iter().map(|&xi| kernel(x0, xi)).collect();

    if n_steps > 1 {
        // banded transfer matrix, rows = destination node
        let n = x.len();
        let drift_span = x
            .iter()
            .map(|&xi| model.drift(xi).abs())
            .filter(|m| m.is_finite())
            .fold(0.0, f64::max)
            * dt;
        let half_band = (((10.0 * sd) + drift_span) / h).ceil() as usize + 1;
        let rows: Vec<(usize, Vec<f64>)> = (0..n)
            .map(|j| {
                let lo = j.saturating_sub(half_band);
                let hi = (j + half_band).min(n - 1);
                let weights = (lo..=hi)
                    .map(|i| {
                        let edge = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                        edge * h * kernel(x[i], x[j])
                    })
                    .collect();
                (lo, weights)
            })
            .collect();
        let mut next = vec![0.0; n];
        for _ in 1..n_steps {
            for (j, (lo, weights)) in rows.iter().enumerate() {
                next[j] = weights.iter().zip(&psi[*lo..]).map(|(w, p)| w * p).sum();
            }
            std::mem::swap(&mut psi, &mut next);
        }
    }
    if psi.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("convolution density".into()));
    }
    for d in &diagnostics {
        log::warn!("{d}");
    }
    Ok(ConvolutionSolution {
        x,
        psi,
        spacing: h,
        diagnostics,
    })
}

/// Convolution density mapped to the original coordinate (midpoint convention).
pub fn short_time_convolution<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    x0: f64,
    horizon: f64,
    n_steps: usize,
    grid: &PdeGrid,
) -> Result<DensityCurve> {
    let sol = short_time_convolution_x(model, lambda, x0, horizon, n_steps, grid, Convention::Midpoint)?;
    let sigma = model.sigma();
    let samples = sol
        .x
        .iter()
        .zip(&sol.psi)
        .map(|(&x, &p)| {
            let y = model.lamperti_inverse(x)?;
            Ok((y, p * sigma / model.sigma_y(y)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityCurve {
        lambda,
        horizon,
        y0: model.lamperti_inverse(x0)?,
        samples,
        method: Method::Convolution,
        diagnostics: sol.diagnostics,
    })
}

/// Grid for the convolution oracle: the PDE window with spacing
/// `sigma sqrt(dt) / nodes_per_sd`.
pub fn convolution_grid<M: TransformedModel + ?Sized>(
    model: &M,
    window: &PdeGrid,
    horizon: f64,
    n_steps: usize,
    nodes_per_sd: f64,
) -> PdeGrid {
    let sd = model.sigma() * (horizon / n_steps.max(1) as f64).sqrt();
    let cells = ((window.x_max - window.x_min) * nodes_per_sd / sd).ceil() as usize;
    PdeGrid {
        n_space: (cells.max(2) / 2) * 2 + 1,
        ..*window
    }
}

/// `Z_lambda` from the convolution oracle. The error estimate is the change
/// from half as many steps, which for a first-order scheme is about the
/// remaining time-discretization error.
pub fn bond_from_convolution<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    y0: f64,
    horizon: f64,
    n_steps: usize,
    grid: &PdeGrid,
) -> Result<BondQuote> {
    let x0 = model.lamperti(y0)?;
    let run = |steps: usize| {
        short_time_convolution_x(model, lambda, x0, horizon, steps, grid, Convention::Midpoint)
    };
    let full = run(n_steps)?;
    let value = full.mass();
    let err_estimate = if n_steps >= 2 {
        (value - run(n_steps / 2)?.mass()).abs()
    } else {
        f64::NAN
    };
    Ok(BondQuote {
        horizon,
        value,
        method: Method::Convolution,
        err_estimate,
        diagnostics: full.diagnostics,
    })
}
