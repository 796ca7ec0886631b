//! Crank-Nicolson solver of the forward (Fokker-Planck) equation
//!
//! ```text
//! d_t psi = -lambda r psi - d_x (mu psi) + (sigma^2 / 2) d_xx psi,   psi(x, 0) = delta(x - x0)
//! ```
//!
//! in the x-coordinate, with the advective flux written in conservative
//! form and central differences, so that with zero-flux boundaries and
//! `lambda = 0` the discrete mass `h sum psi` is conserved to round-off.

use serde::{Deserialize, Serialize};

use super::tridiag::Tridiagonal;
use crate::config::NumericsConfig;
use crate::error::{Error, Result};
use crate::models::TransformedModel;
use crate::pricing::{BondQuote, DensityCurve, Method};
use crate::support::support_window;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `psi = 0` on the two end nodes.
    Absorbing,
    /// No probability flux through the window edges.
    ZeroFlux,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_space: usize,
    pub n_time: usize,
    pub bc: Boundary,
}

impl PdeGrid {
    pub fn new(x_min: f64, x_max: f64, n_space: usize, n_time: usize, bc: Boundary) -> Result<Self> {
        let grid = Self {
            x_min,
            x_max,
            n_space,
            n_time,
            bc,
        };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::InvalidParameter(format!(
                "PDE window [{}, {}] is empty or unbounded",
                self.x_min, self.x_max
            )));
        }
        if self.n_space < 3 || self.n_space % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "n_space must be odd and at least 3, got {}",
                self.n_space
            )));
        }
        if self.n_time == 0 {
            return Err(Error::InvalidParameter("n_time must be positive".into()));
        }
        Ok(())
    }

    /// Default grid: the model's support window, configured node and step
    /// counts, zero-flux boundaries for `lambda = 0` and absorbing ones
    /// otherwise.
    pub fn for_model<M: TransformedModel + ?Sized>(
        model: &M,
        lambda: f64,
        x0: f64,
        horizon: f64,
        cfg: &NumericsConfig,
    ) -> Self {
        let (x_min, x_max) = support_window(model, x0, horizon, cfg.tail_factor);
        Self {
            x_min,
            x_max,
            n_space: cfg.pde_n_space,
            n_time: cfg.pde_n_time,
            bc: if lambda == 0.0 {
                Boundary::ZeroFlux
            } else {
                Boundary::Absorbing
            },
        }
    }

    /// Half the spacing and half the step; coarse nodes stay nodes.
    pub fn refined(&self) -> Self {
        Self {
            n_space: 2 * self.n_space - 1,
            n_time: 2 * self.n_time,
            ..*self
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_space - 1) as f64
    }

    /// Node positions, shifted by at most half a spacing so that `x0` is a node.
    pub fn nodes(&self, x0: f64) -> Result<(Vec<f64>, usize)> {
        self.validate()?;
        if !(x0 > self.x_min && x0 < self.x_max) {
            return Err(Error::InvalidParameter(format!(
                "initial state {x0} outside the PDE window [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        let h = self.spacing();
        let k = ((x0 - self.x_min) / h).round();
        let k = (k as usize).clamp(1, self.n_space - 2);
        let mut x: Vec<f64> = (0..self.n_space)
            .map(|i| x0 + (i as f64 - k as f64) * h)
            .collect();
        x[k] = x0;
        Ok((x, k))
    }
}

/// Result of a PDE solve in the x-coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct FokkerPlanckSolution {
    pub x: Vec<f64>,
    pub psi: Vec<f64>,
    pub spacing: f64,
    /// Largest `|h sum psi - 1|` seen over the time steps.
    pub max_mass_drift: f64,
    pub diagnostics: Vec<String>,
}

impl FokkerPlanckSolution {
    /// Trapezoid integral of the density.
    pub fn mass(&self) -> f64 {
        let n = self.psi.len();
        self.spacing * (self.psi.iter().sum::<f64>() - 0.5 * (self.psi[0] + self.psi[n - 1]))
    }
}

/// Semi-discrete generator `d psi / dt = L psi` on all nodes.
fn generator<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    x: &[f64],
    h: f64,
    bc: Boundary,
) -> Result<(Tridiagonal, f64)> {
    let n = x.len();
    let d = 0.5 * model.sigma().powi(2);
    let face: Vec<f64> = (0..n - 1).map(|i| model.drift(0.5 * (x[i] + x[i + 1]))).collect();
    if let Some(bad) = face.iter().find(|m| !m.is_finite()) {
        return Err(Error::NonFinite(format!("drift {bad} on the PDE window")));
    }
    let peclet = face.iter().map(|m| m.abs() * h / d).fold(0.0, f64::max);
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for i in 0..n {
        let r = lambda * model.rate(x[i]);
        if !r.is_finite() {
            return Err(Error::NonFinite(format!("rate at x = {}", x[i])));
        }
        // flux F_{i+1/2} = (mu/2 + d/h) psi_i + (mu/2 - d/h) psi_{i+1}
        let mut v = -r;
        if i + 1 < n {
            v -= (0.5 * face[i] + d / h) / h;
            sup[i] = (d / h - 0.5 * face[i]) / h;
        }
        if i > 0 {
            v += (0.5 * face[i - 1] - d / h) / h;
            sub[i] = (0.5 * face[i - 1] + d / h) / h;
        }
        diag[i] = v;
    }
    if bc == Boundary::Absorbing {
        // the end nodes are pinned to zero: drop them from the system
        sub.remove(0);
        sub.pop();
        sup.remove(0);
        sup.pop();
        diag.remove(0);
        diag.pop();
        sub[0] = 0.0;
        let last = sup.len() - 1;
        sup[last] = 0.0;
    }
    Ok((Tridiagonal { sub, diag, sup }, peclet))
}

fn shifted(l: &Tridiagonal, scale: f64) -> Tridiagonal {
    Tridiagonal {
        sub: l.sub.iter().map(|v| scale * v).collect(),
        diag: l.diag.iter().map(|v| 1.0 + scale * v).collect(),
        sup: l.sup.iter().map(|v| scale * v).collect(),
    }
}

/// Density of `X_T` (weighted by the discount when `lambda > 0`) on the grid nodes.
///
/// Time stepping is Crank-Nicolson, except that the first two steps are
/// replaced by four backward-Euler half steps to damp the ringing of the
/// initial spike.
pub fn solve_fokker_planck_x<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    x0: f64,
    horizon: f64,
    grid: &PdeGrid,
) -> Result<FokkerPlanckSolution> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let (x, k) = grid.nodes(x0)?;
    let dom = model.x_domain();
    if !(dom.contains(x[0]) && dom.contains(x[x.len() - 1])) {
        return Err(Error::Domain {
            what: "PDE window",
            value: if dom.contains(x[0]) { x[x.len() - 1] } else { x[0] },
            domain: dom.to_string(),
        });
    }
    let h = grid.spacing();
    let dt = horizon / grid.n_time as f64;
    let mut diagnostics = Vec::new();
    let (l, peclet) = generator(model, lambda, &x, h, grid.bc)?;
    if peclet > 2.0 {
        diagnostics.push(format!(
            "cell Peclet number {peclet:.2} exceeds 2; central differencing may oscillate"
        ));
    }
    let implicit = shifted(&l, -0.5 * dt).factor();
    let explicit = shifted(&l, 0.5 * dt);

    let n = x.len();
    let offset = usize::from(grid.bc == Boundary::Absorbing);
    let mut psi = vec![0.0; l.len()];
    psi[k - offset] = 1.0 / h;
    let mut scratch = vec![0.0; psi.len()];
    let mut max_mass_drift: f64 = 0.0;
    let mut max_edge_share: f64 = 0.0;
    let edge_cells = 2.min(psi.len() / 2);
    let mut track = |psi: &[f64]| {
        let mass: f64 = h * psi.iter().sum::<f64>();
        max_mass_drift = max_mass_drift.max((mass - 1.0).abs());
        let edge: f64 = psi[..edge_cells].iter().chain(&psi[psi.len() - edge_cells..]).map(|v| v.abs()).sum();
        if mass > 0.0 {
            max_edge_share = max_edge_share.max(h * edge / mass);
        }
    };

    let startup = grid.n_time.min(2);
    for _ in 0..2 * startup {
        implicit.solve(&mut psi);
        track(&psi);
    }
    for _ in startup..grid.n_time {
        explicit.apply(&psi, &mut scratch);
        implicit.solve(&mut scratch);
        std::mem::swap(&mut psi, &mut scratch);
        track(&psi);
    }
    if psi.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("PDE solution".into()));
    }
    if max_edge_share > 1e-8 {
        diagnostics.push(format!(
            "{max_edge_share:.2e} of the mass reached the window edges; widen the grid"
        ));
    }
    let mut full = vec![0.0; n];
    full[offset..offset + psi.len()].copy_from_slice(&psi);
    let peak = full.iter().copied().fold(0.0, f64::max);
    let most_negative = full.iter().copied().fold(0.0, f64::min);
    if most_negative < -1e-12 * peak {
        diagnostics.push(format!(
            "negative density values down to {most_negative:.3e} clamped to zero"
        ));
    }
    for d in &diagnostics {
        log::warn!("{d}");
    }
    Ok(FokkerPlanckSolution {
        x,
        psi: full,
        spacing: h,
        max_mass_drift: if lambda == 0.0 { max_mass_drift } else { f64::NAN },
        diagnostics,
    })
}

/// PDE density mapped to the original coordinate, negative round-off
/// clamped to zero.
pub fn solve_fokker_planck<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    x0: f64,
    horizon: f64,
    grid: &PdeGrid,
) -> Result<DensityCurve> {
    let sol = solve_fokker_planck_x(model, lambda, x0, horizon, grid)?;
    let sigma = model.sigma();
    let samples = sol
        .x
        .iter()
        .zip(&sol.psi)
        .map(|(&x, &p)| {
            let y = model.lamperti_inverse(x)?;
            Ok((y, p.max(0.0) * sigma / model.sigma_y(y)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityCurve {
        lambda,
        horizon,
        y0: model.lamperti_inverse(x0)?,
        samples,
        method: Method::Pde,
        diagnostics: sol.diagnostics,
    })
}

/// `Z_lambda(y0, T)` from the PDE, Richardson-extrapolated over one
/// simultaneous halving of spacing and step.
pub fn bond_from_pde<M: TransformedModel + ?Sized>(
    model: &M,
    lambda: f64,
    y0: f64,
    horizon: f64,
    grid: &PdeGrid,
) -> Result<BondQuote> {
    let x0 = model.lamperti(y0)?;
    let coarse = solve_fokker_planck_x(model, lambda, x0, horizon, grid)?;
    let fine = solve_fokker_planck_x(model, lambda, x0, horizon, &grid.refined())?;
    let (zc, zf) = (coarse.mass(), fine.mass());
    let mut diagnostics = fine.diagnostics;
    diagnostics.dedup();
    Ok(BondQuote {
        horizon,
        value: (4.0 * zf - zc) / 3.0,
        method: Method::Pde,
        err_estimate: (zf - zc).abs() / 3.0,
        diagnostics,
    })
}
