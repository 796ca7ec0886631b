//! Numerical controls and the plain-text model configuration format.
//!
//! The configuration format is line oriented:
//!
//! ```text
//! # Black-Karasinski, Table-I style parameters
//! model  = bk
//! a      = 0.1
//! b      = ln(0.04)
//! sigma  = 0.85
//! lambda = 1
//! r0     = 0.06
//! ```
//!
//! Values are decimal numbers or `ln(<number>)` / `exp(<number>)`. Blank
//! lines and `#` comments are ignored. Unknown keys and duplicates are errors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ShortRateModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericsConfig {
    /// Initial Gauss-Hermite order for generic smearing.
    pub gh_order: usize,
    pub gh_max_order: usize,
    /// Doubling stops once the smear changes by less than this.
    pub smear_tol: f64,

    /// Relative tolerance of the self-consistent fixed point.
    pub sc_tol: f64,
    pub sc_max_iters: usize,
    /// Initial relaxation weight of the fixed-point update; halved on
    /// oscillation.
    pub sc_damping: f64,
    /// The imaginary branch is rejected once `phi >= pi - branch_eps`.
    pub branch_eps: f64,

    /// Gauss-Legendre nodes over the average point.
    pub xbar_order: usize,
    /// Gauss-Legendre nodes over the terminal state.
    pub xt_order: usize,
    /// Half-width of the average-point window in units of `sqrt(alpha_max)`.
    pub xbar_span: f64,
    /// Windows are widened until the integrand at their edge is below this
    /// fraction of the peak.
    pub edge_tol: f64,
    /// Both quadrature orders are doubled for horizons longer than this.
    pub long_horizon: f64,
    /// Support windows extend this many standard deviations.
    pub tail_factor: f64,

    pub pde_n_space: usize,
    pub pde_n_time: usize,

    pub conv_steps: usize,
    /// Grid nodes per kernel standard deviation in the convolution oracle.
    pub conv_nodes_per_sd: f64,

    pub mc_paths: usize,
    pub mc_dt: f64,
    pub seed: u64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            gh_order: 40,
            gh_max_order: 320,
            smear_tol: 1e-10,
            sc_tol: 1e-12,
            sc_max_iters: 200,
            sc_damping: 1.0,
            branch_eps: 1e-6 * PI,
            xbar_order: 64,
            xt_order: 96,
            xbar_span: 8.0,
            edge_tol: 1e-12,
            long_horizon: 10.0,
            tail_factor: 10.0,
            pde_n_space: 2001,
            pde_n_time: 2000,
            conv_steps: 512,
            conv_nodes_per_sd: 2.5,
            mc_paths: 200_000,
            mc_dt: 1.0 / 250.0,
            seed: 20_190_521,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.gh_order == 0 || self.gh_max_order < self.gh_order {
            return bad("Gauss-Hermite orders must satisfy 0 < gh_order <= gh_max_order");
        }
        if self.xbar_order < 2 || self.xt_order < 2 {
            return bad("quadrature orders must be at least 2");
        }
        if !(self.sc_tol > 0.0 && self.sc_damping > 0.0 && self.sc_damping <= 1.0) {
            return bad("sc_tol must be positive and sc_damping in (0, 1]");
        }
        if !(self.branch_eps > 0.0 && self.branch_eps < PI) {
            return bad("branch_eps must lie in (0, pi)");
        }
        if !(self.xbar_span > 0.0 && self.tail_factor > 0.0 && self.edge_tol > 0.0) {
            return bad("window controls must be positive");
        }
        if self.pde_n_space < 3 || self.pde_n_space % 2 == 0 || self.pde_n_time == 0 {
            return bad("pde_n_space must be odd and >= 3, pde_n_time positive");
        }
        if self.conv_steps == 0 || !(self.conv_nodes_per_sd > 0.0) {
            return bad("convolution controls must be positive");
        }
        if self.mc_paths < 100 || !(self.mc_dt > 0.0) {
            return bad("Monte Carlo needs at least 100 paths and a positive step");
        }
        Ok(())
    }

    /// Quadrature orders `(xbar, x_t)` used at horizon `t`.
    pub fn orders(&self, t: f64) -> (usize, usize) {
        if t > self.long_horizon {
            (2 * self.xbar_order, 2 * self.xt_order)
        } else {
            (self.xbar_order, self.xt_order)
        }
    }
}

/// Which built-in model a configuration names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Vasicek,
    Quadratic,
    Bk,
    Garch,
}

impl std::str::FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vasicek" => Ok(Self::Vasicek),
            "quadratic" => Ok(Self::Quadratic),
            "bk" | "black_karasinski" | "black-karasinski" => Ok(Self::Bk),
            "garch" => Ok(Self::Garch),
            other => Err(Error::InvalidParameter(format!("unknown model '{other}'"))),
        }
    }
}

impl ModelName {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Vasicek => "vasicek",
            Self::Quadratic => "quadratic",
            Self::Bk => "bk",
            Self::Garch => "garch",
        }
    }
}

/// Model parameters as read from a configuration file or the command line.
/// Missing entries stay `None` so that command-line flags can fill them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: Option<ModelName>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub sigma: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub y0: Option<f64>,
    pub r0: Option<f64>,
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ModelConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', found '{line}'")))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            if key == "model" {
                if cfg.model.is_some() {
                    return Err(err("duplicate key 'model'".into()));
                }
                cfg.model = Some(value.parse().map_err(|e: Error| err(e.to_string()))?);
                continue;
            }
            let slot = match key.as_str() {
                "a" => &mut cfg.a,
                "b" => &mut cfg.b,
                "sigma" => &mut cfg.sigma,
                "beta" => &mut cfg.beta,
                "gamma" => &mut cfg.gamma,
                "lambda" => &mut cfg.lambda,
                "y0" => &mut cfg.y0,
                "r0" => &mut cfg.r0,
                other => return Err(err(format!("unknown key '{other}'"))),
            };
            if slot.is_some() {
                return Err(err(format!("duplicate key '{key}'")));
            }
            *slot = Some(parse_number(value).map_err(err)?);
        }
        Ok(cfg)
    }

    /// Entries of `other` take precedence.
    pub fn merged(&self, other: &ModelConfig) -> ModelConfig {
        ModelConfig {
            model: other.model.or(self.model),
            a: other.a.or(self.a),
            b: other.b.or(self.b),
            sigma: other.sigma.or(self.sigma),
            beta: other.beta.or(self.beta),
            gamma: other.gamma.or(self.gamma),
            lambda: other.lambda.or(self.lambda),
            y0: other.y0.or(self.y0),
            r0: other.r0.or(self.r0),
        }
    }

    pub fn build_model(&self) -> Result<ShortRateModel> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidParameter(format!("missing parameter '{name}'")))
        };
        let model = self
            .model
            .ok_or_else(|| Error::InvalidParameter("missing parameter 'model'".into()))?;
        let (a, b, sigma) = (need(self.a, "a")?, need(self.b, "b")?, need(self.sigma, "sigma")?);
        match model {
            ModelName::Vasicek => ShortRateModel::vasicek(a, b, sigma),
            ModelName::Quadratic => ShortRateModel::quadratic(
                a,
                b,
                sigma,
                need(self.beta, "beta")?,
                need(self.gamma, "gamma")?,
            ),
            ModelName::Bk => ShortRateModel::black_karasinski(a, b, sigma),
            ModelName::Garch => ShortRateModel::garch(a, b, sigma),
        }
    }

    /// Initial state, from `y0` or (for invertible rate maps) from `r0`.
    pub fn initial_state(&self, model: &ShortRateModel) -> Result<f64> {
        match (self.y0, self.r0) {
            (Some(_), Some(_)) => Err(Error::InvalidParameter(
                "give either y0 or r0, not both".into(),
            )),
            (Some(y0), None) => Ok(y0),
            (None, Some(r0)) => model.state_for_rate(r0),
            (None, None) => Err(Error::InvalidParameter("missing initial state y0 or r0".into())),
        }
    }
}

/// Renders the entries that are set, one `key = value` per line, in a form
/// that [`ModelConfig::parse`] reads back exactly.
impl std::fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(m) = self.model {
            writeln!(f, "model = {}", m.as_str())?;
        }
        let entries = [
            ("a", self.a),
            ("b", self.b),
            ("sigma", self.sigma),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("y0", self.y0),
            ("r0", self.r0),
        ];
        for (key, value) in entries {
            if let Some(v) = value {
                writeln!(f, "{key} = {v:e}")?;
            }
        }
        Ok(())
    }
}

fn parse_number(text: &str) -> std::result::Result<f64, String> {
    let text = text.trim();
    let lower = text.to_ascii_lowercase();
    let (func, inner): (Option<fn(f64) -> f64>, &str) =
        if let Some(rest) = lower.strip_prefix("ln(").and_then(|r| r.strip_suffix(')')) {
            (Some(f64::ln), rest)
        } else if let Some(rest) = lower.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
            (Some(f64::exp), rest)
        } else {
            (None, lower.as_str())
        };
    let v: f64 = inner
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse '{text}' as a number"))?;
    let v = func.map_or(v, |f| f(v));
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{text}' is not a finite number"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ModelConfig::parse(
            "# comment\nmodel = bk\na = 0.1\nb = ln(0.04)   # log level\nsigma=0.85\n\nlambda = 1\nr0 = 0.06\n",
        )
        .unwrap();
        assert_eq!(cfg.model, Some(ModelName::Bk));
        assert_eq!(cfg.b, Some(0.04f64.ln()));
        let model = cfg.build_model().unwrap();
        assert_eq!(model, ShortRateModel::black_karasinski(0.1, 0.04f64.ln(), 0.85).unwrap());
        assert!((cfg.initial_state(&model).unwrap() - 0.06f64.ln()).abs() < 1e-16);
    }

    #[test]
    fn reports_line_numbers() {
        let err = ModelConfig::parse("model = bk\n\nsigma 0.3").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                msg: "expected 'key = value', found 'sigma 0.3'".into()
            }
        );
        assert!(matches!(ModelConfig::parse("a = 1\na = 2"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(ModelConfig::parse("rho = 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ModelConfig::parse("a = ln(-1)"), Err(Error::Parse { .. })));
        assert!(matches!(ModelConfig::parse("model = cir"), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_parameters_are_named() {
        let cfg = ModelConfig::parse("model = quadratic\na=0.1\nb=0\nsigma=0.02\nbeta=1").unwrap();
        let err = cfg.build_model().unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
    }

    #[test]
    fn default_numerics_are_valid() {
        NumericsConfig::default().validate().unwrap();
        let bad = NumericsConfig {
            pde_n_space: 2000,
            ..NumericsConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
