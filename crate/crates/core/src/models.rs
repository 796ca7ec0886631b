//! Short-rate diffusions `dY = mu_y(Y) dt + sigma_y(Y) dW` with `r = r(Y)`,
//! and their constant-volatility (Lamperti) representation
//! `dX = mu(X) dt + sigma dW`.
//!
//! Everything downstream (the self-consistent solver, pricing, the oracles)
//! works on the x-process through the [`TransformedModel`] trait. The four
//! built-in models live in [`ShortRateModel`]; user-defined diffusions can
//! implement the trait directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gtfk::SmearedPotential;
use crate::quadrature::integrate_adaptive;

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    pub fn contains(&self, v: f64) -> bool {
        v > self.lo && v < self.hi
    }

    fn check(&self, what: &'static str, v: f64) -> Result<f64> {
        if self.contains(v) {
            Ok(v)
        } else {
            Err(Error::Domain {
                what,
                value: v,
                domain: self.to_string(),
            })
        }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// A function value together with its first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// The constant-volatility view of a diffusion used by every solver.
///
/// Required methods describe the x-process; the drift potential, its
/// curvature and the drift primitive have generic default implementations
/// that built-in models override with closed forms.
pub trait TransformedModel: Send + Sync {
    fn name(&self) -> &str;

    /// Volatility of the transformed process.
    fn sigma(&self) -> f64;

    fn y_domain(&self) -> Interval;

    fn x_domain(&self) -> Interval;

    /// `gamma(y) = sigma * int^y dz / sigma_y(z)` from the model's base point.
    fn lamperti(&self, y: f64) -> Result<f64>;

    fn lamperti_inverse(&self, x: f64) -> Result<f64>;

    /// Volatility of the original process, used for the density Jacobian.
    fn sigma_y(&self, y: f64) -> f64;

    /// `mu(x)` and its first three derivatives.
    fn drift_jet(&self, x: f64) -> Jet;

    /// `r(gamma^{-1}(x))` and its derivatives with respect to x.
    fn rate_jet(&self, x: f64) -> Jet;

    fn drift(&self, x: f64) -> f64 {
        self.drift_jet(x).value
    }

    fn drift_derivative(&self, x: f64) -> f64 {
        self.drift_jet(x).d1
    }

    fn rate(&self, x: f64) -> f64 {
        self.rate_jet(x).value
    }

    /// Drift potential `mu^2 / 2 sigma^2 + mu' / 2 + lambda r`.
    fn potential(&self, x: f64, lambda: f64) -> f64 {
        let mu = self.drift_jet(x);
        let s2 = self.sigma().powi(2);
        mu.value * mu.value / (2.0 * s2) + 0.5 * mu.d1 + lambda * self.rate(x)
    }

    /// Second derivative of [`potential`](Self::potential) in x.
    fn potential_second(&self, x: f64, lambda: f64) -> f64 {
        let mu = self.drift_jet(x);
        let s2 = self.sigma().powi(2);
        (mu.d1 * mu.d1 + mu.value * mu.d2) / s2 + 0.5 * mu.d3 + lambda * self.rate_jet(x).d2
    }

    /// `W(x_t, x_0) = -(1/sigma^2) int_{x_0}^{x_t} mu(x) dx`.
    fn drift_primitive(&self, x0: f64, xt: f64) -> f64 {
        let integral = integrate_adaptive(x0.min(xt), x0.max(xt), 1e-14, &|x| self.drift(x));
        let signed = if xt >= x0 { integral } else { -integral };
        -signed / self.sigma().powi(2)
    }

    /// Closed-form Gaussian averages of the potential and its curvature, when
    /// the model has them. `None` selects Gauss-Hermite smearing.
    fn closed_form_smears(&self, _xbar: f64, _alpha: f64, _lambda: f64) -> Option<SmearedPotential> {
        None
    }

    /// Root of the drift (the mean-reversion level in x), if known.
    fn equilibrium(&self) -> Option<f64> {
        None
    }
}

/// The built-in short-rate diffusions.
///
/// `a` is the mean-reversion speed, `b` the level (in the units of `y`,
/// except for Black-Karasinski where `b` is the level of the log-rate) and
/// `sigma` the volatility after the Lamperti transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ShortRateModel {
    /// `dY = a(b - Y) dt + sigma dW`, `r = Y`.
    Vasicek { a: f64, b: f64, sigma: f64 },
    /// Ornstein-Uhlenbeck state with `r = 1 + beta Y + gamma Y^2`.
    Quadratic {
        a: f64,
        b: f64,
        sigma: f64,
        beta: f64,
        gamma: f64,
    },
    /// Ornstein-Uhlenbeck log-rate, `r = exp(Y)`.
    BlackKarasinski { a: f64, b: f64, sigma: f64 },
    /// `dY = a(b - Y) dt + sigma Y dW`, `r = Y`, `Y > 0`.
    Garch { a: f64, b: f64, sigma: f64 },
}

fn validate(a: f64, b: f64, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mean-reversion speed a must be positive, got {a}"
        )));
    }
    if !b.is_finite() {
        return Err(Error::InvalidParameter(format!("level b must be finite, got {b}")));
    }
    Ok(())
}

impl ShortRateModel {
    pub fn vasicek(a: f64, b: f64, sigma: f64) -> Result<Self> {
        validate(a, b, sigma)?;
        Ok(Self::Vasicek { a, b, sigma })
    }

    pub fn quadratic(a: f64, b: f64, sigma: f64, beta: f64, gamma: f64) -> Result<Self> {
        validate(a, b, sigma)?;
        if !(beta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParameter("beta and gamma must be finite".into()));
        }
        let model = Self::Quadratic {
            a,
            b,
            sigma,
            beta,
            gamma,
        };
        for warning in model.diagnostics() {
            log::warn!("{warning}");
        }
        Ok(model)
    }

    pub fn black_karasinski(a: f64, b: f64, sigma: f64) -> Result<Self> {
        validate(a, b, sigma)?;
        Ok(Self::BlackKarasinski { a, b, sigma })
    }

    pub fn garch(a: f64, b: f64, sigma: f64) -> Result<Self> {
        validate(a, b, sigma)?;
        if b < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "GARCH level b must be non-negative to keep the rate positive, got {b}"
            )));
        }
        Ok(Self::Garch { a, b, sigma })
    }

    /// Mean-reversion speed, level and volatility.
    pub fn params(&self) -> (f64, f64, f64) {
        match *self {
            Self::Vasicek { a, b, sigma }
            | Self::Quadratic { a, b, sigma, .. }
            | Self::BlackKarasinski { a, b, sigma }
            | Self::Garch { a, b, sigma } => (a, b, sigma),
        }
    }

    /// Drift of the original process.
    pub fn mu_y(&self, y: f64) -> f64 {
        let (a, b, _) = self.params();
        a * (b - y)
    }

    /// `d sigma_y / dy`.
    pub fn sigma_y_derivative(&self, _y: f64) -> f64 {
        match *self {
            Self::Garch { sigma, .. } => sigma,
            _ => 0.0,
        }
    }

    /// Short rate as a function of the original state.
    pub fn rate_y(&self, y: f64) -> f64 {
        match *self {
            Self::Vasicek { .. } | Self::Garch { .. } => y,
            Self::Quadratic { beta, gamma, .. } => 1.0 + beta * y + gamma * y * y,
            Self::BlackKarasinski { .. } => y.exp(),
        }
    }

    /// State whose short rate is `r`, where the rate map is invertible.
    pub fn state_for_rate(&self, r: f64) -> Result<f64> {
        match *self {
            Self::Vasicek { .. } => Ok(r),
            Self::Garch { .. } => Interval::POSITIVE.check("r0", r),
            Self::BlackKarasinski { .. } => Ok(Interval::POSITIVE.check("r0", r)?.ln()),
            Self::Quadratic { .. } => Err(Error::InvalidParameter(
                "the quadratic rate map is not invertible; give the initial state y0".into(),
            )),
        }
    }

    /// Non-blocking parameter diagnostics.
    ///
    /// For the quadratic model both candidate positivity conditions for
    /// `1 + beta x + gamma x^2` are reported; neither prevents evaluation.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Self::Quadratic { beta, gamma, .. } = *self {
            if !(beta > 0.0 && gamma * gamma < 4.0 * beta) {
                out.push(format!(
                    "quadratic model: condition beta > 0 and gamma^2 < 4 beta fails \
                     (beta = {beta}, gamma = {gamma})"
                ));
            }
            if !(gamma > 0.0 && beta * beta < 4.0 * gamma) {
                out.push(format!(
                    "quadratic model: condition gamma > 0 and beta^2 < 4 gamma fails; \
                     the rate can become negative (beta = {beta}, gamma = {gamma})"
                ));
            }
        }
        out
    }

    /// Move the Lamperti base point so that `lamperti(base) = 0`.
    pub fn with_base_point(self, base: f64) -> Result<Rebased<Self>> {
        Rebased::new(self, base)
    }

    fn ou_smears(a: f64, b: f64, sigma: f64, xbar: f64, alpha: f64) -> SmearedPotential {
        let s2 = sigma * sigma;
        let d = xbar - b;
        SmearedPotential {
            value: a * a * (d * d + alpha) / (2.0 * s2) - 0.5 * a,
            second: a * a / s2,
        }
    }
}

impl TransformedModel for ShortRateModel {
    fn name(&self) -> &str {
        match self {
            Self::Vasicek { .. } => "vasicek",
            Self::Quadratic { .. } => "quadratic",
            Self::BlackKarasinski { .. } => "bk",
            Self::Garch { .. } => "garch",
        }
    }

    fn sigma(&self) -> f64 {
        self.params().2
    }

    fn y_domain(&self) -> Interval {
        match self {
            Self::Garch { .. } => Interval::POSITIVE,
            _ => Interval::REAL_LINE,
        }
    }

    fn x_domain(&self) -> Interval {
        Interval::REAL_LINE
    }

    fn lamperti(&self, y: f64) -> Result<f64> {
        let y = self.y_domain().check("y", y)?;
        Ok(match self {
            // base point y = 1
            Self::Garch { .. } => y.ln(),
            _ => y,
        })
    }

    fn lamperti_inverse(&self, x: f64) -> Result<f64> {
        let x = self.x_domain().check("x", x)?;
        Ok(match self {
            Self::Garch { .. } => x.exp(),
            _ => x,
        })
    }

    fn sigma_y(&self, y: f64) -> f64 {
        match *self {
            Self::Garch { sigma, .. } => sigma * y,
            _ => self.sigma(),
        }
    }

    fn drift_jet(&self, x: f64) -> Jet {
        match *self {
            Self::Vasicek { a, b, .. }
            | Self::Quadratic { a, b, .. }
            | Self::BlackKarasinski { a, b, .. } => Jet {
                value: a * (b - x),
                d1: -a,
                d2: 0.0,
                d3: 0.0,
            },
            Self::Garch { a, b, sigma } => {
                let e = a * b * (-x).exp();
                Jet {
                    value: e - a - 0.5 * sigma * sigma,
                    d1: -e,
                    d2: e,
                    d3: -e,
                }
            }
        }
    }

    fn rate_jet(&self, x: f64) -> Jet {
        match *self {
            Self::Vasicek { .. } => Jet {
                value: x,
                d1: 1.0,
                ..Jet::default()
            },
            Self::Quadratic { beta, gamma, .. } => Jet {
                value: 1.0 + beta * x + gamma * x * x,
                d1: beta + 2.0 * gamma * x,
                d2: 2.0 * gamma,
                d3: 0.0,
            },
            Self::BlackKarasinski { .. } | Self::Garch { .. } => {
                let e = x.exp();
                Jet {
                    value: e,
                    d1: e,
                    d2: e,
                    d3: e,
                }
            }
        }
    }

    fn potential(&self, x: f64, lambda: f64) -> f64 {
        match *self {
            Self::Vasicek { a, b, sigma } => {
                a * a * (b - x).powi(2) / (2.0 * sigma * sigma) - 0.5 * a + lambda * x
            }
            Self::Quadratic {
                a,
                b,
                sigma,
                beta,
                gamma,
            } => {
                a * a * (b - x).powi(2) / (2.0 * sigma * sigma) - 0.5 * a
                    + lambda * (1.0 + beta * x + gamma * x * x)
            }
            Self::BlackKarasinski { a, b, sigma } => {
                a * a * (b - x).powi(2) / (2.0 * sigma * sigma) - 0.5 * a + lambda * x.exp()
            }
            Self::Garch { a, b, sigma } => {
                // Morse-type form; the constant is (a + sigma^2/2)^2 / 2 sigma^2.
                let s2 = sigma * sigma;
                let c = a + 0.5 * s2;
                a * a * b * b / (2.0 * s2) * (-2.0 * x).exp() - a * b / s2 * (-x).exp() * (a + s2)
                    + c * c / (2.0 * s2)
                    + lambda * x.exp()
            }
        }
    }

    fn potential_second(&self, x: f64, lambda: f64) -> f64 {
        match *self {
            Self::Vasicek { a, sigma, .. } => a * a / (sigma * sigma),
            Self::Quadratic { a, sigma, gamma, .. } => a * a / (sigma * sigma) + 2.0 * lambda * gamma,
            Self::BlackKarasinski { a, sigma, .. } => a * a / (sigma * sigma) + lambda * x.exp(),
            Self::Garch { a, b, sigma } => {
                let s2 = sigma * sigma;
                2.0 * a * a * b * b / s2 * (-2.0 * x).exp() - a * b / s2 * (-x).exp() * (a + s2)
                    + lambda * x.exp()
            }
        }
    }

    fn drift_primitive(&self, x0: f64, xt: f64) -> f64 {
        match *self {
            Self::Vasicek { a, b, sigma }
            | Self::Quadratic { a, b, sigma, .. }
            | Self::BlackKarasinski { a, b, sigma } => {
                -a * (b * (xt - x0) - 0.5 * (xt - x0) * (xt + x0)) / (sigma * sigma)
            }
            Self::Garch { a, b, sigma } => {
                let c = a + 0.5 * sigma * sigma;
                let antiderivative = |x: f64| -a * b * (-x).exp() - c * x;
                -(antiderivative(xt) - antiderivative(x0)) / (sigma * sigma)
            }
        }
    }

    fn closed_form_smears(&self, xbar: f64, alpha: f64, lambda: f64) -> Option<SmearedPotential> {
        Some(match *self {
            Self::Vasicek { a, b, sigma } => {
                let ou = Self::ou_smears(a, b, sigma, xbar, alpha);
                SmearedPotential {
                    value: ou.value + lambda * xbar,
                    second: ou.second,
                }
            }
            Self::Quadratic {
                a,
                b,
                sigma,
                beta,
                gamma,
            } => {
                let ou = Self::ou_smears(a, b, sigma, xbar, alpha);
                SmearedPotential {
                    value: ou.value + lambda * (1.0 + beta * xbar + gamma * (xbar * xbar + alpha)),
                    second: ou.second + 2.0 * lambda * gamma,
                }
            }
            Self::BlackKarasinski { a, b, sigma } => {
                let ou = Self::ou_smears(a, b, sigma, xbar, alpha);
                let rate = (xbar + 0.5 * alpha).exp();
                SmearedPotential {
                    value: ou.value + lambda * rate,
                    second: ou.second + lambda * rate,
                }
            }
            Self::Garch { a, b, sigma } => {
                let s2 = sigma * sigma;
                let c = a + 0.5 * s2;
                let e2 = a * a * b * b / (2.0 * s2) * (2.0 * alpha - 2.0 * xbar).exp();
                let e1 = a * b * (a + s2) / s2 * (0.5 * alpha - xbar).exp();
                let rate = (xbar + 0.5 * alpha).exp();
                SmearedPotential {
                    value: e2 - e1 + c * c / (2.0 * s2) + lambda * rate,
                    second: 4.0 * e2 - e1 + lambda * rate,
                }
            }
        })
    }

    fn equilibrium(&self) -> Option<f64> {
        match *self {
            Self::Vasicek { b, .. } | Self::Quadratic { b, .. } | Self::BlackKarasinski { b, .. } => {
                Some(b)
            }
            Self::Garch { a, b, sigma } if b > 0.0 => Some((a * b / (a + 0.5 * sigma * sigma)).ln()),
            Self::Garch { .. } => None,
        }
    }
}

/// A model whose Lamperti coordinate is measured from a different base point:
/// `x' = gamma(y) - gamma(base)`. Densities in y are unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rebased<M> {
    inner: M,
    shift: f64,
}

impl<M: TransformedModel> Rebased<M> {
    pub fn new(inner: M, base: f64) -> Result<Self> {
        let shift = inner.lamperti(base)?;
        Ok(Self { inner, shift })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }
}

impl<M: TransformedModel> TransformedModel for Rebased<M> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn sigma(&self) -> f64 {
        self.inner.sigma()
    }
    fn y_domain(&self) -> Interval {
        self.inner.y_domain()
    }
    fn x_domain(&self) -> Interval {
        let d = self.inner.x_domain();
        Interval {
            lo: d.lo - self.shift,
            hi: d.hi - self.shift,
        }
    }
    fn lamperti(&self, y: f64) -> Result<f64> {
        Ok(self.inner.lamperti(y)? - self.shift)
    }
    fn lamperti_inverse(&self, x: f64) -> Result<f64> {
        self.inner.lamperti_inverse(x + self.shift)
    }
    fn sigma_y(&self, y: f64) -> f64 {
        self.inner.sigma_y(y)
    }
    fn drift_jet(&self, x: f64) -> Jet {
        self.inner.drift_jet(x + self.shift)
    }
    fn rate_jet(&self, x: f64) -> Jet {
        self.inner.rate_jet(x + self.shift)
    }
    fn potential(&self, x: f64, lambda: f64) -> f64 {
        self.inner.potential(x + self.shift, lambda)
    }
    fn potential_second(&self, x: f64, lambda: f64) -> f64 {
        self.inner.potential_second(x + self.shift, lambda)
    }
    fn drift_primitive(&self, x0: f64, xt: f64) -> f64 {
        self.inner.drift_primitive(x0 + self.shift, xt + self.shift)
    }
    fn closed_form_smears(&self, xbar: f64, alpha: f64, lambda: f64) -> Option<SmearedPotential> {
        self.inner.closed_form_smears(xbar + self.shift, alpha, lambda)
    }
    fn equilibrium(&self) -> Option<f64> {
        self.inner.equilibrium().map(|x| x - self.shift)
    }
}

impl<M: TransformedModel + ?Sized> TransformedModel for &M {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn sigma(&self) -> f64 {
        (**self).sigma()
    }
    fn y_domain(&self) -> Interval {
        (**self).y_domain()
    }
    fn x_domain(&self) -> Interval {
        (**self).x_domain()
    }
    fn lamperti(&self, y: f64) -> Result<f64> {
        (**self).lamperti(y)
    }
    fn lamperti_inverse(&self, x: f64) -> Result<f64> {
        (**self).lamperti_inverse(x)
    }
    fn sigma_y(&self, y: f64) -> f64 {
        (**self).sigma_y(y)
    }
    fn drift_jet(&self, x: f64) -> Jet {
        (**self).drift_jet(x)
    }
    fn rate_jet(&self, x: f64) -> Jet {
        (**self).rate_jet(x)
    }
    fn potential(&self, x: f64, lambda: f64) -> f64 {
        (**self).potential(x, lambda)
    }
    fn potential_second(&self, x: f64, lambda: f64) -> f64 {
        (**self).potential_second(x, lambda)
    }
    fn drift_primitive(&self, x0: f64, xt: f64) -> f64 {
        (**self).drift_primitive(x0, xt)
    }
    fn closed_form_smears(&self, xbar: f64, alpha: f64, lambda: f64) -> Option<SmearedPotential> {
        (**self).closed_form_smears(xbar, alpha, lambda)
    }
    fn equilibrium(&self) -> Option<f64> {
        (**self).equilibrium()
    }
}

/// Transformed drift computed from the original coefficients,
/// `sigma [mu_y / sigma_y - sigma_y' / 2]` at `y = gamma^{-1}(x)`.
pub fn transformed_drift_from_coefficients(model: &ShortRateModel, x: f64) -> Result<f64> {
    let y = model.lamperti_inverse(x)?;
    Ok(model.sigma() * (model.mu_y(y) / model.sigma_y(y) - 0.5 * model.sigma_y_derivative(y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN_004: f64 = -3.2188758248682006;

    fn bk() -> ShortRateModel {
        ShortRateModel::black_karasinski(0.1, LN_004, 0.85).unwrap()
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(ShortRateModel::vasicek(0.1, 0.0, 0.0).is_err());
        assert!(ShortRateModel::vasicek(-0.1, 0.0, 0.1).is_err());
        assert!(ShortRateModel::garch(0.1, -0.01, 0.3).is_err());
        assert!(ShortRateModel::black_karasinski(0.1, f64::NAN, 0.3).is_err());
    }

    #[test]
    fn lamperti_examples() {
        let vas = ShortRateModel::vasicek(0.1, 0.04, 0.02).unwrap();
        assert_eq!(vas.lamperti(0.03).unwrap(), 0.03);
        assert_eq!(vas.lamperti_inverse(0.03).unwrap(), 0.03);

        let garch = ShortRateModel::garch(0.1, 0.04, 0.6).unwrap();
        assert_eq!(garch.lamperti(1.0).unwrap(), 0.0);
        assert_eq!(garch.lamperti_inverse(0.0).unwrap(), 1.0);
        let x = garch.lamperti(0.06).unwrap();
        assert!((x - (-2.8134107167600364)).abs() < 1e-12);
        // sigma * int_1^y dz / (sigma z)
        let numeric = -integrate_adaptive(0.06, 1.0, 1e-14, &|z: f64| 0.6 / (0.6 * z));
        assert!((x - numeric).abs() < 1e-12);

        let m = bk();
        let x = 0.04f64.ln();
        let r = m.rate(m.lamperti(m.lamperti_inverse(x).unwrap()).unwrap());
        assert!((r - 0.04).abs() < 1e-15);
    }

    #[test]
    fn lamperti_domain_errors() {
        let garch = ShortRateModel::garch(0.1, 0.04, 0.6).unwrap();
        assert!(matches!(garch.lamperti(0.0), Err(Error::Domain { .. })));
        assert!(matches!(garch.lamperti(-1.0), Err(Error::Domain { .. })));
        assert!(garch.lamperti_inverse(f64::INFINITY).is_err());
    }

    #[test]
    fn transformed_drift_examples() {
        let vas = ShortRateModel::vasicek(0.1, LN_004, 0.85).unwrap();
        assert_eq!(vas.drift(LN_004), 0.0);

        let garch = ShortRateModel::garch(0.1, 0.04, 0.6).unwrap();
        let mu = garch.drift(0.06f64.ln());
        assert!((mu - (0.1 * 0.04 / 0.06 - 0.1 - 0.18)).abs() < 1e-14);
        assert!((mu + 0.213_333_333_333_333_3).abs() < 1e-12);

        // analytic root, confirmed by bisection on the drift
        let root = (0.1 * 0.04 / (0.1 + 0.18f64)).ln();
        assert!(garch.drift(root).abs() < 1e-15);
        let (mut lo, mut hi) = (-10.0, 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if garch.drift(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((0.5 * (lo + hi) - root).abs() < 1e-12);
        assert_eq!(garch.equilibrium(), Some(root));
    }

    #[test]
    fn drift_matches_original_coefficients() {
        for m in [
            ShortRateModel::vasicek(0.3, 0.02, 0.05).unwrap(),
            ShortRateModel::garch(0.1, 0.04, 0.6).unwrap(),
            bk(),
        ] {
            for x in [-4.0, -2.5, -0.3, 0.7] {
                let direct = m.drift(x);
                let from_y = transformed_drift_from_coefficients(&m, x).unwrap();
                assert!((direct - from_y).abs() < 1e-12 * (1.0 + direct.abs()), "{m:?} {x}");
            }
        }
    }

    #[test]
    fn potential_examples() {
        let vas = ShortRateModel::vasicek(0.1, 0.02, 0.3).unwrap();
        assert!((vas.potential(0.02, 0.0) + 0.05).abs() < 1e-15);

        let m = bk();
        assert!((m.potential(LN_004, 1.0) - (-0.05 + 0.04)).abs() < 1e-15);

        // Morse-form closed expression against the generic definition
        let garch = ShortRateModel::garch(0.1, 0.02, 0.5).unwrap();
        let x = 0.01f64.ln();
        let mu = garch.drift_jet(x);
        let generic = mu.value.powi(2) / (2.0 * 0.25) + 0.5 * mu.d1 + x.exp();
        assert!((garch.potential(x, 1.0) - generic).abs() < 1e-12 * generic.abs().max(1.0));
    }

    #[test]
    fn drift_primitive_examples() {
        let vas = ShortRateModel::vasicek(0.1, 0.0, 0.85).unwrap();
        assert_eq!(vas.drift_primitive(0.4, 0.4), 0.0);
        let w = vas.drift_primitive(0.0, 0.1);
        assert!((w - 0.0005 / 0.7225).abs() < 1e-15);
        let numeric = -integrate_adaptive(0.0, 0.1, 1e-16, &|x| vas.drift(x)) / 0.7225;
        assert!((w - numeric).abs() < 1e-15);
    }

    #[test]
    fn quadratic_reports_both_positivity_conditions() {
        let m = ShortRateModel::quadratic(0.1, 0.0, 0.02, 1.0, 0.2).unwrap();
        // beta = 1, gamma = 0.2 satisfies gamma^2 < 4 beta but not beta^2 < 4 gamma
        let d = m.diagnostics();
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("beta^2 < 4 gamma"));
        let ok = ShortRateModel::quadratic(0.1, 0.0, 0.02, 1.0, 0.5).unwrap();
        assert!(ok.diagnostics().is_empty());
    }

    #[test]
    fn rebased_model_shifts_coordinates() {
        let garch = ShortRateModel::garch(0.1, 0.04, 0.6).unwrap();
        let shifted = garch.with_base_point(0.05).unwrap();
        assert!(shifted.lamperti(0.05).unwrap().abs() < 1e-15);
        let x = garch.lamperti(0.07).unwrap();
        let xs = shifted.lamperti(0.07).unwrap();
        assert!((garch.drift(x) - shifted.drift(xs)).abs() < 1e-14);
        assert!((garch.potential(x, 1.0) - shifted.potential(xs, 1.0)).abs() < 1e-13);
    }

    #[test]
    fn state_for_rate() {
        assert!((bk().state_for_rate(0.06).unwrap() - 0.06f64.ln()).abs() < 1e-16);
        assert!(bk().state_for_rate(-0.01).is_err());
        let q = ShortRateModel::quadratic(0.1, 0.0, 0.02, 1.0, 0.5).unwrap();
        assert!(q.state_for_rate(1.0).is_err());
    }
}
