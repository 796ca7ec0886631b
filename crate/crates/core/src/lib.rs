//! Arrow-Debreu densities and bond prices for one-factor short-rate
//! diffusions from a self-consistent effective-potential approximation of
//! the Feynman-Kac path integral, with finite-difference, short-time
//! convolution and Monte Carlo reference engines.

pub mod config;
pub mod error;
pub mod gtfk;
pub mod models;
pub mod oracles;
pub mod pricing;
pub mod quadrature;
pub mod support;

pub use config::{ModelConfig, ModelName, NumericsConfig};
pub use error::{Error, Result};
pub use gtfk::{solve_self_consistent, Branch, GtfkPoint};
pub use models::{Interval, Jet, ShortRateModel, TransformedModel};
pub use pricing::{
    ad_density, ad_density_y, density_curve, price_european, zero_coupon_bond, BondQuote,
    DensityCurve, Method, OptionPrice, Payout, Vanilla,
};
