//! Published bond tables with their parameter sets and tolerances.

use clap::ValueEnum;
use gtfk::{ModelConfig, ModelName};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum TableId {
    /// Black-Karasinski, a=0.1, b=ln 0.04, sigma=0.85, r0=0.06.
    BkBonds,
    /// GARCH, a=0.1, b=0.04, sigma=0.6, y0=0.06.
    #[serde(rename = "garch_bonds_1")]
    #[value(name = "garch_bonds_1")]
    GarchBonds1,
    /// GARCH, a=0.1, b=0.02, sigma=0.5, y0=0.01.
    #[serde(rename = "garch_bonds_2")]
    #[value(name = "garch_bonds_2")]
    GarchBonds2,
}

/// One published row and the absolute tolerances it is checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub horizon: f64,
    pub gtfk: f64,
    pub pde: f64,
    pub tol_gtfk: f64,
    pub tol_pde: f64,
}

const fn row(horizon: f64, gtfk: f64, pde: f64, tol_gtfk: f64, tol_pde: f64) -> TableRow {
    TableRow {
        horizon,
        gtfk,
        pde,
        tol_gtfk,
        tol_pde,
    }
}

const BK_BONDS: [TableRow; 8] = [
    row(0.1, 0.9939, 0.9939, 5e-4, 1e-3),
    row(0.5, 0.9681, 0.9681, 5e-4, 1e-3),
    row(1.0, 0.9331, 0.9331, 5e-4, 1e-3),
    row(2.0, 0.8582, 0.8582, 5e-4, 1e-3),
    row(3.0, 0.7847, 0.7846, 5e-4, 1e-3),
    row(5.0, 0.6602, 0.6598, 5e-4, 1e-3),
    row(10.0, 0.4628, 0.4623, 2e-3, 1e-3),
    row(20.0, 0.2672, 0.2683, 2e-3, 1e-3),
];

const GARCH_BONDS_1: [TableRow; 8] = [
    row(0.1, 0.9940, 0.9940, 1e-3, 1e-3),
    row(0.5, 0.9707, 0.9707, 1e-3, 1e-3),
    row(1.0, 0.9429, 0.9429, 1e-3, 1e-3),
    row(2.0, 0.8920, 0.8917, 1e-3, 1e-3),
    row(3.0, 0.8472, 0.8466, 1e-3, 1e-3),
    row(5.0, 0.7717, 0.7726, 1e-3, 1e-3),
    row(7.5, 0.6923, 0.7025, 5e-3, 1e-3),
    row(10.0, 0.6223, 0.6477, 5e-3, 1e-3),
];

const GARCH_BONDS_2: [TableRow; 7] = [
    row(0.1, 0.9990, 0.9990, 1e-3, 1e-3),
    row(0.25, 0.9975, 0.9975, 1e-3, 1e-3),
    row(0.5, 0.9949, 0.9949, 1e-3, 1e-3),
    row(1.0, 0.9896, 0.9896, 1e-3, 1e-3),
    row(2.5, 0.9723, 0.9726, 1e-3, 1e-3),
    row(5.0, 0.9403, 0.9417, 1e-3, 1e-3),
    row(10.0, 0.8709, 0.8762, 3e-3, 1e-3),
];

impl TableId {
    pub fn as_str(&self) -> &'static str {
        match self {
            TableId::BkBonds => "bk_bonds",
            TableId::GarchBonds1 => "garch_bonds_1",
            TableId::GarchBonds2 => "garch_bonds_2",
        }
    }

    pub fn rows(&self) -> &'static [TableRow] {
        match self {
            TableId::BkBonds => &BK_BONDS,
            TableId::GarchBonds1 => &GARCH_BONDS_1,
            TableId::GarchBonds2 => &GARCH_BONDS_2,
        }
    }

    /// The preloaded parameter set (bond pricing, `lambda = 1`).
    pub fn model_config(&self) -> ModelConfig {
        let base = ModelConfig {
            a: Some(0.1),
            lambda: Some(1.0),
            ..ModelConfig::default()
        };
        match self {
            TableId::BkBonds => ModelConfig {
                model: Some(ModelName::Bk),
                b: Some(0.04f64.ln()),
                sigma: Some(0.85),
                r0: Some(0.06),
                ..base
            },
            TableId::GarchBonds1 => ModelConfig {
                model: Some(ModelName::Garch),
                b: Some(0.04),
                sigma: Some(0.6),
                y0: Some(0.06),
                ..base
            },
            TableId::GarchBonds2 => ModelConfig {
                model: Some(ModelName::Garch),
                b: Some(0.02),
                sigma: Some(0.5),
                y0: Some(0.01),
                ..base
            },
        }
    }
}

impl TableRow {
    /// `(gtfk ok, pde ok)` for computed values.
    pub fn check(&self, gtfk: f64, pde: f64) -> (bool, bool) {
        (
            (gtfk - self.gtfk).abs() <= self.tol_gtfk,
            (pde - self.pde).abs() <= self.tol_pde,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_build() {
        for id in [TableId::BkBonds, TableId::GarchBonds1, TableId::GarchBonds2] {
            let cfg = id.model_config();
            let model = cfg.build_model().unwrap();
            cfg.initial_state(&model).unwrap();
            assert!(id.rows().windows(2).all(|w| w[0].horizon < w[1].horizon));
        }
    }

    #[test]
    fn published_relative_gap() {
        let last = GARCH_BONDS_1[7];
        let rel = (last.gtfk - last.pde).abs() / last.pde;
        assert!((rel - 0.0392).abs() < 5e-5);
    }
}
