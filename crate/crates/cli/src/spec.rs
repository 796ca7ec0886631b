//! Command-line arguments and the validated run specification.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use gtfk::{ModelConfig, ModelName, NumericsConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::tables::TableId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    /// Density curves over a terminal-state grid.
    Density,
    /// Zero-coupon bonds / transition masses.
    Bond,
    /// Published bond tables with acceptance checks.
    Table,
    /// Self-consistent parameters over a grid of average points.
    Selfconsistent,
    /// Bonds from the reference engines.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Gtfk,
    Pde,
    Conv,
    Mc,
    Exact,
}

impl MethodName {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodName::Gtfk => "gtfk",
            MethodName::Pde => "pde",
            MethodName::Conv => "conv",
            MethodName::Mc => "mc",
            MethodName::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "gtfk",
    version,
    about = "Arrow-Debreu densities and bond prices for one-factor short-rate models",
    allow_negative_numbers = true
)]
pub struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    pub command: CommandName,

    #[arg(long, value_parser = parse_model_name)]
    pub model: Option<ModelName>,
    /// Mean-reversion speed.
    #[arg(long)]
    pub a: Option<f64>,
    /// Mean-reversion level (log-rate level for bk).
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Discount weight (1 prices bonds, 0 gives transition probabilities).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Initial state of the model variable.
    #[arg(long)]
    pub y0: Option<f64>,
    /// Initial short rate (converted to the model state).
    #[arg(long)]
    pub r0: Option<f64>,
    /// Horizon; repeat or separate with commas for several.
    #[arg(long = "T", value_delimiter = ',')]
    pub horizons: Vec<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Table to reproduce with the `table` command.
    #[arg(long, value_enum)]
    pub table: Option<TableId>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Model configuration file (`key = value` lines); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Numerical override such as `xbar_order=128`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Grid points for `density` and `selfconsistent`.
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// Add a PDE column to `density` output.
    #[arg(long)]
    pub with_pde: bool,
    /// Record wall-clock timings in the metadata (makes it non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

fn parse_model_name(s: &str) -> Result<ModelName, String> {
    s.parse().map_err(|e: gtfk::Error| e.to_string())
}

/// A fully resolved and validated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub command: CommandName,
    pub model: ModelConfig,
    pub lambda: f64,
    pub horizons: Vec<f64>,
    pub method: MethodName,
    pub table: Option<TableId>,
    pub numerics: NumericsConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub points: usize,
    pub with_pde: bool,
    pub timings: bool,
}

fn default_method(command: CommandName) -> MethodName {
    match command {
        CommandName::Oracle => MethodName::Pde,
        _ => MethodName::Gtfk,
    }
}

/// Apply `key=value` overrides through the serialized form of the config.
fn apply_overrides(base: NumericsConfig, overrides: &[String]) -> Result<NumericsConfig, CliError> {
    if overrides.is_empty() {
        return Ok(base);
    }
    let mut value = serde_json::to_value(&base).map_err(|e| CliError::Input(e.to_string()))?;
    let map = value.as_object_mut().expect("config serializes to an object");
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("override '{item}' is not KEY=VALUE")))?;
        let key = key.trim();
        let slot = map
            .get_mut(key)
            .ok_or_else(|| CliError::Input(format!("unknown numerics key '{key}'")))?;
        *slot = serde_json::from_str(raw.trim())
            .map_err(|_| CliError::Input(format!("bad value '{raw}' for '{key}'")))?;
    }
    serde_json::from_value(value).map_err(|e| CliError::Input(format!("numerics override: {e}")))
}

impl RunSpec {
    /// Parse command-line arguments (the first item is the program name).
    pub fn from_args<I, T>(args: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
        Self::from_cli(cli)
    }

    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                ModelConfig::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            }
            None => ModelConfig::default(),
        };
        let flags = ModelConfig {
            model: cli.model,
            a: cli.a,
            b: cli.b,
            sigma: cli.sigma,
            beta: cli.beta,
            gamma: cli.gamma,
            lambda: cli.lambda,
            y0: cli.y0,
            r0: cli.r0,
        };
        let mut model = file.merged(&flags);
        if cli.command == CommandName::Table {
            if model != ModelConfig::default() {
                return Err(CliError::Input(
                    "the table command uses its preloaded parameter set; drop the model flags".into(),
                ));
            }
            if let Some(id) = cli.table {
                model = id.model_config();
            }
        }
        let mut numerics = apply_overrides(NumericsConfig::default(), &cli.overrides)?;
        if let Some(seed) = cli.seed {
            numerics.seed = seed;
        }
        let spec = RunSpec {
            command: cli.command,
            lambda: model.lambda.unwrap_or(1.0),
            model,
            horizons: cli.horizons,
            method: cli.method.unwrap_or(default_method(cli.command)),
            table: cli.table,
            numerics,
            out: cli.out,
            format: cli.format,
            points: cli.points,
            with_pde: cli.with_pde,
            timings: cli.timings,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Reject inconsistent combinations before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Input(msg));
        self.numerics.validate().map_err(|e| CliError::Input(e.to_string()))?;
        if !self.lambda.is_finite() {
            return bad(format!("lambda must be finite, got {}", self.lambda));
        }
        if self.command == CommandName::Table {
            if self.table.is_none() {
                return bad("the table command needs --table".into());
            }
            if self.method != MethodName::Gtfk {
                return bad("the table command always compares gtfk with pde".into());
            }
            return Ok(());
        }
        if self.table.is_some() {
            return bad("--table only applies to the table command".into());
        }
        if self.horizons.is_empty() {
            return bad("at least one horizon --T is required".into());
        }
        if let Some(t) = self.horizons.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return bad(format!("horizons must be positive, got {t}"));
        }
        if self.points < 2 {
            return bad("--points must be at least 2".into());
        }
        let allowed: &[MethodName] = match self.command {
            CommandName::Density => &[MethodName::Gtfk, MethodName::Pde, MethodName::Conv, MethodName::Exact],
            CommandName::Bond => &[
                MethodName::Gtfk,
                MethodName::Pde,
                MethodName::Conv,
                MethodName::Mc,
                MethodName::Exact,
            ],
            CommandName::Selfconsistent => &[MethodName::Gtfk],
            CommandName::Oracle => &[MethodName::Pde, MethodName::Conv, MethodName::Mc],
            CommandName::Table => unreachable!(),
        };
        if !allowed.contains(&self.method) {
            return bad(format!(
                "method '{}' is not available for this command",
                self.method.as_str()
            ));
        }
        let model = self.model.build_model().map_err(|e| CliError::Input(e.to_string()))?;
        if self.method == MethodName::Exact && !matches!(model, gtfk::ShortRateModel::Vasicek { .. }) {
            return bad(format!(
                "the exact method is only available for the vasicek model, not '{}'",
                self.model.model.map_or("?", |m| m.as_str())
            ));
        }
        let y0 = self.model.initial_state(&model).map_err(|e| CliError::Input(e.to_string()))?;
        gtfk::TransformedModel::lamperti(&model, y0).map_err(|e| CliError::Input(e.to_string()))?;
        Ok(())
    }
}
