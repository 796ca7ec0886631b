use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unparseable command line.
    #[error("{0}")]
    Usage(String),

    /// Parseable but inconsistent or out-of-domain input.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Numerical(gtfk::Error),

    /// A reproduced table missed its tolerances.
    #[error("tolerance breach: {0}")]
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Tolerance(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Usage(_) | CliError::Input(_) | CliError::Io(_) => 4,
        }
    }

    /// Single-line JSON report for stderr.
    pub fn report(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Io(_) => "io",
            CliError::Tolerance(_) => "tolerance",
            CliError::Numerical(e) => match e {
                gtfk::Error::BranchBreakdown { .. } => "branch_breakdown",
                gtfk::Error::NonConvergence { .. } => "non_convergence",
                _ => "numerical",
            },
        };
        let mut v = serde_json::json!({ "error": kind, "message": self.to_string() });
        match self {
            CliError::Numerical(gtfk::Error::BranchBreakdown { xbar, phi }) => {
                v["xbar"] = serde_json::json!(xbar);
                v["phi"] = serde_json::json!(phi);
            }
            CliError::Numerical(gtfk::Error::NonConvergence { xbar, residual, .. }) => {
                v["xbar"] = serde_json::json!(xbar);
                v["residual"] = serde_json::json!(residual);
            }
            _ => {}
        }
        v
    }
}

/// Library errors split into bad input (exit 4) and numerical failure (exit 3).
impl From<gtfk::Error> for CliError {
    fn from(e: gtfk::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
