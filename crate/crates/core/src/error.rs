use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The trial frequency is imaginary and its half-angle is too close to
    /// the `pi` pole of the fluctuation variance for the trial density to be
    /// normalizable.
    #[error("{}", branch_message(*.xbar, *.phi))]
    BranchBreakdown { xbar: Option<f64>, phi: f64 },

    #[error(
        "self-consistency did not converge at xbar = {xbar} after {iterations} iterations \
         (relative residual {residual:e})"
    )]
    NonConvergence {
        xbar: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("non-finite evaluation: {0}")]
    NonFinite(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn branch_message(xbar: Option<f64>, phi: f64) -> String {
    match xbar {
        Some(x) => format!(
            "branch breakdown at xbar = {x}: imaginary half-angle phi = {phi} \
             leaves no normalizable trial density (phi -> pi)"
        ),
        None => format!(
            "branch breakdown: imaginary half-angle phi = {phi} \
             leaves no normalizable trial density (phi -> pi)"
        ),
    }
}

impl Error {
    /// True for failures of the numerical method itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BranchBreakdown { .. } | Error::NonConvergence { .. } | Error::NonFinite(_)
        )
    }

    pub(crate) fn at_xbar(self, xbar: f64) -> Self {
        match self {
            Error::BranchBreakdown { xbar: None, phi } => Error::BranchBreakdown {
                xbar: Some(xbar),
                phi,
            },
            other => other,
        }
    }
}
