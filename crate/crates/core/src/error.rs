use thiserror::Error;

/// Hypotheses an instance can be rejected under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Coercive, symmetric positive definite matrix weight.
    Coercivity,
    /// Superquadratic growth with exponent `mu > 2`.
    Superquadratic,
    /// Gradient of the potential is `o(|x|)` at the origin.
    SmallAtOrigin,
    /// Continuous envelope bounding the potential and its gradient.
    Envelope,
    /// Fractional order in `(1/2, 1)`.
    OrderRange,
}

impl Hypothesis {
    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::Coercivity => "(L)",
            Hypothesis::Superquadratic => "(W₁)",
            Hypothesis::SmallAtOrigin => "(W₂)",
            Hypothesis::Envelope => "(W₃)",
            Hypothesis::OrderRange => "α-range (1/2,1)",
        }
    }
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("hypothesis {hypothesis} violated: {detail}")]
    Hypothesis {
        hypothesis: Hypothesis,
        detail: String,
    },

    #[error("fields live on different grids or dimensions")]
    GridMismatch,

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("inverse transform left an imaginary residue of {residue:e} (relative to {scale:e})")]
    ImaginaryResidue { residue: f64, scale: f64 },

    #[error("fractional integral needs a zero-mean field, mean is {mean:e}")]
    NonZeroMean { mean: f64 },

    #[error("conjugate gradients did not converge: relative residual {residual:e} after {iterations} iterations")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("line search failed: {0}")]
    LineSearch(String),

    #[error("{0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
