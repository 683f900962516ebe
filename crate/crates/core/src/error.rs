//! Error type shared by all workbench modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, WorkbenchError>;

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    HermiticityViolation { defect: f64, tolerance: f64 },

    #[error("matrix is not unitary: defect {defect:.3e}")]
    UnitarityViolation { defect: f64 },

    #[error("state is not normalized: |norm - 1| = {defect:.3e}")]
    NormalizationViolation { defect: f64 },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    ConvergenceFailure { dim: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model file error at line {line}, column {column}: {message}")]
    ModelFormat {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("expression syntax error{} at column {position}: {message}", term_context(.term))]
    ExpressionSyntax {
        term: Option<usize>,
        position: usize,
        message: String,
    },

    #[error("direction vector norm deviates from 1 by {defect:.3e} at g = {g}")]
    DirectionNorm { g: f64, defect: f64 },

    #[error("quadrature subdivision limit of {limit} intervals exceeded before reaching tolerance {tolerance:.3e}")]
    QuadratureLimit { limit: usize, tolerance: f64 },

    #[error(
        "superoperator eigenvalue {value:.6e} falls in the ambiguous band ({lo:.3e}, {hi:.3e}); \
         adjust zero_tol"
    )]
    AmbiguousZeroMode { value: f64, lo: f64, hi: f64 },

    #[error("bound inapplicable: {0}")]
    InapplicableBound(String),

    #[error("operator does not commute with the Hamiltonian: defect {defect:.3e}")]
    NonCommuting { defect: f64 },

    #[error("derivative acts outside the state's support: weight {weight:.3e}")]
    UnsupportedDirection { weight: f64 },

    #[error("dimension cap exceeded: total dimension {dim} > {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("likelihood maximum at the {side} grid boundary; widen the scan interval")]
    MleBracket { side: &'static str },

    #[error("identifiability failure: classical Fisher information {value:.3e} is too small")]
    Identifiability { value: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

fn term_context(term: &Option<usize>) -> String {
    match term {
        Some(idx) => format!(" in term {idx}"),
        None => String::new(),
    }
}

impl WorkbenchError {
    /// Stable machine-readable tag, used by structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::DimensionMismatch(_) => "dimension_mismatch",
            Self::HermiticityViolation { .. } => "hermiticity_violation",
            Self::UnitarityViolation { .. } => "unitarity_violation",
            Self::NormalizationViolation { .. } => "normalization_violation",
            Self::ConvergenceFailure { .. } => "convergence_failure",
            Self::InvalidArgument(_) => "invalid_argument",
            Self::ModelFormat { .. } => "model_format",
            Self::ExpressionSyntax { .. } => "expression_syntax",
            Self::DirectionNorm { .. } => "direction_norm",
            Self::QuadratureLimit { .. } => "quadrature_limit",
            Self::AmbiguousZeroMode { .. } => "ambiguous_zero_mode",
            Self::InapplicableBound(_) => "inapplicable_bound",
            Self::NonCommuting { .. } => "non_commuting",
            Self::UnsupportedDirection { .. } => "unsupported_direction",
            Self::DimensionCap { .. } => "dimension_cap",
            Self::MleBracket { .. } => "mle_bracket",
            Self::Identifiability { .. } => "identifiability_failure",
            Self::InvalidDistribution(_) => "invalid_distribution",
            Self::Numerical(_) => "numerical_failure",
        }
    }
}
