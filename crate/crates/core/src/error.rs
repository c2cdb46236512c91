use thiserror::Error;

pub type Result<T> = std::result::Result<T, DesignError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The linear predictor f(x)ᵀβ is not strictly positive at `point`.
    #[error("nonpositive linear predictor {value} at point {point:?}")]
    NonpositivePredictor { point: Vec<f64>, value: f64 },

    #[error("information matrix is singular")]
    SingularInformation,

    #[error("candidate set does not span the parameter space")]
    RankDeficientCandidates,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} is outside the admissible range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("region has no vertices (positive orthant)")]
    RegionHasNoVertices,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl DesignError {
    /// Whether the error stems from bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            DesignError::SingularInformation | DesignError::RankDeficientCandidates
        )
    }

    /// Stable machine-readable identifier.
    pub fn kind(&self) -> &'static str {
        match self {
            DesignError::DimensionMismatch { .. } => "dimension_mismatch",
            DesignError::NonpositivePredictor { .. } => "nonpositive_predictor",
            DesignError::SingularInformation => "singular_information",
            DesignError::RankDeficientCandidates => "rank_deficient_candidates",
            DesignError::InvalidModel(_) => "invalid_model",
            DesignError::InvalidRegion(_) => "invalid_region",
            DesignError::InvalidDesign(_) => "invalid_design",
            DesignError::InvalidParameter(_) => "invalid_parameter",
            DesignError::OutOfRange { .. } => "out_of_range",
            DesignError::RegionHasNoVertices => "region_has_no_vertices",
            DesignError::EmptyInput(_) => "empty_input",
        }
    }
}
