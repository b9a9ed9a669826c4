use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("value `{value}` is not in the domain of `{variable}`")]
    ValueOutsideDomain { variable: String, value: String },

    #[error("incomplete input: observation `{0}` is unbound")]
    IncompleteInput(String),

    #[error("degenerate distribution for `{0}`: every score is zero")]
    DegenerateDistribution(String),

    #[error("invalid classifier: {0}")]
    InvalidClassifier(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid explanation kit: {0}")]
    InvalidKit(String),

    #[error("kit `{kit}` expects a {expected} influence graph, got {found}")]
    GraphMismatch {
        kit: String,
        expected: &'static str,
        found: &'static str,
    },

    #[error("`{0}` is not a classification")]
    NotAClassification(String),

    #[error("counterfactual budget exceeded: {needed} combinations needed, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("attribution unavailable: {0}")]
    AttributionUnavailable(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// Whether the error stems from a computational budget guard rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
