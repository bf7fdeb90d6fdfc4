use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate document id `{0}`")]
    DuplicateDocumentId(String),

    #[error("document `{0}` has an empty skill list")]
    EmptySkillList(String),

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("group `{0}` has no documents")]
    EmptyGroup(String),

    #[error("unknown skill `{0}`")]
    UnknownSkill(String),

    #[error("skill set `{0}` has no positive weight")]
    EmptySkillSet(String),

    #[error("invalid weight {weight} for skill id {skill} in `{label}`")]
    InvalidWeight {
        label: String,
        skill: usize,
        weight: f64,
    },

    #[error("normalization constant is zero")]
    ZeroNormalization,

    #[error("target skill id {0} has no weight in the target set")]
    TargetSkillNotInB(usize),

    #[error("baseline similarity is zero; percentage improvement undefined")]
    BaselineZero,

    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("effective-use threshold must be finite, got {0}")]
    InvalidThreshold(f64),

    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),

    #[error("infeasible workload spec: {0}")]
    InfeasibleSpec(String),

    #[error("engine results diverge: {0}")]
    EngineMismatch(String),

    #[error("matrix file: {0}")]
    MatrixFormat(String),

    #[error("cache mismatch: {0}")]
    CacheMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input or failed validation, as opposed
    /// to failures during a computation on valid input.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::ZeroNormalization
                | Error::BaselineZero
                | Error::InfeasibleSpec(_)
                | Error::EngineMismatch(_)
        )
    }
}
