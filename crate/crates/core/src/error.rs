use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclotomic order {0} outside the supported range")]
    OrderOutOfRange(u32),
    #[error("`{0}` is not a root of unity")]
    NotRootOfUnity(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invariant form is not invertible")]
    FormNotInvertible,
    #[error("matrix is not invertible")]
    Singular,
    #[error("not quasi-unipotent within search order {search_order}: found {found} of {size} eigenvalues")]
    NotQuasiUnipotent {
        search_order: u32,
        found: usize,
        size: usize,
    },
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("class not realizable in {0}")]
    NotRealizable(String),
    #[error("puncture lists differ")]
    PunctureMismatch,
    #[error("middle convolution with the trivial character")]
    TrivialCharacter,
    #[error("middle convolution degenerates to rank 0")]
    ZeroQuotient,
    #[error("middle convolution does not apply: {0}")]
    PassThrough(String),
    #[error("power-map pullback needs punctures within {{0, 1, inf}}, got {0:?}")]
    UnsupportedPunctures(Vec<String>),
    #[error("tuple does not preserve a symplectic form")]
    NotSymplectic,
    #[error("expected rank 4, got {0}")]
    RankNot4(usize),
    #[error("local monodromy at `{0}` does not have determinant 1")]
    DetNotOne(String),
    #[error("profile is not cohomologically rigid: chi = {chi}, needed {threshold}")]
    NotRigid { chi: i64, threshold: i64 },
    #[error("reduction stuck at rank {rank}: best candidate reaches rank {best_rank}")]
    Stuck { rank: usize, best_rank: i64 },
    #[error("plan step {index} failed: {source}")]
    StepFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("class has no lift: {0}")]
    NotLiftable(String),
    #[error("invalid input: {0}")]
    Schema(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    /// Stable upper-case identifier, used in reports and CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DIVISION_BY_ZERO",
            Error::OrderOutOfRange(_) => "ORDER_OUT_OF_RANGE",
            Error::NotRootOfUnity(_) => "NOT_ROOT_OF_UNITY",
            Error::SizeMismatch(_) => "SIZE_MISMATCH",
            Error::ShapeMismatch(_) => "SHAPE_MISMATCH",
            Error::FormNotInvertible => "FORM_NOT_INVERTIBLE",
            Error::Singular => "SINGULAR",
            Error::NotQuasiUnipotent { .. } => "NOT_QUASI_UNIPOTENT",
            Error::RankMismatch { .. } => "RANK_MISMATCH",
            Error::NotRealizable(_) => "NOT_REALIZABLE",
            Error::PunctureMismatch => "PUNCTURE_MISMATCH",
            Error::TrivialCharacter => "TRIVIAL_CHARACTER",
            Error::ZeroQuotient => "ZERO_QUOTIENT",
            Error::PassThrough(_) => "PASS_THROUGH",
            Error::UnsupportedPunctures(_) => "UNSUPPORTED_PUNCTURES",
            Error::NotSymplectic => "NOT_SYMPLECTIC",
            Error::RankNot4(_) => "RANK_NOT_4",
            Error::DetNotOne(_) => "DET_NOT_ONE",
            Error::NotRigid { .. } => "NOT_RIGID",
            Error::Stuck { .. } => "STUCK",
            Error::StepFailed { .. } => "STEP_FAILED",
            Error::NotLiftable(_) => "NOT_LIFTABLE",
            Error::Schema(_) => "SCHEMA",
            Error::Verification(_) => "VERIFICATION",
        }
    }

    /// True for malformed input, as opposed to a violated mathematical precondition.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Schema(_) | Error::OrderOutOfRange(_) | Error::NotRootOfUnity(_) => true,
            Error::StepFailed { source, .. } => source.is_input_error(),
            _ => false,
        }
    }

    pub(crate) fn at_step(index: usize, source: Error) -> Error {
        Error::StepFailed {
            index,
            source: Box::new(source),
        }
    }
}
