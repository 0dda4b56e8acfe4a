use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("Cartan matrix is not symmetrizable: {0}")]
    NonSymmetrizable(String),
    #[error("bad orientation: {0}")]
    BadOrientation(String),
    #[error("diagonal entry c_{0}{0} is not 2")]
    BadDiagonal(usize),
    #[error("dimension vector is not locally free: {0}")]
    NotLocallyFreeShape(String),
    #[error("Cartan matrix is not of finite type")]
    NotFiniteType,
    #[error("weight is not dominant")]
    NotDominant,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("module is not locally free")]
    NotLocallyFree,
    #[error("relation {0} fails")]
    RelationFailure(String),
    #[error("field too small for this test")]
    FieldTooSmall,
    #[error("genericity exhausted: {0}")]
    GenericityExhausted(String),
    #[error("string key collision: {0}")]
    KeyCollision(String),
    #[error("height bound insufficient: {0}")]
    HeightInsufficient(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("point count is not polynomial: {0}")]
    NonPolynomialCount(String),
    #[error("bad reduction modulo {0}")]
    BadReduction(u64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("duality check failed: {0}")]
    DualityCheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::Parse(_)
            | Error::NonSymmetrizable(_)
            | Error::BadOrientation(_)
            | Error::BadDiagonal(_)
            | Error::NotLocallyFreeShape(_)
            | Error::NotFiniteType
            | Error::NotDominant
            | Error::ShapeMismatch(_)
            | Error::NotLocallyFree
            | Error::PreconditionViolated(_)
            | Error::FieldTooSmall => 2,
            Error::GenericityExhausted(_) | Error::BudgetExceeded(_) | Error::HeightInsufficient(_) => 3,
            Error::RelationFailure(_)
            | Error::KeyCollision(_)
            | Error::NonPolynomialCount(_)
            | Error::BadReduction(_)
            | Error::DualityCheckFailed(_) => 1,
        }
    }
}
