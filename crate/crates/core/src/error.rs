use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("extension degree {0} is outside 1..=16")]
    BadDegree(u32),
    #[error("polynomial {poly:#x} is not of degree exactly {m}")]
    DegreeMismatch { m: u32, poly: u32 },
    #[error("polynomial {poly:#x} is reducible over GF(2)")]
    Reducible { poly: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value {value} is out of range for GF(2^{m})")]
    OutOfRange { value: String, m: u32 },
    #[error("cannot parse `{0}`")]
    BadSyntax(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("matrix is singular")]
    Singular,
    #[error("bad index set: {0}")]
    BadIndex(String),
    #[error("order {0} is odd, an even order is required")]
    OddOrder(usize),
    #[error("order {0} is outside 1..=16")]
    BadOrder(usize),
    #[error("a circulant needs at least one entry")]
    EmptyRow,
    #[error("search space of {space} candidates exceeds the budget of {budget}")]
    BudgetExceeded { space: String, budget: u64 },
    #[error("suite {suite} does not apply to order {order}")]
    IncompatibleSuite { suite: String, order: usize },
}
