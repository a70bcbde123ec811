use thiserror::Error;

/// Errors produced by the library. Work-budget exhaustion is a first-class
/// variant so callers can distinguish "don't know" from "no".
#[derive(Error, Debug)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field degrees must be positive")]
    ZeroDegree,
    #[error("field too large: p^(a*m) must fit in 63 bits")]
    FieldTooLarge,
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("factoring {n} exceeded the trial-division cutoff {cutoff}")]
    FactorizationCutoff { n: u128, cutoff: u64 },
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("generator matrix is not basic (invariant factor {factor} != 1)")]
    NotBasic { factor: String },
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("coordinate set is empty or out of range")]
    BadCoordinateSet,
    #[error("sum-rank layout g*r = {gr} does not match vector length {len}")]
    LayoutMismatch { gr: usize, len: usize },
    #[error("work budget exceeded: used more than {limit} operations")]
    BudgetExceeded { limit: u64 },
    #[error("local field too small: q = {q} < r + partial_distance - 1 = {needed}")]
    FieldTooSmall { q: u64, needed: u64 },
    #[error("outer code length {n} is not g*r = {gr}")]
    BadOuterLength { n: usize, gr: usize },
    #[error("degree {delta} is not divisible by N - k = {corank}")]
    DegreeNotDivisible { delta: usize, corank: usize },
    #[error("matching system for the parity coefficients is unsolvable after {retries} seeds")]
    MatchingUnsolvable { retries: usize },
    #[error("constructed code has degree {got}, expected {expected}")]
    WrongDegree { expected: usize, got: usize },
    #[error("operation requires a non-catastrophic code")]
    Catastrophic,
    #[error("operation requires G0 (the degree-0 generator coefficient) to be full rank")]
    G0NotFullRank,
    #[error("erasure position ({t}, {coord}) is out of range")]
    ErasureOutOfRange { t: usize, coord: usize },
    #[error("group {group} at time {t} has {have} erasures, local code corrects at most {max}")]
    TooManyErasuresInGroup { group: usize, t: usize, have: usize, max: usize },
    #[error("window system is ambiguous (non-unique solution)")]
    AmbiguousSystem,
    #[error("window system is inconsistent (stream is not a codeword)")]
    InconsistentSystem,
    #[error("prefix block {t} contains unknown symbols")]
    UnknownPrefix { t: usize },
    #[error("repair stalled at block {t}: no window up to j = {j_max} is correctable")]
    RepairStalled { t: usize, j_max: usize },
    #[error("no run of {mu} consecutive erasure-free blocks exists")]
    NoCleanAnchor { mu: usize },
    #[error("tail-biting requires more blocks than the memory ({t} <= {mu})")]
    StreamTooShort { t: usize, mu: usize },
    #[error("unsupported: unequal localities")]
    UnequalLocalities,
    #[error("selection removes {removed} coordinates from group {group}, at most {max} allowed")]
    BadSelection { group: usize, removed: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
