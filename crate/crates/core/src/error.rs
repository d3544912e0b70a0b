use thiserror::Error;

/// Errors raised by the engines and checks in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("region has no sites")]
    EmptyRegion,
    #[error("invalid region spec `{0}` (expected `square:<n>` or `sites:<path>`)")]
    RegionSpec(String),
    #[error("malformed site list line {line}: `{text}`")]
    SiteList { line: usize, text: String },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{spins} spins exceeds the enumeration cap of {cap}")]
    EnumerationCap { spins: usize, cap: usize },
    #[error("transfer matrix needs a full rectangle with nearest-neighbour bonds")]
    NotRectangular,
    #[error("strip width {width} exceeds the transfer-matrix cap of {cap}; use the Monte Carlo engine")]
    WidthCap { width: usize, cap: usize },
    #[error("region of {spins} spins is beyond exact-engine capacity; use the Monte Carlo engine")]
    ExactCapacity { spins: usize },
    #[error("beta = inf has no finite free energy; use the ground-state engine")]
    InfiniteBeta,
    #[error("cumulant order {order} exceeds the cap of {cap}")]
    CumulantOrder { order: usize, cap: usize },
    #[error("quadrature mode integrates at most {cap} probe sites, got {given}")]
    TooManyProbes { given: usize, cap: usize },
    #[error("block is not contained in the region")]
    BlockOutsideRegion,
    #[error("tuple is empty")]
    EmptyTuple,
    #[error("site {0:?} is not in the region")]
    UnknownSite((i32, i32)),
    #[error("coupling from the past did not coalesce within {budget} sweeps")]
    CoalescenceBudget { budget: u64 },
    #[error("unknown selector `{name}`; valid selectors: {valid}")]
    UnknownSelector { name: String, valid: String },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
