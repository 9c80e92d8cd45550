use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape {shape:?} needs {expected} entries, got {got}")]
    ShapeData {
        shape: Vec<usize>,
        expected: usize,
        got: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("axis {axis} out of range for rank {rank}")]
    AxisOutOfRange { axis: usize, rank: usize },
    #[error("axis {0} repeated")]
    RepeatedAxis(usize),
    #[error("expected a rank-{expected} tensor, got rank {got}")]
    Rank { expected: usize, got: usize },
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown model family `{0}`")]
    UnknownFamily(String),
    #[error("missing required parameter `{0}`")]
    MissingParam(String),
    #[error("{what} {index} out of range (valid: {lo}..={hi})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        lo: usize,
        hi: usize,
    },
    #[error("observable norm {norm:.6} exceeds 1")]
    ObservableNorm { norm: f64 },
    #[error("expectation value has imaginary part {0:.3e} for a Hermitian observable")]
    ComplexExpectation(f64),
    #[error("state norm collapsed to {0:e} during evolution; check the beta/dt schedule")]
    NormCollapse(f64),
    #[error("dt refinement did not converge after {halvings} halvings (last change {last_change:.3e})")]
    DtNotConverged { halvings: usize, last_change: f64 },
    #[error("accuracy {epsilon:e} unreachable: reference error floor is {floor:e}")]
    Unreachable { epsilon: f64, floor: f64 },
    #[error("dense size {size} exceeds the cap {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("Schmidt spectrum too short for delta {delta:e}: raise chi_max above {len}")]
    SpectrumTooShort { delta: f64, len: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("malformed state file: {0}")]
    Format(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
