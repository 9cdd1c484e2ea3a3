use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("multiplier output has imaginary part {imag:.3e} (limit {limit:.3e})")]
    SymmetryViolation { imag: f64, limit: f64 },
    #[error("band k={k} outside resolved range {min}..={max}")]
    BandOutOfRange { k: i32, min: i32, max: i32 },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid corner: {0}")]
    InvalidCorner(String),
    #[error("corners {first} and {second} are closer than {min_separation:.4}")]
    CornersTooClose {
        first: usize,
        second: usize,
        min_separation: f64,
    },
    #[error("|alpha| = {alpha:.3e} below half a grid spacing ({limit:.3e})")]
    AlphaTooSmall { alpha: f64, limit: f64 },
    #[error("under-resolved input: top-band energy fraction {0:.3}")]
    UnderResolved(f64),
    #[error("Taylor order {0} outside 1..=3")]
    TaylorOrder(usize),
    #[error("kernel table quadrature did not converge (refinement change {0:.3e})")]
    KernelNonConvergence(f64),
    #[error("alpha must be nonzero")]
    ZeroAlpha,
    #[error("band mismatch: {0}")]
    BandMismatch(String),
    #[error("regime violated: {0}")]
    Regime(String),
    #[error("time must be positive")]
    ZeroTime,
    #[error("time grid too coarse: {0}")]
    TimeGridTooCoarse(String),
    #[error("change of variables not monotone (min of 1 + dq/dx = {0:.3e})")]
    NotMonotone(f64),
    #[error("solution blew up at t = {0}")]
    BlowUp(f64),
    #[error("no clear extremum of the slope derivative near x = {0}")]
    NoExtremum(f64),
    #[error("insufficient samples for fit ({0} < 4)")]
    InsufficientSamples(usize),
    #[error("config line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },
    #[error("config field `{field}`: {msg}")]
    ConfigInvalid { field: String, msg: String },
    #[error("unknown preset `{name}`; available presets: {available}")]
    UnknownPreset { name: String, available: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: &str) -> Result<T>;
    fn with_context(self, f: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: &str) -> Result<T> {
        self.map_err(|e| e.context(context))
    }

    fn with_context(self, f: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(f()))
    }
}
