use thiserror::Error;

pub type Result<T, E = ZneError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ZneError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("qubit index {qubit} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("measure must be the final instruction and may appear only once")]
    MeasureNotLast,

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("segment contains a measurement and cannot be inverted")]
    ContainsMeasurement,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("qubits {0} and {1} are not coupled on this device")]
    NoCoupling(usize, usize),

    #[error("calibration data: {0}")]
    Calibration(String),

    #[error("{what} supports at most {max} qubits, got {got}")]
    TooManyQubits {
        what: &'static str,
        max: usize,
        got: usize,
    },

    #[error("circuit needs {needed} qubits but the device has {available}")]
    DeviceTooSmall { needed: usize, available: usize },

    #[error("no path between physical qubits {0} and {1}")]
    Unroutable(usize, usize),

    #[error("gate on uncoupled pair ({0}, {1}) in a circuit that must be topology-conformant")]
    NonConformant(usize, usize),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("ill-conditioned fit (condition estimate {0:.3e})")]
    IllConditioned(f64),

    #[error("bitstring width {got} does not match expected {expected}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<ZneError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl ZneError {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        match self {
            e @ ZneError::Stage { .. } => e,
            e => ZneError::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| ZneError::File {
        path: path.to_path_buf(),
        source,
    })
}
