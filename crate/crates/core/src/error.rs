use thiserror::Error;

#[derive(Debug, Error)]
pub enum VemError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh file line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("voronoi generation failed after {attempts} attempts: {reason}")]
    VoronoiFailed { attempts: usize, reason: String },

    #[error("cell {cell}: {msg}")]
    DegenerateCell { cell: usize, msg: String },

    #[error("singular {what} on cell {cell}")]
    SingularProjector { cell: usize, what: &'static str },

    #[error("non-finite value while evaluating {what}")]
    NonFinite { what: String },

    #[error("newton failed after {iterations} iterations, residual history {history:?}")]
    NewtonDiverged { iterations: usize, history: Vec<f64> },

    #[error("linear solver: {0}")]
    LinearSolver(String),

    #[error("config `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("time step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<VemError>,
    },

    #[error("{what}: {source}")]
    Context {
        what: String,
        #[source]
        source: Box<VemError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl VemError {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        VemError::Config { key: key.into(), msg: msg.into() }
    }

    pub fn context(self, what: impl Into<String>) -> Self {
        VemError::Context { what: what.into(), source: Box::new(self) }
    }

    /// Strips `Step` and `Context` wrappers.
    pub fn root(&self) -> &VemError {
        match self {
            VemError::Step { source, .. } | VemError::Context { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self.root(),
            VemError::NewtonDiverged { .. }
                | VemError::LinearSolver(_)
                | VemError::NonFinite { .. }
                | VemError::SingularProjector { .. }
        )
    }

    /// Process exit code: 3 for solver failures, 1 for I/O errors and 2 for
    /// everything caused by the input.
    pub fn exit_code(&self) -> i32 {
        if self.is_solver_failure() {
            3
        } else if matches!(self.root(), VemError::Io(_)) {
            1
        } else {
            2
        }
    }
}

pub type Result<T> = std::result::Result<T, VemError>;
