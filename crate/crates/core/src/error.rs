use thiserror::Error;

/// Errors produced while building circuits or evaluating path decompositions.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "gate in layer {layer} on particle {particle} is not unitary (max deviation {deviation:e})"
    )]
    NonUnitaryGate {
        layer: usize,
        particle: usize,
        deviation: f64,
    },

    #[error("duplicate phase gate on pair ({a}, {b}) in layer {layer}")]
    DuplicatePhasePair { layer: usize, a: usize, b: usize },

    #[error("particle index {index} out of range for a {particles}-particle circuit")]
    BadParticleIndex { index: usize, particles: usize },

    #[error("phase gate pair ({a}, {b}) must name two distinct particles in ascending order")]
    InvalidPair { a: usize, b: usize },

    #[error("non-finite value in layer {layer}: {what}")]
    NonFinite { layer: usize, what: String },

    #[error("circuit must have at least one particle")]
    NoParticles,

    #[error("malformed circuit file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("layer {layer} out of range (circuit has {layers} layers)")]
    LayerOutOfRange { layer: usize, layers: usize },

    #[error("path enumeration needs at least one layer")]
    ZeroLayers,

    #[error("path has {found} layers, expected {expected}")]
    PathLength { expected: usize, found: usize },

    #[error("paths end at different modes ({0} vs {1})")]
    EndpointMismatch(u8, u8),

    #[error("invalid mode {0}; particles have modes 0 and 1")]
    InvalidMode(u8),

    #[error("particle {controller} is not a member of phase gate pair ({a}, {b})")]
    ControllerNotInPair {
        controller: usize,
        a: usize,
        b: usize,
    },

    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),

    #[error("conditioning set overlaps the external system at particle {0}")]
    OverlappingParticles(usize),

    #[error("operation requires a {expected}-particle circuit, got {found}")]
    ParticleCount { expected: usize, found: usize },

    #[error("{particles} particles exceeds the state-vector limit of {limit}")]
    TooManyParticles { particles: usize, limit: usize },

    #[error("path budget exceeded: {required} combinations requested, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("layer {layer} phase gate is not in controlled-phase form diag(1,1,1,e^iθ); normalize first")]
    NotControlledPhaseForm { layer: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("pair sum has imaginary residue {residue:e}")]
    NonRealResidue { residue: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Process exit status for the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 3,
            Error::NonRealResidue { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
