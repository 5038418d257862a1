use thiserror::Error;

#[derive(Debug, Error)]
pub enum SsdError {
    #[error("degenerate element {0}")]
    DegenerateElement(usize),
    #[error("curve needs at least {min} elements, got {got}")]
    TooFewElements { min: usize, got: usize },
    #[error("field length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("zero vector passed to anisotropy `{0}`")]
    ZeroVector(String),
    #[error("normal is not a unit vector (|n| = {0})")]
    NonUnitNormal(f64),
    #[error("stabilizer does not exist: gamma(-n) = {minus} >= 3 gamma(n) = {three_plus}")]
    StabilizerDoesNotExist { minus: f64, three_plus: f64 },
    #[error("no admissible stabilizer up to alpha = {0}")]
    StabilizerSearchExhausted(f64),
    #[error("anisotropy `{name}` fails the Euler identity: residual {residual:e}")]
    EulerIdentity { name: String, residual: f64 },
    #[error("unknown anisotropy `{0}`")]
    UnknownAnisotropy(String),
    #[error("degenerate chord between c = {0} and c = {1}")]
    DegenerateChord(f64, f64),
    #[error("quadrature did not converge on [{a}, {b}] (estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },
    #[error("substrate parameterization derivative vanishes at u = {0}")]
    VanishingDerivative(f64),
    #[error("arclength tolerance {target:e} unreachable; achieved {achieved:e} with {samples} samples")]
    ReparameterizationTolerance { target: f64, achieved: f64, samples: usize },
    #[error("singular linear system (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("picard iteration did not converge in {iterations} iterations (last displacement {displacement:e})")]
    NoConvergence { iterations: usize, displacement: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("attachment violated: {0}")]
    Attachment(String),
    #[error("ambiguous substrate projection of ({x}, {y})")]
    AmbiguousProjection { x: f64, y: f64 },
    #[error("film polygon self-intersects (edges {0} and {1})")]
    SelfIntersection(usize, usize),
    #[error("offset film degenerates: thickness {thickness} exceeds local curvature radius {radius}")]
    OffsetDegenerate { thickness: f64, radius: f64 },
    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<SsdError>,
    },
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("I/O error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("output directory {0} is locked by another run")]
    Locked(String),
}

pub type Result<T, E = SsdError> = std::result::Result<T, E>;
