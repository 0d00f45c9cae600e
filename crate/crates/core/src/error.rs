use thiserror::Error;

use crate::geometry::GeneralArc;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "fewer than two split radii fit above the resolution floor 2^-{max_level} ({found} found)"
    )]
    RadiiExhausted { max_level: u32, found: usize },

    #[error("derivative is not finite at cell centre {point}")]
    NonFiniteSample { point: String },

    #[error("tester polynomial has zero boundary norm")]
    ZeroTester,

    #[error("arc of length {length} is below the grid resolution {min}")]
    ArcTooSmall { length: f64, min: f64 },

    #[error("arc family exceeds the declared packing constant: observed {observed} on {worst:?}")]
    PackingViolated { worst: GeneralArc, observed: f64 },

    #[error("empty arc set")]
    EmptySet,

    #[error("no arcs to exhaust")]
    NoArcs,

    #[error("|z| = {modulus} lies outside the quadrature validity zone |z| <= {limit}")]
    TooCloseToBoundary { modulus: f64, limit: f64 },

    #[error(
        "measure is not Carleson at the scanned depth: deep ratio {deep} vs coarse ratio {coarse}"
    )]
    NotCarleson { deep: f64, coarse: f64 },

    #[error("sampled |F| = {modulus} >= 1: not a self-map of the disc")]
    NotSelfMap { modulus: f64 },

    #[error("blow-up measure specification violated: {0}")]
    SpecViolation(String),

    #[error("boundary samples are not finite")]
    NonFiniteSamples,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
