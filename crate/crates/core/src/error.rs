use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh request: {0}")]
    InvalidMesh(String),

    #[error("unsupported discretization: {0}")]
    Unsupported(String),

    #[error("degenerate element geometry (|det J| = {0:e})")]
    DegenerateGeometry(f64),

    #[error("point {0:?} lies outside the domain")]
    OutsideDomain([f64; 3]),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index ({row}, {col}) out of range for a {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error(
        "singular stabilization: the upwind parameter vanishes on {faces} one-phase face(s); \
         use the generalized policy (tau = gamma on degenerate faces) instead"
    )]
    SingularStabilization { faces: usize },

    #[error("singular local block on element {element} (tau range [{tau_min:e}, {tau_max:e}])")]
    SingularLocalBlock {
        element: usize,
        tau_min: f64,
        tau_max: f64,
    },

    #[error("mesh skeleton does not align with the one-phase/two-phase interface")]
    InterfaceMisaligned,

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("monolithic assembly limited to {limit} elements, mesh has {elements}")]
    SizeGuard { limit: usize, elements: usize },

    #[error("region {0} is not element-aligned")]
    RegionNotAligned(String),

    #[error("post-processing refused on element {0}: it touches the degenerate region")]
    PostProcessRefused(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that stem from a bad request rather than a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidMesh(_)
                | Error::Unsupported(_)
                | Error::SingularStabilization { .. }
                | Error::InterfaceMisaligned
                | Error::UnknownCase(_)
                | Error::InvalidParameter(_)
                | Error::SizeGuard { .. }
                | Error::RegionNotAligned(_)
                | Error::Config(_)
                | Error::Json(_)
        )
    }
}
