//! Error types for the mesh, curve, conforming and solver stages.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFiniteCoordinate,
    #[error("degenerate triangle")]
    DegenerateTriangle,
    #[error("triangle {triangle} vertex index {vertex} out of range")]
    VertexIndexOutOfRange { triangle: usize, vertex: usize },
    #[error("triangle {triangle} repeats a vertex")]
    DegenerateConnectivity { triangle: usize },
    #[error("duplicate triangle (indices {first} and {second})")]
    DuplicateTriangle { first: usize, second: usize },
    #[error("nonmanifold edge ({a}, {b}): more than two incident triangles")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("triangle {triangle} is not counterclockwise")]
    NotCounterclockwise { triangle: usize },
    #[error("degenerate bounding box")]
    DegenerateBbox,
    #[error("mesh resolution must be at least 1")]
    InvalidResolution,
}

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("a spline needs at least two points")]
    TooFewPoints,
    #[error("consecutive spline points {index} and {} coincide", index + 1)]
    RepeatedPoint { index: usize },
    #[error("vanishing tangent at parameter {s}")]
    VanishingTangent { s: f64 },
    #[error("crack step length {got} does not match delta_ell {expected}")]
    StepLengthMismatch { got: f64, expected: f64 },
    #[error("crack path self-intersects")]
    SelfIntersection,
    #[error("non-finite input point")]
    NonFinitePoint,
}

#[derive(Debug, Error)]
pub enum ConformError {
    #[error("positively cut triangle {triangle} is not acute")]
    NonAcuteCutTriangle { triangle: usize },
    #[error("curve not resolved by the mesh: {detail}; refine the background mesh")]
    RefinementNeeded { detail: String },
    #[error(
        "curve radius of curvature {r_curv:.6e} below 2 * local mesh size {h_local:.6e}; \
         refine the background mesh"
    )]
    CurvatureBound { r_curv: f64, h_local: f64 },
    #[error("conformation failed: {detail} (triangles {triangles:?})")]
    ConformationFailure { detail: String, triangles: Vec<usize> },
    #[error("crack split topology corrupted near vertex {vertex}")]
    SplitTopology { vertex: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Error)]
pub enum FemError {
    #[error("singular system: insufficient Dirichlet constraints")]
    SingularSystem,
    #[error("solver did not converge in {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("point ({x}, {y}) outside the mesh")]
    PointOutsideMesh { x: f64, y: f64 },
    #[error("point ({x}, {y}) lies on the crack; a flank hint is required")]
    FlankHintRequired { x: f64, y: f64 },
}

#[derive(Debug, Error)]
pub enum FractureError {
    #[error("evaluation at the crack tip singularity")]
    AtTip,
    #[error("extraction annulus of radius {r_q} clipped by the outer boundary")]
    AnnulusClipped { r_q: f64 },
    #[error("crack not opening (K_I = {k1:.6e} <= 0); always-propagating assumption violated")]
    CrackNotOpening { k1: f64 },
    #[error("kink ratio {ratio} too large for the first-order formula (max {max})")]
    KinkTooLarge { ratio: f64, max: f64 },
    #[error("step {step} (ell = {ell:.6}): {source}")]
    StepFailed {
        step: usize,
        ell: f64,
        #[source]
        source: Box<PipelineError>,
    },
}

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("evaluation on the crack without a flank hint")]
    FlankHintRequired,
    #[error("arc span {span} out of range (0, pi/2)")]
    SpanOutOfRange { span: f64 },
    #[error("potential solve failed: {0}")]
    SolveFailed(String),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {detail}")]
    Parse {
        path: String,
        line: usize,
        detail: String,
    },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: {detail}")]
    BadValue { key: String, detail: String },
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Umbrella error for whole-pipeline operations (propagation, CLI).
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Conform(#[from] ConformError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Fracture(#[from] FractureError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    IoFormat(#[from] IoError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
