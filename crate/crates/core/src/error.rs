//! Error types, one enum per subsystem.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("basis is not positively oriented (det = {det:.6e})")]
    NotPositivelyOriented { det: f64 },
    #[error("degenerate basis (det = {det:.3e} below threshold for scale {scale:.3e})")]
    DegenerateBasis { det: f64, scale: f64 },
    #[error("frame contains non-finite entries")]
    NonFinite,
    #[error("ill-conditioned basis: condition number {cond:.3e} exceeds limit {limit:.1e}")]
    IllConditioned { cond: f64, limit: f64 },
    #[error("unimodular part must have determinant +1, got {det}")]
    NotUnimodular { det: i64 },
    #[error("basis reduction failed to terminate")]
    ReductionStalled,
}

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("outer rectangle is empty or inverted")]
    EmptyOuter,
    #[error("puncture {index} has non-positive radius")]
    BadRadius { index: usize },
    #[error("puncture {index} is not strictly inside the outer rectangle (margin {margin:.6e})")]
    NotContained { index: usize, margin: f64 },
    #[error("punctures {first} and {second} overlap (gap {gap:.6e})")]
    Overlap { first: usize, second: usize, gap: f64 },
    #[error("loop has fewer than 3 distinct points")]
    DegenerateLoop,
    #[error("loop point {index} lies outside the region or below clearance")]
    LoopPointOutside { index: usize },
    #[error("loop segment {segment} intersects puncture {puncture}")]
    LoopHitsPuncture { segment: usize, puncture: usize },
    #[error("winding sum {turns:.9} around puncture {puncture} is not an integer (residual {residual:.3e} turns)")]
    NonIntegerWinding {
        puncture: usize,
        turns: f64,
        residual: f64,
    },
    #[error("grid spacing must be positive, got {h}")]
    BadSpacing { h: f64 },
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("|a|^2 - |b|^2 must equal 1, got {got}")]
    UnitNormCondition { got: i64 },
    #[error("c + d = ({re}, {im}) is not a Gaussian integer within tolerance")]
    NonIntegerSum { re: f64, im: f64 },
    #[error("charge {index} has non-finite parameters")]
    NonFiniteCharge { index: usize },
    #[error("charge {index} center is not strictly inside any puncture")]
    ChargeOutsidePunctures { index: usize },
    #[error("punctures {first} and {second} both claimed by charge {index}")]
    AmbiguousPuncture {
        index: usize,
        first: usize,
        second: usize,
    },
    #[error("puncture {puncture} hosts more than one charge")]
    DuplicateCharge { puncture: usize },
    #[error("puncture {puncture} hosts neither a charge nor a pole")]
    EmptyPuncture { puncture: usize },
    #[error("pole term {term} (order {order}) is not centered inside a puncture")]
    PoleOutsidePunctures { term: usize, order: i32 },
    #[error("evaluation point ({x}, {y}) lies inside puncture {puncture}")]
    InsidePuncture { x: f64, y: f64, puncture: usize },
    #[error("evaluation point ({x}, {y}) coincides with a singular center")]
    AtSingularity { x: f64, y: f64 },
    #[error("branch state has {got} entries, expected {expected}")]
    BranchLength { got: usize, expected: usize },
    #[error(transparent)]
    Region(#[from] RegionError),
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("no interior grid point has a full stencil")]
    EmptyResult,
    #[error("grids do not match ({left} vs {right})")]
    GridMismatch { left: String, right: String },
    #[error("coframe CSV parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },
    #[error("grid spacing must be positive, got {h}")]
    BadSpacing { h: f64 },
    #[error("coframe matrix at ({x}, {y}) is singular")]
    SingularCoframe { x: f64, y: f64 },
}

#[derive(Debug, Error)]
pub enum HolonomyError {
    #[error("argument step bound could not be met near point {index} (loop too close to a defect center)")]
    StepBound { index: usize },
    #[error("net turn count {turns:.9} for defect {defect} is not an integer (residual {residual:.3e})")]
    NonIntegerTurns {
        defect: usize,
        turns: f64,
        residual: f64,
    },
    #[error("winding of the derivative field is indeterminate: {reason}")]
    IndeterminateWinding { reason: String },
    #[error("centered element does not convert to a lattice transform: translation ({x}, {y}) is not integral")]
    NonIntegralAnchor { x: f64, y: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Region(#[from] RegionError),
}
