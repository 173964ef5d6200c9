//! Construction and verification of topologically non-trivial, geometrically
//! compatible distortion fields for 2D Bravais lattices.
//!
//! The crate has five parts:
//!
//! * [`lattice`] — affine frames, the group SA(2,Z) of lattice-preserving
//!   frame changes, Lagrange-Gauss reduction, canonical representatives,
//!   and the four-system classification;
//! * [`region`] — multiply-connected bodies (a rectangle minus disjoint
//!   disks), loops, winding numbers, and grid sampling;
//! * [`field`] — the explicit multivalued distortion generator built from
//!   Gaussian-integer defect charges plus a single-valued meromorphic
//!   background, with exact branch bookkeeping;
//! * [`geometry`] — torsion of the teleparallel gauge, the Levi-Civita
//!   comparison connection, curvature residuals, and isometric rigidity;
//! * [`holonomy`] — analytic continuation along loops, Burgers/holonomy
//!   elements of SA(2,Z) in centered form, closed-form cross-checks, and
//!   argument-principle winding numbers of the derivative field.

pub mod error;
pub mod field;
pub mod geometry;
pub mod holonomy;
pub mod lattice;
pub mod math;
pub mod region;

pub use error::{FieldError, GeometryError, HolonomyError, LatticeError, RegionError};
pub use field::{
    build_coframe, displacement, immersion_failures, jacobian, validate_charge, value,
    BranchState, CutRule, DefectCharge, FieldSpec, GaussianInt, JacobianEval, MeromorphicTerm,
};
pub use geometry::{
    connections_coincide, curvature_residual, default_compatibility_tol, is_compatible,
    is_isometric, isometric_rigidity, riemann_cartan_connection, teleparallel_connection,
    torsion, CoframeField, Connection, RigidityReport, TorsionField,
};
pub use holonomy::{
    burgers_decomposition, check_residual, closed_form_holonomy, continue_along_loop,
    field_winding, verify_holonomy, BurgersDecomposition, CenteredAffine, ContinuationResult,
    HolonomyCheck,
};
pub use lattice::{
    area_split, canonical_form, classify, classify_detailed, frames_equivalent, reduce_basis,
    AffineFrame, CanonicalForm, ClassifyOutcome, LatticeClass, LatticeTransform, ReducedBasis,
};
pub use math::{IMat2, IVec2, Mat2, Vec2, INT_TOL};
pub use region::{
    sample_grid, winding_numbers, CircleSpec, Disk, GridMeta, Loop, LoopSpec, Rect, Region,
    StructuredGrid,
};

pub use num_complex::Complex64;
