use thiserror::Error;

/// Everything that can go wrong while building or checking the objects of a
/// scenario. The CLI maps each variant to one of three exit classes through
/// [`Error::class`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("origin not interior")]
    OriginNotInterior,
    #[error("polytope is not full-dimensional (dimension {dim} in rank {ambient})")]
    NotFullDimensional { dim: isize, ambient: usize },
    #[error("non-lattice vertex {0}")]
    NonLattice(String),
    #[error("face does not belong to the polytope")]
    ForeignFace,
    #[error("not convex; Newton polytope not faithful (wall {wall})")]
    NotConvex { wall: String },
    #[error("function is not linear on cone {cone}")]
    NotLinearOnCone { cone: String },
    #[error("cone {0} is not simplicial")]
    NotSimplicial(String),
    #[error("unknown ray {0}")]
    UnknownRay(String),
    #[error("delta not reflexive: {0}")]
    NotReflexive(String),
    #[error("Minkowski sum mismatch: {0}")]
    MinkowskiMismatch(String),
    #[error("nef value {value} outside {{0,1}} at ray {ray} for part {part}")]
    NefValue { part: usize, ray: String, value: String },
    #[error("dual nef polytope is not reflexive: {0}")]
    NablaNotReflexive(String),
    #[error("polytope {0} is not contained in the boundary of the dual polytope")]
    NotOnBoundary(String),
    #[error("not a refinement: cone {0} lies in no cone of the coarser fan")]
    NotRefinement(String),
    #[error("support mismatch: {0}")]
    SupportMismatch(String),
    #[error("slice mismatch: {0}")]
    SliceMismatch(String),
    #[error("ray at height {height}: {ray}")]
    RayHeight { ray: String, height: String },
    #[error("ray {0} at height 1 is not over a lattice point of the lifted Newton polytope")]
    RayOutsideLift(String),
    #[error("non-unimodular cone {0}")]
    NonUnimodular(String),
    #[error("fan not complete")]
    FanNotComplete,
    #[error("no strictly convex lift on this subdivision (conflicting walls: {0})")]
    NoConvexLift(String),
    #[error("cone classification failure: {0}")]
    Classification(String),
    #[error("decomposition axiom violated between cells {0} and {1}")]
    Decomposition(usize, usize),
    #[error("empty tropical sphere")]
    EmptySphere,
    #[error("not yet in polynomial range, increase k_min (mismatch at k = {k})")]
    NotPolynomial { k: i64 },
    #[error("data inconsistency: {0}")]
    Inconsistent(String),
    #[error("stability not certified at this discretization: {0}")]
    NotConverged(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    InvalidInput,
    ConditionFailed,
    NotConverged,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            NotConverged(_) => ErrorClass::NotConverged,
            RayHeight { .. } | RayOutsideLift(_) | SliceMismatch(_) | NonUnimodular(_) | NoConvexLift(_)
            | NotRefinement(_) | SupportMismatch(_) | FanNotComplete | Decomposition(..) | Classification(_)
            | EmptySphere | NotPolynomial { .. } | Inconsistent(_) => ErrorClass::ConditionFailed,
            _ => ErrorClass::InvalidInput,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
