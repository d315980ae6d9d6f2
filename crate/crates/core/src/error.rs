use num::BigRational;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Axiom that a multiplication table failed to satisfy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupAxiom {
    NotSquare { row: usize },
    OutOfRange { row: usize, col: usize },
    NoIdentity,
    NoInverse { element: usize },
    NotAssociative { a: usize, b: usize, c: usize },
}

impl std::fmt::Display for GroupAxiom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupAxiom::NotSquare { row } => write!(f, "row {row} has the wrong length"),
            GroupAxiom::OutOfRange { row, col } => write!(f, "entry ({row},{col}) is out of range"),
            GroupAxiom::NoIdentity => write!(f, "no two-sided identity"),
            GroupAxiom::NoInverse { element } => write!(f, "element {element} has no inverse"),
            GroupAxiom::NotAssociative { a, b, c } => {
                write!(f, "({a}*{b})*{c} != {a}*({b}*{c})")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("units in class {class} carry different weights")]
    UnequalClassWeights { class: usize },
    #[error("duplicate unit id `{0}`")]
    DuplicateUnit(String),
    #[error("duplicate arrow id `{0}`")]
    DuplicateArrow(String),
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("unit `{0}` has non-positive weight")]
    NonPositiveWeight(String),
    #[error("unit `{0}` has no identity arrow")]
    MissingIdentity(String),
    #[error("not a group: {0}")]
    NotAGroup(GroupAxiom),
    #[error("disjoint union of zero groupoids")]
    EmptyUnion,
    #[error("scale of part {0} is not positive")]
    NonPositiveScale(usize),
    #[error("unit set has measure zero")]
    NullSet,
    #[error("unit index {0} out of range")]
    UnitOutOfRange(usize),
    #[error("{count} full bisections exceed the enumeration bound {bound}")]
    TooManyBisections { count: String, bound: usize },
    #[error("arrow set is not a bisection")]
    NotABisection,
    #[error("bisection {0} is not full")]
    NotFull(usize),
    #[error("bisection weights must be non-negative and sum to 1 (sum is {0})")]
    BadBisectionWeights(BigRational),
    #[error("not a field of probability measures: fiber over unit {unit} sums to {sum}")]
    NotAField { unit: usize, sum: String },
    #[error("negative or non-real value on arrow {0}")]
    NegativeValue(usize),
    #[error("kernel is not symmetric at arrow {0}")]
    NonSymmetric(usize),
    #[error("objects live on different groupoids")]
    GroupoidMismatch,
    #[error("groupoid is not a single full equivalence class of size {0}")]
    NotFullRelation(usize),
    #[error("matrix shape does not match {0} units")]
    MatrixShape(usize),
    #[error("operation requires a probability measure on the units (total mass is {0})")]
    NotProbabilityMeasure(BigRational),
    #[error("dense block of size {size} exceeds the cap {cap}")]
    DenseTooLarge { size: usize, cap: usize },
    #[error("power iteration did not converge after {max_iter} iterations (best lower bound {lower_bound})")]
    NoConvergence { max_iter: usize, lower_bound: f64 },
    #[error("sequence too short for extrapolation ({0} terms, need 3)")]
    TooShort(usize),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("ball has {vertices} vertices, above the cap {cap}")]
    BallTooLarge { vertices: u128, cap: u128 },
    #[error("invalid groupoid: {0}")]
    InvalidGroupoid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnequalClassWeights { .. } => "UnequalClassWeights",
            Error::DuplicateUnit(_) => "DuplicateUnit",
            Error::DuplicateArrow(_) => "DuplicateArrow",
            Error::UnknownUnit(_) => "UnknownUnit",
            Error::UnknownArrow(_) => "UnknownArrow",
            Error::NonPositiveWeight(_) => "NonPositiveWeight",
            Error::MissingIdentity(_) => "MissingIdentity",
            Error::NotAGroup(_) => "NotAGroup",
            Error::EmptyUnion => "EmptyUnion",
            Error::NonPositiveScale(_) => "NonPositiveScale",
            Error::NullSet => "NullSet",
            Error::UnitOutOfRange(_) => "UnitOutOfRange",
            Error::TooManyBisections { .. } => "TooManyBisections",
            Error::NotABisection => "NotABisection",
            Error::NotFull(_) => "NotFull",
            Error::BadBisectionWeights(_) => "BadBisectionWeights",
            Error::NotAField { .. } => "NotAField",
            Error::NegativeValue(_) => "NegativeValue",
            Error::NonSymmetric(_) => "NonSymmetric",
            Error::GroupoidMismatch => "GroupoidMismatch",
            Error::NotFullRelation(_) => "NotFullRelation",
            Error::MatrixShape(_) => "MatrixShape",
            Error::NotProbabilityMeasure(_) => "NotProbabilityMeasure",
            Error::DenseTooLarge { .. } => "DenseTooLarge",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::TooShort(_) => "TooShort",
            Error::BadParameters(_) => "BadParameters",
            Error::BallTooLarge { .. } => "BallTooLarge",
            Error::InvalidGroupoid(_) => "InvalidGroupoid",
            Error::Parse(_) => "Parse",
        }
    }
}
