//! Finite discrete probability-measure-preserving groupoids, their
//! convolution algebra, invariant Markov operators and spectral radii.

pub mod constructions;
pub mod error;
pub mod files;
pub mod groupoid;
pub mod kernel;
pub mod linalg;
pub mod markov;
pub mod scalar;
pub mod selftest;
pub mod spectral;
pub mod suite;
pub mod walk;

pub use error::{Error, Result};
pub use groupoid::{FiniteGroupoid, GroupoidRef, UnitSet};
pub use kernel::{BisectionMeasure, Kernel, Orientation};
pub use markov::{assemble, BlockOperator, L2Vector, MarkovOperator, NormMethod, NormOptions};
pub use scalar::Scalar;
