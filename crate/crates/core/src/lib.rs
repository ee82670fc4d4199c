pub mod error;
pub mod symbol;
pub mod toeplitz;
pub mod measure;
pub mod mixing;
pub mod dimension;
pub mod sampler;
pub mod lcs;
pub mod selftest;

pub use error::{Error, Result};
pub use measure::{Cylinder, CylinderPair, Measure, RatioReport};
pub use mixing::{FiniteWindowPsi, PsiBoundReport, UpperBound};
pub use dimension::{DimensionEstimate, SnqTable};
pub use lcs::{LcsExperiment, LcsExperimentRow};
pub use sampler::BinarySequence;
pub use symbol::{Side, Symbol, TailSum};
pub use toeplitz::ComplexMatrix;
