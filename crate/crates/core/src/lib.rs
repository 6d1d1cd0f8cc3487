//! Exact computation and validation of Zariski-type decompositions, and the
//! minimal model program guided by them, on surface intersection lattices and
//! simplicial toric varieties.

pub mod decomp;
pub mod divisor;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod mmp;
pub mod model;
pub mod rational;
pub mod surface;
pub mod toric;

pub use decomp::{DecompositionKind, ValidationReport, WeakDecomposition};
pub use divisor::{Boundary, RationalDivisor};
pub use error::{Error, Result};
pub use mmp::{MMPStep, MMPTrace, Mode, Outcome, Target};
pub use model::{Model, Pair};
pub use rational::Rational;
pub use surface::SurfaceModel;
pub use toric::{InvariantCurve, ToricVariety};
