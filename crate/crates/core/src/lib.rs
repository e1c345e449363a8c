//! Sparsely activated one-hidden-layer ReLU networks on the Boolean hypercube.
//!
//! The crate covers the hypothesis class itself ([`network`]), explicit
//! constructions ([`constructions`]), exact Fourier and sensitivity analysis
//! ([`fourier`]), closed-form bound evaluators ([`bounds`]), two learners
//! ([`learners`]) and an empirical Rademacher-complexity harness
//! ([`rademacher`]).

pub mod bounds;
pub mod constructions;
mod error;
pub mod fourier;
pub mod hypercube;
pub mod learners;
pub mod network;
pub mod rademacher;
pub mod seed;

pub use bounds::{BoundValue, ClassParams, FormulaId};
pub use constructions::{JuntaSpec, LiftedPoint};
pub use error::{Error, Result};
pub use fourier::{CubeFunction, McEstimate, Spectrum};
pub use hypercube::{character, CubePoint, Subset};
pub use learners::{GeneralizedDecisionList, LabeledSample, LossReport, MonomialModel, Predictor};
pub use network::{ActivationSet, ScaleParams, SparseNet, SparsityMode, SparsityReport};
pub use rademacher::{HypothesisPool, RademacherEstimate, RademacherMode};
