//! # renyi-core
//!
//! Sandwiched Rényi divergences and the entropic quantities built on them:
//! conditional Rényi entropy, α-Rényi mutual information and α-Holevo
//! information, plus a randomized harness that checks their structural
//! properties (positivity, data processing, monotonicity in α, convexity,
//! duality, additivity) on seeded instances.
//!
//! All logarithms are natural (nats).

#![forbid(unsafe_code)]

pub mod error;
pub mod linalg;
pub mod states;
pub mod divergence;
pub mod optimize;
pub mod harness;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianEig, NormOrder};
pub use divergence::{AlphaOrder, DivergenceValue};
pub use states::{Channel, CQState, DensityMatrix, PureState};
