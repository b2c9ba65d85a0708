//! Quantum states and channels: density matrices, tensor products, partial
//! traces, purifications, classical-quantum ensembles and seeded generators.

mod channel;
mod cq;
mod density;
pub mod random;

pub use channel::{apply_channel, Channel, COMPLETENESS_TOL};
pub use cq::{cq_embed, CQState};
pub use density::{
    partial_trace, partial_trace_matrix, permute_subsystems, purify, tensor, DensityMatrix,
    PureState, Tensor, EIGEN_FLOOR, TRACE_TOL,
};
pub use random::{random_channel, random_density};
