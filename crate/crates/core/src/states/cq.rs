use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Ensemble `{p_x, ρ_x}` realized as the classical-quantum state
/// `Σ_x p_x |x><x| ⊗ ρ_x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CQState {
    probabilities: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl CQState {
    pub fn new(probabilities: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probabilities.is_empty() || probabilities.len() != states.len() {
            return Err(Error::NotSimplex(format!(
                "{} probabilities for {} states",
                probabilities.len(),
                states.len()
            )));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::NotSimplex("negative probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::NotSimplex(format!("probabilities sum to {total}")));
        }
        let d = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.dim(),
            });
        }
        Ok(Self {
            probabilities,
            states,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn quantum_dim(&self) -> usize {
        self.states[0].dim()
    }
}

/// Block-diagonal state on `X ⊗ A` with subsystem dims `(k, d_A)`.
pub fn cq_embed(ensemble: &CQState) -> DensityMatrix {
    let k = ensemble.len();
    let d = ensemble.quantum_dim();
    let mut m = ComplexMatrix::zeros(k * d, k * d).into_dmatrix();
    for (x, (p, rho)) in ensemble
        .probabilities
        .iter()
        .zip(&ensemble.states)
        .enumerate()
    {
        for i in 0..d {
            for j in 0..d {
                m[(x * d + i, x * d + j)] = rho.matrix().get(i, j) * *p;
            }
        }
    }
    DensityMatrix::from_trusted(ComplexMatrix::wrap(m), vec![k, d])
}
