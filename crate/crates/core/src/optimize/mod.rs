//! Optimization over density matrices and the entropic quantities defined
//! through it: conditional Rényi entropy, primal and dual Rényi mutual
//! information, the two-player minimax value, and an α-Holevo estimator.
//!
//! States are parametrized as `σ = LL†/tr(LL†)` with `L` lower triangular,
//! and minimized by BFGS on central-difference gradients with multi-start.

mod bfgs;
mod entropies;
mod holevo;
mod minimax;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::random::{complex_gaussian, rng_from_seed, stream_seed};
use crate::states::DensityMatrix;

pub(crate) use bfgs::Smooth;
pub use entropies::{conditional_renyi_entropy, mutual_info_dual, mutual_info_primal, mutual_info_primal_from};
pub use holevo::{holevo_alpha, holevo_alpha_seeded, holevo_information, Ensemble, HolevoResult};
pub use minimax::{
    minimax_objective, minimax_value, minimax_value_restricted, MinimaxOrder, MinimaxResult, Player,
};

/// Smallest eigenvalue below which an optimizer result is flagged as lying
/// on the boundary of the state space.
pub const BOUNDARY_EIGENVALUE: f64 = 1e-6;

/// Mixing weight with `I/d` applied to warm starts before factorization.
const WARM_REGULARIZATION: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub grad_eps: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 2000,
            step_init: 0.1,
            grad_eps: 1e-6,
            tol: 1e-9,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.step_init > 0.0) || !self.step_init.is_finite() {
            return bad("step_init must be positive");
        }
        if !(self.grad_eps > 0.0) || !self.grad_eps.is_finite() {
            return bad("grad_eps must be positive");
        }
        if !(self.tol > 0.0 && self.tol < 1e-3) {
            return bad("tol must lie in (0, 1e-3)");
        }
        Ok(())
    }

    pub(crate) fn bfgs(&self) -> bfgs::BfgsSettings {
        bfgs::BfgsSettings {
            max_iters: self.max_iters,
            step_init: self.step_init,
            grad_eps: self.grad_eps,
            tol: self.tol,
            stall_window: bfgs::STALL_WINDOW,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Min => 1.0,
            Direction::Max => -1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizerResult {
    pub value: f64,
    pub argopt: DensityMatrix,
    pub converged: bool,
    pub iterations: usize,
    /// Index of the restart that produced the reported value.
    pub restart: usize,
    /// `λ_min(argopt)` fell below [`BOUNDARY_EIGENVALUE`].
    pub on_boundary: bool,
    /// Restarts abandoned because the objective returned NaN.
    pub aborted_restarts: usize,
}

/// Real coordinates of a lower-triangular factor: `d` diagonal entries, then
/// `(re, im)` for each strictly lower entry in row-major order.
pub(crate) fn param_count(dim: usize) -> usize {
    dim * dim
}

pub(crate) fn factor_from_params(dim: usize, x: &[f64]) -> ComplexMatrix {
    let mut l = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let mut k = dim;
    for i in 0..dim {
        l[(i, i)] = Complex64::new(x[i], 0.0);
        for j in 0..i {
            l[(i, j)] = Complex64::new(x[k], x[k + 1]);
            k += 2;
        }
    }
    ComplexMatrix::wrap(l)
}

/// `LL†/tr(LL†)`; `None` for the zero factor.
pub(crate) fn density_from_params(dim: usize, x: &[f64]) -> Option<DensityMatrix> {
    let l = factor_from_params(dim, x);
    let a = (&l * &l.adjoint()).hermitian_part();
    let tr = a.trace().re;
    if !(tr > 0.0) || !tr.is_finite() {
        return None;
    }
    Some(DensityMatrix::from_trusted(a.scale(1.0 / tr), vec![dim]))
}

/// Parameters of the Cholesky factor of `(1-ε)σ + ε I/d`.
pub(crate) fn params_from_density(sigma: &DensityMatrix) -> Vec<f64> {
    let d = sigma.dim();
    let eps = WARM_REGULARIZATION;
    let reg = &sigma.matrix().scale(1.0 - eps) + &ComplexMatrix::identity(d).scale(eps / d as f64);
    let chol = reg
        .into_dmatrix()
        .cholesky()
        .expect("regularized state is positive definite");
    let l = chol.l();
    let mut x = vec![0.0; param_count(d)];
    let mut k = d;
    for i in 0..d {
        x[i] = l[(i, i)].re;
        for j in 0..i {
            x[k] = l[(i, j)].re;
            x[k + 1] = l[(i, j)].im;
            k += 2;
        }
    }
    x
}

pub(crate) fn random_params<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut x = Vec::with_capacity(param_count(dim));
    for _ in 0..dim {
        x.push(complex_gaussian(rng).re);
    }
    for _ in 0..dim * (dim - 1) / 2 {
        let z = complex_gaussian(rng);
        x.push(z.re);
        x.push(z.im);
    }
    x
}

struct DensityObjective<'a, F> {
    objective: &'a F,
    dim: usize,
    sign: f64,
}

impl<F: Fn(&DensityMatrix) -> f64> Smooth for DensityObjective<'_, F> {
    fn value(&mut self, x: &[f64]) -> f64 {
        match density_from_params(self.dim, x) {
            Some(sigma) => self.sign * (self.objective)(&sigma),
            None => f64::INFINITY,
        }
    }
}

struct RestartOutcome {
    value: f64,
    argopt: DensityMatrix,
    converged: bool,
    iterations: usize,
}

/// Best value of `objective` over density matrices of dimension `dim`.
pub fn optimize_over_density<F>(
    objective: F,
    dim: usize,
    direction: Direction,
    config: &OptimizerConfig,
) -> Result<OptimizerResult>
where
    F: Fn(&DensityMatrix) -> f64 + Sync,
{
    optimize_over_density_from(objective, dim, direction, config, &[])
}

/// [`optimize_over_density`] whose first restarts begin at the given states;
/// the remaining `config.restarts - warm.len()` restarts are random.
pub fn optimize_over_density_from<F>(
    objective: F,
    dim: usize,
    direction: Direction,
    config: &OptimizerConfig,
    warm: &[DensityMatrix],
) -> Result<OptimizerResult>
where
    F: Fn(&DensityMatrix) -> f64 + Sync,
{
    optimize_with_settings(objective, dim, direction, config, warm, &config.bfgs())
}

/// [`optimize_over_density_from`] with explicit BFGS settings.
pub(crate) fn optimize_with_settings<F>(
    objective: F,
    dim: usize,
    direction: Direction,
    config: &OptimizerConfig,
    warm: &[DensityMatrix],
    settings: &bfgs::BfgsSettings,
) -> Result<OptimizerResult>
where
    F: Fn(&DensityMatrix) -> f64 + Sync,
{
    config.validate()?;
    if dim == 0 {
        return Err(Error::InvalidConfig("dimension must be positive".into()));
    }
    if let Some(w) = warm.iter().find(|w| w.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: w.dim(),
        });
    }
    let restarts = config.restarts.max(warm.len());
    let sign = direction.sign();
    let run = |r: usize| -> Option<RestartOutcome> {
        let x0 = match warm.get(r) {
            Some(w) => params_from_density(w),
            None => random_params(dim, &mut rng_from_seed(stream_seed(config.seed, r as u64))),
        };
        let mut f = DensityObjective {
            objective: &objective,
            dim,
            sign,
        };
        let out = bfgs::minimize(&mut f, x0, settings)?;
        let argopt = density_from_params(dim, &out.x)?;
        Some(RestartOutcome {
            value: out.value,
            argopt,
            converged: out.converged,
            iterations: out.iterations,
        })
    };
    let outcomes: Vec<Option<RestartOutcome>> = (0..restarts).into_par_iter().map(run).collect();
    let aborted = outcomes.iter().filter(|o| o.is_none()).count();
    let (restart, best) = outcomes
        .into_iter()
        .enumerate()
        .filter_map(|(i, o)| o.map(|o| (i, o)))
        .filter(|(_, o)| !o.value.is_nan())
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .ok_or(Error::ObjectiveNan)?;
    let on_boundary = best.argopt.min_eigenvalue() < BOUNDARY_EIGENVALUE;
    Ok(OptimizerResult {
        value: sign * best.value,
        argopt: best.argopt,
        converged: best.converged,
        iterations: best.iterations,
        restart,
        on_boundary,
        aborted_restarts: aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{sandwiched_renyi, AlphaOrder};
    use crate::states::random::random_density;

    #[test]
    fn parametrization_round_trip() {
        let rho = random_density(3, 3, 5).unwrap();
        let back = density_from_params(3, &params_from_density(&rho)).unwrap();
        assert!((back.matrix() - rho.matrix()).max_abs() < 1e-7);
        assert_eq!(param_count(3), random_params(3, &mut rng_from_seed(0)).len());
    }

    #[test]
    fn linear_objective_reaches_vertex() {
        let m = ComplexMatrix::from_diagonal(&[1.0, 2.0]);
        let r = optimize_over_density(
            |s: &DensityMatrix| (s.matrix() * &m).trace().re,
            2,
            Direction::Min,
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
        assert!((r.argopt.matrix() - DensityMatrix::basis(2, 0).matrix()).max_abs() < 1e-6);
        assert!(r.on_boundary);
        let r = optimize_over_density(
            |s: &DensityMatrix| (s.matrix() * &m).trace().re,
            2,
            Direction::Max,
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn divergence_minimized_at_first_argument() {
        let rho = random_density(2, 2, 21).unwrap();
        for a in [0.5, 2.0] {
            let r = optimize_over_density(
                |s: &DensityMatrix| sandwiched_renyi(&rho, s, AlphaOrder::Finite(a)).unwrap().value,
                2,
                Direction::Min,
                &OptimizerConfig::with_seed(3),
            )
            .unwrap();
            assert!(r.value.abs() < 1e-9, "{}", r.value);
            assert!(r.converged);
            assert!((r.argopt.matrix() - rho.matrix()).max_abs() < 1e-6);
        }
    }

    #[test]
    fn nan_objective_is_reported() {
        let r = optimize_over_density(|_: &DensityMatrix| f64::NAN, 2, Direction::Min, &OptimizerConfig::default());
        assert_eq!(r.unwrap_err(), Error::ObjectiveNan);
    }

    #[test]
    fn warm_start_is_restart_zero() {
        let rho = random_density(2, 2, 2).unwrap();
        let cfg = OptimizerConfig {
            restarts: 1,
            ..OptimizerConfig::default()
        };
        let r = optimize_over_density_from(
            |s: &DensityMatrix| sandwiched_renyi(&rho, s, AlphaOrder::Finite(2.0)).unwrap().value,
            2,
            Direction::Min,
            &cfg,
            &[rho.clone()],
        )
        .unwrap();
        assert_eq!(r.restart, 0);
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn reproducible() {
        let rho = random_density(3, 2, 8).unwrap();
        let f = |s: &DensityMatrix| sandwiched_renyi(&rho, s, AlphaOrder::Finite(1.5)).unwrap().value;
        let a = optimize_over_density(f, 3, Direction::Min, &OptimizerConfig::with_seed(11)).unwrap();
        let b = optimize_over_density(f, 3, Direction::Min, &OptimizerConfig::with_seed(11)).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.argopt, b.argopt);
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::default();
        assert!(c.validate().is_ok());
        c.tol = 1e-2;
        assert!(c.validate().is_err());
        c = OptimizerConfig {
            restarts: 0,
            ..OptimizerConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
