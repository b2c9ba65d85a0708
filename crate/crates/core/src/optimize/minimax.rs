use serde::{Deserialize, Serialize};

use super::{optimize_over_density_from, Direction, OptimizerConfig};
use crate::divergence::AlphaOrder;
use crate::error::{Error, Result};
use crate::linalg::{psd_eig, schatten_norm, ComplexMatrix, NormOrder};
use crate::states::{partial_trace, partial_trace_matrix, DensityMatrix};

const MAX_ROUNDS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinimaxOrder {
    /// `inf_σ sup_τ f(σ, τ)`
    InfSup,
    /// `sup_τ inf_σ f(σ, τ)`
    SupInf,
}

/// Feasible set of one player: all density matrices, or a single point.
#[derive(Clone, Debug)]
pub enum Player {
    Free,
    Fixed(DensityMatrix),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimaxResult {
    pub value: f64,
    pub sigma: DensityMatrix,
    pub tau: DensityMatrix,
    pub rounds: usize,
    pub converged: bool,
}

/// `f(σ, τ) = tr[ρ_BC (σ^{-1/α'} ⊗ τ^{1/α'})]`.
pub fn minimax_objective(
    rho_bc: &DensityMatrix,
    alpha: AlphaOrder,
    sigma: &DensityMatrix,
    tau: &DensityMatrix,
) -> Result<f64> {
    let game = Game::new(rho_bc, alpha)?;
    game.check(sigma, game.db)?;
    game.check(tau, game.dc)?;
    Ok(game.f(sigma, tau))
}

struct Game<'a> {
    rho: &'a DensityMatrix,
    db: usize,
    dc: usize,
    /// `1/α'`
    s: f64,
    alpha: f64,
    beta: f64,
}

impl<'a> Game<'a> {
    fn new(rho: &'a DensityMatrix, alpha: AlphaOrder) -> Result<Self> {
        if !alpha.exceeds_one() {
            return Err(Error::InvalidAlpha(format!(
                "minimax value requires alpha > 1, got {alpha}"
            )));
        }
        let (db, dc) = match rho.dims() {
            &[b, c] => (b, c),
            d => {
                return Err(Error::InvalidSubsystems(format!(
                    "expected a bipartite state, got dims {d:?}"
                )))
            }
        };
        let a = alpha.value();
        Ok(Self {
            rho,
            db,
            dc,
            s: 1.0 / alpha.conjugate(),
            alpha: a,
            beta: 1.0 / (2.0 - 1.0 / a),
        })
    }

    fn check(&self, state: &DensityMatrix, dim: usize) -> Result<()> {
        if state.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: state.dim(),
            });
        }
        Ok(())
    }

    fn dims(&self) -> [usize; 2] {
        [self.db, self.dc]
    }

    fn f(&self, sigma: &DensityMatrix, tau: &DensityMatrix) -> f64 {
        let op = sigma.power(-self.s).kron(&tau.power(self.s));
        (self.rho.matrix() * &op).trace().re
    }

    /// `tr_B[(σ^{-s/2} ⊗ I) ρ (σ^{-s/2} ⊗ I)]`, so that `f = tr[M τ^s]`.
    fn m(&self, sigma: &DensityMatrix) -> Result<ComplexMatrix> {
        let k = sigma.power(-self.s / 2.0).kron(&ComplexMatrix::identity(self.dc));
        let x = &(&k * self.rho.matrix()) * &k;
        Ok(partial_trace_matrix(&x, &self.dims(), &[1])?.hermitian_part())
    }

    /// `tr_C[(I ⊗ τ^{s/2}) ρ (I ⊗ τ^{s/2})]`, so that `f = tr[N σ^{-s}]`.
    fn n(&self, tau: &DensityMatrix) -> Result<ComplexMatrix> {
        let k = ComplexMatrix::identity(self.db).kron(&tau.power(self.s / 2.0));
        let x = &(&k * self.rho.matrix()) * &k;
        Ok(partial_trace_matrix(&x, &self.dims(), &[0])?.hermitian_part())
    }

    /// `sup_τ f(σ, τ) = ‖M‖_α`, attained at `M^α / tr M^α`.
    fn sup_tau(&self, sigma: &DensityMatrix, tau: &Player) -> Result<(f64, DensityMatrix)> {
        match tau {
            Player::Fixed(t) => Ok((self.f(sigma, t), t.clone())),
            Player::Free => {
                let m = self.m(sigma)?;
                let value = schatten_norm(&m, self.order(self.alpha))?;
                let eig = psd_eig(&m)?;
                let best = if self.alpha.is_infinite() {
                    let top = eig.max_eigenvalue();
                    eig.map_support(|l| if l >= top * (1.0 - 1e-12) { 1.0 } else { 0.0 })
                } else {
                    let a = self.alpha;
                    eig.map_support(|l| (l / top_or_one(&eig)).powf(a))
                };
                Ok((value, DensityMatrix::from_psd(best, None)?))
            }
        }
    }

    /// `inf_σ f(σ, τ) = ‖N‖_β`, attained at `N^β / tr N^β`.
    fn inf_sigma(&self, tau: &DensityMatrix, sigma: &Player) -> Result<(f64, DensityMatrix)> {
        match sigma {
            Player::Fixed(s) => Ok((self.f(s, tau), s.clone())),
            Player::Free => {
                let n = self.n(tau)?;
                let value = schatten_norm(&n, self.order(self.beta))?;
                let eig = psd_eig(&n)?;
                let b = self.beta;
                let best = eig.map_support(|l| (l / top_or_one(&eig)).powf(b));
                Ok((value, DensityMatrix::from_psd(best, None)?))
            }
        }
    }

    fn order(&self, p: f64) -> NormOrder {
        if p.is_infinite() {
            NormOrder::Infinity
        } else {
            NormOrder::Finite(p)
        }
    }
}

fn top_or_one(eig: &crate::linalg::HermitianEig) -> f64 {
    let t = eig.max_eigenvalue();
    if t > 0.0 {
        t
    } else {
        1.0
    }
}

/// Saddle value of `f(σ, τ) = tr[ρ_BC (σ^{-1/α'} ⊗ τ^{1/α'})]` over density
/// matrices `σ_B`, `τ_C`, in the requested order.
pub fn minimax_value(
    rho_bc: &DensityMatrix,
    alpha: AlphaOrder,
    order: MinimaxOrder,
    config: &OptimizerConfig,
) -> Result<MinimaxResult> {
    minimax_value_restricted(rho_bc, alpha, order, &Player::Free, &Player::Free, config)
}

/// [`minimax_value`] with each player either free or pinned to one state.
/// The inner player's response is exact; the outer player is optimized
/// numerically in warm-started rounds until the value changes by less than
/// `10·tol`.
pub fn minimax_value_restricted(
    rho_bc: &DensityMatrix,
    alpha: AlphaOrder,
    order: MinimaxOrder,
    sigma: &Player,
    tau: &Player,
    config: &OptimizerConfig,
) -> Result<MinimaxResult> {
    let game = Game::new(rho_bc, alpha)?;
    if let Player::Fixed(s) = sigma {
        game.check(s, game.db)?;
    }
    if let Player::Fixed(t) = tau {
        game.check(t, game.dc)?;
    }
    config.validate()?;
    let (outer, outer_dim, direction, warm) = match order {
        MinimaxOrder::InfSup => (sigma, game.db, Direction::Min, partial_trace(rho_bc, &[0])?),
        MinimaxOrder::SupInf => (tau, game.dc, Direction::Max, partial_trace(rho_bc, &[1])?),
    };
    let respond = |x: &DensityMatrix| match order {
        MinimaxOrder::InfSup => game.sup_tau(x, tau),
        MinimaxOrder::SupInf => game.inf_sigma(x, sigma),
    };
    let finish = |x: DensityMatrix, rounds: usize, converged: bool| -> Result<MinimaxResult> {
        let (value, y) = respond(&x)?;
        let (sigma, tau) = match order {
            MinimaxOrder::InfSup => (x, y),
            MinimaxOrder::SupInf => (y, x),
        };
        Ok(MinimaxResult {
            value,
            sigma,
            tau,
            rounds,
            converged,
        })
    };
    if let Player::Fixed(x) = outer {
        return finish(x.clone(), 1, true);
    }
    let envelope = |x: &DensityMatrix| respond(x).map(|r| r.0).unwrap_or(f64::NAN);
    let mut r = optimize_over_density_from(envelope, outer_dim, direction, config, &[warm])?;
    let follow_up = OptimizerConfig {
        restarts: 1,
        ..config.clone()
    };
    let mut rounds = 1;
    let mut converged = false;
    while rounds < MAX_ROUNDS {
        let next = optimize_over_density_from(envelope, outer_dim, direction, &follow_up, &[r.argopt.clone()])?;
        rounds += 1;
        let change = (next.value - r.value).abs();
        let better = match direction {
            Direction::Min => next.value <= r.value,
            Direction::Max => next.value >= r.value,
        };
        if better {
            r = next;
        }
        if change < 10.0 * config.tol {
            converged = r.converged || change == 0.0;
            break;
        }
    }
    finish(r.argopt, rounds, converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::random::random_density;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig::with_seed(5)
    }

    #[test]
    fn maximally_mixed_orders_agree() {
        let rho = DensityMatrix::maximally_mixed(4).with_dims(vec![2, 2]).unwrap();
        let a = minimax_value(&rho, 2.0.into(), MinimaxOrder::InfSup, &cfg()).unwrap();
        let b = minimax_value(&rho, 2.0.into(), MinimaxOrder::SupInf, &cfg()).unwrap();
        assert!((a.value - b.value).abs() < 1e-6, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn random_state_sion_equality() {
        let rho = random_density(4, 4, 31).unwrap().with_dims(vec![2, 2]).unwrap();
        for a in [1.5, 2.0, 3.0] {
            let x = minimax_value(&rho, a.into(), MinimaxOrder::InfSup, &cfg()).unwrap();
            let y = minimax_value(&rho, a.into(), MinimaxOrder::SupInf, &cfg()).unwrap();
            assert!((x.value - y.value).abs() < 1e-5, "alpha {a}: {} vs {}", x.value, y.value);
            assert!(x.rounds >= 2);
        }
    }

    #[test]
    fn pinned_players_return_objective() {
        let rho = random_density(4, 4, 2).unwrap().with_dims(vec![2, 2]).unwrap();
        let s = random_density(2, 2, 3).unwrap();
        let t = random_density(2, 2, 4).unwrap();
        let f = minimax_objective(&rho, 2.0.into(), &s, &t).unwrap();
        for order in [MinimaxOrder::InfSup, MinimaxOrder::SupInf] {
            let r = minimax_value_restricted(
                &rho,
                2.0.into(),
                order,
                &Player::Fixed(s.clone()),
                &Player::Fixed(t.clone()),
                &cfg(),
            )
            .unwrap();
            assert_eq!(r.value, f);
        }
    }

    #[test]
    fn closed_form_responses_are_optimal() {
        let rho = random_density(4, 4, 8).unwrap().with_dims(vec![2, 2]).unwrap();
        let game = Game::new(&rho, 2.0.into()).unwrap();
        let s = random_density(2, 2, 1).unwrap();
        let t = random_density(2, 2, 2).unwrap();
        let (sup, tau) = game.sup_tau(&s, &Player::Free).unwrap();
        let (inf, sig) = game.inf_sigma(&t, &Player::Free).unwrap();
        assert!((game.f(&s, &tau) - sup).abs() < 1e-12);
        assert!((game.f(&sig, &t) - inf).abs() < 1e-12);
        for seed in 0..20 {
            let probe = random_density(2, 2, 100 + seed).unwrap();
            assert!(game.f(&s, &probe) <= sup + 1e-12);
            assert!(game.f(&probe, &t) >= inf - 1e-12);
        }
    }

    #[test]
    fn separate_convexity_on_segments() {
        let rho = random_density(4, 4, 9).unwrap().with_dims(vec![2, 2]).unwrap();
        let f = |s: &DensityMatrix, t: &DensityMatrix| minimax_objective(&rho, 2.0.into(), s, t).unwrap();
        for k in 0..10 {
            let s0 = random_density(2, 2, 10 * k).unwrap();
            let s1 = random_density(2, 2, 10 * k + 1).unwrap();
            let t0 = random_density(2, 2, 10 * k + 2).unwrap();
            let t1 = random_density(2, 2, 10 * k + 3).unwrap();
            let ms = s0.mix(&s1, 0.5).unwrap();
            let mt = t0.mix(&t1, 0.5).unwrap();
            assert!(f(&ms, &t0) <= 0.5 * (f(&s0, &t0) + f(&s1, &t0)) + 1e-9);
            assert!(f(&s0, &mt) >= 0.5 * (f(&s0, &t0) + f(&s0, &t1)) - 1e-9);
        }
    }

    #[test]
    fn rejects_small_alpha() {
        let rho = DensityMatrix::maximally_mixed(4).with_dims(vec![2, 2]).unwrap();
        assert!(minimax_value(&rho, 0.5.into(), MinimaxOrder::InfSup, &cfg()).is_err());
    }
}
