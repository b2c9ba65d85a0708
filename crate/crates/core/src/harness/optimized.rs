use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Condition, TrialOutcome, TrialPlan};
use crate::divergence::AlphaOrder;
use crate::error::Result;
use crate::optimize::{
    conditional_renyi_entropy, holevo_alpha, holevo_alpha_seeded, minimax_value, mutual_info_primal,
    mutual_info_primal_from, MinimaxOrder, OptimizerConfig,
};
use crate::states::random::{random_channel_with, random_density_with, random_pure_with, SeededRng};
use crate::states::{partial_trace, permute_subsystems, tensor, Channel, DensityMatrix, PureState};

/// Tolerance on `inf sup - sup inf` of the minimax game.
const SION_TOL: f64 = 1e-5;
/// Restarts used for the joint run of the superadditivity check: the product
/// of the single-channel optima first, then random ensembles.
const JOINT_RESTARTS: usize = 2;

/// `β` with `1/α + 1/β = 2`.
fn dual_order(alpha: f64) -> f64 {
    alpha / (2.0 * alpha - 1.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualityInstance {
    /// Pure state on `A ⊗ B ⊗ C`.
    pub psi: PureState,
    pub alphas: Vec<AlphaOrder>,
    pub optimizer: OptimizerConfig,
}

impl DualityInstance {
    pub(super) fn generate(plan: &TrialPlan, _trial: usize, rng: &mut SeededRng, opt: OptimizerConfig) -> Result<Self> {
        let dc = plan.pick_dim(rng);
        Ok(Self {
            psi: random_pure_with(&[2, 2, dc], rng)?,
            alphas: plan.alphas.clone(),
            optimizer: opt,
        })
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let rho = self.psi.density();
        let rho_ab = partial_trace(&rho, &[0, 1])?;
        let rho_ac = partial_trace(&rho, &[0, 2])?;
        let rho_bc = partial_trace(&rho, &[1, 2])?;
        let tol = super::CheckName::Duality.tolerance();
        for &a in &self.alphas {
            let beta = AlphaOrder::finite(dual_order(a.value()))?;
            let hb = conditional_renyi_entropy(&rho_ab, a, &self.optimizer)?;
            let hc = conditional_renyi_entropy(&rho_ac, beta, &self.optimizer)?;
            out.inconclusive |= !hb.converged || !hc.converged;
            out.conditions.push(Condition::equal(
                format!("entropy duality alpha={a}"),
                hb.value + hc.value,
                tol,
            ));
            let upper = minimax_value(&rho_bc, a, MinimaxOrder::InfSup, &self.optimizer)?;
            let lower = minimax_value(&rho_bc, a, MinimaxOrder::SupInf, &self.optimizer)?;
            out.inconclusive |= !upper.converged || !lower.converged;
            out.conditions.push(Condition::equal(
                format!("minimax exchange alpha={a}"),
                upper.value - lower.value,
                SION_TOL,
            ));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MiAdditivityInstance {
    /// Bipartite states on `A_i ⊗ B_i`.
    pub rho1: DensityMatrix,
    pub rho2: DensityMatrix,
    pub alphas: Vec<AlphaOrder>,
    pub optimizer: OptimizerConfig,
}

impl MiAdditivityInstance {
    pub(super) fn generate(plan: &TrialPlan, _trial: usize, rng: &mut SeededRng, opt: OptimizerConfig) -> Result<Self> {
        let draw = |rng: &mut SeededRng| -> Result<DensityMatrix> {
            let d = plan.pick_dim(rng);
            let rank = rng.random_range(1..=d * d);
            random_density_with(d * d, rank, rng)?.with_dims(vec![d, d])
        };
        let rho1 = draw(rng)?;
        let rho2 = draw(rng)?;
        Ok(Self {
            rho1,
            rho2,
            alphas: plan.alphas.clone(),
            optimizer: opt,
        })
    }

    /// `ρ_1 ⊗ ρ_2` regrouped as `(A_1 A_2) ⊗ (B_1 B_2)`.
    pub fn joint(&self) -> Result<DensityMatrix> {
        let (a1, b1) = (self.rho1.dims()[0], self.rho1.dims()[1]);
        let (a2, b2) = (self.rho2.dims()[0], self.rho2.dims()[1]);
        permute_subsystems(&tensor(&self.rho1, &self.rho2), &[0, 2, 1, 3])?.with_dims(vec![a1 * a2, b1 * b2])
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let joint = self.joint()?;
        let tol = super::CheckName::MiAdditivity.tolerance();
        for &a in &self.alphas {
            let i1 = mutual_info_primal(&self.rho1, a, &self.optimizer)?;
            let i2 = mutual_info_primal(&self.rho2, a, &self.optimizer)?;
            let warm = tensor(&i1.argopt, &i2.argopt);
            let i12 = mutual_info_primal_from(&joint, a, &self.optimizer, &[warm])?;
            out.inconclusive |= !i1.converged || !i2.converged || !i12.converged;
            out.conditions.push(Condition::equal(
                format!("additivity alpha={a}"),
                i12.value - i1.value - i2.value,
                tol,
            ));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChiInstance {
    pub channels: [Channel; 2],
    pub alpha: AlphaOrder,
    /// Ensemble size for each single channel; the joint run uses `k²`.
    pub k: usize,
    pub optimizer: OptimizerConfig,
}

impl ChiInstance {
    pub(super) fn generate(plan: &TrialPlan, trial: usize, rng: &mut SeededRng, opt: OptimizerConfig) -> Result<Self> {
        let draw = |rng: &mut SeededRng| -> Result<Channel> {
            let d = plan.pick_dim(rng);
            let env = rng.random_range(1..=d);
            random_channel_with(d, d, env, rng)
        };
        let channels = [draw(rng)?, draw(rng)?];
        Ok(Self {
            channels,
            alpha: plan.alphas[trial % plan.alphas.len()],
            k: 2,
            optimizer: opt,
        })
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let [c1, c2] = &self.channels;
        let x1 = holevo_alpha(c1, self.k, self.alpha, &self.optimizer)?;
        let x2 = holevo_alpha(c2, self.k, self.alpha, &self.optimizer)?;
        let seed = x1.ensemble.tensor(&x2.ensemble);
        let joint_cfg = OptimizerConfig {
            restarts: JOINT_RESTARTS,
            ..self.optimizer.clone()
        };
        let x12 = holevo_alpha_seeded(&c1.tensor(c2), self.k * self.k, self.alpha, &joint_cfg, &[seed])?;
        out.conditions.push(Condition::at_least(
            format!("superadditivity alpha={}", self.alpha),
            x12.value - x1.value - x2.value,
            super::CheckName::ChiSuperadditivity.tolerance(),
        ));
        out.inconclusive = !x1.converged || !x2.converged || !x12.converged;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{CheckName, Instance};

    #[test]
    fn duality_orders() {
        assert!((dual_order(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((1.0 / 1.5 + 1.0 / dual_order(1.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn joint_state_regroups_subsystems() {
        let rng = &mut crate::states::random::rng_from_seed(4);
        let inst = MiAdditivityInstance {
            rho1: random_density_with(4, 4, rng).unwrap().with_dims(vec![2, 2]).unwrap(),
            rho2: random_density_with(4, 4, rng).unwrap().with_dims(vec![2, 2]).unwrap(),
            alphas: vec![AlphaOrder::Finite(2.0)],
            optimizer: OptimizerConfig::default(),
        };
        let j = inst.joint().unwrap();
        assert_eq!(j.dims(), &[4, 4]);
        let a = partial_trace(&j, &[0]).unwrap();
        let expect = tensor(&partial_trace(&inst.rho1, &[0]).unwrap(), &partial_trace(&inst.rho2, &[0]).unwrap());
        assert!((a.matrix() - expect.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn trivial_third_system_reduces_to_marginal_entropy() {
        use crate::divergence::renyi_entropy;
        let psi = random_pure_with(&[2, 2, 1], &mut crate::states::random::rng_from_seed(6)).unwrap();
        let rho = psi.density();
        let rho_ab = partial_trace(&rho, &[0, 1]).unwrap();
        let rho_a = partial_trace(&rho, &[0]).unwrap();
        let cfg = OptimizerConfig::with_seed(1);
        for a in [1.5, 2.0, 3.0] {
            let h = conditional_renyi_entropy(&rho_ab, AlphaOrder::Finite(a), &cfg).unwrap();
            let hb = renyi_entropy(&rho_a, AlphaOrder::Finite(dual_order(a)));
            assert!((h.value + hb).abs() < 2e-5, "alpha {a}: {} vs {}", h.value, -hb);
        }
    }

    #[test]
    fn entangled_times_product_adds_first_term_only() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = num_complex::Complex64::new(0.0, 0.0);
        let bell = PureState::new(vec![z + h, z, z, z + h], vec![2, 2]).unwrap().density();
        let rng = &mut crate::states::random::rng_from_seed(8);
        let prod = tensor(&random_density_with(2, 2, rng).unwrap(), &random_density_with(2, 2, rng).unwrap());
        let inst = MiAdditivityInstance {
            rho1: bell.clone(),
            rho2: prod,
            alphas: vec![AlphaOrder::Finite(2.0)],
            optimizer: OptimizerConfig::with_seed(2),
        };
        let o = inst.evaluate().unwrap();
        assert!(!o.failed(CheckName::MiAdditivity, 1.0), "{:?}", o.conditions);
        let joint = mutual_info_primal(&inst.joint().unwrap(), AlphaOrder::Finite(2.0), &inst.optimizer).unwrap();
        let first = mutual_info_primal(&bell, AlphaOrder::Finite(2.0), &inst.optimizer).unwrap();
        assert!((joint.value - first.value).abs() < 5e-5);
    }

    #[test]
    fn identity_channels_superadd() {
        let inst = ChiInstance {
            channels: [Channel::identity(2), Channel::identity(2)],
            alpha: AlphaOrder::Finite(2.0),
            k: 2,
            optimizer: OptimizerConfig {
                restarts: 2,
                ..OptimizerConfig::with_seed(4)
            },
        };
        let o = inst.evaluate().unwrap();
        assert!(!o.failed(CheckName::ChiSuperadditivity, 1.0));
        let joint = holevo_alpha_seeded(
            &Channel::identity(4),
            4,
            AlphaOrder::Finite(2.0),
            &inst.optimizer,
            &[crate::optimize::Ensemble::new(
                vec![0.25; 4],
                (0..4)
                    .map(|i| {
                        let mut v = vec![num_complex::Complex64::new(0.0, 0.0); 4];
                        v[i] = num_complex::Complex64::new(1.0, 0.0);
                        PureState::new(v, vec![4]).unwrap()
                    })
                    .collect(),
            )
            .unwrap()],
        )
        .unwrap();
        assert!(joint.value >= 2.0 * std::f64::consts::LN_2 - 1e-6, "{}", joint.value);
    }

    #[test]
    fn generated_duality_trial_passes() {
        let mut plan = TrialPlan::default_for(CheckName::Duality, 3);
        plan.dims = vec![2];
        plan.alphas = vec![AlphaOrder::Finite(2.0)];
        let inst = Instance::generate(CheckName::Duality, &plan, 0, 11).unwrap();
        let o = inst.evaluate().unwrap();
        assert!(!o.failed(CheckName::Duality, 1.0), "{:?}", o.conditions);
    }
}
