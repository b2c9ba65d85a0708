use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Condition, TrialOutcome, TrialPlan};
use crate::divergence::{sandwiched_renyi, umegaki, AlphaOrder};
use crate::error::{Error, Result};
use crate::linalg::{
    gamma_map, holder_conjugate, matrix_power, schatten_norm, svd, weighted_norm, ComplexMatrix, NormOrder,
};
use crate::states::random::{ginibre, haar_unitary, random_channel_with, random_density_with, random_pure_with, SeededRng};
use crate::states::{Channel, DensityMatrix};

/// Strict-positivity proxy: states at least this far apart in trace norm...
const STRICT_DISTANCE: f64 = 0.1;
/// ...should have divergence at least this large.
const STRICT_VALUE: f64 = 1e-6;

fn random_state(d: usize, rng: &mut SeededRng) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=d);
    random_density_with(d, rank, rng)
}

fn full_rank_state(d: usize, rng: &mut SeededRng) -> Result<DensityMatrix> {
    random_density_with(d, d, rng)
}

fn order(a: AlphaOrder) -> NormOrder {
    match a {
        AlphaOrder::Infinity => NormOrder::Infinity,
        other => NormOrder::Finite(other.value()),
    }
}

/// Slack divided by `max(1, |scale|)`.
fn rel(slack: f64, scale: f64) -> f64 {
    slack / scale.abs().max(1.0)
}

fn sorted(alphas: &[AlphaOrder]) -> Vec<AlphaOrder> {
    let mut v = alphas.to_vec();
    v.sort_by(|a, b| a.value().total_cmp(&b.value()));
    v.dedup();
    v
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositivityInstance {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub alphas: Vec<AlphaOrder>,
}

impl PositivityInstance {
    pub(super) fn generate(plan: &TrialPlan, trial: usize, rng: &mut SeededRng) -> Result<Self> {
        let d = plan.pick_dim(rng);
        let (rho, sigma) = if trial % 10 == 9 {
            // Orthogonal supports: ρ pure, σ maximally mixed on the complement.
            let rho = random_pure_with(&[d], rng)?.density();
            let comp = &ComplexMatrix::identity(d) - rho.matrix();
            (rho, DensityMatrix::from_psd(comp, None)?)
        } else {
            let rho = random_state(d, rng)?;
            let sigma = if rng.random_bool(0.5) {
                full_rank_state(d, rng)?
            } else {
                random_state(d, rng)?
            };
            (rho, sigma)
        };
        Ok(Self {
            rho,
            sigma,
            alphas: plan.alphas.clone(),
        })
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let distance = self.rho.trace_distance(&self.sigma)?;
        for &a in &self.alphas {
            let d = sandwiched_renyi(&self.rho, &self.sigma, a)?.value;
            out.conditions.push(Condition::at_least(format!("nonnegative alpha={a}"), d, 1e-9));
            let own = sandwiched_renyi(&self.rho, &self.rho, a)?.value;
            out.conditions.push(Condition::equal(format!("self-divergence alpha={a}"), own, 1e-9));
            if distance >= STRICT_DISTANCE && d < STRICT_VALUE {
                out.warnings.push(format!(
                    "alpha={a}: divergence {d:e} below {STRICT_VALUE:e} at trace distance {distance:.3}"
                ));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DpiChannelKind {
    Stinespring,
    PartialTrace,
    Unitary,
    Depolarizing,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DpiInstance {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub channel: Channel,
    pub kind: DpiChannelKind,
    pub alphas: Vec<AlphaOrder>,
}

impl DpiInstance {
    pub(super) fn generate(plan: &TrialPlan, trial: usize, rng: &mut SeededRng) -> Result<Self> {
        let d = plan.pick_dim(rng);
        let kind = [
            DpiChannelKind::Stinespring,
            DpiChannelKind::PartialTrace,
            DpiChannelKind::Unitary,
            DpiChannelKind::Depolarizing,
        ][trial % 4];
        let d_in = if kind == DpiChannelKind::PartialTrace { 2 * d } else { d };
        let rho = random_state(d_in, rng)?;
        let sigma = full_rank_state(d_in, rng)?;
        let channel = match kind {
            DpiChannelKind::Stinespring => {
                let out = rng.random_range(2..=d);
                let env = rng.random_range(d.div_ceil(out)..=d);
                random_channel_with(d, out, env, rng)?
            }
            DpiChannelKind::PartialTrace => Channel::trace_out_second(d, 2),
            DpiChannelKind::Unitary => Channel::unitary(haar_unitary(d, rng))?,
            DpiChannelKind::Depolarizing => Channel::completely_depolarizing(d),
        };
        Ok(Self {
            rho,
            sigma,
            channel,
            kind,
            alphas: plan.alphas.clone(),
        })
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let rho_out = self.channel.apply(&self.rho)?;
        let sigma_out = self.channel.apply(&self.sigma)?;
        for &a in &self.alphas {
            let before = sandwiched_renyi(&self.rho, &self.sigma, a)?.value;
            let after = sandwiched_renyi(&rho_out, &sigma_out, a)?.value;
            let slack = if before == f64::INFINITY { f64::INFINITY } else { before - after };
            out.conditions.push(if self.kind == DpiChannelKind::Unitary {
                Condition::equal(format!("unitary invariance alpha={a}"), slack, 1e-9)
            } else {
                Condition::at_least(format!("data processing alpha={a}"), slack, 1e-8)
            });
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContractionInstance {
    pub sigma: DensityMatrix,
    pub channel: Channel,
    pub unitary: bool,
    /// Test operators; the first is the identity.
    pub samples: Vec<ComplexMatrix>,
    pub alphas: Vec<AlphaOrder>,
}

const CONTRACTION_SAMPLES: usize = 20;

impl ContractionInstance {
    pub(super) fn generate(plan: &TrialPlan, trial: usize, rng: &mut SeededRng) -> Result<Self> {
        let d = plan.pick_dim(rng);
        let unitary = trial % 5 == 0;
        let mut attempt = 0;
        let (sigma, channel) = loop {
            attempt += 1;
            let sigma = full_rank_state(d, rng)?;
            let channel = if unitary {
                Channel::unitary(haar_unitary(d, rng))?
            } else {
                let env = rng.random_range(1..=d);
                random_channel_with(d, d, env, rng)?
            };
            let image = channel.apply(&sigma)?;
            if image.min_eigenvalue() > 1e-8 * image.eig().max_eigenvalue() {
                break (sigma, channel);
            }
            if attempt >= 100 {
                return Err(Error::InvalidConfig("could not draw a full-rank channel image".into()));
            }
        };
        let mut samples = vec![ComplexMatrix::identity(d)];
        for k in 1..CONTRACTION_SAMPLES {
            let g = ginibre(d, d, rng);
            samples.push(if k % 2 == 0 { &g * &g.adjoint() } else { g });
        }
        Ok(Self {
            sigma,
            channel,
            unitary,
            samples,
            alphas: plan.alphas.clone(),
        })
    }

    /// `‖Γ_{Φσ}^{-1} Φ(Γ_σ X)‖_{α,Φσ} / ‖X‖_{α,σ}`.
    pub fn ratio(&self, x: &ComplexMatrix, alpha: AlphaOrder) -> Result<f64> {
        let p = order(alpha);
        let image = self.channel.apply_matrix(self.sigma.matrix())?.hermitian_part();
        let mapped = self.channel.apply_matrix(&gamma_map(self.sigma.matrix(), x, 1.0)?)?;
        let num = weighted_norm(&gamma_map(&image, &mapped, -1.0)?, p, &image)?;
        let den = weighted_norm(x, p, self.sigma.matrix())?;
        Ok(num / den)
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        for &a in &self.alphas {
            for (k, x) in self.samples.iter().enumerate() {
                let r = self.ratio(x, a)?;
                out.conditions.push(if self.unitary || k == 0 {
                    Condition::equal(format!("isometric ratio alpha={a} sample={k}"), r - 1.0, 1e-9)
                } else {
                    Condition::at_least(format!("contraction alpha={a} sample={k}"), 1.0 - r, 1e-8)
                });
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityInstance {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub alphas: Vec<AlphaOrder>,
}

impl MonotonicityInstance {
    pub(super) fn generate(plan: &TrialPlan, rng: &mut SeededRng) -> Result<Self> {
        let d = plan.pick_dim(rng);
        Ok(Self {
            rho: random_state(d, rng)?,
            sigma: full_rank_state(d, rng)?,
            alphas: sorted(&plan.alphas),
        })
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let d_inf = sandwiched_renyi(&self.rho, &self.sigma, AlphaOrder::Infinity)?.value;
        let inv = gamma_map(self.sigma.matrix(), self.rho.matrix(), -1.0)?;
        let mut prev: Option<(AlphaOrder, f64, f64)> = None;
        for &a in &self.alphas {
            let d = sandwiched_renyi(&self.rho, &self.sigma, a)?.value;
            let e = weighted_norm(&inv, order(a), self.sigma.matrix())?.powf(a.conjugate());
            if let Some((pa, pd, pe)) = prev {
                out.conditions.push(Condition::at_least(format!("increasing {pa}->{a}"), d - pd, 1e-9));
                out.conditions.push(Condition::at_least(
                    format!("norm power increasing {pa}->{a}"),
                    rel(e - pe, pe),
                    1e-9,
                ));
            }
            out.conditions.push(Condition::at_least(format!("below max-divergence alpha={a}"), d_inf - d, 1e-8));
            prev = Some((a, d, e));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexityInstance {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub alphas: Vec<AlphaOrder>,
}

impl ConvexityInstance {
    pub(super) fn generate(plan: &TrialPlan, rng: &mut SeededRng) -> Result<Self> {
        let d = plan.pick_dim(rng);
        Ok(Self {
            rho: random_state(d, rng)?,
            sigma: full_rank_state(d, rng)?,
            alphas: sorted(&plan.alphas),
        })
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let vals: Vec<(f64, f64)> = self
            .alphas
            .iter()
            .map(|&a| Ok((1.0 / a.value(), sandwiched_renyi(&self.rho, &self.sigma, a)?.value / a.conjugate())))
            .collect::<Result<_>>()?;
        let n = vals.len();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let ((xa, la), (xb, lb), (xc, lc)) = (vals[i], vals[j], vals[k]);
                    let theta = (xa - xb) / (xa - xc);
                    let chord = (1.0 - theta) * la + theta * lc;
                    out.conditions.push(Condition::at_least(
                        format!("convex {}<{}<{}", self.alphas[i], self.alphas[j], self.alphas[k]),
                        chord - lb,
                        1e-8,
                    ));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterpolationInstance {
    pub x: ComplexMatrix,
    /// Positive definite weight; the identity on some trials.
    pub sigma: ComplexMatrix,
}

const INTERPOLATION_PAIRS: [(f64, f64); 3] = [(1.0, 2.0), (1.0, f64::INFINITY), (2.0, 4.0)];
const INTERPOLATION_THETAS: [f64; 3] = [0.25, 0.5, 0.75];

impl InterpolationInstance {
    pub(super) fn generate(plan: &TrialPlan, trial: usize, rng: &mut SeededRng) -> Result<Self> {
        let d = plan.pick_dim(rng);
        let x = ginibre(d, d, rng);
        let sigma = if trial % 4 == 0 {
            ComplexMatrix::identity(d)
        } else {
            full_rank_state(d, rng)?.matrix().clone()
        };
        Ok(Self { x, sigma })
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let norm = |p: f64| weighted_norm(&self.x, NormOrder::finite(p)?, &self.sigma);
        for (p0, p1) in INTERPOLATION_PAIRS {
            let (n0, n1) = (norm(p0)?, norm(p1)?);
            for theta in INTERPOLATION_THETAS {
                let p = 1.0 / ((1.0 - theta) / p0 + theta / p1);
                let lhs = norm(p)?;
                let rhs = n0.powf(1.0 - theta) * n1.powf(theta);
                out.conditions.push(Condition::at_least(
                    format!("interpolation p0={p0} p1={p1} theta={theta}"),
                    rhs - lhs,
                    1e-9,
                ));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderInstance {
    pub factors: [ComplexMatrix; 3],
    /// Test operators for the dual characterization of the Schatten norm.
    pub duals: Vec<ComplexMatrix>,
    /// Unitaries and spectrum for the constructed equality case.
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    pub w: ComplexMatrix,
    pub spectrum: Vec<f64>,
    /// Positive definite operator and positive definite test operators for
    /// the `0 < p < 1` dual characterization.
    pub positive: ComplexMatrix,
    pub positive_duals: Vec<ComplexMatrix>,
}

const HOLDER_DUALS: usize = 200;

impl HolderInstance {
    pub(super) fn generate(plan: &TrialPlan, rng: &mut SeededRng) -> Result<Self> {
        let d = plan.pick_dim(rng);
        let factors = [ginibre(d, d, rng), ginibre(d, d, rng), ginibre(d, d, rng)];
        let duals = (0..HOLDER_DUALS).map(|_| ginibre(d, d, rng)).collect();
        let u = haar_unitary(d, rng);
        let v = haar_unitary(d, rng);
        let w = haar_unitary(d, rng);
        let spectrum = (0..d).map(|_| rng.random_range(0.1..2.0)).collect();
        let g = ginibre(d, d, rng);
        let positive = &(&g * &g.adjoint()) + &ComplexMatrix::identity(d).scale(0.05);
        let positive_duals = (0..HOLDER_DUALS)
            .map(|_| {
                let g = ginibre(d, d, rng);
                &(&g * &g.adjoint()) + &ComplexMatrix::identity(d).scale(0.01)
            })
            .collect();
        Ok(Self {
            factors,
            duals,
            u,
            v,
            w,
            spectrum,
            positive,
            positive_duals,
        })
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let n = |x: &ComplexMatrix, p: f64| schatten_norm(x, NormOrder::finite(p)?);
        let [x1, x2, x3] = &self.factors;
        let x12 = x1 * x2;
        let tol = 1e-9;

        // ‖XY‖_1 ≤ ‖X‖_p ‖Y‖_p'
        let trace_norm = n(&x12, 1.0)?;
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let rhs = n(x1, p)? * schatten_norm(x2, holder_conjugate(NormOrder::finite(p)?)?)?;
            out.conditions.push(Condition::at_least(format!("holder p={p}"), rel(rhs - trace_norm, rhs), tol));
        }

        // ‖X‖_p = sup over ‖Y‖_p' = 1 of |⟨Y, X⟩|, attained by the SVD construction.
        let dec = svd(x1);
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let pn = NormOrder::finite(p)?;
            let pc = holder_conjugate(pn)?;
            let norm = schatten_norm(x1, pn)?;
            for (k, y) in self.duals.iter().enumerate() {
                let y = y.scale(1.0 / schatten_norm(y, pc)?);
                let pairing = y.inner_product(x1).norm();
                out.conditions.push(Condition::at_least(
                    format!("dual bound p={p} sample={k}"),
                    rel(norm - pairing, norm),
                    tol,
                ));
            }
            let smax = dec.singular_values[0];
            let weights: Vec<f64> = dec
                .singular_values
                .iter()
                .enumerate()
                .map(|(i, &s)| match pn {
                    NormOrder::Infinity => (i == 0) as u8 as f64,
                    NormOrder::Finite(pv) => (s / smax).powf(pv - 1.0),
                })
                .collect();
            let y = &(&dec.u * &ComplexMatrix::from_diagonal(&weights)) * &dec.v.adjoint();
            let y = y.scale(1.0 / schatten_norm(&y, pc)?);
            let attained = y.inner_product(x1).re;
            out.conditions.push(Condition::equal(format!("dual attained p={p}"), rel(attained - norm, norm), tol));
        }

        // ‖XY‖_r ≤ ‖X‖_p ‖Y‖_q, with equality when |X|^p ∝ |Y†|^q.
        for (p, q) in [(1.0, 1.0), (2.0, 3.0), (0.5, 2.0), (4.0, 4.0)] {
            let r = 1.0 / (1.0 / p + 1.0 / q);
            let rhs = n(x1, p)? * n(x2, q)?;
            out.conditions.push(Condition::at_least(
                format!("two-factor p={p} q={q}"),
                rel(rhs - n(&x12, r)?, rhs),
                tol,
            ));
            let d1 = ComplexMatrix::from_diagonal(&self.spectrum);
            let d2 = ComplexMatrix::from_diagonal(&self.spectrum.iter().map(|s| s.powf(p / q)).collect::<Vec<_>>());
            let x = &(&self.u * &d1) * &self.w;
            let y = &(&self.w.adjoint() * &d2) * &self.v;
            let rhs = n(&x, p)? * n(&y, q)?;
            let lhs = n(&(&x * &y), r)?;
            out.conditions.push(Condition::equal(format!("equality case p={p} q={q}"), rel(lhs - rhs, rhs), 1e-8));
        }

        // Three factors, all exponents positive.
        let x123 = &x12 * x3;
        for ps in [[2.0, 3.0, 6.0], [1.0, 2.0, 4.0], [3.0, 3.0, 3.0]] {
            let r = 1.0 / ps.iter().map(|p| 1.0 / p).sum::<f64>();
            let rhs = n(x1, ps[0])? * n(x2, ps[1])? * n(x3, ps[2])?;
            out.conditions.push(Condition::at_least(
                format!("three-factor {ps:?}"),
                rel(rhs - n(&x123, r)?, rhs),
                tol,
            ));
        }

        // Reverse direction: exactly one positive exponent.
        for ps in [[0.5, -2.0, -4.0], [0.25, -1.0, -2.0]] {
            let r = 1.0 / ps.iter().map(|p| 1.0 / p).sum::<f64>();
            let rhs = n(x1, ps[0])? * n(x2, ps[1])? * n(x3, ps[2])?;
            let lhs = n(&x123, r)?;
            out.conditions.push(Condition::at_least(format!("reverse three-factor {ps:?}"), rel(lhs - rhs, lhs), tol));
        }
        for p in [0.25, 0.5, 0.75] {
            let pc = p / (p - 1.0);
            let lhs = n(x1, p)? * n(x2, pc)?;
            out.conditions.push(Condition::at_least(
                format!("reverse two-factor p={p}"),
                rel(trace_norm - lhs, trace_norm),
                tol,
            ));
        }

        // For positive X and 0 < p < 1: ‖X‖_p = inf tr(XY) over Y ≥ 0, ‖Y‖_p' = 1.
        for p in [0.25, 0.5, 0.75] {
            let pc = NormOrder::finite(p / (p - 1.0))?;
            let norm = n(&self.positive, p)?;
            for (k, y) in self.positive_duals.iter().enumerate() {
                let y = y.scale(1.0 / schatten_norm(y, pc)?);
                let pairing = (&self.positive * &y).trace().re;
                out.conditions.push(Condition::at_least(
                    format!("inverse dual bound p={p} sample={k}"),
                    rel(pairing - norm, norm),
                    tol,
                ));
            }
            let y = matrix_power(&self.positive, p - 1.0)?;
            let y = y.scale(1.0 / schatten_norm(&y, pc)?);
            let attained = (&self.positive * &y).trace().re;
            out.conditions.push(Condition::equal(
                format!("inverse dual attained p={p}"),
                rel(attained - norm, norm),
                1e-8,
            ));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitInstance {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
}

/// Offsets `h` for `D_{1+h}`, each half the previous.
pub const LIMIT_OFFSETS: [f64; 3] = [0.1, 0.05, 0.025];
/// Gaps below this are treated as exact agreement; ratios are not formed.
const LIMIT_GAP_FLOOR: f64 = 1e-12;

impl LimitInstance {
    pub(super) fn generate(plan: &TrialPlan, _trial: usize, rng: &mut SeededRng) -> Result<Self> {
        let d = plan.pick_dim(rng);
        Ok(Self {
            rho: random_state(d, rng)?,
            sigma: full_rank_state(d, rng)?,
        })
    }

    /// `|D_{1+h} - D_1|` for each offset.
    pub fn gaps(&self) -> Result<Vec<f64>> {
        let d1 = umegaki(&self.rho, &self.sigma)?.value;
        LIMIT_OFFSETS
            .iter()
            .map(|&h| Ok((sandwiched_renyi(&self.rho, &self.sigma, AlphaOrder::finite(1.0 + h)?)?.value - d1).abs()))
            .collect()
    }

    pub(super) fn evaluate(&self) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let gaps = self.gaps()?;
        for (i, w) in gaps.windows(2).enumerate() {
            let h = LIMIT_OFFSETS[i + 1];
            out.conditions.push(Condition::at_least(format!("gap shrinks h={h}"), w[0] - w[1], 1e-9));
            if w[0] > LIMIT_GAP_FLOOR {
                let ratio = w[1] / w[0];
                out.conditions.push(Condition::at_least(
                    format!("gap ratio h={h}"),
                    (ratio - 0.3).min(0.7 - ratio),
                    1e-9,
                ));
            }
        }
        Ok(out)
    }
}
