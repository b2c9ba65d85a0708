use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bfgs::{self, BfgsSettings, Smooth};
use super::{optimize_with_settings, Direction, OptimizerConfig, OptimizerResult};
use crate::divergence::{sandwiched_renyi_eig, AlphaOrder};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::random::{complex_gaussian, rng_from_seed, stream_seed};
use crate::states::{Channel, DensityMatrix, PureState};

const ZERO_LOGIT: f64 = -40.0;
/// Stall window of the warm-started inner solves inside the ensemble search.
/// The returned value always comes from a full-precision re-evaluation.
const INNER_STALL_WINDOW: usize = 5;

/// Input ensemble `{p_x, |ψ_x⟩}` of pure states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub probabilities: Vec<f64>,
    pub states: Vec<PureState>,
}

impl Ensemble {
    pub fn new(probabilities: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
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
        let d = states[0].amplitudes().len();
        if let Some(s) = states.iter().find(|s| s.amplitudes().len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.amplitudes().len(),
            });
        }
        Ok(Self {
            probabilities,
            states,
        })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.states[0].amplitudes().len()
    }

    /// Product ensemble `{p_x q_y, |ψ_x⟩ ⊗ |φ_y⟩}`.
    pub fn tensor(&self, other: &Ensemble) -> Ensemble {
        let mut probabilities = Vec::with_capacity(self.len() * other.len());
        let mut states = Vec::with_capacity(self.len() * other.len());
        for (p, a) in self.probabilities.iter().zip(&self.states) {
            for (q, b) in other.probabilities.iter().zip(&other.states) {
                probabilities.push(p * q);
                states.push(crate::states::tensor(a, b));
            }
        }
        Ensemble {
            probabilities,
            states,
        }
    }

    fn outputs(&self, channel: &Channel) -> Result<Vec<DensityMatrix>> {
        self.states
            .iter()
            .map(|s| channel.apply(&s.density()))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolevoResult {
    /// Lower bound on `χ_α(Φ)`: the value attained by the returned ensemble.
    pub value: f64,
    pub ensemble: Ensemble,
    /// Minimizing `σ_B` for the returned ensemble.
    pub sigma: DensityMatrix,
    pub converged: bool,
    pub iterations: usize,
    pub restart: usize,
    pub lower_bound: bool,
}

/// `D_α(Σ p_x |x⟩⟨x| ⊗ ρ_x ‖ Σ p_x |x⟩⟨x| ⊗ σ)` evaluated blockwise.
fn cq_objective(probs: &[f64], outputs: &[DensityMatrix], sigma: &DensityMatrix, alpha: AlphaOrder) -> f64 {
    let mut acc = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for (p, rho) in probs.iter().zip(outputs) {
        if *p <= 0.0 {
            continue;
        }
        let d = match sandwiched_renyi_eig(rho.matrix(), sigma.eig(), alpha) {
            Ok(v) => v.value,
            Err(_) => return f64::NAN,
        };
        match alpha {
            AlphaOrder::One => acc += p * d,
            AlphaOrder::Infinity => worst = worst.max(d),
            AlphaOrder::Finite(a) => acc += p * ((a - 1.0) * d).exp(),
        }
    }
    match alpha {
        AlphaOrder::One => acc,
        AlphaOrder::Infinity => worst,
        AlphaOrder::Finite(a) => acc.ln() / (a - 1.0),
    }
}

fn inner_solve(
    probs: &[f64],
    outputs: &[DensityMatrix],
    alpha: AlphaOrder,
    config: &OptimizerConfig,
    settings: &BfgsSettings,
    warm: DensityMatrix,
) -> Result<OptimizerResult> {
    optimize_with_settings(
        |s: &DensityMatrix| cq_objective(probs, outputs, s, alpha),
        outputs[0].dim(),
        Direction::Min,
        config,
        &[warm],
        settings,
    )
}

fn average_output(probs: &[f64], outputs: &[DensityMatrix]) -> Result<DensityMatrix> {
    let d = outputs[0].dim();
    let mut m = ComplexMatrix::zeros(d, d);
    for (p, rho) in probs.iter().zip(outputs) {
        m = &m + &rho.matrix().scale(*p);
    }
    DensityMatrix::from_psd(m.hermitian_part(), None)
}

/// `I_α(X;B)` of the classical-quantum state produced by sending the ensemble
/// through `channel`; `argopt` is the minimizing `σ_B`.
pub fn holevo_information(
    channel: &Channel,
    ensemble: &Ensemble,
    alpha: AlphaOrder,
    config: &OptimizerConfig,
) -> Result<OptimizerResult> {
    if ensemble.input_dim() != channel.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.input_dim(),
            got: ensemble.input_dim(),
        });
    }
    let outputs = ensemble.outputs(channel)?;
    let warm = average_output(&ensemble.probabilities, &outputs)?;
    inner_solve(&ensemble.probabilities, &outputs, alpha, config, &config.bfgs(), warm)
}

fn encode(ensemble: &Ensemble) -> Vec<f64> {
    let mut x: Vec<f64> = ensemble
        .probabilities
        .iter()
        .map(|&p| if p > 0.0 { p.ln().max(ZERO_LOGIT) } else { ZERO_LOGIT })
        .collect();
    for s in &ensemble.states {
        for a in s.amplitudes() {
            x.push(a.re);
            x.push(a.im);
        }
    }
    x
}

fn decode(x: &[f64], k: usize, d: usize) -> Option<Ensemble> {
    let top = x[..k].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = x[..k].iter().map(|z| (z - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let probabilities = w.iter().map(|v| v / total).collect();
    let mut states = Vec::with_capacity(k);
    for chunk in x[k..].chunks(2 * d) {
        let amps: Vec<Complex64> = chunk.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return None;
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        states.push(PureState::new(amps, vec![d]).ok()?);
    }
    Some(Ensemble {
        probabilities,
        states,
    })
}

fn basis_ensemble(k: usize, d: usize) -> Ensemble {
    let states = (0..k)
        .map(|x| {
            let mut amps = vec![Complex64::new(0.0, 0.0); d];
            amps[x % d] = Complex64::new(1.0, 0.0);
            PureState::new(amps, vec![d]).expect("basis vector")
        })
        .collect();
    Ensemble {
        probabilities: vec![1.0 / k as f64; k],
        states,
    }
}

fn random_ensemble<R: Rng + ?Sized>(k: usize, d: usize, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..k).map(|_| 0.5 * complex_gaussian(rng).re).collect();
    for _ in 0..k * d {
        let z = complex_gaussian(rng);
        x.push(z.re);
        x.push(z.im);
    }
    x
}

/// Negated `I_α(X;B)` as a function of the ensemble coordinates. Values are
/// exact inner minima (warm-started); gradients are taken at the cached
/// minimizer, which is valid for a pointwise minimum.
struct OuterProblem<'a> {
    channel: &'a Channel,
    alpha: AlphaOrder,
    k: usize,
    inner: OptimizerConfig,
    inner_settings: BfgsSettings,
    cache: Option<(Vec<f64>, DensityMatrix)>,
}

impl OuterProblem<'_> {
    fn state(&self, x: &[f64]) -> Option<(Vec<f64>, Vec<DensityMatrix>)> {
        let e = decode(x, self.k, self.channel.input_dim())?;
        let outputs = e.outputs(self.channel).ok()?;
        Some((e.probabilities, outputs))
    }
}

impl Smooth for OuterProblem<'_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        let Some((p, outputs)) = self.state(x) else {
            return f64::NAN;
        };
        let warm = match &self.cache {
            Some((_, s)) => s.clone(),
            None => match average_output(&p, &outputs) {
                Ok(s) => s,
                Err(_) => return f64::NAN,
            },
        };
        match inner_solve(&p, &outputs, self.alpha, &self.inner, &self.inner_settings, warm) {
            Ok(r) => {
                self.cache = Some((x.to_vec(), r.argopt));
                -r.value
            }
            Err(_) => f64::NAN,
        }
    }

    fn gradient(&mut self, x: &[f64], eps: f64) -> Vec<f64> {
        if self.cache.as_ref().is_none_or(|(cx, _)| cx.as_slice() != x) {
            self.value(x);
        }
        let Some((_, sigma)) = self.cache.clone() else {
            return vec![f64::NAN; x.len()];
        };
        let f = |y: &[f64]| match self.state(y) {
            Some((p, outputs)) => -cq_objective(&p, &outputs, &sigma, self.alpha),
            None => f64::NAN,
        };
        let mut probe = x.to_vec();
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            probe[i] = x[i] + eps;
            let fp = f(&probe);
            probe[i] = x[i] - eps;
            let fm = f(&probe);
            probe[i] = x[i];
            g[i] = (fp - fm) / (2.0 * eps);
        }
        g
    }
}

/// Heuristic lower bound on `χ_α(Φ) = sup I_α(X;B)` over ensembles of `k`
/// pure input states. Restart 0 is the uniform computational-basis ensemble.
pub fn holevo_alpha(
    channel: &Channel,
    k: usize,
    alpha: AlphaOrder,
    config: &OptimizerConfig,
) -> Result<HolevoResult> {
    holevo_alpha_seeded(channel, k, alpha, config, &[])
}

/// [`holevo_alpha`] whose first restarts begin at the given ensembles.
pub fn holevo_alpha_seeded(
    channel: &Channel,
    k: usize,
    alpha: AlphaOrder,
    config: &OptimizerConfig,
    seeds: &[Ensemble],
) -> Result<HolevoResult> {
    config.validate()?;
    if k == 0 {
        return Err(Error::InvalidConfig("ensemble size must be positive".into()));
    }
    let d = channel.input_dim();
    if let Some(e) = seeds.iter().find(|e| e.len() != k || e.input_dim() != d) {
        return Err(Error::InvalidConfig(format!(
            "seed ensemble has {} states of dimension {}, expected {k} of dimension {d}",
            e.len(),
            e.input_dim()
        )));
    }
    let mut starts: Vec<Ensemble> = seeds.to_vec();
    if starts.is_empty() {
        starts.push(basis_ensemble(k, d));
    }
    let restarts = config.restarts.max(starts.len());
    let inner = OptimizerConfig {
        restarts: 1,
        ..config.clone()
    };
    let settings = config.bfgs();
    let run = |r: usize| {
        let x0 = match starts.get(r) {
            Some(e) => encode(e),
            None => random_ensemble(k, d, &mut rng_from_seed(stream_seed(config.seed, r as u64))),
        };
        let mut problem = OuterProblem {
            channel,
            alpha,
            k,
            inner: inner.clone(),
            inner_settings: BfgsSettings {
                stall_window: INNER_STALL_WINDOW,
                ..config.bfgs()
            },
            cache: None,
        };
        let out = bfgs::minimize(&mut problem, x0, &settings)?;
        Some((out, problem.cache.map(|c| c.1)))
    };
    let outcomes: Vec<_> = (0..restarts).into_par_iter().map(run).collect();
    let (restart, (best, _)) = outcomes
        .into_iter()
        .enumerate()
        .filter_map(|(i, o)| o.map(|o| (i, o)))
        .filter(|(_, (o, _))| !o.value.is_nan())
        .min_by(|a, b| a.1 .0.value.total_cmp(&b.1 .0.value).then(a.0.cmp(&b.0)))
        .ok_or(Error::ObjectiveNan)?;
    let ensemble = decode(&best.x, k, d).ok_or(Error::ObjectiveNan)?;
    let full = holevo_information(channel, &ensemble, alpha, config)?;
    Ok(HolevoResult {
        value: full.value,
        ensemble,
        sigma: full.argopt,
        converged: best.converged && full.converged,
        iterations: best.iterations,
        restart,
        lower_bound: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::mutual_info_primal;
    use crate::states::random::random_channel;
    use crate::states::{cq_embed, CQState};
    use std::f64::consts::LN_2;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 3,
            ..OptimizerConfig::with_seed(2)
        }
    }

    #[test]
    fn identity_channel_reaches_log_dimension() {
        let r = holevo_alpha(&Channel::identity(2), 2, 2.0.into(), &cfg()).unwrap();
        assert!((r.value - LN_2).abs() < 1e-3, "{}", r.value);
        assert!(r.lower_bound);
    }

    #[test]
    fn depolarizing_channel_carries_nothing() {
        let r = holevo_alpha(&Channel::completely_depolarizing(2), 2, 2.0.into(), &cfg()).unwrap();
        assert!(r.value.abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn single_state_ensemble_is_zero() {
        let ch = random_channel(2, 2, 2, 3).unwrap();
        let r = holevo_alpha(&ch, 1, 2.0.into(), &cfg()).unwrap();
        assert!(r.value.abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn blockwise_objective_matches_embedded_state() {
        let ch = random_channel(2, 2, 2, 5).unwrap();
        let e = decode(&random_ensemble(3, 2, &mut rng_from_seed(9)), 3, 2).unwrap();
        let fast = holevo_information(&ch, &e, 2.0.into(), &cfg()).unwrap();
        let outputs = e.outputs(&ch).unwrap();
        let cq = cq_embed(&CQState::new(e.probabilities.clone(), outputs).unwrap());
        let slow = mutual_info_primal(&cq, 2.0.into(), &cfg()).unwrap();
        assert!((fast.value - slow.value).abs() < 2e-5, "{} vs {}", fast.value, slow.value);
    }

    #[test]
    fn encode_decode_round_trip() {
        let e = basis_ensemble(3, 2);
        let back = decode(&encode(&e), 3, 2).unwrap();
        for (a, b) in e.probabilities.iter().zip(&back.probabilities) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(e.states, back.states);
    }
}
