//! Seeded randomized verification suites. Each check draws independent
//! instances, evaluates a list of inequality conditions on each, and
//! aggregates the outcomes into a [`PropertyReport`].
//!
//! A condition holds when its slack is at least `-tol`. The margin of a trial
//! is the smallest slack after rescaling every condition to the check's
//! tolerance, so a trial fails exactly when its margin is below `-tolerance`.

mod closed;
mod optimized;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::AlphaOrder;
use crate::error::{Error, Result};
use crate::optimize::OptimizerConfig;
use crate::states::random::{rng_from_seed, stream_seed, SeededRng};

pub use closed::{
    ContractionInstance, ConvexityInstance, DpiChannelKind, DpiInstance, HolderInstance, InterpolationInstance,
    LimitInstance, MonotonicityInstance, PositivityInstance,
};
pub use optimized::{ChiInstance, DualityInstance, MiAdditivityInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Positivity,
    Dpi,
    Contraction,
    MonotonicityAlpha,
    Convexity,
    Interpolation,
    HolderFamily,
    Duality,
    MiAdditivity,
    ChiSuperadditivity,
    LimitAlpha1,
}

impl CheckName {
    pub const ALL: [CheckName; 11] = [
        CheckName::Positivity,
        CheckName::Dpi,
        CheckName::Contraction,
        CheckName::MonotonicityAlpha,
        CheckName::Convexity,
        CheckName::Interpolation,
        CheckName::HolderFamily,
        CheckName::Duality,
        CheckName::MiAdditivity,
        CheckName::ChiSuperadditivity,
        CheckName::LimitAlpha1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Positivity => "positivity",
            CheckName::Dpi => "dpi",
            CheckName::Contraction => "contraction",
            CheckName::MonotonicityAlpha => "monotonicity_alpha",
            CheckName::Convexity => "convexity",
            CheckName::Interpolation => "interpolation",
            CheckName::HolderFamily => "holder_family",
            CheckName::Duality => "duality",
            CheckName::MiAdditivity => "mi_additivity",
            CheckName::ChiSuperadditivity => "chi_superadditivity",
            CheckName::LimitAlpha1 => "limit_alpha1",
        }
    }

    /// Failure threshold: a trial fails when its margin is below `-tolerance`.
    pub fn tolerance(self) -> f64 {
        match self {
            CheckName::Positivity => 1e-9,
            CheckName::Dpi => 1e-8,
            CheckName::Contraction => 1e-8,
            CheckName::MonotonicityAlpha => 1e-9,
            CheckName::Convexity => 1e-8,
            CheckName::Interpolation => 1e-9,
            CheckName::HolderFamily => 1e-9,
            CheckName::Duality => 2e-5,
            CheckName::MiAdditivity => 5e-5,
            CheckName::ChiSuperadditivity => 1e-6,
            CheckName::LimitAlpha1 => 1e-9,
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            CheckName::Positivity => 500,
            CheckName::Dpi => 200,
            CheckName::Contraction => 100,
            CheckName::MonotonicityAlpha => 100,
            CheckName::Convexity => 100,
            CheckName::Interpolation => 200,
            CheckName::HolderFamily => 200,
            CheckName::Duality => 30,
            CheckName::MiAdditivity => 20,
            CheckName::ChiSuperadditivity => 10,
            CheckName::LimitAlpha1 => 50,
        }
    }

    /// Default dimension list. For `duality` these are the dimensions of
    /// subsystem C (A and B are qubits).
    pub fn default_dims(self) -> Vec<usize> {
        match self {
            CheckName::Positivity
            | CheckName::MonotonicityAlpha
            | CheckName::Interpolation
            | CheckName::HolderFamily => vec![2, 3, 4],
            CheckName::Dpi | CheckName::Contraction | CheckName::Convexity | CheckName::LimitAlpha1 => vec![2, 3],
            CheckName::Duality => vec![2, 4],
            CheckName::MiAdditivity | CheckName::ChiSuperadditivity => vec![2],
        }
    }

    pub fn default_alphas(self) -> Vec<AlphaOrder> {
        let f = |v: &[f64]| v.iter().map(|&a| AlphaOrder::Finite(a)).collect::<Vec<_>>();
        match self {
            CheckName::Positivity => f(&[0.5, 0.75, 1.5, 2.0, 3.0, 10.0]),
            CheckName::Dpi => {
                let mut v = f(&[0.5, 0.8, 1.25, 2.0, 4.0]);
                v.push(AlphaOrder::Infinity);
                v
            }
            CheckName::Contraction => f(&[1.5, 2.0, 4.0]),
            CheckName::MonotonicityAlpha => f(&[1.05, 1.2, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0]),
            CheckName::Convexity => f(&[1.2, 1.5, 2.0, 3.0, 6.0]),
            CheckName::Duality | CheckName::MiAdditivity | CheckName::ChiSuperadditivity => f(&[1.5, 2.0, 3.0]),
            CheckName::Interpolation | CheckName::HolderFamily | CheckName::LimitAlpha1 => Vec::new(),
        }
    }

    fn salt(self) -> u64 {
        self.as_str()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown check {s:?}")))
    }
}

/// Parameters of one verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub dims: Vec<usize>,
    /// Order grid; ignored by checks with fixed exponent sets
    /// (`interpolation`, `holder_family`, `limit_alpha1`).
    pub alphas: Vec<AlphaOrder>,
    pub trials: usize,
    pub seed: u64,
    /// Replaces the check's default tolerance; every condition is rescaled
    /// by the same factor.
    pub tolerance: Option<f64>,
    /// Used by optimizer-backed checks; the seed is replaced per trial.
    pub optimizer: OptimizerConfig,
}

impl TrialPlan {
    pub fn default_for(check: CheckName, seed: u64) -> Self {
        Self {
            dims: check.default_dims(),
            alphas: check.default_alphas(),
            trials: check.default_trials(),
            seed,
            tolerance: None,
            optimizer: OptimizerConfig::default(),
        }
    }

    pub fn validate(&self, check: CheckName) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trial count must be at least 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidConfig(format!("dimensions must be at least 2, got {:?}", self.dims)));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidConfig(format!("tolerance must be positive, got {t}")));
            }
        }
        self.optimizer.validate()?;
        let needs_alphas = !check.default_alphas().is_empty();
        if needs_alphas && self.alphas.is_empty() {
            return Err(Error::InvalidConfig(format!("{check} needs at least one alpha")));
        }
        let above_one = matches!(
            check,
            CheckName::Contraction
                | CheckName::MonotonicityAlpha
                | CheckName::Convexity
                | CheckName::Duality
                | CheckName::MiAdditivity
                | CheckName::ChiSuperadditivity
        );
        let finite_only = matches!(check, CheckName::Contraction | CheckName::Convexity | CheckName::Duality);
        for &a in &self.alphas {
            if above_one && !a.exceeds_one() {
                return Err(Error::InvalidAlpha(format!("{check} requires alpha > 1, got {a}")));
            }
            if finite_only && !matches!(a, AlphaOrder::Finite(_)) {
                return Err(Error::InvalidAlpha(format!("{check} requires finite alpha, got {a}")));
            }
            if !needs_alphas {
                continue;
            }
            if check == CheckName::Positivity || check == CheckName::Dpi {
                if let AlphaOrder::Finite(v) = a {
                    if v < 0.5 {
                        return Err(Error::InvalidAlpha(format!("{check} requires alpha >= 1/2, got {a}")));
                    }
                }
            }
        }
        if check == CheckName::Convexity && self.alphas.len() < 3 {
            return Err(Error::InvalidConfig("convexity needs at least three alphas".into()));
        }
        if check == CheckName::MonotonicityAlpha && self.alphas.len() < 2 {
            return Err(Error::InvalidConfig("monotonicity needs at least two alphas".into()));
        }
        Ok(())
    }

    fn tolerance_scale(&self, check: CheckName) -> f64 {
        self.tolerance.map_or(1.0, |t| t / check.tolerance())
    }

    pub(crate) fn pick_dim(&self, rng: &mut SeededRng) -> usize {
        self.dims[rng.random_range(0..self.dims.len())]
    }
}

/// One inequality evaluated on a trial: holds when `slack ≥ -tol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub label: String,
    pub slack: f64,
    pub tol: f64,
}

impl Condition {
    /// `value ≥ 0` up to `tol`.
    pub fn at_least(label: impl Into<String>, slack: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            slack: if slack.is_nan() { f64::NEG_INFINITY } else { slack },
            tol,
        }
    }

    /// `|diff| ≤ tol`.
    pub fn equal(label: impl Into<String>, diff: f64, tol: f64) -> Self {
        Self::at_least(label, -diff.abs(), tol)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub conditions: Vec<Condition>,
    /// An optimizer run did not converge; the trial is excluded from failures.
    pub inconclusive: bool,
    /// Soft diagnostics that do not count as failures.
    pub warnings: Vec<String>,
}

impl TrialOutcome {
    /// Smallest slack rescaled to the check tolerance, with the label of the
    /// condition attaining it. `None` when there are no conditions.
    pub fn margin(&self, check: CheckName) -> Option<(f64, &str)> {
        let t = check.tolerance();
        self.conditions
            .iter()
            .map(|c| (c.slack * (t / c.tol), c.label.as_str()))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    pub fn failed(&self, check: CheckName, scale: f64) -> bool {
        !self.inconclusive && self.margin(check).is_some_and(|(m, _)| m < -check.tolerance() * scale)
    }
}

/// Serialized inputs of a single trial.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "check", content = "data", rename_all = "snake_case")]
pub enum Instance {
    Positivity(PositivityInstance),
    Dpi(DpiInstance),
    Contraction(ContractionInstance),
    MonotonicityAlpha(MonotonicityInstance),
    Convexity(ConvexityInstance),
    Interpolation(InterpolationInstance),
    HolderFamily(HolderInstance),
    Duality(DualityInstance),
    MiAdditivity(MiAdditivityInstance),
    ChiSuperadditivity(ChiInstance),
    LimitAlpha1(LimitInstance),
}

impl Instance {
    pub fn check(&self) -> CheckName {
        match self {
            Instance::Positivity(_) => CheckName::Positivity,
            Instance::Dpi(_) => CheckName::Dpi,
            Instance::Contraction(_) => CheckName::Contraction,
            Instance::MonotonicityAlpha(_) => CheckName::MonotonicityAlpha,
            Instance::Convexity(_) => CheckName::Convexity,
            Instance::Interpolation(_) => CheckName::Interpolation,
            Instance::HolderFamily(_) => CheckName::HolderFamily,
            Instance::Duality(_) => CheckName::Duality,
            Instance::MiAdditivity(_) => CheckName::MiAdditivity,
            Instance::ChiSuperadditivity(_) => CheckName::ChiSuperadditivity,
            Instance::LimitAlpha1(_) => CheckName::LimitAlpha1,
        }
    }

    pub fn generate(check: CheckName, plan: &TrialPlan, trial: usize, seed: u64) -> Result<Instance> {
        let rng = &mut rng_from_seed(seed);
        let mut opt = plan.optimizer.clone();
        opt.seed = seed;
        Ok(match check {
            CheckName::Positivity => Instance::Positivity(PositivityInstance::generate(plan, trial, rng)?),
            CheckName::Dpi => Instance::Dpi(DpiInstance::generate(plan, trial, rng)?),
            CheckName::Contraction => Instance::Contraction(ContractionInstance::generate(plan, trial, rng)?),
            CheckName::MonotonicityAlpha => {
                Instance::MonotonicityAlpha(MonotonicityInstance::generate(plan, rng)?)
            }
            CheckName::Convexity => Instance::Convexity(ConvexityInstance::generate(plan, rng)?),
            CheckName::Interpolation => Instance::Interpolation(InterpolationInstance::generate(plan, trial, rng)?),
            CheckName::HolderFamily => Instance::HolderFamily(HolderInstance::generate(plan, rng)?),
            CheckName::Duality => Instance::Duality(DualityInstance::generate(plan, trial, rng, opt)?),
            CheckName::MiAdditivity => Instance::MiAdditivity(MiAdditivityInstance::generate(plan, trial, rng, opt)?),
            CheckName::ChiSuperadditivity => {
                Instance::ChiSuperadditivity(ChiInstance::generate(plan, trial, rng, opt)?)
            }
            CheckName::LimitAlpha1 => Instance::LimitAlpha1(LimitInstance::generate(plan, trial, rng)?),
        })
    }

    pub fn evaluate(&self) -> Result<TrialOutcome> {
        match self {
            Instance::Positivity(i) => i.evaluate(),
            Instance::Dpi(i) => i.evaluate(),
            Instance::Contraction(i) => i.evaluate(),
            Instance::MonotonicityAlpha(i) => i.evaluate(),
            Instance::Convexity(i) => i.evaluate(),
            Instance::Interpolation(i) => i.evaluate(),
            Instance::HolderFamily(i) => i.evaluate(),
            Instance::Duality(i) => i.evaluate(),
            Instance::MiAdditivity(i) => i.evaluate(),
            Instance::ChiSuperadditivity(i) => i.evaluate(),
            Instance::LimitAlpha1(i) => i.evaluate(),
        }
    }
}

/// A failing trial, sufficient to replay it in isolation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub seed: u64,
    pub tolerance: f64,
    #[serde(with = "finite_or_null")]
    pub margin: Option<f64>,
    pub condition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub instance: Instance,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub check: CheckName,
    pub trials: usize,
    pub failures: usize,
    pub inconclusive: usize,
    pub warnings: usize,
    /// Smallest rescaled slack over conclusive trials; `None` if there were none.
    #[serde(with = "finite_or_null")]
    pub worst_margin: Option<f64>,
    pub worst_condition: Option<String>,
    pub seed: u64,
    pub elapsed_s: f64,
    /// Locations of serialized failing instances, filled in by the caller
    /// that persists [`PropertyReport::failed`].
    pub failure_instances: Vec<String>,
    #[serde(skip)]
    pub failed: Vec<FailureRecord>,
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_finite() => s.serialize_f64(*x),
            Some(x) if *x > 0.0 => s.serialize_str("inf"),
            Some(_) => s.serialize_str("-inf"),
            None => s.serialize_none(),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(match Option::<Repr>::deserialize(d)? {
            None => None,
            Some(Repr::Num(x)) => Some(x),
            Some(Repr::Str(s)) if s == "inf" => Some(f64::INFINITY),
            Some(Repr::Str(s)) if s == "-inf" => Some(f64::NEG_INFINITY),
            Some(Repr::Str(s)) => return Err(serde::de::Error::custom(format!("bad margin {s:?}"))),
        })
    }
}

/// Seed of trial `trial` of `check` under master seed `seed`.
pub fn trial_seed(check: CheckName, seed: u64, trial: usize) -> u64 {
    stream_seed(stream_seed(seed, check.salt()), trial as u64)
}

struct TrialResult {
    outcome: Option<TrialOutcome>,
    error: Option<String>,
    instance: Instance,
}

/// Runs every trial of `check` under `plan`.
pub fn run_check(check: CheckName, plan: &TrialPlan) -> Result<PropertyReport> {
    plan.validate(check)?;
    let start = Instant::now();
    let scale = plan.tolerance_scale(check);
    let results: Vec<TrialResult> = (0..plan.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(check, plan.seed, i);
            let instance = Instance::generate(check, plan, i, seed)?;
            let (outcome, error) = match instance.evaluate() {
                Ok(o) => (Some(o), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Ok(TrialResult {
                outcome,
                error,
                instance,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = PropertyReport {
        check,
        trials: plan.trials,
        failures: 0,
        inconclusive: 0,
        warnings: 0,
        worst_margin: None,
        worst_condition: None,
        seed: plan.seed,
        elapsed_s: 0.0,
        failure_instances: Vec::new(),
        failed: Vec::new(),
    };
    for (i, r) in results.into_iter().enumerate() {
        let (margin, label, failed) = match &r.outcome {
            None => (Some(f64::NEG_INFINITY), Some("error".to_string()), true),
            Some(o) => {
                report.warnings += o.warnings.len();
                if o.inconclusive {
                    report.inconclusive += 1;
                    continue;
                }
                let m = o.margin(check);
                (m.map(|x| x.0), m.map(|x| x.1.to_string()), o.failed(check, scale))
            }
        };
        if let Some(m) = margin {
            if report.worst_margin.is_none_or(|w| m < w) {
                report.worst_margin = Some(m);
                report.worst_condition = label.clone();
            }
        }
        if failed {
            report.failures += 1;
            report.failed.push(FailureRecord {
                trial: i,
                seed: trial_seed(check, plan.seed, i),
                tolerance: check.tolerance() * scale,
                margin,
                condition: label,
                error: r.error,
                instance: r.instance,
            });
        }
    }
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Result of re-evaluating a stored instance.
#[derive(Clone, Debug, Serialize)]
pub struct ReplayOutcome {
    pub check: CheckName,
    #[serde(with = "finite_or_null")]
    pub margin: Option<f64>,
    pub condition: Option<String>,
    pub tolerance: f64,
    pub passed: bool,
    pub inconclusive: bool,
    pub outcome: TrialOutcome,
}

/// Re-evaluates an instance at the given tolerance (the check default if `None`).
pub fn replay(instance: &Instance, tolerance: Option<f64>) -> Result<ReplayOutcome> {
    let check = instance.check();
    let tol = tolerance.unwrap_or(check.tolerance());
    let outcome = instance.evaluate()?;
    let m = outcome.margin(check);
    let failed = outcome.failed(check, tol / check.tolerance());
    Ok(ReplayOutcome {
        check,
        margin: m.map(|x| x.0),
        condition: m.map(|x| x.1.to_string()),
        tolerance: tol,
        passed: !failed,
        inconclusive: outcome.inconclusive,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in CheckName::ALL {
            assert_eq!(c.as_str().parse::<CheckName>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{c}\""));
        }
        assert!("nope".parse::<CheckName>().is_err());
    }

    #[test]
    fn margin_rescales_to_check_tolerance() {
        let o = TrialOutcome {
            conditions: vec![
                Condition::at_least("a", -0.5e-9, 1e-9),
                Condition::equal("b", 2e-8, 1e-8),
            ],
            ..TrialOutcome::default()
        };
        let (m, label) = o.margin(CheckName::Positivity).unwrap();
        assert_eq!(label, "b");
        assert!((m + 2e-9).abs() < 1e-22);
        assert!(o.failed(CheckName::Positivity, 1.0));
        assert!(!o.failed(CheckName::Positivity, 3.0));
        let nan = Condition::at_least("n", f64::NAN, 1.0);
        assert_eq!(nan.slack, f64::NEG_INFINITY);
    }

    #[test]
    fn plan_validation() {
        let mut p = TrialPlan::default_for(CheckName::Dpi, 1);
        assert!(p.validate(CheckName::Dpi).is_ok());
        p.dims = vec![1];
        assert!(p.validate(CheckName::Dpi).is_err());
        let mut p = TrialPlan::default_for(CheckName::Duality, 1);
        p.alphas = vec![AlphaOrder::Finite(0.5)];
        assert!(p.validate(CheckName::Duality).is_err());
        p.alphas = vec![];
        assert!(p.validate(CheckName::Duality).is_err());
        let mut p = TrialPlan::default_for(CheckName::Positivity, 1);
        p.trials = 0;
        assert!(p.validate(CheckName::Positivity).is_err());
    }

    #[test]
    fn trial_seeds_are_distinct_across_checks() {
        assert_ne!(
            trial_seed(CheckName::Positivity, 42, 0),
            trial_seed(CheckName::Dpi, 42, 0)
        );
        assert_ne!(trial_seed(CheckName::Dpi, 42, 0), trial_seed(CheckName::Dpi, 42, 1));
    }
}
