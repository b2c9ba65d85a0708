//! Closed-form entropic quantities: classical Rényi divergence, the sandwiched
//! Rényi divergence for `α ∈ (0,1) ∪ (1,∞]`, Rényi entropy and the Umegaki
//! relative entropy that serves as the `α → 1` reference.
//!
//! The sandwiched divergence is evaluated in norm form,
//! `D_α(ρ‖σ) = α' log ‖σ^{-1/(2α')} ρ σ^{-1/(2α')}‖_α` with `α' = α/(α-1)`,
//! and equals `+∞` when `α > 1` and the support of `ρ` is not contained in
//! that of `σ`. [`sandwiched_renyi_trace_form`] evaluates the same quantity
//! through `tr (σ^{(1-α)/2α} ρ σ^{(1-α)/2α})^α` as an independent route.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_symmetrized, eigenvalues_symmetrized, psd_eig, schatten_from_singular_values, ComplexMatrix, HermitianEig,
    NormOrder, SUPPORT_EPS,
};
use crate::states::DensityMatrix;

/// Residual `‖(I - Π_σ) ρ (I - Π_σ)‖_∞` above which the support of `ρ` is
/// considered to leave the support of `σ`.
pub const SUPPORT_RESIDUAL_TOL: f64 = 1e-9;

/// Finite orders closer than this to `1` must be requested as [`AlphaOrder::One`].
pub const ALPHA_ONE_GAP: f64 = 1e-6;

/// Rényi order. Serialized as a number, `"inf"`, or `"one"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlphaJson", into = "AlphaJson")]
pub enum AlphaOrder {
    Finite(f64),
    /// The `α → 1` limit (Umegaki relative entropy / von Neumann entropy).
    One,
    Infinity,
}

impl AlphaOrder {
    pub fn finite(alpha: f64) -> Result<Self> {
        if alpha == f64::INFINITY {
            return Ok(Self::Infinity);
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidAlpha(format!("{alpha} is not positive")));
        }
        if (alpha - 1.0).abs() <= ALPHA_ONE_GAP {
            return Err(Error::InvalidAlpha(format!(
                "{alpha} is within {ALPHA_ONE_GAP:e} of 1; request the limit explicitly"
            )));
        }
        Ok(Self::Finite(alpha))
    }

    /// Numeric value, with `One ↦ 1` and `Infinity ↦ ∞`.
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(a) => a,
            Self::One => 1.0,
            Self::Infinity => f64::INFINITY,
        }
    }

    /// Hölder conjugate `α' = α/(α-1)`; `∞' = 1`, `1' = ∞`.
    pub fn conjugate(self) -> f64 {
        match self {
            Self::Finite(a) => a / (a - 1.0),
            Self::One => f64::INFINITY,
            Self::Infinity => 1.0,
        }
    }

    pub fn exceeds_one(self) -> bool {
        match self {
            Self::Finite(a) => a > 1.0,
            Self::One => false,
            Self::Infinity => true,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AlphaJson {
    Number(f64),
    Symbol(String),
}

impl TryFrom<AlphaJson> for AlphaOrder {
    type Error = Error;
    fn try_from(j: AlphaJson) -> Result<Self> {
        match j {
            AlphaJson::Number(a) if a == 1.0 => Ok(Self::One),
            AlphaJson::Number(a) => Self::finite(a),
            AlphaJson::Symbol(s) => s.parse(),
        }
    }
}

impl From<AlphaOrder> for AlphaJson {
    fn from(a: AlphaOrder) -> Self {
        match a {
            AlphaOrder::Finite(v) => AlphaJson::Number(v),
            AlphaOrder::One => AlphaJson::Symbol("one".into()),
            AlphaOrder::Infinity => AlphaJson::Symbol("inf".into()),
        }
    }
}

impl From<f64> for AlphaOrder {
    /// Panics on invalid orders; use [`AlphaOrder::finite`] for fallible construction.
    fn from(a: f64) -> Self {
        Self::finite(a).expect("valid Renyi order")
    }
}

impl fmt::Display for AlphaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(a) => write!(f, "{a}"),
            Self::One => write!(f, "1"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for AlphaOrder {
    type Err = Error;
    /// Accepts a positive number, `inf`, or `1`/`one` for the limit.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            "one" | "1" | "1.0" => Ok(Self::One),
            t => t
                .parse::<f64>()
                .map_err(|e| Error::InvalidAlpha(format!("{s:?}: {e}")))
                .and_then(Self::finite),
        }
    }
}

/// A divergence in nats, possibly `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceValue {
    pub value: f64,
    /// The support of the first argument is not contained in that of the second.
    pub support_violated: bool,
}

impl DivergenceValue {
    pub fn finite(value: f64) -> Self {
        Self {
            value,
            support_violated: false,
        }
    }

    pub fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            support_violated: true,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

fn check_simplex(p: &[f64], name: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::NotSimplex(format!("{name} is empty")));
    }
    if p.iter().any(|&x| !(x >= -1e-10) || !x.is_finite()) {
        return Err(Error::NotSimplex(format!("{name} has a negative entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return Err(Error::NotSimplex(format!("{name} sums to {s}")));
    }
    Ok(())
}

/// Classical Rényi divergence of probability vectors in nats. Entries at or
/// below `SUPPORT_EPS` count as zero; any `q_i = 0 < p_i` gives `+∞`.
pub fn classical_renyi(p: &[f64], q: &[f64], alpha: AlphaOrder) -> Result<DivergenceValue> {
    check_simplex(p, "p")?;
    check_simplex(q, "q")?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let is_zero = |x: f64| x <= SUPPORT_EPS;
    if p.iter().zip(q).any(|(&pi, &qi)| !is_zero(pi) && is_zero(qi)) {
        return Ok(DivergenceValue::infinite());
    }
    let pairs = p.iter().zip(q).filter(|(&pi, _)| !is_zero(pi));
    let value = match alpha {
        AlphaOrder::Infinity => pairs.map(|(pi, qi)| pi / qi).fold(0.0, f64::max).ln(),
        AlphaOrder::One => pairs.map(|(pi, qi)| pi * (pi / qi).ln()).sum(),
        AlphaOrder::Finite(a) => {
            let s: f64 = pairs.map(|(pi, qi)| pi.powf(a) * qi.powf(1.0 - a)).sum();
            s.ln() / (a - 1.0)
        }
    };
    Ok(DivergenceValue::finite(value))
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        });
    }
    Ok(())
}

/// `‖(I - Π_σ) ρ (I - Π_σ)‖_∞`.
pub fn support_residual(rho: &ComplexMatrix, sigma: &HermitianEig) -> f64 {
    let n = sigma.dim();
    if sigma.rank() == n {
        return 0.0;
    }
    let q = &ComplexMatrix::identity(n) - &sigma.support_projector();
    let r = (&(&q * rho) * &q).hermitian_part();
    eig_symmetrized(r.as_dmatrix()).spectral_radius()
}

/// Eigenvalues of a Hermitian PSD sandwich, with rounding noise removed.
fn sandwich_spectrum(m: &ComplexMatrix) -> Vec<f64> {
    let vals = eigenvalues_symmetrized(m.hermitian_part().as_dmatrix());
    let lmax = vals.last().copied().unwrap_or(0.0).max(0.0);
    vals.into_iter().map(|l| if l > SUPPORT_EPS * lmax { l } else { 0.0 }).collect()
}

/// Sandwiched divergence for a PSD second argument that need not have unit
/// trace (e.g. `I_A ⊗ σ_B`). `sigma` is its clipped eigendecomposition.
pub fn sandwiched_renyi_eig(
    rho: &ComplexMatrix,
    sigma: &HermitianEig,
    alpha: AlphaOrder,
) -> Result<DivergenceValue> {
    check_same_dim(sigma.dim(), rho.rows())?;
    if let AlphaOrder::One = alpha {
        return umegaki_eig(rho, sigma);
    }
    let violated = support_residual(rho, sigma) > SUPPORT_RESIDUAL_TOL;
    if violated && alpha.exceeds_one() {
        return Ok(DivergenceValue::infinite());
    }
    let ap = alpha.conjugate();
    let s = -1.0 / (2.0 * ap);
    let sig_pow = sigma.map_support(|l| l.powf(s));
    let value = sandwich_log_norm(rho, &sig_pow, alpha)?;
    Ok(DivergenceValue {
        value,
        support_violated: violated,
    })
}

/// `α' log ‖P ρ P‖_α` for a precomputed `P = σ^{-1/(2α')}`.
pub(crate) fn sandwich_log_norm(rho: &ComplexMatrix, sig_pow: &ComplexMatrix, alpha: AlphaOrder) -> Result<f64> {
    let m = &(sig_pow * rho) * sig_pow;
    let spec = sandwich_spectrum(&m);
    let order = match alpha {
        AlphaOrder::Finite(a) => NormOrder::Finite(a),
        AlphaOrder::Infinity => NormOrder::Infinity,
        AlphaOrder::One => unreachable!("handled by caller"),
    };
    let norm = schatten_from_singular_values(&spec, order)?;
    let ap = alpha.conjugate();
    if norm == 0.0 {
        // ρ orthogonal to supp σ: log 0 = -∞, scaled by α' < 0 for α < 1.
        return Ok(if ap < 0.0 { f64::INFINITY } else { f64::NEG_INFINITY });
    }
    Ok(ap * norm.ln())
}

/// Sandwiched Rényi divergence `D_α(ρ‖σ)` in nats.
pub fn sandwiched_renyi(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: AlphaOrder,
) -> Result<DivergenceValue> {
    check_same_dim(rho.dim(), sigma.dim())?;
    sandwiched_renyi_eig(rho.matrix(), sigma.eig(), alpha)
}

/// [`sandwiched_renyi`] against an arbitrary PSD operator (unit trace not required).
pub fn sandwiched_renyi_psd(
    rho: &DensityMatrix,
    sigma: &ComplexMatrix,
    alpha: AlphaOrder,
) -> Result<DivergenceValue> {
    check_same_dim(rho.dim(), sigma.rows())?;
    sandwiched_renyi_eig(rho.matrix(), &psd_eig(sigma)?, alpha)
}

/// Trace form `(1/(α-1)) log tr (σ^{(1-α)/2α} ρ σ^{(1-α)/2α})^α`, evaluated by
/// a matrix power of the sandwich followed by a trace. `α = ∞` falls back to
/// the operator norm of `σ^{-1/2} ρ σ^{-1/2}`.
pub fn sandwiched_renyi_trace_form(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: AlphaOrder,
) -> Result<DivergenceValue> {
    check_same_dim(rho.dim(), sigma.dim())?;
    let violated = support_residual(rho.matrix(), sigma.eig()) > SUPPORT_RESIDUAL_TOL;
    match alpha {
        AlphaOrder::One => umegaki(rho, sigma),
        AlphaOrder::Infinity => {
            if violated {
                return Ok(DivergenceValue::infinite());
            }
            let p = sigma.power(-0.5);
            let m = (&(&p * rho.matrix()) * &p).hermitian_part();
            Ok(DivergenceValue::finite(psd_eig(&m)?.max_eigenvalue().ln()))
        }
        AlphaOrder::Finite(a) => {
            if violated && a > 1.0 {
                return Ok(DivergenceValue::infinite());
            }
            let p = sigma.power((1.0 - a) / (2.0 * a));
            let m = (&(&p * rho.matrix()) * &p).hermitian_part();
            let powered = psd_eig(&m)?.map_support(|l| l.powf(a));
            let tr = powered.trace().re;
            let value = if tr <= 0.0 {
                if a < 1.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                tr.ln() / (a - 1.0)
            };
            Ok(DivergenceValue {
                value,
                support_violated: violated,
            })
        }
    }
}

/// Rényi entropy `H_α(ρ) = (1/(1-α)) log tr ρ^α` in nats; `α = 1` gives the
/// von Neumann entropy and `α = ∞` the min-entropy.
pub fn renyi_entropy(rho: &DensityMatrix, alpha: AlphaOrder) -> f64 {
    let lambdas: Vec<f64> = (0..rho.dim())
        .filter(|&i| rho.eig().in_support(i))
        .map(|i| rho.eig().eigenvalues()[i])
        .collect();
    match alpha {
        AlphaOrder::One => -lambdas.iter().map(|l| l * l.ln()).sum::<f64>(),
        AlphaOrder::Infinity => -lambdas.iter().fold(0.0f64, |m, &l| m.max(l)).ln(),
        AlphaOrder::Finite(a) => lambdas.iter().map(|l| l.powf(a)).sum::<f64>().ln() / (1.0 - a),
    }
}

fn umegaki_eig(rho: &ComplexMatrix, sigma: &HermitianEig) -> Result<DivergenceValue> {
    if support_residual(rho, sigma) > SUPPORT_RESIDUAL_TOL {
        return Ok(DivergenceValue::infinite());
    }
    let rho_eig = psd_eig(&rho.hermitian_part())?;
    let neg_entropy: f64 = (0..rho_eig.dim())
        .filter(|&i| rho_eig.in_support(i))
        .map(|i| {
            let l = rho_eig.eigenvalues()[i];
            l * l.ln()
        })
        .sum();
    let log_sigma = sigma.map_support(f64::ln);
    let cross = (rho * &log_sigma).trace().re;
    Ok(DivergenceValue::finite(neg_entropy - cross))
}

/// Umegaki relative entropy `tr ρ (log ρ - log σ)` with support-restricted
/// logarithms; `+∞` on support violation.
pub fn umegaki(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceValue> {
    check_same_dim(rho.dim(), sigma.dim())?;
    umegaki_eig(rho.matrix(), sigma.eig())
}
