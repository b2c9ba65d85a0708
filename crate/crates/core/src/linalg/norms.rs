use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::eig::{eig_symmetrized, hermitian_eig, psd_eig, HermitianEig, SUPPORT_EPS};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Order of a Schatten (quasi-)norm: a finite nonzero real or `Infinity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormOrder {
    Finite(f64),
    Infinity,
}

impl NormOrder {
    pub fn finite(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else if p == 0.0 || !p.is_finite() {
            Err(Error::ZeroNormOrder)
        } else {
            Ok(Self::Finite(p))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Self::Finite(p) => 1.0 / p,
            Self::Infinity => 0.0,
        }
    }

    /// Order with the given reciprocal; `0` maps to `Infinity`.
    pub fn from_reciprocal(r: f64) -> Result<Self> {
        if r == 0.0 {
            Ok(Self::Infinity)
        } else {
            Self::finite(1.0 / r)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Finite(p) => p,
            Self::Infinity => f64::INFINITY,
        }
    }
}

impl From<f64> for NormOrder {
    /// Panics on `0` or NaN; use [`NormOrder::finite`] for fallible construction.
    fn from(p: f64) -> Self {
        Self::finite(p).expect("norm order must be nonzero")
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for NormOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            t => t
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("norm order {s:?}: {e}")))
                .and_then(Self::finite),
        }
    }
}

/// Hölder conjugate `p'` with `1/p + 1/p' = 1`.
pub fn holder_conjugate(p: NormOrder) -> Result<NormOrder> {
    if let NormOrder::Finite(v) = p {
        if v == 0.0 {
            return Err(Error::ZeroNormOrder);
        }
    }
    NormOrder::from_reciprocal(1.0 - p.reciprocal())
}

/// Singular values in descending order, with values below the support
/// threshold set to zero.
///
/// Hermitian inputs use the eigenvalue moduli directly; everything else goes
/// through a bidiagonal SVD.
pub fn singular_values(x: &ComplexMatrix) -> Vec<f64> {
    let scale = x.max_abs();
    let mut s: Vec<f64> = if x.is_square() && x.hermiticity_deviation() <= 1e-12 * scale {
        let eig = eig_symmetrized(x.hermitian_part().as_dmatrix());
        eig.eigenvalues().iter().map(|l| l.abs()).collect()
    } else {
        x.as_dmatrix().clone().singular_values().iter().copied().collect()
    };
    s.sort_by(|a, b| b.total_cmp(a));
    let smax = s.first().copied().unwrap_or(0.0);
    for v in s.iter_mut() {
        if *v <= SUPPORT_EPS * smax {
            *v = 0.0;
        }
    }
    s
}

/// Schatten norm `(Σ s_i^p)^{1/p}` over the supported singular values.
///
/// Negative `p` is allowed and uses only the support; `0 < p < 1` gives the
/// quasi-norm value. The zero matrix has norm `0` for every order.
pub fn schatten_norm(x: &ComplexMatrix, p: NormOrder) -> Result<f64> {
    let s = singular_values(x);
    schatten_from_singular_values(&s, p)
}

pub(crate) fn schatten_from_singular_values(s: &[f64], p: NormOrder) -> Result<f64> {
    let smax = s.iter().fold(0.0f64, |m, &v| m.max(v));
    match p {
        NormOrder::Infinity => Ok(smax),
        NormOrder::Finite(pv) => {
            if pv == 0.0 {
                return Err(Error::ZeroNormOrder);
            }
            if smax == 0.0 {
                return Ok(0.0);
            }
            let sum: f64 = s
                .iter()
                .filter(|&&v| v > 0.0)
                .map(|&v| (v / smax).powf(pv))
                .sum();
            Ok(smax * sum.powf(1.0 / pv))
        }
    }
}

/// `σ^{s/2} X σ^{s/2}` given the eigendecomposition of `σ`.
pub fn gamma_map_eig(sigma: &HermitianEig, x: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    if !x.is_square() {
        return Err(Error::NotSquare(x.rows(), x.cols()));
    }
    if x.rows() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            got: x.rows(),
        });
    }
    let half = sigma.map_support(|l| l.powf(s / 2.0));
    Ok(&(&half * x) * &half)
}

/// Fractional power of the sandwich super-operator: `Γ_σ^s(X) = σ^{s/2} X σ^{s/2}`.
/// Negative `s` uses support-restricted inverse powers of `σ`.
pub fn gamma_map(sigma: &ComplexMatrix, x: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    if !sigma.is_square() {
        return Err(Error::NotSquare(sigma.rows(), sigma.cols()));
    }
    if sigma.rows() != x.rows() || !x.is_square() {
        return Err(Error::DimensionMismatch {
            expected: sigma.rows(),
            got: x.rows(),
        });
    }
    gamma_map_eig(&psd_eig(sigma)?, x, s)
}

/// Weighted norm `‖X‖_{p,σ} = ‖σ^{1/(2p)} X σ^{1/(2p)}‖_p`.
pub fn weighted_norm(x: &ComplexMatrix, p: NormOrder, sigma: &ComplexMatrix) -> Result<f64> {
    if let NormOrder::Finite(0.0) = p {
        return Err(Error::ZeroNormOrder);
    }
    schatten_norm(&gamma_map(sigma, x, p.reciprocal())?, p)
}

/// [`weighted_norm`] with a precomputed decomposition of `σ`.
pub fn weighted_norm_eig(x: &ComplexMatrix, p: NormOrder, sigma: &HermitianEig) -> Result<f64> {
    schatten_norm(&gamma_map_eig(sigma, x, p.reciprocal())?, p)
}

/// Thin singular value decomposition `X = U diag(s) V†` with `s` descending.
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(x: &ComplexMatrix) -> Svd {
    let dec = x.as_dmatrix().clone().svd(true, true);
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let u_raw = dec.u.expect("requested U");
    let vt_raw = dec.v_t.expect("requested V^T");
    let k = order.len();
    let u = ComplexMatrix::from_fn(u_raw.nrows(), k, |i, j| u_raw[(i, order[j])]);
    let v = ComplexMatrix::from_fn(vt_raw.ncols(), k, |i, j| vt_raw[(order[j], i)].conj());
    Svd {
        u,
        singular_values: order.iter().map(|&j| dec.singular_values[j]).collect(),
        v,
    }
}

/// Operator norm of a Hermitian matrix via its spectrum.
pub fn hermitian_operator_norm(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(h)?.spectral_radius())
}
