use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Completeness tolerance `‖Σ K†K - I‖`.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelJson", into = "ChannelJson")]
pub struct Channel {
    input_dim: usize,
    output_dim: usize,
    kraus: Vec<ComplexMatrix>,
}

#[derive(Clone, Serialize, Deserialize)]
struct ChannelJson {
    #[serde(rename = "in")]
    input: usize,
    #[serde(rename = "out")]
    output: usize,
    kraus: Vec<ComplexMatrix>,
}

impl TryFrom<ChannelJson> for Channel {
    type Error = Error;
    fn try_from(j: ChannelJson) -> Result<Self> {
        Channel::new(j.input, j.output, j.kraus)
    }
}

impl From<Channel> for ChannelJson {
    fn from(c: Channel) -> Self {
        ChannelJson {
            input: c.input_dim,
            output: c.output_dim,
            kraus: c.kraus,
        }
    }
}

impl Channel {
    /// Validates operator shapes and trace preservation.
    pub fn new(input_dim: usize, output_dim: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        if let Some(k) = kraus
            .iter()
            .find(|k| k.rows() != output_dim || k.cols() != input_dim)
        {
            return Err(Error::InvalidChannel(format!(
                "Kraus operator is {}x{}, expected {output_dim}x{input_dim}",
                k.rows(),
                k.cols()
            )));
        }
        let ch = Self {
            input_dim,
            output_dim,
            kraus,
        };
        let err = ch.completeness_error();
        if err > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving (completeness error {err:e})"
            )));
        }
        Ok(ch)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Largest entry modulus of `Σ K†K - I`.
    pub fn completeness_error(&self) -> f64 {
        let mut acc = ComplexMatrix::identity(self.input_dim).scale(-1.0);
        for k in &self.kraus {
            acc = &acc + &(&k.adjoint() * k);
        }
        acc.max_abs()
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            input_dim: dim,
            output_dim: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// `ρ ↦ U ρ U†`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let n = u.rows();
        Self::new(n, n, vec![u])
    }

    /// Replaces every input with `I/d`; Kraus set `{|i><j| / √d}`.
    pub fn completely_depolarizing(dim: usize) -> Self {
        let w = 1.0 / (dim as f64).sqrt();
        let mut kraus = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                kraus.push(ComplexMatrix::from_fn(dim, dim, |r, c| {
                    if r == i && c == j {
                        Complex64::new(w, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }));
            }
        }
        Self {
            input_dim: dim,
            output_dim: dim,
            kraus,
        }
    }

    /// Partial trace over subsystem 1 of a bipartite input `d_keep ⊗ d_traced`.
    pub fn trace_out_second(d_keep: usize, d_traced: usize) -> Self {
        let kraus = (0..d_traced)
            .map(|e| {
                ComplexMatrix::from_fn(d_keep, d_keep * d_traced, |o, i| {
                    if i == o * d_traced + e {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Self {
            input_dim: d_keep * d_traced,
            output_dim: d_keep,
            kraus,
        }
    }

    /// `Φ ⊗ Φ'` with Kraus operators `K_i ⊗ K'_j`.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kron(b));
            }
        }
        Channel {
            input_dim: self.input_dim * other.input_dim,
            output_dim: self.output_dim * other.output_dim,
            kraus,
        }
    }

    /// `Σ K X K†` for an arbitrary square operator `X`.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.input_dim || x.cols() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.output_dim, self.output_dim);
        for k in &self.kraus {
            out = &out + &(&(k * x) * &k.adjoint());
        }
        Ok(out)
    }

    /// Adjoint map `Σ K† Y K`, acting on output-space operators.
    pub fn apply_adjoint(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        if y.rows() != self.output_dim || y.cols() != self.output_dim {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim,
                got: y.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.input_dim, self.input_dim);
        for k in &self.kraus {
            out = &out + &(&(&k.adjoint() * y) * k);
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        apply_channel(self, rho)
    }
}

/// `Φ(ρ) = Σ K ρ K†`.
pub fn apply_channel(channel: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = channel.apply_matrix(rho.matrix())?.hermitian_part();
    let tr = out.trace().re;
    Ok(DensityMatrix::from_trusted(
        out.scale(1.0 / tr),
        vec![channel.output_dim],
    ))
}
