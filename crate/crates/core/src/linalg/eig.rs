use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Relative threshold below which an eigenvalue or singular value is
/// treated as outside the support.
pub const SUPPORT_EPS: f64 = 1e-10;

/// Relative tolerance for clipping slightly negative eigenvalues of a PSD input.
pub const PSD_CLIP: f64 = 1e-12;

/// Relative tolerance on `H - H†` accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Spectral decomposition `H = V diag(λ) V†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary matrix whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub(crate) fn eigenvalues_mut(&mut self) -> &mut [f64] {
        &mut self.eigenvalues
    }

    /// Largest eigenvalue, `0` for an empty spectrum.
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()))
    }

    /// Whether eigenvalue `i` lies in the support (relative to the spectral radius).
    pub fn in_support(&self, i: usize) -> bool {
        let scale = self.spectral_radius();
        scale > 0.0 && self.eigenvalues[i].abs() > SUPPORT_EPS * scale
    }

    /// Number of eigenvalues in the support.
    pub fn rank(&self) -> usize {
        (0..self.dim()).filter(|&i| self.in_support(i)).count()
    }

    /// `V diag(f(λ_i)) V†`, summing over all eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.reconstruct(&vals)
    }

    /// `V diag(f(λ_i)) V†` over the support only; eigenvalues outside map to zero.
    pub fn map_support(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let vals: Vec<f64> = (0..self.dim())
            .map(|i| {
                if self.in_support(i) {
                    f(self.eigenvalues[i])
                } else {
                    0.0
                }
            })
            .collect();
        self.reconstruct(&vals)
    }

    /// Orthogonal projector onto the support.
    pub fn support_projector(&self) -> ComplexMatrix {
        self.map_support(|_| 1.0)
    }

    /// Decomposition of `A ⊗ B` assembled from those of `A` and `B`.
    pub fn kron(&self, other: &HermitianEig) -> HermitianEig {
        let mut vals = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.eigenvalues {
            for b in &other.eigenvalues {
                vals.push(a * b);
            }
        }
        let vecs = self.eigenvectors.kron(&other.eigenvectors).into_dmatrix();
        Self::sorted(vals, vecs)
    }

    fn sorted(vals: Vec<f64>, vecs: DMatrix<Complex64>) -> HermitianEig {
        let n = vals.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        HermitianEig {
            eigenvalues: order.iter().map(|&k| vals[k]).collect(),
            eigenvectors: ComplexMatrix::wrap(DMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])])),
        }
    }

    fn reconstruct(&self, vals: &[f64]) -> ComplexMatrix {
        let v = self.eigenvectors.as_dmatrix();
        let n = vals.len();
        let mut scaled = v.clone();
        for (j, &val) in vals.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= val;
            }
        }
        ComplexMatrix::wrap(scaled * v.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized before
/// decomposition; eigenvalues are returned in ascending order.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEig> {
    if !h.is_square() {
        return Err(Error::NotSquare(h.rows(), h.cols()));
    }
    let dev = h.hermiticity_deviation();
    if dev > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(eig_symmetrized(h.hermitian_part().as_dmatrix()))
}

/// Decomposes an already Hermitian matrix without validation.
pub(crate) fn eig_symmetrized(h: &DMatrix<Complex64>) -> HermitianEig {
    let se = h.clone().symmetric_eigen();
    HermitianEig::sorted(se.eigenvalues.iter().copied().collect(), se.eigenvectors)
}

/// Eigenvalues only, ascending, of an already Hermitian matrix.
pub(crate) fn eigenvalues_symmetrized(h: &DMatrix<Complex64>) -> Vec<f64> {
    let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Eigendecomposition of a positive semi-definite matrix. Eigenvalues in
/// `[-PSD_CLIP·λ_max, 0)` are clipped to zero; anything more negative is an error.
pub fn psd_eig(h: &ComplexMatrix) -> Result<HermitianEig> {
    let mut eig = hermitian_eig(h)?;
    clip_psd(&mut eig)?;
    Ok(eig)
}

pub(crate) fn clip_psd(eig: &mut HermitianEig) -> Result<()> {
    let lmax = eig.max_eigenvalue().max(0.0);
    for l in eig.eigenvalues.iter_mut() {
        if *l < 0.0 {
            if *l >= -PSD_CLIP * lmax {
                *l = 0.0;
            } else {
                return Err(Error::NotPsd(*l));
            }
        }
    }
    Ok(())
}

/// `H^t` for PSD `H`, taken on the support. Eigenvalues outside the support
/// stay zero for every `t`, so `t = 0` yields the support projector and
/// negative `t` the support-restricted inverse power.
pub fn matrix_power(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(psd_eig(h)?.map_support(|l| l.powf(t)))
}

/// Support-restricted natural logarithm of a PSD matrix.
pub fn matrix_log(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(psd_eig(h)?.map_support(f64::ln))
}
