//! Seeded instance generators.
//!
//! Every generator is a pure function of its shape parameters and a 64-bit
//! seed. Per-trial streams are derived with [`stream_seed`], so a trial's
//! instance does not depend on which thread or in which order it runs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::channel::Channel;
use super::density::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub type SeededRng = ChaCha20Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`.
pub fn stream_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian (real and imaginary parts independent `N(0, 1)`).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `rows × cols` matrix of independent complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    // Row-major draw order so the stream maps onto entries predictably.
    let entries: Vec<Complex64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j])
}

/// Haar-distributed isometry (`rows ≥ cols`) from the QR factorization of a
/// Gaussian matrix, with column phases fixed so that `diag(R)` is positive real.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if cols > rows {
        return Err(Error::InvalidChannel(format!(
            "isometry needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let g = ginibre(rows, cols, rng).into_dmatrix();
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..rows {
            out[(i, j)] = q[(i, j)] * phase;
        }
    }
    ComplexMatrix::from_dmatrix(out)
}

pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    haar_isometry(n, n, rng).expect("square isometry")
}

/// Ginibre-induced density matrix `GG† / tr(GG†)` with `G` of shape `dim × rank`.
pub fn random_density_with<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::RankExceedsDim { rank, dim });
    }
    let g = ginibre(dim, rank, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(w.scale(1.0 / tr).hermitian_part(), None)
}

/// [`random_density_with`] on a fresh stream seeded by `seed`.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(dim, rank, &mut rng_from_seed(seed))
}

/// Haar-random pure state on the tensor product of `dims`.
pub fn random_pure_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let n: usize = dims.iter().product();
    let v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    PureState::new(v.into_iter().map(|z| z / norm).collect(), dims.to_vec())
}

/// Channel whose Stinespring isometry `V: in → out ⊗ env` is Haar random.
/// Kraus operators are `K_e = (I ⊗ <e|) V`.
pub fn random_channel_with<R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    env_dim: usize,
    rng: &mut R,
) -> Result<Channel> {
    if in_dim == 0 || out_dim == 0 || env_dim == 0 || out_dim * env_dim < in_dim {
        return Err(Error::InvalidChannel(format!(
            "need out*env >= in, got in={in_dim} out={out_dim} env={env_dim}"
        )));
    }
    let v = haar_isometry(out_dim * env_dim, in_dim, rng)?;
    let kraus = (0..env_dim)
        .map(|e| ComplexMatrix::from_fn(out_dim, in_dim, |o, i| v.get(o * env_dim + e, i)))
        .collect();
    Channel::new(in_dim, out_dim, kraus)
}

pub fn random_channel(in_dim: usize, out_dim: usize, env_dim: usize, seed: u64) -> Result<Channel> {
    random_channel_with(in_dim, out_dim, env_dim, &mut rng_from_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rank_one_is_pure() {
        let rho = random_density(2, 1, 5).unwrap();
        let ev = rho.eig().eigenvalues().to_vec();
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn same_seed_bitwise_identical() {
        let a = random_density(3, 2, 99).unwrap();
        let b = random_density(3, 2, 99).unwrap();
        assert_eq!(a.matrix().entries(), b.matrix().entries());
        let c = random_density(3, 2, 100).unwrap();
        assert_ne!(a.matrix().entries(), c.matrix().entries());
    }

    #[test]
    fn full_rank_seed_seven_is_valid() {
        let rho = random_density(4, 4, 7).unwrap();
        assert_abs_diff_eq!(rho.matrix().trace().re, 1.0, epsilon = 1e-10);
        assert!(rho.eig().eigenvalues()[0] > 0.0);
    }

    #[test]
    fn rank_above_dim_rejected() {
        assert_eq!(
            random_density(2, 3, 1).unwrap_err(),
            Error::RankExceedsDim { rank: 3, dim: 2 }
        );
    }

    #[test]
    fn trivial_channel_is_identity() {
        let ch = random_channel(1, 1, 1, 4).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        assert_abs_diff_eq!(ch.kraus()[0].get(0, 0).norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn completeness_seed_eleven() {
        let ch = random_channel(2, 2, 4, 11).unwrap();
        assert!(ch.completeness_error() <= 1e-9);
    }

    #[test]
    fn dimension_constraint() {
        assert!(random_channel(5, 2, 2, 0).is_err());
    }

    #[test]
    fn stream_seeds_differ() {
        assert_ne!(stream_seed(1, 0), stream_seed(1, 1));
        assert_ne!(stream_seed(1, 0), stream_seed(2, 0));
        assert_eq!(stream_seed(42, 7), stream_seed(42, 7));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(4, &mut rng_from_seed(3));
        let prod = &u.adjoint() * &u;
        assert!((&prod - &ComplexMatrix::identity(4)).max_abs() < 1e-12);
    }
}
