//! Dense Hermitian linear algebra: spectral decompositions, support-restricted
//! matrix functions, Schatten and weighted norms, and the sandwich map `Γ_σ`.

mod eig;
mod matrix;
mod norms;

pub use eig::{
    hermitian_eig, matrix_log, matrix_power, psd_eig, HermitianEig, HERMITIAN_TOL, PSD_CLIP,
    SUPPORT_EPS,
};
pub(crate) use eig::{clip_psd, eig_symmetrized, eigenvalues_symmetrized};
pub use matrix::{ComplexMatrix, MatrixJson};
pub use norms::{
    gamma_map, gamma_map_eig, hermitian_operator_norm, holder_conjugate, schatten_norm,
    singular_values, svd, weighted_norm, weighted_norm_eig, NormOrder, Svd,
};
pub(crate) use norms::schatten_from_singular_values;
