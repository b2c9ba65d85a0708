use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{clip_psd, eig_symmetrized, ComplexMatrix, HermitianEig, MatrixJson};

/// Trace tolerance for a valid density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted before clipping.
pub const EIGEN_FLOOR: f64 = -1e-12;

/// Positive semi-definite, unit-trace matrix with optional subsystem
/// dimensions. The clipped eigendecomposition is computed at most once.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
    eig: OnceLock<HermitianEig>,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.dims == other.dims
    }
}

fn check_dims(n: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) || dims.iter().product::<usize>() != n {
        return Err(Error::InvalidSubsystems(format!(
            "dims {dims:?} do not multiply to {n}"
        )));
    }
    Ok(())
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace. `dims` defaults to a
    /// single subsystem.
    pub fn new(matrix: ComplexMatrix, dims: Option<Vec<usize>>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.rows(), matrix.cols()));
        }
        let n = matrix.rows();
        let dims = dims.unwrap_or_else(|| vec![n]);
        check_dims(n, &dims)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let dev = matrix.hermiticity_deviation();
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        let matrix = matrix.hermitian_part();
        let mut eig = eig_symmetrized(matrix.as_dmatrix());
        if let Some(&lmin) = eig.eigenvalues().first() {
            if lmin < EIGEN_FLOOR {
                return Err(Error::NotPsd(lmin));
            }
        }
        clip_psd(&mut eig)?;
        Ok(Self {
            matrix,
            dims,
            eig: OnceLock::from(eig),
        })
    }

    /// Normalizes a PSD matrix to unit trace before validating.
    pub fn from_psd(matrix: ComplexMatrix, dims: Option<Vec<usize>>) -> Result<Self> {
        let tr = matrix.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(matrix.scale(1.0 / tr).hermitian_part(), dims)
    }

    /// Skips validation; the caller guarantees a Hermitian PSD unit-trace matrix.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        Self {
            matrix,
            dims,
            eig: OnceLock::new(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(dim).scale(1.0 / dim as f64), vec![dim])
    }

    /// Diagonal state from a probability vector.
    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_diagonal(probs), None)
    }

    /// Computational basis state `|index><index|`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut p = vec![0.0; dim];
        p[index] = 1.0;
        Self::from_trusted(ComplexMatrix::from_diagonal(&p), vec![dim])
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Same matrix with a new subsystem split.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_dims(self.dim(), &dims)?;
        self.dims = dims;
        Ok(self)
    }

    /// Clipped eigendecomposition, computed on first use.
    pub fn eig(&self) -> &HermitianEig {
        self.eig.get_or_init(|| {
            let mut e = eig_symmetrized(self.matrix.as_dmatrix());
            for l in e.eigenvalues_mut() {
                if *l < 0.0 {
                    *l = 0.0;
                }
            }
            e
        })
    }

    /// `ρ^t` on the support.
    pub fn power(&self, t: f64) -> ComplexMatrix {
        self.eig().map_support(|l| l.powf(t))
    }

    pub fn support_projector(&self) -> ComplexMatrix {
        self.eig().support_projector()
    }

    /// Smallest eigenvalue after clipping.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Trace distance `‖ρ - σ‖_1`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        crate::linalg::schatten_norm(&(&self.matrix - &other.matrix), 1.0.into())
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.rows(),
            });
        }
        Ok(Self::from_trusted(
            (&(u * &self.matrix) * &u.adjoint()).hermitian_part(),
            self.dims.clone(),
        ))
    }

    /// Convex combination `(1 - t) self + t other`.
    pub fn mix(&self, other: &DensityMatrix, t: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self::from_trusted(
            &self.matrix.scale(1.0 - t) + &other.matrix.scale(t),
            self.dims.clone(),
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct DensityJson {
    #[serde(flatten)]
    matrix: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<Vec<usize>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityJson {
            matrix: self.matrix.to_json(),
            dims: Some(self.dims.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = DensityJson::deserialize(d)?;
        let m = ComplexMatrix::from_json(&json.matrix).map_err(serde::de::Error::custom)?;
        DensityMatrix::new(m, json.dims).map_err(serde::de::Error::custom)
    }
}

/// Unit vector on a tensor product of subsystems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PureStateRaw")]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    dims: Vec<usize>,
}

#[derive(Deserialize)]
struct PureStateRaw {
    amplitudes: Vec<Complex64>,
    dims: Vec<usize>,
}

impl TryFrom<PureStateRaw> for PureState {
    type Error = Error;
    fn try_from(raw: PureStateRaw) -> Result<Self> {
        PureState::new(raw.amplitudes, raw.dims)
    }
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes, dims })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `|ψ><ψ|` carrying the same subsystem split.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(
            ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
            self.dims.clone(),
        )
    }
}

/// Kronecker product with concatenated subsystem dimensions.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for ComplexMatrix {
    fn tensor(&self, other: &Self) -> Self {
        self.kron(other)
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix::from_trusted(self.matrix.kron(&other.matrix), dims)
    }
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState { amplitudes, dims }
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Mixed-radix digits of `index` for `dims`, most significant first.
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn compose(digits: &[usize], dims: &[usize], which: &[usize]) -> usize {
    which.iter().fold(0, |acc, &k| acc * dims[k] + digits[k])
}

fn validate_keep(dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidSubsystems(format!(
            "index set {keep:?} invalid for {} subsystems",
            dims.len()
        )));
    }
    Ok(sorted)
}

/// Partial trace of an arbitrary square operator with subsystem dims `dims`,
/// keeping the subsystems listed in `keep` (in ascending order).
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let n: usize = dims.iter().product();
    if !m.is_square() || m.rows() != n {
        return Err(Error::InvalidSubsystems(format!(
            "dims {dims:?} do not match a {}x{} operator",
            m.rows(),
            m.cols()
        )));
    }
    let keep = validate_keep(dims, keep)?;
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let out_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let mut kept_idx = vec![0usize; n];
    let mut traced_idx = vec![0usize; n];
    let mut d = vec![0usize; dims.len()];
    for a in 0..n {
        digits(a, dims, &mut d);
        kept_idx[a] = compose(&d, dims, &keep);
        traced_idx[a] = compose(&d, dims, &traced);
    }
    let src = m.as_dmatrix();
    let mut out = nalgebra::DMatrix::<Complex64>::zeros(out_dim, out_dim);
    for a in 0..n {
        for b in 0..n {
            if traced_idx[a] == traced_idx[b] {
                out[(kept_idx[a], kept_idx[b])] += src[(a, b)];
            }
        }
    }
    Ok(ComplexMatrix::wrap(out))
}

/// Reduced state on the subsystems in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if rho.dims().len() < 2 && keep != [0] {
        return Err(Error::InvalidSubsystems(
            "state has no declared subsystem split".into(),
        ));
    }
    let sorted = validate_keep(rho.dims(), keep)?;
    let m = partial_trace_matrix(rho.matrix(), rho.dims(), &sorted)?;
    let dims = sorted.iter().map(|&k| rho.dims()[k]).collect();
    Ok(DensityMatrix::from_trusted(m.hermitian_part(), dims))
}

/// Reorders subsystems: output subsystem `i` is input subsystem `perm[i]`.
pub fn permute_subsystems(rho: &DensityMatrix, perm: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.dims();
    let mut check = perm.to_vec();
    check.sort_unstable();
    if check != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::InvalidSubsystems(format!("{perm:?} is not a permutation")));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let n = rho.dim();
    let mut map = vec![0usize; n];
    let mut d = vec![0usize; dims.len()];
    for (a, slot) in map.iter_mut().enumerate() {
        digits(a, dims, &mut d);
        *slot = perm.iter().fold(0, |acc, &p| acc * dims[p] + d[p]);
    }
    let src = rho.matrix();
    let mut out = ComplexMatrix::zeros(n, n).into_dmatrix();
    for a in 0..n {
        for b in 0..n {
            out[(map[a], map[b])] = src.get(a, b);
        }
    }
    Ok(DensityMatrix::from_trusted(ComplexMatrix::wrap(out), new_dims))
}

/// Purification `Σ_i √λ_i |v_i>|i>` with the environment (dimension equal to
/// that of `ρ`) appended as the last subsystem.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let n = rho.dim();
    let eig = rho.eig();
    let v = eig.eigenvectors();
    let mut amps = vec![Complex64::new(0.0, 0.0); n * n];
    // Environment label 0 goes with the largest eigenvalue.
    for (label, (i, &l)) in eig.eigenvalues().iter().enumerate().rev().enumerate() {
        let w = l.max(0.0).sqrt();
        if w == 0.0 {
            continue;
        }
        for s in 0..n {
            amps[s * n + label] = v.get(s, i) * w;
        }
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
    let mut dims = rho.dims().to_vec();
    dims.push(n);
    PureState {
        amplitudes: amps,
        dims,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        PureState::new(vec![Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)], vec![2, 2]).unwrap()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        let d = (a - b).max_abs();
        assert!(d <= tol, "differ by {d:e}");
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::from_diagonal(&[0.5, 0.6]), None),
            Err(Error::InvalidTrace(_))
        ));
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::from_diagonal(&[1.5, -0.5]), None),
            Err(Error::NotPsd(_))
        ));
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::from_diagonal(&[0.5, 0.5]), Some(vec![3])),
            Err(Error::InvalidSubsystems(_))
        ));
    }

    #[test]
    fn tensor_examples() {
        let m = DensityMatrix::maximally_mixed(2);
        let t = tensor(&m, &m);
        close(t.matrix(), &ComplexMatrix::identity(4).scale(0.25), 1e-15);
        assert_eq!(t.dims(), &[2, 2]);
        let a = DensityMatrix::basis(2, 0);
        let b = DensityMatrix::basis(2, 1);
        close(tensor(&a, &b).matrix(), &ComplexMatrix::from_diagonal(&[0.0, 1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = bell().density();
        let a = partial_trace(&rho, &[0]).unwrap();
        close(a.matrix(), &ComplexMatrix::identity(2).scale(0.5), 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = bell().density();
        assert!(partial_trace(&rho, &[2]).is_err());
        assert!(partial_trace(&rho, &[0, 0]).is_err());
        let undeclared = DensityMatrix::maximally_mixed(4);
        assert!(partial_trace(&undeclared, &[1]).is_err());
    }

    #[test]
    fn partial_trace_of_product_keeps_factor() {
        let a = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let b = DensityMatrix::from_diagonal(&[0.2, 0.5, 0.3]).unwrap();
        let ab = tensor(&a, &b);
        close(partial_trace(&ab, &[0]).unwrap().matrix(), a.matrix(), 1e-12);
        close(partial_trace(&ab, &[1]).unwrap().matrix(), b.matrix(), 1e-12);
    }

    #[test]
    fn permutation_swaps_factors() {
        let a = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let b = DensityMatrix::from_diagonal(&[0.2, 0.5, 0.3]).unwrap();
        let swapped = permute_subsystems(&tensor(&a, &b), &[1, 0]).unwrap();
        close(swapped.matrix(), tensor(&b, &a).matrix(), 1e-15);
        assert_eq!(swapped.dims(), &[3, 2]);
    }

    #[test]
    fn purify_pure_and_mixed() {
        let p = purify(&DensityMatrix::basis(2, 0));
        assert_abs_diff_eq!(p.amplitudes()[0].norm(), 1.0, epsilon = 1e-14);
        let back = partial_trace(&p.density(), &[0]).unwrap();
        close(back.matrix(), DensityMatrix::basis(2, 0).matrix(), 1e-14);

        let p = purify(&DensityMatrix::maximally_mixed(2));
        assert_eq!(p.dims(), &[2, 2]);
        let back = partial_trace(&p.density(), &[0]).unwrap();
        close(back.matrix(), &ComplexMatrix::identity(2).scale(0.5), 1e-14);
    }

    #[test]
    fn json_roundtrip_with_dims() {
        let rho = bell().density();
        let s = serde_json::to_string(&rho).unwrap();
        assert!(s.contains("\"dims\":[2,2]"));
        let back: DensityMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, DensityMatrix::new(rho.matrix().clone(), Some(vec![2, 2])).unwrap());
    }
}
