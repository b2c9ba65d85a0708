use super::{optimize_over_density_from, Direction, OptimizerConfig, OptimizerResult};
use crate::divergence::{sandwiched_renyi_eig, AlphaOrder};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, schatten_norm, ComplexMatrix, NormOrder};
use crate::states::{partial_trace, partial_trace_matrix, purify, DensityMatrix};

fn bipartite_dims(rho: &DensityMatrix) -> Result<(usize, usize)> {
    match rho.dims() {
        &[a, b] => Ok((a, b)),
        d => Err(Error::InvalidSubsystems(format!(
            "expected a bipartite state, got dims {d:?}"
        ))),
    }
}

/// `H_α(A|B) = -inf_σ D_α(ρ_AB ‖ I_A ⊗ σ_B)`; `argopt` is the minimizing
/// `σ_B`. `ρ_B` is used as the first restart.
pub fn conditional_renyi_entropy(
    rho_ab: &DensityMatrix,
    alpha: AlphaOrder,
    config: &OptimizerConfig,
) -> Result<OptimizerResult> {
    let (da, db) = bipartite_dims(rho_ab)?;
    let rho_b = partial_trace(rho_ab, &[1])?;
    let id = hermitian_eig(&ComplexMatrix::identity(da))?;
    let objective = |sigma: &DensityMatrix| match sandwiched_renyi_eig(
        rho_ab.matrix(),
        &id.kron(sigma.eig()),
        alpha,
    ) {
        Ok(v) => v.value,
        Err(_) => f64::NAN,
    };
    let mut r = optimize_over_density_from(objective, db, Direction::Min, config, &[rho_b])?;
    r.value = -r.value;
    Ok(r)
}

/// `I_α(A;B) = min_σ D_α(ρ_AB ‖ ρ_A ⊗ σ_B)`; `ρ_B` is the first restart.
pub fn mutual_info_primal(
    rho_ab: &DensityMatrix,
    alpha: AlphaOrder,
    config: &OptimizerConfig,
) -> Result<OptimizerResult> {
    mutual_info_primal_from(rho_ab, alpha, config, &[])
}

/// [`mutual_info_primal`] with extra warm starts tried after `ρ_B`.
pub fn mutual_info_primal_from(
    rho_ab: &DensityMatrix,
    alpha: AlphaOrder,
    config: &OptimizerConfig,
    warm: &[DensityMatrix],
) -> Result<OptimizerResult> {
    let (_, db) = bipartite_dims(rho_ab)?;
    let rho_a = partial_trace(rho_ab, &[0])?;
    let rho_b = partial_trace(rho_ab, &[1])?;
    let objective = |sigma: &DensityMatrix| match sandwiched_renyi_eig(
        rho_ab.matrix(),
        &rho_a.eig().kron(sigma.eig()),
        alpha,
    ) {
        Ok(v) => v.value,
        Err(_) => f64::NAN,
    };
    let mut starts = vec![rho_b];
    starts.extend_from_slice(warm);
    optimize_over_density_from(objective, db, Direction::Min, config, &starts)
}

/// Dual form for `α > 1`: with `|ψ⟩_ABC` a purification of `ρ_AB`,
/// `I_α(A;B) = α' log max_τ ‖tr_AC[(ρ_A^{-1/2α'} ⊗ I ⊗ τ^{1/2α'}) ψ (·)†]‖_β`
/// where `1/α + 1/β = 2`. `argopt` is the maximizing `τ_C`.
pub fn mutual_info_dual(
    rho_ab: &DensityMatrix,
    alpha: AlphaOrder,
    config: &OptimizerConfig,
) -> Result<OptimizerResult> {
    if !alpha.exceeds_one() {
        return Err(Error::InvalidAlpha(format!(
            "dual form requires alpha > 1, got {alpha}"
        )));
    }
    let (da, db) = bipartite_dims(rho_ab)?;
    let ap = alpha.conjugate();
    let beta = NormOrder::Finite(1.0 / (2.0 - 1.0 / alpha.value()));
    let psi = purify(rho_ab);
    let dc = psi.dims()[2];
    let dims = [da, db, dc];
    let rho_a = partial_trace(rho_ab, &[0])?;
    let left = rho_a.power(-1.0 / (2.0 * ap)).kron(&ComplexMatrix::identity(db));
    let psi_vec = ComplexMatrix::new(da * db * dc, 1, psi.amplitudes().to_vec())?;
    let rho_c = DensityMatrix::from_psd(
        partial_trace_matrix(&psi.density().matrix().clone(), &dims, &[2])?,
        None,
    )?;
    let objective = |tau: &DensityMatrix| {
        let k = left.kron(&tau.power(1.0 / (2.0 * ap)));
        let phi = &k * &psi_vec;
        let m = partial_trace_matrix(&(&phi * &phi.adjoint()), &dims, &[1]);
        match m.and_then(|m| schatten_norm(&m.hermitian_part(), beta)) {
            Ok(v) => v,
            Err(_) => f64::NAN,
        }
    };
    let mut r = optimize_over_density_from(objective, dc, Direction::Max, config, &[rho_c])?;
    r.value = ap * r.value.ln();
    Ok(r)
}
