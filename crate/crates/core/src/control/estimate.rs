use nalgebra::{DMatrix, DVector};

use super::ControlError;

const RANK_RCOND: f64 = 1e-10;

/// Minimum-norm load change consistent with the pilot deviations:
/// `ΔQ_L* = J_pᵀ (J_p J_pᵀ)⁻¹ ΔV_p`.
pub fn estimate_load_change(
    pilot_matrix: &DMatrix<f64>,
    dv_pilot: &DVector<f64>,
) -> Result<DVector<f64>, ControlError> {
    let (p, n) = pilot_matrix.shape();
    if dv_pilot.len() != p {
        return Err(ControlError::Dimension(format!(
            "{} pilot deviations for {p} pilot rows",
            dv_pilot.len()
        )));
    }
    if p == 0 || p > n {
        return Err(ControlError::Dimension(format!(
            "{p} pilot rows for {n} load buses"
        )));
    }
    let sv = pilot_matrix.singular_values();
    let rcond = if sv.max() > 0.0 { sv.min() / sv.max() } else { 0.0 };
    if rcond < RANK_RCOND {
        return Err(ControlError::RankDeficient(rcond));
    }
    let gram = pilot_matrix * pilot_matrix.transpose();
    let chol = gram
        .cholesky()
        .ok_or(ControlError::RankDeficient(rcond))?;
    Ok(pilot_matrix.transpose() * chol.solve(dv_pilot))
}
