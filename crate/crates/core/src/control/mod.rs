//! Central secondary voltage controller.

mod chebyshev;
mod estimate;
mod svc;

use nalgebra::{DVector, DVectorView};

pub use chebyshev::{solve_inf_norm, ChebyshevFit};
pub use estimate::estimate_load_change;
pub use svc::{run_control_loop, ControlResult, ControllerConfig};

#[derive(Debug, thiserror::Error)]
pub enum ControlError {
    #[error("pilot matrix is rank deficient (reciprocal condition {0:e})")]
    RankDeficient(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid bounds: {0}")]
    Bounds(String),
    #[error("invalid controller configuration: {0}")]
    Config(String),
}

/// Box bounds on the stacked control vector `[ΔV_G ; ΔQ_C]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlBounds {
    lower: DVector<f64>,
    upper: DVector<f64>,
    n_gen: usize,
}

impl ControlBounds {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>, n_gen: usize) -> Result<Self, ControlError> {
        if lower.len() != upper.len() {
            return Err(ControlError::Dimension(format!(
                "lower has {} entries, upper {}",
                lower.len(),
                upper.len()
            )));
        }
        if n_gen > lower.len() {
            return Err(ControlError::Dimension(format!(
                "{n_gen} generator entries in a {}-entry control",
                lower.len()
            )));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] <= upper[i]) || !lower[i].is_finite() || !upper[i].is_finite()) {
            return Err(ControlError::Bounds(format!(
                "entry {i}: [{}, {}]",
                lower[i], upper[i]
            )));
        }
        Ok(Self { lower, upper, n_gen })
    }

    /// `±limit` per entry.
    pub fn symmetric(n_gen: usize, limits: &[f64]) -> Self {
        let upper = DVector::from_column_slice(limits);
        Self::new(-&upper, upper, n_gen).expect("symmetric limits")
    }

    /// `±gen_limit` on the generator entries and `±cap_limit` on the rest.
    pub fn uniform(n_gen: usize, n_cap: usize, gen_limit: f64, cap_limit: f64) -> Self {
        let limits: Vec<f64> = std::iter::repeat_n(gen_limit, n_gen)
            .chain(std::iter::repeat_n(cap_limit, n_cap))
            .collect();
        Self::symmetric(n_gen, &limits)
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn n_gen(&self) -> usize {
        self.n_gen
    }

    pub fn contains(&self, values: &DVector<f64>) -> bool {
        values.len() == self.len()
            && values
                .iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Bounds on a further step `δ` such that `base + δ` stays inside.
    pub fn shifted(&self, base: &DVector<f64>) -> Self {
        let lower = (&self.lower - base).zip_map(&DVector::zeros(base.len()), |v, z: f64| v.min(z));
        let upper = (&self.upper - base).zip_map(&DVector::zeros(base.len()), |v, z: f64| v.max(z));
        Self {
            lower,
            upper,
            n_gen: self.n_gen,
        }
    }
}

/// Stacked control `u = [ΔV_G ; ΔQ_C]` together with its bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlInput {
    values: DVector<f64>,
    bounds: ControlBounds,
}

impl ControlInput {
    pub fn new(values: DVector<f64>, bounds: ControlBounds) -> Result<Self, ControlError> {
        if values.len() != bounds.len() {
            return Err(ControlError::Dimension(format!(
                "control has {} entries, bounds {}",
                values.len(),
                bounds.len()
            )));
        }
        if !bounds.contains(&values) {
            return Err(ControlError::Bounds("control outside its bounds".into()));
        }
        Ok(Self { values, bounds })
    }

    /// Skips the bounds check; [`ControlInput::clamped`] restores feasibility.
    pub fn unchecked(values: DVector<f64>, bounds: ControlBounds) -> Self {
        assert_eq!(values.len(), bounds.len());
        Self { values, bounds }
    }

    pub fn zeros(bounds: &ControlBounds) -> Self {
        let values = DVector::zeros(bounds.len()).zip_zip_map(&bounds.lower, &bounds.upper, |z: f64, lo, hi| z.clamp(lo, hi));
        Self {
            values,
            bounds: bounds.clone(),
        }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    pub fn bounds(&self) -> &ControlBounds {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dv_gen(&self) -> DVectorView<'_, f64> {
        self.values.rows(0, self.bounds.n_gen)
    }

    pub fn dq_cap(&self) -> DVectorView<'_, f64> {
        self.values.rows(self.bounds.n_gen, self.len() - self.bounds.n_gen)
    }

    pub fn is_feasible(&self) -> bool {
        self.bounds.contains(&self.values)
    }

    pub fn clamped(&self) -> Self {
        let values = self
            .values
            .zip_zip_map(&self.bounds.lower, &self.bounds.upper, |v, lo, hi| v.clamp(lo, hi));
        Self {
            values,
            bounds: self.bounds.clone(),
        }
    }
}

/// Root-mean-square deviation of load voltages from their references.
pub fn rms_deviation(v_load: &DVector<f64>, v_ref: &DVector<f64>) -> Result<f64, ControlError> {
    if v_load.len() != v_ref.len() {
        return Err(ControlError::Dimension(format!(
            "{} voltages against {} references",
            v_load.len(),
            v_ref.len()
        )));
    }
    if v_load.is_empty() {
        return Err(ControlError::Dimension("no load buses".into()));
    }
    let sq: f64 = v_load
        .iter()
        .zip(v_ref.iter())
        .map(|(v, r)| (v - r) * (v - r))
        .sum();
    Ok((sq / v_load.len() as f64).sqrt())
}
