use nalgebra::DVector;

use super::{
    estimate_load_change, rms_deviation, solve_inf_norm, ControlBounds, ControlError,
    ControlInput,
};
use crate::grid::SensitivityModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    /// Relaxation factor on the predicted pilot-voltage step.
    pub beta: f64,
    /// Convergence tolerance on the ∞-norm of the pilot-voltage step (p.u.).
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            epsilon: 0.001,
            max_iterations: 50,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(ControlError::Config(format!("beta {} outside (0, 1]", self.beta)));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(ControlError::Config(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(ControlError::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlResult {
    pub u_star: ControlInput,
    pub iterations: usize,
    /// Predicted load-bus voltage deviation after applying `u_star`.
    pub final_deviation: DVector<f64>,
    pub x_rms: f64,
    pub converged: bool,
    /// ∞-norm of the last pilot-voltage step.
    pub last_step: f64,
}

/// Iterates estimate → Chebyshev fit → predicted response → relaxed pilot
/// update until the pilot step falls below `epsilon`.
///
/// Each iteration re-estimates the load change from the remaining pilot
/// deviation and solves for a further control increment inside the bounds
/// left over by the controls already committed. The accumulated control is
/// returned together with the predicted deviation of every load bus.
pub fn run_control_loop(
    sens: &SensitivityModel,
    v_pilot: &DVector<f64>,
    v_pilot_ref: &DVector<f64>,
    bounds: &ControlBounds,
    cfg: &ControllerConfig,
) -> Result<ControlResult, ControlError> {
    cfg.validate()?;
    let pilots = sens.pilot_rows();
    if v_pilot.len() != pilots.len() || v_pilot_ref.len() != pilots.len() {
        return Err(ControlError::Dimension(format!(
            "{} pilot voltages and {} references for {} pilots",
            v_pilot.len(),
            v_pilot_ref.len(),
            pilots.len()
        )));
    }
    if bounds.len() != sens.n_controls() || bounds.n_gen() != sens.n_gen() {
        return Err(ControlError::Dimension(format!(
            "bounds cover {} controls ({} generators), model has {} ({})",
            bounds.len(),
            bounds.n_gen(),
            sens.n_controls(),
            sens.n_gen()
        )));
    }

    let jp = sens.pilot_matrix();
    let j2 = sens.j2();
    let j2_pilot = j2.select_rows(pilots.iter());
    let dq0 = estimate_load_change(&jp, &(v_pilot - v_pilot_ref))?;

    let mut vp = v_pilot.clone();
    let mut u = ControlInput::zeros(bounds).into_values();
    let mut iterations = 0;
    let mut converged = false;
    let mut last_step = f64::INFINITY;

    while iterations < cfg.max_iterations {
        iterations += 1;
        let dq = estimate_load_change(&jp, &(&vp - v_pilot_ref))?;
        let target = sens.j1() * dq;
        let fit = solve_inf_norm(&target, j2, &bounds.shifted(&u))?;
        let du = fit.input.into_values();

        let step = -(&j2_pilot * &du) * cfg.beta;
        vp += &step;
        u = (u + du * cfg.beta).zip_zip_map(bounds.lower(), bounds.upper(), |v, lo, hi| {
            v.clamp(lo, hi)
        });
        last_step = step.amax();
        if last_step < cfg.epsilon {
            converged = true;
            break;
        }
    }

    let u_star = ControlInput::new(u, bounds.clone())?;
    let final_deviation = sens.j1() * dq0 - j2 * u_star.values();
    let x_rms = rms_deviation(&final_deviation, &DVector::zeros(final_deviation.len()))?;
    Ok(ControlResult {
        u_star,
        iterations,
        final_deviation,
        x_rms,
        converged,
        last_step,
    })
}
