//! Morphology singular entropy: Shannon entropy of the normalized singular
//! spectrum of a multi-scale MMF matrix, used as a disturbance indicator.

use nalgebra::{DMatrix, DVector};

use crate::grid::BusId;
use crate::morphology::{mmf, StructuringElement};

pub const DEFAULT_SCALES: usize = 8;
pub const DEFAULT_WINDOW: usize = 20;
pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const DEFAULT_SELECTION_TOL: f64 = 1e-3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DetectorError {
    #[error("need at least one scale")]
    NoScales,
    #[error("window of {window} samples is shorter than the largest element ({largest})")]
    WindowTooShort { window: usize, largest: usize },
    #[error("all singular values are zero")]
    ZeroSpectrum,
    #[error("singular values must be finite, non-negative and descending")]
    BadSpectrum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub scales: usize,
    pub threshold: f64,
    pub selection_tol: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            scales: DEFAULT_SCALES,
            threshold: DEFAULT_THRESHOLD,
            selection_tol: DEFAULT_SELECTION_TOL,
        }
    }
}

/// Rows are MMF outputs of one window at increasing element lengths
/// `1, 3, 5, …`; the first row is the window itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleMatrix {
    pub h: DMatrix<f64>,
    pub se_lengths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    /// Descending.
    pub singular_values: DVector<f64>,
    pub selected_count: usize,
    pub probabilities: DVector<f64>,
    /// Nats.
    pub entropy: f64,
    pub alarm: bool,
    pub threshold: f64,
}

/// Raised on the sample where a monitored signal first crosses the
/// threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AlarmEvent {
    pub bus: BusId,
    pub time_s: f64,
    pub entropy: f64,
    pub threshold: f64,
}

pub fn build_scale_matrix(window: &[f64], scales: usize) -> Result<ScaleMatrix, DetectorError> {
    if scales == 0 {
        return Err(DetectorError::NoScales);
    }
    let largest = 2 * scales - 1;
    if window.len() < largest {
        return Err(DetectorError::WindowTooShort {
            window: window.len(),
            largest,
        });
    }
    let se_lengths: Vec<usize> = (0..scales).map(|i| 2 * i + 1).collect();
    let mut h = DMatrix::zeros(scales, window.len());
    for (r, &len) in se_lengths.iter().enumerate() {
        let row = if len == 1 {
            window.to_vec()
        } else {
            mmf(window, &StructuringElement::flat(len).expect("odd length"))
        };
        h.row_mut(r).copy_from_slice(&row);
    }
    Ok(ScaleMatrix { h, se_lengths })
}

pub fn svd_singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    DVector::from_vec(sv)
}

/// Keeps singular values with `σ_j/σ_1 ≥ selection_tol`, normalizes them to a
/// distribution and returns its entropy in nats.
pub fn entropy_from_singulars(
    sigma: &DVector<f64>,
    selection_tol: f64,
    threshold: f64,
) -> Result<EntropyReport, DetectorError> {
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0)
        || sigma.as_slice().windows(2).any(|w| w[1] > w[0])
    {
        return Err(DetectorError::BadSpectrum);
    }
    let top = sigma.iter().copied().next().unwrap_or(0.0);
    if top <= 0.0 {
        return Err(DetectorError::ZeroSpectrum);
    }
    let selected_count = sigma.iter().take_while(|&&s| s / top >= selection_tol).count();
    let kept = sigma.rows(0, selected_count);
    let total: f64 = kept.sum();
    let probabilities = kept / total;
    let entropy = if selected_count == 1 {
        0.0
    } else {
        let e: f64 = probabilities
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        e.clamp(0.0, (selected_count as f64).ln())
    };
    Ok(EntropyReport {
        singular_values: sigma.clone(),
        selected_count,
        probabilities,
        entropy,
        alarm: entropy > threshold,
        threshold,
    })
}

pub fn detect(window: &[f64], cfg: &DetectorConfig) -> Result<EntropyReport, DetectorError> {
    let h = build_scale_matrix(window, cfg.scales)?;
    entropy_from_singulars(&svd_singular_values(&h.h), cfg.selection_tol, cfg.threshold)
}
