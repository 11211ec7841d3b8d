use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::TelemetryError;

pub const DEFAULT_WINDOW_LEN: usize = 20;

/// `w` consecutive samples of every state of one area, one column per
/// sample, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryWindow {
    pub area_id: u16,
    pub start_time_s: f64,
    pub sample_period_s: f64,
    pub samples: DMatrix<f64>,
}

impl TelemetryWindow {
    /// Window of length `w` whose every column equals `state`.
    pub fn filled(area_id: u16, state: &DVector<f64>, w: usize, start_time_s: f64, sample_period_s: f64) -> Self {
        Self {
            area_id,
            start_time_s,
            sample_period_s,
            samples: DMatrix::from_fn(state.len(), w, |r, _| state[r]),
        }
    }

    pub fn n_states(&self) -> usize {
        self.samples.nrows()
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }

    pub fn latest(&self) -> DVector<f64> {
        self.samples.column(self.len() - 1).into_owned()
    }

    pub fn signal(&self, state: usize) -> Vec<f64> {
        self.samples.row(state).iter().copied().collect()
    }

    /// Drops the oldest column and appends `state`.
    pub fn push(&mut self, state: &DVector<f64>) {
        assert_eq!(state.len(), self.n_states(), "state length");
        let w = self.len();
        if w == 0 {
            return;
        }
        for c in 1..w {
            let (mut dst, src) = self.samples.columns_range_pair_mut(c - 1, c);
            dst.copy_from(&src);
        }
        self.samples.set_column(w - 1, state);
        self.start_time_s += self.sample_period_s;
    }
}

/// Stacks the states of several areas in ascending area order.
pub fn concatenate_areas(windows: &[TelemetryWindow]) -> Result<TelemetryWindow, TelemetryError> {
    let first = windows.first().ok_or(TelemetryError::Empty)?;
    for w in windows {
        if w.len() != first.len()
            || w.sample_period_s != first.sample_period_s
            || w.start_time_s != first.start_time_s
        {
            return Err(TelemetryError::Misaligned(w.area_id));
        }
    }
    let mut order: Vec<&TelemetryWindow> = windows.iter().collect();
    order.sort_by_key(|w| w.area_id);
    if order.windows(2).any(|p| p[0].area_id == p[1].area_id) {
        return Err(TelemetryError::DuplicateArea);
    }
    let n: usize = order.iter().map(|w| w.n_states()).sum();
    let mut samples = DMatrix::zeros(n, first.len());
    let mut row = 0;
    for w in order.iter() {
        samples.rows_mut(row, w.n_states()).copy_from(&w.samples);
        row += w.n_states();
    }
    Ok(TelemetryWindow {
        area_id: order[0].area_id,
        start_time_s: first.start_time_s,
        sample_period_s: first.sample_period_s,
        samples,
    })
}

/// White Gaussian noise at `snr_db` relative to the mean power of `signal`.
/// An infinite SNR leaves the signal untouched.
pub fn add_white_noise(signal: &mut [f64], snr_db: f64, rng: &mut ChaCha8Rng) {
    if snr_db == f64::INFINITY || signal.is_empty() {
        return;
    }
    let power = signal.iter().map(|v| v * v).sum::<f64>() / signal.len() as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    if sigma == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    for v in signal.iter_mut() {
        *v += normal.sample(rng);
    }
}

/// Adds independent noise to every state signal of the window.
pub fn inject_sensor_noise(window: &TelemetryWindow, snr_db: f64, seed: u64) -> TelemetryWindow {
    let mut out = window.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..out.n_states() {
        let mut row = out.signal(r);
        add_white_noise(&mut row, snr_db, &mut rng);
        for (c, v) in row.into_iter().enumerate() {
            out.samples[(r, c)] = v;
        }
    }
    out
}
