//! Compressive sensing over a DCT basis with Gaussian measurements and
//! orthogonal matching pursuit recovery.

mod dct;
mod matrix;
mod omp;

use nalgebra::{DMatrix, DVector};

pub use dct::{dct_forward, dct_inverse, dct_matrix};
pub use matrix::gen_measurement_matrix;
pub use omp::{omp, SparseCoefficients};

pub const DEFAULT_OMP_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CodecError {
    #[error("signal has {found} samples, codec expects {expected}")]
    Length { expected: usize, found: usize },
    #[error("invalid codec configuration: {0}")]
    Config(String),
    #[error("reference signal has zero norm")]
    ZeroSignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Dct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecConfig {
    pub n: usize,
    pub m: usize,
    pub basis: Basis,
    pub matrix_seed: u64,
    pub omp_max_iters: usize,
    pub omp_residual_tol: f64,
}

impl CodecConfig {
    /// `m == n` is accepted and means "send the raw samples".
    pub fn new(n: usize, m: usize, matrix_seed: u64) -> Result<Self, CodecError> {
        if m == 0 || m > n {
            return Err(CodecError::Config(format!("need 1 <= m <= n, got m={m}, n={n}")));
        }
        Ok(Self {
            n,
            m,
            basis: Basis::Dct,
            matrix_seed,
            omp_max_iters: m,
            omp_residual_tol: DEFAULT_OMP_TOL,
        })
    }

    /// Configuration for compression ratio `rho = n/m`, with `m` rounded to
    /// the nearest integer.
    pub fn for_ratio(n: usize, rho: f64, matrix_seed: u64) -> Result<Self, CodecError> {
        if !(rho >= 1.0) || !rho.is_finite() {
            return Err(CodecError::Config(format!("compression ratio {rho} below 1")));
        }
        let m = ((n as f64 / rho).round() as usize).clamp(1, n.max(1));
        Self::new(n, m, matrix_seed)
    }

    pub fn is_passthrough(&self) -> bool {
        self.m == self.n
    }

    pub fn ratio(&self) -> f64 {
        compression_ratio(self.n, self.m)
    }
}

/// Measurements of one signal vector plus what the receiver needs to decode
/// them. The matrix travels as its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedFrame {
    pub y: DVector<f64>,
    pub config: CodecConfig,
    pub timestamp_micros: u64,
    pub area_id: u16,
}

impl CompressedFrame {
    pub fn timestamp_s(&self) -> f64 {
        self.timestamp_micros as f64 * 1e-6
    }

    pub fn stamped(mut self, area_id: u16, timestamp_micros: u64) -> Self {
        self.area_id = area_id;
        self.timestamp_micros = timestamp_micros;
        self
    }
}

/// Encoder/decoder pair with the measurement and sensing matrices built once.
#[derive(Debug, Clone)]
pub struct Codec {
    config: CodecConfig,
    phi: DMatrix<f64>,
    sensing: DMatrix<f64>,
    psi: DMatrix<f64>,
}

impl Codec {
    pub fn new(config: CodecConfig) -> Self {
        Self::with_matrix(config, gen_measurement_matrix(&config))
    }

    /// Uses an explicit measurement matrix instead of the seeded one.
    pub fn with_matrix(config: CodecConfig, phi: DMatrix<f64>) -> Self {
        assert_eq!(phi.shape(), (config.m, config.n), "measurement matrix shape");
        let psi = dct_matrix(config.n).transpose();
        let sensing = &phi * &psi;
        Self {
            config,
            phi,
            sensing,
            psi,
        }
    }

    pub fn config(&self) -> &CodecConfig {
        &self.config
    }

    pub fn measurement_matrix(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn encode(&self, x: &DVector<f64>) -> Result<CompressedFrame, CodecError> {
        if x.len() != self.config.n {
            return Err(CodecError::Length {
                expected: self.config.n,
                found: x.len(),
            });
        }
        Ok(CompressedFrame {
            y: &self.phi * x,
            config: self.config,
            timestamp_micros: 0,
            area_id: 0,
        })
    }

    pub fn decode(&self, frame: &CompressedFrame) -> Result<SparseCoefficients, CodecError> {
        self.check(frame)?;
        let cfg = &self.config;
        Ok(omp(&self.sensing, &frame.y, cfg.omp_max_iters, cfg.omp_residual_tol))
    }

    pub fn recover(&self, frame: &CompressedFrame) -> Result<DVector<f64>, CodecError> {
        if self.config.is_passthrough() {
            self.check(frame)?;
            return Ok(frame.y.clone());
        }
        Ok(&self.psi * self.decode(frame)?.theta)
    }

    fn check(&self, frame: &CompressedFrame) -> Result<(), CodecError> {
        if frame.config != self.config {
            return Err(CodecError::Config("frame was encoded with another configuration".into()));
        }
        if frame.y.len() != self.config.m {
            return Err(CodecError::Length {
                expected: self.config.m,
                found: frame.y.len(),
            });
        }
        Ok(())
    }
}

pub fn encode(x: &DVector<f64>, cfg: &CodecConfig) -> Result<CompressedFrame, CodecError> {
    Codec::new(*cfg).encode(x)
}

pub fn omp_decode(frame: &CompressedFrame) -> Result<SparseCoefficients, CodecError> {
    Codec::new(frame.config).decode(frame)
}

pub fn recover(frame: &CompressedFrame) -> Result<DVector<f64>, CodecError> {
    Codec::new(frame.config).recover(frame)
}

pub fn compression_ratio(n: usize, m: usize) -> f64 {
    assert!(m >= 1, "at least one measurement");
    n as f64 / m as f64
}

/// Reconstruction SNR in dB, `−20·log10(‖x − x̂‖/‖x‖)`. Exact recovery is
/// reported as `f64::INFINITY`.
pub fn snr_db(x: &DVector<f64>, x_hat: &DVector<f64>) -> Result<f64, CodecError> {
    if x.len() != x_hat.len() {
        return Err(CodecError::Length {
            expected: x.len(),
            found: x_hat.len(),
        });
    }
    let norm = x.norm();
    if norm == 0.0 {
        return Err(CodecError::ZeroSignal);
    }
    let err = (x - x_hat).norm();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-20.0 * (err / norm).log10())
}
