use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::window::add_white_noise;
use super::wire::rewrite_payload;
use super::TelemetryError;

/// Bandwidth-limited link: `delay = latency + 8·bytes / bandwidth`, with
/// optional white noise on the measurement payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub bandwidth_bps: f64,
    pub latency_s: f64,
    pub noise_snr_db: Option<f64>,
    pub rng_seed: u64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            bandwidth_bps: 5e6,
            latency_s: 0.01,
            noise_snr_db: None,
            rng_seed: 0,
        }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<(), TelemetryError> {
        if !(self.bandwidth_bps > 0.0) || !self.bandwidth_bps.is_finite() {
            return Err(TelemetryError::Channel(format!("bandwidth {}", self.bandwidth_bps)));
        }
        if !(self.latency_s >= 0.0) || !self.latency_s.is_finite() {
            return Err(TelemetryError::Channel(format!("latency {}", self.latency_s)));
        }
        if let Some(snr) = self.noise_snr_db {
            if snr.is_nan() {
                return Err(TelemetryError::Channel("noise SNR is NaN".into()));
            }
        }
        Ok(())
    }

    pub fn delay_s(&self, bytes: usize) -> f64 {
        self.latency_s + 8.0 * bytes as f64 / self.bandwidth_bps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub bytes: Vec<u8>,
    pub delay_s: f64,
}

/// A channel with its own noise stream; successive frames draw successive
/// noise.
#[derive(Debug, Clone)]
pub struct Channel {
    model: ChannelModel,
    rng: ChaCha8Rng,
}

impl Channel {
    pub fn new(model: ChannelModel) -> Result<Self, TelemetryError> {
        model.validate()?;
        Ok(Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(model.rng_seed),
        })
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn transmit(&mut self, bytes: &[u8]) -> Delivery {
        let mut out = bytes.to_vec();
        if let Some(snr) = self.model.noise_snr_db {
            let rng = &mut self.rng;
            rewrite_payload(&mut out, |y| add_white_noise(y, snr, rng));
        }
        Delivery {
            bytes: out,
            delay_s: self.model.delay_s(bytes.len()),
        }
    }
}

/// One-shot transmission with a fresh noise stream from the model's seed.
pub fn transmit(bytes: &[u8], model: &ChannelModel) -> Result<Delivery, TelemetryError> {
    Ok(Channel::new(*model)?.transmit(bytes))
}
