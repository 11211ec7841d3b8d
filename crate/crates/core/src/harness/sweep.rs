use crate::cs::{snr_db, Codec, CodecConfig};
use crate::telemetry::correlated_telemetry;

use super::run::{median, run_scenario};
use super::scenario::{PilotSet, Scenario};
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionPoint {
    pub rho: f64,
    pub m: usize,
    pub median_snr_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotPoint {
    pub pilots: usize,
    pub final_x_rms: f64,
}

fn check_rhos(rhos: &[f64]) -> Result<(), HarnessError> {
    match rhos.iter().find(|r| !(**r >= 1.0) || !r.is_finite()) {
        Some(r) => Err(HarnessError::Scenario(format!("compression ratio {r} below 1"))),
        None => Ok(()),
    }
}

/// Runs the scenario once, then compresses every concentrated state vector
/// directly (no innovation coding) at each ratio and reports the median
/// reconstruction SNR.
pub fn sweep_compression(s: &Scenario, rhos: &[f64]) -> Result<Vec<CompressionPoint>, HarnessError> {
    check_rhos(rhos)?;
    let report = run_scenario(s)?;
    let n = report.pdc_states.first().map_or(0, |x| x.len());
    rhos.iter()
        .map(|&rho| {
            let codec = Codec::new(CodecConfig::for_ratio(n, rho, s.seed)?);
            let snrs = report
                .pdc_states
                .iter()
                .map(|x| Ok(snr_db(x, &codec.recover(&codec.encode(x)?)?)?))
                .collect::<Result<Vec<f64>, HarnessError>>()?;
            Ok(CompressionPoint {
                rho,
                m: codec.config().m,
                median_snr_db: median(&snrs),
            })
        })
        .collect()
}

/// Median SNR over `trials` seeded correlated-telemetry vectors of length
/// `n`, each with its own measurement matrix.
pub fn sweep_compression_synthetic(
    n: usize,
    rhos: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CompressionPoint>, HarnessError> {
    check_rhos(rhos)?;
    if n == 0 || trials == 0 {
        return Err(HarnessError::Scenario("need n >= 1 and at least one trial".into()));
    }
    rhos.iter()
        .map(|&rho| {
            let mut m = 0;
            let snrs = (0..trials as u64)
                .map(|t| {
                    let cfg = CodecConfig::for_ratio(n, rho, seed.wrapping_add(1000 + t))?;
                    m = cfg.m;
                    let codec = Codec::new(cfg);
                    let x = correlated_telemetry(n, seed.wrapping_add(t));
                    Ok(snr_db(&x, &codec.recover(&codec.encode(&x)?)?)?)
                })
                .collect::<Result<Vec<f64>, HarnessError>>()?;
            Ok(CompressionPoint {
                rho,
                m,
                median_snr_db: median(&snrs),
            })
        })
        .collect()
}

/// Largest ratio in the sweep whose median SNR reaches `floor_db`.
pub fn max_ratio_above(points: &[CompressionPoint], floor_db: f64) -> Option<f64> {
    points
        .iter()
        .filter(|p| p.median_snr_db >= floor_db)
        .map(|p| p.rho)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
}

/// Re-runs the scenario with the `k` lowest-indexed load buses as pilots for
/// each `k` and reports the final rms deviation.
pub fn sweep_pilots(s: &Scenario, counts: &[usize]) -> Result<Vec<PilotPoint>, HarnessError> {
    counts
        .iter()
        .map(|&k| {
            let run = Scenario {
                pilots: PilotSet::First(k),
                ..s.clone()
            };
            Ok(PilotPoint {
                pilots: k,
                final_x_rms: run_scenario(&run)?.final_x_rms(),
            })
        })
        .collect()
}
