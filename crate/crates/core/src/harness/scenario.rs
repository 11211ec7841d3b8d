//! Scenario description and its text format.
//!
//! ```text
//! format = 1
//! network = preset:three_area_27bus      # or fixture:<path>, synthetic:<areas>,<gen>,<cap>,<load>,<seed>
//! duration_s = 60
//! event = 21,*:7 *:8 *:9,1.03            # time, load buses (area:number, * = every area), factor
//! pilots = all                           # or first:<k>, or a list of area:number
//! rho = 1                              # n/m; 1 sends raw samples
//! sensor_snr_db = 40                     # omit for noiseless sensors
//! noise_buses = 0:8                      # or all
//! seed = 1
//! ```
//!
//! Every other [`Scenario`] field has a key of the same name. Relative
//! fixture paths are resolved against the scenario file's directory.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::control::ControllerConfig;
use crate::grid::{build_synthetic_network, load_network, three_area_27bus, NetworkModel, SyntheticSpec};
use crate::mse::DetectorConfig;
use crate::telemetry::{ChannelModel, DEFAULT_WINDOW_LEN};

use super::HarnessError;

pub const SCENARIO_FORMAT: u32 = 1;

/// Scale count that separates 40 dB sensor noise from a 1.75× load step at
/// the default threshold on the 27-bus network.
pub const NOISE_SCALES: usize = 4;

const PRESET_27BUS: &str = "three_area_27bus";

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSource {
    ThreeArea27Bus,
    Fixture(PathBuf),
    Synthetic(SyntheticSpec),
}

impl NetworkSource {
    pub fn load(&self) -> Result<NetworkModel, HarnessError> {
        Ok(match self {
            Self::ThreeArea27Bus => three_area_27bus(),
            Self::Fixture(path) => load_network(path)?,
            Self::Synthetic(spec) => {
                if spec.areas == 0 || spec.n_gen == 0 || spec.n_cap == 0 || spec.n_load == 0 {
                    return Err(HarnessError::Scenario("synthetic counts must be positive".into()));
                }
                build_synthetic_network(spec)
            }
        })
    }
}

impl fmt::Display for NetworkSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ThreeArea27Bus => write!(f, "preset:{PRESET_27BUS}"),
            Self::Fixture(p) => write!(f, "fixture:{}", p.display()),
            Self::Synthetic(s) => write!(
                f,
                "synthetic:{},{},{},{},{}",
                s.areas, s.n_gen, s.n_cap, s.n_load, s.seed
            ),
        }
    }
}

/// A load bus by area and external bus number; `area = None` matches the
/// bus number in every area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BusRef {
    pub area: Option<u16>,
    pub number: u32,
}

impl FromStr for BusRef {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Scenario(format!("bad bus `{s}` (want area:number or *:number)"));
        let (a, n) = s.trim().split_once(':').ok_or_else(bad)?;
        let area = match a {
            "*" => None,
            a => Some(a.parse().map_err(|_| bad())?),
        };
        Ok(Self {
            area,
            number: n.parse().map_err(|_| bad())?,
        })
    }
}

impl fmt::Display for BusRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.area {
            Some(a) => write!(f, "{a}:{}", self.number),
            None => write!(f, "*:{}", self.number),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadEvent {
    pub time_s: f64,
    pub buses: Vec<BusRef>,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PilotSet {
    All,
    /// The `k` lowest global load indices.
    First(usize),
    Buses(Vec<BusRef>),
}

/// `all`, `first:<k>` or a whitespace-separated bus list.
impl FromStr for PilotSet {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "all" {
            return Ok(Self::All);
        }
        if let Some(k) = s.strip_prefix("first:") {
            return k
                .parse()
                .map(Self::First)
                .map_err(|_| HarnessError::Scenario(format!("bad pilot count `{k}`")));
        }
        parse_buses(s).map(Self::Buses)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: NetworkSource,
    pub duration_s: f64,
    pub sample_period_s: f64,
    pub events: Vec<LoadEvent>,
    pub pilots: PilotSet,
    pub rho: f64,
    /// The run derives the channel noise seed from `seed`; `rng_seed` here
    /// is ignored.
    pub channel: ChannelModel,
    pub sensor_snr_db: Option<f64>,
    /// `None` adds sensor noise at every load bus.
    pub noise_buses: Option<Vec<BusRef>>,
    pub window_len: usize,
    /// Length of the denoising MMF element applied before detection and
    /// concentration.
    pub prefilter_len: usize,
    pub detector: DetectorConfig,
    pub controller: ControllerConfig,
    pub gen_limit: f64,
    pub cap_limit: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn new(network: NetworkSource) -> Self {
        Self {
            network,
            duration_s: 60.0,
            sample_period_s: 1.0,
            events: Vec::new(),
            pilots: PilotSet::All,
            rho: 1.0,
            channel: ChannelModel::default(),
            sensor_snr_db: None,
            noise_buses: None,
            window_len: DEFAULT_WINDOW_LEN,
            prefilter_len: 3,
            detector: DetectorConfig::default(),
            controller: ControllerConfig::default(),
            gen_limit: 0.05,
            cap_limit: 0.5,
            seed: 1,
        }
    }

    /// Reactive load ×1.03 at 21 s and ×0.97 at 42 s on buses 7, 8 and 9 of
    /// every area.
    pub fn load_steps() -> Self {
        let all = |n| BusRef { area: None, number: n };
        let buses = vec![all(7), all(8), all(9)];
        Self {
            events: vec![
                LoadEvent { time_s: 21.0, buses: buses.clone(), factor: 1.03 },
                LoadEvent { time_s: 42.0, buses, factor: 0.97 },
            ],
            ..Self::new(NetworkSource::ThreeArea27Bus)
        }
    }

    /// 40 dB sensor noise at bus 8 of area 0, no load change. The detector
    /// runs with [`NOISE_SCALES`] scales.
    pub fn noise40(seed: u64) -> Self {
        Self {
            sensor_snr_db: Some(40.0),
            detector: DetectorConfig {
                scales: NOISE_SCALES,
                ..DetectorConfig::default()
            },
            noise_buses: Some(vec![BusRef { area: Some(0), number: 8 }]),
            seed,
            ..Self::new(NetworkSource::ThreeArea27Bus)
        }
    }

    /// Reactive load of bus 8 in area 0 stepped to 1.75× at 20 s, with the
    /// same 40 dB sensor noise as [`Scenario::noise40`].
    pub fn fault175(seed: u64) -> Self {
        Self {
            events: vec![LoadEvent {
                time_s: 20.0,
                buses: vec![BusRef { area: Some(0), number: 8 }],
                factor: 1.75,
            }],
            ..Self::noise40(seed)
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration_s / self.sample_period_s).round() as usize
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |m: String| Err(HarnessError::Scenario(m));
        if !(self.sample_period_s > 0.0) || !self.sample_period_s.is_finite() {
            return err(format!("sample_period_s {}", self.sample_period_s));
        }
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return err(format!("duration_s {}", self.duration_s));
        }
        if !(self.rho >= 1.0) || !self.rho.is_finite() {
            return err(format!("rho {} below 1", self.rho));
        }
        if self.events.windows(2).any(|w| w[1].time_s < w[0].time_s) {
            return err("events are not sorted by time".into());
        }
        if let Some(last) = self.events.last() {
            if !(self.duration_s > last.time_s) {
                return err(format!("event at {} s not before the end ({} s)", last.time_s, self.duration_s));
            }
        }
        for e in &self.events {
            if !(e.time_s >= 0.0) || !(e.factor > 0.0) || !e.factor.is_finite() || e.buses.is_empty() {
                return err(format!("bad event at {} s", e.time_s));
            }
        }
        if matches!(self.pilots, PilotSet::First(0)) || matches!(&self.pilots, PilotSet::Buses(b) if b.is_empty()) {
            return err("at least one pilot bus is required".into());
        }
        if let Some(snr) = self.sensor_snr_db {
            if snr.is_nan() {
                return err("sensor_snr_db is NaN".into());
            }
        }
        if self.prefilter_len == 0 || self.prefilter_len.is_multiple_of(2) {
            return err(format!("prefilter_len {} must be odd", self.prefilter_len));
        }
        if self.window_len < 2 * self.detector.scales.max(1) - 1 {
            return err(format!(
                "window_len {} shorter than the largest detector element",
                self.window_len
            ));
        }
        if !(self.gen_limit >= 0.0) || !(self.cap_limit >= 0.0) {
            return err("control limits must be non-negative".into());
        }
        self.controller.validate()?;
        self.channel.validate()?;
        Ok(())
    }
}

fn join<T: fmt::Display>(items: &[T], sep: &str) -> String {
    items.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(sep)
}

fn parse_buses(s: &str) -> Result<Vec<BusRef>, HarnessError> {
    s.split_whitespace().map(BusRef::from_str).collect()
}

fn parse_num<T: FromStr>(no: usize, key: &str, v: &str) -> Result<T, HarnessError> {
    v.parse()
        .map_err(|_| HarnessError::Scenario(format!("line {no}: bad value `{v}` for {key}")))
}

pub fn parse_scenario(text: &str, base_dir: Option<&Path>) -> Result<Scenario, HarnessError> {
    let mut s = Scenario::new(NetworkSource::ThreeArea27Bus);
    let mut seen_format = false;
    let mut seen = std::collections::BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Scenario(format!("line {no}: expected `key = value`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key != "event" && !seen.insert(key.to_string()) {
            return Err(HarnessError::Scenario(format!("line {no}: duplicate key `{key}`")));
        }
        match key {
            "format" => {
                if value != SCENARIO_FORMAT.to_string() {
                    return Err(HarnessError::Scenario(format!("line {no}: unsupported format `{value}`")));
                }
                seen_format = true;
            }
            "network" => s.network = parse_network_source(no, value, base_dir)?,
            "duration_s" => s.duration_s = parse_num(no, key, value)?,
            "sample_period_s" => s.sample_period_s = parse_num(no, key, value)?,
            "event" => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                let [time, buses, factor] = parts[..] else {
                    return Err(HarnessError::Scenario(format!("line {no}: event needs time,buses,factor")));
                };
                s.events.push(LoadEvent {
                    time_s: parse_num(no, key, time)?,
                    buses: parse_buses(buses)?,
                    factor: parse_num(no, key, factor)?,
                });
            }
            "pilots" => s.pilots = value.parse()?,
            "rho" => s.rho = parse_num(no, key, value)?,
            "bandwidth_bps" => s.channel.bandwidth_bps = parse_num(no, key, value)?,
            "latency_s" => s.channel.latency_s = parse_num(no, key, value)?,
            "channel_snr_db" => s.channel.noise_snr_db = Some(parse_num(no, key, value)?),
            "sensor_snr_db" => s.sensor_snr_db = Some(parse_num(no, key, value)?),
            "noise_buses" => {
                s.noise_buses = if value == "all" { None } else { Some(parse_buses(value)?) }
            }
            "window_len" => s.window_len = parse_num(no, key, value)?,
            "prefilter_len" => s.prefilter_len = parse_num(no, key, value)?,
            "scales" => s.detector.scales = parse_num(no, key, value)?,
            "threshold" => s.detector.threshold = parse_num(no, key, value)?,
            "selection_tol" => s.detector.selection_tol = parse_num(no, key, value)?,
            "beta" => s.controller.beta = parse_num(no, key, value)?,
            "epsilon" => s.controller.epsilon = parse_num(no, key, value)?,
            "max_iterations" => s.controller.max_iterations = parse_num(no, key, value)?,
            "gen_limit" => s.gen_limit = parse_num(no, key, value)?,
            "cap_limit" => s.cap_limit = parse_num(no, key, value)?,
            "seed" => s.seed = parse_num(no, key, value)?,
            other => return Err(HarnessError::Scenario(format!("line {no}: unknown key `{other}`"))),
        }
    }
    if !seen_format {
        return Err(HarnessError::Scenario("missing `format` line".into()));
    }
    s.validate()?;
    Ok(s)
}

fn parse_network_source(no: usize, value: &str, base_dir: Option<&Path>) -> Result<NetworkSource, HarnessError> {
    let bad = || HarnessError::Scenario(format!("line {no}: bad network `{value}`"));
    let (kind, arg) = value.split_once(':').ok_or_else(bad)?;
    match kind {
        "preset" if arg == PRESET_27BUS => Ok(NetworkSource::ThreeArea27Bus),
        "fixture" => {
            let p = PathBuf::from(arg);
            Ok(NetworkSource::Fixture(match base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p,
            }))
        }
        "synthetic" => {
            let v: Vec<u64> = arg
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            let [areas, g, c, l, seed] = v[..] else {
                return Err(bad());
            };
            Ok(NetworkSource::Synthetic(SyntheticSpec::new(
                areas as usize,
                g as usize,
                c as usize,
                l as usize,
                seed,
            )))
        }
        _ => Err(bad()),
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text, path.parent())
}

/// Text form accepted by [`parse_scenario`].
pub fn write_scenario(s: &Scenario) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "format = {SCENARIO_FORMAT}");
    let _ = writeln!(out, "network = {}", s.network);
    let _ = writeln!(out, "duration_s = {}", s.duration_s);
    let _ = writeln!(out, "sample_period_s = {}", s.sample_period_s);
    for e in &s.events {
        let _ = writeln!(out, "event = {},{},{}", e.time_s, join(&e.buses, " "), e.factor);
    }
    let pilots = match &s.pilots {
        PilotSet::All => "all".to_string(),
        PilotSet::First(k) => format!("first:{k}"),
        PilotSet::Buses(b) => join(b, " "),
    };
    let _ = writeln!(out, "pilots = {pilots}");
    let _ = writeln!(out, "rho = {}", s.rho);
    let _ = writeln!(out, "bandwidth_bps = {}", s.channel.bandwidth_bps);
    let _ = writeln!(out, "latency_s = {}", s.channel.latency_s);
    if let Some(snr) = s.channel.noise_snr_db {
        let _ = writeln!(out, "channel_snr_db = {snr}");
    }
    if let Some(snr) = s.sensor_snr_db {
        let _ = writeln!(out, "sensor_snr_db = {snr}");
    }
    match &s.noise_buses {
        None => {
            let _ = writeln!(out, "noise_buses = all");
        }
        Some(b) => {
            let _ = writeln!(out, "noise_buses = {}", join(b, " "));
        }
    }
    let _ = writeln!(out, "window_len = {}", s.window_len);
    let _ = writeln!(out, "prefilter_len = {}", s.prefilter_len);
    let _ = writeln!(out, "scales = {}", s.detector.scales);
    let _ = writeln!(out, "threshold = {}", s.detector.threshold);
    let _ = writeln!(out, "selection_tol = {}", s.detector.selection_tol);
    let _ = writeln!(out, "beta = {}", s.controller.beta);
    let _ = writeln!(out, "epsilon = {}", s.controller.epsilon);
    let _ = writeln!(out, "max_iterations = {}", s.controller.max_iterations);
    let _ = writeln!(out, "gen_limit = {}", s.gen_limit);
    let _ = writeln!(out, "cap_limit = {}", s.cap_limit);
    let _ = writeln!(out, "seed = {}", s.seed);
    out
}
