use std::fmt::Write as _;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::control::{rms_deviation, run_control_loop, ControlBounds, ControlInput};
use crate::cs::{snr_db, Codec, CodecConfig};
use crate::grid::{
    apply_load_event, area_snapshots, compute_sensitivities, load_index, plant_response,
    AreaSnapshot, NetworkModel, PlantState,
};
use crate::morphology::{mmf, StructuringElement};
use crate::mse::{detect, AlarmEvent};
use crate::telemetry::{concatenate_areas, deserialize, serialize, Channel, ChannelModel, TelemetryWindow};

use super::scenario::{BusRef, PilotSet, Scenario};
use super::HarnessError;

const CHANNEL_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

pub const CSV_HEADER: &str = "time_s,area_id,bus_id,v_pu,q_pu,entropy_nat,alarm,rho,snr_db,delay_s";

/// One monitored load bus at one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub time_s: f64,
    pub area_id: u16,
    pub bus_id: u32,
    pub v_pu: f64,
    pub q_pu: f64,
    pub entropy_nat: f64,
    pub alarm: bool,
    pub rho: f64,
    pub snr_db: f64,
    pub delay_s: f64,
}

/// One controller invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlStep {
    pub time_s: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Load-voltage rms deviation of the plant when the controller ran.
    pub x_rms_before: f64,
    /// Rms deviation the controller predicts after its own action.
    pub x_rms_predicted: f64,
    /// Whether the control applied at this step respected its bounds.
    pub applied_feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub rows: Vec<CsvRow>,
    pub times: Vec<f64>,
    /// Plant load-voltage rms deviation per step, before that step's control.
    pub x_rms: Vec<f64>,
    pub control: Vec<ControlStep>,
    pub alarms: Vec<AlarmEvent>,
    pub snr_db: Vec<f64>,
    pub delays_s: Vec<f64>,
    pub dropped_frames: usize,
    /// Concentrated state vector sent each step, before compression.
    pub pdc_states: Vec<DVector<f64>>,
    pub compression_ratio: f64,
}

impl RunReport {
    pub fn final_x_rms(&self) -> f64 {
        self.x_rms.last().copied().unwrap_or(0.0)
    }

    pub fn mean_delay_s(&self) -> f64 {
        if self.delays_s.is_empty() {
            return 0.0;
        }
        self.delays_s.iter().sum::<f64>() / self.delays_s.len() as f64
    }

    pub fn median_snr_db(&self) -> f64 {
        median(&self.snr_db)
    }

    pub fn iterations(&self) -> Vec<usize> {
        self.control.iter().map(|c| c.iterations).collect()
    }

    pub fn step_of(&self, time_s: f64) -> Option<usize> {
        self.times.iter().position(|&t| (t - time_s).abs() < 1e-9)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 96);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let snr = if r.snr_db.is_infinite() {
                "inf".to_string()
            } else {
                format!("{:.6}", r.snr_db)
            };
            let _ = writeln!(
                out,
                "{:.3},{},{},{:.9},{:.9},{:.9},{},{:.6},{},{:.9}",
                r.time_s,
                r.area_id,
                r.bus_id,
                r.v_pu,
                r.q_pu,
                r.entropy_nat,
                u8::from(r.alarm),
                r.rho,
                snr,
                r.delay_s
            );
        }
        out
    }
}

/// Median with `NaN`-free total ordering; `+∞` entries sort last.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn resolve_buses(net: &NetworkModel, refs: &[BusRef]) -> Result<Vec<usize>, HarnessError> {
    let mut out = Vec::new();
    for r in refs {
        let areas: Vec<u16> = match r.area {
            Some(a) => vec![a],
            None => (0..net.areas().len() as u16).collect(),
        };
        for a in areas {
            let g = load_index(net, a, r.number)?;
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

pub(crate) fn resolve_pilots(net: &NetworkModel, pilots: &PilotSet) -> Result<Vec<usize>, HarnessError> {
    let nl = net.n_load();
    match pilots {
        PilotSet::All => Ok((0..nl).collect()),
        PilotSet::First(k) if *k >= 1 && *k <= nl => Ok((0..*k).collect()),
        PilotSet::First(k) => Err(HarnessError::Scenario(format!("{k} pilots for {nl} load buses"))),
        PilotSet::Buses(refs) => resolve_buses(net, refs),
    }
}

fn stack(s: &AreaSnapshot) -> DVector<f64> {
    DVector::from_iterator(2 * s.v.len(), s.v.iter().chain(s.q.iter()).copied())
}

/// Load buses of the network located inside the concentrated state vector.
struct LoadSlot {
    area: u16,
    number: u32,
    global: usize,
    /// Row of the bus voltage inside its area window.
    area_row: usize,
    /// Row of the bus voltage inside the concentrated vector.
    pdc_row: usize,
}

fn load_slots(net: &NetworkModel, snaps: &[AreaSnapshot]) -> Result<Vec<LoadSlot>, HarnessError> {
    let mut slots = Vec::new();
    let mut offset = 0;
    for (layout, snap) in net.areas().iter().zip(snaps) {
        let mut numbers = layout.load_buses.clone();
        numbers.sort_unstable();
        for number in numbers {
            let area_row = snap
                .bus_numbers
                .iter()
                .position(|&b| b == number)
                .expect("load bus present in snapshot");
            slots.push(LoadSlot {
                area: snap.area,
                number,
                global: load_index(net, snap.area, number)?,
                area_row,
                pdc_row: offset + area_row,
            });
        }
        offset += 2 * snap.bus_numbers.len();
    }
    Ok(slots)
}

/// Runs the closed loop: events → plant → sensors → MMF → entropy detection
/// → concentration → compression → channel → recovery → controller. The
/// control computed at one sample is applied at the next.
///
/// The concentrator transmits the innovation of the state against the
/// receiver's previous reconstruction, starting from the nominal state, so
/// a steady system sends all-zero measurements.
pub fn run_scenario(s: &Scenario) -> Result<RunReport, HarnessError> {
    s.validate()?;
    let net = s.network.load()?;
    let pilots = resolve_pilots(&net, &s.pilots)?;
    let sens = compute_sensitivities(&net, &pilots)?;
    let bounds = ControlBounds::uniform(net.n_gen(), net.n_cap(), s.gen_limit, s.cap_limit);
    let dt = s.sample_period_s;
    let steps = s.steps();

    let events: Vec<(usize, Vec<usize>, f64)> = s
        .events
        .iter()
        .map(|e| Ok(((e.time_s / dt).round() as usize, resolve_buses(&net, &e.buses)?, e.factor)))
        .collect::<Result<_, HarnessError>>()?;
    let noisy: Vec<usize> = match &s.noise_buses {
        None => (0..net.n_load()).collect(),
        Some(refs) => resolve_buses(&net, refs)?,
    };

    let mut state = PlantState::nominal(&net);
    let snaps = area_snapshots(&net, &state);
    let slots = load_slots(&net, &snaps)?;
    let w = s.window_len;
    let mut windows: Vec<TelemetryWindow> = snaps
        .iter()
        .map(|sn| TelemetryWindow::filled(sn.area, &stack(sn), w, -((w - 1) as f64) * dt, dt))
        .collect();
    let area_rows: Vec<usize> = windows.iter().map(|w| w.n_states()).collect();

    let prefilter = StructuringElement::flat(s.prefilter_len)?;
    let n: usize = area_rows.iter().sum();
    let codec = Codec::new(CodecConfig::for_ratio(n, s.rho, s.seed)?);
    let rho = codec.config().ratio();
    let mut channel = Channel::new(ChannelModel {
        rng_seed: s.seed ^ CHANNEL_SEED_SALT,
        ..s.channel
    })?;
    let mut sensor_rng = ChaCha8Rng::seed_from_u64(s.seed);
    let sensor_gain = s
        .sensor_snr_db
        .filter(|v| v.is_finite())
        .map(|snr| 10f64.powf(-snr / 20.0));

    let mut x_hat = concatenate_areas(&windows)?.latest();
    let mut u_total = ControlInput::zeros(&bounds);
    let mut pending = ControlInput::zeros(&bounds);
    let j2_pilot = sens.j2().select_rows(pilots.iter());
    let v_ref = DVector::from_iterator(pilots.len(), pilots.iter().map(|&g| net.v_ref()[g]));
    let mut alarmed = vec![false; slots.len()];

    let mut report = RunReport {
        rows: Vec::with_capacity(steps * slots.len()),
        times: Vec::with_capacity(steps),
        x_rms: Vec::with_capacity(steps),
        control: Vec::with_capacity(steps),
        alarms: Vec::new(),
        snr_db: Vec::with_capacity(steps),
        delays_s: Vec::with_capacity(steps),
        dropped_frames: 0,
        pdc_states: Vec::with_capacity(steps),
        compression_ratio: rho,
    };

    for k in 0..steps {
        let t = k as f64 * dt;

        let q_before = state.q_load.clone();
        for (_, buses, factor) in events.iter().filter(|e| e.0 == k) {
            state = apply_load_event(&state, buses, *factor)?;
        }
        // demand increase = negative injection
        let dq_injection = &q_before - &state.q_load;
        let applied_feasible = pending.is_feasible();
        state = plant_response(&sens, &state, &dq_injection, &pending);
        state.time = t;
        let x_rms = rms_deviation(&state.v_load, net.v_ref())?;

        // sensors and local processing
        let snaps = area_snapshots(&net, &state);
        for (win, snap) in windows.iter_mut().zip(&snaps) {
            let mut measured = stack(snap);
            if let Some(gain) = sensor_gain {
                let nb = snap.bus_numbers.len();
                for slot in slots.iter().filter(|sl| sl.area == snap.area && noisy.contains(&sl.global)) {
                    for row in [slot.area_row, nb + slot.area_row] {
                        let z: f64 = StandardNormal.sample(&mut sensor_rng);
                        measured[row] += gain * measured[row].abs() * z;
                    }
                }
            }
            win.push(&measured);
        }
        let filtered: Vec<TelemetryWindow> = windows
            .iter()
            .map(|win| {
                let mut f = win.clone();
                for r in 0..f.n_states() {
                    let row = mmf(&win.signal(r), &prefilter);
                    for (c, v) in row.into_iter().enumerate() {
                        f.samples[(r, c)] = v;
                    }
                }
                f
            })
            .collect();

        let mut entropy = vec![0.0; slots.len()];
        let mut alarm_now = vec![false; slots.len()];
        for (i, slot) in slots.iter().enumerate() {
            let win = &filtered[slot.area as usize];
            let rep = detect(&win.signal(slot.area_row), &s.detector)?;
            entropy[i] = rep.entropy;
            alarm_now[i] = rep.alarm;
            if rep.alarm && !alarmed[i] {
                report.alarms.push(AlarmEvent {
                    bus: net
                        .bus_at(crate::grid::BusKind::Load, slot.global)
                        .expect("load bus"),
                    time_s: t,
                    entropy: rep.entropy,
                    threshold: rep.threshold,
                });
            }
            alarmed[i] = rep.alarm;
        }

        // concentrator → channel → receiver
        let x = concatenate_areas(&filtered)?.latest();
        let innovation = &x - &x_hat;
        let frame = codec
            .encode(&innovation)?
            .stamped(0, (t * 1e6).round() as u64);
        let delivery = channel.transmit(&serialize(&frame));
        match deserialize(&delivery.bytes) {
            Ok(received) => x_hat += codec.recover(&received)?,
            Err(_) => report.dropped_frames += 1,
        }
        let snr = snr_db(&x, &x_hat)?;

        // Controller: work with the total control around the nominal point.
        // The known effect of the control already applied is added back to
        // the pilot measurement, so the loop sees the uncontrolled deviation
        // and returns a new total; only the difference is actuated.
        let v_pilot = DVector::from_iterator(
            pilots.len(),
            pilots.iter().map(|&g| x_hat[slots.iter().find(|sl| sl.global == g).expect("pilot slot").pdc_row]),
        ) + &j2_pilot * u_total.values();
        let result = run_control_loop(&sens, &v_pilot, &v_ref, &bounds, &s.controller)?;
        let step_bounds = bounds.shifted(u_total.values());
        let increment = ControlInput::new(result.u_star.values() - u_total.values(), step_bounds)?;

        for (i, slot) in slots.iter().enumerate() {
            report.rows.push(CsvRow {
                time_s: t,
                area_id: slot.area,
                bus_id: slot.number,
                v_pu: state.v_load[slot.global],
                q_pu: state.q_load[slot.global],
                entropy_nat: entropy[i],
                alarm: alarm_now[i],
                rho,
                snr_db: snr,
                delay_s: delivery.delay_s,
            });
        }
        report.times.push(t);
        report.x_rms.push(x_rms);
        report.control.push(ControlStep {
            time_s: t,
            iterations: result.iterations,
            converged: result.converged,
            x_rms_before: x_rms,
            x_rms_predicted: result.x_rms,
            applied_feasible,
        });
        report.snr_db.push(snr);
        report.delays_s.push(delivery.delay_s);
        report.pdc_states.push(x);
        u_total = result.u_star;
        pending = increment;
    }
    Ok(report)
}
