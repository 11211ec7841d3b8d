use nalgebra::DVector;

use super::network::{BusId, BusKind, NetworkModel};
use super::sensitivity::SensitivityModel;
use super::GridError;
use crate::control::ControlInput;

/// Measured state of the simulated plant.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    /// Load-bus voltage magnitudes (p.u.).
    pub v_load: DVector<f64>,
    /// Generator-bus voltage magnitudes (p.u.).
    pub v_gen: DVector<f64>,
    /// Capacitor reactive outputs (p.u.).
    pub q_cap: DVector<f64>,
    /// Reactive load demand (p.u.).
    pub q_load: DVector<f64>,
    /// Simulation time (s).
    pub time: f64,
}

impl PlantState {
    /// The network's nominal operating point with every load bus at its
    /// reference voltage.
    pub fn nominal(net: &NetworkModel) -> Self {
        let op = net.nominal();
        Self {
            v_load: net.v_ref().clone(),
            v_gen: op.v_gen.clone(),
            q_cap: op.q_cap.clone(),
            q_load: op.q_load.clone(),
            time: 0.0,
        }
    }
}

/// Advances the plant by one linear response step.
///
/// `dq_load` is the change of reactive injection at the load buses (a demand
/// increase is a negative injection). The control is clamped to its bounds
/// before it is applied; the load-bus voltages move by `J1·ΔQ_L − J2·u`.
///
/// Panics if the dimensions do not match the sensitivity model.
pub fn plant_response(
    sens: &SensitivityModel,
    state: &PlantState,
    dq_load: &DVector<f64>,
    u: &ControlInput,
) -> PlantState {
    let nl = sens.n_load();
    assert_eq!(dq_load.len(), nl, "ΔQ_L length");
    assert_eq!(u.len(), sens.n_controls(), "control length");
    assert_eq!(state.v_load.len(), nl, "V_L length");
    assert_eq!(state.v_gen.len(), sens.n_gen(), "V_G length");

    let u = u.clamped();
    let dv = sens.j1() * dq_load - sens.j2() * u.values();
    PlantState {
        v_load: &state.v_load + dv,
        v_gen: &state.v_gen + u.dv_gen(),
        q_cap: &state.q_cap + u.dq_cap(),
        q_load: state.q_load.clone(),
        time: state.time,
    }
}

/// Scales the reactive demand of the given load buses (global load indices).
pub fn apply_load_event(
    state: &PlantState,
    buses: &[usize],
    factor: f64,
) -> Result<PlantState, GridError> {
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(GridError::InvalidFactor(factor));
    }
    let mut next = state.clone();
    for &b in buses {
        let q = next
            .q_load
            .get_mut(b)
            .ok_or_else(|| GridError::UnknownBus(format!("load index {b}")))?;
        *q *= factor;
    }
    Ok(next)
}

/// Voltage and reactive power of every bus in one area, in ascending
/// external bus-number order.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaSnapshot {
    pub area: u16,
    pub bus_numbers: Vec<u32>,
    pub v: Vec<f64>,
    pub q: Vec<f64>,
}

/// Reconstructs capacitor voltages and generator reactive outputs from the
/// linear model and reports the full per-bus picture of every area.
pub fn area_snapshots(net: &NetworkModel, state: &PlantState) -> Vec<AreaSnapshot> {
    let b = net.blocks();
    let op = net.nominal();
    let dv_g = &state.v_gen - &op.v_gen;
    let dv_l = &state.v_load - net.v_ref();
    let dq_c = &state.q_cap - &op.q_cap;
    let dv_c = net.cc_inverse() * (dq_c - &b.cg * &dv_g - &b.cl * &dv_l);
    let dq_g = &b.gg * &dv_g + &b.gc * &dv_c + &b.gl * &dv_l;
    let v_cap = &op.v_cap + dv_c;
    let q_gen = &op.q_gen + dq_g;

    net.areas()
        .iter()
        .enumerate()
        .map(|(a, layout)| {
            let area = a as u16;
            let mut rows: Vec<(u32, f64, f64)> = Vec::with_capacity(layout.bus_count());
            if let Some(s) = layout.slack {
                rows.push((s.number, s.v, s.q));
            }
            for kind in [BusKind::Generator, BusKind::Capacitor, BusKind::Load] {
                let off = net.offset(area, kind);
                for (i, &number) in layout.buses(kind).iter().enumerate() {
                    let g = off + i;
                    let (v, q) = match kind {
                        BusKind::Generator => (state.v_gen[g], q_gen[g]),
                        BusKind::Capacitor => (v_cap[g], state.q_cap[g]),
                        BusKind::Load => (state.v_load[g], state.q_load[g]),
                    };
                    rows.push((number, v, q));
                }
            }
            rows.sort_by_key(|r| r.0);
            AreaSnapshot {
                area,
                bus_numbers: rows.iter().map(|r| r.0).collect(),
                v: rows.iter().map(|r| r.1).collect(),
                q: rows.iter().map(|r| r.2).collect(),
            }
        })
        .collect()
}

/// Global load index of the load bus with external `number` in `area`.
pub fn load_index(net: &NetworkModel, area: u16, number: u32) -> Result<usize, GridError> {
    let layout = net
        .areas()
        .get(area as usize)
        .ok_or_else(|| GridError::UnknownBus(format!("area {area}")))?;
    let i = layout
        .load_buses
        .iter()
        .position(|&b| b == number)
        .ok_or_else(|| GridError::UnknownBus(format!("load bus {number} in area {area}")))?;
    net.global_index(BusId::new(area, BusKind::Load, i))
        .ok_or_else(|| GridError::UnknownBus(format!("load bus {number} in area {area}")))
}
