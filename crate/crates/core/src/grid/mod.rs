//! Multi-area network model, controller sensitivities and the linear plant.

mod fixture;
mod network;
mod plant;
mod sensitivity;
mod synthetic;

pub use fixture::{load_network, parse_network, write_network, FORMAT_VERSION};
pub use network::{
    series_susceptance, AreaLayout, BusId, BusKind, NetworkModel, NetworkParts, OperatingPoint,
    SlackBus, SusceptanceBlocks, TieLine,
};
pub use plant::{
    apply_load_event, area_snapshots, load_index, plant_response, AreaSnapshot, PlantState,
};
pub use sensitivity::{compute_sensitivities, SensitivityModel};
pub use synthetic::{
    build_synthetic_network, three_area_27bus, NetworkBuilder, SyntheticSpec,
    DEFAULT_TIE_IMPEDANCE,
};

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("{what} has shape {found:?}, expected {expected:?}")]
    Dimension {
        what: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("{0} is singular")]
    Singular(String),
    #[error("susceptance matrix is not symmetric (max deviation {0:e})")]
    Asymmetric(f64),
    #[error("unknown bus: {0}")]
    UnknownBus(String),
    #[error("at least one pilot bus is required")]
    NoPilots,
    #[error("load factor must be positive, got {0}")]
    InvalidFactor(f64),
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("network fixture: {0}")]
    Parse(String),
}
