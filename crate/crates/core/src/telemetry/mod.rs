//! Area windows, phasor-data concentration, the wire frame and the channel.

mod channel;
mod generator;
mod window;
mod wire;

pub use channel::{transmit, Channel, ChannelModel, Delivery};
pub use generator::correlated_telemetry;
pub use window::{
    add_white_noise, concatenate_areas, inject_sensor_noise, TelemetryWindow, DEFAULT_WINDOW_LEN,
};
pub use wire::{deserialize, frame_len, serialize, FrameError, HEADER_LEN, MAGIC, TRAILER_LEN, WIRE_VERSION};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TelemetryError {
    #[error("no windows to concatenate")]
    Empty,
    #[error("window of area {0} is not aligned with the others")]
    Misaligned(u16),
    #[error("an area appears twice")]
    DuplicateArea,
    #[error("invalid channel: {0}")]
    Channel(String),
}
