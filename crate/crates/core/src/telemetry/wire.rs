//! Versioned little-endian frame layout.
//!
//! ```text
//! offset size field
//!      0    4 magic "GSVC"
//!      4    1 version
//!      5    2 area id
//!      7    8 timestamp (µs)
//!     15    4 n
//!     19    4 m
//!     23    8 matrix seed
//!     31  8·m measurements (f64)
//!  31+8m    4 CRC-32 of everything before it
//! ```

use nalgebra::DVector;

use crate::cs::{CodecConfig, CompressedFrame};

pub const MAGIC: [u8; 4] = *b"GSVC";
pub const WIRE_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 31;
pub const TRAILER_LEN: usize = 4;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FrameError {
    #[error("frame of {0} bytes is too short")]
    Truncated(usize),
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("checksum mismatch: computed {computed:08x}, stored {stored:08x}")]
    BadChecksum { computed: u32, stored: u32 },
    #[error("unsupported wire version {0}")]
    Version(u8),
    #[error("header declares m = {declared}, payload holds {actual} bytes")]
    LengthMismatch { declared: u32, actual: usize },
    #[error("header describes an invalid codec: {0}")]
    Codec(String),
}

pub fn frame_len(m: usize) -> usize {
    HEADER_LEN + 8 * m + TRAILER_LEN
}

pub fn serialize(frame: &CompressedFrame) -> Vec<u8> {
    let cfg = &frame.config;
    let mut out = Vec::with_capacity(frame_len(frame.y.len()));
    out.extend_from_slice(&MAGIC);
    out.push(WIRE_VERSION);
    out.extend_from_slice(&frame.area_id.to_le_bytes());
    out.extend_from_slice(&frame.timestamp_micros.to_le_bytes());
    out.extend_from_slice(&(cfg.n as u32).to_le_bytes());
    out.extend_from_slice(&(frame.y.len() as u32).to_le_bytes());
    out.extend_from_slice(&cfg.matrix_seed.to_le_bytes());
    for v in frame.y.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn le<const N: usize>(bytes: &[u8], at: usize) -> [u8; N] {
    bytes[at..at + N].try_into().expect("slice length")
}

/// Parses and validates a frame. Decoder settings not carried on the wire
/// (OMP limits) take their defaults.
pub fn deserialize(bytes: &[u8]) -> Result<CompressedFrame, FrameError> {
    if bytes.len() < HEADER_LEN + TRAILER_LEN {
        return Err(FrameError::Truncated(bytes.len()));
    }
    let magic: [u8; 4] = le(bytes, 0);
    if magic != MAGIC {
        return Err(FrameError::BadMagic(magic));
    }
    let body = bytes.len() - TRAILER_LEN;
    let stored = u32::from_le_bytes(le(bytes, body));
    let computed = crc32fast::hash(&bytes[..body]);
    if stored != computed {
        return Err(FrameError::BadChecksum { computed, stored });
    }
    if bytes[4] != WIRE_VERSION {
        return Err(FrameError::Version(bytes[4]));
    }
    let area_id = u16::from_le_bytes(le(bytes, 5));
    let timestamp_micros = u64::from_le_bytes(le(bytes, 7));
    let n = u32::from_le_bytes(le(bytes, 15));
    let m = u32::from_le_bytes(le(bytes, 19));
    let seed = u64::from_le_bytes(le(bytes, 23));
    let payload = body - HEADER_LEN;
    if payload != 8 * m as usize {
        return Err(FrameError::LengthMismatch {
            declared: m,
            actual: payload,
        });
    }
    let config = CodecConfig::new(n as usize, m as usize, seed).map_err(|e| FrameError::Codec(e.to_string()))?;
    let y = DVector::from_iterator(
        m as usize,
        (0..m as usize).map(|i| f64::from_le_bytes(le(bytes, HEADER_LEN + 8 * i))),
    );
    Ok(CompressedFrame {
        y,
        config,
        timestamp_micros,
        area_id,
    })
}

/// Rewrites the measurement values of an encoded frame in place and
/// refreshes its checksum. Returns `false` if the bytes are not a frame.
pub(crate) fn rewrite_payload(bytes: &mut [u8], f: impl FnOnce(&mut [f64])) -> bool {
    if bytes.len() < HEADER_LEN + TRAILER_LEN || bytes[..4] != MAGIC {
        return false;
    }
    let body = bytes.len() - TRAILER_LEN;
    let m = (body - HEADER_LEN) / 8;
    let mut values: Vec<f64> = (0..m)
        .map(|i| f64::from_le_bytes(le(bytes, HEADER_LEN + 8 * i)))
        .collect();
    f(&mut values);
    for (i, v) in values.iter().enumerate() {
        bytes[HEADER_LEN + 8 * i..HEADER_LEN + 8 * i + 8].copy_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&bytes[..body]);
    bytes[body..].copy_from_slice(&crc.to_le_bytes());
    true
}
