//! Multi-area secondary voltage control with morphological fault detection
//! and compressive-sensing telemetry.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod cs;
pub mod grid;
pub mod harness;
pub mod morphology;
pub mod mse;
pub mod telemetry;
