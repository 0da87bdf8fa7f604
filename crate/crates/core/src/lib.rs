//! Link-level Monte Carlo simulator for synchronous uplink multicarrier
//! DS-CDMA with three receivers: matched filter, conventional successive
//! interference cancellation, and blind adaptive SIC with constant-modulus
//! despreading and weight-derived cancellation scaling.

pub mod analytic;
pub mod channel;
pub mod codes;
pub mod error;
pub mod frame;
pub mod receivers;
pub mod rng;

pub use error::{Error, Result};
pub mod harness;
