//! Experiment harness: configuration, presets, the Monte Carlo engine and
//! CSV output.

pub mod config;
pub mod engine;
pub mod power;
pub mod scenario;
pub mod stats;
pub mod validate;

pub use config::{MeasuredUsers, MuSetting, ScenarioConfig};
pub use engine::{run_point, run_point_serial, PointResult, PointSpec, VariantResult};
pub use power::{assign_powers, omega_linear, step_size_rule};
pub use scenario::{preset, run_scenario, ResultRow, ResultTable, PRESET_NAMES};
pub use stats::{wilson_interval, BerEstimate};

use crate::codes::{generate_gold_family, GoldFamily, DEFAULT_PREFERRED_PAIR};
use crate::error::{Error, Result};

/// Gold family for a supported spreading factor.
pub fn family_for(spreading: usize) -> Result<GoldFamily> {
    match spreading {
        31 => generate_gold_family(DEFAULT_PREFERRED_PAIR),
        // x^3 + x + 1, x^3 + x^2 + 1
        7 => generate_gold_family((0b1011, 0b1101)),
        other => Err(Error::Config(format!("no Gold family configured for N = {other} (use 7 or 31)"))),
    }
}
