//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Three operations: code correlation, a fading envelope trace and a short
//! BER run of all receivers. The logic lives in plain functions so it can be
//! tested natively; the exported wrappers only convert errors.

use wasm_bindgen::prelude::*;

use mcsic::channel::{FadingGenerator, FadingSpec};
use mcsic::codes::cross_correlation;
use mcsic::harness::{family_for, run_point_serial, step_size_rule, MeasuredUsers, PointSpec, ScenarioConfig};
use mcsic::receivers::{CombinerKind, ReceiverKind};
use mcsic::rng::{stream, Purpose};

/// Longest trace the page may request.
pub const MAX_TRACE: usize = 100_000;
/// Largest BER run the page may request.
pub const MAX_BER_SYMBOLS: u64 = 200_000;

/// Variant order of [`quick_ber`] output.
pub const VARIANTS: [(ReceiverKind, CombinerKind); 6] = [
    (ReceiverKind::Mf, CombinerKind::Egc),
    (ReceiverKind::Mf, CombinerKind::Mrc),
    (ReceiverKind::Csic, CombinerKind::Egc),
    (ReceiverKind::Csic, CombinerKind::Mrc),
    (ReceiverKind::Asic, CombinerKind::Egc),
    (ReceiverKind::Asic, CombinerKind::Mrc),
];

/// Periodic cross-correlation of Gold codes `a` and `b` (N = 31) at every
/// shift.
pub fn code_correlation(a: usize, b: usize) -> Result<Vec<f64>, String> {
    let fam = family_for(31).map_err(|e| e.to_string())?;
    let codes = fam.codes();
    let (ca, cb) = match (codes.get(a), codes.get(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(format!("code index must be below {}", codes.len())),
    };
    (0..ca.len()).map(|s| cross_correlation(ca, cb, s).map_err(|e| e.to_string())).collect()
}

/// Envelope in dB of one user's two subcarriers, `[g_0(0..M), g_1(0..M)]`.
pub fn fading_envelope(fd_tb: f64, rho: f64, symbols: usize, seed: u64) -> Result<Vec<f64>, String> {
    if symbols == 0 || symbols > MAX_TRACE {
        return Err(format!("symbols must be in 1..={MAX_TRACE}"));
    }
    let spec = FadingSpec::new(fd_tb, rho, 2);
    let mut rng = stream(seed, 0, Purpose::Fading);
    let mut gen = FadingGenerator::new(&spec, 1, &mut rng).map_err(|e| e.to_string())?;
    let mut scratch = vec![Default::default(); 2];
    let mut g = [0.0; 2];
    let mut out = vec![0.0; 2 * symbols];
    for m in 0..symbols {
        gen.next_gains(&mut scratch, &mut g);
        out[m] = 20.0 * g[0].max(1e-6).log10();
        out[symbols + m] = 20.0 * g[1].max(1e-6).log10();
    }
    Ok(out)
}

/// Runs every receiver on the same trials; returns `[ber, ci95]` per entry
/// of [`VARIANTS`].
pub fn quick_ber(users: usize, ebn0_db: f64, omega_db: f64, symbols: u64, seed: u64) -> Result<Vec<f64>, String> {
    if symbols == 0 || symbols > MAX_BER_SYMBOLS {
        return Err(format!("symbols must be in 1..={MAX_BER_SYMBOLS}"));
    }
    let d = ScenarioConfig::default();
    let fam = family_for(d.spreading).map_err(|e| e.to_string())?;
    if users == 0 || users > fam.len() {
        return Err(format!("users must be in 1..={}", fam.len()));
    }
    let spec = PointSpec {
        users,
        subcarriers: d.subcarriers,
        ebn0_db,
        rho: 0.0,
        mu: step_size_rule(d.mu_base, omega_db, None).map_err(|e| e.to_string())?,
        omega_db,
        fd_tb: d.fd_tb,
        oscillators: d.oscillators,
        gamma: d.gamma,
        max_symbols: symbols,
        target_errors: 0,
        trial_symbols: symbols.min(d.trial_symbols),
        warmup: d.warmup,
        seed,
        measured: if omega_db > 0.0 { MeasuredUsers::Weakest } else { MeasuredUsers::All },
        variants: VARIANTS.to_vec(),
    };
    let r = run_point_serial(&spec, fam.codes()).map_err(|e| e.to_string())?;
    Ok(r.variants.iter().flat_map(|v| [v.estimate.ber, v.estimate.ci95_halfwidth]).collect())
}

fn js(e: String) -> JsValue {
    JsValue::from_str(&e)
}

#[wasm_bindgen(js_name = codeCorrelation)]
pub fn code_correlation_js(a: usize, b: usize) -> Result<Vec<f64>, JsValue> {
    code_correlation(a, b).map_err(js)
}

#[wasm_bindgen(js_name = fadingEnvelope)]
pub fn fading_envelope_js(fd_tb: f64, rho: f64, symbols: usize, seed: u64) -> Result<Vec<f64>, JsValue> {
    fading_envelope(fd_tb, rho, symbols, seed).map_err(js)
}

#[wasm_bindgen(js_name = quickBer)]
pub fn quick_ber_js(users: usize, ebn0_db: f64, omega_db: f64, symbols: u64, seed: u64) -> Result<Vec<f64>, JsValue> {
    quick_ber(users, ebn0_db, omega_db, symbols, seed).map_err(js)
}

#[wasm_bindgen(js_name = variantLabels)]
pub fn variant_labels() -> String {
    VARIANTS.iter().map(|(r, c)| format!("{r}-{c}")).collect::<Vec<_>>().join(",")
}
