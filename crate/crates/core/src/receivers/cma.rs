use crate::codes::SpreadingCode;
use crate::error::{Error, Result};

/// Any weight magnitude above this counts as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Adaptive despreader of one user on one subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct DespreaderState {
    pub weights: Vec<f64>,
    pub mu: f64,
    /// Dispersion constant, 1 for BPSK.
    pub gamma: f64,
}

impl DespreaderState {
    /// Weights start at the user's code.
    pub fn from_code(code: &SpreadingCode, mu: f64, gamma: f64) -> Self {
        Self { weights: code.chips().to_vec(), mu, gamma }
    }

    pub fn despread(&self, r: &[f64]) -> f64 {
        super::dot(&self.weights, r)
    }

    /// `w^T c`; stays positive while the despreader keeps its sign anchor.
    pub fn code_projection(&self, code: &SpreadingCode) -> f64 {
        super::dot(&self.weights, code.chips())
    }
}

/// Instantaneous constant-modulus cost `(z^2 - gamma)^2`.
#[inline]
pub fn cm_cost(z: f64, gamma: f64) -> f64 {
    let d = z * z - gamma;
    d * d
}

/// CMA error `z (z^2 - gamma)`.
#[inline]
pub fn cm_error(z: f64, gamma: f64) -> f64 {
    z * (z * z - gamma)
}

/// Stochastic-gradient step `w <- w - mu * e * r` for despreader output `z`
/// computed on input `r`.
pub fn cma_update(state: &mut DespreaderState, r: &[f64], z: f64) -> Result<()> {
    let step = state.mu * cm_error(z, state.gamma);
    let mut ok = true;
    for (w, &x) in state.weights.iter_mut().zip(r) {
        *w -= step * x;
        ok &= w.abs() <= DIVERGENCE_LIMIT;
    }
    if ok {
        Ok(())
    } else {
        // NaN fails the comparison above as well.
        Err(Error::CmaDivergence { user: 0, subcarrier: 0, symbol: 0 })
    }
}

/// Cancellation scaling `mean|c| / mean|w|`.
pub fn scaling_factor(state: &DespreaderState, code: &SpreadingCode) -> Result<f64> {
    let w_mean = state.weights.iter().map(|w| w.abs()).sum::<f64>() / state.weights.len() as f64;
    if !(w_mean > 0.0) {
        return Err(Error::DegenerateDespreader);
    }
    let c_mean = code.chips().iter().map(|c| c.abs()).sum::<f64>() / code.len() as f64;
    Ok(c_mean / w_mean)
}
