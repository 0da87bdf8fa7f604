//! Blind adaptive SIC.
//!
//! Per stage and branch: despread with the adaptive weights, take one CMA
//! step, derive the scaling factor from the updated weights, then subtract
//! `alpha * z * c` from the residual. Users are re-ranked on every symbol by
//! their combined MF power; despreader state is keyed by user, not by stage.

use super::cma::{cma_update, scaling_factor, DespreaderState};
use super::{hard_decision, rank_users, CombinerKind, Detector, ReceiverKind, StageTrace, SymbolTrace};
use crate::codes::SpreadingCode;
use crate::error::{Error, Result};
use crate::frame::ReceivedFrame;

/// Despreads, adapts, scales and cancels one user on one branch in place.
/// Returns `(z, alpha)`.
#[inline]
pub fn asic_branch(residual: &mut [f64], state: &mut DespreaderState, code: &SpreadingCode) -> Result<(f64, f64)> {
    let z = state.despread(residual);
    cma_update(state, residual, z)?;
    let alpha = scaling_factor(state, code)?;
    let amp = alpha * z;
    for (r, &c) in residual.iter_mut().zip(code.chips()) {
        *r -= amp * c;
    }
    Ok((z, alpha))
}

/// Per-branch outputs of one ASIC stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutput {
    pub z: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// One detection stage for `user` across all branches of `residual`.
/// `states` holds that user's `L` despreaders.
pub fn asic_stage(
    residual: &mut ReceivedFrame,
    states: &mut [DespreaderState],
    code: &SpreadingCode,
    user: usize,
) -> Result<StageOutput> {
    let l_count = residual.subcarriers();
    if states.len() != l_count {
        return Err(Error::LengthMismatch { expected: l_count, got: states.len() });
    }
    let symbol = residual.symbol_index;
    let mut out = StageOutput { z: Vec::with_capacity(l_count), alpha: Vec::with_capacity(l_count) };
    for (l, state) in states.iter_mut().enumerate() {
        let (z, alpha) = asic_branch(residual.row_mut(l), state, code)
            .map_err(|e| tag_divergence(e, user, l, symbol))?;
        out.z.push(z);
        out.alpha.push(alpha);
    }
    Ok(out)
}

fn tag_divergence(e: Error, user: usize, subcarrier: usize, symbol: usize) -> Error {
    match e {
        Error::CmaDivergence { .. } => Error::CmaDivergence { user, subcarrier, symbol },
        other => other,
    }
}

/// Full ASIC pass over one symbol. `states` is user-major (`K x L`).
pub fn asic_receive_symbol(
    frame: &ReceivedFrame,
    states: &mut [DespreaderState],
    codes: &[SpreadingCode],
    gains: &[f64],
    combiner: CombinerKind,
) -> Result<(Vec<i8>, SymbolTrace)> {
    let l_count = frame.subcarriers();
    if states.len() != codes.len() * l_count {
        return Err(Error::LengthMismatch { expected: codes.len() * l_count, got: states.len() });
    }
    let order = rank_users(frame, codes);
    let mut residual = frame.clone();
    let mut decisions = vec![1i8; codes.len()];
    let mut trace = SymbolTrace { symbol: frame.symbol_index, order: order.clone(), stages: Vec::new() };
    for &k in &order {
        let out = asic_stage(&mut residual, &mut states[k * l_count..(k + 1) * l_count], &codes[k], k)?;
        let combined: f64 =
            out.z.iter().enumerate().map(|(l, z)| combiner.weight(gains[k * l_count + l]) * z).sum();
        decisions[k] = hard_decision(combined);
        trace.stages.push(StageTrace {
            user: k,
            z: out.z,
            alpha: out.alpha,
            combined,
            decision: decisions[k],
            residual_energy: residual.energy(),
        });
    }
    Ok((decisions, trace))
}

/// Stateful ASIC detector holding one despreader per (user, subcarrier).
#[derive(Debug, Clone)]
pub struct AsicReceiver {
    combiner: CombinerKind,
    subcarriers: usize,
    states: Vec<DespreaderState>,
    residual: Vec<f64>,
    z: Vec<f64>,
    alpha: Vec<f64>,
}

impl AsicReceiver {
    pub fn new(combiner: CombinerKind, codes: &[SpreadingCode], subcarriers: usize, mu: f64, gamma: f64) -> Self {
        let states = codes
            .iter()
            .flat_map(|c| std::iter::repeat_with(move || DespreaderState::from_code(c, mu, gamma)).take(subcarriers))
            .collect();
        Self { combiner, subcarriers, states, residual: Vec::new(), z: vec![0.0; subcarriers], alpha: vec![0.0; subcarriers] }
    }

    /// Despreader of user `k` on subcarrier `l`.
    pub fn state(&self, k: usize, l: usize) -> &DespreaderState {
        &self.states[k * self.subcarriers + l]
    }

    pub fn states(&self) -> &[DespreaderState] {
        &self.states
    }

    pub fn states_mut(&mut self) -> &mut [DespreaderState] {
        &mut self.states
    }

    /// Number of despreaders whose weights have lost their sign anchor
    /// (`w^T c <= 0`).
    pub fn sign_anchor_violations(&self, codes: &[SpreadingCode]) -> usize {
        self.states
            .iter()
            .enumerate()
            .filter(|(i, s)| s.code_projection(&codes[i / self.subcarriers]) <= 0.0)
            .count()
    }
}

impl Detector for AsicReceiver {
    fn kind(&self) -> ReceiverKind {
        ReceiverKind::Asic
    }

    fn combiner(&self) -> CombinerKind {
        self.combiner
    }

    fn detect(
        &mut self,
        frame: &ReceivedFrame,
        codes: &[SpreadingCode],
        gains: &[f64],
        decisions: &mut [i8],
        mut trace: Option<&mut SymbolTrace>,
    ) -> Result<()> {
        let l_count = self.subcarriers;
        let n = frame.spreading();
        let order = rank_users(frame, codes);
        self.residual.clear();
        self.residual.extend_from_slice(frame.chips());
        if let Some(t) = trace.as_deref_mut() {
            t.symbol = frame.symbol_index;
            t.order = order.clone();
            t.stages.clear();
        }
        for &k in &order {
            let mut combined = 0.0;
            for l in 0..l_count {
                let row = &mut self.residual[l * n..(l + 1) * n];
                let (z, alpha) = asic_branch(row, &mut self.states[k * l_count + l], &codes[k])
                    .map_err(|e| tag_divergence(e, k, l, frame.symbol_index))?;
                self.z[l] = z;
                self.alpha[l] = alpha;
                combined += self.combiner.weight(gains[k * l_count + l]) * z;
            }
            decisions[k] = hard_decision(combined);
            if let Some(t) = trace.as_deref_mut() {
                t.stages.push(StageTrace {
                    user: k,
                    z: self.z.clone(),
                    alpha: self.alpha.clone(),
                    combined,
                    decision: decisions[k],
                    residual_energy: self.residual.iter().map(|x| x * x).sum(),
                });
            }
        }
        Ok(())
    }
}
