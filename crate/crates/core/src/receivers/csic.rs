use super::{dot, hard_decision, rank_users, CombinerKind, Detector, ReceiverKind, StageTrace, SymbolTrace};
use crate::codes::SpreadingCode;
use crate::error::{Error, Result};
use crate::frame::ReceivedFrame;

/// Conventional SIC: detect users in MF-power order, subtracting each user's
/// soft MF output respread with its code (`r <- r - z c`) on every branch.
///
/// `frame` is consumed as the running residual. Returns the decisions in
/// user order together with the stage trace.
pub fn csic_detect_and_cancel(
    frame: &mut ReceivedFrame,
    order: &[usize],
    codes: &[SpreadingCode],
    gains: &[f64],
    combiner: CombinerKind,
) -> Result<(Vec<i8>, SymbolTrace)> {
    let k_count = codes.len();
    let mut seen = vec![false; k_count];
    if order.len() != k_count || order.iter().any(|&k| k >= k_count || std::mem::replace(&mut seen[k], true)) {
        return Err(Error::InvalidParameter("stage order is not a permutation of the users".into()));
    }
    let mut decisions = vec![1i8; k_count];
    let mut trace = SymbolTrace { symbol: frame.symbol_index, order: order.to_vec(), stages: Vec::new() };
    cancel_in_order(frame, order, codes, gains, combiner, &mut decisions, Some(&mut trace));
    Ok((decisions, trace))
}

fn cancel_in_order(
    residual: &mut ReceivedFrame,
    order: &[usize],
    codes: &[SpreadingCode],
    gains: &[f64],
    combiner: CombinerKind,
    decisions: &mut [i8],
    mut trace: Option<&mut SymbolTrace>,
) {
    let l_count = residual.subcarriers();
    let mut z = vec![0.0; l_count];
    for &k in order {
        let c = codes[k].chips();
        let mut combined = 0.0;
        for (l, zl) in z.iter_mut().enumerate() {
            let row = residual.row_mut(l);
            *zl = dot(row, c);
            for (r, &ci) in row.iter_mut().zip(c) {
                *r -= *zl * ci;
            }
            combined += combiner.weight(gains[k * l_count + l]) * *zl;
        }
        decisions[k] = hard_decision(combined);
        if let Some(t) = trace.as_deref_mut() {
            t.stages.push(StageTrace {
                user: k,
                z: z.clone(),
                alpha: vec![1.0; l_count],
                combined,
                decision: decisions[k],
                residual_energy: residual.energy(),
            });
        }
    }
}

/// Stateless CSIC detector with a reusable residual buffer.
#[derive(Debug, Clone)]
pub struct CsicReceiver {
    combiner: CombinerKind,
    residual: Option<ReceivedFrame>,
}

impl CsicReceiver {
    pub fn new(combiner: CombinerKind) -> Self {
        Self { combiner, residual: None }
    }
}

impl Detector for CsicReceiver {
    fn kind(&self) -> ReceiverKind {
        ReceiverKind::Csic
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
        let order = rank_users(frame, codes);
        let residual = match &mut self.residual {
            Some(r) if r.chips().len() == frame.chips().len() => {
                r.chips_mut().copy_from_slice(frame.chips());
                r.symbol_index = frame.symbol_index;
                r
            }
            slot => slot.insert(frame.clone()),
        };
        if let Some(t) = trace.as_deref_mut() {
            t.symbol = frame.symbol_index;
            t.order = order.clone();
            t.stages.clear();
        }
        cancel_in_order(residual, &order, codes, gains, self.combiner, decisions, trace);
        Ok(())
    }
}
