use super::{dot, hard_decision, CombinerKind, Detector, ReceiverKind, StageTrace, SymbolTrace};
use crate::codes::SpreadingCode;
use crate::error::Result;
use crate::frame::ReceivedFrame;

/// Conventional single-user detector: per-branch correlator then combining.
#[derive(Debug, Clone)]
pub struct MfReceiver {
    combiner: CombinerKind,
}

impl MfReceiver {
    pub fn new(combiner: CombinerKind) -> Self {
        Self { combiner }
    }
}

impl Detector for MfReceiver {
    fn kind(&self) -> ReceiverKind {
        ReceiverKind::Mf
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
        let l_count = frame.subcarriers();
        if let Some(t) = trace.as_deref_mut() {
            t.symbol = frame.symbol_index;
            t.order = (0..codes.len()).collect();
            t.stages.clear();
        }
        for (k, code) in codes.iter().enumerate() {
            let mut combined = 0.0;
            for l in 0..l_count {
                let z = dot(frame.row(l), code.chips());
                combined += self.combiner.weight(gains[k * l_count + l]) * z;
            }
            decisions[k] = hard_decision(combined);
            if let Some(t) = trace.as_deref_mut() {
                t.stages.push(StageTrace {
                    user: k,
                    z: (0..l_count).map(|l| dot(frame.row(l), code.chips())).collect(),
                    alpha: Vec::new(),
                    combined,
                    decision: decisions[k],
                    residual_energy: frame.energy(),
                });
            }
        }
        Ok(())
    }
}
