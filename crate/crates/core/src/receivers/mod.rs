//! Multiuser detectors over a [`ReceivedFrame`]: matched filter, conventional
//! SIC with soft respreading, and blind adaptive SIC with CMA despreading and
//! weight-derived cancellation scaling.

mod asic;
mod cma;
mod csic;
mod mf;

pub use asic::{asic_branch, asic_receive_symbol, asic_stage, AsicReceiver, StageOutput};
pub use cma::{cm_cost, cm_error, cma_update, scaling_factor, DespreaderState, DIVERGENCE_LIMIT};
pub use csic::{csic_detect_and_cancel, CsicReceiver};
pub use mf::MfReceiver;

use std::fmt;
use std::str::FromStr;

use crate::codes::SpreadingCode;
use crate::error::{Error, Result};
use crate::frame::ReceivedFrame;

/// Diversity combining rule across subcarriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinerKind {
    /// Weights equal to the true channel amplitudes.
    Mrc,
    /// Unit weights.
    Egc,
}

impl CombinerKind {
    /// Combining weight for one branch with amplitude `gain`.
    #[inline]
    pub fn weight(self, gain: f64) -> f64 {
        match self {
            CombinerKind::Mrc => gain,
            CombinerKind::Egc => 1.0,
        }
    }
}

impl fmt::Display for CombinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CombinerKind::Mrc => "MRC",
            CombinerKind::Egc => "EGC",
        })
    }
}

impl FromStr for CombinerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MRC" => Ok(CombinerKind::Mrc),
            "EGC" => Ok(CombinerKind::Egc),
            other => Err(Error::Config(format!("unknown combiner '{other}'"))),
        }
    }
}

/// Which detector to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReceiverKind {
    Mf,
    Csic,
    Asic,
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReceiverKind::Mf => "MF",
            ReceiverKind::Csic => "CSIC",
            ReceiverKind::Asic => "ASIC",
        })
    }
}

impl FromStr for ReceiverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MF" => Ok(ReceiverKind::Mf),
            "CSIC" => Ok(ReceiverKind::Csic),
            "ASIC" => Ok(ReceiverKind::Asic),
            other => Err(Error::Config(format!("unknown receiver '{other}'"))),
        }
    }
}

/// What one detection stage saw and decided.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTrace {
    pub user: usize,
    /// Per-branch soft outputs.
    pub z: Vec<f64>,
    /// Per-branch cancellation scaling (1 for CSIC, absent for MF).
    pub alpha: Vec<f64>,
    pub combined: f64,
    pub decision: i8,
    /// Energy of the residual over all branches after this stage's
    /// cancellation.
    pub residual_energy: f64,
}

/// Stage-by-stage record of one symbol.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolTrace {
    pub symbol: usize,
    pub order: Vec<usize>,
    pub stages: Vec<StageTrace>,
}

/// A detector that turns one received frame into `±1` decisions for all
/// users. Adaptive detectors carry state from symbol to symbol.
pub trait Detector: Send {
    fn kind(&self) -> ReceiverKind;
    fn combiner(&self) -> CombinerKind;

    /// Writes one decision per user into `decisions`. `gains` is the
    /// user-major `K x L` amplitude matrix (used by MRC).
    fn detect(
        &mut self,
        frame: &ReceivedFrame,
        codes: &[SpreadingCode],
        gains: &[f64],
        decisions: &mut [i8],
        trace: Option<&mut SymbolTrace>,
    ) -> Result<()>;
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Matched-filter output of every branch against `code`.
pub fn mf_despread(frame: &ReceivedFrame, code: &SpreadingCode) -> Result<Vec<f64>> {
    if code.len() != frame.spreading() {
        return Err(Error::LengthMismatch { expected: frame.spreading(), got: code.len() });
    }
    Ok((0..frame.subcarriers()).map(|l| dot(frame.row(l), code.chips())).collect())
}

/// Users sorted by descending combined MF power `sum_l (c_k^T r_l)^2`,
/// ties broken by ascending user index.
pub fn rank_users(frame: &ReceivedFrame, codes: &[SpreadingCode]) -> Vec<usize> {
    let metric: Vec<f64> = codes
        .iter()
        .map(|c| (0..frame.subcarriers()).map(|l| dot(frame.row(l), c.chips()).powi(2)).sum())
        .collect();
    let mut order: Vec<usize> = (0..codes.len()).collect();
    order.sort_by(|&a, &b| metric[b].total_cmp(&metric[a]).then(a.cmp(&b)));
    order
}

/// Decision variable `sum_l lambda_l z_l`.
pub fn combine(z: &[f64], lambda: &[f64]) -> Result<f64> {
    if z.len() != lambda.len() {
        return Err(Error::LengthMismatch { expected: z.len(), got: lambda.len() });
    }
    Ok(dot(z, lambda))
}

/// Sign detector; zero maps to `+1`.
#[inline]
pub fn hard_decision(z: f64) -> i8 {
    if z < 0.0 {
        -1
    } else {
        1
    }
}

/// Builds a detector of the given kind for `users` users on `subcarriers`
/// branches. `mu` and `gamma` only matter for ASIC.
pub fn build_detector(
    kind: ReceiverKind,
    combiner: CombinerKind,
    codes: &[SpreadingCode],
    subcarriers: usize,
    mu: f64,
    gamma: f64,
) -> Box<dyn Detector> {
    match kind {
        ReceiverKind::Mf => Box::new(MfReceiver::new(combiner)),
        ReceiverKind::Csic => Box::new(CsicReceiver::new(combiner)),
        ReceiverKind::Asic => Box::new(AsicReceiver::new(combiner, codes, subcarriers, mu, gamma)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{default_gold_family, walsh_codes};
    use crate::frame::{accumulate_users, ReceivedFrame};

    fn frame_for(codes: &[SpreadingCode], powers: &[f64], bits: &[i8], gains: &[f64], l: usize) -> ReceivedFrame {
        let mut f = ReceivedFrame::zeros(l, codes[0].len(), 0);
        accumulate_users(&mut f, codes, powers, bits, gains).unwrap();
        f
    }

    #[test]
    fn mf_single_user_and_zero_frame() {
        let code = default_gold_family().codes()[0].clone();
        let f = frame_for(std::slice::from_ref(&code), &[1.0], &[1], &[1.0, 1.0], 2);
        let z = mf_despread(&f, &code).unwrap();
        for v in z {
            assert!((v - 0.5f64.sqrt()).abs() < 1e-12);
        }
        let zero = ReceivedFrame::zeros(2, 31, 0);
        assert_eq!(mf_despread(&zero, &code).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn mf_two_user_walsh_keeps_only_target() {
        let w = walsh_codes(4).unwrap();
        let codes = vec![w[1].clone(), w[3].clone()];
        let f = frame_for(&codes, &[1.0, 4.0], &[1, -1], &[1.0, 0.5, 2.0, 1.5], 2);
        let z = mf_despread(&f, &codes[1]).unwrap();
        // hand expansion: sqrt(4/2) * g * b
        assert!((z[0] - (-(2f64).sqrt() * 2.0)).abs() < 1e-12);
        assert!((z[1] - (-(2f64).sqrt() * 1.5)).abs() < 1e-12);
    }

    #[test]
    fn ranking_follows_power_and_ties() {
        let w = walsh_codes(4).unwrap();
        let codes = vec![w[1].clone(), w[2].clone(), w[3].clone()];
        let f = frame_for(&codes, &[4.0, 1.0, 0.25], &[1, -1, 1], &[1.0; 6], 2);
        assert_eq!(rank_users(&f, &codes), vec![0, 1, 2]);
        let f = frame_for(&codes, &[0.25, 1.0, 4.0], &[1, -1, 1], &[1.0; 6], 2);
        assert_eq!(rank_users(&f, &codes), vec![2, 1, 0]);
        let f = frame_for(&codes, &[1.0, 1.0, 1.0], &[1, -1, 1], &[1.0; 6], 2);
        assert_eq!(rank_users(&f, &codes), vec![0, 1, 2]);
    }

    #[test]
    fn combine_and_decide() {
        assert!((combine(&[0.3, -0.1], &[1.0, 1.0]).unwrap() - 0.2).abs() < 1e-15);
        assert!((combine(&[0.3, -0.1], &[2.0, 0.0]).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(combine(&[0.3], &[0.5]).unwrap(), 0.15);
        assert!(combine(&[0.3], &[0.5, 1.0]).is_err());
        assert_eq!(hard_decision(0.7), 1);
        assert_eq!(hard_decision(-1e-9), -1);
        assert_eq!(hard_decision(0.0), 1);
        assert_eq!(hard_decision(-0.0), 1);
    }

    #[test]
    fn kinds_parse_and_print() {
        for k in [ReceiverKind::Mf, ReceiverKind::Csic, ReceiverKind::Asic] {
            assert_eq!(k.to_string().parse::<ReceiverKind>().unwrap(), k);
        }
        assert_eq!("mrc".parse::<CombinerKind>().unwrap(), CombinerKind::Mrc);
        assert!("zf".parse::<CombinerKind>().is_err());
    }
}
