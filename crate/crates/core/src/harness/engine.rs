//! Monte Carlo engine.
//!
//! A point is simulated as a sequence of independent trials. Trial `t` draws
//! its bits, noise, fading and powers from streams keyed by `(seed, t)` only,
//! so every receiver variant in a point, and every point in a sweep, sees
//! the same realizations. Each trial starts fresh receivers, runs `warmup`
//! uncounted symbols and then counts errors. Trials run in fixed-size
//! batches on a worker pool and are merged in index order; the stopping
//! decision is made while merging, so results do not depend on the number
//! of workers.

use num_complex::Complex64;
use rand::RngCore;
use rayon::prelude::*;

use super::config::MeasuredUsers;
use super::power::assign_powers;
use super::stats::BerEstimate;
use crate::channel::{add_awgn, FadingGenerator, FadingSpec};
use crate::codes::SpreadingCode;
use crate::error::{Error, Result};
use crate::frame::{accumulate_users, sigma_from_ebn0, ReceivedFrame};
use crate::receivers::{build_detector, CombinerKind, Detector, ReceiverKind, SymbolTrace};
use crate::rng::{stream, Purpose, SimRng};

/// Trials merged per scheduling round.
const BATCH: usize = 8;

/// Everything needed to simulate one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSpec {
    pub users: usize,
    pub subcarriers: usize,
    pub ebn0_db: f64,
    pub rho: f64,
    pub mu: f64,
    pub omega_db: f64,
    pub fd_tb: f64,
    pub oscillators: usize,
    pub gamma: f64,
    pub max_symbols: u64,
    pub target_errors: u64,
    pub trial_symbols: u64,
    pub warmup: u64,
    pub seed: u64,
    pub measured: MeasuredUsers,
    pub variants: Vec<(ReceiverKind, CombinerKind)>,
}

impl PointSpec {
    fn fading_spec(&self) -> FadingSpec {
        FadingSpec { fd_tb: self.fd_tb, rho: self.rho, subcarriers: self.subcarriers, oscillators: self.oscillators }
    }

    fn measured_users(&self) -> std::ops::Range<usize> {
        match self.measured {
            MeasuredUsers::All => 0..self.users,
            MeasuredUsers::Weakest => 0..1,
        }
    }
}

/// Result for one receiver variant at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    pub receiver: ReceiverKind,
    pub combiner: CombinerKind,
    pub estimate: BerEstimate,
    /// Trials aborted by CMA divergence.
    pub faults: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub variants: Vec<VariantResult>,
    pub trials: u64,
    /// Counted symbol periods.
    pub symbol_periods: u64,
}

impl PointResult {
    pub fn get(&self, receiver: ReceiverKind, combiner: CombinerKind) -> Option<&VariantResult> {
        self.variants.iter().find(|v| v.receiver == receiver && v.combiner == combiner)
    }

    pub fn total_faults(&self) -> u64 {
        self.variants.iter().map(|v| v.faults).sum()
    }
}

#[derive(Debug, Clone, Default)]
struct TrialOutcome {
    errors: Vec<u64>,
    bits: Vec<u64>,
    faulted: Vec<bool>,
    periods: u64,
}

/// Reusable per-trial simulation of the transmit side and channel.
struct Link {
    codes: Vec<SpreadingCode>,
    powers: Vec<f64>,
    sigma: f64,
    fading: FadingGenerator,
    bits_rng: SimRng,
    noise_rng: SimRng,
    scratch: Vec<Complex64>,
    gains: Vec<f64>,
    bits: Vec<i8>,
    frame: ReceivedFrame,
}

impl Link {
    fn new(spec: &PointSpec, codes: &[SpreadingCode], trial: u64) -> Result<Self> {
        let mut fading_rng = stream(spec.seed, trial, Purpose::Fading);
        let mut power_rng = stream(spec.seed, trial, Purpose::Powers);
        let k = spec.users;
        let l = spec.subcarriers;
        Ok(Self {
            codes: codes[..k].to_vec(),
            powers: assign_powers(k, spec.omega_db, &mut power_rng)?,
            sigma: sigma_from_ebn0(spec.ebn0_db, 1.0)?,
            fading: FadingGenerator::new(&spec.fading_spec(), k, &mut fading_rng)?,
            bits_rng: stream(spec.seed, trial, Purpose::Bits),
            noise_rng: stream(spec.seed, trial, Purpose::Noise),
            scratch: vec![Complex64::new(0.0, 0.0); k * l],
            gains: vec![0.0; k * l],
            bits: vec![1; k],
            frame: ReceivedFrame::zeros(l, codes[0].len(), 0),
        })
    }

    fn advance(&mut self, m: usize) -> Result<()> {
        self.fading.next_gains(&mut self.scratch, &mut self.gains);
        let mut word = 0u64;
        for (i, b) in self.bits.iter_mut().enumerate() {
            if i % 64 == 0 {
                word = self.bits_rng.next_u64();
            }
            *b = if (word >> (i % 64)) & 1 == 0 { 1 } else { -1 };
        }
        self.frame.chips_mut().iter_mut().for_each(|x| *x = 0.0);
        self.frame.symbol_index = m;
        accumulate_users(&mut self.frame, &self.codes, &self.powers, &self.bits, &self.gains)?;
        add_awgn(self.frame.chips_mut(), self.sigma, &mut self.noise_rng);
        Ok(())
    }
}

fn make_detectors(spec: &PointSpec, codes: &[SpreadingCode]) -> Vec<Box<dyn Detector>> {
    spec.variants
        .iter()
        .map(|&(rx, comb)| build_detector(rx, comb, codes, spec.subcarriers, spec.mu, spec.gamma))
        .collect()
}

fn run_trial(spec: &PointSpec, codes: &[SpreadingCode], trial: u64, counted: u64) -> Result<TrialOutcome> {
    let codes = &codes[..spec.users];
    let mut link = Link::new(spec, codes, trial)?;
    let mut detectors = make_detectors(spec, codes);
    let nv = detectors.len();
    let mut out = TrialOutcome {
        errors: vec![0; nv],
        bits: vec![0; nv],
        faulted: vec![false; nv],
        periods: counted,
    };
    let mut decisions = vec![0i8; spec.users];
    let measured = spec.measured_users();
    let total = spec.warmup + counted;
    for m in 0..total {
        link.advance(m as usize)?;
        let counting = m >= spec.warmup;
        for (v, det) in detectors.iter_mut().enumerate() {
            if out.faulted[v] {
                continue;
            }
            match det.detect(&link.frame, codes, &link.gains, &mut decisions, None) {
                Ok(()) => {}
                Err(Error::CmaDivergence { .. }) => {
                    out.faulted[v] = true;
                    continue;
                }
                Err(e) => return Err(e),
            }
            if counting {
                for k in measured.clone() {
                    out.errors[v] += u64::from(decisions[k] != link.bits[k]);
                }
                out.bits[v] += measured.len() as u64;
            }
        }
    }
    for v in 0..nv {
        if out.faulted[v] {
            out.errors[v] = 0;
            out.bits[v] = 0;
        }
    }
    Ok(out)
}

/// Counted symbol periods assigned to trial `t`.
fn trial_allotment(spec: &PointSpec, trial: u64) -> u64 {
    let done = trial.saturating_mul(spec.trial_symbols);
    spec.max_symbols.saturating_sub(done).min(spec.trial_symbols)
}

/// Simulates one point until every variant has `target_errors` errors (when
/// positive) or `max_symbols` counted periods have been run.
pub fn run_point(spec: &PointSpec, codes: &[SpreadingCode], pool: &rayon::ThreadPool) -> Result<PointResult> {
    run_batches(spec, codes, |batch| {
        pool.install(|| batch.par_iter().map(|&(t, n)| run_trial(spec, codes, t, n)).collect())
    })
}

/// Same as [`run_point`] on the calling thread, for targets without threads.
pub fn run_point_serial(spec: &PointSpec, codes: &[SpreadingCode]) -> Result<PointResult> {
    run_batches(spec, codes, |batch| batch.iter().map(|&(t, n)| run_trial(spec, codes, t, n)).collect())
}

fn run_batches(
    spec: &PointSpec,
    codes: &[SpreadingCode],
    exec: impl Fn(&[(u64, u64)]) -> Vec<Result<TrialOutcome>>,
) -> Result<PointResult> {
    if codes.len() < spec.users {
        return Err(Error::FamilyTooSmall { requested: spec.users, available: codes.len() });
    }
    if spec.variants.is_empty() {
        return Err(Error::InvalidParameter("no receiver variants requested".into()));
    }
    let nv = spec.variants.len();
    let mut errors = vec![0u64; nv];
    let mut bits = vec![0u64; nv];
    let mut faults = vec![0u64; nv];
    let mut periods = 0u64;
    let mut trials = 0u64;
    let mut next = 0u64;

    let done = |errors: &[u64], periods: u64| {
        periods >= spec.max_symbols || (spec.target_errors > 0 && errors.iter().all(|&e| e >= spec.target_errors))
    };

    'outer: while !done(&errors, periods) {
        let batch: Vec<(u64, u64)> = (next..next + BATCH as u64)
            .map(|t| (t, trial_allotment(spec, t)))
            .filter(|&(_, n)| n > 0)
            .collect();
        if batch.is_empty() {
            break;
        }
        next += BATCH as u64;
        let outcomes = exec(&batch);
        for outcome in outcomes {
            let o = outcome?;
            for v in 0..nv {
                errors[v] += o.errors[v];
                bits[v] += o.bits[v];
                faults[v] += u64::from(o.faulted[v]);
            }
            periods += o.periods;
            trials += 1;
            if done(&errors, periods) {
                break 'outer;
            }
        }
    }

    let variants = spec
        .variants
        .iter()
        .enumerate()
        .map(|(v, &(receiver, combiner))| VariantResult {
            receiver,
            combiner,
            estimate: BerEstimate::new(errors[v], bits[v]),
            faults: faults[v],
        })
        .collect();
    Ok(PointResult { variants, trials, symbol_periods: periods })
}

/// Runs the first `symbols` symbols of trial 0 and records a stage trace per
/// variant and symbol.
pub fn trace_point(
    spec: &PointSpec,
    codes: &[SpreadingCode],
    symbols: usize,
) -> Result<Vec<(ReceiverKind, CombinerKind, Vec<SymbolTrace>)>> {
    let codes = &codes[..spec.users];
    let mut link = Link::new(spec, codes, 0)?;
    let mut detectors = make_detectors(spec, codes);
    let mut traces: Vec<Vec<SymbolTrace>> = vec![Vec::with_capacity(symbols); detectors.len()];
    let mut decisions = vec![0i8; spec.users];
    for m in 0..symbols {
        link.advance(m)?;
        for (v, det) in detectors.iter_mut().enumerate() {
            let mut t = SymbolTrace::default();
            det.detect(&link.frame, codes, &link.gains, &mut decisions, Some(&mut t))?;
            traces[v].push(t);
        }
    }
    Ok(spec.variants.iter().zip(traces).map(|(&(r, c), t)| (r, c, t)).collect())
}

/// Fading amplitudes of trial 0: `(symbol, user, subcarrier, gain)`.
pub fn dump_fading(spec: &PointSpec, symbols: usize) -> Result<Vec<(usize, usize, usize, f64)>> {
    let mut rng = stream(spec.seed, 0, Purpose::Fading);
    let mut gen = FadingGenerator::new(&spec.fading_spec(), spec.users, &mut rng)?;
    let l = spec.subcarriers;
    let mut scratch = vec![Complex64::new(0.0, 0.0); spec.users * l];
    let mut gains = vec![0.0; spec.users * l];
    let mut rows = Vec::with_capacity(symbols * spec.users * l);
    for m in 0..symbols {
        gen.next_gains(&mut scratch, &mut gains);
        for k in 0..spec.users {
            for li in 0..l {
                rows.push((m, k, li, gains[k * l + li]));
            }
        }
    }
    Ok(rows)
}
