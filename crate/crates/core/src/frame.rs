//! Chip-rate received frame for one symbol period on `L` subcarriers.
//!
//! `r_l(n) = sum_k sqrt(P_k / L) g_{k,l} b_k c_k(n) + eta_l(n)`

use rand::Rng;

use crate::channel::add_awgn;
use crate::codes::SpreadingCode;
use crate::error::{Error, Result};

/// One user's transmit side: bit stream, linear power and spreading code.
#[derive(Debug, Clone)]
pub struct UserSource {
    pub bits: Vec<i8>,
    pub power: f64,
    pub code: SpreadingCode,
}

impl UserSource {
    /// Draws `symbols` equiprobable `±1` bits.
    pub fn random<R: Rng + ?Sized>(code: SpreadingCode, power: f64, symbols: usize, rng: &mut R) -> Self {
        let bits = random_bits(symbols, rng);
        Self { bits, power, code }
    }

    pub fn bit(&self, m: usize) -> i8 {
        self.bits[m]
    }
}

/// Equiprobable `±1` bits.
pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<i8> {
    (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()
}

/// Received chips of one symbol, row-major `L x N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    chips: Vec<f64>,
    subcarriers: usize,
    spreading: usize,
    pub symbol_index: usize,
}

impl ReceivedFrame {
    pub fn zeros(subcarriers: usize, spreading: usize, symbol_index: usize) -> Self {
        Self { chips: vec![0.0; subcarriers * spreading], subcarriers, spreading, symbol_index }
    }

    pub fn from_chips(chips: Vec<f64>, subcarriers: usize, spreading: usize, symbol_index: usize) -> Result<Self> {
        if chips.len() != subcarriers * spreading {
            return Err(Error::LengthMismatch { expected: subcarriers * spreading, got: chips.len() });
        }
        Ok(Self { chips, subcarriers, spreading, symbol_index })
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn spreading(&self) -> usize {
        self.spreading
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.chips[l * self.spreading..(l + 1) * self.spreading]
    }

    pub fn row_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.chips[l * self.spreading..(l + 1) * self.spreading]
    }

    pub fn chips(&self) -> &[f64] {
        &self.chips
    }

    pub fn chips_mut(&mut self) -> &mut [f64] {
        &mut self.chips
    }

    pub fn energy(&self) -> f64 {
        self.chips.iter().map(|x| x * x).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        self.chips.iter_mut().for_each(|x| *x *= factor);
    }
}

/// Noise standard deviation per real chip for a target `Eb/N0`:
/// `sigma = sqrt(P / (2 * 10^(ebn0_db/10)))`.
pub fn sigma_from_ebn0(ebn0_db: f64, desired_power: f64) -> Result<f64> {
    if !(desired_power > 0.0) {
        return Err(Error::InvalidParameter(format!("desired power must be positive, got {desired_power}")));
    }
    Ok((desired_power / (2.0 * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Adds the noiseless contribution of every user into `frame`.
///
/// `gains` is the user-major `K x L` amplitude matrix and `bits` holds one
/// `±1` symbol per user.
pub fn accumulate_users(
    frame: &mut ReceivedFrame,
    codes: &[SpreadingCode],
    powers: &[f64],
    bits: &[i8],
    gains: &[f64],
) -> Result<()> {
    let l_count = frame.subcarriers;
    let n = frame.spreading;
    let inv_l = 1.0 / l_count as f64;
    for (k, code) in codes.iter().enumerate() {
        if code.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: code.len() });
        }
        let base = (powers[k] * inv_l).sqrt() * f64::from(bits[k]);
        for l in 0..l_count {
            let amp = base * gains[k * l_count + l];
            for (r, &c) in frame.row_mut(l).iter_mut().zip(code.chips()) {
                *r += amp * c;
            }
        }
    }
    Ok(())
}

/// Synthesizes the received frame of symbol `m` for all sources.
pub fn synthesize_frame<R: Rng + ?Sized>(
    sources: &[UserSource],
    gains: &[f64],
    subcarriers: usize,
    sigma: f64,
    m: usize,
    rng: &mut R,
) -> Result<ReceivedFrame> {
    let n = sources.first().map(|s| s.code.len()).unwrap_or(0);
    if gains.len() != sources.len() * subcarriers {
        return Err(Error::LengthMismatch { expected: sources.len() * subcarriers, got: gains.len() });
    }
    if gains.iter().any(|&g| g < 0.0) {
        return Err(Error::InvalidParameter("fading gains must be non-negative".into()));
    }
    let mut frame = ReceivedFrame::zeros(subcarriers, n, m);
    let codes: Vec<SpreadingCode> = sources.iter().map(|s| s.code.clone()).collect();
    let powers: Vec<f64> = sources.iter().map(|s| s.power).collect();
    let bits: Vec<i8> = sources.iter().map(|s| s.bit(m)).collect();
    accumulate_users(&mut frame, &codes, &powers, &bits, gains)?;
    add_awgn(frame.chips_mut(), sigma, rng);
    Ok(frame)
}
