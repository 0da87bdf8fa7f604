//! Reference results: the closed-form single-user diversity BER and a
//! deliberately naive multiuser detector used to cross-check the optimized
//! receivers on small instances.

use crate::codes::SpreadingCode;
use crate::error::{Error, Result};
use crate::receivers::CombinerKind;

/// BPSK bit error rate with `L`-branch MRC over independent Rayleigh
/// branches, with per-branch mean SNR `10^(ebn0/10) / L`.
pub fn su_mrc_ber(ebn0_db: f64, branches: usize) -> f64 {
    assert!(branches >= 1, "need at least one branch");
    let snr_branch = 10f64.powf(ebn0_db / 10.0) / branches as f64;
    let mu = (snr_branch / (1.0 + snr_branch)).sqrt();
    let p = 0.5 * (1.0 - mu);
    let mut sum = 0.0;
    let mut binom = 1.0; // C(L-1+i, i)
    for i in 0..branches {
        if i > 0 {
            binom *= (branches - 1 + i) as f64 / i as f64;
        }
        sum += binom * (1.0 - p).powi(i as i32);
    }
    p.powi(branches as i32) * sum
}

/// A single-user diversity query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityBerQuery {
    pub ebn0_db: f64,
    pub branches: usize,
    pub combiner: CombinerKind,
}

impl DiversityBerQuery {
    /// Closed form for MRC; `None` for EGC, which has no closed form here.
    pub fn closed_form(&self) -> Option<f64> {
        match self.combiner {
            CombinerKind::Mrc => Some(su_mrc_ber(self.ebn0_db, self.branches)),
            CombinerKind::Egc => None,
        }
    }
}

/// Receiver evaluated by the oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleReceiver {
    Mf,
    Csic,
    /// One ASIC symbol starting from `weights[k][l]` (the user's code when
    /// `None`).
    Asic { mu: f64, gamma: f64, weights: Option<Vec<Vec<Vec<f64>>>> },
}

/// Oracle result for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub order: Vec<usize>,
    pub decisions: Vec<i8>,
    pub combined: Vec<f64>,
    /// Updated ASIC weights `[k][l][n]`; empty for MF and CSIC.
    pub weights: Vec<Vec<Vec<f64>>>,
}

/// Largest instance the oracle accepts.
pub const ORACLE_MAX_USERS: usize = 4;
pub const ORACLE_MAX_CHIPS: usize = 8;

/// Evaluates one symbol by direct indexing, chip by chip.
///
/// `bits[k]`, `powers[k]`, `gains[k][l]`; `noise[l][n]` is added when
/// given.
pub fn brute_force_multiuser(
    bits: &[i8],
    codes: &[SpreadingCode],
    powers: &[f64],
    gains: &[Vec<f64>],
    noise: Option<&[Vec<f64>]>,
    receiver: &OracleReceiver,
    combiner: CombinerKind,
) -> Result<OracleOutput> {
    let k_count = codes.len();
    if k_count == 0 || k_count > ORACLE_MAX_USERS {
        return Err(Error::InstanceTooLarge(format!("{k_count} users")));
    }
    let n = codes[0].len();
    if n > ORACLE_MAX_CHIPS {
        return Err(Error::InstanceTooLarge(format!("{n} chips")));
    }
    let l_count = gains[0].len();

    // r[l][n]
    let mut r = vec![vec![0.0; n]; l_count];
    for k in 0..k_count {
        let c = codes[k].chips();
        for l in 0..l_count {
            let amp = (powers[k] * (1.0 / l_count as f64)).sqrt() * f64::from(bits[k]) * gains[k][l];
            for i in 0..n {
                r[l][i] += amp * c[i];
            }
        }
    }
    if let Some(noise) = noise {
        for l in 0..l_count {
            for i in 0..n {
                r[l][i] += noise[l][i];
            }
        }
    }

    let lambda = |k: usize, l: usize| match combiner {
        CombinerKind::Mrc => gains[k][l],
        CombinerKind::Egc => 1.0,
    };
    let corr = |x: &[f64], y: &[f64]| {
        let mut s = 0.0;
        for i in 0..x.len() {
            s += x[i] * y[i];
        }
        s
    };

    // selection sort on combined MF power, lowest index wins ties
    let mut metric = vec![0.0; k_count];
    for k in 0..k_count {
        for l in 0..l_count {
            let z = corr(&r[l], codes[k].chips());
            metric[k] += z * z;
        }
    }
    let mut order = Vec::with_capacity(k_count);
    let mut used = vec![false; k_count];
    for _ in 0..k_count {
        let mut best = usize::MAX;
        for k in 0..k_count {
            if !used[k] && (best == usize::MAX || metric[k] > metric[best]) {
                best = k;
            }
        }
        used[best] = true;
        order.push(best);
    }

    let mut decisions = vec![1i8; k_count];
    let mut combined = vec![0.0; k_count];
    let mut weights_out = Vec::new();

    match receiver {
        OracleReceiver::Mf => {
            for k in 0..k_count {
                for l in 0..l_count {
                    combined[k] += lambda(k, l) * corr(&r[l], codes[k].chips());
                }
            }
        }
        OracleReceiver::Csic => {
            for &k in &order {
                let c = codes[k].chips();
                for l in 0..l_count {
                    let z = corr(&r[l], c);
                    for i in 0..n {
                        r[l][i] -= z * c[i];
                    }
                    combined[k] += lambda(k, l) * z;
                }
            }
        }
        OracleReceiver::Asic { mu, gamma, weights } => {
            let mut w: Vec<Vec<Vec<f64>>> = match weights {
                Some(w) => w.clone(),
                None => codes.iter().map(|c| vec![c.chips().to_vec(); l_count]).collect(),
            };
            for &k in &order {
                let c = codes[k].chips();
                for l in 0..l_count {
                    let z = corr(&w[k][l], &r[l]);
                    let e = z * (z * z - gamma);
                    for i in 0..n {
                        w[k][l][i] -= mu * e * r[l][i];
                    }
                    let mut c_abs = 0.0;
                    let mut w_abs = 0.0;
                    for i in 0..n {
                        c_abs += c[i].abs();
                        w_abs += w[k][l][i].abs();
                    }
                    let alpha = (c_abs / n as f64) / (w_abs / n as f64);
                    for i in 0..n {
                        r[l][i] -= alpha * z * c[i];
                    }
                    combined[k] += lambda(k, l) * z;
                }
            }
            weights_out = w;
        }
    }
    for k in 0..k_count {
        decisions[k] = if combined[k] < 0.0 { -1 } else { 1 };
    }
    Ok(OracleOutput { order, decisions, combined, weights: weights_out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::walsh_codes;

    #[test]
    fn closed_form_values() {
        assert!((su_mrc_ber(f64::NEG_INFINITY, 2) - 0.5).abs() < 1e-15);
        assert!((su_mrc_ber(f64::NEG_INFINITY, 1) - 0.5).abs() < 1e-15);
        let l1 = su_mrc_ber(0.0, 1);
        assert!((l1 - 0.5 * (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert!((l1 - 0.1464).abs() < 1e-4);
        // gamma_c = 50: p = (1 - sqrt(50/51))/2, BER = p^2 (1 + 2(1-p))
        let p = 0.5 * (1.0 - (50.0f64 / 51.0).sqrt());
        let expect = p * p * (1.0 + 2.0 * (1.0 - p));
        let got = su_mrc_ber(20.0, 2);
        assert!((got - expect).abs() < 1e-18);
        assert!((got - 7.2e-5).abs() / 7.2e-5 < 0.02);
        assert!((got - 6.75e-5).abs() / 6.75e-5 < 0.25);
    }

    #[test]
    fn closed_form_is_monotone() {
        for l in 1..6 {
            let mut prev = 1.0;
            for i in 0..60 {
                let b = su_mrc_ber(-10.0 + i as f64 * 0.5, l);
                assert!(b < prev);
                prev = b;
            }
        }
        for i in 0..40 {
            let e = i as f64;
            for l in 1..6 {
                assert!(su_mrc_ber(e, l + 1) < su_mrc_ber(e, l));
            }
        }
    }

    #[test]
    fn query_closed_form() {
        let q = DiversityBerQuery { ebn0_db: 10.0, branches: 2, combiner: CombinerKind::Mrc };
        assert_eq!(q.closed_form(), Some(su_mrc_ber(10.0, 2)));
        let q = DiversityBerQuery { combiner: CombinerKind::Egc, ..q };
        assert_eq!(q.closed_form(), None);
    }

    #[test]
    fn oracle_walsh_pair_is_exact() {
        let w = walsh_codes(4).unwrap();
        let codes = vec![w[1].clone(), w[3].clone()];
        for bits in [[1i8, 1], [1, -1], [-1, 1], [-1, -1]] {
            for rx in [OracleReceiver::Mf, OracleReceiver::Csic, OracleReceiver::Asic { mu: 1e-3, gamma: 1.0, weights: None }] {
                let out = brute_force_multiuser(
                    &bits,
                    &codes,
                    &[1.0, 2.0],
                    &[vec![1.0, 0.5], vec![0.7, 1.2]],
                    None,
                    &rx,
                    CombinerKind::Egc,
                )
                .unwrap();
                assert_eq!(out.decisions, bits.to_vec());
            }
        }
    }

    #[test]
    fn oracle_rejects_large_instances() {
        let w = walsh_codes(16).unwrap();
        let codes = vec![w[1].clone()];
        let err = brute_force_multiuser(&[1], &codes, &[1.0], &[vec![1.0]], None, &OracleReceiver::Mf, CombinerKind::Egc);
        assert!(matches!(err, Err(Error::InstanceTooLarge(_))));
        let w = walsh_codes(4).unwrap();
        let codes: Vec<_> = (0..4).chain(0..1).map(|i| w[i].clone()).collect();
        let err = brute_force_multiuser(&[1; 5], &codes, &[1.0; 5], &vec![vec![1.0]; 5], None, &OracleReceiver::Mf, CombinerKind::Egc);
        assert!(err.is_err());
    }

    #[test]
    fn oracle_single_user_is_mf() {
        let w = walsh_codes(8).unwrap();
        let codes = vec![w[5].clone()];
        let noise = vec![vec![0.1, -0.3, 0.2, 0.0, 0.05, -0.1, 0.3, -0.2]; 2];
        let a = brute_force_multiuser(&[-1], &codes, &[1.0], &[vec![0.2, 0.9]], Some(&noise), &OracleReceiver::Mf, CombinerKind::Mrc).unwrap();
        let b = brute_force_multiuser(&[-1], &codes, &[1.0], &[vec![0.2, 0.9]], Some(&noise), &OracleReceiver::Csic, CombinerKind::Mrc).unwrap();
        assert_eq!(a.decisions, b.decisions);
        assert_eq!(a.combined, b.combined);
    }
}
