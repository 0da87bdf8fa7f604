//! Spreading sequences: binary m-sequences from a Fibonacci LFSR, the Gold
//! family built from a preferred pair, and a small Walsh set for toy cases.
//!
//! Binary chips map to antipodal values as `0 -> +1/sqrt(N)`, `1 -> -1/sqrt(N)`,
//! so every code has unit energy over one symbol.

use crate::error::{Error, Result};

/// `x^5 + x^2 + 1`, bit `i` holds the coefficient of `x^i`.
pub const POLY_X5_X2_1: u32 = 0b10_0101;
/// `x^5 + x^4 + x^3 + x^2 + 1`.
pub const POLY_X5_X4_X3_X2_1: u32 = 0b11_1101;
/// Preferred pair used for the default length-31 family.
pub const DEFAULT_PREFERRED_PAIR: (u32, u32) = (POLY_X5_X2_1, POLY_X5_X4_X3_X2_1);

/// A unit-energy antipodal spreading code.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingCode {
    chips: Vec<f64>,
    family_index: usize,
}

impl SpreadingCode {
    /// Builds a code from binary chips using the `0 -> +, 1 -> -` mapping.
    pub fn from_bits(bits: &[u8], family_index: usize) -> Self {
        let amp = 1.0 / (bits.len() as f64).sqrt();
        let chips = bits
            .iter()
            .map(|&b| if b & 1 == 0 { amp } else { -amp })
            .collect();
        Self { chips, family_index }
    }

    /// Builds a code from `±1` signs, normalizing to unit energy.
    pub fn from_signs(signs: &[i8], family_index: usize) -> Self {
        let amp = 1.0 / (signs.len() as f64).sqrt();
        let chips = signs.iter().map(|&s| if s >= 0 { amp } else { -amp }).collect();
        Self { chips, family_index }
    }

    pub fn chips(&self) -> &[f64] {
        &self.chips
    }

    /// Spreading factor.
    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn family_index(&self) -> usize {
        self.family_index
    }

    pub fn energy(&self) -> f64 {
        self.chips.iter().map(|c| c * c).sum()
    }
}

/// Degree of a polynomial mask (index of the highest set bit).
fn degree(poly: u32) -> u32 {
    31 - poly.leading_zeros()
}

/// Generates one period of the m-sequence with characteristic polynomial
/// `poly`, starting from `seed_state` (bit `j` is the `j`-th output bit).
///
/// The recurrence is `s[n+d] = sum_{i<d} c_i s[n+i] (mod 2)`. The output is
/// checked to have full period `2^d - 1`.
pub fn generate_mseq(poly: u32, seed_state: u32) -> Result<Vec<u8>> {
    if poly < 0b10 || poly & 1 == 0 {
        return Err(Error::NotPrimitive { poly, period: 0, expected: 0 });
    }
    let d = degree(poly);
    let mask = (1u32 << d) - 1;
    let period_expected = mask as usize;
    let seed = seed_state & mask;
    if seed == 0 {
        return Err(Error::DegenerateLfsrState);
    }
    let taps = poly & mask;

    let mut state = seed;
    let mut out = Vec::with_capacity(period_expected);
    let mut period = 0;
    loop {
        out.push((state & 1) as u8);
        let feedback = (state & taps).count_ones() & 1;
        state = (state >> 1) | (feedback << (d - 1));
        period += 1;
        if state == seed || period > period_expected {
            break;
        }
    }
    if period != period_expected {
        return Err(Error::NotPrimitive { poly, period, expected: period_expected });
    }
    Ok(out)
}

/// Unnormalized periodic correlation of two binary sequences in antipodal
/// form: `sum_n (-1)^(a[n] xor b[(n+shift) mod N])`.
pub fn binary_correlation(a: &[u8], b: &[u8], shift: usize) -> i32 {
    let n = a.len();
    (0..n)
        .map(|i| if a[i] ^ b[(i + shift) % n] == 0 { 1 } else { -1 })
        .sum()
}

/// Periodic cross-correlation `sum_n a(n) b((n+shift) mod N)`.
pub fn cross_correlation(a: &SpreadingCode, b: &SpreadingCode, shift: usize) -> Result<f64> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: b.len() });
    }
    Ok((0..n).map(|i| a.chips[i] * b.chips[(i + shift) % n]).sum())
}

/// A Gold code family: the `N` sequences `u xor T^i v`, `i = 0..N`, followed
/// by the two m-sequences `u` and `v` of the preferred pair.
///
/// With this order the first `N + 1` members have zero-shift
/// cross-correlation exactly `-1/N` with each other; only `v` takes the
/// larger Gold values at zero shift.
#[derive(Debug, Clone)]
pub struct GoldFamily {
    codes: Vec<SpreadingCode>,
    bits: Vec<Vec<u8>>,
    preferred_pair: (u32, u32),
}

impl GoldFamily {
    pub fn codes(&self) -> &[SpreadingCode] {
        &self.codes
    }

    /// Binary form of each member, in family order.
    pub fn bits(&self) -> &[Vec<u8>] {
        &self.bits
    }

    pub fn preferred_pair(&self) -> (u32, u32) {
        self.preferred_pair
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Spreading factor of every member.
    pub fn spreading_factor(&self) -> usize {
        self.codes[0].len()
    }

    /// Codes for `k` users: user `i` gets family member `i`.
    pub fn assign(&self, k: usize) -> Result<Vec<SpreadingCode>> {
        if k > self.codes.len() {
            return Err(Error::FamilyTooSmall { requested: k, available: self.codes.len() });
        }
        Ok(self.codes[..k].to_vec())
    }

    /// Bound `t(d) = 2^floor((d+2)/2) + 1` on the Gold cross-correlation.
    fn correlation_values(d: u32) -> [i32; 3] {
        let t = (1i32 << ((d + 2) / 2)) + 1;
        [-t, -1, t - 2]
    }
}

/// Builds the Gold family of a preferred pair and verifies its three-valued
/// cross-correlation over every pair of members and every cyclic shift.
pub fn generate_gold_family(pair: (u32, u32)) -> Result<GoldFamily> {
    let (p1, p2) = pair;
    if degree(p1) != degree(p2) {
        return Err(Error::NotPreferredPair(p1, p2));
    }
    let u = generate_mseq(p1, 1)?;
    let v = generate_mseq(p2, 1)?;
    let n = u.len();

    let mut bits = Vec::with_capacity(n + 2);
    for shift in 0..n {
        bits.push((0..n).map(|i| u[i] ^ v[(i + shift) % n]).collect());
    }
    bits.push(u);
    bits.push(v);

    let allowed = GoldFamily::correlation_values(degree(p1));
    for a in 0..bits.len() {
        for b in (a + 1)..bits.len() {
            for shift in 0..n {
                let c = binary_correlation(&bits[a], &bits[b], shift);
                if !allowed.contains(&c) {
                    return Err(Error::NotPreferredPair(p1, p2));
                }
            }
        }
    }

    let codes = bits
        .iter()
        .enumerate()
        .map(|(i, b)| SpreadingCode::from_bits(b, i))
        .collect();
    Ok(GoldFamily { codes, bits, preferred_pair: pair })
}

/// The default length-31 family.
pub fn default_gold_family() -> GoldFamily {
    generate_gold_family(DEFAULT_PREFERRED_PAIR).expect("default preferred pair is valid")
}

/// Rows of the Sylvester Hadamard matrix of order `n` (a power of two) as
/// unit-energy codes. Row 0 is all `+`.
pub fn walsh_codes(n: usize) -> Result<Vec<SpreadingCode>> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("Walsh order {n} is not a power of two")));
    }
    Ok((0..n)
        .map(|row| {
            let signs: Vec<i8> = (0..n)
                .map(|col| if (row & col).count_ones() % 2 == 0 { 1 } else { -1 })
                .collect();
            SpreadingCode::from_signs(&signs, row)
        })
        .collect())
}
