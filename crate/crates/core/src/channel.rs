//! Correlated flat Rayleigh fading per (user, subcarrier) and chip-rate AWGN.
//!
//! Each fading branch is a sum-of-sinusoids process with Jakes Doppler
//! spectrum. Arrival angles are equally spaced over a quarter circle with a
//! random offset per process and every oscillator gets a random phase; the
//! process is scaled to unit mean power. Subcarrier correlation is imposed per user by the
//! lower-triangular square root of the `L x L` correlation matrix applied to
//! independent branch processes. Users are independent of each other.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Zeroth-order Bessel function of the first kind.
///
/// Power series for `|x| <= 12`, Hankel asymptotic expansion above.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 12.0 {
        let q = -x * x / 4.0;
        let mut term: f64 = 1.0;
        let mut sum: f64 = 1.0;
        let mut k = 1.0;
        while term.abs() > 1e-17 * sum.abs().max(1e-300) || k < 4.0 {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
            if k > 200.0 {
                break;
            }
        }
        sum
    } else {
        // a_k = prod_{j=1..k} (-(2j-1)^2) / (k! 8^k)
        let chi = x - PI / 4.0;
        let mut p = 0.0;
        let mut q = 0.0;
        let mut a = 1.0;
        let mut xp = 1.0;
        let mut last = f64::INFINITY;
        for k in 0..60 {
            let t: f64 = a / xp;
            if t.abs() > last {
                break;
            }
            last = t.abs();
            match k % 4 {
                0 => p += t,
                1 => q -= t,
                2 => p -= t,
                _ => q += t,
            }
            let kk = (k + 1) as f64;
            a *= (2.0 * kk - 1.0).powi(2) / (kk * 8.0);
            xp *= x;
        }
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Zero-lag cross-branch correlation implied by a subcarrier spacing of
/// `df_over_dfc` coherence bandwidths: `1 / sqrt(1 + r^2)`.
pub fn convert_df_to_rho(df_over_dfc: f64) -> Result<f64> {
    if !(df_over_dfc >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "subcarrier spacing ratio must be non-negative, got {df_over_dfc}"
        )));
    }
    Ok(1.0 / (1.0 + df_over_dfc * df_over_dfc).sqrt())
}

/// Parameters of the fading process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    /// Doppler frequency times symbol period.
    pub fd_tb: f64,
    /// Zero-lag correlation between any two subcarriers of one user.
    pub rho: f64,
    pub subcarriers: usize,
    pub oscillators: usize,
}

impl FadingSpec {
    pub fn new(fd_tb: f64, rho: f64, subcarriers: usize) -> Self {
        Self { fd_tb, rho, subcarriers, oscillators: 64 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!("rho must lie in [0, 1], got {}", self.rho)));
        }
        if !(self.fd_tb > 0.0) || !self.fd_tb.is_finite() {
            return Err(Error::InvalidParameter(format!("fD*Tb must be positive, got {}", self.fd_tb)));
        }
        if self.subcarriers == 0 || self.oscillators == 0 {
            return Err(Error::InvalidParameter("subcarriers and oscillators must be >= 1".into()));
        }
        Ok(())
    }

    /// Lower-triangular factor `C` with `C C^T = R`, `R_ij = rho` off the
    /// diagonal. Row-major `L x L`.
    pub fn mixing_matrix(&self) -> Vec<f64> {
        let l = self.subcarriers;
        let mut c = vec![0.0; l * l];
        for i in 0..l {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { self.rho };
                let s: f64 = (0..j).map(|p| c[i * l + p] * c[j * l + p]).sum();
                if i == j {
                    c[i * l + i] = (target - s).max(0.0).sqrt();
                } else {
                    let d = c[j * l + j];
                    c[i * l + j] = if d > 1e-12 { (target - s) / d } else { 0.0 };
                }
            }
        }
        c
    }
}

/// One unit-power sum-of-sinusoids complex process, advanced one symbol at a
/// time by rotating each oscillator phasor. Arrival angles cover a quarter
/// circle with a random offset; in-phase and quadrature parts use the cosine
/// and sine Doppler shifts with independent phases, so no two oscillators of
/// one component share a frequency.
#[derive(Debug, Clone)]
struct SosProcess {
    omega: Vec<f64>,
    phase: Vec<f64>,
    rot: Vec<Complex64>,
    phasor: Vec<Complex64>,
    half: usize,
    scale: f64,
    m: u64,
}

/// Phasors are recomputed from scratch this often to stop rounding drift.
const RESYNC_INTERVAL: u64 = 1024;

impl SosProcess {
    fn new<R: Rng + ?Sized>(fd_tb: f64, oscillators: usize, rng: &mut R) -> Self {
        let half = (oscillators / 2).max(1);
        let n = half as f64;
        let theta: f64 = (rng.gen::<f64>() * 2.0 - 1.0) * PI;
        let mut omega = Vec::with_capacity(2 * half);
        for i in 0..half {
            let alpha = (2.0 * PI * (i + 1) as f64 - PI + theta) / (4.0 * n);
            omega.push(2.0 * PI * fd_tb * alpha.cos());
        }
        for i in 0..half {
            let alpha = (2.0 * PI * (i + 1) as f64 - PI + theta) / (4.0 * n);
            omega.push(2.0 * PI * fd_tb * alpha.sin());
        }
        let phase: Vec<f64> = (0..2 * half).map(|_| rng.gen::<f64>() * 2.0 * PI).collect();
        let rot = omega.iter().map(|&w| Complex64::from_polar(1.0, w)).collect();
        let phasor = phase.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        Self { omega, phase, rot, phasor, half, scale: 1.0 / n.sqrt(), m: 0 }
    }

    fn value(&self) -> Complex64 {
        let re: f64 = self.phasor[..self.half].iter().map(|p| p.re).sum();
        let im: f64 = self.phasor[self.half..].iter().map(|p| p.re).sum();
        Complex64::new(re, im) * self.scale
    }

    fn seek(&mut self, m: u64) {
        let t = m as f64;
        for ((p, &w), &ph) in self.phasor.iter_mut().zip(&self.omega).zip(&self.phase) {
            *p = Complex64::from_polar(1.0, w * t + ph);
        }
        self.m = m;
    }

    fn next(&mut self) -> Complex64 {
        if self.m.is_multiple_of(RESYNC_INTERVAL) && self.m > 0 {
            self.seek(self.m);
        }
        let h = self.value();
        for (p, r) in self.phasor.iter_mut().zip(&self.rot) {
            *p *= r;
        }
        self.m += 1;
        h
    }
}

/// Streaming generator of complex gains for `K` users on `L` subcarriers.
#[derive(Debug, Clone)]
pub struct FadingGenerator {
    users: usize,
    subcarriers: usize,
    mixing: Vec<f64>,
    processes: Vec<SosProcess>,
    raw: Vec<Complex64>,
}

impl FadingGenerator {
    pub fn new<R: Rng + ?Sized>(spec: &FadingSpec, users: usize, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        if users == 0 {
            return Err(Error::InvalidParameter("need at least one user".into()));
        }
        let l = spec.subcarriers;
        let processes = (0..users * l)
            .map(|_| SosProcess::new(spec.fd_tb, spec.oscillators, rng))
            .collect();
        Ok(Self {
            users,
            subcarriers: l,
            mixing: spec.mixing_matrix(),
            processes,
            raw: vec![Complex64::new(0.0, 0.0); l],
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// Jumps every process to symbol `m`; the next call returns symbol `m`.
    pub fn seek(&mut self, m: u64) {
        for p in &mut self.processes {
            p.seek(m);
        }
    }

    /// Advances one symbol and writes the complex gains, user-major
    /// (`out[k * L + l]`).
    pub fn next_complex(&mut self, out: &mut [Complex64]) {
        let l = self.subcarriers;
        assert_eq!(out.len(), self.users * l);
        for k in 0..self.users {
            for (j, raw) in self.raw.iter_mut().enumerate() {
                *raw = self.processes[k * l + j].next();
            }
            for i in 0..l {
                let row = &self.mixing[i * l..i * l + l];
                out[k * l + i] = row[..=i].iter().zip(&self.raw).map(|(&c, &h)| h * c).sum();
            }
        }
    }

    /// Advances one symbol and writes the amplitudes `g_{k,l}` only.
    pub fn next_gains(&mut self, scratch: &mut [Complex64], gains: &mut [f64]) {
        self.next_complex(scratch);
        for (g, h) in gains.iter_mut().zip(scratch.iter()) {
            *g = h.norm();
        }
    }
}

/// Fading amplitudes and phases for `K` users, `L` subcarriers, `M` symbols.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    users: usize,
    subcarriers: usize,
    symbols: usize,
    gains: Vec<f64>,
    phases: Vec<f64>,
}

impl ChannelRealization {
    fn index(&self, k: usize, l: usize, m: usize) -> usize {
        (k * self.subcarriers + l) * self.symbols + m
    }

    pub fn gain(&self, k: usize, l: usize, m: usize) -> f64 {
        self.gains[self.index(k, l, m)]
    }

    pub fn phase(&self, k: usize, l: usize, m: usize) -> f64 {
        self.phases[self.index(k, l, m)]
    }

    /// Complex gain `g exp(j phi)`.
    pub fn complex_gain(&self, k: usize, l: usize, m: usize) -> Complex64 {
        Complex64::from_polar(self.gain(k, l, m), self.phase(k, l, m))
    }

    /// Amplitude series of one (user, subcarrier) branch.
    pub fn branch_gains(&self, k: usize, l: usize) -> &[f64] {
        let start = self.index(k, l, 0);
        &self.gains[start..start + self.symbols]
    }

    /// `K x L` amplitude matrix at symbol `m`, user-major.
    pub fn gains_at(&self, m: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.users * self.subcarriers);
        for k in 0..self.users {
            for l in 0..self.subcarriers {
                out.push(self.gain(k, l, m));
            }
        }
        out
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }
}

/// Generates `M` symbols of correlated fading for `K` users.
pub fn generate_fading<R: Rng + ?Sized>(
    spec: &FadingSpec,
    users: usize,
    symbols: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if symbols == 0 {
        return Err(Error::InvalidParameter("need at least one symbol".into()));
    }
    let mut gen = FadingGenerator::new(spec, users, rng)?;
    let l = spec.subcarriers;
    let mut real = ChannelRealization {
        users,
        subcarriers: l,
        symbols,
        gains: vec![0.0; users * l * symbols],
        phases: vec![0.0; users * l * symbols],
    };
    let mut buf = vec![Complex64::new(0.0, 0.0); users * l];
    for m in 0..symbols {
        gen.next_complex(&mut buf);
        for k in 0..users {
            for li in 0..l {
                let idx = real.index(k, li, m);
                let h = buf[k * l + li];
                real.gains[idx] = h.norm();
                real.phases[idx] = h.arg();
            }
        }
    }
    Ok(real)
}

/// `L x N` matrix (row-major) of i.i.d. `N(0, sigma^2)` chips.
pub fn awgn_chips<R: Rng + ?Sized>(
    subcarriers: usize,
    chips: usize,
    sigma: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = vec![0.0; subcarriers * chips];
    add_awgn(&mut out, sigma, rng);
    out
}

/// Adds `N(0, sigma^2)` noise in place. Draws nothing when `sigma == 0`.
pub fn add_awgn<R: Rng + ?Sized>(buf: &mut [f64], sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    for x in buf.iter_mut() {
        let n: f64 = rng.sample(StandardNormal);
        *x += sigma * n;
    }
}

/// Sample statistics of the fading generator, used by the property checks.
///
/// The processes fade slowly, so consecutive symbols are far from
/// independent. Estimates are therefore pooled over many realizations, each
/// observed in short windows starting at random, widely spaced symbol
/// indices. Every realization has two users on two subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingStats {
    /// Mean `|h|^2` per branch `(k, l)`, user-major.
    pub power: Vec<f64>,
    /// Kolmogorov-Smirnov distance of all envelopes to `1 - exp(-x^2)`.
    pub ks: f64,
    /// `Re E[h(m + d) h*(m)]` for `d = 1..=max_lag`.
    pub autocorr: Vec<f64>,
    /// `Re E[h_0(m + d) h_1*(m)]` for `d = 0..=max_lag`.
    pub cross: Vec<f64>,
    /// `|E[h_{0,0} h_{1,0}*]|` between users.
    pub user_cross: f64,
    /// Samples per branch behind `power` and `user_cross`.
    pub samples: usize,
}

/// Sampling plan for [`measure_fading`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSampling {
    pub realizations: usize,
    /// Anchor times per realization for the marginal statistics.
    pub anchors: usize,
    /// Leading anchors per realization that also get a lag window.
    pub windows: usize,
    pub max_lag: usize,
}

pub fn measure_fading(fd_tb: f64, rho: f64, plan: FadingSampling, seed: u64) -> Result<FadingStats> {
    let spec = FadingSpec::new(fd_tb, rho, 2);
    if plan.realizations == 0 || plan.anchors == 0 || plan.windows > plan.anchors {
        return Err(Error::InvalidParameter("empty or inconsistent sampling plan".into()));
    }
    let lags = plan.max_lag;
    let mut power = vec![0.0; 4];
    let mut acf = vec![0.0; lags];
    let mut ccf = vec![0.0; lags + 1];
    let mut user_cross = Complex64::new(0.0, 0.0);
    let mut env = Vec::with_capacity(plan.realizations * plan.anchors * 4);
    let mut win = vec![[Complex64::new(0.0, 0.0); 4]; lags + 1];
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for r in 0..plan.realizations {
        let mut rng = crate::rng::stream(seed, r as u64, crate::rng::Purpose::Fading);
        let mut gen = FadingGenerator::new(&spec, 2, &mut rng)?;
        for a in 0..plan.anchors {
            gen.seek(rng.gen_range(0..1u64 << 24));
            let len = if a < plan.windows { lags + 1 } else { 1 };
            for w in win.iter_mut().take(len) {
                gen.next_complex(&mut out);
                *w = out;
            }
            let h0 = win[0];
            for (i, x) in h0.iter().enumerate() {
                power[i] += x.norm_sqr();
                env.push(x.norm());
            }
            user_cross += h0[0] * h0[2].conj();
            if len > 1 {
                for d in 0..=lags {
                    let h = win[d];
                    if d > 0 {
                        acf[d - 1] += (0..4).map(|i| (h[i] * h0[i].conj()).re).sum::<f64>() / 4.0;
                    }
                    ccf[d] += ((h[0] * h0[1].conj()).re + (h[2] * h0[3].conj()).re) / 2.0;
                }
            }
        }
    }
    let n = (plan.realizations * plan.anchors) as f64;
    let nw = (plan.realizations * plan.windows).max(1) as f64;
    power.iter_mut().for_each(|p| *p /= n);
    acf.iter_mut().for_each(|a| *a /= nw);
    ccf.iter_mut().for_each(|c| *c /= nw);
    env.sort_by(f64::total_cmp);
    let ne = env.len() as f64;
    let ks = env
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-x * x).exp();
            (f - i as f64 / ne).abs().max((f - (i + 1) as f64 / ne).abs())
        })
        .fold(0.0, f64::max);
    Ok(FadingStats { power, ks, autocorr: acf, cross: ccf, user_cross: (user_cross / n).norm(), samples: n as usize })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    /// Independent J0 oracle: trapezoid rule on (1/pi) int_0^pi cos(x sin t) dt,
    /// which converges geometrically for periodic integrands.
    fn j0_quadrature(x: f64) -> f64 {
        let n = 2000;
        let h = PI / n as f64;
        let mut s = 0.5 * (1.0 + (x * PI.sin()).cos());
        for i in 1..n {
            s += (x * (i as f64 * h).sin()).cos();
        }
        s * h / PI
    }

    #[test]
    fn j0_known_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-6);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-12);
    }

    #[test]
    fn j0_matches_quadrature_over_range() {
        let mut x = -50.0;
        while x <= 50.0 {
            let err = (bessel_j0(x) - j0_quadrature(x)).abs();
            assert!(err < 1e-7, "x={x} err={err}");
            x += 0.173;
        }
        // both sides of the series/asymptotic switch
        for &x in &[11.99, 12.0, 12.01] {
            assert!((bessel_j0(x) - j0_quadrature(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn rho_from_spacing() {
        assert_eq!(convert_df_to_rho(0.0).unwrap(), 1.0);
        assert!((convert_df_to_rho(1.0).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
        assert!(convert_df_to_rho(1e9).unwrap() < 1e-8);
        assert!(convert_df_to_rho(-0.1).is_err());
    }

    #[test]
    fn mixing_matrix_reproduces_correlation() {
        for &rho in &[0.0, 0.2, 0.8, 1.0] {
            let spec = FadingSpec { rho, ..FadingSpec::new(0.003, rho, 3) };
            let c = spec.mixing_matrix();
            for i in 0..3 {
                for j in 0..3 {
                    let r: f64 = (0..3).map(|p| c[i * 3 + p] * c[j * 3 + p]).sum();
                    let expect = if i == j { 1.0 } else { rho };
                    assert!((r - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn invalid_rho_is_rejected() {
        let mut rng = stream(1, 0, Purpose::Fading);
        let spec = FadingSpec::new(0.003, 1.2, 2);
        assert!(generate_fading(&spec, 1, 10, &mut rng).is_err());
        let spec = FadingSpec::new(0.003, -0.1, 2);
        assert!(generate_fading(&spec, 1, 10, &mut rng).is_err());
        let spec = FadingSpec::new(0.0, 0.5, 2);
        assert!(generate_fading(&spec, 1, 10, &mut rng).is_err());
    }

    #[test]
    fn gains_are_nonnegative_and_phases_consistent() {
        let mut rng = stream(3, 0, Purpose::Fading);
        let spec = FadingSpec::new(0.003, 0.5, 2);
        let real = generate_fading(&spec, 2, 2000, &mut rng).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                for m in 0..2000 {
                    assert!(real.gain(k, l, m) >= 0.0);
                    let h = real.complex_gain(k, l, m);
                    assert!((h.norm() - real.gain(k, l, m)).abs() < 1e-12);
                }
            }
        }
        assert_eq!(real.gains_at(5).len(), 4);
    }

    #[test]
    fn resync_does_not_jump() {
        // The direct and rotated phasor paths must agree at the resync point.
        let mut rng = stream(9, 0, Purpose::Fading);
        let mut p = SosProcess::new(0.003, 64, &mut rng);
        let mut prev = p.next();
        for _ in 1..3 * RESYNC_INTERVAL {
            let h = p.next();
            assert!((h - prev).norm() < 0.05);
            prev = h;
        }
        let m = (3 * RESYNC_INTERVAL) as f64;
        let mut fresh = p.clone();
        for (q, (&w, &ph)) in fresh.phasor.iter_mut().zip(p.omega.iter().zip(&p.phase)) {
            *q = Complex64::from_polar(1.0, w * m + ph);
        }
        let direct = fresh.value();
        assert!((p.next() - direct).norm() < 1e-9);
    }

    #[test]
    fn fading_statistics_match_the_model() {
        let fd = 0.003;
        for &rho in &[0.0, 0.8] {
            let plan = FadingSampling { realizations: 250, anchors: 1000, windows: 100, max_lag: 100 };
            let st = measure_fading(fd, rho, plan, 21).unwrap();
            assert_eq!(st.samples, 250_000);
            for &p in &st.power {
                assert!((0.99..=1.01).contains(&p), "power {p}");
            }
            assert!(st.ks < 0.005, "ks {}", st.ks);
            for (d, &a) in st.autocorr.iter().enumerate() {
                let j = bessel_j0(2.0 * PI * fd * (d + 1) as f64);
                assert!((a - j).abs() < 0.02, "lag {} {a} vs {j}", d + 1);
            }
            assert!((st.autocorr[0] - 0.999_91).abs() < 0.01);
            assert!((st.cross[0] - rho).abs() < 0.02, "rho {rho} got {}", st.cross[0]);
            for (d, &c) in st.cross.iter().enumerate() {
                let j = rho * bessel_j0(2.0 * PI * fd * d as f64);
                assert!((c - j).abs() < 0.03, "lag {d} {c} vs {j}");
            }
            assert!(st.user_cross < 3.0 / (st.samples as f64).sqrt(), "users {}", st.user_cross);
        }
    }

    #[test]
    fn awgn_shape_determinism_and_zero_sigma() {
        let mut a = stream(5, 1, Purpose::Noise);
        let mut b = stream(5, 1, Purpose::Noise);
        assert_eq!(awgn_chips(2, 31, 1.0, &mut a), awgn_chips(2, 31, 1.0, &mut b));
        let z = awgn_chips(2, 31, 0.0, &mut a);
        assert_eq!(z.len(), 62);
        assert!(z.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn awgn_unit_variance() {
        let mut rng = stream(11, 0, Purpose::Noise);
        let x = awgn_chips(1, 1_000_000, 1.0, &mut rng);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
        assert!((0.995..=1.005).contains(&var), "var={var}");
        assert!(mean.abs() < 0.005);
    }
}
