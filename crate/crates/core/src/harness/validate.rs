//! Quick property and oracle checks behind `mcsic validate`. None of them
//! runs a Monte Carlo BER estimate.

use std::f64::consts::PI;

use rand::Rng;

use super::config::ScenarioConfig;
use super::scenario::{preset, run_scenario};
use crate::analytic::{brute_force_multiuser, OracleReceiver};
use crate::channel::{add_awgn, bessel_j0, measure_fading, FadingSampling};
use crate::codes::{binary_correlation, generate_gold_family, walsh_codes, SpreadingCode, DEFAULT_PREFERRED_PAIR};
use crate::frame::{accumulate_users, ReceivedFrame};
use crate::receivers::{
    asic_stage, build_detector, cm_cost, cm_error, AsicReceiver, CombinerKind, CsicReceiver, DespreaderState,
    Detector, ReceiverKind, SymbolTrace,
};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed, detail: detail.into() }
    }
}

/// Every check, in a fixed order.
pub fn run_all() -> Vec<Check> {
    vec![
        gold_three_valued(),
        fading_statistics(),
        cma_gradient(2_000, 5),
        asic_fixed_point(),
        asic_zero_step_matches_csic(1_000, 6),
        oracle_agreement(10_000, 7),
        csv_repeatable(),
    ]
}

/// Exhaustive periodic cross-correlation of both supported Gold families,
/// recomputed here from the raw bits.
pub fn gold_three_valued() -> Check {
    let mut detail = String::new();
    let mut ok = true;
    for (pair, degree) in [(DEFAULT_PREFERRED_PAIR, 5u32), ((0b1011, 0b1101), 3)] {
        let fam = match generate_gold_family(pair) {
            Ok(f) => f,
            Err(e) => return Check::new("gold-three-valued", false, e.to_string()),
        };
        let n = fam.spreading_factor() as i32;
        let t = (1i32 << degree.div_ceil(2)) + 1;
        let allowed = [-1, -t, t - 2];
        let bits = fam.bits();
        let mut bad = 0usize;
        let mut pairs = 0usize;
        for i in 0..bits.len() {
            for j in i + 1..bits.len() {
                pairs += 1;
                for s in 0..n as usize {
                    if !allowed.contains(&binary_correlation(&bits[i], &bits[j], s)) {
                        bad += 1;
                    }
                }
            }
        }
        ok &= bad == 0;
        detail.push_str(&format!("N={n}: {pairs} pairs x {n} shifts, {bad} outside {allowed:?}; "));
    }
    Check::new("gold-three-valued", ok, detail.trim_end_matches("; "))
}

/// Autocorrelation against J0, cross-branch correlation against rho, unit
/// power, Rayleigh envelope and user independence.
pub fn fading_statistics() -> Check {
    let fd = 0.003;
    let plan = FadingSampling { realizations: 250, anchors: 1000, windows: 100, max_lag: 100 };
    let mut ok = true;
    let mut detail = String::new();
    for (i, &rho) in [0.0, 0.8].iter().enumerate() {
        let st = match measure_fading(fd, rho, plan, 100 + i as u64) {
            Ok(s) => s,
            Err(e) => return Check::new("fading-statistics", false, e.to_string()),
        };
        let acf_err = st
            .autocorr
            .iter()
            .enumerate()
            .map(|(d, a)| (a - bessel_j0(2.0 * PI * fd * (d + 1) as f64)).abs())
            .fold(0.0, f64::max);
        let ccf_err = st
            .cross
            .iter()
            .enumerate()
            .map(|(d, c)| (c - rho * bessel_j0(2.0 * PI * fd * d as f64)).abs())
            .fold(0.0, f64::max);
        let p_err = st.power.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
        let user_bound = 3.0 / (st.samples as f64).sqrt();
        let pass = acf_err < 0.02
            && (st.cross[0] - rho).abs() < 0.02
            && ccf_err < 0.03
            && p_err <= 0.01
            && st.ks < 0.005
            && st.user_cross < user_bound;
        ok &= pass;
        detail.push_str(&format!(
            "rho={rho}: acf err {acf_err:.4}, rho0 {:.4}, lagged err {ccf_err:.4}, power err {p_err:.4}, KS {:.4}, users {:.4}; ",
            st.cross[0], st.ks, st.user_cross
        ));
    }
    Check::new("fading-statistics", ok, detail.trim_end_matches("; "))
}

/// CMA update direction against central differences of the cost
/// `(z^2 - gamma)^2 / 4` on random inputs.
pub fn cma_gradient(cases: usize, seed: u64) -> Check {
    let mut rng = stream(seed, 0, Purpose::Misc);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(2..=31);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gamma = rng.gen_range(0.5..2.0);
        let z: f64 = w.iter().zip(&r).map(|(a, b)| a * b).sum();
        let e = cm_error(z, gamma);
        let h = 1e-5;
        for i in 0..n {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[i] += h;
            wm[i] -= h;
            let zp: f64 = wp.iter().zip(&r).map(|(a, b)| a * b).sum();
            let zm: f64 = wm.iter().zip(&r).map(|(a, b)| a * b).sum();
            let fd = 0.25 * (cm_cost(zp, gamma) - cm_cost(zm, gamma)) / (2.0 * h);
            let g = e * r[i];
            let rel = (fd - g).abs() / g.abs().max(1e-3);
            worst = worst.max(rel);
        }
    }
    Check::new("cma-gradient", worst < 1e-6, format!("{cases} cases, worst relative error {worst:.2e}"))
}

/// With `w = c / (sqrt(P/L) g)` the stage output is the bit, the scaling
/// factor is the branch amplitude and the residual vanishes.
pub fn asic_fixed_point() -> Check {
    let fam = super::family_for(31).expect("default family");
    let mut worst = 0.0f64;
    for (k, gains) in [(0usize, [0.8, 1.9]), (9, [1.3, 0.2]), (32, [0.05, 2.5])] {
        let code = &fam.codes()[k];
        for power in [1.0, 7.5] {
            for bit in [1i8, -1] {
                let a = (power / 2.0f64).sqrt();
                let mut f = ReceivedFrame::zeros(2, 31, 0);
                accumulate_users(&mut f, std::slice::from_ref(code), &[power], &[bit], &gains).expect("shapes");
                let mut states: Vec<DespreaderState> = gains
                    .iter()
                    .map(|g| DespreaderState {
                        weights: code.chips().iter().map(|c| c / (a * g)).collect(),
                        mu: 1e-3,
                        gamma: 1.0,
                    })
                    .collect();
                let out = match asic_stage(&mut f, &mut states, code, 0) {
                    Ok(o) => o,
                    Err(e) => return Check::new("asic-fixed-point", false, e.to_string()),
                };
                for l in 0..2 {
                    worst = worst.max((out.z[l] - f64::from(bit)).abs());
                    worst = worst.max((out.alpha[l] - a * gains[l]).abs());
                }
                worst = worst.max(f.chips().iter().map(|x| x.abs()).fold(0.0, f64::max));
            }
        }
    }
    Check::new("asic-fixed-point", worst < 1e-10, format!("worst deviation {worst:.2e}"))
}

/// ASIC with zero step size against soft CSIC on noisy Gold frames.
pub fn asic_zero_step_matches_csic(symbols: usize, seed: u64) -> Check {
    let fam = super::family_for(31).expect("default family");
    let k = 12;
    let codes = &fam.codes()[..k];
    let mut mismatches = 0usize;
    for combiner in [CombinerKind::Egc, CombinerKind::Mrc] {
        let mut asic = AsicReceiver::new(combiner, codes, 2, 0.0, 1.0);
        let mut csic = CsicReceiver::new(combiner);
        let mut rng = stream(seed, 0, Purpose::Misc);
        for m in 0..symbols {
            let bits: Vec<i8> = (0..k).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            let gains: Vec<f64> = (0..2 * k).map(|_| rng.gen::<f64>() * 2.0).collect();
            let powers: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..10.0)).collect();
            let mut f = ReceivedFrame::zeros(2, 31, m);
            accumulate_users(&mut f, codes, &powers, &bits, &gains).expect("shapes");
            add_awgn(f.chips_mut(), 0.2, &mut rng);
            let (mut da, mut dc) = (vec![0i8; k], vec![0i8; k]);
            let ok = asic.detect(&f, codes, &gains, &mut da, None).is_ok()
                && csic.detect(&f, codes, &gains, &mut dc, None).is_ok();
            if !ok || da != dc {
                mismatches += 1;
            }
        }
    }
    Check::new(
        "asic-zero-step-equals-csic",
        mismatches == 0,
        format!("{} symbols, {mismatches} differing", 2 * symbols),
    )
}

/// Random instance for the brute-force oracle.
#[derive(Debug, Clone)]
pub struct OracleInstance {
    pub codes: Vec<SpreadingCode>,
    pub subcarriers: usize,
    pub bits: Vec<i8>,
    pub powers: Vec<f64>,
    /// `gains[k][l]`.
    pub gains: Vec<Vec<f64>>,
    /// `noise[l][n]`.
    pub noise: Vec<Vec<f64>>,
    pub receiver: ReceiverKind,
    pub combiner: CombinerKind,
    pub mu: f64,
    /// Starting ASIC weights `[k][l][n]`.
    pub weights: Vec<Vec<Vec<f64>>>,
}

impl OracleInstance {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let pool: Vec<SpreadingCode> = match rng.gen_range(0..3) {
            0 => generate_gold_family((0b1011, 0b1101)).expect("N=7 family").codes().to_vec(),
            1 => walsh_codes(8).expect("walsh"),
            _ => walsh_codes(4).expect("walsh"),
        };
        let k = rng.gen_range(1..=pool.len().min(4));
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        for i in 0..k {
            let j = rng.gen_range(i..idx.len());
            idx.swap(i, j);
        }
        let codes: Vec<SpreadingCode> = idx[..k].iter().map(|&i| pool[i].clone()).collect();
        let n = codes[0].len();
        let l = rng.gen_range(1..=3);
        let receiver = [ReceiverKind::Mf, ReceiverKind::Csic, ReceiverKind::Asic][rng.gen_range(0..3)];
        let combiner = if rng.gen::<bool>() { CombinerKind::Mrc } else { CombinerKind::Egc };
        let noise_sigma = if rng.gen::<bool>() { rng.gen_range(0.0..0.5) } else { 0.0 };
        let weights = codes
            .iter()
            .map(|c| {
                (0..l)
                    .map(|_| c.chips().iter().map(|&x| x * rng.gen_range(0.5..1.5)).collect())
                    .collect()
            })
            .collect();
        Self {
            bits: (0..k).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect(),
            powers: (0..k).map(|_| rng.gen_range(0.1..10.0)).collect(),
            gains: (0..k).map(|_| (0..l).map(|_| rng.gen_range(0.01..2.5)).collect()).collect(),
            noise: (0..l).map(|_| (0..n).map(|_| noise_sigma * rng.gen_range(-1.0..1.0)).collect()).collect(),
            mu: rng.gen_range(0.0..0.05),
            codes,
            subcarriers: l,
            receiver,
            combiner,
            weights,
        }
    }

    /// Runs the production detector and the oracle; `Err` describes the
    /// first disagreement.
    pub fn compare(&self) -> std::result::Result<(), String> {
        let k = self.codes.len();
        let l = self.subcarriers;
        let n = self.codes[0].len();
        let flat_gains: Vec<f64> = self.gains.iter().flatten().copied().collect();
        let mut frame = ReceivedFrame::zeros(l, n, 0);
        accumulate_users(&mut frame, &self.codes, &self.powers, &self.bits, &flat_gains).map_err(|e| e.to_string())?;
        for (row, noise) in (0..l).zip(&self.noise) {
            for (x, e) in frame.row_mut(row).iter_mut().zip(noise) {
                *x += e;
            }
        }
        let mut det: Box<dyn Detector> = match self.receiver {
            ReceiverKind::Asic => {
                let mut a = AsicReceiver::new(self.combiner, &self.codes, l, self.mu, 1.0);
                for (s, w) in a.states_mut().iter_mut().zip(self.weights.iter().flatten()) {
                    s.weights.clone_from(w);
                }
                Box::new(a)
            }
            kind => build_detector(kind, self.combiner, &self.codes, l, self.mu, 1.0),
        };
        let oracle_rx = match self.receiver {
            ReceiverKind::Mf => OracleReceiver::Mf,
            ReceiverKind::Csic => OracleReceiver::Csic,
            ReceiverKind::Asic => OracleReceiver::Asic { mu: self.mu, gamma: 1.0, weights: Some(self.weights.clone()) },
        };
        let mut decisions = vec![0i8; k];
        let mut trace = SymbolTrace::default();
        det.detect(&frame, &self.codes, &flat_gains, &mut decisions, Some(&mut trace)).map_err(|e| e.to_string())?;
        let want = brute_force_multiuser(
            &self.bits,
            &self.codes,
            &self.powers,
            &self.gains,
            Some(&self.noise),
            &oracle_rx,
            self.combiner,
        )
        .map_err(|e| e.to_string())?;
        if self.receiver != ReceiverKind::Mf && trace.order != want.order {
            return Err(format!("order {:?} vs oracle {:?}", trace.order, want.order));
        }
        for st in &trace.stages {
            let u = st.user;
            if (st.combined - want.combined[u]).abs() > 1e-9 * (1.0 + want.combined[u].abs()) {
                return Err(format!("user {u}: combined {} vs oracle {}", st.combined, want.combined[u]));
            }
        }
        if decisions != want.decisions {
            return Err(format!("decisions {decisions:?} vs oracle {:?}", want.decisions));
        }
        Ok(())
    }
}

/// Production receivers against the brute-force oracle on random small
/// instances.
pub fn oracle_agreement(instances: usize, seed: u64) -> Check {
    let mut rng = stream(seed, 0, Purpose::Misc);
    let mut failures = 0usize;
    let mut first = String::new();
    for i in 0..instances {
        let inst = OracleInstance::random(&mut rng);
        if let Err(msg) = inst.compare() {
            if failures == 0 {
                first = format!("; first at instance {i} ({}/{}): {msg}", inst.receiver, inst.combiner);
            }
            failures += 1;
        }
    }
    Check::new("brute-force-oracle", failures == 0, format!("{instances} instances, {failures} disagreements{first}"))
}

/// Small scenario run twice with different worker counts.
pub fn csv_repeatable() -> Check {
    let cfg = ScenarioConfig {
        users: vec![6],
        ebn0_db: vec![10.0],
        max_symbols: 4_000,
        trial_symbols: 1_000,
        warmup: 100,
        target_errors: 0,
        seed: 42,
        ..preset("fig4").expect("preset")
    };
    let a = run_scenario(&cfg, 1, |_, _| {}).map(|t| t.to_csv());
    let b = run_scenario(&cfg, 3, |_, _| {}).map(|t| t.to_csv());
    match (a, b) {
        (Ok(a), Ok(b)) => Check::new("csv-byte-identical", a == b, format!("{} bytes, 1 vs 3 workers", a.len())),
        (Err(e), _) | (_, Err(e)) => Check::new("csv-byte-identical", false, e.to_string()),
    }
}
