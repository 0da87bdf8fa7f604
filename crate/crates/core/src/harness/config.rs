//! Scenario configuration and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! base = fig4               # optional: start from a preset
//! name = my-run
//! K = [8, 16, 20]           # any sweep key takes a scalar or a [list]
//! ebn0_db = 20
//! rho = [0, 0.8]
//! mu = rule                 # or a number / list; rule = mu_base / Omega
//! receivers = [MF, CSIC, ASIC]
//! combiners = [EGC, MRC]
//! measured_users = all      # or weakest
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::receivers::{CombinerKind, ReceiverKind};

/// Step-size setting.
#[derive(Debug, Clone, PartialEq)]
pub enum MuSetting {
    /// `mu_base / Omega` with `Omega` the linear near-far ratio.
    Rule,
    Values(Vec<f64>),
}

/// Which users' errors are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasuredUsers {
    All,
    /// The desired user (user 0), which is the weakest in near-far runs.
    Weakest,
}

impl fmt::Display for MeasuredUsers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasuredUsers::All => "all",
            MeasuredUsers::Weakest => "weakest",
        })
    }
}

impl FromStr for MeasuredUsers {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(MeasuredUsers::All),
            "weakest" => Ok(MeasuredUsers::Weakest),
            other => Err(Error::Config(format!("unknown measured_users '{other}'"))),
        }
    }
}

/// A full experiment description: fixed settings plus sweep lists.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub users: Vec<usize>,
    pub subcarriers: usize,
    pub spreading: usize,
    pub receivers: Vec<ReceiverKind>,
    pub combiners: Vec<CombinerKind>,
    pub ebn0_db: Vec<f64>,
    pub rho: Vec<f64>,
    pub mu: MuSetting,
    pub mu_base: f64,
    pub omega_db: Vec<f64>,
    pub fd_tb: f64,
    pub oscillators: usize,
    pub gamma: f64,
    /// Cap on counted symbol periods per point.
    pub max_symbols: u64,
    pub target_errors: u64,
    /// Counted symbol periods per trial (after warm-up).
    pub trial_symbols: u64,
    /// Symbols at the start of each trial excluded from error counts.
    pub warmup: u64,
    pub seed: u64,
    pub measured_users: MeasuredUsers,
    /// Divergence faults tolerated before the run reports failure.
    pub max_faults: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            users: vec![20],
            subcarriers: 2,
            spreading: 31,
            receivers: vec![ReceiverKind::Mf, ReceiverKind::Csic, ReceiverKind::Asic],
            combiners: vec![CombinerKind::Egc, CombinerKind::Mrc],
            ebn0_db: vec![20.0],
            rho: vec![0.0],
            mu: MuSetting::Rule,
            mu_base: 1e-4,
            omega_db: vec![0.0],
            fd_tb: 0.003,
            oscillators: 64,
            gamma: 1.0,
            max_symbols: 5_000_000,
            target_errors: 200,
            trial_symbols: 20_000,
            warmup: 500,
            seed: 1,
            measured_users: MeasuredUsers::All,
            max_faults: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.users.is_empty() || self.users.contains(&0) {
            return fail("K must be a non-empty list of positive integers".into());
        }
        if self.subcarriers == 0 {
            return fail("L must be at least 1".into());
        }
        let family = crate::harness::family_for(self.spreading)?;
        if let Some(&k) = self.users.iter().find(|&&k| k > family.len()) {
            return fail(format!("K = {k} exceeds the code family size {}", family.len()));
        }
        if self.receivers.is_empty() || self.combiners.is_empty() {
            return fail("need at least one receiver and one combiner".into());
        }
        if self.ebn0_db.is_empty() || self.ebn0_db.iter().any(|x| !x.is_finite()) {
            return fail("ebn0_db must be a non-empty list of finite values".into());
        }
        if self.rho.is_empty() || self.rho.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return fail("rho values must lie in [0, 1]".into());
        }
        if self.omega_db.is_empty() || self.omega_db.iter().any(|&o| !(o >= 0.0)) {
            return fail("omega_db values must be >= 0".into());
        }
        match &self.mu {
            MuSetting::Values(v) if v.is_empty() || v.iter().any(|&m| !(m > 0.0)) => {
                return fail("mu values must be positive".into())
            }
            _ => {}
        }
        if !(self.mu_base > 0.0) {
            return fail("mu_base must be positive".into());
        }
        if !(self.fd_tb > 0.0) || self.oscillators == 0 {
            return fail("fd_tb must be positive and oscillators >= 1".into());
        }
        if self.trial_symbols == 0 {
            return fail("trial_symbols must be positive".into());
        }
        if self.max_symbols == 0 {
            return fail("max_symbols must be positive".into());
        }
        Ok(())
    }

    /// Parses the `key = value` format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            pairs.push((key.trim().to_string(), value.trim().to_string(), lineno + 1));
        }

        let mut cfg = match pairs.iter().find(|(k, _, _)| k == "base") {
            Some((_, v, _)) => crate::harness::preset(v)?,
            None => ScenarioConfig::default(),
        };
        for (key, value, line) in &pairs {
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {line}: {m}")),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "base" => {}
            "name" | "scenario" => self.name = value.to_string(),
            "K" | "k" | "users" => self.users = parse_list(value)?,
            "L" | "subcarriers" => self.subcarriers = parse_scalar(value)?,
            "N" | "spreading" => self.spreading = parse_scalar(value)?,
            "receivers" | "receiver" => self.receivers = parse_list(value)?,
            "combiners" | "combiner" => self.combiners = parse_list(value)?,
            "ebn0_db" => self.ebn0_db = parse_list(value)?,
            "rho" => self.rho = parse_list(value)?,
            "mu" => {
                self.mu = if value.trim().eq_ignore_ascii_case("rule") {
                    MuSetting::Rule
                } else {
                    MuSetting::Values(parse_list(value)?)
                }
            }
            "mu_base" => self.mu_base = parse_scalar(value)?,
            "omega_db" | "nearfar_omega_db" => self.omega_db = parse_list(value)?,
            "fd_tb" | "fD_Tb" => self.fd_tb = parse_scalar(value)?,
            "oscillators" => self.oscillators = parse_scalar(value)?,
            "gamma" => self.gamma = parse_scalar(value)?,
            "max_symbols" => self.max_symbols = parse_scalar(value)?,
            "target_errors" => self.target_errors = parse_scalar(value)?,
            "trial_symbols" => self.trial_symbols = parse_scalar(value)?,
            "warmup" => self.warmup = parse_scalar(value)?,
            "seed" => self.seed = parse_scalar(value)?,
            "measured_users" => self.measured_users = value.parse()?,
            "max_faults" => self.max_faults = parse_scalar(value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Renders the config back into the file format.
    pub fn to_text(&self) -> String {
        fn list<T: fmt::Display>(v: &[T]) -> String {
            let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("[{}]", items.join(", "))
        }
        let mu = match &self.mu {
            MuSetting::Rule => "rule".to_string(),
            MuSetting::Values(v) => list(v),
        };
        format!(
            "name = {}\nK = {}\nL = {}\nN = {}\nreceivers = {}\ncombiners = {}\nebn0_db = {}\nrho = {}\nmu = {}\n\
             mu_base = {}\nomega_db = {}\nfd_tb = {}\noscillators = {}\ngamma = {}\nmax_symbols = {}\n\
             target_errors = {}\ntrial_symbols = {}\nwarmup = {}\nseed = {}\nmeasured_users = {}\nmax_faults = {}\n",
            self.name,
            list(&self.users),
            self.subcarriers,
            self.spreading,
            list(&self.receivers),
            list(&self.combiners),
            list(&self.ebn0_db),
            list(&self.rho),
            mu,
            self.mu_base,
            list(&self.omega_db),
            self.fd_tb,
            self.oscillators,
            self.gamma,
            self.max_symbols,
            self.target_errors,
            self.trial_symbols,
            self.warmup,
            self.seed,
            self.measured_users,
            self.max_faults,
        )
    }
}

fn parse_scalar<T: FromStr>(value: &str) -> Result<T> {
    let v = value.trim();
    v.replace('_', "")
        .parse::<T>()
        .or_else(|_| v.parse::<T>())
        .map_err(|_| Error::Config(format!("cannot parse '{v}'")))
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>> {
    let v = value.trim();
    let inner = match (v.strip_prefix('['), v.ends_with(']')) {
        (Some(rest), true) => &rest[..rest.len() - 1],
        (None, false) => return Ok(vec![parse_scalar(v)?]),
        _ => return Err(Error::Config(format!("unbalanced brackets in '{v}'"))),
    };
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_scalar)
        .collect()
}
