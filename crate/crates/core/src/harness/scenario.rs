//! Experiment presets, sweep expansion and the CSV result table.

use std::fmt::Write as _;

use super::config::{MeasuredUsers, MuSetting, ScenarioConfig};
use super::engine::{run_point, PointSpec};
use super::power::step_size_rule;
use super::stats::BerEstimate;
use crate::error::{Error, Result};
use crate::receivers::{CombinerKind, ReceiverKind};

pub const PRESET_NAMES: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

/// Built-in experiment families.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    use CombinerKind::*;
    use ReceiverKind::*;
    let base = ScenarioConfig { name: name.to_string(), ..ScenarioConfig::default() };
    let cfg = match name {
        // BER against Eb/N0 at K = 20
        "fig3" => ScenarioConfig { users: vec![20], ebn0_db: vec![0.0, 5.0, 10.0, 15.0, 20.0], ..base },
        // user capacity at 20 dB
        "fig4" => ScenarioConfig { users: vec![4, 8, 12, 16, 20, 24, 28], ..base },
        // near-far 10 dB, weakest user, K sweep
        "fig5" => ScenarioConfig {
            users: vec![4, 8, 12, 16, 20, 24],
            combiners: vec![Mrc],
            omega_db: vec![10.0],
            measured_users: MeasuredUsers::Weakest,
            ..base
        },
        // near-far sweep at K = 20
        "fig6" => ScenarioConfig {
            combiners: vec![Mrc],
            omega_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            measured_users: MeasuredUsers::Weakest,
            ..base
        },
        // step size sweep
        "fig7" => ScenarioConfig {
            users: vec![10, 16, 20, 24],
            receivers: vec![Asic],
            combiners: vec![Mrc],
            mu: MuSetting::Values(vec![1e-5, 3e-5, 1e-4, 3e-4, 6e-4, 1e-3, 1.3e-3, 2e-3, 3e-3]),
            ..base
        },
        // subcarrier correlation
        "fig8" => ScenarioConfig {
            users: vec![10, 20],
            combiners: vec![Mrc],
            rho: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            ..base
        },
        other => return Err(Error::Config(format!("unknown preset '{other}'"))),
    };
    Ok(cfg)
}

/// One sweep point of a scenario, before simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub users: usize,
    pub ebn0_db: f64,
    pub rho: f64,
    pub omega_db: f64,
    pub mu: f64,
}

/// Expands the sweep lists in the fixed order K, Eb/N0, rho, Omega, mu.
pub fn expand_grid(cfg: &ScenarioConfig) -> Result<Vec<GridPoint>> {
    let mut points = Vec::new();
    for &users in &cfg.users {
        for &ebn0_db in &cfg.ebn0_db {
            for &rho in &cfg.rho {
                for &omega_db in &cfg.omega_db {
                    let mus = match &cfg.mu {
                        MuSetting::Rule => vec![step_size_rule(cfg.mu_base, omega_db, None)?],
                        MuSetting::Values(v) => {
                            v.iter().map(|&m| step_size_rule(cfg.mu_base, omega_db, Some(m))).collect::<Result<_>>()?
                        }
                    };
                    for mu in mus {
                        points.push(GridPoint { users, ebn0_db, rho, omega_db, mu });
                    }
                }
            }
        }
    }
    Ok(points)
}

impl ScenarioConfig {
    /// Engine input for one grid point.
    pub fn point_spec(&self, p: &GridPoint) -> PointSpec {
        let variants = self
            .receivers
            .iter()
            .flat_map(|&r| self.combiners.iter().map(move |&c| (r, c)))
            .collect();
        PointSpec {
            users: p.users,
            subcarriers: self.subcarriers,
            ebn0_db: p.ebn0_db,
            rho: p.rho,
            mu: p.mu,
            omega_db: p.omega_db,
            fd_tb: self.fd_tb,
            oscillators: self.oscillators,
            gamma: self.gamma,
            max_symbols: self.max_symbols,
            target_errors: self.target_errors,
            trial_symbols: self.trial_symbols,
            warmup: self.warmup,
            seed: self.seed,
            measured: self.measured_users,
            variants,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub receiver: ReceiverKind,
    pub combiner: CombinerKind,
    pub users: usize,
    pub ebn0_db: f64,
    pub rho: f64,
    pub mu: f64,
    pub omega_db: f64,
    pub user_group: MeasuredUsers,
    pub estimate: BerEstimate,
    pub faults: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

pub const CSV_HEADER: &str =
    "scenario,receiver,combiner,K,ebn0_db,rho,mu,omega_db,user_group,errors,symbols,ber,ci95,faults";

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{:.6e},{:.6e},{}",
                r.scenario,
                r.receiver,
                r.combiner,
                r.users,
                r.ebn0_db,
                r.rho,
                r.mu,
                r.omega_db,
                r.user_group,
                r.estimate.errors,
                r.estimate.symbols,
                r.estimate.ber,
                r.estimate.ci95_halfwidth,
                r.faults
            );
        }
        s
    }

    pub fn total_faults(&self) -> u64 {
        self.rows.iter().map(|r| r.faults).sum()
    }

    /// First row matching the filter.
    pub fn find(&self, pred: impl Fn(&ResultRow) -> bool) -> Option<&ResultRow> {
        self.rows.iter().find(|r| pred(r))
    }
}

/// Runs every grid point of `cfg` on `workers` threads. `progress` is called
/// after each point with `(done, total)`.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    workers: usize,
    mut progress: impl FnMut(usize, usize),
) -> Result<ResultTable> {
    cfg.validate()?;
    let family = super::family_for(cfg.spreading)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let grid = expand_grid(cfg)?;
    let mut table = ResultTable::default();
    for (i, p) in grid.iter().enumerate() {
        let spec = cfg.point_spec(p);
        let result = run_point(&spec, family.codes(), &pool)?;
        for v in result.variants {
            table.rows.push(ResultRow {
                scenario: cfg.name.clone(),
                receiver: v.receiver,
                combiner: v.combiner,
                users: p.users,
                ebn0_db: p.ebn0_db,
                rho: p.rho,
                mu: p.mu,
                omega_db: p.omega_db,
                user_group: cfg.measured_users,
                estimate: v.estimate,
                faults: v.faults,
            });
        }
        progress(i + 1, grid.len());
    }
    Ok(table)
}

/// Companion note for plotting the CSV with an external tool.
pub fn plot_hint(cfg: &ScenarioConfig) -> String {
    let x = if cfg.users.len() > 1 {
        "K"
    } else if cfg.ebn0_db.len() > 1 {
        "ebn0_db"
    } else if cfg.rho.len() > 1 {
        "rho"
    } else if cfg.omega_db.len() > 1 {
        "omega_db"
    } else {
        "mu"
    };
    format!(
        "# plot: x = {x}, y = ber (log scale), error bars = ci95, one series per (receiver, combiner[, K])\n"
    )
}
