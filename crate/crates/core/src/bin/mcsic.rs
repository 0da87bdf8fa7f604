use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mcsic::harness::{self, ScenarioConfig};
use mcsic::Error;

#[derive(Parser)]
#[command(name = "mcsic", about = "Multicarrier DS-CDMA receiver simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset scenario or a config file and write CSV.
    Run {
        #[arg(long, conflicts_with = "config")]
        scenario: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Override the per-point symbol cap.
        #[arg(long)]
        max_symbols: Option<u64>,
        /// Override the per-point error target.
        #[arg(long)]
        target_errors: Option<u64>,
        /// Write per-symbol stage traces of the first point's first trial.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        trace_symbols: usize,
        /// Write the first point's fading amplitudes (symbol, k, l, g).
        #[arg(long)]
        dump_fading: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        dump_symbols: usize,
        #[arg(long)]
        quiet: bool,
    },
    /// Run the property and oracle checks.
    Validate,
    /// List the built-in scenarios.
    ListScenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListScenarios => {
            for name in harness::PRESET_NAMES {
                let cfg = harness::preset(name).expect("preset exists");
                println!("{name}\n{}", indent(&cfg.to_text()));
            }
            ExitCode::SUCCESS
        }
        Command::Validate => {
            let start = std::time::Instant::now();
            let checks = harness::validate::run_all();
            let mut failed = 0;
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            println!("{} checks, {} failed, {:.1} s", checks.len(), failed, start.elapsed().as_secs_f64());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Run {
            scenario,
            config,
            seed,
            out,
            workers,
            max_symbols,
            target_errors,
            trace,
            trace_symbols,
            dump_fading,
            dump_symbols,
            quiet,
        } => {
            let cfg = match load_config(scenario, config, seed, max_symbols, target_errors) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match run(&cfg, workers, out, trace, trace_symbols, dump_fading, dump_symbols, quiet) {
                Ok(faults) if faults > cfg.max_faults => {
                    eprintln!("error: {faults} CMA divergence faults (threshold {})", cfg.max_faults);
                    ExitCode::from(3)
                }
                Ok(_) => ExitCode::SUCCESS,
                Err(Error::Config(m)) => {
                    eprintln!("error: {m}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("    {l}\n")).collect()
}

fn load_config(
    scenario: Option<String>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    max_symbols: Option<u64>,
    target_errors: Option<u64>,
) -> mcsic::Result<ScenarioConfig> {
    let mut cfg = match (scenario, config) {
        (Some(name), None) => harness::preset(&name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            ScenarioConfig::parse(&text)?
        }
        _ => return Err(Error::Config("pass exactly one of --scenario or --config".into())),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = max_symbols {
        cfg.max_symbols = m;
    }
    if let Some(t) = target_errors {
        cfg.target_errors = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[allow(clippy::too_many_arguments)]
fn run(
    cfg: &ScenarioConfig,
    workers: usize,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
    trace_symbols: usize,
    dump_fading: Option<PathBuf>,
    dump_symbols: usize,
    quiet: bool,
) -> mcsic::Result<u64> {
    let io_err = |p: &PathBuf, e: std::io::Error| Error::InvalidParameter(format!("{}: {e}", p.display()));
    let grid = harness::scenario::expand_grid(cfg)?;
    let first = cfg.point_spec(&grid[0]);
    let family = harness::family_for(cfg.spreading)?;

    if let Some(path) = &trace {
        let traces = harness::engine::trace_point(&first, family.codes(), trace_symbols)?;
        let mut s = String::from("receiver,combiner,symbol,stage,user,subcarrier,z,alpha,combined,decision,residual_energy\n");
        for (rx, comb, symbols) in traces {
            for t in symbols {
                for (stage, st) in t.stages.iter().enumerate() {
                    for (l, z) in st.z.iter().enumerate() {
                        let alpha = st.alpha.get(l).copied().unwrap_or(f64::NAN);
                        s.push_str(&format!(
                            "{rx},{comb},{},{stage},{},{l},{z},{alpha},{},{},{}\n",
                            t.symbol, st.user, st.combined, st.decision, st.residual_energy
                        ));
                    }
                }
            }
        }
        std::fs::write(path, s).map_err(|e| io_err(path, e))?;
    }
    if let Some(path) = &dump_fading {
        let rows = harness::engine::dump_fading(&first, dump_symbols)?;
        let mut s = String::from("symbol,k,l,g\n");
        for (m, k, l, g) in rows {
            s.push_str(&format!("{m},{k},{l},{g}\n"));
        }
        std::fs::write(path, s).map_err(|e| io_err(path, e))?;
    }

    let table = harness::run_scenario(cfg, workers, |done, total| {
        if !quiet {
            eprintln!("[{}] point {done}/{total}", cfg.name);
        }
    })?;
    let csv = table.to_csv();
    match &out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| io_err(path, e))?;
            let hint = path.with_extension("plot.txt");
            std::fs::write(&hint, harness::scenario::plot_hint(cfg)).map_err(|e| io_err(&hint, e))?;
        }
        None => print!("{csv}"),
    }
    Ok(table.total_faults())
}
