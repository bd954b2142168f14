//! Command-line front end for the placement engine.
//!
//! Verbs: `gen` (build and snapshot a scenario), `solve` (full pipeline,
//! `--method lp|brute`), `sweep` (one solve per threshold), `export`
//! (re-emit views from a persisted run).
//!
//! All artifacts land in the directory named by `SKYPLACE_OUT_DIR`
//! (default `./artifacts`); everything else is controlled by the config
//! file. Exit codes: 0 = feasible, 2 = infeasible but reported, 1 = error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use skyplace_core::radio::{precompute_gain_tables, write_gain_tables_csv, write_sinr_csv, SinrAssembler};
use skyplace_core::scenario::runner::{
    self, threshold_ladder, ExportFormat, ExportKind,
};
use skyplace_core::scenario::{Scenario, ScenarioConfig, ScenarioError};
use skyplace_core::selection::SolveMethod;

const OUT_DIR_ENV: &str = "SKYPLACE_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "skyplace",
    version,
    about = "Simultaneous multi-UAV base-station placement under SINR and hover regulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Lp,
    Brute,
}

impl From<MethodArg> for SolveMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lp => SolveMethod::Lp,
            MethodArg::Brute => SolveMethod::Brute,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhatArg {
    Placement,
    Sinr,
    Sweep,
}

#[derive(Subcommand)]
enum Command {
    /// Build the seeded scenario and persist its snapshot.
    Gen {
        /// Scenario config file (flat key = value lines).
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the full placement pipeline at the configured threshold.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Relaxed selection program (lp) or exhaustive oracle (brute).
        #[arg(long, value_enum, default_value = "lp")]
        method: MethodArg,
        /// Also dump the SINR matrix and gain tables as CSV.
        #[arg(long)]
        dump_tables: bool,
    },
    /// Run one solve per threshold on an evenly spaced ladder.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        from_db: f64,
        #[arg(long)]
        to_db: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Re-emit a view from a persisted run directory.
    Export {
        /// Directory holding run.json / sweep_run.json.
        #[arg(long)]
        run: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long, value_enum)]
        what: WhatArg,
    },
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("artifacts"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, ScenarioError> {
    let dir = out_dir();
    match cli.command {
        Command::Gen { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let scenario = Scenario::build(&cfg)?;
            let files = runner::persist_scenario(&dir, &scenario)?;
            println!(
                "scenario {} built: {} regions, {} users, {} combinations",
                scenario.config_hash,
                scenario.regions.len(),
                scenario.users.len(),
                scenario.space.len()
            );
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            config,
            method,
            dump_tables,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let run = runner::run_solve(&cfg, method.into())?;
            let files = runner::persist_solve(&dir, &run)?;
            if dump_tables {
                dump_debug_tables(&cfg, &dir)?;
            }
            let a = &run.artifacts;
            println!(
                "method={} combination={} feasible={} relaxation_gap={} min_sinr_db={:.4}",
                a.placement.method,
                a.placement.combination,
                a.placement.feasible,
                a.placement.relaxation_gap,
                a.placement.min_sinr_db
            );
            println!(
                "feasible combinations: {} of {} (oracle best min-SINR {:.4} dB, threshold {} dB)",
                a.feasible_count, a.combination_count, a.oracle_best_min_sinr_db, a.gamma_th_db
            );
            for (i, p) in a.placement.positions.iter().enumerate() {
                println!("uav {i}: x={} y={} z={}", p.x, p.y, p.z);
            }
            println!(
                "timing: precompute {:.1} ms, sinr build {:.1} ms, oracle {:.1} ms, solve {:.1} ms",
                run.timing.precompute_ms,
                run.timing.sinr_build_ms,
                run.timing.oracle_ms,
                run.timing.solve_ms
            );
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(feasibility_code(a.placement.feasible))
        }
        Command::Sweep {
            config,
            from_db,
            to_db,
            steps,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let thresholds = threshold_ladder(from_db, to_db, steps);
            let run = runner::run_sweep(&cfg, &thresholds)?;
            let files = runner::persist_sweep(&dir, &run)?;
            let feasible = run.artifacts.rows.iter().filter(|r| r.feasible).count();
            println!(
                "sweep over {} thresholds ({} to {} dB): {} feasible",
                thresholds.len(),
                from_db,
                to_db,
                feasible
            );
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(feasibility_code(feasible == run.artifacts.rows.len()))
        }
        Command::Export { run, format, what } => {
            let format = match format {
                FormatArg::Csv => ExportFormat::Csv,
                FormatArg::Json => ExportFormat::Json,
            };
            let kind = match what {
                WhatArg::Placement => ExportKind::Placement,
                WhatArg::Sinr => ExportKind::Sinr,
                WhatArg::Sweep => ExportKind::Sweep,
            };
            let path = match kind {
                ExportKind::Placement => {
                    runner::export_placement(&dir, &runner::load_run(&run)?, format)?
                }
                ExportKind::Sinr => runner::export_sinr(&dir, &runner::load_run(&run)?, format)?,
                ExportKind::Sweep => runner::export_sweep(&dir, &runner::load_sweep(&run)?, format)?,
            };
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn feasibility_code(feasible: bool) -> ExitCode {
    if feasible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

/// Debug dump of the SINR matrix and gain tables for the given config.
fn dump_debug_tables(cfg: &ScenarioConfig, dir: &std::path::Path) -> Result<(), ScenarioError> {
    let scenario = Scenario::build(cfg)?;
    let tables = precompute_gain_tables(&scenario.link_env())?;
    let assembler = SinrAssembler::new(
        &tables,
        &scenario.assignment,
        &scenario.powers,
        scenario.noise.mw,
    );
    let s = assembler.build_matrix(&scenario.space);
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join("s_matrix.csv"))?;
    write_sinr_csv(&mut f, &s, cfg.seed, &scenario.config_hash)?;
    let mut f = std::fs::File::create(dir.join("gain_tables.csv"))?;
    write_gain_tables_csv(&mut f, &tables, cfg.seed, &scenario.config_hash)?;
    println!("wrote {}", dir.join("s_matrix.csv").display());
    println!("wrote {}", dir.join("gain_tables.csv").display());
    Ok(())
}
