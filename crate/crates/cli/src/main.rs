//! Batch front-end: parse a scenario, dispatch solvers and campaigns, emit
//! CSV tables, and run the validation suite.
//!
//! Exit status enumeration (fixed contract):
//!   0 — success; for `solve`, the allocation is feasible
//!   1 — validation failure (`validate` with at least one failing check)
//!   2 — infeasible allocation (`solve`)
//!   3 — configuration error (unreadable, unparsable, or invalid config)
//!   4 — usage error (bad flags or ranges)
//!   5 — I/O error writing an output file

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uavalloc_core::scenario::{watts_to_dbm, ScenarioConfig};
use uavalloc_core::schemes::{Regime, Scheme};
use uavalloc_core::sweep::{
    ablation_csv, ablation_row, run_montecarlo_rows, run_sweep, solve_scenario, sweep_csv,
    SweepError, SweepParam,
};
use uavalloc_core::validate::{self, ValidateOptions};

const EXIT_VALIDATION_FAILED: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CONFIG_ERROR: u8 = 3;
const EXIT_USAGE_ERROR: u8 = 4;
const EXIT_IO_ERROR: u8 = 5;

#[derive(Parser)]
#[command(
    name = "uavalloc",
    about = "Joint UAV/ground-user service allocation: NOMA and relaying, IBL and FBL",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario TOML; omitted means the built-in default scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured scheme (noma|relay).
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// Override the configured regime (ibl|fbl).
    #[arg(long, value_parser = parse_regime)]
    regime: Option<Regime>,
    /// Restrict phase blocklengths to integer symbol counts.
    #[arg(long)]
    integer_blocklengths: bool,
    /// Force the unit-fading (static channel) override.
    #[arg(long)]
    unit_fading: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured scenario once on its deterministic link budget.
    Solve(CommonArgs),
    /// Sweep one parameter and emit a CSV table.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Parameter to sweep: beta|gu_distance|frame_length|nu2|uav_ground_distance.
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Number of evaluated points (inclusive endpoints).
        #[arg(long)]
        steps: usize,
    },
    /// Relaying ablation: IBL-optimal, FBL-optimal, and FBL at the frozen
    /// IBL phase split. Optionally swept over frame_length or nu2.
    Ablate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Monte-Carlo campaign over fading realizations.
    Montecarlo {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the full invariant suite and print one status line per check.
    Validate {
        /// Deliberately corrupt one constant to prove failures are caught
        /// and named (harness self-test; expect a failing line).
        #[arg(long)]
        negative_control: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Keep clap's rendered message but our usage-error status.
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(EXIT_USAGE_ERROR),
            };
        }
    };
    match cli.command {
        Command::Solve(common) => cmd_solve(common),
        Command::Sweep { common, sweep, from, to, steps } => {
            cmd_sweep(common, &sweep, from, to, steps)
        }
        Command::Ablate { common, sweep, from, to, steps } => {
            cmd_ablate(common, sweep, from, to, steps)
        }
        Command::Montecarlo { common, trials, seed } => cmd_montecarlo(common, trials, seed),
        Command::Validate { negative_control } => cmd_validate(negative_control),
    }
}

fn load_config(common: &CommonArgs) -> Result<ScenarioConfig, ExitCode> {
    let mut cfg = match &common.config {
        Some(path) => match ScenarioConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return Err(ExitCode::from(EXIT_CONFIG_ERROR));
            }
        },
        None => ScenarioConfig::default(),
    };
    if let Some(s) = common.scheme {
        cfg.scheme = s;
    }
    if let Some(r) = common.regime {
        cfg.regime = r;
    }
    if common.integer_blocklengths {
        cfg.solver.integer_blocklengths = true;
    }
    if common.unit_fading {
        cfg.fading.unit = true;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("{e}");
        return Err(ExitCode::from(EXIT_CONFIG_ERROR));
    }
    Ok(cfg)
}

fn emit(common: &CommonArgs, csv: String) -> ExitCode {
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, csv) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_IO_ERROR);
            }
            ExitCode::SUCCESS
        }
        None => {
            print!("{csv}");
            ExitCode::SUCCESS
        }
    }
}

fn cmd_solve(common: CommonArgs) -> ExitCode {
    let cfg = match load_config(&common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let result = match solve_scenario(&cfg, cfg.scheme, cfg.regime) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };
    let result = match result {
        Ok(r) => r,
        Err(e) => {
            // Precondition failures (e.g. SIC ordering on a dead link) mean
            // this scenario admits no allocation.
            println!("infeasible: {e}");
            return ExitCode::from(EXIT_INFEASIBLE);
        }
    };

    println!("scheme  {}  regime {}  beta {}", result.scheme, result.regime, result.beta);
    println!("gu standalone mu0   {:14.6} bits/frame", result.mu0_bits);
    println!("gu guaranteed level {:14.6} bits/frame", result.gu_target_bits);
    if let Some(a) = result.allocation {
        let dbm = |w: f64| {
            if w > 0.0 {
                format!("{:9.4} dBm", watts_to_dbm(w))
            } else {
                "      off".to_string()
            }
        };
        println!("p1 {}   p2 {}", dbm(a.p1_w), dbm(a.p2_w));
        println!("m1 {:10.4} sym   m2 {:10.4} sym", a.m1, a.m2);
    }
    if let Some(t) = result.throughputs {
        println!("uav throughput      {:14.6} bits/frame", t.uav_bits);
        println!("gu  throughput      {:14.6} bits/frame", t.gu_bits);
    }
    if result.gu_over_delivery {
        println!("note: GU guarantee met with slack (minimal in-domain allocation)");
    }
    if result.m1_at_boundary {
        println!("note: phase split at the open boundary (supremum at one symbol)");
    }
    let ok = result.feasible && result.uav_bits() >= 0.0;
    println!("feasible            {}", ok);
    if let Some(reason) = result.infeasibility_reason {
        println!("reason              {reason}");
    }
    if common.out.is_some() {
        let row = run_sweep(&cfg, SweepParam::Beta, cfg.beta, cfg.beta, 1, Some((cfg.scheme, Some(cfg.regime))));
        match row {
            Ok(rows) => {
                let code = emit(&common, sweep_csv(&rows, cfg.frame_length, cfg.symbol_rate_hz));
                if code != ExitCode::SUCCESS {
                    return code;
                }
            }
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(EXIT_CONFIG_ERROR);
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INFEASIBLE)
    }
}

fn sweep_error_code(e: &SweepError) -> u8 {
    match e {
        SweepError::Usage(_) => EXIT_USAGE_ERROR,
        _ => EXIT_CONFIG_ERROR,
    }
}

fn restriction(common: &CommonArgs) -> Option<(Scheme, Option<Regime>)> {
    common.scheme.map(|s| (s, common.regime))
}

fn cmd_sweep(common: CommonArgs, sweep: &str, from: f64, to: f64, steps: usize) -> ExitCode {
    let cfg = match load_config(&common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let param: SweepParam = match sweep.parse() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE_ERROR);
        }
    };
    match run_sweep(&cfg, param, from, to, steps, restriction(&common)) {
        Ok(rows) => emit(&common, sweep_csv(&rows, cfg.frame_length, cfg.symbol_rate_hz)),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(sweep_error_code(&e))
        }
    }
}

fn cmd_ablate(
    common: CommonArgs,
    sweep: Option<String>,
    from: Option<f64>,
    to: Option<f64>,
    steps: Option<usize>,
) -> ExitCode {
    let cfg = match load_config(&common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let points: Vec<ScenarioConfig> = match (&sweep, from, to, steps) {
        (None, None, None, None) => vec![cfg.clone()],
        (Some(name), Some(a), Some(b), Some(n)) => {
            let param: SweepParam = match name.parse() {
                Ok(SweepParam::FrameLength) => SweepParam::FrameLength,
                Ok(SweepParam::Nu2) => SweepParam::Nu2,
                Ok(_) => {
                    eprintln!("usage error: ablate sweeps frame_length or nu2");
                    return ExitCode::from(EXIT_USAGE_ERROR);
                }
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_USAGE_ERROR);
                }
            };
            if n == 0 {
                eprintln!("usage error: sweep needs at least one step");
                return ExitCode::from(EXIT_USAGE_ERROR);
            }
            (0..n)
                .map(|i| {
                    let v = if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
                    param.apply(&cfg, v)
                })
                .collect()
        }
        _ => {
            eprintln!("usage error: --sweep requires --from, --to and --steps");
            return ExitCode::from(EXIT_USAGE_ERROR);
        }
    };
    let mut rows = Vec::with_capacity(points.len());
    for p in &points {
        match ablation_row(p) {
            Ok(r) => rows.push(r),
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(sweep_error_code(&e));
            }
        }
    }
    emit(&common, ablation_csv(&rows))
}

fn cmd_montecarlo(common: CommonArgs, trials: usize, seed: u64) -> ExitCode {
    let cfg = match load_config(&common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if trials == 0 {
        eprintln!("usage error: --trials must be at least 1");
        return ExitCode::from(EXIT_USAGE_ERROR);
    }
    match run_montecarlo_rows(&cfg, trials, seed, restriction(&common)) {
        Ok(rows) => emit(&common, sweep_csv(&rows, cfg.frame_length, cfg.symbol_rate_hz)),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(sweep_error_code(&e))
        }
    }
}

fn cmd_validate(negative_control: bool) -> ExitCode {
    let results = validate::run_all(&ValidateOptions { negative_control });
    let mut failed = 0;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:34}  {}", r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", results.len(), failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VALIDATION_FAILED)
    }
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse()
}
