//! `ringpair`: rates, sweeps, limits and verification for biphoton
//! generation in a lossy single-bus microring resonator.
//!
//! Exit codes: 0 success, 1 validation error, 2 invariant failure,
//! 3 numerical error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ringpair_core::biphoton::rate_record;
use ringpair_core::config::{parse_config, ParsedConfig};
use ringpair_core::error::Error;
use ringpair_core::highq::{limit_report, poles, regime_violations};
use ringpair_core::sweep::{emit_csv, emit_json, limit_dataset, run_sweep, Dataset};
use ringpair_core::transfer::Location;
use ringpair_core::verify::{run_verify, VerifyLevel};

#[derive(Parser)]
#[command(name = "ringpair", version, about = "Biphoton pair generation in a lossy microring resonator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print pair, singles, CAR and heralding rates at one detuning.
    Rates {
        #[arg(long)]
        config: PathBuf,
        /// Angular detuning ω from the carrier (overrides detuning.theta).
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Run the configured parameter sweep and write the dataset.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run the randomized invariant suite.
    Verify {
        /// 1000 configurations plus convergence studies (default: 100).
        #[arg(long)]
        full: bool,
    },
    /// Run the high-Q convergence study and write the error table.
    Limits {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Echo the derived parameters of a configuration.
    Info {
        #[arg(long)]
        config: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Validation(_) | Error::Parse { .. } => 1,
        Error::Invariant(_) => 2,
        Error::Pole(_) | Error::Numerical(_) => 3,
    }
}

fn load_config(path: &PathBuf) -> Result<ParsedConfig, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::validation(format!("cannot read {}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    for warning in &cfg.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(cfg)
}

fn write_dataset(dataset: &Dataset, out: &PathBuf, format: Format) -> Result<(), Error> {
    let bytes = match format {
        Format::Csv => emit_csv(dataset),
        Format::Json => emit_json(dataset),
    };
    fs::write(out, bytes)
        .map_err(|e| Error::validation(format!("cannot write {}: {e}", out.display())))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Rates { config, omega } => {
            let cfg = load_config(&config)?;
            let system = cfg.scenario.system()?;
            for warning in system.warnings() {
                eprintln!("warning: {warning}");
            }
            let omega = match omega {
                Some(w) => w,
                None => cfg.scenario.omega()?,
            };
            println!("detuning: omega = {omega:.6e}  (theta_a = {:.6e})", system.signal.theta(omega));
            for (name, location) in [("output bus", Location::OutputBus), ("intracavity", Location::Intracavity)] {
                let record = rate_record(&system, omega, location)?;
                println!("[{name}]");
                println!("  pair_rate  = {:.10e}", record.pair_rate);
                println!("  singles_a  = {:.10e}", record.singles_a);
                println!("  singles_b  = {:.10e}", record.singles_b);
                println!("  car        = {:.10e}", record.car);
                println!("  herald     = {:.10e}", record.herald);
                println!(
                    "  populations p0 = {:.10e}, p1a = {:.10e}, p1b = {:.10e}, p2 = {:.10e}",
                    record.p0, record.p1a, record.p1b, record.p2
                );
            }
            Ok(())
        }
        Command::Sweep { config, out, format } => {
            let cfg = load_config(&config)?;
            let dataset = run_sweep(&cfg)?;
            write_dataset(&dataset, &out, format)?;
            let flagged = dataset
                .flags
                .iter()
                .filter(|f| **f == ringpair_core::sweep::RowFlag::Pole)
                .count();
            if flagged > 0 {
                eprintln!("warning: {flagged} grid point(s) flagged as poles");
            }
            println!(
                "wrote {} rows to {} (config-hash {})",
                dataset.rows.len(),
                out.display(),
                dataset.config_hash
            );
            Ok(())
        }
        Command::Verify { full } => {
            let level = if full { VerifyLevel::Full } else { VerifyLevel::Fast };
            let report = run_verify(level)?;
            println!("{report}");
            if report.all_passed() {
                Ok(())
            } else {
                Err(Error::Invariant("verify found failing invariants".into()))
            }
        }
        Command::Limits { config, out, format } => {
            let cfg = load_config(&config)?;
            let study = cfg.limits.clone().ok_or_else(|| {
                Error::validation("configuration has no limits.* section")
            })?;
            let report = limit_report(&study)?;
            let dataset = limit_dataset(&report, &cfg.echo);
            write_dataset(&dataset, &out, format)?;
            for (name, order) in &report.orders {
                match order {
                    Some(o) => println!("fitted order {name:<10} = {o:.3}"),
                    None => println!("fitted order {name:<10} = exact (zero error)"),
                }
            }
            println!("wrote {} rows to {}", dataset.rows.len(), out.display());
            Ok(())
        }
        Command::Info { config } => {
            let cfg = load_config(&config)?;
            let system = cfg.scenario.system()?;
            println!("process: {}", system.pump.process.as_str());
            for mode in [&system.signal, &system.idler, &system.pump_mode] {
                println!(
                    "{:<6}  T = {:.6e}  gamma = {:.6e}  gamma' = {:.6e}  rho = {:.12}  tau = {:.12}  alpha = {:.12}  FSR = {:.6e}",
                    mode.label.as_str(),
                    mode.round_trip_time,
                    mode.coupling_rate,
                    mode.internal_rate,
                    mode.rho,
                    mode.tau,
                    mode.alpha,
                    std::f64::consts::TAU / mode.round_trip_time,
                );
            }
            let p = system.pump_parameters();
            println!(
                "pump:   g = {:.6e}  |alpha_p| = {:.6e}  theta_p = {:.6e}",
                system.pump.gain, system.pump.amplitude, system.pump.phase
            );
            println!(
                "        r_a = {:.6e} + {:.6e}i  (|r_a| = {:.6e})",
                p.r_a.re, p.r_a.im, p.r_a.norm()
            );
            println!(
                "        r_b = {:.6e} + {:.6e}i  (|r_b| = {:.6e})",
                p.r_b.re, p.r_b.im, p.r_b.norm()
            );
            println!("        |r_ab|^2 = {:.6e}", system.r_ab_squared());
            let pole_set = poles(&system);
            println!(
                "poles:  s+ = {:.6e}  s- = {:.6e}  pi+ = {:.6e}  pi- = {:.6e}",
                pole_set.s_plus, pole_set.s_minus, pole_set.pi_plus, pole_set.pi_minus
            );
            let omega = cfg.scenario.omega().unwrap_or(0.0);
            for warning in system
                .warnings()
                .into_iter()
                .chain(regime_violations(&system, omega))
            {
                println!("note:   {warning}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
