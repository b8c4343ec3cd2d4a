use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use decmhd::diagnostics::DiagnosticsRecord;
use decmhd::io::{parse_config, read_snapshot, run, RunConfig};
use decmhd::{Error, Result};

/// Structure-preserving 2D incompressible ideal MHD simulator.
#[derive(Parser)]
#[command(name = "decmhd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Validate a config file and print the resolved configuration.
    Check {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the conserved quantities of a snapshot.
    Diag { snapshot: PathBuf },
}

#[derive(clap::Args)]
struct Overrides {
    /// Write outputs here instead of the configured directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Reject unknown config keys.
    #[arg(long)]
    strict: bool,
    /// Newton residual tolerance.
    #[arg(long)]
    newton_tol: Option<f64>,
    /// Stop after at most this many steps.
    #[arg(long)]
    max_steps: Option<usize>,
}

fn load(path: &PathBuf, o: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let (mut cfg, warnings) = parse_config(&text, o.strict)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if let Some(d) = &o.output_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(tol) = o.newton_tol {
        cfg.newton.tol = tol;
        cfg.newton.validate()?;
    }
    if let Some(n) = o.max_steps {
        if n < 1 {
            return Err(Error::ConfigValue {
                field: "--max-steps".into(),
                message: "max-steps must be at least 1".into(),
            });
        }
        cfg.n_steps = cfg.n_steps.min(n);
        cfg.t_end = cfg.n_steps as f64 * cfg.ht;
    }
    Ok(cfg)
}

fn print_record(r: &DiagnosticsRecord) {
    println!("t = {:?}", r.t);
    println!("e_kin = {:?}", r.e_kin);
    println!("e_mag = {:?}", r.e_mag);
    println!("e_total = {:?}", r.e_total);
    println!("cross_helicity = {:?}", r.cross_helicity);
    println!("magnetic_helicity = {:?}", r.magnetic_helicity);
    println!("div_v_max = {:?}", r.div_v_max);
    println!("div_b_max = {:?}", r.div_b_max);
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let sum = run(&cfg)?;
            let last = sum.records.last().unwrap_or(&sum.initial);
            let drift = (last.e_total - sum.initial.e_total) / sum.initial.e_total;
            eprintln!(
                "completed {} steps to t = {:?}; relative energy change {:e}; outputs in {}",
                last.step,
                last.t,
                drift,
                cfg.output_dir.display()
            );
        }
        Command::Check { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            print!("{}", cfg.to_config_text());
            println!("\n# {} steps", cfg.n_steps);
        }
        Command::Diag { snapshot } => {
            let s = read_snapshot(&snapshot)?;
            let g = s.grid();
            println!("grid = {}x{} on [{:?}, {:?}] x [{:?}, {:?}]", g.nx, g.ny, g.x0, g.x0 + g.lx, g.y0, g.y0 + g.ly);
            print_record(&DiagnosticsRecord::sample(0, &s, 0.0, None)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
