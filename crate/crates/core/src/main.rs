use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lzring::cli::{
    cmd_evolve, cmd_heatmap, cmd_sweep, cmd_validate, format_float, parse_config, RunConfig,
};
use lzring::sweep::Axis;
use lzring::Error;

/// Landau-Zener sweeps of coupled two-level rings.
#[derive(Parser)]
#[command(name = "lzring", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one sweep and write the population time series as CSV.
    Evolve(RunArgs),
    /// Evaluate FTPE over a (j1, j2, r) grid and write it as CSV.
    Sweep(RunArgs),
    /// Check the integrator against closed-form and factorization oracles.
    Validate {
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Render a sweep CSV as a binary PGM heatmap.
    Heatmap {
        /// Sweep CSV produced by `sweep`.
        input: PathBuf,
        #[arg(long, short = 'x')]
        x: Axis,
        #[arg(long, short = 'y')]
        y: Axis,
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
}

macro_rules! run_args {
    ($($field:ident),* $(,)?) => {
        #[derive(Args)]
        struct RunArgs {
            /// Flat `key = value` config file.
            #[arg(long)]
            config: Option<PathBuf>,
            $(
                #[arg(long = stringify!($field), allow_hyphen_values = true, value_name = "VALUE")]
                $field: Option<String>,
            )*
        }

        impl RunArgs {
            fn overrides(&self) -> Vec<(String, String)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push((stringify!($field).to_string(), v.clone()));
                    }
                )*
                out
            }
        }
    };
}

run_args!(
    output, threads, n_sites, g, j1, j2, r, t_start, t_end, dt, samples, init_mode, j1_min, j1_max,
    j1_steps, j2_min, j2_max, j2_steps, r_min, r_max, r_steps,
);

fn load(args: &RunArgs) -> Result<RunConfig, Error> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    parse_config(&text, &args.overrides())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Evolve(args) => {
            let ftpe = cmd_evolve(&load(&args)?)?;
            eprintln!("ftpe = {}", format_float(ftpe));
        }
        Command::Sweep(args) => {
            let rows = cmd_sweep(&load(&args)?)?;
            eprintln!("{} grid points", rows.len());
        }
        Command::Validate { threads } => {
            let report = cmd_validate(threads)?;
            print!("{}", report.render());
            if !report.passed() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Heatmap {
            input,
            x,
            y,
            output,
        } => cmd_heatmap(&input, x, y, &output)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
