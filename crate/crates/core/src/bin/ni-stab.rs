use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ni_stab::cli::{cmd_check, cmd_demo, cmd_sweep, cmd_synth, load_plant, report::render, CliError, PlantFormat};
use ni_stab::{Config, GridSpec, Tolerances};

/// Strictly negative imaginary state feedback with a prescribed degree of stability.
#[derive(Parser)]
#[command(name = "ni-stab", version)]
struct Cli {
    /// Plant file format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(flatten)]
    grid: GridArgs,

    #[command(flatten)]
    tol: TolArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Plain,
}

#[derive(Subcommand)]
enum Command {
    /// Check the assumptions and report the zero dynamics and the bound on ε.
    Check { file: PathBuf },
    /// Synthesize a gain for one degree of stability.
    Synth {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
    },
    /// Synthesize over a linear grid of ε and emit a CSV table.
    Sweep {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        eps_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        eps_max: f64,
        #[arg(long)]
        steps: usize,
        /// Write the CSV here instead of after the report on stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in three-state example.
    Demo,
}

#[derive(Args)]
struct GridArgs {
    /// Lowest verification frequency (rad/s).
    #[arg(long, global = true, default_value_t = GridSpec::default().omega_min)]
    omega_min: f64,
    /// Highest verification frequency (rad/s).
    #[arg(long, global = true, default_value_t = GridSpec::default().omega_max)]
    omega_max: f64,
    /// Number of log-spaced verification frequencies.
    #[arg(long, global = true, default_value_t = GridSpec::default().points)]
    omega_points: usize,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long, global = true, default_value_t = Tolerances::default().split)]
    tol_split: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().eig)]
    tol_eig: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().assumption)]
    tol_assumption: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().rank)]
    tol_rank: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().psd)]
    tol_psd: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().pd)]
    tol_pd: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().sni)]
    tol_sni: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().pole)]
    tol_pole: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().are)]
    tol_are: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().distinct)]
    tol_distinct: f64,
}

fn config(cli: &Cli) -> Result<Config, CliError> {
    let t = &cli.tol;
    let tol = Tolerances {
        split: t.tol_split,
        eig: t.tol_eig,
        assumption: t.tol_assumption,
        rank: t.tol_rank,
        psd: t.tol_psd,
        pd: t.tol_pd,
        sni: t.tol_sni,
        pole: t.tol_pole,
        are: t.tol_are,
        distinct: t.tol_distinct,
    };
    let values = [
        tol.split, tol.eig, tol.assumption, tol.rank, tol.psd, tol.pd, tol.sni, tol.pole, tol.are, tol.distinct,
    ];
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(CliError::Argument("tolerances must be finite and nonnegative".into()));
    }
    let g = &cli.grid;
    if !(g.omega_min > 0.0 && g.omega_min < g.omega_max && g.omega_max.is_finite() && g.omega_points >= 1) {
        return Err(CliError::Argument(
            "need 0 < --omega-min < --omega-max and --omega-points >= 1".into(),
        ));
    }
    Ok(Config {
        tol,
        grid: GridSpec {
            omega_min: g.omega_min,
            omega_max: g.omega_max,
            points: g.omega_points,
        },
    })
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let config = config(cli)?;
    let format = match cli.format {
        Format::Json => PlantFormat::Json,
        Format::Plain => PlantFormat::Plain,
    };
    Ok(match &cli.command {
        Command::Check { file } => render(&cmd_check(&load_plant(file, format)?, &config)),
        Command::Synth { file, eps } => render(&cmd_synth(&load_plant(file, format)?, *eps, &config)?),
        Command::Sweep {
            file,
            eps_min,
            eps_max,
            steps,
            out,
        } => {
            let result = cmd_sweep(&load_plant(file, format)?, *eps_min, *eps_max, *steps, &config)?;
            let mut text = render(&result.report);
            match out {
                Some(path) => std::fs::write(path, &result.csv).map_err(|e| CliError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?,
                None => {
                    text.push_str("--- csv ---\n");
                    text.push_str(&result.csv);
                }
            }
            text
        }
        Command::Demo => render(&cmd_demo(&config)),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ni-stab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
