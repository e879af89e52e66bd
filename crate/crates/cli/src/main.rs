use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pce_hinf_cli::config::{Command, ModeArg};
use pce_hinf_cli::run::load_or_default;
use pce_hinf_cli::{run, CliError, RunConfig};

/// H∞ static output-feedback synthesis and analysis for plants with
/// polynomial dependence on random parameters.
#[derive(Debug, Parser)]
#[command(name = "pce-hinf", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    plant: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// PCE degree p.
    #[arg(long)]
    degree: Option<usize>,
    /// Robustness bound ρ², or the upper end of the search with --bisect.
    #[arg(long)]
    rho2: Option<f64>,
    /// Norm-distribution grid points per parameter.
    #[arg(long)]
    grid: Option<usize>,
    /// Monte Carlo sample count.
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Gain as rows separated by ';' and entries by ',' or spaces.
    #[arg(long, allow_hyphen_values = true)]
    gain: Option<String>,
    /// CSV gain matrix.
    #[arg(long)]
    gain_file: Option<PathBuf>,
    /// Initial state, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Search the smallest stabilizing ρ² in [0, rho2].
    #[arg(long)]
    bisect: bool,
}

fn numbers(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Usage(format!("{t:?} is not a number"))))
        .collect()
}

fn config(args: Args) -> Result<RunConfig, CliError> {
    let mut cfg = load_or_default(args.config.as_deref())?;
    cfg.command = Some(args.command);
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = args.$f { cfg.$f = v; })* };
    }
    set!(out, seed, degree, rho2, grid, mc, mode, restarts, t_end, dt);
    if args.plant.is_some() {
        cfg.plant = args.plant;
    }
    if let Some(g) = args.gain {
        cfg.gain = Some(g.split(';').map(numbers).collect::<Result<_, _>>()?);
        cfg.gain_file = None;
    }
    if let Some(f) = args.gain_file {
        cfg.gain_file = Some(f);
        cfg.gain = None;
    }
    if let Some(x) = args.x0 {
        cfg.x0 = Some(numbers(&x)?);
    }
    cfg.bisect |= args.bisect;
    Ok(cfg)
}

#[cfg(feature = "parallel")]
fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("PCE_HINF_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Usage(format!("PCE_HINF_THREADS={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn init_threads() -> Result<(), CliError> {
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = init_threads().and_then(|()| config(args)).and_then(|cfg| run(&cfg));
    match result {
        Ok(art) => {
            // Write errors on stdout are ignored.
            let mut out = std::io::stdout().lock();
            for line in &art.report {
                let _ = writeln!(out, "{line}");
            }
            for f in &art.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
