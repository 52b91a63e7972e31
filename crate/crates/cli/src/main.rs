//! `noisy-metrology`: sweeps, presets and slope fits.
//!
//! Exit status: 0 when every record succeeded, 2 when some records failed,
//! 1 for invalid arguments or I/O errors.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noisy_metrology::bounds::ScalingFit;
use noisy_metrology::sweep::{fit_records, run_sweep, NGrid, SweepMethod, SweepSpec, TMode};

use crate::io::Format;

#[derive(Parser)]
#[command(name = "noisy-metrology", version, about = "Precision bounds and GHZ precision under directional dephasing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate methods on a log-spaced N grid.
    Sweep {
        #[command(flatten)]
        noise: NoiseArgs,
        /// Comma-separated: ghz, ce-finite, ce-asymptotic, sql, cs, asymptote.
        #[arg(long, value_delimiter = ',', default_value = "ghz,ce-finite")]
        methods: Vec<SweepMethod>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fit log-log slopes per method from a sweep output file.
    Fit {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = usize::MAX)]
        n_max: usize,
        /// Input format; inferred from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Transversal noise (α_x = 1): GHZ, finite-N CE bound and the N^{-5/6} asymptote.
    Fig3a {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tilted noise with α_x/α_z = 99: GHZ, finite-N CE bound and the √(2γε/N) asymptote.
    Fig3b {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Parallel admixture: α_x = 1 - ε, α_z = ε.
    #[arg(long, conflicts_with = "alphas")]
    epsilon: Option<f64>,
    /// Explicit α_x,α_y,α_z.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    alphas: Option<Vec<f64>>,
}

impl NoiseArgs {
    fn alphas(&self) -> [f64; 3] {
        match (&self.alphas, self.epsilon) {
            (Some(a), _) => [a[0], a[1], a[2]],
            (None, Some(eps)) => [1.0 - eps, 0.0, eps],
            (None, None) => [1.0, 0.0, 0.0],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TModeArg {
    Optimize,
    Fixed,
    SingleQubitOpt,
    Floor,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long, default_value_t = 1000)]
    n_max: usize,
    #[arg(long, default_value_t = 13)]
    n_count: usize,
    #[arg(long, value_enum, default_value = "optimize")]
    t_mode: TModeArg,
    /// Round duration for `--t-mode fixed`.
    #[arg(long)]
    t: Option<f64>,
    /// Lower limit on t for `--t-mode floor`.
    #[arg(long)]
    t_min: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn t_mode(&self) -> Result<TMode, String> {
        match self.t_mode {
            TModeArg::Optimize => Ok(TMode::Optimize),
            TModeArg::SingleQubitOpt => Ok(TMode::FixedSingleQubitOpt),
            TModeArg::Fixed => self.t.map(TMode::Fixed).ok_or_else(|| "--t-mode fixed needs --t".into()),
            TModeArg::Floor => self.t_min.map(TMode::Floor).ok_or_else(|| "--t-mode floor needs --t-min".into()),
        }
    }
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
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Sweep { noise, methods, run } => {
            let alphas = noise.alphas();
            sweep(noise.gamma, noise.omega, alphas, methods, run)
        }
        Command::Fig3a { gamma, omega, run } => {
            let methods = vec![SweepMethod::Ghz, SweepMethod::CeFinite, SweepMethod::Asymptote];
            sweep(gamma, omega, [1.0, 0.0, 0.0], methods, run)
        }
        Command::Fig3b { gamma, omega, run } => {
            let methods = vec![SweepMethod::Ghz, SweepMethod::CeFinite, SweepMethod::Asymptote];
            sweep(gamma, omega, [0.99, 0.0, 0.01], methods, run)
        }
        Command::Fit { input, n_min, n_max, format } => fit(&input, n_min, n_max, format),
    }
}

fn sweep(gamma: f64, omega: f64, alphas: [f64; 3], methods: Vec<SweepMethod>, run: RunArgs) -> Result<u8, String> {
    let spec = SweepSpec {
        omega,
        gamma,
        alphas,
        grid: NGrid::new(run.n_min, run.n_max, run.n_count),
        methods,
        t_mode: run.t_mode()?,
    };
    spec.validate().map_err(|e| e.to_string())?;
    let records = match run.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| e.to_string())?
            .install(|| run_sweep(&spec)),
        None => run_sweep(&spec),
    }
    .map_err(|e| e.to_string())?;

    io::write_records(&records, &spec, run.format, run.out.as_deref()).map_err(|e| e.to_string())?;
    let failed: Vec<_> = records.iter().filter(|r| !r.is_ok()).collect();
    for r in &failed {
        eprintln!("N={} {}: {}", r.n, r.method, r.error.as_deref().unwrap_or(""));
    }
    Ok(if failed.is_empty() { 0 } else { 2 })
}

fn fit(input: &std::path::Path, n_min: usize, n_max: usize, format: Option<Format>) -> Result<u8, String> {
    let format = format.or_else(|| Format::from_path(input)).unwrap_or(Format::Csv);
    let records = io::read_records(input, format).map_err(|e| e.to_string())?;
    if records.is_empty() {
        return Err(format!("no records in {}", input.display()));
    }
    let mut code = 0;
    for (method, result) in fit_records(&records, n_min, n_max) {
        match result {
            Ok(ScalingFit { slope, slope_stderr, points, .. }) => {
                println!("{method}\tslope {slope:.6} ± {slope_stderr:.2e}\t({points} points)");
            }
            Err(e) => {
                println!("{method}\t{e}");
                code = 2;
            }
        }
    }
    Ok(code)
}
