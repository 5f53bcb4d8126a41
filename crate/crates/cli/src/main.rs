use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use staircase::energy::SurfaceMode;
use staircase::scaling::Constructor;
use staircase_cli::{parse_constructor, run, Command, EpsGrid, ExperimentConfig, THREADS_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "staircase", version, about = "Staircase multi-well sets, branched microstructures and scaling checks")]
struct Cli {
    /// Write the resolved experiment config as TOML to this path.
    #[arg(long, global = true)]
    save_config: Option<PathBuf>,
    /// Write the artifact here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// branch2dTwoDir, branch2dOneDir, cylinder3d, cuboid3d or nestedSecondOrder.
    #[arg(long, value_parser = constructor)]
    construction: Constructor,
    #[arg(long, default_value = "2")]
    p: String,
    /// Single ε, or min:max:points for scans.
    #[arg(long)]
    eps: Option<EpsGrid>,
    /// Fixed stripe count instead of the ε rule.
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump a well family as JSON.
    Wells {
        #[arg(long)]
        signature: String,
    },
    /// Lamination segments of the hull as CSV.
    Hull {
        #[arg(long)]
        signature: String,
    },
    /// Classify the pair (A, B); literals are diag:a,b,.. or full:.. (row-major).
    Classify {
        #[arg(long = "A", allow_hyphen_values = true)]
        a: String,
        #[arg(long = "B", allow_hyphen_values = true)]
        b: String,
    },
    /// Sample a construction on a grid (CSV) or summarize it (JSON).
    Construct {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        format: Option<String>,
    },
    /// Energy breakdown of one construction.
    Energy {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_parser = parse_surface, default_value = "hessian-tv")]
        surface: SurfaceMode,
    },
    /// Fourier diagnostics of a construction or of a random phase of a family.
    Spectral {
        #[arg(long, value_parser = constructor)]
        construction: Option<Constructor>,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long)]
        eps: Option<EpsGrid>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        signature: Option<String>,
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        kappa: f64,
        #[arg(long, default_value_t = 4.0)]
        mu: f64,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        /// Seed for random phases; TOML integers cap it at 2⁶³ − 1.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
        seed: u64,
        /// json (report) or csv (mass buckets).
        #[arg(long)]
        format: Option<String>,
    },
    /// ε-scan with a log–log slope fit.
    Scan {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_parser = parse_surface, default_value = "hessian-tv")]
        surface: SurfaceMode,
    },
    /// Predicted exponents over every signature of length m.
    Exponents {
        #[arg(long)]
        m: usize,
        /// Comma-separated rationals, e.g. 2 or 1,3/2,2,3.
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long)]
        ell: Option<usize>,
        /// dirichlet, periodic or both.
        #[arg(long, default_value = "dirichlet")]
        bc: String,
    },
    /// Run an experiment from a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn constructor(s: &str) -> Result<Constructor, String> {
    parse_constructor(s).map_err(|e| e.to_string())
}

fn parse_surface(s: &str) -> Result<SurfaceMode, String> {
    match s {
        "hessian-tv" => Ok(SurfaceMode::HessianTv),
        "phase-perimeter" => Ok(SurfaceMode::PhasePerimeter),
        _ => Err(format!("unknown surface mode {s:?}; use hessian-tv or phase-perimeter")),
    }
}

fn with_field(mut c: ExperimentConfig, f: FieldArgs) -> ExperimentConfig {
    c.construction = Some(f.construction);
    c.p = f.p;
    c.eps = f.eps;
    c.n = f.n;
    c
}

fn config(cmd: Cmd) -> Result<ExperimentConfig> {
    let new = ExperimentConfig::new;
    Ok(match cmd {
        Cmd::Wells { signature } => ExperimentConfig { signature: Some(signature), ..new(Command::Wells) },
        Cmd::Hull { signature } => ExperimentConfig { signature: Some(signature), ..new(Command::Hull) },
        Cmd::Classify { a, b } => ExperimentConfig { a: Some(a), b: Some(b), ..new(Command::Classify) },
        Cmd::Construct { field, grid, format } => with_field(ExperimentConfig { grid, format, ..new(Command::Construct) }, field),
        Cmd::Energy { field, surface } => with_field(ExperimentConfig { surface, ..new(Command::Energy) }, field),
        Cmd::Scan { field, surface } => with_field(ExperimentConfig { surface, ..new(Command::Scan) }, field),
        Cmd::Spectral { construction, p, eps, n, signature, ell, level, kappa, mu, grid, seed, format } => ExperimentConfig {
            construction,
            p,
            eps,
            n,
            signature,
            ell,
            level,
            kappa,
            mu,
            grid,
            seed,
            format,
            ..new(Command::Spectral)
        },
        Cmd::Exponents { m, p, ell, bc } => ExperimentConfig { m: Some(m), p, ell, bc: Some(bc), ..new(Command::Exponents) },
        Cmd::Run { config } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", config.display()))?
        }
    })
}

fn threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main_inner() -> Result<()> {
    let cli = Cli::parse();
    threads()?;
    let mut cfg = config(cli.cmd)?;
    if cli.output.is_some() {
        cfg.output = cli.output;
    }
    if let Some(path) = &cli.save_config {
        std::fs::write(path, cfg.to_toml()?).with_context(|| format!("writing {}", path.display()))?;
    }
    let out = run(&cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
