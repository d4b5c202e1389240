//! Experiment runner for the cone Schrödinger library.
//!
//! Every run reads an optional TOML config, applies command-line overrides,
//! writes CSV tables and JSON summaries into the output directory, and ends
//! with a manifest echoing the resolved configuration.
//!
//! Exit status: 0 success, 1 the scientific check failed, 2 the numerics
//! failed, 3 bad configuration.

pub mod commands;
pub mod config;
pub mod datum;
pub mod output;

use clap::{Args, Parser, Subcommand};
use commands::Outcome;
use config::RunConfig;
use serde::Serialize;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCAN_FAILURE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Environment fallback for --threads.
pub const THREADS_ENV: &str = "CONE_SCHRODINGER_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] cone_schrodinger::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
            CliError::Core(e) => {
                if e.is_numerical() || matches!(e, cone_schrodinger::Error::Boundary(_)) {
                    EXIT_NUMERICAL
                } else {
                    EXIT_CONFIG
                }
            }
        }
    }

    /// The message without the category prefix.
    pub fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cone-schrodinger", version, about = "Schrödinger propagation and estimate scans on metric cones")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (falls back to CONE_SCHRODINGER_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of J_ν(r) with regime, method and a cross-check.
    BesselTable(BesselTableArgs),
    /// Involution, isometry, self-adjointness and diagonalization defects.
    HankelSelftest(SelftestArgs),
    /// Evolves the configured datum and records masses and profiles.
    Evolve(EvolveArgs),
    /// Dyadic scan of one localized estimate.
    ScanLocalized(ScanLocalizedArgs),
    /// Strichartz ratios over dyadic frequencies.
    ScanStrichartz(ScanStrichartzArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::BesselTable(_) => "bessel-table",
            Command::HankelSelftest(_) => "hankel-selftest",
            Command::Evolve(_) => "evolve",
            Command::ScanLocalized(_) => "scan-localized",
            Command::ScanStrichartz(_) => "scan-strichartz",
        }
    }
}

#[derive(Debug, Args)]
struct BesselTableArgs {
    /// Orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<f64>>,
    /// Arguments, comma separated.
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    /// Terms in the large-argument expansion.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long)]
    rho_max: Option<f64>,
    /// Dyadic frequency center of a Littlewood–Paley projection.
    #[arg(long)]
    localize: Option<f64>,
    /// Skip the profile table.
    #[arg(long)]
    no_snapshots: bool,
}

#[derive(Debug, Args)]
struct ScanLocalizedArgs {
    #[arg(long)]
    estimate: Option<String>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    band: Option<f64>,
    /// Spectrum truncation K.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    resolution: Option<f64>,
}

#[derive(Debug, Args)]
struct ScanStrichartzArgs {
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    nmin: Option<f64>,
    #[arg(long)]
    nmax: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    band_factor: Option<f64>,
    #[arg(long)]
    resolution: Option<f64>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn threads(flag: Option<usize>, cfg: &RunConfig) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a positive integer; got '{v}'")))?,
            Err(_) => cfg.threads.unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            }),
        },
    };
    if n == 0 {
        return Err(CliError::Config("thread count must be at least 1".into()));
    }
    Ok(n)
}

struct Resolved {
    cfg: RunConfig,
    out: PathBuf,
    threads: usize,
}

fn resolve(cli: &Cli) -> Result<Resolved, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.seed.map(Some));
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    cfg.out = Some(out.clone());
    let threads = threads(cli.threads, &cfg)?;
    cfg.threads = Some(threads);
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    Ok(Resolved { cfg, out, threads })
}

fn finish<P: Serialize>(
    name: &str,
    r: &Resolved,
    params: &P,
    outcome: Result<Outcome, CliError>,
) -> Result<bool, CliError> {
    let outcome = outcome?;
    let manifest_path = r.out.join(format!("{}_manifest.json", name.replace('-', "_")));
    let mut outputs: Vec<String> = outcome
        .outputs
        .iter()
        .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
        .collect();
    outputs.push(manifest_path.file_name().unwrap_or_default().to_string_lossy().into_owned());
    let manifest = output::Manifest {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        seed: r.cfg.seed,
        threads: r.threads,
        config: &r.cfg,
        params,
        outputs,
    };
    output::write_json(&manifest_path, &manifest)?;
    Ok(outcome.passed)
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let mut r = resolve(&cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(r.threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} threads: {e}", r.threads)))?;
    let out = r.out.clone();
    match cli.command {
        Command::BesselTable(a) => {
            let mut p: commands::BesselTableParams = r.cfg.experiment()?;
            set(&mut p.nu, a.nu);
            set(&mut p.r, a.r);
            set(&mut p.order, a.order);
            if a.method.is_some() {
                p.method = a.method;
            }
            set(&mut p.tolerance, a.tolerance);
            let res = pool.install(|| commands::bessel_table(&p, &out));
            finish("bessel-table", &r, &p, res)
        }
        Command::HankelSelftest(a) => {
            let mut p: commands::SelftestParams = r.cfg.experiment()?;
            set(&mut p.r_max, a.r_max);
            set(&mut p.count, a.count);
            set(&mut p.tolerance, a.tolerance);
            let res = pool.install(|| commands::hankel_selftest(&p, &out));
            finish("hankel-selftest", &r, &p, res)
        }
        Command::Evolve(a) => {
            let mut p: commands::EvolveParams = r.cfg.experiment()?;
            set(&mut p.times, a.times);
            set(&mut p.rho_max, a.rho_max);
            if a.localize.is_some() {
                p.localize = a.localize;
            }
            if a.no_snapshots {
                p.snapshots = false;
            }
            if r.cfg.datum.is_none() {
                r.cfg.datum = Some(commands::default_evolve_datum());
            }
            let res = pool.install(|| commands::evolve(&r.cfg, &p, &out));
            finish("evolve", &r, &p, res)
        }
        Command::ScanLocalized(a) => {
            let mut p: commands::ScanLocalizedParams = r.cfg.experiment()?;
            set(&mut p.estimate, a.estimate);
            set(&mut p.rmin, a.rmin);
            set(&mut p.rmax, a.rmax);
            set(&mut p.trials, a.trials);
            set(&mut p.generator, a.generator);
            set(&mut p.band, a.band);
            set(&mut r.cfg.cone.k, a.k);
            if a.p.is_some() {
                p.p = a.p;
            }
            set(&mut p.epsilon, a.epsilon);
            set(&mut p.resolution, a.resolution);
            let seed = r
                .cfg
                .seed
                .ok_or_else(|| CliError::Config("scan-localized draws random coefficients and needs --seed".into()))?;
            let res = pool.install(|| commands::scan_localized(&r.cfg, &p, seed, &out));
            finish("scan-localized", &r, &p, res)
        }
        Command::ScanStrichartz(a) => {
            let mut p: commands::ScanStrichartzParams = r.cfg.experiment()?;
            if a.q.is_some() {
                p.q = a.q;
            }
            set(&mut p.nmin, a.nmin);
            set(&mut p.nmax, a.nmax);
            set(&mut p.sigma, a.sigma);
            if a.method.is_some() {
                p.method = a.method;
            }
            set(&mut p.band_factor, a.band_factor);
            set(&mut p.resolution, a.resolution);
            if r.cfg.datum.is_none() {
                r.cfg.datum = Some(commands::default_strichartz_datum());
            }
            let res = pool.install(|| commands::scan_strichartz(&r.cfg, &p, &out));
            finish("scan-strichartz", &r, &p, res)
        }
    }
}

/// Runs one command line and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let command = cli.command.name();
    match execute(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("{command}: scan failed its trend check; see the summary JSON");
            EXIT_SCAN_FAILURE
        }
        Err(e) => {
            eprintln!("{command}: {e}");
            e.exit_code()
        }
    }
}
