use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spiraling::acceptance::{run_all, AcceptanceOptions};
use spiraling::config::{ConfigError, ExperimentId, RunConfig};
use spiraling::experiments::census::CensusMode;
use spiraling::runner::{self, RunError, EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_OK};
use spiraling::Norm;

#[derive(Parser)]
#[command(name = "spiraling", version, about = "Directions of Diophantine approximates and lattice points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its JSON report (and CSV trace with --out).
    Run(RunArgs),
    /// Run the acceptance suite and print a pass/fail table.
    Verify {
        /// Skip the level-9 census.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Write acceptance.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// thm1, birkhoff, thm3, biased-census, biased-ratio or nonminimal.
    experiment: String,
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "T")]
    big_t: Option<f64>,
    /// Flow time; repeat or comma-separate for a grid.
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    /// Direction set, e.g. sign:-1, hemisphere:1,0, cap:1,0:0.5.
    #[arg(long = "A")]
    a: Option<String>,
    #[arg(long)]
    norm: Option<String>,
    /// Number of sampled points.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    nmax: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    /// Census mode: interval or exhaustive.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_enum<T: serde::de::DeserializeOwned>(flag: &str, v: &str) -> Result<T, ConfigError> {
    serde_json::from_value(serde_json::Value::String(v.to_string()))
        .map_err(|_| ConfigError::Invalid(format!("--{flag} {v:?} is not recognised")))
}

fn build_config(args: RunArgs) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.experiment = args.experiment.parse::<ExperimentId>()?;
    cfg.d = args.d.unwrap_or(cfg.d);
    cfg.c = args.c.unwrap_or(cfg.c);
    cfg.t = args.big_t.unwrap_or(cfg.t);
    if !args.t.is_empty() {
        cfg.t_grid = args.t;
    }
    cfg.a = args.a.or(cfg.a);
    if let Some(n) = &args.norm {
        cfg.norm = parse_enum::<Norm>("norm", n)?;
    }
    if let Some(m) = &args.mode {
        cfg.census_mode = parse_enum::<CensusMode>("mode", m)?;
    }
    cfg.n = args.n.unwrap_or(cfg.n);
    cfg.m = args.m.unwrap_or(cfg.m);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.nmax = args.nmax.or(cfg.nmax);
    cfg.eps = args.eps.unwrap_or(cfg.eps);
    cfg.threads = args.threads.or(cfg.threads);
    cfg.out = args.out.or(cfg.out);
    cfg.apply_env()?;
    Ok(cfg)
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = match build_config(args) {
                Ok(c) => c,
                Err(e) => return fail(e.into()),
            };
            match runner::run(&cfg) {
                Ok(out) => {
                    println!("{}", out.report.to_json());
                    for f in &out.files {
                        eprintln!("wrote {}", f.display());
                    }
                    ExitCode::from(EXIT_OK as u8)
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify { quick, seed, threads, out } => {
            if threads == Some(0) {
                return fail(ConfigError::Invalid("threads must be at least 1".into()).into());
            }
            let opts = AcceptanceOptions { quick, seed };
            let report = runner::with_threads(threads, || run_all(&opts));
            print!("{}", report.table());
            if let Some(dir) = out {
                let path = dir.join("acceptance.json");
                if let Err(e) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&path, report.to_json())) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            }
            if report.all_passed() {
                ExitCode::from(EXIT_OK as u8)
            } else {
                ExitCode::from(EXIT_ACCEPTANCE as u8)
            }
        }
    }
}
