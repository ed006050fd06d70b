//! `pistonfilm` — pressure-field and piston-motion solver for the
//! piston/cylinder lubrication interface of axial piston pumps.

mod config;
mod output;
mod run;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use output::OutputMeta;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pistonfilm",
    version,
    about = "Lubrication film solver for axial piston pump piston/cylinder interfaces",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    /// Assemble and solve the pressure system at the configured state.
    Solve(CommonArgs),
    /// Sweep preconditioners, relaxation factors, meshes and textures.
    Bench(CommonArgs),
    /// Compare synchronized, asynchronous and sequential nine-block solves.
    JointBench(CommonArgs),
    /// March the piston dynamics through shaft revolutions.
    Simulate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for data-parallel kernels; overrides PISTONFILM_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
    /// Recorded in output headers for provenance of randomized protocols.
    #[arg(long)]
    seed: Option<u64>,
}

impl Mode {
    fn name(&self) -> &'static str {
        match self {
            Mode::Solve(_) => "solve",
            Mode::Bench(_) => "bench",
            Mode::JointBench(_) => "joint-bench",
            Mode::Simulate(_) => "simulate",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Mode::Solve(a) | Mode::Bench(a) | Mode::JointBench(a) | Mode::Simulate(a) => a,
        }
    }
}

fn resolve_workers(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("PISTONFILM_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let args = cli.mode.args();

    if let Some(workers) = resolve_workers(args.workers) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()?;
    }

    let cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let cfg = RunConfig::default();
            cfg.validate()?;
            cfg
        }
    };

    let meta = OutputMeta::new(
        cli.mode.name(),
        rayon::current_num_threads(),
        args.seed,
    );
    std::fs::create_dir_all(&args.out)?;
    // Echo the effective configuration (defaults filled in) next to the
    // results so a run can be repeated without the original file.
    std::fs::write(args.out.join("config_used.toml"), cfg.to_toml()?)?;

    match &cli.mode {
        Mode::Solve(_) => run::solve_mode(&cfg, &args.out, &meta),
        Mode::Bench(_) => run::bench_mode(&cfg, &args.out, &meta),
        Mode::JointBench(_) => run::joint_bench_mode(&cfg, &args.out, &meta),
        Mode::Simulate(_) => run::simulate_mode(&cfg, &args.out, &meta),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("pistonfilm: {err:#}");
            ExitCode::FAILURE
        }
    }
}
