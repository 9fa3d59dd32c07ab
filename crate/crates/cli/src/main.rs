use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use stvf::driver::run_mc;
use stvf::exec::{init_thread_pool_from_env, Execution};
use stvf::validation::{run_suite, Suite};
use stvf::{Error, RunConfig, Scheme};

#[derive(Parser)]
#[command(name = "stvf", version, about = "Adaptive finite elements for the stochastic total variation flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Overrides {
    /// TOML configuration; missing keys take the reference values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_level: Option<u32>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Constant step tau0 on the fixed macro mesh
    #[arg(long)]
    no_adapt: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the paths one after another
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo run: writes indicators.csv, summary.json and VTK snapshots
    Run(Overrides),
    /// Runs a validation suite and exits nonzero if any check fails
    Validate {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Repeats `run` for tolerance levels 0, 1 and 2
    Sweep(Overrides),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Si,
    Fix3,
    Fix,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Transformation,
    Energy,
    Epsilon,
    Isometry,
    Oracles,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Transformation => Suite::Transformation,
            SuiteArg::Energy => Suite::Energy,
            SuiteArg::Epsilon => Suite::Epsilon,
            SuiteArg::Isometry => Suite::Isometry,
            SuiteArg::Oracles => Suite::Oracles,
        }
    }
}

impl Overrides {
    fn apply(&self) -> stvf::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.paths {
            cfg.paths = p;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.tol_level {
            cfg.tol_level = k;
        }
        if let Some(s) = self.scheme {
            cfg.scheme = match s {
                SchemeArg::Si => Scheme::Si,
                SchemeArg::Fix3 => Scheme::Fix3,
                SchemeArg::Fix => Scheme::Fix,
            };
        }
        if self.no_adapt {
            cfg.adapt_mesh = false;
            cfg.adapt_time = false;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

fn run_once(cfg: &RunConfig, dir: &Path, exec: Execution) -> Result<(), Failure> {
    let ensemble = run_mc(cfg, exec)?;
    stvf::io::write_run(dir, cfg, &ensemble)?;
    let s = &ensemble.summary;
    println!(
        "{}: {} paths, mean final ndof {:.1}, time-averaged eta_h {:.4e}, eta_time2 {:.4e}",
        dir.display(),
        s.paths,
        s.mean_final_ndof,
        s.mean_time_averaged.eta_h,
        s.mean_time_averaged.eta_time2
    );
    if s.failures.is_empty() {
        Ok(())
    } else {
        for f in &s.failures {
            eprintln!("path {} (seed {}) failed: {}", f.path, f.seed, f.message);
        }
        Err(Failure::Run(format!("{} path(s) failed", s.failures.len())))
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(o) => {
            let cfg = o.apply()?;
            run_once(&cfg, &cfg.output_dir, o.execution())
        }
        Command::Sweep(o) => {
            let base = o.apply()?;
            for k in 0..3 {
                let cfg = RunConfig {
                    tol_level: k,
                    tol_space: None,
                    tol_time: None,
                    ..base.clone()
                };
                run_once(&cfg, &base.output_dir.join(format!("tol{k}")), o.execution())?;
            }
            Ok(())
        }
        Command::Validate { suite, overrides } => {
            let cfg = overrides.apply()?;
            let checks = run_suite(suite.into(), &cfg, overrides.execution())?;
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(Failure::Run("validation failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = init_thread_pool_from_env() {
        log::info!("using {n} threads");
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
