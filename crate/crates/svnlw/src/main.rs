use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use svnlw::harness::{
    run_energy_growth, run_gibbs_invariance, run_lwp_convergence, run_schauder,
    run_variance_suite, run_wick_convergence, write_manifest, write_reports_ndjson,
    HarnessConfig, SuiteOutcome,
};

/// Verification experiments for the renormalized stochastic viscous wave
/// equation on the 2-torus. Exit code 0 iff every declared check passes.
#[derive(Parser)]
#[command(name = "svnlw", version, about)]
struct Cli {
    #[command(subcommand)]
    suite: Suite,

    /// TOML experiment configuration (defaults are the acceptance-scale runs).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed of every random stream in the run.
    #[arg(long, global = true, default_value_t = 20240)]
    seed: u64,

    /// Output directory for the manifest and NDJSON/CSV results.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the suite's main replica/sample count.
    #[arg(long, global = true)]
    replicas: Option<usize>,

    /// Worker threads (results are identical for any value).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Suite {
    /// Pointwise and stationary variance closed forms; log divergence.
    Variance,
    /// Hermite algebra, Wick moments, Cauchy contrast, tail shapes.
    Wick,
    /// Coupled band convergence and the two-route local solver agreement.
    Lwp,
    /// Energy dissipation identity and the forced cubic growth study.
    Energy,
    /// Weighted-ensemble invariance under the split dynamics.
    Gibbs,
    /// Semigroup decay exponents.
    Schauder,
}

fn main() -> ExitCode {
    match run() {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => HarnessConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => HarnessConfig::default(),
    };
    if let Some(r) = cli.replicas {
        cfg.variance.replicas = r;
        cfg.wick.moment_replicas = r;
        cfg.wick.field_replicas = r;
        cfg.lwp.replicas = r;
        cfg.energy.replicas = r;
        cfg.gibbs.samples = r;
    }
    let threads = cli.threads.unwrap_or_else(num_threads_default);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;

    let seed = cli.seed;
    let (name, outcome): (&str, SuiteOutcome) = pool.install(|| -> Result<_> {
        Ok(match cli.suite {
            Suite::Variance => ("variance", run_variance_suite(&cfg.variance, seed)?),
            Suite::Wick => ("wick", run_wick_convergence(&cfg.wick, seed)?),
            Suite::Lwp => ("lwp", run_lwp_convergence(&cfg.lwp, seed)?),
            Suite::Energy => ("energy", run_energy_growth(&cfg.energy, seed)?),
            Suite::Gibbs => ("gibbs", run_gibbs_invariance(&cfg.gibbs, seed)?),
            Suite::Schauder => ("schauder", run_schauder(&cfg.schauder, seed)?),
        })
    })?;

    for r in &outcome.reports {
        println!(
            "[{}] {} {} (estimate {:.6e}, se {:.2e}, n={}, {})",
            if r.pass { "pass" } else { "FAIL" },
            name,
            r.check,
            r.estimate,
            r.se,
            r.replicas,
            r.tolerance
        );
    }
    println!(
        "{name}: {}/{} checks passed in {:.1}s",
        outcome.reports.iter().filter(|r| r.pass).count(),
        outcome.reports.len(),
        outcome.runtime_seconds
    );

    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join(format!("{name}_results.ndjson")))?;
        write_reports_ndjson(&outcome.reports, &mut f)?;
        write_manifest(dir, name, seed, threads, &cfg, &outcome)?;
    }
    Ok(outcome.pass())
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
