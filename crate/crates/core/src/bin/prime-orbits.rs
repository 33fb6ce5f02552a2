use clap::{Parser, Subcommand};
use prime_orbits::experiment::{self, AlphaPreset, ExperimentConfig, RunContext};
use prime_orbits::primes::PrimeTable;
use prime_orbits::reparam::ReparamFlow;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "prime-orbits", version, about = "Prime-weighted orbit experiments on special flows")]
struct Cli {
    /// Experiment config (key = value with [sections]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Binary sieve cache; read when it covers the limit, written by `sieve`.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    out_json: Option<PathBuf>,
    #[arg(long, global = true)]
    out_csv: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sieve up to a limit and optionally write the cache.
    Sieve {
        #[arg(long, default_value_t = 1_000_000)]
        limit: u64,
    },
    /// Build a rotation number from the config's [alpha] section or a preset
    /// and print its JSON.
    BuildAlpha {
        /// golden, pell, kochergin, kochergin_dense or reparam.
        #[arg(long)]
        preset: Option<String>,
        /// Print the default reparametrized flow manifest instead.
        #[arg(long)]
        flow: bool,
    },
    /// Run a registered experiment.
    Run { experiment: String },
    /// List registered experiments.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(cli: &Cli, name: &str) -> prime_orbits::Result<ExperimentConfig> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::minimal(name),
    };
    if cfg.name() != name {
        return Err(prime_orbits::Error::InvalidInput(format!(
            "config names experiment `{}` but `{name}` was requested",
            cfg.name()
        )));
    }
    Ok(match cli.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn real_main(cli: Cli) -> prime_orbits::Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| prime_orbits::Error::Resource(e.to_string()))?;
    }
    match &cli.cmd {
        Cmd::List => {
            for (name, summary) in experiment::list() {
                println!("{name:<24} {summary}");
            }
        }
        Cmd::Sieve { limit } => {
            let t = PrimeTable::load_or_build(*limit, cli.cache.as_deref())?;
            if let Some(p) = &cli.cache {
                t.write_cache(p)?;
            }
            println!("limit = {}", t.limit());
            println!("pi = {}", t.count(*limit));
            println!("theta = {:.6}", t.theta(*limit)?);
        }
        Cmd::BuildAlpha { preset, flow } => {
            let cfg = match &cli.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::minimal("build-alpha"),
            };
            let default = match preset {
                Some(p) => p
                    .parse::<AlphaPreset>()
                    .map_err(|_| prime_orbits::Error::InvalidInput(format!("unknown preset `{p}`")))?,
                None => AlphaPreset::Kochergin,
            };
            let alpha = if preset.is_some() { default.build()? } else { cfg.alpha(default)? };
            let text = if *flow {
                serde_json::to_string_pretty(&ReparamFlow::default_for(alpha)?.manifest())?
            } else {
                serde_json::to_string_pretty(&alpha)?
            };
            match &cli.out_json {
                Some(p) => std::fs::write(p, text)?,
                None => println!("{text}"),
            }
        }
        Cmd::Run { experiment: name } => {
            let cfg = load_config(&cli, name)?;
            let ctx = RunContext { cache: cli.cache.clone() };
            let report = experiment::run_experiment(&cfg, &ctx)?;
            let json = cli.out_json.clone().or_else(|| cfg.raw.raw("output", "json").map(PathBuf::from));
            let csv = cli.out_csv.clone().or_else(|| cfg.raw.raw("output", "csv").map(PathBuf::from));
            if let Some(p) = json {
                report.write_json(&p)?;
            }
            if let Some(p) = csv {
                report.write_csv(&p)?;
            }
            for v in &report.verdicts {
                let tag = if v.passed() { "PASS" } else { "FAIL" };
                println!("{tag} {}: {}", v.name, v.detail);
            }
            println!("{} finished in {:.1} s", report.experiment, report.seconds);
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
