//! Named experiments driven by a plain-text config, producing
//! [`ExperimentReport`]s.
//!
//! Sample points come from `ChaCha8Rng::seed_from_u64(seed)`; the seed is the
//! config's top-level `seed` (default [`DEFAULT_SEED`]).

mod config;
mod flows;
mod primes_exp;
mod report;
mod singular;

pub use config::{AlphaPreset, Config, ExperimentConfig, DEFAULT_SEED, DEFAULT_SIEVE_LIMIT, SECTIONS};
pub use report::{ExperimentReport, Metric, Recorder, Status, Verdict, VerdictKind, REPORT_SCHEMA};

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

/// Runtime options that do not belong in the config.
#[derive(Debug, Clone, Default)]
pub struct RunContext {
    /// Sieve cache file, read when it covers the needed limit.
    pub cache: Option<PathBuf>,
}

impl RunContext {
    pub fn primes(&self, limit: u64) -> Result<PrimeTable> {
        PrimeTable::load_or_build(limit, self.cache.as_deref())
    }
}

type Runner = fn(&ExperimentConfig, &RunContext, &mut Recorder) -> Result<()>;

pub struct Entry {
    pub name: &'static str,
    pub summary: &'static str,
    run: Runner,
}

pub static REGISTRY: &[Entry] = &[
    Entry { name: "dk_bound", summary: "Denjoy-Koksma bound at denominator times for BV test functions", run: singular::dk_bound },
    Entry { name: "birkhoff_rigidity", summary: "decay of |S_{kq_n}(f) - kq_n| and of the reparametrized rigidity distance", run: flows::birkhoff_rigidity },
    Entry { name: "singular_birkhoff", summary: "Birkhoff sums of the power roof and its derivatives at denominator times", run: singular::singular_birkhoff },
    Entry { name: "quad_expansion", summary: "second-order expansion of S_{kq_n}(f) in beta_n", run: singular::quad_expansion },
    Entry { name: "deriv_zeros", summary: "zeros of S_{q_n}(f') and the small-derivative set", run: singular::deriv_zeros },
    Entry { name: "section_claims", summary: "visits near the singular fibre and the A/A0/B time decomposition", run: singular::section_claims },
    Entry { name: "interval_factorization", summary: "factorization of prime box sums over an interval partition", run: primes_exp::interval_factorization },
    Entry { name: "phase_contrast", summary: "quadratic-phase prime sums against the zero-phase sum", run: primes_exp::phase_contrast },
    Entry { name: "ap_short_avg", summary: "short-interval progression error averaged over windows", run: primes_exp::ap_short_avg },
    Entry { name: "bt_ratio", summary: "theta(I)/|I| on random intervals", run: primes_exp::bt_ratio },
    Entry { name: "s_qr_build", summary: "primes in a class whose progression errors pass the dyadic filter", run: primes_exp::s_qr_build },
    Entry { name: "katok_wm", summary: "Fourier ratios for weak mixing of the time change", run: flows::katok_wm },
    Entry { name: "pnt_kochergin", summary: "prime orbit sums of tower observables on the power-roof flow", run: flows::pnt_kochergin },
    Entry { name: "pnt_reparam", summary: "prime orbit sums of a coboundary on the reparametrized flow", run: flows::pnt_reparam },
    Entry { name: "equidist_boxes", summary: "box discrepancy of the weighted prime orbit on the tower", run: flows::equidist_boxes },
];

pub fn list() -> impl Iterator<Item = (&'static str, &'static str)> {
    REGISTRY.iter().map(|e| (e.name, e.summary))
}

pub fn lookup(name: &str) -> Result<&'static Entry> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownExperiment {
        name: name.to_string(),
        registry: REGISTRY.iter().map(|e| e.name).collect::<Vec<_>>().join(", "),
    })
}

pub fn run_experiment(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<ExperimentReport> {
    let entry = lookup(cfg.name())?;
    let t0 = Instant::now();
    let mut rec = Recorder::default();
    (entry.run)(cfg, ctx, &mut rec)?;
    Ok(ExperimentReport {
        schema: REPORT_SCHEMA,
        experiment: entry.name.to_string(),
        params: cfg.raw.flatten(),
        metrics: rec.metrics,
        verdicts: rec.verdicts,
        seconds: t0.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

fn rng(cfg: &ExperimentConfig) -> Result<ChaCha8Rng> {
    Ok(ChaCha8Rng::seed_from_u64(cfg.seed()?))
}

/// True when `v` is strictly decreasing.
fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}
