//! Batch experiment runner for the `inner-circle` library.
//!
//! A JSON [`ExperimentConfig`] names a family and the parameters of each
//! experiment. The runners write a CSV or JSON table, optional SVG plots, a
//! `manifest.json` that reproduces bit for bit from the same configuration,
//! and a `timing.json` with the wall-clock time.

pub mod config;
pub mod output;
pub mod plot;
pub mod run;

use anyhow::{Context, Result};

pub use config::{ExperimentConfig, FamilyRef, Format};
pub use run::{list_families, run_boundary, run_classify, run_verify, Check, Command, RunManifest};

/// Environment variable capping the number of worker threads (`0` = one per core).
pub const THREADS_VAR: &str = "INNER_CIRCLE_THREADS";

/// Worker count requested through [`THREADS_VAR`]; `0` when unset.
pub fn requested_threads() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_VAR} must be a non-negative integer, got `{v}`")),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(e).context(THREADS_VAR),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` = one per core).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(f))
}
