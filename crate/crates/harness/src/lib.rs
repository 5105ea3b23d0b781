//! Config-driven campaign runner: parses a TOML campaign, runs its task on
//! a fixed-size worker pool, writes hash-stamped CSV/JSON outputs and
//! finishes with an atomically written manifest.

// `!(x > 0.0)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod tasks;

use std::path::Path;

pub use config::{CampaignConfig, LoadedConfig, Overrides, SeedSource, Task};
pub use error::{exit, HarnessError, HarnessResult};
pub use manifest::{FailureCounts, RunManifest, MANIFEST_NAME};

/// Runs the campaign with `parallelism` workers and writes its outputs and
/// manifest into `out_dir`. Gated failures and invalid runs still produce
/// outputs and a manifest; they show up in `exit_status`.
pub fn run_campaign(lc: &LoadedConfig, parallelism: usize, out_dir: &Path) -> HarnessResult<RunManifest> {
    let c = &lc.config;
    c.validate()?;
    if parallelism == 0 {
        return Err(HarnessError::Config("parallelism must be at least 1".into()));
    }
    let started = manifest::now_rfc3339();
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::Io(format!("{}: {e}", out_dir.display())))?;
    // A stale manifest would vouch for outputs this run is about to replace.
    match std::fs::remove_file(out_dir.join(MANIFEST_NAME)) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(HarnessError::Io(e.to_string())),
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| HarnessError::Io(format!("thread pool: {e}")))?;
    log::info!("running {} with {} workers, config {}", c.task, parallelism, lc.hash());
    let outcome = pool.install(|| match c.task {
        Task::Simulate => tasks::simulate_task(lc, out_dir),
        Task::Aging => tasks::aging_task(lc, out_dir),
        Task::Conditions => tasks::conditions_task(lc, out_dir),
        Task::ExtremalReference => tasks::extremal_task(lc, out_dir),
    })?;
    let exit_status = if outcome.invalid {
        exit::INVALID_RUN
    } else if outcome.gated_failures > 0 {
        exit::GATE_FAILED
    } else {
        exit::OK
    };
    let manifest = RunManifest {
        config_hash: lc.hash(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        task: c.task.to_string(),
        seed: c.seed,
        seed_source: lc.seed_source.to_string(),
        parallelism,
        started,
        finished: manifest::now_rfc3339(),
        replicas: c.replicas,
        failures: FailureCounts { incomplete: outcome.incomplete, gated: outcome.gated_failures },
        outputs: outcome.outputs,
        exit_status,
    };
    manifest.write(out_dir)?;
    Ok(manifest)
}
