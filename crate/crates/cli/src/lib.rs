//! Command-line plumbing around `sngca-core`: manifests, data files, batch
//! replications and benchmark grids.

pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;

pub use commands::{
    cmd_benchmark, cmd_generate, cmd_run, run_benchmark, run_replications, sidecar_path,
    summarize, BenchmarkCell, BenchmarkOptions, BenchmarkSuite, IterationRow, IterationStats,
    RunSummary, ITERATIONS_FILE, SUMMARY_FILE,
};
pub use error::{CliError, CliResult, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
pub use manifest::{ManifestFile, RunManifest};

/// Caps rayon's worker count from `NGCA_THREADS` when set. Calling it after
/// the global pool exists is harmless.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("NGCA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("NGCA_THREADS={raw:?} is not a positive count")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
