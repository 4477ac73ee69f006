//! Scenario runner behind the `qdyn` binary: configuration, method dispatch,
//! plain-text outputs and run comparison.

pub mod compare;
pub mod config;
pub mod error;
pub mod oracle;
pub mod output;
pub mod scenario;

pub use compare::{compare_runs, CompareReport};
pub use config::{Method, Preset, RunConfig};
pub use error::CliError;
pub use scenario::{run_scenario, simulate, Frame, RunSummary};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "QDYN_THREADS";

/// Sizes the global worker pool from `threads` or [`THREADS_ENV`].
///
/// Worker count never changes results, only speed.
pub fn init_workers(threads: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|e| CliError::Config {
                origin: None,
                key: THREADS_ENV.into(),
                reason: format!("cannot parse `{v}`: {e}"),
            })?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Config { origin: None, key: "threads".into(), reason: "must be positive".into() });
    }
    #[cfg(feature = "parallel")]
    if let Some(n) = n {
        // a pool that already exists (tests, repeated calls) is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(n)
}
