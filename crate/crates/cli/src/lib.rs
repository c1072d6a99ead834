//! Library side of the `margin-guard` command: configuration, the
//! subcommands as functions, and the mapping from errors to exit codes.

pub mod args;
pub mod commands;
pub mod config;

pub use args::{run, Cli};
pub use commands::{
    cmd_analytic, cmd_audit, cmd_counterexample, cmd_curve, cmd_explain, cmd_fit, cmd_search,
    AnalyticArgs, Counterexample, Outputs,
};
pub use config::RunConfig;

use margin_guard::Error;

/// Variable capping the worker threads.
pub const THREADS_VAR: &str = "MARGIN_GUARD_THREADS";

/// `0` success, `2` configuration, domain or input error, `3` empty version
/// space, `4` sampler failure.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    err.chain()
        .find_map(|e| e.downcast_ref::<Error>())
        .map_or(2, |e| match e {
            Error::Infeasible(_) => 3,
            Error::StuckWalk { .. } | Error::LowAcceptance { .. } => 4,
            _ => 2,
        })
}

/// Sizes the global thread pool from [`THREADS_VAR`] when it is set.
pub fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize =
        v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            anyhow::anyhow!("{THREADS_VAR} must be a positive integer, got {v:?}")
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}
