pub mod burgers;
pub mod chaos;
pub mod disperse;
pub mod field;
pub mod report;
pub mod sine1d;

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use turbcloud_core::parallel;

use crate::config::Resolved;
use crate::error::{CliError, CliResult};
use crate::output::{sidecar_path, write_json};

pub(crate) fn require_out(out: &Option<PathBuf>) -> CliResult<PathBuf> {
    out.clone()
        .ok_or_else(|| CliError::config("missing required key `out`"))
}

/// Runs `f` on `threads` workers (0 = all cores).
pub(crate) fn pooled<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    let n = if threads == 0 {
        parallel::default_threads()
    } else {
        threads
    };
    parallel::with_threads(n, f)
}

/// One checked statement for the claim manifest.
pub(crate) fn claim(text: &str, metric: &str, value: f64, holds: Option<bool>) -> Value {
    json!({ "claim": text, "metric": metric, "value": value, "holds": holds })
}

/// Writes `<out>.json` with the resolved config, outputs and summary.
pub(crate) fn write_sidecar<C: Serialize>(
    command: &str,
    resolved: &Resolved<C>,
    out: &Path,
    outputs: &[PathBuf],
    summary: Value,
    claims: Vec<Value>,
) -> CliResult<()> {
    let record = json!({
        "tool": "turbcloud",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": serde_json::to_value(&resolved.config)?,
        "overrides": resolved.overrides,
        "seed_source": resolved.seed_source,
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "summary": summary,
        "claims": claims,
    });
    write_json(&sidecar_path(out), &record)
}

/// Spearman rank correlation of (t, y) restricted to t >= t0; NaN if the
/// window has fewer than three samples.
pub(crate) fn late_spearman(t: &[f64], y: &[f64], t0: f64) -> f64 {
    let (tt, yy): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(t, _)| **t >= t0 - 1e-9)
        .map(|(a, b)| (*a, *b))
        .unzip();
    turbcloud_core::stats::spearman(&tt, &yy).unwrap_or(f64::NAN)
}
