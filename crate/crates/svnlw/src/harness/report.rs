use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::Result;

/// One quantitative check: an estimate with its uncertainty, the declared
/// tolerance it was held to, and the verdict. Everything needed to recompute
/// the verdict is stored on the row.
#[derive(Clone, Debug, Serialize)]
pub struct StatReport {
    pub suite: String,
    pub check: String,
    pub estimate: f64,
    pub se: f64,
    pub replicas: usize,
    /// Declared tolerance, e.g. "|z| < 4" or "abs < 1e-10".
    pub tolerance: String,
    pub pass: bool,
    /// Experiment-specific context (parameters, targets, fit numbers).
    pub details: serde_json::Value,
}

impl StatReport {
    /// Monte Carlo comparison at the suite's z gate.
    pub fn z_check(
        suite: &str,
        check: &str,
        estimate: f64,
        se: f64,
        target: f64,
        replicas: usize,
        z_gate: f64,
    ) -> Self {
        let z = if se == 0.0 {
            if estimate == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (estimate - target) / se
        };
        StatReport {
            suite: suite.into(),
            check: check.into(),
            estimate,
            se,
            replicas,
            tolerance: format!("|z| < {z_gate}"),
            pass: z.abs() < z_gate,
            details: json!({ "target": target, "z": z }),
        }
    }

    /// Deterministic identity at an absolute tolerance.
    pub fn abs_check(suite: &str, check: &str, value: f64, target: f64, tol: f64) -> Self {
        let dev = (value - target).abs();
        StatReport {
            suite: suite.into(),
            check: check.into(),
            estimate: value,
            se: 0.0,
            replicas: 1,
            tolerance: format!("|value - target| < {tol:e}"),
            pass: dev < tol,
            details: json!({ "target": target, "deviation": dev }),
        }
    }

    /// Boolean property with context.
    pub fn property(
        suite: &str,
        check: &str,
        pass: bool,
        estimate: f64,
        replicas: usize,
        tolerance: &str,
        details: serde_json::Value,
    ) -> Self {
        StatReport {
            suite: suite.into(),
            check: check.into(),
            estimate,
            se: 0.0,
            replicas,
            tolerance: tolerance.into(),
            pass,
            details,
        }
    }
}

/// A suite's reports plus bookkeeping that stays out of the deterministic
/// result rows.
#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub suite: String,
    pub reports: Vec<StatReport>,
    pub runtime_seconds: f64,
}

impl SuiteOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn failed_checks(&self) -> Vec<&StatReport> {
        self.reports.iter().filter(|r| !r.pass).collect()
    }
}

/// Deterministic NDJSON rows: one line per report (no timestamps, no
/// runtimes), byte-identical across reruns with the same seed.
pub fn write_reports_ndjson(reports: &[StatReport], out: &mut impl Write) -> Result<()> {
    for r in reports {
        writeln!(out, "{}", serde_json::to_string(r).expect("report serializes"))?;
    }
    Ok(())
}

/// Run manifest: every parameter, the code version, the seed, and the wall
/// clock — one structured document per run. Timestamps and runtimes live
/// here, never in the result rows.
pub fn write_manifest(
    dir: &Path,
    suite: &str,
    seed: u64,
    threads: usize,
    params: &impl Serialize,
    outcome: &SuiteOutcome,
) -> Result<()> {
    let manifest = json!({
        "experiment": suite,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "threads": threads,
        "params": serde_json::to_value(params).expect("params serialize"),
        "runtime_seconds": outcome.runtime_seconds,
        "pass": outcome.pass(),
        "checks": outcome.reports.len(),
        "unix_time": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    });
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join(format!("{suite}_manifest.json")))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&manifest).expect("manifest"))?;
    Ok(())
}
