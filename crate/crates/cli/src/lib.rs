//! Library side of the `entsub` command: instance and grid file formats,
//! per-command pipelines, TOML reports and corpus runs.

// `!(x > 0.0)` is used on purpose so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// a `Check` standing in for a result is built once per block
#![allow(clippy::result_large_err)]

pub mod corpus;
pub mod gridfile;
pub mod instance;
pub mod number;
pub mod report;
pub mod run;

use std::path::Path;

use entsub_core::entropy::HeatScan;

/// Heat-flow scan as CSV with columns `t,info_gap,entropy_gap`.
pub fn write_heat_csv(scan: Option<&HeatScan>, path: &Path) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    w.write_record(["t", "info_gap", "entropy_gap"]).map_err(|e| e.to_string())?;
    for p in scan.map(|s| s.points.as_slice()).unwrap_or_default() {
        w.write_record([p.t.to_string(), format!("{:e}", p.info_gap), format!("{:e}", p.entropy_gap)])
            .map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}
