//! Batch runs over a directory of instances.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::instance::read_instance;
use crate::report::Verdict;
use crate::run::{run, Command, Settings, Which, EXIT_INFEASIBLE};

/// Instance files carry this extension; anything else in the directory is ignored.
pub const EXTENSION: &str = "inst";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub file: String,
    /// `ok`, `infeasible`, `inconclusive`, `violated`, `block error`, `error` or `parse error`.
    pub status: String,
    pub feasible: Option<bool>,
    pub d: Option<f64>,
    pub attained: Option<bool>,
    /// Block whose margin, in units of its tolerance, is smallest.
    pub worst_block: Option<String>,
    pub worst_margin: Option<f64>,
    /// Error text for failed rows.
    pub detail: Option<String>,
}

impl Row {
    fn failed(name: String, file: String, status: &str, detail: String) -> Row {
        Row {
            name,
            file,
            status: status.into(),
            feasible: None,
            d: None,
            attained: None,
            worst_block: None,
            worst_margin: None,
            detail: Some(detail),
        }
    }
}

pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let entries = std::fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| format!("{}: {e}", dir.display()))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == EXTENSION) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn run_one(path: &Path, settings: &Settings) -> Row {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = path.file_stem().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let inst = match read_instance(path) {
        Ok(i) => i,
        Err(e) => return Row::failed(stem, file, "parse error", e),
    };
    log::info!("corpus: {}", inst.name);
    let out = match run(&inst, settings, Command::Verify(Which::All)) {
        Ok(o) => o,
        Err(e) => return Row::failed(inst.name, file, "error", e),
    };
    let feasible = out.report.feasibility.as_ref().map(|f| f.feasible());
    let constant = out.report.constant.as_ref();
    let mut worst: Option<(&str, f64, f64)> = None;
    let mut verdicts = Vec::new();
    if let Some(v) = &out.report.verify {
        for (name, chk) in v.checks() {
            verdicts.push(chk.verdict);
            if let (Some(scaled), Some(m)) = (chk.scaled_margin(), chk.margin) {
                if worst.is_none_or(|w| scaled < w.1) {
                    worst = Some((name, scaled, m));
                }
            }
        }
    }
    let status = if out.exit == EXIT_INFEASIBLE {
        "infeasible"
    } else if verdicts.contains(&Verdict::Violated) {
        "violated"
    } else if verdicts.contains(&Verdict::Error) {
        "block error"
    } else if verdicts.contains(&Verdict::Inconclusive) {
        "inconclusive"
    } else {
        "ok"
    };
    Row {
        name: inst.name,
        file,
        status: status.into(),
        feasible,
        d: constant.map(|c| c.d),
        attained: constant.map(|c| c.attained),
        worst_block: worst.map(|w| w.0.to_string()),
        worst_margin: worst.map(|w| w.2),
        detail: None,
    }
}

/// Runs every instance in `dir` on `jobs` workers and returns rows sorted by name.
pub fn run_corpus(dir: &Path, settings: &Settings, jobs: usize) -> Result<Vec<Row>, String> {
    let files = instance_files(dir)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| e.to_string())?;
    let mut rows: Vec<Row> = pool.install(|| files.par_iter().map(|p| run_one(p, settings)).collect());
    rows.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.file.cmp(&b.file)));
    Ok(rows)
}

fn fmt_d(d: Option<f64>) -> String {
    match d {
        None => "-".into(),
        Some(x) if x.is_infinite() => "inf".into(),
        // six places, with negative zero folded into zero
        Some(x) => format!("{:.6}", if x.abs() < 5e-7 { 0.0 } else { x }),
    }
}

fn fmt_flag(b: Option<bool>) -> &'static str {
    match b {
        None => "-",
        Some(true) => "yes",
        Some(false) => "no",
    }
}

/// Fixed-width summary table, one line per instance.
pub fn format_table(rows: &[Row]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} {:<8} {:>10} {:<8} {:<7} {:>10}  status",
        "name", "feasible", "D", "attained", "worst", "margin"
    );
    for r in rows {
        let margin = r.worst_margin.map_or("-".into(), |m| format!("{m:.2e}"));
        let mut status = r.status.clone();
        if let Some(d) = &r.detail {
            status = format!("{status}: {}", d.lines().next().unwrap_or(""));
        }
        let _ = writeln!(
            out,
            "{:<20} {:<8} {:>10} {:<8} {:<7} {:>10}  {}",
            r.name,
            fmt_flag(r.feasible),
            fmt_d(r.d),
            fmt_flag(r.attained),
            r.worst_block.as_deref().unwrap_or("-"),
            margin,
            status
        );
    }
    out
}

pub fn write_csv(rows: &[Row], path: &Path) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    w.write_record(["name", "file", "status", "feasible", "d", "attained", "worst_block", "worst_margin"])
        .map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.file.clone(),
            r.status.clone(),
            fmt_flag(r.feasible).into(),
            fmt_d(r.d),
            fmt_flag(r.attained).into(),
            r.worst_block.clone().unwrap_or_default(),
            r.worst_margin.map(|m| format!("{m:e}")).unwrap_or_default(),
        ])
        .map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}
