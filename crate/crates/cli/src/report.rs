//! Report documents, serialized as TOML.
//!
//! Scalars precede tables in every struct so the output reads top-down, and
//! `D = +∞` comes out as the TOML literal `inf`.

use serde::Serialize;

pub const SCHEMA: &str = "entsub-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub instance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<ConstantSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremizers: Option<ExtremizerSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
}

impl Report {
    pub fn new(command: &str, instance: &str, timestamp: Option<u64>) -> Self {
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            instance: instance.to_string(),
            timestamp,
            feasibility: None,
            constant: None,
            frame: None,
            extremizers: None,
            verify: None,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("reports contain only serializable values")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilitySection {
    /// `feasible` or `infeasible`.
    pub status: String,
    pub tolerance: f64,
    pub n: usize,
    pub m: usize,
    pub sum_c: f64,
    pub span_dim: usize,
    pub interior: bool,
    /// Subsets in the form `{1,2}: 1.5 > 1`.
    pub violations: Vec<String>,
    pub critical: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSection>,
}

impl FeasibilitySection {
    pub fn feasible(&self) -> bool {
        self.status == "feasible"
    }
}

/// Gaussian family along which the entropy gap diverges.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessSection {
    pub kind: String,
    pub subspace_dim: usize,
    pub predicted_slope: f64,
    pub fitted_slope: f64,
    pub validated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantSection {
    pub d: f64,
    pub exp_d: f64,
    pub attained: bool,
    pub tolerance: f64,
    pub dropped: Vec<usize>,
    pub split_spread: f64,
    pub tree: Vec<TreeNode>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeNode {
    pub path: String,
    /// `line`, `interior` or `split`.
    pub kind: String,
    pub indices: Vec<usize>,
    pub d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_norm: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameSection {
    pub exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_r2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremizerSection {
    pub exists: bool,
    pub zero_block: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform: Option<Vec<Vec<f64>>>,
    pub blocks: Vec<BlockSection>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockSection {
    pub indices: Vec<usize>,
    pub dim: usize,
    /// `free` (any law) or `gaussian`.
    pub law: String,
    pub basis: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bl: Option<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fisher: Option<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen: Option<Check>,
}

impl VerifySection {
    pub fn checks(&self) -> impl Iterator<Item = (&'static str, &Check)> {
        [("entropy", &self.entropy), ("bl", &self.bl), ("fisher", &self.fisher), ("eigen", &self.eigen)]
            .into_iter()
            .filter_map(|(k, c)| c.as_ref().map(|c| (k, c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Equality,
    /// Apparent violation within ten tolerances; refine the grid.
    Inconclusive,
    Violated,
    Skipped,
    Error,
}

/// Sorts a signed margin (positive when the inequality holds strictly).
pub fn classify(margin: f64, tol: f64) -> Verdict {
    if margin.abs() <= tol {
        Verdict::Equality
    } else if margin > 0.0 {
        Verdict::Holds
    } else if margin >= -10.0 * tol {
        Verdict::Inconclusive
    } else {
        Verdict::Violated
    }
}

/// One verification block. `margin` is positive when the inequality holds
/// and is compared with `tolerance` in the units given by `measure`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn measured(lhs: f64, rhs: f64, margin: f64, tol: f64, measure: &'static str, grid: String) -> Self {
        let verdict = classify(margin, tol);
        Check {
            verdict,
            holds: Some(margin >= -tol),
            lhs: Some(lhs),
            rhs: Some(rhs),
            margin: Some(margin),
            tolerance: Some(tol),
            measure: Some(measure),
            grid: Some(grid),
            note: None,
        }
    }

    pub fn skipped(note: impl Into<String>) -> Self {
        Check::bare(Verdict::Skipped, note.into())
    }

    pub fn error(note: impl Into<String>) -> Self {
        Check::bare(Verdict::Error, note.into())
    }

    fn bare(verdict: Verdict, note: String) -> Self {
        Check {
            verdict,
            holds: None,
            lhs: None,
            rhs: None,
            margin: None,
            tolerance: None,
            measure: None,
            grid: None,
            note: Some(note),
        }
    }

    /// Margin in units of the tolerance, for ranking blocks against each other.
    pub fn scaled_margin(&self) -> Option<f64> {
        Some(self.margin? / self.tolerance?)
    }
}

pub fn rows(m: &entsub_core::Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|&x| clean(x)).collect()).collect()
}

/// Drops the sign of negative zero so reports do not print `-0.0`.
pub fn clean(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_bands() {
        assert_eq!(classify(0.5, 0.1), Verdict::Holds);
        assert_eq!(classify(-0.05, 0.1), Verdict::Equality);
        assert_eq!(classify(-0.5, 0.1), Verdict::Inconclusive);
        assert_eq!(classify(-1.5, 0.1), Verdict::Violated);
    }

    #[test]
    fn infinity_and_ordering() {
        let mut r = Report::new("constant", "x", None);
        r.constant = Some(ConstantSection {
            d: f64::INFINITY,
            exp_d: f64::INFINITY,
            attained: false,
            tolerance: 1e-9,
            dropped: vec![],
            split_spread: 0.0,
            tree: vec![],
        });
        let text = r.to_toml();
        assert!(text.starts_with("schema = \"entsub-report/1\"\n"), "{text}");
        assert!(text.contains("d = inf\n"), "{text}");
        assert!(!text.contains("timestamp"));
    }
}
