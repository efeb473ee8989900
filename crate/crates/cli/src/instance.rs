//! Instance files.
//!
//! ```text
//! # equiangular frame in the plane
//! name = mercedes
//! [family]
//! 2
//! 1 0
//! -1/2 sqrt(3)/2
//! -1/2 -sqrt(3)/2
//! [weights]
//! 2/3 2/3 2/3
//! [data]
//! density = gaussian 1 0 0 1
//! factors = marginals
//! potentials = quadratic 1 1 1
//! ```
//!
//! `[family]` holds `n` and then one vector per row. `[files]` names grid
//! files (`density`, `factors`, `potentials`, paths relative to the instance)
//! and `[data]` generates the same objects from closed forms. `[tolerances]`
//! overrides `rank`, `eq`, `entropy`, `bl`, `fisher` and `eigen`.

use std::path::{Path, PathBuf};

use entsub_core::blverify::BL_TOL;
use entsub_core::family::DEFAULT_EQ_TOL;
use entsub_core::linops::DEFAULT_RANK_TOL;

use crate::number::parse_number;

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub rank: f64,
    pub eq: f64,
    /// Absolute, on the entropy gap against `D`.
    pub entropy: f64,
    /// Relative, on the ratio of the two sides.
    pub bl: f64,
    /// Relative, on the Fisher information sums.
    pub fisher: f64,
    /// Absolute, on the eigenvalue margin.
    pub eigen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank: DEFAULT_RANK_TOL, eq: DEFAULT_EQ_TOL, entropy: 5e-3, bl: BL_TOL, fisher: 1e-2, eigen: 2e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    /// Centered Gaussian, covariance given row-major.
    Gaussian(Vec<f64>),
    /// `(weight, mean, covariance)` components.
    Mixture(Vec<(f64, Vec<f64>, Vec<f64>)>),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactorSpec {
    /// Marginals of the instance density along each vector.
    Marginals,
    /// Centered Gaussian factors with the given variances.
    Gaussian(Vec<f64>),
    Files(Vec<PathBuf>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `V_j(t) = −b_j t²`.
    Quadratic(Vec<f64>),
    Files(Vec<PathBuf>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub n: usize,
    /// The vectors `a_j`, one per row of the `[family]` section.
    pub vectors: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub tolerances: Tolerances,
    pub density: Option<DensitySpec>,
    pub factors: Option<FactorSpec>,
    pub potentials: Option<PotentialSpec>,
}

impl Instance {
    pub fn m(&self) -> usize {
        self.vectors.len()
    }

    pub fn referenced_files(&self) -> Vec<&Path> {
        let mut out = Vec::new();
        if let Some(DensitySpec::File(p)) = &self.density {
            out.push(p.as_path());
        }
        if let Some(FactorSpec::Files(ps)) = &self.factors {
            out.extend(ps.iter().map(PathBuf::as_path));
        }
        if let Some(PotentialSpec::Files(ps)) = &self.potentials {
            out.extend(ps.iter().map(PathBuf::as_path));
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Family,
    Weights,
    Files,
    Tolerances,
    Data,
}

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split_whitespace().map(parse_number).collect()
}

fn key_value(line: &str) -> Result<(&str, &str), String> {
    let (k, v) = line.split_once('=').ok_or_else(|| format!("expected key = value, found {line:?}"))?;
    Ok((k.trim(), v.trim()))
}

fn set_once<T>(slot: &mut Option<T>, value: T, what: &str) -> Result<(), String> {
    if slot.is_some() {
        return Err(format!("{what} is given twice"));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_density(v: &str) -> Result<DensitySpec, String> {
    let (kind, rest) = v.split_once(char::is_whitespace).unwrap_or((v, ""));
    match kind {
        "gaussian" => Ok(DensitySpec::Gaussian(numbers(rest)?)),
        "mixture" => {
            let mut parts = Vec::new();
            for comp in rest.split('|') {
                let nums = numbers(comp)?;
                // w, then d means, then d² covariance entries
                let d = (1..=3).find(|d| 1 + d + d * d == nums.len()).ok_or_else(|| {
                    format!("mixture component {comp:?} is not `w mean... cov...` in 1 to 3 dimensions")
                })?;
                parts.push((nums[0], nums[1..=d].to_vec(), nums[1 + d..].to_vec()));
            }
            Ok(DensitySpec::Mixture(parts))
        }
        _ => Err(format!("unknown density generator {kind:?}")),
    }
}

pub fn parse_instance(text: &str, default_name: &str, base: &Path) -> Result<Instance, String> {
    let mut section = Section::Preamble;
    let mut name = None;
    let mut family: Vec<f64> = Vec::new();
    let mut weights = Vec::new();
    let mut tol = Tolerances::default();
    let (mut density, mut factors, mut potentials) = (None, None, None);
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ctx = |e: String| format!("line {}: {e}", lineno + 1);
        if let Some(head) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = match head.trim() {
                "family" => Section::Family,
                "weights" => Section::Weights,
                "files" => Section::Files,
                "tolerances" => Section::Tolerances,
                "data" => Section::Data,
                other => return Err(ctx(format!("unknown section [{other}]"))),
            };
            continue;
        }
        match section {
            Section::Preamble => match key_value(line).map_err(ctx)? {
                ("name", v) => name = Some(v.to_string()),
                (k, _) => return Err(ctx(format!("unknown key {k:?} before the first section"))),
            },
            Section::Family => family.extend(numbers(line).map_err(ctx)?),
            Section::Weights => weights.extend(numbers(line).map_err(ctx)?),
            Section::Tolerances => {
                let (k, v) = key_value(line).map_err(ctx)?;
                let x = parse_number(v).map_err(ctx)?;
                if !(x > 0.0) {
                    return Err(ctx(format!("tolerance {k} must be positive")));
                }
                match k {
                    "rank" => tol.rank = x,
                    "eq" => tol.eq = x,
                    "entropy" => tol.entropy = x,
                    "bl" => tol.bl = x,
                    "fisher" => tol.fisher = x,
                    "eigen" => tol.eigen = x,
                    _ => return Err(ctx(format!("unknown tolerance {k:?}"))),
                }
            }
            Section::Files => {
                let (k, v) = key_value(line).map_err(ctx)?;
                let paths: Vec<PathBuf> = v.split_whitespace().map(|p| base.join(p)).collect();
                if paths.is_empty() {
                    return Err(ctx(format!("{k} names no file")));
                }
                match k {
                    "density" if paths.len() == 1 => {
                        set_once(&mut density, DensitySpec::File(paths[0].clone()), "density").map_err(ctx)?
                    }
                    "factors" => set_once(&mut factors, FactorSpec::Files(paths), "factors").map_err(ctx)?,
                    "potentials" => set_once(&mut potentials, PotentialSpec::Files(paths), "potentials").map_err(ctx)?,
                    _ => return Err(ctx(format!("unknown or malformed file entry {k:?}"))),
                }
            }
            Section::Data => {
                let (k, v) = key_value(line).map_err(ctx)?;
                let (kind, rest) = v.split_once(char::is_whitespace).unwrap_or((v, ""));
                match (k, kind) {
                    ("density", _) => set_once(&mut density, parse_density(v).map_err(ctx)?, "density").map_err(ctx)?,
                    ("factors", "marginals") => set_once(&mut factors, FactorSpec::Marginals, "factors").map_err(ctx)?,
                    ("factors", "gaussian") => {
                        set_once(&mut factors, FactorSpec::Gaussian(numbers(rest).map_err(ctx)?), "factors").map_err(ctx)?
                    }
                    ("potentials", "quadratic") => set_once(
                        &mut potentials,
                        PotentialSpec::Quadratic(numbers(rest).map_err(ctx)?),
                        "potentials",
                    )
                    .map_err(ctx)?,
                    _ => return Err(ctx(format!("unknown generator {k} = {kind}"))),
                }
            }
        }
    }

    let Some((&n, rows)) = family.split_first() else {
        return Err("missing [family] section".into());
    };
    if n < 1.0 || n.fract() != 0.0 || n > 64.0 {
        return Err(format!("[family] must start with the dimension n, found {n}"));
    }
    let n = n as usize;
    if rows.is_empty() || rows.len() % n != 0 {
        return Err(format!("[family] holds {} numbers, not a whole number of {n}-vectors", rows.len()));
    }
    let vectors: Vec<Vec<f64>> = rows.chunks(n).map(<[f64]>::to_vec).collect();
    if weights.len() != vectors.len() {
        return Err(format!("{} vectors but {} weights", vectors.len(), weights.len()));
    }
    let m = vectors.len();
    let check_len = |what: &str, k: usize| {
        if k == m {
            Ok(())
        } else {
            Err(format!("{what} lists {k} entries for {m} vectors"))
        }
    };
    match &factors {
        Some(FactorSpec::Gaussian(v)) => check_len("factors", v.len())?,
        Some(FactorSpec::Files(v)) => check_len("factors", v.len())?,
        _ => {}
    }
    match &potentials {
        Some(PotentialSpec::Quadratic(v)) => check_len("potentials", v.len())?,
        Some(PotentialSpec::Files(v)) => check_len("potentials", v.len())?,
        None => {}
    }
    Ok(Instance {
        name: name.unwrap_or_else(|| default_name.to_string()),
        n,
        vectors,
        weights,
        tolerances: tol,
        density,
        factors,
        potentials,
    })
}

pub fn read_instance(path: &Path) -> Result<Instance, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    let base = path.parent().unwrap_or(Path::new("."));
    let inst = parse_instance(&text, stem, base).map_err(|e| format!("{}: {e}", path.display()))?;
    for file in inst.referenced_files() {
        if !file.is_file() {
            return Err(format!("{}: referenced file {} does not exist", path.display(), file.display()));
        }
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MERCEDES: &str = "
# equiangular
name = mercedes
[family]
2
1 0
-1/2 sqrt(3)/2
-1/2 -sqrt(3)/2
[weights]
2/3 2/3 2/3
[tolerances]
eq = 1e-8
[data]
density = gaussian 1 0 0 1
factors = marginals
potentials = quadratic 1 1 1
";

    #[test]
    fn parses_full_instance() {
        let inst = parse_instance(MERCEDES, "x", Path::new(".")).unwrap();
        assert_eq!(inst.name, "mercedes");
        assert_eq!((inst.n, inst.m()), (2, 3));
        assert!((inst.vectors[1][1] - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(inst.tolerances.eq, 1e-8);
        assert_eq!(inst.density, Some(DensitySpec::Gaussian(vec![1.0, 0.0, 0.0, 1.0])));
        assert_eq!(inst.factors, Some(FactorSpec::Marginals));
        assert_eq!(inst.potentials, Some(PotentialSpec::Quadratic(vec![1.0; 3])));
    }

    #[test]
    fn files_resolve_against_the_instance() {
        let text = "[family]\n1\n2\n[weights]\n1\n[files]\nfactors = f.grid\n";
        let inst = parse_instance(text, "line", Path::new("/data")).unwrap();
        assert_eq!(inst.name, "line");
        assert_eq!(inst.factors, Some(FactorSpec::Files(vec![PathBuf::from("/data/f.grid")])));
    }

    #[test]
    fn mixture_components() {
        let text = "[family]\n1\n1\n[weights]\n1\n[data]\ndensity = mixture 0.5 -1 1 | 0.5 1 2\n";
        let inst = parse_instance(text, "m", Path::new(".")).unwrap();
        assert_eq!(
            inst.density,
            Some(DensitySpec::Mixture(vec![(0.5, vec![-1.0], vec![1.0]), (0.5, vec![1.0], vec![2.0])]))
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_instance("[family]\n2\n1 0\n[weights]\n1\n[bogus]\n", "x", Path::new(".")).unwrap_err();
        assert!(err.starts_with("line 6"), "{err}");
        assert!(parse_instance("[family]\n2\n1 0 1\n[weights]\n1\n", "x", Path::new(".")).is_err());
        assert!(parse_instance("[family]\n2\n1 0\n[weights]\n1 1\n", "x", Path::new(".")).is_err());
        assert!(parse_instance("[weights]\n1\n", "x", Path::new(".")).is_err());
        let dup = "[family]\n1\n1\n[weights]\n1\n[data]\nfactors = marginals\nfactors = marginals\n";
        assert!(parse_instance(dup, "x", Path::new(".")).is_err());
    }
}
