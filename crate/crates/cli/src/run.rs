//! Per-instance pipelines behind each subcommand.

use std::path::Path;

use entsub_core::blverify::{self, FactorSet, GridFunction};
use entsub_core::entropy::{self, HeatScan};
use entsub_core::family;
use entsub_core::gaussopt::{self, BlockCovariance, ConstantOptions, SplitTree, WitnessKind};
use entsub_core::spectral::{self, SpectralOptions};
use entsub_core::{linops, Axis, DensityGrid, Error, GaussianSpec, Mat, Potential, SpanningFamily, WeightVector};

use crate::gridfile::{read_grid, GridData};
use crate::instance::{DensitySpec, FactorSpec, Instance, PotentialSpec, Tolerances};
use crate::report::{
    clean, rows, BlockSection, Check, ConstantSection, ExtremizerSection, FeasibilitySection, FrameSection, Report,
    TreeNode, Verdict, VerifySection, WitnessSection,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// Cells per axis for three-dimensional densities.
pub const MAX_3D_COUNT: usize = 96;

/// Times at which the heat-flow scan samples the Fisher gap.
pub const HEAT_TIMES: [f64; 6] = [0.0, 0.025, 0.05, 0.1, 0.15, 0.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Entropy,
    Bl,
    Fisher,
    Eigen,
    All,
}

impl Which {
    fn wants(self, block: Which) -> bool {
        self == Which::All || self == block
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Feasibility,
    Constant,
    Frame,
    Extremizers,
    Verify(Which),
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Feasibility => "feasibility",
            Command::Constant => "constant",
            Command::Frame => "frame",
            Command::Extremizers => "extremizers",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Overrides the instance's rank tolerance.
    pub rank_tol: Option<f64>,
    /// Overrides the instance's equality tolerance.
    pub eq_tol: Option<f64>,
    pub grid_1d: Axis,
    pub grid_2d: Axis,
    pub timestamp: Option<u64>,
    /// Run the heat-flow scan alongside the Fisher block.
    pub heat_scan: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rank_tol: None,
            eq_tol: None,
            grid_1d: Axis { lo: -12.0, hi: 12.0, count: 2048 },
            grid_2d: Axis { lo: -8.0, hi: 8.0, count: 256 },
            timestamp: None,
            heat_scan: false,
        }
    }
}

impl Settings {
    /// Grid for `n`-dimensional densities, `None` beyond three dimensions.
    pub fn density_axes(&self, n: usize) -> Option<Vec<Axis>> {
        match n {
            1 => Some(vec![self.grid_1d]),
            2 => Some(vec![self.grid_2d; 2]),
            3 => {
                let ax = Axis { count: self.grid_2d.count.min(MAX_3D_COUNT), ..self.grid_2d };
                Some(vec![ax; 3])
            }
            _ => None,
        }
    }

    /// The range of the 1-dim grid at the spacing of the 2-dim one, so both
    /// sides of the eigenvalue check carry matching discretization error.
    fn eigen_axis(&self) -> Axis {
        let g = self.grid_1d;
        let count = ((g.hi - g.lo) / self.grid_2d.h()).round().max(2.0) as usize;
        Axis { count, ..g }
    }
}

pub struct Outcome {
    pub report: Report,
    pub exit: i32,
    pub heat: Option<HeatScan>,
}

fn describe_axes(axes: &[Axis]) -> String {
    axes.iter().map(|a| format!("{}:{}:{}", a.lo, a.hi, a.count)).collect::<Vec<_>>().join(",")
}

fn core_err(e: Error) -> String {
    e.to_string()
}

/// The instance after tolerances are settled and the family is validated.
struct Prepared<'a> {
    inst: &'a Instance,
    tol: Tolerances,
    cols: Mat,
    weights: Option<WeightVector>,
    family: Option<SpanningFamily>,
}

fn prepare<'a>(inst: &'a Instance, settings: &Settings) -> Result<Prepared<'a>, String> {
    let mut tol = inst.tolerances.clone();
    if let Some(r) = settings.rank_tol {
        tol.rank = r;
    }
    if let Some(e) = settings.eq_tol {
        tol.eq = e;
    }
    let cols = linops::from_columns(inst.n, &inst.vectors).map_err(core_err)?;
    for (j, &c) in inst.weights.iter().enumerate() {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(format!("weight c_{} = {c} must be a nonnegative number", j + 1));
        }
    }
    for j in 0..cols.ncols() {
        if cols.column(j).norm() == 0.0 {
            return Err(format!("vector a_{} is zero", j + 1));
        }
    }
    // a weight above 1 breaks the bound of its own line, which WeightVector cannot hold
    let weights = WeightVector::new(inst.weights.clone()).ok();
    let family = SpanningFamily::with_rank_tol(cols.clone(), tol.rank).ok();
    Ok(Prepared { inst, tol, cols, weights, family })
}

fn witness_section(cols: &Mat, c: &WeightVector, tol: f64) -> Result<WitnessSection, String> {
    let w = gaussopt::divergence_witness(cols, c, tol).map_err(core_err)?;
    let kind = match w.kind {
        WitnessKind::SpanDeficiency => "span-deficiency".to_string(),
        WitnessKind::Dilation => "dilation".to_string(),
        WitnessKind::Subset(s) => format!("subset {s}"),
    };
    Ok(WitnessSection {
        kind,
        subspace_dim: w.subspace.dim(),
        predicted_slope: w.predicted_slope,
        fitted_slope: w.fitted_slope,
        validated: w.validated,
    })
}

fn feasibility_section(p: &Prepared) -> Result<FeasibilitySection, String> {
    let (n, m) = (p.inst.n, p.inst.m());
    let span_dim = linops::rank_tol(&p.cols, p.tol.rank).map_err(core_err)?;
    let mut sec = FeasibilitySection {
        status: "infeasible".into(),
        tolerance: p.tol.eq,
        n,
        m,
        sum_c: p.inst.weights.iter().sum(),
        span_dim,
        interior: false,
        violations: Vec::new(),
        critical: Vec::new(),
        witness: None,
    };
    let Some(c) = &p.weights else {
        for (j, &x) in p.inst.weights.iter().enumerate() {
            if x > 1.0 {
                sec.violations.push(format!("{{{}}}: {x:.6} > 1", j + 1));
            }
        }
        return Ok(sec);
    };
    let Some(a) = &p.family else {
        sec.violations.push(format!("span: dim {span_dim} < {n}"));
        sec.witness = Some(witness_section(&p.cols, c, p.tol.eq)?);
        return Ok(sec);
    };
    let rep = family::feasibility(a, c, p.tol.eq).map_err(core_err)?;
    sec.violations = rep.violations.iter().map(|b| format!("{}: {:.6} > {}", b.subset, b.sum, b.dim)).collect();
    if !rep.scaling_ok(p.tol.eq) {
        sec.violations.push(format!("sum: {:.6} != {n}", rep.sum_c));
    }
    sec.critical = rep.critical.iter().map(|b| format!("{}: {:.6} = {}", b.subset, b.sum, b.dim)).collect();
    if rep.in_ka {
        sec.status = "feasible".into();
        sec.interior = rep.in_interior;
    } else {
        sec.witness = Some(witness_section(&p.cols, c, p.tol.eq)?);
    }
    Ok(sec)
}

fn one_based(idx: &[usize]) -> Vec<usize> {
    idx.iter().map(|i| i + 1).collect()
}

fn flatten_tree(tree: &SplitTree, path: &str, out: &mut Vec<TreeNode>) {
    let node = |kind: &str, indices: Vec<usize>, d: f64| TreeNode {
        path: path.to_string(),
        kind: kind.to_string(),
        indices: one_based(&indices),
        d: clean(d),
        subset: None,
        iterations: None,
        grad_norm: None,
    };
    match tree {
        SplitTree::Line { indices, d } => out.push(node("line", indices.clone(), *d)),
        SplitTree::Interior { indices, d, opt } => out.push(TreeNode {
            iterations: Some(opt.iterations),
            grad_norm: Some(opt.grad_norm),
            ..node("interior", indices.clone(), *d)
        }),
        SplitTree::Split { subset, d, inner, outer } => {
            let mut all: Vec<usize> = inner.leaves().iter().chain(outer.leaves().iter()).flat_map(|l| leaf_indices(l)).collect();
            all.sort_unstable();
            out.push(TreeNode { subset: Some(subset.to_string()), ..node("split", all, *d) });
            flatten_tree(inner, &format!("{path}/{subset}"), out);
            flatten_tree(outer, &format!("{path}/{subset}^c"), out);
        }
    }
}

fn leaf_indices(t: &SplitTree) -> Vec<usize> {
    match t {
        SplitTree::Line { indices, .. } | SplitTree::Interior { indices, .. } => indices.clone(),
        SplitTree::Split { .. } => Vec::new(),
    }
}

fn infinite_constant(tol: f64) -> ConstantSection {
    ConstantSection {
        d: f64::INFINITY,
        exp_d: f64::INFINITY,
        attained: false,
        tolerance: tol,
        dropped: Vec::new(),
        split_spread: 0.0,
        tree: Vec::new(),
    }
}

fn constant_section(a: &SpanningFamily, c: &WeightVector, tol: f64) -> Result<ConstantSection, String> {
    let opts = ConstantOptions { eq_tol: tol, ..ConstantOptions::default() };
    let rep = gaussopt::constant_with(a, c, &opts).map_err(core_err)?;
    if !rep.is_finite() {
        return Ok(infinite_constant(tol));
    }
    let mut tree = Vec::new();
    if let Some(t) = &rep.tree {
        flatten_tree(t, "root", &mut tree);
    }
    Ok(ConstantSection {
        d: clean(rep.d),
        exp_d: rep.d.exp(),
        attained: rep.attained,
        tolerance: tol,
        dropped: one_based(&rep.dropped),
        split_spread: rep.split_spread,
        tree,
    })
}

fn frame_section(a: &SpanningFamily, c: &WeightVector) -> Result<FrameSection, String> {
    match gaussopt::frame_matrix(a, c) {
        Ok(f) => Ok(FrameSection {
            exists: true,
            residual: Some(f.residual),
            trace_r2: Some(f.trace_r2),
            certificate: None,
            r: Some(rows(&f.r)),
        }),
        Err(Error::NotTotallyReducible { certificate }) => Ok(FrameSection {
            exists: false,
            residual: None,
            trace_r2: None,
            certificate: Some(certificate.to_string()),
            r: None,
        }),
        Err(e) => Err(e.to_string()),
    }
}

fn extremizer_section(a: &SpanningFamily, c: &WeightVector) -> Result<ExtremizerSection, String> {
    let ex = gaussopt::extremizers(a, c).map_err(core_err)?;
    let blocks = ex
        .blocks
        .iter()
        .map(|b| {
            let (law, covariance) = match &b.covariance {
                BlockCovariance::Free => ("free", None),
                BlockCovariance::Gaussian(s) => ("gaussian", Some(rows(s))),
            };
            BlockSection { indices: one_based(&b.indices), dim: b.dim, law: law.into(), basis: rows(&b.basis), covariance }
        })
        .collect();
    Ok(ExtremizerSection {
        exists: ex.exists,
        zero_block: one_based(&ex.zero_block),
        certificate: ex.certificate.map(|s| s.to_string()),
        transform: ex.transform.as_ref().map(rows),
        blocks,
    })
}

fn load_grid(path: &Path, dim: usize) -> Result<GridData, String> {
    let g = read_grid(path)?;
    if g.axes.len() != dim {
        return Err(format!("{}: expected a {dim}-dim grid, found {}", path.display(), g.axes.len()));
    }
    Ok(g)
}

fn build_density(spec: &DensitySpec, n: usize, axes: Vec<Axis>) -> Result<DensityGrid, String> {
    let gaussian = |cov: &[f64]| {
        if cov.len() != n * n {
            return Err(format!("a covariance in dimension {n} needs {} entries, got {}", n * n, cov.len()));
        }
        GaussianSpec::new(Mat::from_row_slice(n, n, cov)).map_err(core_err)
    };
    match spec {
        DensitySpec::Gaussian(cov) => DensityGrid::gaussian(axes, &gaussian(cov)?).map_err(core_err),
        DensitySpec::Mixture(parts) => {
            let mut comps = Vec::with_capacity(parts.len());
            for (w, mu, cov) in parts {
                if mu.len() != n {
                    return Err(format!("mixture mean {mu:?} is not in dimension {n}"));
                }
                comps.push((*w, mu.clone(), gaussian(cov)?));
            }
            DensityGrid::gaussian_mixture(axes, &comps).map_err(core_err)
        }
        DensitySpec::File(path) => {
            let g = load_grid(path, n)?;
            DensityGrid::new(g.axes, g.values).map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

struct VerifyData {
    density: Option<Result<DensityGrid, String>>,
    axes: Option<Vec<Axis>>,
}

fn density_for(p: &Prepared, settings: &Settings) -> VerifyData {
    let axes = settings.density_axes(p.inst.n);
    let density = match (&p.inst.density, &axes) {
        (Some(DensitySpec::File(path)), _) => Some(build_density(&DensitySpec::File(path.clone()), p.inst.n, Vec::new())),
        (Some(spec), Some(ax)) => Some(build_density(spec, p.inst.n, ax.clone())),
        (Some(_), None) => Some(Err(format!("grid checks support n ≤ 3, got n = {}", p.inst.n))),
        (None, _) => None,
    };
    VerifyData { density, axes }
}

/// Either the density or the check to report in its place.
fn need_density(data: &VerifyData) -> Result<&DensityGrid, Check> {
    match &data.density {
        None => Err(Check::skipped("no density in the instance")),
        Some(Err(e)) => Err(Check::error(format!("density: {e}"))),
        Some(Ok(f)) => Ok(f),
    }
}

fn entropy_check(a: &SpanningFamily, c: &WeightVector, d: f64, data: &VerifyData, tol: f64) -> Check {
    let f = match need_density(data) {
        Ok(f) => f,
        Err(chk) => return chk,
    };
    match entropy::subadditivity_gap(f, a, c) {
        Ok(gap) => Check::measured(gap, d, d - gap, tol, "absolute", describe_axes(f.axes())),
        Err(e) => Check::error(e.to_string()),
    }
}

fn build_factors(p: &Prepared, a: &SpanningFamily, data: &VerifyData, settings: &Settings) -> Result<FactorSet, Check> {
    let factors = match &p.inst.factors {
        None => return Err(Check::skipped("no factors in the instance")),
        Some(FactorSpec::Marginals) => {
            let f = match &data.density {
                None => return Err(Check::skipped("marginal factors need a density")),
                Some(Err(e)) => return Err(Check::error(format!("density: {e}"))),
                Some(Ok(f)) => f,
            };
            let mut out = Vec::with_capacity(a.m());
            for j in 0..a.m() {
                let col: Vec<f64> = a.column(j).iter().cloned().collect();
                let marg = entropy::marginal(f, &col).map_err(|e| Check::error(e.to_string()))?;
                out.push(GridFunction::from(&marg.grid));
            }
            out
        }
        Some(FactorSpec::Gaussian(vars)) => {
            let mut out = Vec::with_capacity(vars.len());
            for (j, &v) in vars.iter().enumerate() {
                if !(v > 0.0) {
                    return Err(Check::error(format!("factor variance v_{} = {v} must be positive", j + 1)));
                }
                let norm = (2.0 * std::f64::consts::PI * v).sqrt();
                out.push(GridFunction::sample(settings.grid_1d, |t| (-t * t / (2.0 * v)).exp() / norm));
            }
            out
        }
        Some(FactorSpec::Files(paths)) => {
            let mut out = Vec::with_capacity(paths.len());
            for path in paths {
                let g = load_grid(path, 1).map_err(Check::error)?;
                out.push(GridFunction::new(g.axes[0], g.values).map_err(|e| Check::error(format!("{}: {e}", path.display())))?);
            }
            out
        }
    };
    FactorSet::new(factors).map_err(|e| Check::error(e.to_string()))
}

fn bl_check(p: &Prepared, a: &SpanningFamily, c: &WeightVector, d: f64, data: &VerifyData, settings: &Settings) -> Check {
    let Some(grid) = &data.axes else {
        return Check::skipped(format!("grid checks support n ≤ 3, got n = {}", a.n()));
    };
    let set = match build_factors(p, a, data, settings) {
        Ok(s) => s,
        Err(chk) => return chk,
    };
    match blverify::bl_check_with_constant(a, c, &set, grid, d) {
        Ok(r) => Check::measured(r.lhs, r.rhs, 1.0 - r.ratio, p.tol.bl, "relative", describe_axes(grid)),
        Err(e) => Check::error(e.to_string()),
    }
}

const NOT_TIGHT: &str = "needs unit vectors forming a weighted tight frame";

fn fisher_check(a: &SpanningFamily, c: &WeightVector, data: &VerifyData, tol: f64, scan: bool) -> (Check, Option<HeatScan>) {
    if entropy::check_tight_frame(a, c).is_err() {
        return (Check::skipped(NOT_TIGHT), None);
    }
    let f = match need_density(data) {
        Ok(f) => f,
        Err(chk) => return (chk, None),
    };
    let mut check = match entropy::fisher_superadditivity_grid(f, a, c, tol) {
        Ok(r) => Check::measured(r.lhs, r.rhs, 1.0 - r.lhs / r.rhs, tol, "relative", describe_axes(f.axes())),
        Err(e) => return (Check::error(e.to_string()), None),
    };
    let heat = if scan {
        match entropy::heat_monotonicity_scan(f, a, c, &HEAT_TIMES) {
            Ok(h) => Some(h),
            Err(e) => {
                check.note = Some(format!("heat scan failed: {e}"));
                None
            }
        }
    } else {
        None
    };
    (check, heat)
}

fn eigen_check(p: &Prepared, a: &SpanningFamily, c: &WeightVector, settings: &Settings) -> Check {
    let Some(spec) = &p.inst.potentials else {
        return Check::skipped("no potentials in the instance");
    };
    if a.n() != 2 {
        return Check::skipped(format!("eigenvalue checks need a planar family, got n = {}", a.n()));
    }
    if entropy::check_tight_frame(a, c).is_err() {
        return Check::skipped(NOT_TIGHT);
    }
    let axis1 = settings.eigen_axis();
    let vs: Result<Vec<Potential>, String> = match spec {
        PotentialSpec::Quadratic(bs) => bs
            .iter()
            .map(|&b| Potential::sample(vec![axis1], |x| -b * x[0] * x[0]).map_err(core_err))
            .collect(),
        PotentialSpec::Files(paths) => paths
            .iter()
            .map(|path| {
                let g = load_grid(path, 1)?;
                Potential::new(g.axes, g.values).map_err(|e| format!("{}: {e}", path.display()))
            })
            .collect(),
    };
    let vs = match vs {
        Ok(v) => v,
        Err(e) => return Check::error(e),
    };
    let grid = [settings.grid_2d; 2];
    match spectral::eigen_subadditivity_check(a, c, &vs, &grid, Some(axis1), &SpectralOptions::default()) {
        Ok(r) => Check::measured(
            r.lhs,
            r.rhs,
            r.margin,
            p.tol.eigen,
            "absolute",
            format!("{}; 1-dim {}", describe_axes(&grid), describe_axes(&[axis1])),
        ),
        Err(e) => Check::error(e.to_string()),
    }
}

fn verify_exit(v: &VerifySection) -> i32 {
    let verdicts: Vec<Verdict> = v.checks().map(|(_, c)| c.verdict).collect();
    if verdicts.iter().any(|&x| x == Verdict::Error || x == Verdict::Violated) {
        EXIT_ERROR
    } else if verdicts.contains(&Verdict::Inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn skipped_blocks(which: Which, note: &str) -> VerifySection {
    let pick = |b| which.wants(b).then(|| Check::skipped(note));
    VerifySection { entropy: pick(Which::Entropy), bl: pick(Which::Bl), fisher: pick(Which::Fisher), eigen: pick(Which::Eigen) }
}

/// Runs one command on one instance. `Err` means the instance could not be
/// processed at all.
pub fn run(inst: &Instance, settings: &Settings, cmd: Command) -> Result<Outcome, String> {
    let p = prepare(inst, settings)?;
    let mut report = Report::new(cmd.name(), &inst.name, settings.timestamp);
    let feas = feasibility_section(&p)?;
    let feasible = feas.feasible();
    report.feasibility = Some(feas);
    if !feasible {
        if cmd != Command::Feasibility {
            report.constant = Some(infinite_constant(p.tol.eq));
        }
        if let Command::Verify(which) = cmd {
            report.verify = Some(skipped_blocks(which, "instance is infeasible"));
        }
        return Ok(Outcome { report, exit: EXIT_INFEASIBLE, heat: None });
    }
    let (Some(a), Some(c)) = (&p.family, &p.weights) else {
        return Err("feasible instance without a spanning family".into());
    };
    if cmd == Command::Feasibility {
        return Ok(Outcome { report, exit: EXIT_OK, heat: None });
    }
    let constant = constant_section(a, c, p.tol.eq)?;
    let d = constant.d;
    report.constant = Some(constant);
    let mut heat = None;
    let mut exit = EXIT_OK;
    match cmd {
        Command::Frame => report.frame = Some(frame_section(a, c)?),
        Command::Extremizers => report.extremizers = Some(extremizer_section(a, c)?),
        Command::Verify(which) => {
            report.frame = Some(frame_section(a, c)?);
            report.extremizers = Some(extremizer_section(a, c)?);
            let data = if which.wants(Which::Entropy) || which.wants(Which::Bl) || which.wants(Which::Fisher) {
                density_for(&p, settings)
            } else {
                VerifyData { density: None, axes: None }
            };
            let mut v = VerifySection::default();
            if which.wants(Which::Entropy) {
                v.entropy = Some(entropy_check(a, c, d, &data, p.tol.entropy));
            }
            if which.wants(Which::Bl) {
                v.bl = Some(bl_check(&p, a, c, d, &data, settings));
            }
            if which.wants(Which::Fisher) {
                let (chk, h) = fisher_check(a, c, &data, p.tol.fisher, settings.heat_scan);
                v.fisher = Some(chk);
                heat = h;
            }
            if which.wants(Which::Eigen) {
                v.eigen = Some(eigen_check(&p, a, c, settings));
            }
            exit = verify_exit(&v);
            report.verify = Some(v);
        }
        Command::Feasibility | Command::Constant => {}
    }
    Ok(Outcome { report, exit, heat })
}
