//! The Gaussian side of the problem: the log-determinant potential
//! `Φ_A(t) = ln det(Σ e^{t_j} a_j a_jᵗ)`, its concave dual objective
//! `F(t) = Σ c_j t_j − Φ_A(t)`, and everything built on top of it.
//!
//! The constant satisfies `D(A,c) = ½ sup F − ½ Σ c_j ln c_j`. Interior
//! instances are solved by damped Newton ascent on `F`; boundary instances
//! are split along a minimal critical subset and solved recursively.

use crate::error::{Error, Result};
use crate::family::{
    self, feasibility, positive_support, split, FeasibilityReport, ReducibilityReport, SpanningFamily,
    Subset, WeightVector, DEFAULT_EQ_TOL,
};
use crate::linops::{self, Mat, Subspace, Vector};

const LN_2PI_E: f64 = 2.837_877_066_409_345; // ln(2πe)

/// Cholesky data of `(AS)(AS)ᵗ` at a scaling point, with the per-column
/// whitened vectors `w_j = L⁻¹ s_j a_j`.
struct Factor {
    logdet: f64,
    w: Mat,
}

impl Factor {
    fn new(a: &Mat, t: &[f64]) -> Result<Self> {
        if t.len() != a.ncols() {
            return Err(Error::input(format!("{} scalings for {} vectors", t.len(), a.ncols())));
        }
        if let Some(bad) = t.iter().find(|x| !x.is_finite()) {
            return Err(Error::NumericDomain { what: "scaling point is not finite".into(), value: *bad });
        }
        // Φ(t) = n·t_max + Φ(t − t_max) keeps every exponential ≤ 1
        let shift = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut scaled = a.clone();
        for (j, &tj) in t.iter().enumerate() {
            scaled.column_mut(j).scale_mut(((tj - shift) / 2.0).exp());
        }
        let gram = &scaled * scaled.transpose();
        let Some(ch) = gram.clone().cholesky() else {
            let spread = shift - t.iter().cloned().fold(f64::INFINITY, f64::min);
            return Err(Error::NumericDomain {
                what: "Gram matrix is numerically singular at this scaling (spread of t reported)".into(),
                value: spread,
            });
        };
        let l = ch.l();
        let n = a.nrows();
        let logdet = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>() + n as f64 * shift;
        let w = l.solve_lower_triangular(&scaled).ok_or_else(|| Error::NumericDomain {
            what: "triangular solve failed".into(),
            value: shift,
        })?;
        Ok(Factor { logdet, w })
    }

    fn grad(&self) -> Vec<f64> {
        (0..self.w.ncols()).map(|j| self.w.column(j).norm_squared()).collect()
    }

    fn hess(&self) -> Mat {
        let p = self.w.transpose() * &self.w;
        let m = p.nrows();
        Mat::from_fn(m, m, |j, k| {
            let diag = if j == k { p[(j, j)] } else { 0.0 };
            diag - p[(j, k)] * p[(j, k)]
        })
    }
}

/// `Φ_A(t) = ln det(Σ_j e^{t_j} a_j a_jᵗ)`.
pub fn phi(a: &SpanningFamily, t: &[f64]) -> Result<f64> {
    Ok(Factor::new(a.matrix(), t)?.logdet)
}

/// `∂Φ_A/∂t_j = e^{t_j} a_jᵗ (A e^T Aᵗ)⁻¹ a_j`; entries lie in `[0,1]` and sum to `n`.
pub fn phi_grad(a: &SpanningFamily, t: &[f64]) -> Result<Vec<f64>> {
    Ok(Factor::new(a.matrix(), t)?.grad())
}

/// Hessian `diag(g) − P∘P` with `P` the projection `(AS)ᵗ((AS)(AS)ᵗ)⁻¹(AS)`.
pub fn phi_hess(a: &SpanningFamily, t: &[f64]) -> Result<Mat> {
    Ok(Factor::new(a.matrix(), t)?.hess())
}

/// `F(t) = Σ c_j t_j − Φ_A(t)`.
pub fn gap_objective(a: &SpanningFamily, c: &WeightVector, t: &[f64]) -> Result<f64> {
    let phi = phi(a, t)?;
    Ok(c.as_slice().iter().zip(t).map(|(c, t)| c * t).sum::<f64>() - phi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOptions {
    /// Stop once `‖c − ∇Φ‖_∞` is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// `‖t‖_∞` beyond which the iterates are treated as escaping to infinity.
    pub recession_cap: f64,
    /// Slack for the subset inequalities.
    pub eq_tol: f64,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions { tol: 1e-10, max_iter: 200, recession_cap: 60.0, eq_tol: DEFAULT_EQ_TOL }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussOptResult {
    /// Best scaling point found, gauge-fixed to `Σ t_j = 0`.
    pub t_star: Vec<f64>,
    /// `F(t_star)`, the best value found for `sup F`.
    pub value: f64,
    /// `‖c − ∇Φ(t_star)‖_∞`.
    pub grad_norm: f64,
    pub converged: bool,
    /// True when the supremum is a maximum (converged and totally reducible).
    pub attained: bool,
    pub iterations: usize,
    /// Unit direction `1_J − mean` along which `F` does not decrease, when the sup is not attained.
    pub recession: Option<Vec<f64>>,
}

fn residual_inf(c: &[f64], g: &[f64]) -> f64 {
    c.iter().zip(g).map(|(c, g)| (c - g).abs()).fold(0.0, f64::max)
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn check_gap_input(a: &SpanningFamily, c: &WeightVector, eq_tol: f64) -> Result<()> {
    if a.m() != c.len() {
        return Err(Error::input(format!("{} vectors but {} weights", a.m(), c.len())));
    }
    if let Some(j) = (0..c.len()).find(|&j| c[j] <= 0.0) {
        return Err(Error::Precondition(format!("weight c_{} is zero; drop it before optimizing", j + 1)));
    }
    if (c.sum() - a.n() as f64).abs() > eq_tol {
        return Err(Error::ScalingViolated { sum: c.sum(), dim: a.n() });
    }
    Ok(())
}

/// Newton decrement below which a stalled line search counts as converged:
/// the remaining gain in `F` is then under this amount.
const STALL_DECREMENT: f64 = 1e-12;

/// Maximizes `F(t) = Σ c_j t_j − Φ_A(t)` by damped Newton ascent with the
/// gauge `Σ t_j = 0`.
pub fn maximize_gap(a: &SpanningFamily, c: &WeightVector, opts: &GapOptions) -> Result<GaussOptResult> {
    check_gap_input(a, c, opts.eq_tol)?;
    let m = a.m();
    let cs = c.as_slice();
    let eval = |t: &[f64]| -> Result<(f64, Factor)> {
        let fac = Factor::new(a.matrix(), t)?;
        let f = cs.iter().zip(t).map(|(c, t)| c * t).sum::<f64>() - fac.logdet;
        Ok((f, fac))
    };

    let mut t = vec![0.0; m];
    let (mut f, mut fac) = eval(&t)?;
    let mut grad = fac.grad();
    let mut res = residual_inf(cs, &grad);
    let mut iterations = 0;
    let mut converged = false;
    let mut receded = false;
    loop {
        if res <= opts.tol {
            converged = true;
            break;
        }
        if t.iter().any(|x| x.abs() > opts.recession_cap) {
            receded = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let r: Vec<f64> = cs.iter().zip(&grad).map(|(c, g)| c - g).collect();
        let rv = Vector::from_column_slice(&r);
        let (vals, vecs) = linops::sym_eigen(&fac.hess())?;
        let thr = 1e-12 * vals.iter().cloned().fold(1.0, f64::max);
        let mut d = Vector::zeros(m);
        let mut decrement = 0.0;
        for k in 0..m {
            let v = vecs.column(k);
            let proj = v.dot(&rv);
            // Newton on the curved directions, plain gradient on the flat ones
            let scale = if vals[k] > thr { proj / vals[k] } else { proj };
            decrement += proj * scale;
            d += v * scale;
        }
        let mut d: Vec<f64> = d.iter().cloned().collect();
        remove_mean(&mut d);
        let big = d.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if big > 10.0 {
            d.iter_mut().for_each(|x| *x *= 10.0 / big);
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = t.iter().zip(&d).map(|(t, d)| t + alpha * d).collect();
            if let Ok((f_new, fac_new)) = eval(&trial) {
                let g_new = fac_new.grad();
                let res_new = residual_inf(cs, &g_new);
                let flat = f_new >= f - 4.0 * f64::EPSILON * (1.0 + f.abs());
                if f_new > f || (flat && res_new < res) {
                    t = trial;
                    f = f_new;
                    fac = fac_new;
                    grad = g_new;
                    res = res_new;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        log::trace!("newton iteration {iterations}: F = {f:.15e}, residual = {res:.3e}, step = {alpha}");
        if !accepted {
            // F no longer changes in floating point; fine if Newton predicts no real gain either
            converged = decrement <= STALL_DECREMENT * (1.0 + f.abs());
            log::debug!("line search stalled at residual {res:e}");
            break;
        }
    }

    let structure = match family::total_reducibility(a, c, opts.eq_tol) {
        Ok(report) => Some(report),
        Err(Error::Capacity { .. }) => None,
        Err(e) => return Err(e),
    };
    let reducible = structure.as_ref().map_or(converged, |r| r.is_totally_reducible());
    let attained = converged && reducible;
    let mut recession = None;
    if !reducible {
        let cert = structure.as_ref().and_then(|r| r.certificate);
        recession = cert.map(|j| {
            let mut v: Vec<f64> = (0..m).map(|i| if j.contains(i) { 1.0 } else { 0.0 }).collect();
            remove_mean(&mut v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / norm).collect()
        });
    } else if !converged {
        let detail = if receded {
            format!("iterates escaped past |t| = {} on a totally reducible instance", opts.recession_cap)
        } else {
            format!("gradient residual {res:e} above {:e}", opts.tol)
        };
        return Err(Error::NonConvergence { iterations, detail });
    }
    Ok(GaussOptResult { t_star: t, value: f, grad_norm: res, converged, attained, iterations, recession })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantOptions {
    pub eq_tol: f64,
    pub gap: GapOptions,
    /// Recompute boundary nodes through every minimal critical subset and compare.
    pub cross_check: bool,
}

impl Default for ConstantOptions {
    fn default() -> Self {
        ConstantOptions { eq_tol: DEFAULT_EQ_TOL, gap: GapOptions::default(), cross_check: true }
    }
}

/// Spread between alternative split choices beyond which the recursion is declared broken.
const SPLIT_DISAGREEMENT: f64 = 1e-6;

/// How the constant of a (sub-)instance was obtained. Indices refer to the
/// columns of the top-level family.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitTree {
    /// One-dimensional instance, `D = −Σ c_j ln|a_j|`.
    Line { indices: Vec<usize>, d: f64 },
    /// Interior instance solved by the optimizer.
    Interior { indices: Vec<usize>, d: f64, opt: GaussOptResult },
    /// Boundary instance split along the critical subset `subset`.
    Split { subset: Subset, d: f64, inner: Box<SplitTree>, outer: Box<SplitTree> },
}

impl SplitTree {
    pub fn d(&self) -> f64 {
        match self {
            SplitTree::Line { d, .. } | SplitTree::Interior { d, .. } | SplitTree::Split { d, .. } => *d,
        }
    }

    /// Leaves in depth-first order (inner before outer).
    pub fn leaves(&self) -> Vec<&SplitTree> {
        match self {
            SplitTree::Split { inner, outer, .. } => {
                let mut out = inner.leaves();
                out.extend(outer.leaves());
                out
            }
            leaf => vec![leaf],
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SplitTree::Split { inner, outer, .. } => 1 + inner.depth().max(outer.depth()),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConstantReport {
    /// `D(A,c)`, `f64::INFINITY` when `c ∉ K_A`.
    pub d: f64,
    pub feasibility: FeasibilityReport,
    /// Zero-weight indices removed before solving.
    pub dropped: Vec<usize>,
    pub tree: Option<SplitTree>,
    /// Whether the supremum is attained (total reducibility).
    pub attained: bool,
    /// Largest disagreement seen between alternative minimal critical subsets.
    pub split_spread: f64,
}

impl ConstantReport {
    pub fn is_finite(&self) -> bool {
        self.d.is_finite()
    }
}

pub fn constant(a: &SpanningFamily, c: &WeightVector) -> Result<ConstantReport> {
    constant_with(a, c, &ConstantOptions::default())
}

pub fn constant_with(a: &SpanningFamily, c: &WeightVector, opts: &ConstantOptions) -> Result<ConstantReport> {
    let report = feasibility(a, c, opts.eq_tol)?;
    if !report.in_ka {
        return Ok(ConstantReport {
            d: f64::INFINITY,
            feasibility: report,
            dropped: Vec::new(),
            tree: None,
            attained: false,
            split_spread: 0.0,
        });
    }
    let (active, dropped) = positive_support(c, opts.eq_tol);
    let sub = SpanningFamily::with_rank_tol(a.columns_of(&active), a.rank_tol())?;
    let weights = c.restricted(&active);
    let (tree, spread) = solve(&sub, &weights, &active, opts, "root", opts.cross_check)?;
    let attained = family::total_reducibility(a, c, opts.eq_tol)?.is_totally_reducible();
    Ok(ConstantReport { d: tree.d(), feasibility: report, dropped, tree: Some(tree), attained, split_spread: spread })
}

/// The constant computed by splitting first along the critical subset `j`.
/// All weights must be positive.
pub fn constant_via(a: &SpanningFamily, c: &WeightVector, j: Subset) -> Result<SplitTree> {
    let opts = ConstantOptions { cross_check: false, ..ConstantOptions::default() };
    let idx: Vec<usize> = (0..a.m()).collect();
    Ok(solve_split(a, c, &idx, j, &opts, "root", false)?.0)
}

fn solve(
    a: &SpanningFamily,
    c: &WeightVector,
    idx: &[usize],
    opts: &ConstantOptions,
    path: &str,
    cross: bool,
) -> Result<(SplitTree, f64)> {
    if a.n() == 1 {
        let d = -(0..a.m()).map(|j| c[j] * a.matrix()[(0, j)].abs().ln()).sum::<f64>();
        return Ok((SplitTree::Line { indices: idx.to_vec(), d }, 0.0));
    }
    let report = feasibility(a, c, opts.eq_tol).map_err(|e| e.at(path))?;
    if let Some(e) = report.infeasibility(opts.eq_tol) {
        return Err(Error::Consistency(format!("sub-instance left the polytope: {e}")).at(path));
    }
    if report.critical.is_empty() {
        let opt = maximize_gap(a, c, &opts.gap).map_err(|e| e.at(path))?;
        if !opt.attained {
            return Err(Error::Consistency("interior instance did not reach its maximum".into()).at(path));
        }
        let d = 0.5 * (opt.value - c.entropy_term());
        return Ok((SplitTree::Interior { indices: idx.to_vec(), d, opt }, 0.0));
    }
    let k = report.critical[0].subset.len();
    let minimal: Vec<Subset> =
        report.critical.iter().take_while(|b| b.subset.len() == k).map(|b| b.subset).collect();
    let (tree, mut spread) = solve_split(a, c, idx, minimal[0], opts, path, cross)?;
    if cross {
        for &j in &minimal[1..] {
            let (alt, _) = solve_split(a, c, idx, j, opts, path, false)?;
            spread = spread.max((alt.d() - tree.d()).abs());
        }
        if spread > SPLIT_DISAGREEMENT {
            return Err(Error::Consistency(format!(
                "alternative critical subsets disagree by {spread:e}"
            ))
            .at(path));
        }
    }
    Ok((tree, spread))
}

fn solve_split(
    a: &SpanningFamily,
    c: &WeightVector,
    idx: &[usize],
    j: Subset,
    opts: &ConstantOptions,
    path: &str,
    cross: bool,
) -> Result<(SplitTree, f64)> {
    let s = split(a, c, j, opts.eq_tol).map_err(|e| e.at(path))?;
    let label = j.map_through(idx);
    let inner_idx: Vec<usize> = s.inner_indices.iter().map(|&q| idx[q]).collect();
    let outer_idx: Vec<usize> = s.outer_indices.iter().map(|&q| idx[q]).collect();
    let (inner, s1) = solve(&s.inner, &s.inner_weights, &inner_idx, opts, &format!("{path}/{label}"), cross)?;
    let (outer, s2) = solve(&s.outer, &s.outer_weights, &outer_idx, opts, &format!("{path}/{label}^c"), cross)?;
    let d = inner.d() + outer.d();
    Ok((SplitTree::Split { subset: label, d, inner: Box::new(inner), outer: Box::new(outer) }, s1.max(s2)))
}

/// A centered Gaussian, described by its covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    covariance: Mat,
}

impl GaussianSpec {
    pub fn new(covariance: Mat) -> Result<Self> {
        // logdet_pd checks symmetry and definiteness
        linops::logdet_pd(&covariance)?;
        Ok(GaussianSpec { covariance })
    }

    pub fn covariance(&self) -> &Mat {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }
}

/// `Σ c_j S(a_j·G) − S(G)` for a centered Gaussian `G`, without assuming `Σ c_j = n`.
pub fn gaussian_entropy_gap(a: &Mat, c: &[f64], g: &GaussianSpec) -> Result<f64> {
    if a.nrows() != g.dim() || a.ncols() != c.len() {
        return Err(Error::input("family, weights and covariance have inconsistent sizes"));
    }
    let sigma = g.covariance();
    let logdet = linops::logdet_pd(sigma)?;
    let mut acc = 0.0;
    for (j, &cj) in c.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        let aj = a.column(j);
        let q = (aj.transpose() * sigma * aj)[(0, 0)];
        if !(q > 0.0) {
            return Err(Error::NumericDomain { what: format!("marginal variance of a_{}", j + 1), value: q });
        }
        acc += cj * q.ln();
    }
    let excess = a.nrows() as f64 - c.iter().sum::<f64>();
    Ok(0.5 * (logdet - acc) + 0.5 * excess * LN_2PI_E)
}

/// `½(ln det Σ − Σ c_j ln(a_jᵗ Σ a_j))`, the entropy gap of the Gaussian when `Σ c_j = n`.
pub fn gaussian_gap(a: &SpanningFamily, c: &WeightVector, g: &GaussianSpec) -> Result<f64> {
    if (c.sum() - a.n() as f64).abs() > DEFAULT_EQ_TOL {
        return Err(Error::ScalingViolated { sum: c.sum(), dim: a.n() });
    }
    let raw = gaussian_entropy_gap(a.matrix(), c.as_slice(), g)?;
    // drop the (vanishing) ln(2πe) term so the value matches the closed form exactly
    let excess = a.n() as f64 - c.sum();
    Ok(raw - 0.5 * excess * LN_2PI_E)
}

/// Operator norm of `Σ c_j û_j û_jᵗ − Id` with `û_j = R a_j / |R a_j|`.
pub fn frame_residual(a: &SpanningFamily, c: &WeightVector, r: &Mat) -> f64 {
    let n = a.n();
    let mut acc = -Mat::identity(n, n);
    for j in 0..a.m() {
        if c[j] == 0.0 {
            continue;
        }
        let u = r * a.column(j);
        let u = &u / u.norm();
        acc += &u * u.transpose() * c[j];
    }
    linops::sym_op_norm(&acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    pub r: Mat,
    pub residual: f64,
    pub trace_r2: f64,
}

/// Covariance shape of the extremizers on one block.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockCovariance {
    /// One-dimensional block: any finite-entropy law.
    Free,
    /// Gaussian with covariance a multiple of `R_i²` (block coordinates, trace = block dimension).
    Gaussian(Mat),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremizerBlock {
    pub indices: Vec<usize>,
    pub dim: usize,
    pub covariance: BlockCovariance,
    /// Orthonormal columns spanning `T·V_{J_i}`; block coordinates are taken in this basis.
    pub basis: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremizerDescription {
    pub exists: bool,
    pub blocks: Vec<ExtremizerBlock>,
    pub zero_block: Vec<usize>,
    /// `T` with `T·V_{J_i}` mutually orthogonal.
    pub transform: Option<Mat>,
    /// Critical subset whose span sum is not direct, when no extremizer exists.
    pub certificate: Option<Subset>,
}

struct FrameParts {
    transform: Mat,
    blocks: Vec<ExtremizerBlock>,
    /// `Σ W_i R_i W_iᵗ`
    assembled: Mat,
}

fn normalize_trace_sq(r: &Mat, target: f64) -> Mat {
    let tr = (r * r).trace();
    r * (target / tr).sqrt()
}

fn frame_parts(a: &SpanningFamily, c: &WeightVector, report: &ReducibilityReport, opts: &GapOptions) -> Result<FrameParts> {
    let n = a.n();
    let mut b = Mat::zeros(n, 0);
    for block in &report.blocks {
        let q = block.span.basis();
        let start = b.ncols();
        b = b.insert_columns(start, q.ncols(), 0.0);
        b.columns_mut(start, q.ncols()).copy_from(q);
    }
    if b.ncols() != n {
        return Err(Error::Consistency(format!("block dimensions sum to {} in R^{n}", b.ncols())));
    }
    let transform = linops::inv_sqrt_pd(&(&b * b.transpose()))?;
    let mut assembled = Mat::zeros(n, n);
    let mut blocks = Vec::new();
    let mut col = 0;
    for block in &report.blocks {
        let d = block.dim();
        let w = (&transform * &b).columns(col, d).into_owned();
        col += d;
        let covariance = if d == 1 {
            assembled += &w * w.transpose();
            BlockCovariance::Free
        } else {
            let y = w.transpose() * &transform * a.columns_of(&block.indices);
            let fam = SpanningFamily::with_rank_tol(y, a.rank_tol())?;
            let cw = c.restricted(&block.indices);
            let opt = maximize_gap(&fam, &cw, opts)?;
            if !opt.attained {
                return Err(Error::Consistency(format!(
                    "block {:?} is not interior although the instance is totally reducible",
                    block.indices
                )));
            }
            let mut ys = fam.matrix().clone();
            for (j, t) in opt.t_star.iter().enumerate() {
                ys.column_mut(j).scale_mut((t / 2.0).exp());
            }
            let ri = normalize_trace_sq(&linops::inv_sqrt_pd(&(&ys * ys.transpose()))?, d as f64);
            assembled += &w * &ri * w.transpose();
            BlockCovariance::Gaussian(&ri * &ri)
        };
        blocks.push(ExtremizerBlock { indices: block.indices.clone(), dim: d, covariance, basis: w });
    }
    Ok(FrameParts { transform, blocks, assembled })
}

/// The symmetric positive definite `R` (trace `R² = n`) turning `a_j` into a weighted tight frame.
pub fn frame_matrix(a: &SpanningFamily, c: &WeightVector) -> Result<FrameMatrix> {
    let opts = GapOptions::default();
    let report = family::total_reducibility(a, c, opts.eq_tol)?;
    if !report.is_totally_reducible() {
        return Err(Error::NotTotallyReducible {
            certificate: report.certificate.unwrap_or(Subset::from_mask(0)),
        });
    }
    let parts = frame_parts(a, c, &report, &opts)?;
    let t = &parts.transform;
    let r2 = t * &parts.assembled * &parts.assembled * t;
    let r = normalize_trace_sq(&linops::sqrt_psd(&((&r2 + r2.transpose()) * 0.5))?, a.n() as f64);
    let residual = frame_residual(a, c, &r);
    let trace_r2 = (&r * &r).trace();
    Ok(FrameMatrix { r, residual, trace_r2 })
}

pub fn extremizers(a: &SpanningFamily, c: &WeightVector) -> Result<ExtremizerDescription> {
    let opts = GapOptions::default();
    let report = family::total_reducibility(a, c, opts.eq_tol)?;
    if !report.is_totally_reducible() {
        return Ok(ExtremizerDescription {
            exists: false,
            blocks: Vec::new(),
            zero_block: report.zero_block,
            transform: None,
            certificate: report.certificate,
        });
    }
    let parts = frame_parts(a, c, &report, &opts)?;
    Ok(ExtremizerDescription {
        exists: true,
        blocks: parts.blocks,
        zero_block: report.zero_block,
        transform: Some(parts.transform),
        certificate: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HadamardCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `ln rhs − ln lhs`.
    pub log_slack: f64,
    pub holds: bool,
}

/// Compares `|det T|` with `e^{D} Π_j |T a_j|^{c_j}`.
pub fn hadamard_check(a: &SpanningFamily, c: &WeightVector, t: &Mat) -> Result<HadamardCheck> {
    if t.nrows() != a.n() || t.ncols() != a.n() {
        return Err(Error::input("transform has the wrong shape"));
    }
    let ln_lhs = linops::log_abs_det(t).map_err(|_| Error::input("transform is singular"))?;
    let report = constant(a, c)?;
    if !report.is_finite() {
        return Err(Error::Precondition("the constant is infinite for these weights".into()));
    }
    let ta = t * a.matrix();
    let ln_rhs = report.d + (0..a.m()).map(|j| c[j] * ta.column(j).norm().ln()).sum::<f64>();
    Ok(HadamardCheck {
        lhs: ln_lhs.exp(),
        rhs: ln_rhs.exp(),
        log_slack: ln_rhs - ln_lhs,
        holds: ln_lhs <= ln_rhs + (1.0 + 1e-8f64).ln(),
    })
}

/// The Legendre transform `Φ_A*(c) = sup_t (c·t − Φ_A(t)) = 2D(A,c) + Σ c_j ln c_j`.
pub fn phi_star(a: &SpanningFamily, c: &WeightVector) -> Result<f64> {
    let report = constant(a, c)?;
    if let Some(e) = report.feasibility.infeasibility(DEFAULT_EQ_TOL) {
        return Err(e);
    }
    Ok(2.0 * report.d + c.entropy_term())
}

/// `∇Φ_A(0)`, the weights minimizing `Φ_A*`.
pub fn minimizing_c(a: &SpanningFamily) -> Result<WeightVector> {
    let g = phi_grad(a, &vec![0.0; a.m()])?;
    WeightVector::new(g.into_iter().map(|x| x.clamp(0.0, 1.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// The vectors miss a direction; spread variance along the missing subspace.
    SpanDeficiency,
    /// `Σ c_j ≠ n`; dilate an isotropic Gaussian.
    Dilation,
    /// A subset inequality fails; concentrate on its span.
    Subset(Subset),
}

/// A one-parameter Gaussian family along which the entropy gap is unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceWitness {
    pub kind: WitnessKind,
    /// The subspace `V`; the Gaussian has variance `λ` on `V` and 1 on `V^⊥`
    /// (for a dilation, `V` is everything and the variance is `λ²`).
    pub subspace: Subspace,
    /// Predicted `d gap / d ln λ`.
    pub predicted_slope: f64,
    pub lambdas: [f64; 2],
    pub gaps: [f64; 2],
    pub fitted_slope: f64,
    /// Fitted slope within 5% of the prediction.
    pub validated: bool,
}

/// Builds and numerically validates a divergent Gaussian family for infeasible weights.
///
/// Takes raw columns so that families failing to span are accepted.
pub fn divergence_witness(cols: &Mat, c: &WeightVector, tol: f64) -> Result<DivergenceWitness> {
    linops::check_finite(cols)?;
    let n = cols.nrows();
    if cols.ncols() != c.len() {
        return Err(Error::input(format!("{} vectors but {} weights", cols.ncols(), c.len())));
    }
    let span = linops::orthonormalize(cols)?;
    let (kind, subspace, slope) = if span.dim() < n {
        let v = linops::complement(&span)?;
        let slope = 0.5 * v.dim() as f64;
        (WitnessKind::SpanDeficiency, v, slope)
    } else if (c.sum() - n as f64).abs() > tol {
        (WitnessKind::Dilation, Subspace::from_orthonormal(Mat::identity(n, n))?, n as f64 - c.sum())
    } else {
        let fam = SpanningFamily::new(cols.clone())?;
        let report = feasibility(&fam, c, tol)?;
        let Some(v) = report.violations.first() else {
            return Err(Error::Feasible("every subset inequality holds and the weights sum to n".into()));
        };
        let space = fam.span_of(v.subset)?;
        let closure: Vec<usize> = (0..fam.m())
            .filter(|&j| space.distance(&fam.column(j)) <= 1e-9 * fam.column(j).norm())
            .collect();
        let closed = Subset::from_indices(&closure);
        let sum = c.sum_over(closed);
        (WitnessKind::Subset(closed), space, 0.5 * (v.dim as f64 - sum))
    };
    let lambdas = if slope > 0.0 { [1e2, 1e4] } else { [1e-2, 1e-4] };
    let mut gaps = [0.0; 2];
    for (k, &lam) in lambdas.iter().enumerate() {
        let cov = match kind {
            WitnessKind::Dilation => Mat::identity(n, n) * (lam * lam),
            _ => {
                let p = subspace.projector();
                &p * lam + (Mat::identity(n, n) - &p)
            }
        };
        let cov = (&cov + cov.transpose()) * 0.5;
        gaps[k] = gaussian_entropy_gap(cols, c.as_slice(), &GaussianSpec::new(cov)?)?;
    }
    let fitted = (gaps[1] - gaps[0]) / (lambdas[1].ln() - lambdas[0].ln());
    let validated = (fitted - slope).abs() <= 0.05 * slope.abs();
    Ok(DivergenceWitness { kind, subspace, predicted_slope: slope, lambdas, gaps, fitted_slope: fitted, validated })
}
