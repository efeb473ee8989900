//! Numerical checks of the Brascamp–Lieb inequality
//! `∫ Π f_j(a_j·x) dx ≤ e^D Π (∫ f_j^{1/c_j})^{c_j}` and of its entropy dual,
//! with one-dimensional factors sampled on grids.

use crate::entropy::{self, Axis, DensityGrid};
use crate::error::{Error, Result};
use crate::family::{SpanningFamily, WeightVector};
use crate::gaussopt;

/// Relative discretization budget for the inequality checks.
pub const BL_TOL: f64 = 2e-3;
/// Boundary share of the integral above which the box is considered too small.
pub const TRUNCATION_TOL: f64 = 1e-4;

/// A function on ℝ sampled at the cell centers of an axis, linearly
/// interpolated in between and zero (or `−∞` for log-factors) outside.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(axis: Axis, values: Vec<f64>) -> Result<Self> {
        if values.len() != axis.count {
            return Err(Error::input(format!("{} values for {} cells", values.len(), axis.count)));
        }
        Ok(GridFunction { axis, values })
    }

    pub fn sample(axis: Axis, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..axis.count).map(|i| f(axis.center(i))).collect();
        GridFunction { axis, values }
    }

    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let s = (x - self.axis.lo) / self.axis.h() - 0.5;
        let n = self.axis.count;
        if !(s >= 0.0 && s <= (n - 1) as f64) {
            return None;
        }
        let i = (s.floor() as usize).min(n - 2);
        Some((i, s - i as f64))
    }

    /// Linear interpolation, zero outside the sampled centers.
    pub fn eval(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some((i, fr)) => self.values[i] * (1.0 - fr) + self.values[i + 1] * fr,
            None => 0.0,
        }
    }

    /// Linear interpolation of a log-density; `−∞` outside or next to a `−∞` node.
    pub fn eval_log(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some((i, fr)) => {
                let (u, v) = (self.values[i], self.values[i + 1]);
                if fr == 0.0 {
                    u
                } else if u == f64::NEG_INFINITY || v == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    u * (1.0 - fr) + v * fr
                }
            }
            None => f64::NEG_INFINITY,
        }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.axis.h()
    }

    /// `(∫ f^{1/c})^c`, with `0^{1/c} = 0`; `c = 0` gives `sup f`.
    pub fn lp_norm_power(&self, c: f64) -> f64 {
        if c == 0.0 {
            return self.values.iter().cloned().fold(0.0, f64::max);
        }
        let s: f64 = self.values.iter().filter(|&&v| v > 0.0).map(|&v| v.powf(1.0 / c)).sum();
        (s * self.axis.h()).powf(c)
    }

    /// `ln ∫ e^φ` for a log-factor.
    pub fn log_integral_exp(&self) -> f64 {
        let max = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let s: f64 = self.values.iter().map(|&v| (v - max).exp()).sum();
        max + (s * self.axis.h()).ln()
    }
}

impl From<&DensityGrid> for GridFunction {
    fn from(g: &DensityGrid) -> Self {
        GridFunction { axis: g.axes()[0], values: g.values().to_vec() }
    }
}

/// The factors `f_1, …, f_m`, nonnegative and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet(Vec<GridFunction>);

impl FactorSet {
    pub fn new(factors: Vec<GridFunction>) -> Result<Self> {
        for (j, f) in factors.iter().enumerate() {
            if f.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::input(format!("factor f_{} has a negative or non-finite value", j + 1)));
            }
        }
        Ok(FactorSet(factors))
    }

    pub fn factors(&self) -> &[GridFunction] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn cell_centers(grid: &[Axis]) -> Result<(Vec<Vec<f64>>, Vec<bool>, f64)> {
    if grid.is_empty() || grid.len() > 3 {
        return Err(Error::input(format!("integration grids have dimension 1 to 3, got {}", grid.len())));
    }
    let total: usize = grid.iter().map(|a| a.count).product();
    let mut points = Vec::with_capacity(total);
    let mut boundary = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut x = vec![0.0; grid.len()];
        let mut edge = false;
        for k in (0..grid.len()).rev() {
            let i = rem % grid[k].count;
            rem /= grid[k].count;
            x[k] = grid[k].center(i);
            edge |= i == 0 || i + 1 == grid[k].count;
        }
        points.push(x);
        boundary.push(edge);
    }
    Ok((points, boundary, grid.iter().map(Axis::h).product()))
}

fn project(a: &SpanningFamily, j: usize, x: &[f64]) -> f64 {
    a.matrix().column(j).iter().zip(x).map(|(a, x)| a * x).sum()
}

/// `∫ Π_j f_j(a_j·x) dx` as a Riemann sum over `grid`.
pub fn bl_lhs(a: &SpanningFamily, factors: &FactorSet, grid: &[Axis]) -> Result<f64> {
    if factors.len() != a.m() || grid.len() != a.n() {
        return Err(Error::input("family, factors and grid have inconsistent sizes"));
    }
    let (points, boundary, vol) = cell_centers(grid)?;
    let mut total = 0.0;
    let mut edge = 0.0;
    for (x, &on_edge) in points.iter().zip(&boundary) {
        let mut p = 1.0;
        for (j, f) in factors.factors().iter().enumerate() {
            p *= f.eval(project(a, j, x));
            if p == 0.0 {
                break;
            }
        }
        total += p;
        if on_edge {
            edge += p;
        }
    }
    if total > 0.0 && edge > TRUNCATION_TOL * total {
        return Err(Error::Accuracy(format!(
            "boundary cells carry {:.2e} of the integral; enlarge the box",
            edge / total
        )));
    }
    Ok(total * vol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Strict inequality beyond the discretization budget.
    Holds,
    /// Ratio within the budget of 1.
    Equality,
    /// Apparent violation smaller than ten budgets; refine the grid.
    Inconclusive,
    Violated,
}

fn classify(ratio: f64, tol: f64) -> Verdict {
    if (ratio - 1.0).abs() <= tol {
        Verdict::Equality
    } else if ratio < 1.0 {
        Verdict::Holds
    } else if ratio <= 1.0 + 10.0 * tol {
        Verdict::Inconclusive
    } else {
        Verdict::Violated
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BLReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub d: f64,
    pub verdict: Verdict,
    /// `ratio ≤ 1 + tol`
    pub holds: bool,
}

fn finite_constant(a: &SpanningFamily, c: &WeightVector) -> Result<f64> {
    let d = gaussopt::constant(a, c)?.d;
    if !d.is_finite() {
        return Err(Error::Precondition("the constant is infinite for these weights".into()));
    }
    Ok(d)
}

/// Evaluates both sides of the inequality with the sharp constant.
pub fn bl_check(a: &SpanningFamily, c: &WeightVector, factors: &FactorSet, grid: &[Axis]) -> Result<BLReport> {
    if c.len() != a.m() {
        return Err(Error::input(format!("{} vectors but {} weights", a.m(), c.len())));
    }
    let d = finite_constant(a, c)?;
    bl_check_with_constant(a, c, factors, grid, d)
}

/// As [`bl_check`] with a precomputed constant.
pub fn bl_check_with_constant(
    a: &SpanningFamily,
    c: &WeightVector,
    factors: &FactorSet,
    grid: &[Axis],
    d: f64,
) -> Result<BLReport> {
    let lhs = bl_lhs(a, factors, grid)?;
    let norms: f64 = factors.factors().iter().enumerate().map(|(j, f)| f.lp_norm_power(c[j])).product();
    let rhs = d.exp() * norms;
    let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(BLReport { lhs, rhs, ratio, d, verdict: classify(ratio, BL_TOL), holds: ratio <= 1.0 + BL_TOL })
}

/// The density proportional to `exp(Σ c_j φ_j(a_j·x))` on `grid`.
pub fn duality_density(a: &SpanningFamily, c: &WeightVector, log_factors: &[GridFunction], grid: &[Axis]) -> Result<DensityGrid> {
    if log_factors.len() != a.m() || c.len() != a.m() || grid.len() != a.n() {
        return Err(Error::input("family, weights, log-factors and grid have inconsistent sizes"));
    }
    let (points, _, _) = cell_centers(grid)?;
    let phi: Vec<f64> = points
        .iter()
        .map(|x| {
            (0..a.m())
                .filter(|&j| c[j] > 0.0)
                .map(|j| c[j] * log_factors[j].eval_log(project(a, j, x)))
                .sum()
        })
        .collect();
    let max = phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return Err(Error::Accuracy("exp(phi) vanishes on the whole grid".into()));
    }
    let values: Vec<f64> = phi.iter().map(|p| (p - max).exp()).collect();
    let vol: f64 = grid.iter().map(Axis::h).product();
    let z: f64 = values.iter().sum::<f64>() * vol;
    DensityGrid::new(grid.to_vec(), values.into_iter().map(|v| v / z).collect())
        .map_err(|e| Error::Accuracy(format!("exp(phi) is not captured by the box: {e}")))
}

/// The two inequalities behind the entropy dual for the density built by [`duality_density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityChain {
    /// `L = Σ c_j (⟨f_{(a_j)}, φ_j⟩ − ln ∫ e^{φ_j})`
    pub legendre_sum: f64,
    /// `S(f)`
    pub entropy: f64,
    /// `Σ c_j S(f_{(a_j)})`
    pub marginal_entropy: f64,
    pub d: f64,
    /// `L ≤ S(f) + D` (the inequality itself, through `ln ∫ e^φ`).
    pub bl_step: bool,
    /// `L ≤ Σ c_j S(f_{(a_j)})` (Gibbs).
    pub gibbs_step: bool,
}

impl DualityChain {
    pub fn gap(&self) -> f64 {
        self.marginal_entropy - self.entropy
    }
}

pub fn duality_chain(a: &SpanningFamily, c: &WeightVector, log_factors: &[GridFunction], grid: &[Axis], slack: f64) -> Result<DualityChain> {
    let d = finite_constant(a, c)?;
    let f = duality_density(a, c, log_factors, grid)?;
    let (points, _, vol) = cell_centers(grid)?;
    let mut legendre = 0.0;
    for j in 0..a.m() {
        if c[j] == 0.0 {
            continue;
        }
        // ⟨f_{(a_j)}, φ_j⟩ = ∫ f(x) φ_j(a_j·x) dx
        let pairing: f64 = points
            .iter()
            .zip(f.values())
            .filter(|(_, &v)| v > 0.0)
            .map(|(x, &v)| v * log_factors[j].eval_log(project(a, j, x)))
            .sum::<f64>()
            * vol;
        legendre += c[j] * (pairing - log_factors[j].log_integral_exp());
    }
    let s = entropy::entropy(&f)?;
    let mut marg = 0.0;
    for j in 0..a.m() {
        if c[j] > 0.0 {
            let col: Vec<f64> = a.column(j).iter().cloned().collect();
            marg += c[j] * entropy::entropy(&entropy::marginal(&f, &col)?.grid)?;
        }
    }
    Ok(DualityChain {
        legendre_sum: legendre,
        entropy: s,
        marginal_entropy: marg,
        d,
        bl_step: legendre <= s + d + slack,
        gibbs_step: legendre <= marg + slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualityReport {
    /// `sup|f − e^{−D} Π f_{(a_j)}(a_j·x)^{c_j}| / sup f`
    pub product_residual: f64,
    /// Largest relative sup-norm change of the marginals after rebuilding `f` from them.
    pub marginal_residual: f64,
    pub d: f64,
}

/// Tests whether `f` factors through its own marginals as an extremizer must.
pub fn equality_correspondence(a: &SpanningFamily, c: &WeightVector, f: &DensityGrid) -> Result<EqualityReport> {
    if f.dim() != a.n() || c.len() != a.m() {
        return Err(Error::input("density, family and weights have inconsistent sizes"));
    }
    let d = finite_constant(a, c)?;
    let grid = f.axes().to_vec();
    let (points, _, vol) = cell_centers(&grid)?;
    let active: Vec<usize> = (0..a.m()).filter(|&j| c[j] > 0.0).collect();
    let mut margs = Vec::new();
    for &j in &active {
        let col: Vec<f64> = a.column(j).iter().cloned().collect();
        margs.push(GridFunction::from(&entropy::marginal(f, &col)?.grid));
    }
    let rebuilt: Vec<f64> = points
        .iter()
        .map(|x| {
            let mut p = (-d).exp();
            for (k, &j) in active.iter().enumerate() {
                p *= margs[k].eval(project(a, j, x)).powf(c[j]);
            }
            p
        })
        .collect();
    let fmax = f.values().iter().cloned().fold(0.0, f64::max);
    let product_residual = f
        .values()
        .iter()
        .zip(&rebuilt)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
        / fmax;

    let z: f64 = rebuilt.iter().sum::<f64>() * vol;
    if !(z > 0.0) {
        return Ok(EqualityReport { product_residual, marginal_residual: f64::INFINITY, d });
    }
    let g = DensityGrid::new(grid, rebuilt.into_iter().map(|v| v / z).collect())
        .map_err(|e| Error::Accuracy(format!("rebuilt density leaves the box: {e}")))?;
    let mut marginal_residual: f64 = 0.0;
    for (k, &j) in active.iter().enumerate() {
        let col: Vec<f64> = a.column(j).iter().cloned().collect();
        let again = entropy::marginal(&g, &col)?.grid;
        let orig = &margs[k];
        let peak = orig.values.iter().cloned().fold(0.0, f64::max);
        let diff = (0..orig.axis.count)
            .map(|i| {
                let t = orig.axis.center(i);
                (again.eval_1d(t) - orig.values[i]).abs()
            })
            .fold(0.0, f64::max);
        marginal_residual = marginal_residual.max(diff / peak);
    }
    Ok(EqualityReport { product_residual, marginal_residual, d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussopt::GaussianSpec;
    use crate::linops::Mat;
    use std::f64::consts::PI;

    fn mercedes() -> SpanningFamily {
        let s = 3f64.sqrt() / 2.0;
        SpanningFamily::from_columns(2, &[vec![1.0, 0.0], vec![-0.5, s], vec![-0.5, -s]]).unwrap()
    }

    fn ax(lo: f64, hi: f64, n: usize) -> Axis {
        Axis::new(lo, hi, n).unwrap()
    }

    fn gauss_factor(axis: Axis, var: f64) -> GridFunction {
        GridFunction::sample(axis, |t| (-t * t / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
    }

    #[test]
    fn fubini_case() {
        let id = SpanningFamily::new(Mat::identity(2, 2)).unwrap();
        let c = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let line = ax(-10.0, 10.0, 2001);
        let fs = FactorSet::new(vec![gauss_factor(line, 1.0), gauss_factor(line, 2.0)]).unwrap();
        let grid = [ax(-9.0, 9.0, 180), ax(-12.0, 12.0, 240)];
        let r = bl_check(&id, &c, &fs, &grid).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-3, "{}", r.ratio);
        assert_eq!(r.verdict, Verdict::Equality);
        let zero = FactorSet::new(vec![GridFunction::sample(line, |_| 0.0), gauss_factor(line, 1.0)]).unwrap();
        assert_eq!(bl_lhs(&id, &zero, &grid).unwrap(), 0.0);
    }

    #[test]
    fn equiangular_lhs_closed_form() {
        let line = ax(-8.0, 8.0, 1601);
        let f = GridFunction::sample(line, |t| (-t * t).exp());
        let fs = FactorSet::new(vec![f.clone(), f.clone(), f]).unwrap();
        let grid = [ax(-6.0, 6.0, 240), ax(-6.0, 6.0, 240)];
        let lhs = bl_lhs(&mercedes(), &fs, &grid).unwrap();
        // Σ u_j u_jᵗ = (3/2) Id, so the integral is π / (3/2)
        assert!((lhs / (2.0 * PI / 3.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn truncation_is_detected() {
        let id = SpanningFamily::new(Mat::identity(2, 2)).unwrap();
        let line = ax(-10.0, 10.0, 2001);
        let fs = FactorSet::new(vec![gauss_factor(line, 1.0), gauss_factor(line, 1.0)]).unwrap();
        assert!(matches!(bl_lhs(&id, &fs, &[ax(-2.0, 2.0, 40), ax(-2.0, 2.0, 40)]), Err(Error::Accuracy(_))));
    }

    #[test]
    fn ratio_is_homogeneous() {
        let c = WeightVector::new(vec![2.0 / 3.0; 3]).unwrap();
        let line = ax(-10.0, 10.0, 1001);
        let f1 = GridFunction::sample(line, |t| (-(t - 1.0).powi(2)).exp() + 0.5 * (-(t + 1.5).powi(2)).exp());
        let f2 = gauss_factor(line, 1.0);
        let grid = [ax(-7.0, 7.0, 140), ax(-7.0, 7.0, 140)];
        let base = bl_check(&mercedes(), &c, &FactorSet::new(vec![f1.clone(), f2.clone(), f2.clone()]).unwrap(), &grid).unwrap();
        let scaled = GridFunction::new(line, f1.values.iter().map(|v| 3.7 * v).collect()).unwrap();
        let other = bl_check(&mercedes(), &c, &FactorSet::new(vec![scaled, f2.clone(), f2]).unwrap(), &grid).unwrap();
        assert!((base.ratio - other.ratio).abs() < 1e-12);
        assert!(base.holds);
    }

    #[test]
    fn duality_density_examples() {
        let id = SpanningFamily::new(Mat::identity(2, 2)).unwrap();
        let c = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let line = ax(-10.0, 10.0, 2001);
        let logs = vec![GridFunction::sample(line, |t| -t * t / 2.0); 2];
        let grid = [ax(-8.0, 8.0, 160), ax(-8.0, 8.0, 160)];
        let f = duality_density(&id, &c, &logs, &grid).unwrap();
        let g = DensityGrid::gaussian(grid.to_vec(), &GaussianSpec::new(Mat::identity(2, 2)).unwrap()).unwrap();
        assert!(f.values().iter().zip(g.values()).all(|(u, v)| (u - v).abs() < 1e-6));

        // equiangular frame with φ_j = −t²: exponent −(2/3)·(3/2)|x|² = −|x|²
        let c3 = WeightVector::new(vec![2.0 / 3.0; 3]).unwrap();
        let logs = vec![GridFunction::sample(line, |t| -t * t); 3];
        let f = duality_density(&mercedes(), &c3, &logs, &grid).unwrap();
        let (_, cov) = f.moments();
        assert!((cov[(0, 0)] - 0.5).abs() < 1e-4 && cov[(0, 1)].abs() < 1e-4);

        let chain = duality_chain(&mercedes(), &c3, &logs, &grid, 5e-3).unwrap();
        assert!(chain.bl_step && chain.gibbs_step);
    }

    #[test]
    fn equality_cases() {
        let c3 = WeightVector::new(vec![2.0 / 3.0; 3]).unwrap();
        let grid = vec![ax(-8.0, 8.0, 200), ax(-8.0, 8.0, 200)];
        let iso = DensityGrid::gaussian(grid.clone(), &GaussianSpec::new(Mat::identity(2, 2)).unwrap()).unwrap();
        let r = equality_correspondence(&mercedes(), &c3, &iso).unwrap();
        assert!(r.product_residual < 1e-2 && r.marginal_residual < 1e-2, "{r:?}");

        let id = SpanningFamily::new(Mat::identity(2, 2)).unwrap();
        let c = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let corr = GaussianSpec::new(Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap();
        let r = equality_correspondence(&id, &c, &DensityGrid::gaussian(grid, &corr).unwrap()).unwrap();
        assert!(r.product_residual > 0.05);
    }
}
