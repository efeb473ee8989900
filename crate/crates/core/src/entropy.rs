//! Densities sampled on uniform cell-centered grids in dimension 1 to 3,
//! with the functionals needed to test subadditivity numerically: entropy
//! `S(f) = ∫ f ln f`, Fisher information, marginals and heat flow.
//!
//! Values are stored row-major (the last axis varies fastest).

use crate::error::{Error, Result};
use crate::family::{SpanningFamily, WeightVector, DEFAULT_EQ_TOL};
use crate::gaussopt::GaussianSpec;
use crate::linops::{self, Mat, Vector};

/// Accepted deviation of the Riemann mass from 1.
pub const MASS_TOL: f64 = 1e-6;
/// Largest mass allowed in the outermost layer of cells.
pub const BOUNDARY_MASS_TOL: f64 = 1e-8;
/// Mass the heat kernel may push out of the box.
pub const HEAT_LEAK_TOL: f64 = 1e-9;

/// A uniformly divided interval `[lo, hi]` with `count` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || count < 3 {
            return Err(Error::input(format!("invalid axis [{lo}, {hi}] with {count} cells")));
        }
        Ok(Axis { lo, hi, count })
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.h()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    axes: Vec<Axis>,
    values: Vec<f64>,
}

impl DensityGrid {
    /// Validates mass, positivity and that the support stays inside the box.
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        let g = Self::from_parts(axes, values)?;
        let mass = g.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::input(format!("density has mass {mass}, expected 1")));
        }
        let edge = g.boundary_mass();
        if edge > BOUNDARY_MASS_TOL {
            return Err(Error::input(format!(
                "boundary cells carry mass {edge:e}; enlarge the box"
            )));
        }
        Ok(g)
    }

    /// Shape and sign checks only.
    fn from_parts(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::input(format!("grids have dimension 1 to 3, got {}", axes.len())));
        }
        let cells: usize = axes.iter().map(|a| a.count).product();
        if values.len() != cells {
            return Err(Error::input(format!("{} values for {cells} cells", values.len())));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::input(format!("density value {bad} is negative or not finite")));
        }
        Ok(DensityGrid { axes, values })
    }

    /// Samples `f` at the cell centers and rescales to unit mass.
    pub fn sample(axes: Vec<Axis>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut g = Self::from_parts(axes.clone(), vec![0.0; axes.iter().map(|a| a.count).product()])?;
        let mut x = vec![0.0; axes.len()];
        for idx in 0..g.values.len() {
            g.center_into(idx, &mut x);
            g.values[idx] = f(&x);
        }
        let mass = g.mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::input("sampled function has no positive finite mass"));
        }
        g.values.iter_mut().for_each(|v| *v /= mass);
        Self::new(g.axes, g.values)
    }

    /// Centered Gaussian with covariance `sigma`, sampled and renormalized.
    pub fn gaussian(axes: Vec<Axis>, sigma: &GaussianSpec) -> Result<Self> {
        Self::gaussian_mixture(axes, &[(1.0, vec![0.0; sigma.dim()], sigma.clone())])
    }

    /// Mixture `Σ w_k N(μ_k, Σ_k)`, sampled and renormalized.
    pub fn gaussian_mixture(axes: Vec<Axis>, parts: &[(f64, Vec<f64>, GaussianSpec)]) -> Result<Self> {
        let d = axes.len();
        let mut comps = Vec::new();
        for (w, mu, g) in parts {
            if g.dim() != d || mu.len() != d {
                return Err(Error::input("mixture component has the wrong dimension"));
            }
            let inv = g.covariance().clone().try_inverse().ok_or_else(|| Error::input("singular covariance"))?;
            let norm = w / ((2.0 * std::f64::consts::PI).powi(d as i32) * g.covariance().determinant()).sqrt();
            comps.push((norm, Vector::from_column_slice(mu), inv));
        }
        Self::sample(axes, |x| {
            let x = Vector::from_column_slice(x);
            comps
                .iter()
                .map(|(norm, mu, inv)| {
                    let y = &x - mu;
                    norm * (-0.5 * (y.transpose() * inv * &y)[(0, 0)]).exp()
                })
                .sum()
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::h).product()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].count;
        }
        s
    }

    fn multi_index(&self, mut idx: usize, out: &mut [usize]) {
        for k in (0..self.dim()).rev() {
            out[k] = idx % self.axes[k].count;
            idx /= self.axes[k].count;
        }
    }

    fn center_into(&self, idx: usize, out: &mut [f64]) {
        let mut mi = vec![0; self.dim()];
        self.multi_index(idx, &mut mi);
        for k in 0..self.dim() {
            out[k] = self.axes[k].center(mi[k]);
        }
    }

    /// Mass carried by cells touching the box boundary.
    pub fn boundary_mass(&self) -> f64 {
        let mut mi = vec![0; self.dim()];
        let mut acc = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            self.multi_index(idx, &mut mi);
            if mi.iter().zip(&self.axes).any(|(&i, a)| i == 0 || i + 1 == a.count) {
                acc += v;
            }
        }
        acc * self.cell_volume()
    }

    /// Linear interpolation of a one-dimensional grid, zero outside the sampled range.
    pub fn eval_1d(&self, x: f64) -> f64 {
        assert_eq!(self.dim(), 1, "eval_1d needs a one-dimensional grid");
        let ax = self.axes[0];
        let s = (x - ax.lo) / ax.h() - 0.5;
        if s < -1.0 || s > ax.count as f64 {
            return 0.0;
        }
        let i = s.floor();
        let frac = s - i;
        let get = |k: f64| {
            if k < 0.0 || k >= ax.count as f64 {
                0.0
            } else {
                self.values[k as usize]
            }
        };
        get(i) * (1.0 - frac) + get(i + 1.0) * frac
    }

    /// Mean and covariance of the sampled density.
    pub fn moments(&self) -> (Vector, Mat) {
        let d = self.dim();
        let vol = self.cell_volume();
        let mut mean = Vector::zeros(d);
        let mut second = Mat::zeros(d, d);
        let mut x = vec![0.0; d];
        for (idx, &v) in self.values.iter().enumerate() {
            self.center_into(idx, &mut x);
            let xv = Vector::from_column_slice(&x);
            mean += &xv * (v * vol);
            second += &xv * xv.transpose() * (v * vol);
        }
        let cov = second - &mean * mean.transpose();
        (mean, cov)
    }
}

/// `S(f) = ∫ f ln f` as a Riemann sum, `0·ln 0 = 0`.
pub fn entropy(f: &DensityGrid) -> Result<f64> {
    let mass = f.mass();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::input(format!("density has mass {mass}, expected 1")));
    }
    let s: f64 = f.values.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum();
    Ok(s * f.cell_volume())
}

/// A one-dimensional pushforward `f_{(a)}` together with its direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalGrid {
    pub grid: DensityGrid,
    pub direction: Vec<f64>,
}

/// Pushforward of `f` under `x ↦ a·x`.
///
/// Each cell's mass is shared linearly between the two bins nearest to the
/// projection of its center (cloud-in-cell), which preserves mass exactly and
/// avoids the aliasing of nearest-bin assignment along oblique directions.
/// Bins have width `max_i h_i |a_i|` and are aligned with the first cell center.
pub fn marginal(f: &DensityGrid, a: &[f64]) -> Result<MarginalGrid> {
    if a.len() != f.dim() {
        return Err(Error::input(format!("direction has {} entries for a {}-dim grid", a.len(), f.dim())));
    }
    if a.iter().any(|x| !x.is_finite()) || a.iter().all(|&x| x == 0.0) {
        return Err(Error::input("marginal direction must be finite and nonzero"));
    }
    let d = f.dim();
    let width = f.axes.iter().zip(a).map(|(ax, ai)| ax.h() * ai.abs()).fold(0.0, f64::max);
    let mut x = vec![0.0; d];
    f.center_into(0, &mut x);
    let origin: f64 = x.iter().zip(a).map(|(x, a)| x * a).sum();
    // range of projections over the box corners
    let (mut pmin, mut pmax) = (0.0, 0.0);
    for (ax, ai) in f.axes.iter().zip(a) {
        let (u, v) = (ax.lo * ai, ax.hi * ai);
        pmin += u.min(v);
        pmax += u.max(v);
    }
    let kmin = ((pmin - origin) / width).floor() as i64 - 2;
    let kmax = ((pmax - origin) / width).ceil() as i64 + 2;
    let bins = (kmax - kmin + 1) as usize;
    let mut mass = vec![0.0; bins];
    let vol = f.cell_volume();
    for (idx, &v) in f.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        f.center_into(idx, &mut x);
        let p: f64 = x.iter().zip(a).map(|(x, a)| x * a).sum();
        let s = (p - origin) / width - kmin as f64;
        let i = s.floor();
        let frac = s - i;
        let i = i as usize;
        mass[i] += v * vol * (1.0 - frac);
        mass[i + 1] += v * vol * frac;
    }
    let axis = Axis::new(origin + (kmin as f64 - 0.5) * width, origin + (kmax as f64 + 0.5) * width, bins)?;
    let values = mass.into_iter().map(|m| m / width).collect();
    Ok(MarginalGrid { grid: DensityGrid::from_parts(vec![axis], values)?, direction: a.to_vec() })
}

/// Fisher information in the form `4 ∫ |∇√f|²`, with forward differences of
/// `√f` and zero outside the box.
///
/// Differencing `√f` rather than dividing by `f` keeps far tails and empty
/// cells harmless, and for `f = φ²` it reproduces exactly the Dirichlet form of
/// the spectral discretization.
pub fn fisher(f: &DensityGrid) -> Result<f64> {
    let d = f.dim();
    let strides = f.strides();
    let root: Vec<f64> = f.values.iter().map(|v| v.sqrt()).collect();
    let mut mi = vec![0; d];
    let mut acc = 0.0;
    for (idx, &s) in root.iter().enumerate() {
        f.multi_index(idx, &mut mi);
        for k in 0..d {
            let h = f.axes[k].h();
            let next = if mi[k] + 1 < f.axes[k].count { root[idx + strides[k]] } else { 0.0 };
            acc += (next - s).powi(2) / (h * h);
            if mi[k] == 0 {
                acc += s * s / (h * h);
            }
        }
    }
    Ok(4.0 * acc * f.cell_volume())
}

/// Discrete Gaussian kernel of variance `var` on spacing `h`, truncated at 8σ.
fn heat_kernel(var: f64, h: f64) -> Vec<f64> {
    let sigma = var.sqrt();
    let half = (8.0 * sigma / h).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let x = (i as f64 - half as f64) * h;
            (-x * x / (2.0 * var)).exp()
        })
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|x| *x /= total);
    k
}

/// `e^{τΔ} f`: separable convolution with the heat kernel of variance `2τ` per axis.
pub fn heat_step(f: &DensityGrid, tau: f64) -> Result<DensityGrid> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::input(format!("heat time must be positive, got {tau}")));
    }
    let mut values = f.values.clone();
    let strides = f.strides();
    for (ax, &stride) in f.axes.iter().zip(&strides) {
        let kernel = heat_kernel(2.0 * tau, ax.h());
        let half = kernel.len() / 2;
        let n = ax.count;
        let mut out = vec![0.0; values.len()];
        let mut line = vec![0.0; n];
        for base in 0..values.len() {
            // visit each line once, from its first cell
            if !(base / stride).is_multiple_of(n) {
                continue;
            }
            for i in 0..n {
                line[i] = values[base + i * stride];
            }
            for i in 0..n {
                let lo = i.saturating_sub(half);
                let hi = (i + half).min(n - 1);
                let mut s = 0.0;
                for src in lo..=hi {
                    s += kernel[src + half - i] * line[src];
                }
                out[base + i * stride] = s;
            }
        }
        values = out;
    }
    let g = DensityGrid::from_parts(f.axes.clone(), values)?;
    let leak = f.mass() - g.mass();
    if leak > HEAT_LEAK_TOL {
        return Err(Error::input(format!(
            "heat flow pushes mass {leak:e} out of the box; enlarge the box"
        )));
    }
    Ok(g)
}

fn check_family_for(f: &DensityGrid, a: &SpanningFamily, c: &WeightVector) -> Result<()> {
    if a.n() != f.dim() || a.m() != c.len() {
        return Err(Error::input("density, family and weights have inconsistent sizes"));
    }
    if (c.sum() - a.n() as f64).abs() > DEFAULT_EQ_TOL {
        return Err(Error::ScalingViolated { sum: c.sum(), dim: a.n() });
    }
    Ok(())
}

/// `Σ c_j S(f_{(a_j)}) − S(f)`.
pub fn subadditivity_gap(f: &DensityGrid, a: &SpanningFamily, c: &WeightVector) -> Result<f64> {
    check_family_for(f, a, c)?;
    let mut acc = 0.0;
    for j in 0..a.m() {
        if c[j] == 0.0 {
            continue;
        }
        let col: Vec<f64> = a.column(j).iter().cloned().collect();
        acc += c[j] * entropy(&marginal(f, &col)?.grid)?;
    }
    Ok(acc - entropy(f)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherCheck {
    /// `Σ c_j I(f_{(u_j)})`
    pub lhs: f64,
    /// `I(f)`
    pub rhs: f64,
    pub holds: bool,
}

/// Requires unit vectors with `Σ c_j u_j u_jᵗ = Id`.
pub fn check_tight_frame(u: &SpanningFamily, c: &WeightVector) -> Result<()> {
    if u.m() != c.len() {
        return Err(Error::input(format!("{} vectors but {} weights", u.m(), c.len())));
    }
    let n = u.n();
    let mut acc = -Mat::identity(n, n);
    for j in 0..u.m() {
        let v = u.column(j);
        if (v.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!("u_{} is not a unit vector", j + 1)));
        }
        acc += &v * v.transpose() * c[j];
    }
    let err = linops::sym_op_norm(&acc);
    if !(err <= 1e-9) {
        return Err(Error::Precondition(format!("weighted frame misses the identity by {err:e}")));
    }
    Ok(())
}

/// Closed-form check `Σ c_j / (u_jᵗ Σ u_j) ≤ trace(Σ⁻¹)` for a Gaussian.
pub fn fisher_superadditivity_gaussian(sigma: &GaussianSpec, u: &SpanningFamily, c: &WeightVector) -> Result<FisherCheck> {
    check_tight_frame(u, c)?;
    if sigma.dim() != u.n() {
        return Err(Error::input("covariance and frame have different dimensions"));
    }
    let s = sigma.covariance();
    let inv = s.clone().cholesky().ok_or_else(|| Error::input("covariance is not positive definite"))?.inverse();
    let rhs = inv.trace();
    let lhs = (0..u.m())
        .map(|j| {
            let v = u.column(j);
            c[j] / (v.transpose() * s * &v)[(0, 0)]
        })
        .sum::<f64>();
    Ok(FisherCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) })
}

/// Grid check `Σ c_j I(f_{(u_j)}) ≤ I(f)` with relative slack `tol`.
pub fn fisher_superadditivity_grid(f: &DensityGrid, u: &SpanningFamily, c: &WeightVector, tol: f64) -> Result<FisherCheck> {
    check_tight_frame(u, c)?;
    check_family_for(f, u, c)?;
    let rhs = fisher(f)?;
    let mut lhs = 0.0;
    for j in 0..u.m() {
        let col: Vec<f64> = u.column(j).iter().cloned().collect();
        lhs += c[j] * fisher(&marginal(f, &col)?.grid)?;
    }
    Ok(FisherCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + tol) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatPoint {
    pub t: f64,
    /// `I(f_t) − Σ c_j I((f_t)_{(u_j)})`
    pub info_gap: f64,
    /// `Σ c_j S((f_t)_{(u_j)}) − S(f_t)`
    pub entropy_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatScan {
    pub points: Vec<HeatPoint>,
    /// Trapezoid integral of `info_gap` over the scanned times.
    pub integral: f64,
    /// `entropy_gap(last) − entropy_gap(first)`; equals the integral in the continuum.
    pub gap_difference: f64,
}

/// Follows the heat flow `f_t = e^{tΔ} f` at increasing `times` (0 allowed).
pub fn heat_monotonicity_scan(f: &DensityGrid, u: &SpanningFamily, c: &WeightVector, times: &[f64]) -> Result<HeatScan> {
    check_tight_frame(u, c)?;
    check_family_for(f, u, c)?;
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
        return Err(Error::input("times must be nonnegative and strictly increasing"));
    }
    let mut points = Vec::with_capacity(times.len());
    for &t in times {
        let ft = if t == 0.0 { f.clone() } else { heat_step(f, t)? };
        let mut marg_info = 0.0;
        for j in 0..u.m() {
            let col: Vec<f64> = u.column(j).iter().cloned().collect();
            marg_info += c[j] * fisher(&marginal(&ft, &col)?.grid)?;
        }
        points.push(HeatPoint { t, info_gap: fisher(&ft)? - marg_info, entropy_gap: subadditivity_gap(&ft, u, c)? });
    }
    let integral = points
        .windows(2)
        .map(|w| 0.5 * (w[0].info_gap + w[1].info_gap) * (w[1].t - w[0].t))
        .sum();
    let gap_difference = points.last().unwrap().entropy_gap - points[0].entropy_gap;
    Ok(HeatScan { points, integral, gap_difference })
}
