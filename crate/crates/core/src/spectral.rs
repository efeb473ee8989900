//! Ground-state eigenvalues `λ(V)` of `−4Δ − V` on Dirichlet boxes:
//! `λ(V) = sup_f (∫ V f − I(f))` equals minus the bottom of the spectrum.
//!
//! Potentials live on cell-centered grids; the Dirichlet wall sits one
//! spacing beyond the outermost centers. One-dimensional problems are solved
//! exactly (Sturm bisection on the tridiagonal matrix), two-dimensional ones
//! with a locally optimal block-free preconditioned gradient scheme (LOBPCG
//! with block size one).

use crate::entropy::{self, Axis, DensityGrid};
use crate::error::{Error, Result};
use crate::family::{SpanningFamily, WeightVector};
use crate::linops::{self, Mat};

/// Largest boundary amplitude of the eigenfunction, relative to its maximum.
pub const BOUNDARY_AMPLITUDE_TOL: f64 = 1e-6;
/// Budget for the eigenvalue subadditivity comparison.
pub const EIGEN_BUDGET: f64 = 1e-4;
/// Slack for the Fisher–Legendre inequality.
pub const LEGENDRE_SLACK: f64 = 1e-3;
/// Largest two-dimensional grid accepted by the iterative solver.
pub const MAX_2D_CELLS: usize = 256 * 256;

/// A bounded potential sampled at the cell centers of a 1- or 2-dim grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    axes: Vec<Axis>,
    values: Vec<f64>,
}

impl Potential {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::input(format!("potentials have dimension 1 or 2, got {}", axes.len())));
        }
        let cells: usize = axes.iter().map(|a| a.count).product();
        if values.len() != cells {
            return Err(Error::input(format!("{} values for {cells} cells", values.len())));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::input(format!("potential value {bad} is not finite")));
        }
        Ok(Potential { axes, values })
    }

    pub fn sample(axes: Vec<Axis>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = match axes.len() {
            1 => (0..axes[0].count).map(|i| f(&[axes[0].center(i)])).collect(),
            2 => {
                let mut v = Vec::with_capacity(axes[0].count * axes[1].count);
                for i in 0..axes[0].count {
                    for j in 0..axes[1].count {
                        v.push(f(&[axes[0].center(i), axes[1].center(j)]));
                    }
                }
                v
            }
            d => return Err(Error::input(format!("potentials have dimension 1 or 2, got {d}"))),
        };
        Self::new(axes, values)
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

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Potential {
        Potential { axes: self.axes.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Linear interpolation of a 1-dim potential; `None` outside the sampled centers.
    pub fn eval_1d(&self, x: f64) -> Option<f64> {
        let ax = self.axes[0];
        let s = (x - ax.lo) / ax.h() - 0.5;
        let n = ax.count;
        let slack = 1e-9 * n as f64;
        if !(s >= -slack && s <= (n - 1) as f64 + slack) {
            return None;
        }
        let s = s.clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let fr = s - i as f64;
        Some(self.values[i] * (1.0 - fr) + self.values[i + 1] * fr)
    }

    /// Resamples a 1-dim potential onto `axis` by linear interpolation.
    pub fn resample_1d(&self, axis: Axis) -> Result<Potential> {
        let mut values = Vec::with_capacity(axis.count);
        for i in 0..axis.count {
            let x = axis.center(i);
            values.push(self.eval_1d(x).ok_or_else(|| {
                Error::input(format!("point {x} lies outside the sampled range of the potential"))
            })?);
        }
        Potential::new(vec![axis], values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    /// `λ(V)`, minus the smallest eigenvalue of the discretized `−4Δ − V`.
    pub lambda: f64,
    /// Nonnegative, `Σ φ² h = 1`, row-major.
    pub eigenfunction: Vec<f64>,
    pub axes: Vec<Axis>,
    /// `‖(−4Δ − V)φ + λφ‖ / ‖φ‖`
    pub residual: f64,
    pub iterations: usize,
}

impl GroundState {
    /// The density `φ²`.
    pub fn density(&self) -> Result<DensityGrid> {
        DensityGrid::new(self.axes.clone(), self.eigenfunction.iter().map(|p| p * p).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Reject eigenfunctions that have not decayed at the walls.
    pub boundary_check: bool,
    /// Eigenvalue change between iterations (2-dim solver).
    pub tol: f64,
    /// Relative residual target (2-dim solver).
    pub residual_tol: f64,
    pub max_iter: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { boundary_check: true, tol: 1e-8, residual_tol: 1e-7, max_iter: 20_000 }
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `x`.
fn sturm_count(d: &[f64], e: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &di) in d.iter().enumerate() {
        q = if i == 0 { di - x } else { di - x - e * e / q };
        if q == 0.0 {
            q = -f64::EPSILON * (di.abs() + e.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves `(tridiag(e, d, e)) x = b` for a positive definite matrix.
fn thomas(d: &[f64], e: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut denom = d[0];
    c[0] = e / denom;
    y[0] = b[0] / denom;
    for i in 1..n {
        denom = d[i] - e * c[i - 1];
        c[i] = e / denom;
        y[i] = (b[i] - e * y[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

fn check_boundary(phi: &[f64], axes: &[Axis], opts: &SpectralOptions) -> Result<()> {
    if !opts.boundary_check {
        return Ok(());
    }
    let max = phi.iter().cloned().fold(0.0, f64::max);
    let mut edge: f64 = 0.0;
    match axes.len() {
        1 => edge = phi[0].abs().max(phi[phi.len() - 1].abs()),
        _ => {
            let (nx, ny) = (axes[0].count, axes[1].count);
            for i in 0..nx {
                for j in 0..ny {
                    if i == 0 || j == 0 || i + 1 == nx || j + 1 == ny {
                        edge = edge.max(phi[i * ny + j].abs());
                    }
                }
            }
        }
    }
    if edge > BOUNDARY_AMPLITUDE_TOL * max {
        return Err(Error::Accuracy(format!(
            "ground state has relative amplitude {:.2e} at the wall; enlarge the box",
            edge / max
        )));
    }
    Ok(())
}

fn normalize_ground(phi: &mut [f64], cell: f64) {
    let sign = if phi.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let norm = (phi.iter().map(|p| p * p).sum::<f64>() * cell).sqrt();
    phi.iter_mut().for_each(|p| *p *= sign / norm);
}

/// `∫ V ψ² − 4 ∫ |∇ψ|²` with forward differences and zero walls.
pub fn rayleigh_quotient(v: &Potential, psi: &[f64]) -> Result<f64> {
    if psi.len() != v.values.len() {
        return Err(Error::input("trial function and potential have different sizes"));
    }
    let cell: f64 = v.axes.iter().map(Axis::h).product();
    let norm2: f64 = psi.iter().map(|p| p * p).sum::<f64>() * cell;
    let pot: f64 = psi.iter().zip(&v.values).map(|(p, v)| v * p * p).sum::<f64>() * cell;
    let mut grad = 0.0;
    match v.dim() {
        1 => {
            let h = v.axes[0].h();
            let n = psi.len();
            for i in 0..=n {
                let a = if i == 0 { 0.0 } else { psi[i - 1] };
                let b = if i == n { 0.0 } else { psi[i] };
                grad += (b - a).powi(2) / (h * h);
            }
        }
        _ => {
            let (nx, ny) = (v.axes[0].count, v.axes[1].count);
            let (hx, hy) = (v.axes[0].h(), v.axes[1].h());
            let at = |i: isize, j: isize| -> f64 {
                if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
                    0.0
                } else {
                    psi[i as usize * ny + j as usize]
                }
            };
            for i in -1..nx as isize {
                for j in -1..ny as isize {
                    if j >= 0 {
                        grad += (at(i + 1, j) - at(i, j)).powi(2) / (hx * hx);
                    }
                    if i >= 0 {
                        grad += (at(i, j + 1) - at(i, j)).powi(2) / (hy * hy);
                    }
                }
            }
        }
    }
    Ok((pot - 4.0 * grad * cell) / norm2)
}

pub fn lambda_1d(v: &Potential) -> Result<GroundState> {
    lambda_1d_with(v, &SpectralOptions::default())
}

pub fn lambda_1d_with(v: &Potential, opts: &SpectralOptions) -> Result<GroundState> {
    if v.dim() != 1 {
        return Err(Error::input("lambda_1d needs a one-dimensional potential"));
    }
    let h = v.axes[0].h();
    let e = -4.0 / (h * h);
    let d: Vec<f64> = v.values.iter().map(|vi| 8.0 / (h * h) - vi).collect();
    let n = d.len();
    let mut lo = d.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * e.abs();
    let mut hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * e.abs();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(&d, e, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    let scale = 8.0 / (h * h) + v.values.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let shift = mu - 1e-10 * scale;
    let shifted: Vec<f64> = d.iter().map(|x| x - shift).collect();
    let mut phi = vec![1.0; n];
    for _ in 0..4 {
        phi = thomas(&shifted, e, &phi);
        let norm = phi.iter().map(|p| p * p).sum::<f64>().sqrt();
        phi.iter_mut().for_each(|p| *p /= norm);
    }
    normalize_ground(&mut phi, h);
    let lambda = rayleigh_quotient(v, &phi)?;
    // residual of T φ − μ φ with μ = −λ
    let mut res = 0.0;
    for i in 0..n {
        let left = if i > 0 { phi[i - 1] } else { 0.0 };
        let right = if i + 1 < n { phi[i + 1] } else { 0.0 };
        let r = d[i] * phi[i] + e * (left + right) + lambda * phi[i];
        res += r * r;
    }
    let residual = res.sqrt() / phi.iter().map(|p| p * p).sum::<f64>().sqrt();
    check_boundary(&phi, &v.axes, opts)?;
    Ok(GroundState { lambda, eigenfunction: phi, axes: v.axes.clone(), residual, iterations: 0 })
}

/// Matrix-free 5-point `−4Δ − V` on a Dirichlet box.
struct Operator2d<'a> {
    nx: usize,
    ny: usize,
    cx: f64,
    cy: f64,
    v: &'a [f64],
}

impl Operator2d<'_> {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let (nx, ny, cx, cy) = (self.nx, self.ny, self.cx, self.cy);
        for i in 0..nx {
            for j in 0..ny {
                let k = i * ny + j;
                let mut s = (2.0 * cx + 2.0 * cy - self.v[k]) * x[k];
                if i > 0 {
                    s -= cx * x[k - ny];
                }
                if i + 1 < nx {
                    s -= cx * x[k + ny];
                }
                if j > 0 {
                    s -= cy * x[k - 1];
                }
                if j + 1 < ny {
                    s -= cy * x[k + 1];
                }
                out[k] = s;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

/// A search direction together with its image under the operator.
struct Dir {
    v: Vec<f64>,
    av: Vec<f64>,
}

/// Orthonormalizes `d` against `basis` (twice, for stability); `None` if it collapses.
fn orthonormalize_against(mut d: Dir, basis: &[&Dir]) -> Option<Dir> {
    let start = dot(&d.v, &d.v).sqrt();
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for q in basis {
            let c = dot(&q.v, &d.v);
            axpy(-c, &q.v, &mut d.v);
            axpy(-c, &q.av, &mut d.av);
        }
    }
    let norm = dot(&d.v, &d.v).sqrt();
    if norm < 1e-10 * start {
        return None;
    }
    d.v.iter_mut().for_each(|x| *x /= norm);
    d.av.iter_mut().for_each(|x| *x /= norm);
    Some(d)
}

pub fn lambda_2d(v: &Potential) -> Result<GroundState> {
    lambda_2d_with(v, &SpectralOptions::default())
}

pub fn lambda_2d_with(v: &Potential, opts: &SpectralOptions) -> Result<GroundState> {
    if v.dim() != 2 {
        return Err(Error::input("lambda_2d needs a two-dimensional potential"));
    }
    let (nx, ny) = (v.axes[0].count, v.axes[1].count);
    if nx * ny > MAX_2D_CELLS {
        return Err(Error::Capacity { what: "2-dim eigen grid cells".into(), got: nx * ny, limit: MAX_2D_CELLS });
    }
    let (hx, hy) = (v.axes[0].h(), v.axes[1].h());
    let op = Operator2d { nx, ny, cx: 4.0 / (hx * hx), cy: 4.0 / (hy * hy), v: &v.values };
    let size = nx * ny;
    let apply = |x: &[f64]| {
        let mut out = vec![0.0; size];
        op.apply(x, &mut out);
        out
    };

    let start = vec![1.0 / (size as f64).sqrt(); size];
    let mut x = Dir { av: apply(&start), v: start };
    let mut theta = dot(&x.v, &x.av);
    let mut prev = Option::<Dir>::None;
    let mut history = Vec::new();
    let mut converged = false;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        if iterations % 25 == 0 {
            // refresh the tracked image to stop drift
            x.av = apply(&x.v);
            theta = dot(&x.v, &x.av);
        }
        let r: Vec<f64> = x.av.iter().zip(&x.v).map(|(a, b)| a - theta * b).collect();
        let residual = dot(&r, &r).sqrt();
        if history.len() == 8 {
            history.remove(0);
        }
        history.push(residual);
        if residual <= opts.residual_tol && change <= opts.tol {
            converged = true;
            break;
        }
        let w = Dir { av: apply(&r), v: r };
        let Some(w) = orthonormalize_against(w, &[&x]) else {
            converged = residual <= opts.residual_tol * 10.0;
            break;
        };
        let p = prev.take().and_then(|p| orthonormalize_against(p, &[&x, &w]));
        let basis: Vec<&Dir> = std::iter::once(&x).chain(std::iter::once(&w)).chain(p.iter()).collect();
        let k = basis.len();
        let gram = Mat::from_fn(k, k, |a, b| 0.5 * (dot(&basis[a].v, &basis[b].av) + dot(&basis[b].v, &basis[a].av)));
        let (vals, vecs) = linops::sym_eigen(&gram)?;
        let y = vecs.column(0);
        let theta_new = vals[0];
        let mut nv = vec![0.0; size];
        let mut nav = vec![0.0; size];
        let mut pv = vec![0.0; size];
        let mut pav = vec![0.0; size];
        for (idx, b) in basis.iter().enumerate() {
            axpy(y[idx], &b.v, &mut nv);
            axpy(y[idx], &b.av, &mut nav);
            if idx > 0 {
                axpy(y[idx], &b.v, &mut pv);
                axpy(y[idx], &b.av, &mut pav);
            }
        }
        let norm = dot(&nv, &nv).sqrt();
        nv.iter_mut().for_each(|t| *t /= norm);
        nav.iter_mut().for_each(|t| *t /= norm);
        change = (theta_new - theta).abs();
        x = Dir { v: nv, av: nav };
        theta = theta_new;
        prev = Some(Dir { v: pv, av: pav });
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            detail: format!("eigen residual history (latest last): {:?}", history.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>()),
        });
    }
    let mut phi = x.v;
    normalize_ground(&mut phi, hx * hy);
    check_boundary(&phi, &v.axes, opts)?;
    let lambda = rayleigh_quotient(v, &phi)?;
    let mut out = vec![0.0; size];
    op.apply(&phi, &mut out);
    let nrm = dot(&phi, &phi).sqrt();
    let res: f64 = out.iter().zip(&phi).map(|(a, p)| (a + lambda * p).powi(2)).sum::<f64>().sqrt() / nrm;
    Ok(GroundState { lambda, eigenfunction: phi, axes: v.axes.clone(), residual: res, iterations })
}

/// `V(x) = Σ_j V_j(u_j·x)` at the centers of a 2-dim grid.
pub fn combine_potential(u: &SpanningFamily, vs: &[Potential], grid: &[Axis]) -> Result<Potential> {
    if u.n() != 2 || grid.len() != 2 || vs.len() != u.m() {
        return Err(Error::input("combine_potential needs a planar family, one potential per vector and a 2-dim grid"));
    }
    if vs.iter().any(|p| p.dim() != 1) {
        return Err(Error::input("ridge profiles must be one-dimensional"));
    }
    let cols: Vec<(f64, f64)> = (0..u.m()).map(|j| (u.matrix()[(0, j)], u.matrix()[(1, j)])).collect();
    let ny = grid[1].count;
    let mut values = vec![0.0; grid[0].count * ny];
    for i in 0..grid[0].count {
        for k in 0..ny {
            let (x, y) = (grid[0].center(i), grid[1].center(k));
            let mut s = 0.0;
            for (j, &(a, b)) in cols.iter().enumerate() {
                let t = a * x + b * y;
                s += vs[j].eval_1d(t).ok_or_else(|| {
                    Error::input(format!("projection {t:.4} falls outside the range of V_{}", j + 1))
                })?;
            }
            values[i * ny + k] = s;
        }
    }
    Potential::new(grid.to_vec(), values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCheck {
    /// `λ(V)` for the combined potential.
    pub lhs: f64,
    /// `c_j λ(V_j / c_j)`
    pub rhs_terms: Vec<f64>,
    pub rhs: f64,
    /// `rhs − lhs`
    pub margin: f64,
    pub holds: bool,
}

/// Compares `λ(Σ V_j(u_j·x))` with `Σ c_j λ(V_j / c_j)`.
///
/// The one-dimensional problems are solved on `axis_1d` when given (pick the
/// 2-dim spacing there so both sides carry matching discretization error),
/// otherwise on each profile's own axis.
pub fn eigen_subadditivity_check(
    u: &SpanningFamily,
    c: &WeightVector,
    vs: &[Potential],
    grid_2d: &[Axis],
    axis_1d: Option<Axis>,
    opts: &SpectralOptions,
) -> Result<EigenCheck> {
    entropy::check_tight_frame(u, c)?;
    if let Some(j) = (0..c.len()).find(|&j| c[j] <= 0.0) {
        return Err(Error::Precondition(format!("weight c_{} must be positive", j + 1)));
    }
    let lhs = lambda_2d_with(&combine_potential(u, vs, grid_2d)?, opts)?.lambda;
    let mut rhs_terms = Vec::with_capacity(vs.len());
    for (j, vj) in vs.iter().enumerate() {
        let base = match axis_1d {
            Some(ax) => vj.resample_1d(ax)?,
            None => vj.clone(),
        };
        let cj = c[j];
        rhs_terms.push(cj * lambda_1d_with(&base.map(|x| x / cj), opts)?.lambda);
    }
    let rhs: f64 = rhs_terms.iter().sum();
    Ok(EigenCheck { lhs, rhs_terms, rhs, margin: rhs - lhs, holds: lhs <= rhs + EIGEN_BUDGET })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreFisher {
    /// `∫ V f`
    pub pairing: f64,
    /// `λ(V) + I(f)`
    pub bound: f64,
    pub lambda: f64,
    pub fisher: f64,
    pub holds: bool,
}

/// Checks `∫ V f ≤ λ(V) + I(f)`.
pub fn legendre_fisher_check(v: &Potential, f: &DensityGrid, opts: &SpectralOptions) -> Result<LegendreFisher> {
    if v.axes() != f.axes() {
        return Err(Error::input("potential and density must share a grid"));
    }
    let lambda = match v.dim() {
        1 => lambda_1d_with(v, opts)?,
        _ => lambda_2d_with(v, opts)?,
    }
    .lambda;
    let pairing = v.values.iter().zip(f.values()).map(|(a, b)| a * b).sum::<f64>() * f.cell_volume();
    let fisher = entropy::fisher(f)?;
    let bound = lambda + fisher;
    Ok(LegendreFisher { pairing, bound, lambda, fisher, holds: pairing <= bound + LEGENDRE_SLACK })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ax(lo: f64, hi: f64, n: usize) -> Axis {
        Axis::new(lo, hi, n).unwrap()
    }

    fn harmonic_1d(b: f64, axis: Axis) -> Potential {
        Potential::sample(vec![axis], |x| -b * x[0] * x[0]).unwrap()
    }

    #[test]
    fn harmonic_1d_value() {
        let g = lambda_1d(&harmonic_1d(1.0, ax(-10.0, 10.0, 4000))).unwrap();
        assert!((g.lambda + 2.0).abs() < 1e-3, "{}", g.lambda);
        assert!(g.residual < 1e-6);
        assert!(g.eigenfunction.iter().all(|&p| p >= -1e-12));
        let mass: f64 = g.eigenfunction.iter().map(|p| p * p).sum::<f64>() * 0.005;
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn shift_covariance_1d() {
        let v = harmonic_1d(1.0, ax(-10.0, 10.0, 400));
        let a = lambda_1d(&v).unwrap().lambda;
        let b = lambda_1d(&v.map(|x| x + 0.37)).unwrap().lambda;
        assert!((b - a - 0.37).abs() < 1e-12, "{}", b - a - 0.37);
    }

    #[test]
    fn free_dirichlet_1d() {
        let n = 200;
        let axis = ax(-5.0, 5.0, n);
        let h = axis.h();
        let v = Potential::sample(vec![axis], |_| 0.0).unwrap();
        let opts = SpectralOptions { boundary_check: false, ..SpectralOptions::default() };
        let g = lambda_1d_with(&v, &opts).unwrap();
        let exact = -4.0 * (2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos()) / (h * h);
        assert!((g.lambda - exact).abs() < 1e-10);
        assert!(matches!(lambda_1d(&v), Err(Error::Accuracy(_))));
    }

    #[test]
    fn separable_2d_matches_1d_sum() {
        let axis = ax(-10.0, 10.0, 160);
        let v1 = Potential::sample(vec![axis], |x| -x[0] * x[0] + 0.5 * (-x[0] * x[0]).exp()).unwrap();
        let v2 = Potential::sample(vec![axis], |x| -0.5 * (x[0] - 0.3).powi(2)).unwrap();
        let id = SpanningFamily::new(Mat::identity(2, 2)).unwrap();
        let combined = combine_potential(&id, &[v1.clone(), v2.clone()], &[axis, axis]).unwrap();
        let g = lambda_2d(&combined).unwrap();
        let sum = lambda_1d(&v1).unwrap().lambda + lambda_1d(&v2).unwrap().lambda;
        assert!((g.lambda - sum).abs() < 1e-7, "{} vs {sum}", g.lambda);
        assert!(g.residual < 1e-6);
    }

    #[test]
    fn free_dirichlet_2d() {
        let axis = ax(-3.0, 3.0, 30);
        let v = Potential::sample(vec![axis, axis], |_| 0.0).unwrap();
        let opts = SpectralOptions { boundary_check: false, ..SpectralOptions::default() };
        let g = lambda_2d_with(&v, &opts).unwrap();
        let one = lambda_1d_with(&Potential::sample(vec![axis], |_| 0.0).unwrap(), &opts).unwrap();
        assert!((g.lambda - 2.0 * one.lambda).abs() < 1e-8);
    }

    #[test]
    fn variational_and_monotone() {
        let axis = ax(-8.0, 8.0, 200);
        let v = harmonic_1d(1.0, axis);
        let g = lambda_1d(&v).unwrap();
        let trial: Vec<f64> = (0..200).map(|i| (-(axis.center(i) - 0.5).powi(2)).exp()).collect();
        assert!(rayleigh_quotient(&v, &trial).unwrap() <= g.lambda + 1e-9);
        assert!((rayleigh_quotient(&v, &g.eigenfunction).unwrap() - g.lambda).abs() < 1e-9);
        let w = v.map(|x| x + 0.1 * (1.0 + x.sin()));
        assert!(lambda_1d(&w).unwrap().lambda >= g.lambda);
    }

    #[test]
    fn legendre_fisher() {
        let axis = ax(-12.0, 12.0, 2048);
        let v = harmonic_1d(1.0, axis);
        let opts = SpectralOptions::default();
        let ground = lambda_1d(&v).unwrap().density().unwrap();
        let eq = legendre_fisher_check(&v, &ground, &opts).unwrap();
        assert!((eq.pairing - eq.bound).abs() < 2e-3 && eq.holds, "{eq:?}");
        let off = DensityGrid::sample(vec![axis], |x| (-(x[0] - 1.0).powi(2)).exp()).unwrap();
        let strict = legendre_fisher_check(&v, &off, &opts).unwrap();
        assert!(strict.pairing < strict.bound - 0.1);
    }

    #[test]
    fn combine_equiangular() {
        let s = 3f64.sqrt() / 2.0;
        let u = SpanningFamily::from_columns(2, &[vec![1.0, 0.0], vec![-0.5, s], vec![-0.5, -s]]).unwrap();
        let line = ax(-12.0, 12.0, 2400);
        let vj = Potential::sample(vec![line], |x| -x[0] * x[0]).unwrap();
        let grid = [ax(-4.0, 4.0, 40), ax(-4.0, 4.0, 40)];
        let v = combine_potential(&u, &[vj.clone(), vj.clone(), vj], &grid).unwrap();
        let exact = Potential::sample(grid.to_vec(), |x| -1.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let err = v.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
        let short = Potential::sample(vec![ax(-1.0, 1.0, 10)], |x| x[0]).unwrap();
        assert!(combine_potential(&u, &[short.clone(), short.clone(), short], &grid).is_err());
    }
}
