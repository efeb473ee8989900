//! Dense linear-algebra kernels shared by every other module.
//!
//! Matrices are `nalgebra` dense matrices; everything here is a pure function
//! of its inputs. Ranks are always relative: a singular value counts when it
//! exceeds `rel_tol` times the largest one.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default relative tolerance for numerical ranks.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Symmetry slack accepted by the symmetric kernels, relative to the largest entry.
const SYMMETRY_TOL: f64 = 1e-12;

/// A linear subspace of ℝⁿ stored through an orthonormal basis (one column per direction).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Mat,
}

impl Subspace {
    /// Wraps a basis whose columns are already orthonormal.
    pub fn from_orthonormal(basis: Mat) -> Result<Self> {
        check_finite(&basis)?;
        let gram = basis.transpose() * &basis;
        let k = basis.ncols();
        let err = (&gram - Mat::identity(k, k)).amax();
        if err > 1e-10 {
            return Err(Error::input(format!(
                "basis columns are not orthonormal (Gram residual {err:e})"
            )));
        }
        Ok(Subspace { ambient_dim: basis.nrows(), basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Orthogonal projector `B·Bᵗ` onto the subspace.
    pub fn projector(&self) -> Mat {
        &self.basis * self.basis.transpose()
    }

    /// Coordinates of `v` in the stored basis (`Bᵗ·v`).
    pub fn coordinates(&self, v: &Vector) -> Vector {
        self.basis.transpose() * v
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &Vector) -> f64 {
        (v - &self.basis * self.coordinates(v)).norm()
    }
}

pub fn check_finite(m: &Mat) -> Result<()> {
    if let Some(bad) = m.iter().find(|x| !x.is_finite()) {
        return Err(Error::input(format!("matrix has a non-finite entry ({bad})")));
    }
    Ok(())
}

fn check_symmetric(m: &Mat) -> Result<()> {
    if !m.is_square() {
        return Err(Error::input(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    check_finite(m)?;
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::input(format!("matrix is not symmetric (asymmetry {asym:e})")));
    }
    Ok(())
}

fn singular_values(m: &Mat) -> Vector {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

/// Numerical rank: number of singular values above `rel_tol · σ_max`.
pub fn rank_tol(m: &Mat, rel_tol: f64) -> Result<usize> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::input(format!("rank tolerance must lie in (0,1), got {rel_tol}")));
    }
    check_finite(m)?;
    let sv = singular_values(m);
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > rel_tol * max).count())
}

/// Orthonormal basis of the column span of `vectors`.
pub fn orthonormalize(vectors: &Mat) -> Result<Subspace> {
    orthonormalize_tol(vectors, DEFAULT_RANK_TOL)
}

pub fn orthonormalize_tol(vectors: &Mat, rel_tol: f64) -> Result<Subspace> {
    check_finite(vectors)?;
    let n = vectors.nrows();
    if vectors.ncols() == 0 || vectors.amax() == 0.0 {
        return Err(Error::input("cannot orthonormalize an all-zero family"));
    }
    let svd = vectors.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    // keep columns in decreasing singular-value order so the output does not
    // depend on the order the backend happens to return them in
    let mut keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * max)
        .collect();
    keep.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut basis = Mat::zeros(n, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        let mut col = u.column(i).into_owned();
        canonical_sign(&mut col);
        basis.set_column(k, &col);
    }
    Ok(Subspace { ambient_dim: n, basis })
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
fn canonical_sign(v: &mut Vector) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Orthonormal basis of the orthogonal complement of `s`.
pub fn complement(s: &Subspace) -> Result<Subspace> {
    let n = s.ambient_dim;
    if s.dim() >= n {
        return Err(Error::input("the subspace is the whole ambient space; its complement is trivial"));
    }
    let p_perp = Mat::identity(n, n) - s.projector();
    let eig = SymmetricEigen::new(p_perp);
    let mut idx: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap().then(a.cmp(&b))
    });
    debug_assert_eq!(idx.len(), n - s.dim());
    let mut cols = Mat::zeros(n, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        cols.set_column(k, &eig.eigenvectors.column(i));
    }
    // a second pass cleans up the basis and fixes the signs
    let mut basis = cols.qr().q();
    for k in 0..basis.ncols() {
        let mut col = basis.column(k).into_owned();
        canonical_sign(&mut col);
        basis.set_column(k, &col);
    }
    Ok(Subspace { ambient_dim: n, basis })
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sym_eigen(m: &Mat) -> Result<(Vector, Mat)> {
    check_symmetric(m)?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut values = Vector::zeros(n);
    let mut vectors = Mat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        values[k] = eig.eigenvalues[i];
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// Applies `f` to the spectrum of a symmetric matrix.
fn spectral_map(values: &Vector, vectors: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let n = values.len();
    let mut scaled = vectors.clone();
    for k in 0..n {
        let fk = f(values[k]);
        scaled.column_mut(k).scale_mut(fk);
    }
    let out = scaled * vectors.transpose();
    (&out + out.transpose()) * 0.5
}

/// The symmetric positive definite `X` with `X·M·X = Id`.
pub fn inv_sqrt_pd(m: &Mat) -> Result<Mat> {
    let (values, vectors) = sym_eigen(m)?;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NumericDomain {
            what: "inverse square root needs a positive definite matrix".into(),
            value: min,
        });
    }
    Ok(spectral_map(&values, &vectors, |l| 1.0 / l.sqrt()))
}

/// Symmetric positive semidefinite square root; tiny negative eigenvalues from rounding are clamped.
pub fn sqrt_psd(m: &Mat) -> Result<Mat> {
    let (values, vectors) = sym_eigen(m)?;
    let max = values.iter().cloned().fold(0.0_f64, |a, b| a.max(b.abs()));
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * max.max(1.0) {
        return Err(Error::NumericDomain {
            what: "square root needs a positive semidefinite matrix".into(),
            value: min,
        });
    }
    Ok(spectral_map(&values, &vectors, |l| l.max(0.0).sqrt()))
}

/// `ln det M` through a Cholesky factorization.
pub fn logdet_pd(m: &Mat) -> Result<f64> {
    check_symmetric(m)?;
    let n = m.nrows();
    match m.clone().cholesky() {
        Some(ch) => {
            let l = ch.l_dirty();
            let mut acc = 0.0;
            for i in 0..n {
                acc += l[(i, i)].ln();
            }
            let out = 2.0 * acc;
            if out.is_finite() {
                Ok(out)
            } else {
                Err(Error::NumericDomain { what: "log-determinant is not finite".into(), value: out })
            }
        }
        None => {
            let (values, _) = sym_eigen(m)?;
            Err(Error::NumericDomain {
                what: "log-determinant needs a positive definite matrix".into(),
                value: values.iter().cloned().fold(f64::INFINITY, f64::min),
            })
        }
    }
}

/// `ln |det M|` through an LU factorization; singular input is a domain error.
pub fn log_abs_det(m: &Mat) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::input("determinant of a non-square matrix"));
    }
    check_finite(m)?;
    let lu = m.clone().lu();
    let u = lu.u();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        acc += u[(i, i)].abs().ln();
    }
    if !acc.is_finite() {
        return Err(Error::NumericDomain { what: "matrix is singular".into(), value: acc });
    }
    Ok(acc)
}

/// Builds a matrix whose columns are the given vectors.
pub fn from_columns(n: usize, cols: &[Vec<f64>]) -> Result<Mat> {
    let mut m = Mat::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        if c.len() != n {
            return Err(Error::input(format!(
                "column {} has length {}, expected {n}",
                j + 1,
                c.len()
            )));
        }
        for i in 0..n {
            m[(i, j)] = c[i];
        }
    }
    Ok(m)
}

/// Selects a subset of columns, in the given order.
pub fn select_columns(m: &Mat, idx: &[usize]) -> Mat {
    let mut out = Mat::zeros(m.nrows(), idx.len());
    for (k, &j) in idx.iter().enumerate() {
        out.set_column(k, &m.column(j));
    }
    out
}

/// Operator (spectral) norm of a symmetric matrix.
pub fn sym_op_norm(m: &Mat) -> f64 {
    match sym_eigen(m) {
        Ok((values, _)) => values.iter().fold(0.0_f64, |a, &b| a.max(b.abs())),
        Err(_) => f64::NAN,
    }
}
