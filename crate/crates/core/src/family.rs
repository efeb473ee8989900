//! Spanning families, weight vectors and the combinatorics of the
//! Brascamp–Lieb polytope `K_A`: feasibility, critical subsets, the
//! splitting of a boundary instance, and total reducibility.
//!
//! Subset enumeration is exhaustive and therefore exponential in the family
//! size; [`MAX_ENUMERATION`] bounds it.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::linops::{self, Mat, Subspace, Vector, DEFAULT_RANK_TOL};

/// Largest family size accepted by the subset enumerations.
pub const MAX_ENUMERATION: usize = 24;
/// Largest family size accepted by the bipartition search.
pub const MAX_BIPARTITION: usize = 20;
/// Default slack separating "critical" from "strict" subset inequalities.
pub const DEFAULT_EQ_TOL: f64 = 1e-9;

/// A subset of column indices `{0, …, m-1}` stored as a bitmask.
///
/// Displayed 1-based, e.g. `{1,3}` for indices 0 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subset(u32);

impl Subset {
    pub fn from_indices(idx: &[usize]) -> Self {
        Subset(idx.iter().fold(0u32, |acc, &i| acc | (1 << i)))
    }

    pub fn from_mask(mask: u32) -> Self {
        Subset(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|&i| self.contains(i)).collect()
    }

    /// Indices of `{0..m}` not in the subset.
    pub fn complement(self, m: usize) -> Subset {
        Subset(!self.0 & full_mask(m))
    }

    /// Re-expresses a subset of positions `0..k` through a position → index map.
    pub fn map_through(self, idx: &[usize]) -> Subset {
        Subset::from_indices(&self.indices().iter().map(|&p| idx[p]).collect::<Vec<_>>())
    }

    /// Increasing cardinality, then lexicographic order of the index lists.
    pub fn canonical_cmp(&self, other: &Subset) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.indices().cmp(&other.indices()))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

fn full_mask(m: usize) -> u32 {
    if m >= 32 {
        u32::MAX
    } else {
        (1u32 << m) - 1
    }
}

/// All nonempty subsets of `{0..m}` in canonical order.
fn enumerate_subsets(m: usize) -> Vec<Subset> {
    let mut all: Vec<Subset> = (1..=full_mask(m)).map(Subset).collect();
    all.sort_by(Subset::canonical_cmp);
    all
}

/// The vectors `a_1, …, a_m` (columns of an `n × m` matrix), nonzero and spanning ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningFamily {
    columns: Mat,
    rank_tol: f64,
}

impl SpanningFamily {
    pub fn new(columns: Mat) -> Result<Self> {
        Self::with_rank_tol(columns, DEFAULT_RANK_TOL)
    }

    pub fn with_rank_tol(columns: Mat, rank_tol: f64) -> Result<Self> {
        linops::check_finite(&columns)?;
        let n = columns.nrows();
        if n == 0 || columns.ncols() == 0 {
            return Err(Error::input("a family needs at least one vector in a nonzero dimension"));
        }
        for j in 0..columns.ncols() {
            if columns.column(j).norm() == 0.0 {
                return Err(Error::input(format!("vector a_{} is zero", j + 1)));
            }
        }
        let rank = linops::rank_tol(&columns, rank_tol)?;
        if rank != n {
            return Err(Error::input(format!("the family spans a {rank}-dimensional subspace of R^{n}")));
        }
        Ok(SpanningFamily { columns, rank_tol })
    }

    pub fn from_columns(n: usize, cols: &[Vec<f64>]) -> Result<Self> {
        Self::new(linops::from_columns(n, cols)?)
    }

    /// Ambient dimension `n`.
    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    /// Number of vectors `m`.
    pub fn m(&self) -> usize {
        self.columns.ncols()
    }

    pub fn matrix(&self) -> &Mat {
        &self.columns
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn column(&self, j: usize) -> Vector {
        self.columns.column(j).into_owned()
    }

    pub fn columns_of(&self, idx: &[usize]) -> Mat {
        linops::select_columns(&self.columns, idx)
    }

    /// `dim V_J = dim span{a_j : j ∈ J}`.
    pub fn span_dim(&self, subset: Subset) -> usize {
        if subset.is_empty() {
            return 0;
        }
        linops::rank_tol(&self.columns_of(&subset.indices()), self.rank_tol)
            .expect("family entries are finite")
    }

    /// Orthonormal basis of `V_J`.
    pub fn span_of(&self, subset: Subset) -> Result<Subspace> {
        linops::orthonormalize_tol(&self.columns_of(&subset.indices()), self.rank_tol)
    }

    /// The family `T·A`.
    pub fn transformed(&self, t: &Mat) -> Result<Self> {
        if t.nrows() != self.n() || t.ncols() != self.n() {
            return Err(Error::input("transform has the wrong shape"));
        }
        Self::with_rank_tol(t * &self.columns, self.rank_tol)
    }

    /// Sub-family restricted to `idx`, expressed in coordinates of an orthonormal basis of its span.
    pub fn restricted(&self, idx: &[usize]) -> Result<(SpanningFamily, Subspace)> {
        let cols = self.columns_of(idx);
        let basis = linops::orthonormalize_tol(&cols, self.rank_tol)?;
        let local = basis.basis().transpose() * cols;
        Ok((SpanningFamily::with_rank_tol(local, self.rank_tol)?, basis))
    }
}

/// Exponents `c_1, …, c_m`, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        for (j, &x) in c.iter().enumerate() {
            if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                return Err(Error::input(format!("weight c_{} = {x} is outside [0,1]", j + 1)));
            }
        }
        Ok(WeightVector(c))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn sum_over(&self, subset: Subset) -> f64 {
        subset.indices().iter().map(|&j| self.0[j]).sum()
    }

    pub fn restricted(&self, idx: &[usize]) -> WeightVector {
        WeightVector(idx.iter().map(|&j| self.0[j]).collect())
    }

    /// `Σ c_j ln c_j` with `0·ln 0 = 0`.
    pub fn entropy_term(&self) -> f64 {
        self.0.iter().filter(|&&c| c > 0.0).map(|&c| c * c.ln()).sum()
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

fn check_lengths(a: &SpanningFamily, c: &WeightVector) -> Result<()> {
    if a.m() != c.len() {
        return Err(Error::input(format!("{} vectors but {} weights", a.m(), c.len())));
    }
    Ok(())
}

/// One subset inequality `Σ_{j∈J} c_j ≤ dim V_J`, evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetBound {
    pub subset: Subset,
    pub sum: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub n: usize,
    pub sum_c: f64,
    pub in_ka: bool,
    pub in_interior: bool,
    /// Subsets with `Σc_J > dim V_J + tol`, in canonical order.
    pub violations: Vec<SubsetBound>,
    /// Proper nonempty subsets with `|Σc_J − dim V_J| ≤ tol`, in canonical order.
    pub critical: Vec<SubsetBound>,
}

impl FeasibilityReport {
    pub fn scaling_ok(&self, tol: f64) -> bool {
        (self.sum_c - self.n as f64).abs() <= tol
    }

    /// The error describing why the weights are infeasible, if they are.
    pub fn infeasibility(&self, tol: f64) -> Option<Error> {
        if self.in_ka {
            return None;
        }
        if let Some(v) = self.violations.first() {
            return Some(Error::Infeasible { subset: v.subset, sum: v.sum, dim: v.dim });
        }
        if !self.scaling_ok(tol) {
            return Some(Error::ScalingViolated { sum: self.sum_c, dim: self.n });
        }
        None
    }
}

/// Decides membership of `c` in `K_A` and in its relative interior.
pub fn feasibility(a: &SpanningFamily, c: &WeightVector, tol: f64) -> Result<FeasibilityReport> {
    check_lengths(a, c)?;
    let m = a.m();
    if m > MAX_ENUMERATION {
        return Err(Error::Capacity {
            what: "subset enumeration".into(),
            got: m,
            limit: MAX_ENUMERATION,
        });
    }
    let n = a.n();
    let full = Subset(full_mask(m));
    let sum_c = c.sum();
    let mut violations = Vec::new();
    let mut critical = Vec::new();
    let mut strict_interior = true;
    for subset in enumerate_subsets(m) {
        let sum = c.sum_over(subset);
        let dim = a.span_dim(subset);
        let bound = SubsetBound { subset, sum, dim };
        if sum > dim as f64 + tol {
            violations.push(bound);
        } else if subset != full {
            if (sum - dim as f64).abs() <= tol {
                critical.push(bound);
            }
            if !(sum < dim as f64 - tol) {
                strict_interior = false;
            }
        }
    }
    let in_ka = violations.is_empty() && (sum_c - n as f64).abs() <= tol;
    Ok(FeasibilityReport {
        n,
        sum_c,
        in_ka,
        in_interior: in_ka && strict_interior,
        violations,
        critical,
    })
}

/// Critical subsets of least cardinality, sorted lexicographically.
pub fn minimal_critical(a: &SpanningFamily, c: &WeightVector, tol: f64) -> Result<Vec<Subset>> {
    let report = feasibility(a, c, tol)?;
    if let Some(err) = report.infeasibility(tol) {
        return Err(err);
    }
    let Some(first) = report.critical.first() else {
        return Err(Error::NoCriticalSubset);
    };
    let k = first.subset.len();
    Ok(report
        .critical
        .iter()
        .take_while(|b| b.subset.len() == k)
        .map(|b| b.subset)
        .collect())
}

/// The two smaller problems obtained by peeling off a critical subset `J`.
#[derive(Debug, Clone)]
pub struct SplitInstance {
    /// `{a_j : j ∈ J}` in coordinates of `inner_basis`.
    pub inner: SpanningFamily,
    pub inner_weights: WeightVector,
    pub inner_indices: Vec<usize>,
    /// `{P_J^⊥ a_j : j ∉ J}` in coordinates of `outer_basis`.
    pub outer: SpanningFamily,
    pub outer_weights: WeightVector,
    pub outer_indices: Vec<usize>,
    /// Orthonormal basis of `V_J`.
    pub inner_basis: Subspace,
    /// Orthonormal basis of `V_J^⊥`.
    pub outer_basis: Subspace,
}

pub fn split(a: &SpanningFamily, c: &WeightVector, j: Subset, tol: f64) -> Result<SplitInstance> {
    check_lengths(a, c)?;
    let m = a.m();
    if j.is_empty() || j.len() >= m || j.mask() & !full_mask(m) != 0 {
        return Err(Error::Precondition(format!("{j} is not a proper nonempty subset")));
    }
    if let Some(z) = (0..m).find(|&i| c[i] <= 0.0) {
        return Err(Error::Precondition(format!(
            "weight c_{} is zero; remove zero weights before splitting",
            z + 1
        )));
    }
    let dim = a.span_dim(j);
    let sum = c.sum_over(j);
    if (sum - dim as f64).abs() > tol {
        return Err(Error::Precondition(format!(
            "{j} is not critical (sum {sum} against dimension {dim})"
        )));
    }
    let inner_indices = j.indices();
    let outer_indices = j.complement(m).indices();
    let inner_basis = a.span_of(j)?;
    let outer_basis = linops::complement(&inner_basis)?;

    let inner_local = inner_basis.basis().transpose() * a.columns_of(&inner_indices);
    let outer_local = outer_basis.basis().transpose() * a.columns_of(&outer_indices);
    for (k, &idx) in outer_indices.iter().enumerate() {
        let b = outer_local.column(k).norm();
        if b <= a.rank_tol() * a.column(idx).norm() {
            return Err(Error::Consistency(format!(
                "projected vector b_{} vanishes although c_{} > 0 and {j} is critical",
                idx + 1,
                idx + 1
            )));
        }
    }
    let inner = SpanningFamily::with_rank_tol(inner_local, a.rank_tol())?;
    let outer = SpanningFamily::with_rank_tol(outer_local, a.rank_tol())?;
    Ok(SplitInstance {
        inner,
        inner_weights: c.restricted(&inner_indices),
        inner_indices,
        outer,
        outer_weights: c.restricted(&outer_indices),
        outer_indices,
        inner_basis,
        outer_basis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reducibility {
    TotallyReducible,
    NotTotallyReducible,
}

/// One block `J_i` of a total-reducibility decomposition.
#[derive(Debug, Clone)]
pub struct Block {
    /// Original column indices in the block, ascending.
    pub indices: Vec<usize>,
    /// Orthonormal basis of `V_{J_i}` in ℝⁿ.
    pub span: Subspace,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.span.dim()
    }
}

#[derive(Debug, Clone)]
pub struct ReducibilityReport {
    pub status: Reducibility,
    /// Indices with zero weight (`J_0`).
    pub zero_block: Vec<usize>,
    pub blocks: Vec<Block>,
    /// For the negative case, a critical subset (original indices) whose
    /// span sum is not direct.
    pub certificate: Option<Subset>,
    /// Set when some minimal critical subset failed while another one succeeded.
    pub choice_mattered: bool,
}

impl ReducibilityReport {
    pub fn is_totally_reducible(&self) -> bool {
        self.status == Reducibility::TotallyReducible
    }
}

struct ReduceCtx {
    tol: f64,
    certificate: Option<Subset>,
    choice_mattered: bool,
}

/// Indices with positive weight, after dropping `c_j ≤ tol`.
pub fn positive_support(c: &WeightVector, tol: f64) -> (Vec<usize>, Vec<usize>) {
    (0..c.len()).partition(|&j| c[j] > tol)
}

/// Decides whether `A` is totally reducible for `c` by peeling minimal
/// critical subsets, backtracking over all minimal choices.
pub fn total_reducibility(a: &SpanningFamily, c: &WeightVector, tol: f64) -> Result<ReducibilityReport> {
    let report = feasibility(a, c, tol)?;
    if let Some(err) = report.infeasibility(tol) {
        return Err(err);
    }
    let (active, zero_block) = positive_support(c, tol);
    let n = a.n();
    let local = a.columns_of(&active);
    let weights: Vec<f64> = active.iter().map(|&j| c[j]).collect();
    let mut ctx = ReduceCtx { tol, certificate: None, choice_mattered: false };
    let blocks = reduce(&local, &weights, &active, &Mat::identity(n, n), a.rank_tol(), &mut ctx)?;
    Ok(match blocks {
        Some(blocks) => ReducibilityReport {
            status: Reducibility::TotallyReducible,
            zero_block,
            blocks,
            certificate: None,
            choice_mattered: ctx.choice_mattered,
        },
        None => ReducibilityReport {
            status: Reducibility::NotTotallyReducible,
            zero_block,
            blocks: Vec::new(),
            certificate: ctx.certificate,
            choice_mattered: ctx.choice_mattered,
        },
    })
}

/// `local` is the family in coordinates of the orthonormal columns of `embed`.
fn reduce(
    local: &Mat,
    weights: &[f64],
    idx: &[usize],
    embed: &Mat,
    rank_tol: f64,
    ctx: &mut ReduceCtx,
) -> Result<Option<Vec<Block>>> {
    let fam = SpanningFamily::with_rank_tol(local.clone(), rank_tol)?;
    let c = WeightVector::new(weights.iter().map(|w| w.clamp(0.0, 1.0)).collect())?;
    let candidates = match minimal_critical(&fam, &c, ctx.tol) {
        Ok(list) => list,
        Err(Error::NoCriticalSubset) => {
            return Ok(Some(vec![Block {
                indices: idx.to_vec(),
                span: Subspace::from_orthonormal(embed.clone())?,
            }]));
        }
        Err(e) => return Err(e),
    };
    let d = fam.n();
    let p = fam.m();
    let mut failed = false;
    for j in candidates {
        let jc = j.complement(p);
        let dim_j = fam.span_dim(j);
        let dim_jc = fam.span_dim(jc);
        if dim_j + dim_jc != d {
            ctx.certificate.get_or_insert(j.map_through(idx));
            failed = true;
            continue;
        }
        let mut parts = Vec::new();
        let mut ok = true;
        for part in [j, jc] {
            let pos = part.indices();
            let (sub, basis) = fam.restricted(&pos)?;
            let sub_idx: Vec<usize> = pos.iter().map(|&q| idx[q]).collect();
            let sub_w: Vec<f64> = pos.iter().map(|&q| weights[q]).collect();
            let sub_embed = embed * basis.basis();
            match reduce(sub.matrix(), &sub_w, &sub_idx, &sub_embed, rank_tol, ctx)? {
                Some(blocks) => parts.extend(blocks),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if failed {
                ctx.choice_mattered = true;
                log::info!("total reducibility: first minimal critical subset failed, a later one succeeded");
            }
            parts.sort_by(|x, y| x.indices.cmp(&y.indices));
            return Ok(Some(parts));
        }
        failed = true;
    }
    Ok(None)
}

/// Whether the columns split into two nonempty groups whose spans have dimensions summing to `n`.
pub fn is_reducible_spanning_set(a: &SpanningFamily) -> Result<bool> {
    let m = a.m();
    if m > MAX_BIPARTITION {
        return Err(Error::Capacity {
            what: "bipartition search".into(),
            got: m,
            limit: MAX_BIPARTITION,
        });
    }
    if m < 2 {
        return Ok(false);
    }
    let n = a.n();
    // the last column always sits in the second group, so each bipartition is visited once
    let half = 1u32 << (m - 1);
    for mask in 1..half {
        let g1 = Subset(mask);
        let g2 = g1.complement(m);
        if a.span_dim(g1) + a.span_dim(g2) == n {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize, cols: &[&[f64]]) -> SpanningFamily {
        SpanningFamily::from_columns(n, &cols.iter().map(|c| c.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn w(c: &[f64]) -> WeightVector {
        WeightVector::new(c.to_vec()).unwrap()
    }

    fn mercedes() -> SpanningFamily {
        let s = 3f64.sqrt() / 2.0;
        fam(2, &[&[1.0, 0.0], &[-0.5, s], &[-0.5, -s]])
    }

    fn set(idx: &[usize]) -> Subset {
        Subset::from_indices(idx)
    }

    #[test]
    fn subset_display_is_one_based() {
        assert_eq!(set(&[0, 2]).to_string(), "{1,3}");
        assert_eq!(set(&[0, 2]).complement(4), set(&[1, 3]));
    }

    #[test]
    fn family_validation() {
        assert!(SpanningFamily::from_columns(2, &[vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(SpanningFamily::from_columns(2, &[vec![1.0, 0.0], vec![2.0, 0.0]]).is_err());
        assert!(WeightVector::new(vec![0.5, 1.5]).is_err());
        assert!(WeightVector::new(vec![-0.1]).is_err());
    }

    #[test]
    fn feasibility_orthonormal() {
        let r = feasibility(&fam(2, &[&[1.0, 0.0], &[0.0, 1.0]]), &w(&[1.0, 1.0]), 1e-9).unwrap();
        assert!(r.in_ka);
        assert!(!r.in_interior);
        assert_eq!(r.critical.iter().map(|b| b.subset).collect::<Vec<_>>(), vec![set(&[0]), set(&[1])]);
    }

    #[test]
    fn feasibility_duplicated_column() {
        // oracle: enumerate all seven subsets by hand
        // {1}:1/2<1 {2}:1/2<1 {3}:1=1 {1,2}:1=1 {1,3}:3/2<2 {2,3}:3/2<2 full:2=2
        let a = fam(2, &[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let r = feasibility(&a, &w(&[0.5, 0.5, 1.0]), 1e-9).unwrap();
        assert!(r.in_ka && !r.in_interior);
        let crit: Vec<Subset> = r.critical.iter().map(|b| b.subset).collect();
        assert_eq!(crit, vec![set(&[2]), set(&[0, 1])]);
    }

    #[test]
    fn feasibility_scaling_failure() {
        let r = feasibility(&fam(2, &[&[1.0, 0.0], &[0.0, 1.0]]), &w(&[0.5, 0.5]), 1e-9).unwrap();
        assert!(!r.in_ka);
        assert!(r.violations.is_empty());
        assert!(matches!(r.infeasibility(1e-9), Some(Error::ScalingViolated { .. })));
    }

    #[test]
    fn feasibility_capacity() {
        let cols: Vec<Vec<f64>> = (0..25).map(|_| vec![1.0]).collect();
        let a = SpanningFamily::from_columns(1, &cols).unwrap();
        let c = WeightVector::new(vec![0.04; 25]).unwrap();
        assert!(matches!(feasibility(&a, &c, 1e-9), Err(Error::Capacity { .. })));
    }

    #[test]
    fn minimal_critical_examples() {
        let a = fam(2, &[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(minimal_critical(&a, &w(&[0.5, 0.5, 1.0]), 1e-9).unwrap(), vec![set(&[2])]);
        let a = fam(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(minimal_critical(&a, &w(&[1.0, 1.0]), 1e-9).unwrap(), vec![set(&[0]), set(&[1])]);
        let t = 2.0 / 3.0;
        assert_eq!(minimal_critical(&mercedes(), &w(&[t, t, t]), 1e-9), Err(Error::NoCriticalSubset));
        let a = fam(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            minimal_critical(&a, &w(&[1.0, 0.5]), 1e-9),
            Err(Error::ScalingViolated { .. })
        ));
    }

    #[test]
    fn split_duplicated_column() {
        let a = fam(2, &[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let s = split(&a, &w(&[0.5, 0.5, 1.0]), set(&[2]), 1e-9).unwrap();
        assert_eq!(s.inner.n(), 1);
        assert_eq!(s.inner.m(), 1);
        assert!((s.inner.column(0)[0].abs() - 1.0).abs() < 1e-14);
        assert_eq!(s.inner_weights.as_slice(), &[1.0]);
        assert_eq!(s.outer.n(), 1);
        assert_eq!(s.outer_indices, vec![0, 1]);
        assert!((s.outer.column(0)[0].abs() - 1.0).abs() < 1e-14);
        assert!((s.outer.column(1)[0].abs() - 1.0).abs() < 1e-14);
        assert_eq!(s.outer_weights.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn split_projects_onto_complement() {
        // J = {3}: V_J = span (1,1); b_1 = e1 - ((1,1)/2), b_2 = e2 - ((1,1)/2)
        let a = fam(2, &[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let s = split(&a, &w(&[0.5, 0.5, 1.0]), set(&[2]), 1e-9).unwrap();
        let q = s.outer_basis.basis().clone();
        let b1 = &q * s.outer.column(0);
        let b2 = &q * s.outer.column(1);
        assert!((b1 - Vector::from_vec(vec![0.5, -0.5])).norm() < 1e-12);
        assert!((b2 - Vector::from_vec(vec![-0.5, 0.5])).norm() < 1e-12);
        assert!(split(&a, &w(&[0.5, 0.5, 1.0]), set(&[0]), 1e-9).is_err());
    }

    #[test]
    fn split_orthonormal() {
        let a = fam(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let s = split(&a, &w(&[1.0, 1.0]), set(&[0]), 1e-9).unwrap();
        assert_eq!((s.inner.n(), s.outer.n()), (1, 1));
        assert!(split(&a, &w(&[1.0, 1.0]), set(&[0, 1]), 1e-9).is_err());
    }

    #[test]
    fn split_rejects_zero_weight() {
        let a = fam(2, &[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            split(&a, &w(&[1.0, 1.0, 0.0]), set(&[0]), 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn reducibility_examples() {
        let a = fam(2, &[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let r = total_reducibility(&a, &w(&[0.5, 0.5, 1.0]), 1e-9).unwrap();
        assert!(r.is_totally_reducible());
        let blocks: Vec<Vec<usize>> = r.blocks.iter().map(|b| b.indices.clone()).collect();
        assert_eq!(blocks, vec![vec![0, 1], vec![2]]);
        assert_eq!(r.blocks[0].dim(), 1);

        let t = 2.0 / 3.0;
        let r = total_reducibility(&mercedes(), &w(&[t, t, t]), 1e-9).unwrap();
        assert!(r.is_totally_reducible());
        assert_eq!(r.blocks.len(), 1);
        assert_eq!(r.blocks[0].dim(), 2);

        let a = fam(2, &[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let r = total_reducibility(&a, &w(&[1.0, 1.0, 0.0]), 1e-9).unwrap();
        assert_eq!(r.zero_block, vec![2]);
        let blocks: Vec<Vec<usize>> = r.blocks.iter().map(|b| b.indices.clone()).collect();
        assert_eq!(blocks, vec![vec![0], vec![1]]);

        let r = total_reducibility(&a, &w(&[1.0, 0.5, 0.5]), 1e-9).unwrap();
        assert!(!r.is_totally_reducible());
        assert_eq!(r.certificate, Some(set(&[0])));
    }

    #[test]
    fn reducible_spanning_sets() {
        assert!(is_reducible_spanning_set(&fam(2, &[&[1.0, 0.0], &[0.0, 1.0]])).unwrap());
        assert!(!is_reducible_spanning_set(&mercedes()).unwrap());
        assert!(!is_reducible_spanning_set(&fam(1, &[&[1.0], &[1.0]])).unwrap());
    }
}
