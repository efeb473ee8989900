#![allow(dead_code)]

use entsub_core::{Mat, SpanningFamily, WeightVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box–Muller.
pub fn normal(r: &mut impl Rng) -> f64 {
    let u: f64 = r.gen_range(f64::EPSILON..1.0);
    let v: f64 = r.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn normal_mat(r: &mut impl Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| normal(r))
}

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn orthogonal(r: &mut impl Rng, n: usize) -> Mat {
    let qr = normal_mat(r, n, n).qr();
    let (q, rr) = (qr.q(), qr.r());
    let mut q = q;
    for k in 0..n {
        if rr[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

pub fn mercedes() -> SpanningFamily {
    let s = 3f64.sqrt() / 2.0;
    SpanningFamily::from_columns(2, &[vec![1.0, 0.0], vec![-0.5, s], vec![-0.5, -s]]).unwrap()
}

pub fn mercedes_weights() -> WeightVector {
    WeightVector::new(vec![2.0 / 3.0; 3]).unwrap()
}

/// Unit vectors and weights of a Parseval frame: the first `n` rows of a random
/// `m × m` orthogonal matrix, columns normalized, weights their squared norms.
pub fn random_parseval(r: &mut impl Rng, n: usize, m: usize) -> (SpanningFamily, WeightVector) {
    let q = orthogonal(r, m);
    let rows = q.rows(0, n).into_owned();
    let mut u = rows.clone();
    let mut c = Vec::with_capacity(m);
    for j in 0..m {
        let norm = rows.column(j).norm();
        u.column_mut(j).scale_mut(1.0 / norm);
        c.push(norm * norm);
    }
    (SpanningFamily::new(u).unwrap(), WeightVector::new(c).unwrap())
}

/// Random unit vector in the plane at angle `theta`.
pub fn unit2(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

/// A weight vector in `K_A` as a random convex combination of indicator
/// vectors of bases, so that it is feasible by construction.
pub fn random_base_weights(r: &mut impl Rng, a: &SpanningFamily, draws: usize) -> WeightVector {
    let (n, m) = (a.n(), a.m());
    let mut c = vec![0.0; m];
    let mut total = 0.0;
    let mut found = 0;
    while found < draws {
        let mut idx: Vec<usize> = (0..m).collect();
        for i in 0..n {
            let k = r.gen_range(i..m);
            idx.swap(i, k);
        }
        let basis = &idx[..n];
        let mask = entsub_core::Subset::from_indices(basis);
        if a.span_dim(mask) < n {
            continue;
        }
        let w: f64 = r.gen_range(0.1..1.0);
        for &j in basis {
            c[j] += w;
        }
        total += w;
        found += 1;
    }
    WeightVector::new(c.into_iter().map(|x| x / total).collect()).unwrap()
}

/// Random family in ℝⁿ with `m` columns and feasible weights from a seed.
pub fn random_instance(seed: u64, n: usize, m: usize) -> (SpanningFamily, WeightVector) {
    let mut r = rng(seed);
    loop {
        let cols = normal_mat(&mut r, n, m);
        let Ok(a) = SpanningFamily::new(cols) else { continue };
        let c = random_base_weights(&mut r, &a, 2 + m);
        return (a, c);
    }
}

/// Generic interior instance in the plane: spread-out directions, weights in `(0,1)`.
pub fn random_interior_2d(seed: u64, m: usize) -> (SpanningFamily, WeightVector) {
    let mut r = rng(seed);
    loop {
        let cols: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                let th = std::f64::consts::PI * (j as f64 + r.gen_range(0.1..0.9)) / m as f64;
                let s = r.gen_range(0.5..2.0);
                vec![s * th.cos(), s * th.sin()]
            })
            .collect();
        let a = SpanningFamily::from_columns(2, &cols).unwrap();
        let raw: Vec<f64> = (0..m).map(|_| r.gen_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let c: Vec<f64> = raw.iter().map(|x| 2.0 * x / total).collect();
        if c.iter().all(|&x| x < 0.95) {
            return (a, WeightVector::new(c).unwrap());
        }
    }
}

/// Boundary instance in ℝ³: the first two columns are parallel and carry total weight 1.
pub fn random_boundary_3d(seed: u64) -> (SpanningFamily, WeightVector) {
    let mut r = rng(seed);
    let mut m = normal_mat(&mut r, 3, 5);
    let k = r.gen_range(0.2..3.0);
    let col = m.column(0) * k;
    m.set_column(1, &col);
    let c0 = r.gen_range(0.1..0.9);
    let c = vec![c0, 1.0 - c0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
    (SpanningFamily::new(m).unwrap(), WeightVector::new(c).unwrap())
}
