//! Fixed instances shared by the benchmarks.

use entsub_core::spectral::Potential;
use entsub_core::{Axis, Mat, SpanningFamily, WeightVector};

/// `m` unit vectors in the plane at equal angles, weights `2/m`.
pub fn planar_frame(m: usize) -> (SpanningFamily, WeightVector) {
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let th = std::f64::consts::PI * j as f64 / m as f64;
            vec![th.cos(), th.sin()]
        })
        .collect();
    let a = SpanningFamily::from_columns(2, &cols).expect("distinct directions span the plane");
    (a, WeightVector::new(vec![2.0 / m as f64; m]).expect("weights in [0,1]"))
}

/// Coordinate axes of `ℝⁿ` plus `m − n` deterministic pseudo-random
/// directions, with equal weights `n/m`.
pub fn generic_family(n: usize, m: usize) -> (SpanningFamily, WeightVector) {
    assert!(m > n);
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        // xorshift, enough for a fixed fixture
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut cols = Mat::zeros(n, m);
    for j in 0..m {
        for i in 0..n {
            cols[(i, j)] = if j < n { (i == j) as u8 as f64 } else { next() };
        }
    }
    let a = SpanningFamily::new(cols).expect("the coordinate axes span");
    (a, WeightVector::new(vec![n as f64 / m as f64; m]).expect("weights in [0,1]"))
}

/// `V(x) = −|x|²` on the square `[−8, 8]²` with `cells` per axis.
pub fn harmonic_2d(cells: usize) -> Potential {
    let ax = Axis::new(-8.0, 8.0, cells).expect("valid axis");
    Potential::sample(vec![ax, ax], |x| -(x[0] * x[0] + x[1] * x[1])).expect("finite samples")
}
