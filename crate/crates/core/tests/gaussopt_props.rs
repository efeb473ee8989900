mod common;

use common::*;
use entsub_core::family::{self, DEFAULT_EQ_TOL};
use entsub_core::gaussopt::{self, GapOptions, GaussianSpec};
use entsub_core::linops;
use entsub_core::Mat;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_is_concave(seed in any::<u64>(), theta in 0.01f64..0.99) {
        let (a, c) = random_instance(seed, 3, 5);
        let mut r = rng(seed ^ 1);
        let t1: Vec<f64> = (0..5).map(|_| 2.0 * normal(&mut r)).collect();
        let t2: Vec<f64> = (0..5).map(|_| 2.0 * normal(&mut r)).collect();
        let mid: Vec<f64> = t1.iter().zip(&t2).map(|(x, y)| theta * x + (1.0 - theta) * y).collect();
        let f = |t: &[f64]| gaussopt::gap_objective(&a, &c, t).unwrap();
        prop_assert!(f(&mid) >= theta * f(&t1) + (1.0 - theta) * f(&t2) - 1e-10);
    }

    #[test]
    fn affine_covariance(seed in any::<u64>()) {
        let (a, c) = random_instance(seed, 3, 5);
        let mut r = rng(seed ^ 2);
        let t = normal_mat(&mut r, 3, 3) + Mat::identity(3, 3);
        let ln_det = linops::log_abs_det(&t).unwrap();
        prop_assume!(ln_det > -4.0);
        let d = gaussopt::constant(&a, &c).unwrap().d;
        let dt = gaussopt::constant(&a.transformed(&t).unwrap(), &c).unwrap().d;
        prop_assert!((dt - (d - ln_det)).abs() < 1e-6, "{} vs {}", dt, d - ln_det);
    }

    #[test]
    fn column_scaling(seed in any::<u64>(), lambdas in prop::collection::vec(0.1f64..10.0, 4)) {
        let (a, c) = random_instance(seed, 2, 4);
        let mut m = a.matrix().clone();
        for (j, l) in lambdas.iter().enumerate() {
            m.column_mut(j).scale_mut(*l);
        }
        let d = gaussopt::constant(&a, &c).unwrap().d;
        let ds = gaussopt::constant(&entsub_core::SpanningFamily::new(m).unwrap(), &c).unwrap().d;
        let shift: f64 = lambdas.iter().enumerate().map(|(j, l)| c[j] * l.ln()).sum();
        prop_assert!((ds - (d - shift)).abs() < 1e-6);
    }

    #[test]
    fn gaussians_never_beat_the_constant(seed in any::<u64>()) {
        let (a, c) = random_instance(seed, 3, 6);
        let d = gaussopt::constant(&a, &c).unwrap().d;
        let mut r = rng(seed ^ 3);
        for _ in 0..20 {
            let b = normal_mat(&mut r, 3, 3);
            let sigma = &b * b.transpose() + Mat::identity(3, 3) * 1e-3;
            let g = gaussopt::gaussian_gap(&a, &c, &GaussianSpec::new(sigma).unwrap()).unwrap();
            prop_assert!(g <= d + 1e-8, "gap {} above D = {}", g, d);
        }
    }

    #[test]
    fn interior_optimum_is_the_frame_gaussian(seed in any::<u64>(), m in 3usize..6) {
        let (a, c) = random_interior_2d(seed, m);
        let d = gaussopt::constant(&a, &c).unwrap().d;
        let frame = gaussopt::frame_matrix(&a, &c).unwrap();
        prop_assert!(frame.residual <= 1e-8);
        let r2 = &frame.r * &frame.r;
        let g = gaussopt::gaussian_gap(&a, &c, &GaussianSpec::new(r2).unwrap()).unwrap();
        prop_assert!((g - d).abs() <= 1e-8, "gap at R² is {} vs D = {}", g, d);

        let opt = gaussopt::maximize_gap(&a, &c, &GapOptions::default()).unwrap();
        let grad = gaussopt::phi_grad(&a, &opt.t_star).unwrap();
        for j in 0..m {
            prop_assert!((grad[j] - c[j]).abs() <= 1e-9);
        }
    }

    #[test]
    fn frame_exists_iff_totally_reducible(seed in any::<u64>()) {
        let (a, c) = random_instance(seed, 3, 5);
        let report = family::total_reducibility(&a, &c, DEFAULT_EQ_TOL).unwrap();
        let (active, _) = family::positive_support(&c, DEFAULT_EQ_TOL);
        prop_assume!(active.len() == c.len());
        if report.is_totally_reducible() {
            prop_assert!(gaussopt::frame_matrix(&a, &c).unwrap().residual <= 1e-8);
        } else {
            let opt = gaussopt::maximize_gap(&a, &c, &GapOptions::default()).unwrap();
            prop_assert!(!opt.attained && opt.recession.is_some());
        }
    }

    #[test]
    fn hadamard_type_bound(seed in any::<u64>()) {
        let (a, c) = random_instance(seed, 3, 5);
        let mut r = rng(seed ^ 4);
        let t = normal_mat(&mut r, 3, 3);
        prop_assume!(linops::log_abs_det(&t).is_ok_and(|l| l > -6.0));
        prop_assert!(gaussopt::hadamard_check(&a, &c, &t).unwrap().holds);
    }
}

#[test]
fn reducible_boundary_has_recession() {
    let a = entsub_core::SpanningFamily::from_columns(2, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let c = entsub_core::WeightVector::new(vec![1.0, 0.5, 0.5]).unwrap();
    assert!(gaussopt::frame_matrix(&a, &c).is_err());
    let opt = gaussopt::maximize_gap(&a, &c, &GapOptions::default()).unwrap();
    assert!(!opt.attained);
    let dir = opt.recession.unwrap();
    let f0 = gaussopt::gap_objective(&a, &c, &opt.t_star).unwrap();
    let far: Vec<f64> = opt.t_star.iter().zip(&dir).map(|(t, d)| t + 5.0 * d).collect();
    assert!(gaussopt::gap_objective(&a, &c, &far).unwrap() >= f0 - 1e-9);
}
