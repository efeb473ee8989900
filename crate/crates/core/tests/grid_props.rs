mod common;

use common::*;
use entsub_core::blverify::{self, FactorSet, GridFunction};
use entsub_core::entropy::{self, Axis, DensityGrid};
use entsub_core::gaussopt::GaussianSpec;
use entsub_core::spectral::{self, Potential};
use entsub_core::Mat;
use proptest::prelude::*;
use rand::Rng;

fn ax(lo: f64, hi: f64, n: usize) -> Axis {
    Axis::new(lo, hi, n).unwrap()
}

fn mixture(seed: u64, grid: Vec<Axis>) -> DensityGrid {
    let mut r = rng(seed);
    let k = r.gen_range(1..=3);
    let parts: Vec<_> = (0..k)
        .map(|_| {
            let q = orthogonal(&mut r, 2);
            let d = Mat::from_diagonal(&entsub_core::Vector::from_fn(2, |_, _| r.gen_range(0.3..1.2)));
            let cov = &q * d * q.transpose();
            let mu = vec![r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
            (r.gen_range(0.2..1.0), mu, GaussianSpec::new((&cov + cov.transpose()) * 0.5).unwrap())
        })
        .collect();
    DensityGrid::gaussian_mixture(grid, &parts).unwrap()
}

fn grid2() -> Vec<Axis> {
    vec![ax(-8.0, 8.0, 160), ax(-8.0, 8.0, 160)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn heat_flow_keeps_mass_and_lowers_entropy(seed in any::<u64>(), tau in 0.01f64..0.5) {
        let f = mixture(seed, vec![ax(-12.0, 12.0, 200), ax(-12.0, 12.0, 200)]);
        let g = entropy::heat_step(&f, tau).unwrap();
        prop_assert!((g.mass() - 1.0).abs() <= 1e-9);
        prop_assert!(entropy::entropy(&g).unwrap() <= entropy::entropy(&f).unwrap());
    }

    #[test]
    fn marginals_keep_mass_and_ignore_sign(seed in any::<u64>(), theta in 0.0f64..std::f64::consts::TAU) {
        let f = mixture(seed, grid2());
        let a = [theta.cos(), theta.sin()];
        let m = entropy::marginal(&f, &a).unwrap().grid;
        prop_assert!((m.mass() - 1.0).abs() <= 1e-9);
        let flipped = entropy::marginal(&f, &[-a[0], -a[1]]).unwrap().grid;
        let (s1, s2) = (entropy::entropy(&m).unwrap(), entropy::entropy(&flipped).unwrap());
        prop_assert!((s1 - s2).abs() <= 1e-9);
    }

    #[test]
    fn entropy_scaling(seed in any::<u64>(), lambda in 0.5f64..2.0) {
        // sample x ↦ f(x/λ)/λ² on the dilated box
        let base = grid2();
        let f = mixture(seed, base.clone());
        let wide: Vec<Axis> = base.iter().map(|a| ax(a.lo * lambda, a.hi * lambda, a.count)).collect();
        let g = DensityGrid::new(wide, f.values().iter().map(|v| v / (lambda * lambda)).collect()).unwrap();
        let ds = entropy::entropy(&g).unwrap() - entropy::entropy(&f).unwrap();
        prop_assert!((ds + 2.0 * lambda.ln()).abs() <= 5e-3);
    }

    #[test]
    fn frame_subadditivity_on_mixtures(seed in any::<u64>()) {
        let (u, c) = random_parseval(&mut rng(seed ^ 9), 2, 4);
        let f = mixture(seed, vec![ax(-8.0, 8.0, 200), ax(-8.0, 8.0, 200)]);
        prop_assert!(entropy::subadditivity_gap(&f, &u, &c).unwrap() <= 5e-3);
        let chk = entropy::fisher_superadditivity_grid(&f, &u, &c, 1e-2).unwrap();
        prop_assert!(chk.holds, "{:?}", chk);
    }

    #[test]
    fn inequality_holds_for_random_factors(seed in any::<u64>()) {
        let mut r = rng(seed);
        let line = ax(-12.0, 12.0, 1200);
        let factors: Vec<GridFunction> = (0..3)
            .map(|_| {
                let (m1, m2) = (r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5));
                let (w1, w2) = (r.gen_range(0.3..1.5), r.gen_range(0.3..1.5));
                let p = r.gen_range(0.0..1.0);
                GridFunction::sample(line, |t| (-(t - m1).powi(2) / w1).exp() + p * (-(t - m2).powi(2) / w2).exp())
            })
            .collect();
        let set = FactorSet::new(factors.clone()).unwrap();
        let grid = [ax(-7.0, 7.0, 140), ax(-7.0, 7.0, 140)];
        let rep = blverify::bl_check(&mercedes(), &mercedes_weights(), &set, &grid).unwrap();
        prop_assert!(rep.holds, "ratio {}", rep.ratio);

        let k = r.gen_range(0.1..10.0);
        let mut scaled = factors;
        scaled[1] = GridFunction::new(line, scaled[1].values.iter().map(|v| v * k).collect()).unwrap();
        let rep2 = blverify::bl_check(&mercedes(), &mercedes_weights(), &FactorSet::new(scaled).unwrap(), &grid).unwrap();
        prop_assert!((rep.ratio - rep2.ratio).abs() <= 1e-12);
    }

    #[test]
    fn spectral_shift_and_monotonicity(seed in any::<u64>(), s in -3.0f64..3.0) {
        let mut r = rng(seed);
        let axis = ax(-10.0, 10.0, 400);
        let (b, d, p) = (r.gen_range(0.5..3.0), r.gen_range(0.0..2.0), r.gen_range(-2.0..2.0));
        let v = Potential::sample(vec![axis], |x| -b * x[0] * x[0] + d * (-(x[0] - p).powi(2)).exp()).unwrap();
        let l = spectral::lambda_1d(&v).unwrap();
        let shifted = spectral::lambda_1d(&v.map(|x| x + s)).unwrap().lambda;
        prop_assert!((shifted - l.lambda - s).abs() <= 1e-12 * (1.0 + l.lambda.abs() + s.abs()) * 10.0);

        let bump: Vec<f64> = (0..400).map(|_| r.gen_range(0.0..0.5)).collect();
        let w = Potential::new(vec![axis], v.values().iter().zip(&bump).map(|(a, e)| a + e).collect()).unwrap();
        prop_assert!(spectral::lambda_1d(&w).unwrap().lambda >= l.lambda - 1e-12);

        for _ in 0..20 {
            let (m, s2) = (r.gen_range(-2.0..2.0), r.gen_range(0.3..3.0));
            let trial: Vec<f64> = (0..400)
                .map(|i| (-(axis.center(i) - m).powi(2) / s2).exp() * (1.0 + 0.3 * normal(&mut r)).abs())
                .collect();
            prop_assert!(spectral::rayleigh_quotient(&v, &trial).unwrap() <= l.lambda + 1e-6);
        }
    }
}

#[test]
fn duality_round_trip_reproduces_the_extremizer() {
    let grid = vec![ax(-8.0, 8.0, 200), ax(-8.0, 8.0, 200)];
    let iso = DensityGrid::gaussian(grid.clone(), &GaussianSpec::new(Mat::identity(2, 2)).unwrap()).unwrap();
    let (a, c) = (mercedes(), mercedes_weights());
    let logs: Vec<GridFunction> = (0..3)
        .map(|j| {
            let col: Vec<f64> = a.column(j).iter().cloned().collect();
            let m = GridFunction::from(&entropy::marginal(&iso, &col).unwrap().grid);
            GridFunction::new(m.axis, m.values.iter().map(|v| v.ln()).collect()).unwrap()
        })
        .collect();
    let f = blverify::duality_density(&a, &c, &logs, &grid).unwrap();
    let peak = iso.values().iter().cloned().fold(0.0, f64::max);
    let err = f.values().iter().zip(iso.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / peak;
    assert!(err <= 1e-2, "{err}");
}
