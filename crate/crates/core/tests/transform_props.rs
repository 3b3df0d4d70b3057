mod common;

use common::*;
use mri_lk::cli::time_transform;
use mri_lk::forward::power_iteration;
use mri_lk::transform::{DftAlgorithm, DftPlan};
use mri_lk::{Complex64, ComplexImage, GridShape};
use proptest::prelude::*;

#[test]
fn adjoint_after_forward_is_p_times_identity() {
    let mut rng = rng(11);
    for k in 0..=12 {
        let p = 1usize << k;
        let algorithms: &[DftAlgorithm] = if p <= 1024 {
            &[DftAlgorithm::Fast, DftAlgorithm::Naive]
        } else {
            &[DftAlgorithm::Fast]
        };
        for &alg in algorithms {
            let plan = DftPlan::new(p, alg).unwrap();
            let x = random_values(p, &mut rng);
            let mut y = x.clone();
            plan.forward_in_place(&mut y).unwrap();
            plan.adjoint_in_place(&mut y).unwrap();
            let want: Vec<Complex64> = x.iter().map(|z| z * p as f64).collect();
            assert!(diff_norm(&y, &want) <= 1e-12 * p as f64 * norm(&x), "p = {p}, {alg:?}");
        }
    }
}

#[test]
fn non_power_of_two_lengths_use_the_direct_sum() {
    let mut rng = rng(12);
    for p in [3usize, 6, 12, 30] {
        let plan = DftPlan::auto(p).unwrap();
        assert_eq!(plan.algorithm(), DftAlgorithm::Naive);
        let x = random_values(p, &mut rng);
        let mut y = x.clone();
        plan.forward_in_place(&mut y).unwrap();
        assert!(diff_norm(&y, &naive_dft(&x)) <= 1e-12 * norm(&x) * p as f64);
    }
    assert!(DftPlan::new(12, DftAlgorithm::Fast).is_err());
}

#[test]
fn power_iteration_recovers_sqrt_p() {
    for (h, v) in [(8, 8), (16, 4), (32, 32)] {
        let shape = GridShape::new(h, v).unwrap();
        let plan = DftPlan::auto(shape.p_num()).unwrap();
        let start = random_image(shape, &mut rng(13));
        let est = power_iteration(start, 100, 1e-6, |x: &ComplexImage| plan.adjoint(&plan.forward(x)?)).unwrap();
        let want = (shape.p_num() as f64).sqrt();
        assert!((est - want).abs() <= 1e-6 * want, "{h}x{v}: {est}");
    }
}

#[test]
fn fast_transform_handles_65536() {
    let p = 1 << 16;
    let plan = DftPlan::new(p, DftAlgorithm::Fast).unwrap();
    let x = random_values(p, &mut rng(14));
    let shape = GridShape::new(256, 256).unwrap();
    let img = ComplexImage::new(shape, x.clone()).unwrap();
    let back = plan.inverse(&plan.forward(&img).unwrap()).unwrap();
    assert!(diff_norm(back.values(), &x) <= 1e-12 * norm(&x));
}

/// Soft timing check: doubling the length should cost at most 2.6× for n ≥ 1024.
/// Each size takes the best of several medians to ride out scheduler noise.
#[test]
fn fast_transform_scales_like_n_log_n() {
    let best = |n: usize| {
        (0..5)
            .map(|_| time_transform(n, DftAlgorithm::Fast, 7).unwrap())
            .fold(f64::INFINITY, f64::min)
    };
    let sizes = [1024usize, 2048, 4096, 8192, 16384];
    let times: Vec<f64> = sizes.iter().map(|&n| best(n)).collect();
    for (w, n) in times.windows(2).zip(sizes) {
        let ratio = w[1] / w[0];
        assert!(ratio <= 2.6, "time({})/time({n}) = {ratio:.2}", 2 * n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(values in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 64)) {
        let x: Vec<Complex64> = values.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let plan = DftPlan::new(64, DftAlgorithm::Fast).unwrap();
        let mut y = x.clone();
        plan.forward_in_place(&mut y).unwrap();
        let lhs = norm(&y).powi(2);
        let rhs = 64.0 * norm(&x).powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (rhs + 1.0));
    }

    #[test]
    fn forward_is_linear(
        a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        s in (-3.0f64..3.0, -3.0f64..3.0),
    ) {
        let to = |v: &[(f64, f64)]| v.iter().map(|&(r, i)| Complex64::new(r, i)).collect::<Vec<_>>();
        let (a, b, s) = (to(&a), to(&b), Complex64::new(s.0, s.1));
        let plan = DftPlan::new(16, DftAlgorithm::Fast).unwrap();
        let f = |v: &[Complex64]| {
            let mut w = v.to_vec();
            plan.forward_in_place(&mut w).unwrap();
            w
        };
        let combo: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * s + y).collect();
        let lhs = f(&combo);
        let rhs: Vec<Complex64> = f(&a).iter().zip(f(&b)).map(|(x, y)| x * s + y).collect();
        prop_assert!(diff_norm(&lhs, &rhs) <= 1e-12 * (norm(&lhs) + 1.0));
    }
}
