use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ser_core::svm::{
    decision_value, dual_objective, rbf_kernel, smo_solve, smo_train, BinarySvmModel, SvmError,
    SvmParams,
};

fn params(c: f64, gamma: f64) -> SvmParams {
    SvmParams {
        c,
        gamma: Some(gamma),
        ..SvmParams::default()
    }
}

mod common;

use common::{face_oracle, small_svm_problem as random_problem};

/// Margin conditions on the trained model, within `tol`.
fn assert_kkt(x: &[Vec<f64>], y: &[i8], alphas: &[f64], model: &BinarySvmModel, c: f64, tol: f64) {
    for ((xi, &yi), &a) in x.iter().zip(y).zip(alphas) {
        let m = f64::from(yi) * decision_value(model, xi).unwrap();
        if a <= 1e-9 {
            assert!(m >= 1.0 - tol, "a=0 but margin {m}");
        } else if a >= c - 1e-9 {
            assert!(m <= 1.0 + tol, "a=C but margin {m}");
        } else {
            assert!((m - 1.0).abs() <= tol, "free a={a} but margin {m}");
        }
    }
}

#[test]
fn small_problems_reach_the_oracle_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for seed in 0..100 {
        let (x, y, c, gamma) = random_problem(&mut rng);
        let p = params(c, gamma);
        let sol = smo_solve(&x, &y, &p).unwrap();
        let oracle = face_oracle(&x, &y, c, gamma);
        assert!(
            sol.dual_objective >= oracle - 1e-3,
            "seed {seed}: smo {} < oracle {oracle}",
            sol.dual_objective
        );
        assert!(sol.alphas.iter().all(|&a| (0.0..=c).contains(&a)));
        let balance: f64 = sol.alphas.iter().zip(&y).map(|(a, &l)| a * f64::from(l)).sum();
        assert!(balance.abs() <= 1e-6);
        let model = smo_train(&x, &y, &p).unwrap();
        assert_kkt(&x, &y, &sol.alphas, &model, c, p.kkt_tolerance);
    }
}

#[test]
fn xor_separates() {
    let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let y = vec![-1, -1, 1, 1];
    let p = params(10.0, 1.0);
    let model = smo_train(&x, &y, &p).unwrap();
    for (xi, &yi) in x.iter().zip(&y) {
        assert_eq!(model.predict(xi).unwrap(), yi);
    }
    let sol = smo_solve(&x, &y, &p).unwrap();
    assert!(sol.dual_objective >= face_oracle(&x, &y, 10.0, 1.0) - 1e-3);

    // brute force over the two free multipliers left after symmetry:
    // a = (s, s, t, t) with the equality constraint forcing s = t
    let mut grid_best = f64::NEG_INFINITY;
    for i in 0..=10_000 {
        let s = 10.0 * i as f64 / 10_000.0;
        grid_best = grid_best.max(dual_objective(&x, &y, &[s, s, s, s], 1.0));
    }
    assert!((sol.dual_objective - grid_best).abs() <= 1e-3);
}

#[test]
fn mirrored_pair() {
    let x = vec![vec![-1.0], vec![1.0]];
    let y = vec![-1, 1];
    let model = smo_train(&x, &y, &params(10.0, 1.0)).unwrap();
    assert!(model.bias.abs() <= 1e-6);
    assert_eq!(model.n_support(), 2);
    assert!((model.coefficients[0] + model.coefficients[1]).abs() <= 1e-12);
    assert_eq!(model.predict(&x[0]).unwrap(), -1);
    assert_eq!(model.predict(&x[1]).unwrap(), 1);
}

#[test]
fn one_class_is_rejected() {
    let x = vec![vec![0.0], vec![1.0]];
    assert_eq!(
        smo_train(&x, &[1, 1], &SvmParams::default()),
        Err(SvmError::SingleClassInput)
    );
}

#[test]
fn decision_value_matches_hand_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let dim = rng.gen_range(1..5);
        let n = rng.gen_range(1..8);
        let model = BinarySvmModel {
            support_vectors: (0..n)
                .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect(),
            coefficients: (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            bias: rng.gen_range(-1.0..1.0),
            gamma: rng.gen_range(0.1..2.0),
            c: 10.0,
            dim,
        };
        let q: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut hand = model.bias;
        for (sv, a) in model.support_vectors.iter().zip(&model.coefficients) {
            let d2: f64 = sv.iter().zip(&q).map(|(u, v)| (u - v) * (u - v)).sum();
            hand += a * (-model.gamma * d2).exp();
        }
        assert!((decision_value(&model, &q).unwrap() - hand).abs() <= 1e-12);
    }
}

proptest! {
    #[test]
    fn label_swap_negates_decisions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..20);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
            .collect();
        let mut y: Vec<i8> = x.iter().map(|p| if p[0] + 0.3 * p[1] > 0.0 { 1 } else { -1 }).collect();
        y[0] = 1;
        y[1] = -1;
        let flipped: Vec<i8> = y.iter().map(|v| -v).collect();
        let p = params(1.0, 0.5);
        let a = smo_train(&x, &y, &p).unwrap();
        let b = smo_train(&x, &flipped, &p).unwrap();
        for _ in 0..20 {
            let q = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let (fa, fb) = (a.decision_value(&q).unwrap(), b.decision_value(&q).unwrap());
            prop_assert!((fa + fb).abs() <= 1e-9, "{} vs {}", fa, fb);
        }
    }

    #[test]
    fn training_is_deterministic_and_feasible(seed in any::<u64>(), c in 0.05f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..30);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut y: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        y[0] = 1;
        y[1] = -1;
        let p = params(c, 1.0);
        let first = smo_train(&x, &y, &p).unwrap();
        prop_assert_eq!(&first, &smo_train(&x, &y, &p).unwrap());
        prop_assert!(first.n_support() >= 1);
        prop_assert!(first.coefficients.iter().all(|a| a.abs() <= c));
        prop_assert!(first.coefficients.iter().sum::<f64>().abs() <= 1e-6);

        let sol = smo_solve(&x, &y, &p).unwrap();
        assert_kkt(&x, &y, &sol.alphas, &first, c, p.kkt_tolerance);
    }

    #[test]
    fn kernel_symmetry(u in prop::collection::vec(-5.0f64..5.0, 1..6), g in 0.01f64..3.0) {
        let v: Vec<f64> = u.iter().map(|x| x * 0.5 - 1.0).collect();
        prop_assert_eq!(rbf_kernel(&u, &u, g).unwrap(), 1.0);
        prop_assert_eq!(rbf_kernel(&u, &v, g).unwrap(), rbf_kernel(&v, &u, g).unwrap());
    }
}
