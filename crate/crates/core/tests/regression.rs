#![allow(clippy::needless_range_loop)]

use geocorpus::factors::{cross_validate, fit_ols, SplitMix64};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn uniform(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Solves `[1 X]^T [1 X] b = [1 X]^T y` by Gaussian elimination with partial
/// pivoting. Returns `(intercept, slopes)`.
fn normal_equations(x: &DMatrix<f64>, y: &DVector<f64>) -> (f64, Vec<f64>) {
    let (n, p) = x.shape();
    let q = p + 1;
    let col = |i: usize, j: usize| if j == 0 { 1.0 } else { x[(i, j - 1)] };
    let mut a = vec![vec![0.0; q + 1]; q];
    for r in 0..q {
        for c in 0..q {
            a[r][c] = (0..n).map(|i| col(i, r) * col(i, c)).sum();
        }
        a[r][q] = (0..n).map(|i| col(i, r) * y[i]).sum();
    }
    for k in 0..q {
        let piv = (k..q).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        for r in k + 1..q {
            let f = a[r][k] / a[k][k];
            for c in k..=q {
                a[r][c] -= f * a[k][c];
            }
        }
    }
    let mut b = vec![0.0; q];
    for k in (0..q).rev() {
        let s: f64 = (k + 1..q).map(|c| a[k][c] * b[c]).sum();
        b[k] = (a[k][q] - s) / a[k][k];
    }
    (b[0], b[1..].to_vec())
}

fn random_system(seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = SplitMix64::new(seed);
    let p = 1 + (rng.next_u64() % 5) as usize;
    let n = p + 10 + (rng.next_u64() % 190) as usize;
    let x = DMatrix::from_fn(n, p, |_, _| uniform(&mut rng) * 3.0);
    let beta: Vec<f64> = (0..p).map(|_| uniform(&mut rng) * 5.0).collect();
    let y =
        DVector::from_fn(n, |i, _| 2.0 + (0..p).map(|j| beta[j] * x[(i, j)]).sum::<f64>() + uniform(&mut rng) * 0.5);
    (x, y)
}

#[test]
fn ols_matches_normal_equations_on_random_systems() {
    for seed in 0..100 {
        let (x, y) = random_system(seed);
        let fit = fit_ols(&x, &y).unwrap();
        let (b0, b) = normal_equations(&x, &y);
        for (j, expected) in b.iter().enumerate() {
            let rel = (fit.coefficients[j] - expected).abs() / expected.abs().max(1.0);
            assert!(rel < 1e-6, "seed {seed} coef {j}: {} vs {expected}", fit.coefficients[j]);
        }
        assert!((fit.intercept - b0).abs() / b0.abs().max(1.0) < 1e-6);
    }
}

#[test]
fn ols_matches_oracle_on_50_by_3() {
    let mut rng = SplitMix64::new(50);
    let x = DMatrix::from_fn(50, 3, |_, _| uniform(&mut rng));
    let y = DVector::from_fn(50, |_, _| uniform(&mut rng));
    let fit = fit_ols(&x, &y).unwrap();
    let (b0, b) = normal_equations(&x, &y);
    for j in 0..3 {
        assert!((fit.coefficients[j] - b[j]).abs() < 1e-6);
    }
    assert!((fit.intercept - b0).abs() < 1e-6);
}

fn rss(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let fit = fit_ols(x, y).unwrap();
    (y - fit.predict(x)).norm_squared()
}

#[test]
fn adding_a_feature_never_increases_training_residual() {
    for seed in 0..20 {
        let (x, y) = random_system(1000 + seed);
        let mut prev = f64::INFINITY;
        for p in 0..=x.ncols() {
            let sub = x.columns(0, p).into_owned();
            let r = rss(&sub, &y);
            assert!(r <= prev * (1.0 + 1e-9) + 1e-9, "seed {seed} p {p}: {r} > {prev}");
            prev = r;
        }
    }
}

#[test]
fn cv_on_linear_data_is_exact() {
    let mut rng = SplitMix64::new(9);
    let x = DMatrix::from_fn(40, 3, |_, _| uniform(&mut rng));
    let y = DVector::from_fn(40, |i, _| 0.3 - x[(i, 0)] + 2.0 * x[(i, 1)] + 0.5 * x[(i, 2)]);
    let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
    let r = cross_validate(&x, &y, &names, 5, 17).unwrap();
    assert!((r.mean_explained_variance - 1.0).abs() < 1e-6);
    assert!(r.mean_mae < 1e-6);
    assert_eq!(r.per_fold.len(), 5);
}

proptest! {
    #[test]
    fn cv_means_are_fold_averages(seed in any::<u64>(), folds in 2usize..7) {
        let (x, y) = random_system(seed);
        let names: Vec<String> = (0..x.ncols()).map(|i| format!("f{i}")).collect();
        let r = cross_validate(&x, &y, &names, folds, seed).unwrap();
        prop_assert_eq!(r.per_fold.len(), folds);
        let ev = r.per_fold.iter().map(|f| f.explained_variance).sum::<f64>() / folds as f64;
        let mae = r.per_fold.iter().map(|f| f.mae).sum::<f64>() / folds as f64;
        prop_assert!((ev - r.mean_explained_variance).abs() < 1e-12);
        prop_assert!((mae - r.mean_mae).abs() < 1e-12);
        prop_assert!(r.per_fold.iter().all(|f| f.explained_variance <= 1.0 + 1e-12));
        prop_assert_eq!(r.per_fold.iter().map(|f| f.test_rows).sum::<usize>(), x.nrows());
    }
}
