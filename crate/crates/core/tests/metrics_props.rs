use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tabgauge::metrics::{
    cluster_measure, cluster_measure_from_records, cluster_records, fit_logistic, mmd_rbf, pmse_of,
    propensity_score, standardization, ClusterWeights, Gamma, LOGISTIC_L2,
};
use tabgauge::tabular::{DatasetPair, PointCloud};
use tabgauge::Matrix;

fn gaussian(n: usize, d: usize, shift: f64, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            shift + z
        })
        .collect();
    Matrix::from_vec(n, d, data)
}

fn pair(a: Matrix, b: Matrix) -> DatasetPair {
    DatasetPair::from_clouds(PointCloud::from_matrix(a), PointCloud::from_matrix(b))
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            let pivot = a[c].clone();
            for (x, p) in a[r].iter_mut().zip(&pivot).skip(c) {
                *x -= f * p;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Newton's method on the same penalized objective, run to convergence.
/// Returns fitted probabilities.
fn newton_logistic(points: &Matrix, labels: &[u8]) -> Vec<f64> {
    let (mean, scale) = standardization(points);
    let (n, d) = (points.rows(), points.cols());
    let x: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = vec![1.0];
            r.extend((0..d).map(|j| (points.get(i, j) - mean[j]) / scale[j]));
            r
        })
        .collect();
    let sig = |z: f64| 1.0 / (1.0 + (-z).exp());
    let mut beta = vec![0.0; d + 1];
    for _ in 0..50 {
        let p: Vec<f64> = x
            .iter()
            .map(|r| sig(r.iter().zip(&beta).map(|(a, b)| a * b).sum()))
            .collect();
        let mut grad = vec![0.0; d + 1];
        let mut hess = vec![vec![0.0; d + 1]; d + 1];
        for i in 0..n {
            let e = p[i] - f64::from(labels[i]);
            let w = p[i] * (1.0 - p[i]);
            for a in 0..=d {
                grad[a] += e * x[i][a] / n as f64;
                for b in 0..=d {
                    hess[a][b] += w * x[i][a] * x[i][b] / n as f64;
                }
            }
        }
        for a in 1..=d {
            grad[a] += LOGISTIC_L2 * beta[a];
            hess[a][a] += LOGISTIC_L2;
        }
        let step = solve(hess, grad);
        for (b, s) in beta.iter_mut().zip(step) {
            *b -= s;
        }
    }
    x.iter()
        .map(|r| sig(r.iter().zip(&beta).map(|(a, b)| a * b).sum()))
        .collect()
}

#[test]
fn gradient_descent_fit_matches_newton_oracle() {
    let p = pair(gaussian(25, 3, 0.0, 1), gaussian(25, 3, 0.4, 2));
    let points = p.combined();
    let fitted = fit_logistic(&points, &p.labels).predict(&points);
    let oracle = newton_logistic(&points, &p.labels);
    let worst = fitted
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "max |dp| = {worst}");
}

#[test]
fn pmse_is_symmetric_under_label_swap() {
    let a = gaussian(20, 3, 0.0, 3);
    let b = gaussian(20, 3, 0.7, 4);
    let ab = propensity_score(&pair(a.clone(), b.clone())).pmse;
    let ba = propensity_score(&pair(b, a)).pmse;
    assert!((ab - ba).abs() < 1e-9, "{ab} vs {ba}");
}

#[test]
fn pmse_copy_and_separation() {
    let a = gaussian(30, 4, 0.0, 5);
    assert!(propensity_score(&pair(a.clone(), a.clone())).pmse < 0.01);
    let far = propensity_score(&pair(a, gaussian(30, 4, 10.0, 6))).pmse;
    assert!(far > 0.2 && far <= 0.25, "{far}");
}

#[test]
fn mmd_grows_with_separation() {
    let x = gaussian(40, 2, 0.0, 7);
    let base = gaussian(40, 2, 0.0, 8);
    let mut last = -1.0;
    for delta in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let y = Matrix::from_vec(40, 2, base.as_slice().iter().map(|v| v + delta).collect());
        let m = mmd_rbf(&x, &y, Gamma::Fixed(0.5)).unwrap().mmd2;
        assert!(m > last, "delta {delta}: {m} <= {last}");
        last = m;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pmse_in_range(p in prop::collection::vec(0.0f64..=1.0, 1..50)) {
        let v = pmse_of(&p);
        prop_assert!((0.0..=0.25).contains(&v));
    }

    #[test]
    fn cluster_measure_nonnegative(
        assign in prop::collection::vec(0usize..4, 4..40),
        seed in any::<u64>(),
        by_size in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<u8> = assign.iter().map(|_| u8::from(rng.random_bool(0.5))).collect();
        let n_real = labels.iter().filter(|l| **l == 0).count();
        let c = n_real as f64 / labels.len() as f64;
        let w = if by_size { ClusterWeights::BySize } else { ClusterWeights::Uniform };
        let recs = cluster_records(&assign, &labels, 4, w);
        let u = cluster_measure_from_records(&recs, c);
        prop_assert!(u >= 0.0 && u.is_finite());
    }

    #[test]
    fn mmd_self_is_zero_and_symmetric(seed in any::<u64>(), g in 0.1f64..5.0) {
        let x = gaussian(8, 2, 0.0, seed);
        let y = gaussian(6, 2, 0.5, seed ^ 1);
        prop_assert_eq!(mmd_rbf(&x, &x, Gamma::Fixed(g)).unwrap().mmd2, 0.0);
        let xy = mmd_rbf(&x, &y, Gamma::Fixed(g)).unwrap().mmd2;
        let yx = mmd_rbf(&y, &x, Gamma::Fixed(g)).unwrap().mmd2;
        prop_assert!((xy - yx).abs() < 1e-12);
    }
}

#[test]
fn cluster_measure_identical_halves_is_small() {
    let a = gaussian(40, 3, 0.0, 11);
    let r = cluster_measure(&pair(a.clone(), a), 5, ClusterWeights::Uniform, 1).unwrap();
    // every cluster holds each point twice, once per label
    assert!(r.u_c.abs() < 1e-15, "{}", r.u_c);
}
