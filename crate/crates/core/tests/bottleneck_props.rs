mod common;

use common::{brute_bottleneck, brute_hausdorff, random_bars, random_cloud};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabgauge::diagram::{barcode_of, bottleneck, hausdorff, matched_cost, Matched};
use tabgauge::persistence::{Bar, PersistenceDiagram};
use tabgauge::Matrix;

fn bars_strategy(max: usize) -> impl Strategy<Value = Vec<Bar>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..=max)
        .prop_map(|v| v.into_iter().map(|(b, p)| Bar::new(b, b + p)).collect())
}

fn dg(bars: Vec<Bar>) -> PersistenceDiagram {
    PersistenceDiagram::new(0, bars)
}

fn db(a: &[Bar], b: &[Bar]) -> f64 {
    bottleneck(&dg(a.to_vec()), &dg(b.to_vec()))
        .unwrap()
        .distance
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn equals_exhaustive_search(a in bars_strategy(5), b in bars_strategy(5)) {
        let fast = db(&a, &b);
        let slow = brute_bottleneck(&a, &b);
        prop_assert!((fast - slow).abs() < 1e-9, "{} vs {}", fast, slow);
    }

    #[test]
    fn metric_axioms(a in bars_strategy(6), b in bars_strategy(6), c in bars_strategy(6)) {
        prop_assert_eq!(db(&a, &a), 0.0);
        prop_assert_eq!(db(&a, &b), db(&b, &a));
        prop_assert!(db(&a, &c) <= db(&a, &b) + db(&b, &c) + 1e-9);
    }

    #[test]
    fn hausdorff_bounds_bottleneck_from_below(a in bars_strategy(6), b in bars_strategy(6)) {
        let (x, y) = (dg(a.clone()), dg(b.clone()));
        let h = hausdorff(&x, &y);
        prop_assert!((h - brute_hausdorff(&a, &b)).abs() < 1e-12);
        prop_assert!(h <= db(&a, &b) + 1e-12);
    }

    #[test]
    fn matching_realizes_distance(a in bars_strategy(7), b in bars_strategy(7)) {
        let r = bottleneck(&dg(a.clone()), &dg(b.clone())).unwrap();
        let mut left = vec![0; a.len()];
        let mut right = vec![0; b.len()];
        let mut worst: f64 = 0.0;
        for m in &r.matching {
            match *m {
                Matched::Pair(i, j) => { left[i] += 1; right[j] += 1; }
                Matched::LeftDiagonal(i) => left[i] += 1,
                Matched::RightDiagonal(j) => right[j] += 1,
            }
            worst = worst.max(matched_cost(&a, &b, *m));
        }
        prop_assert!(left.iter().chain(&right).all(|c| *c == 1));
        prop_assert_eq!(worst, r.distance);
    }
}

#[test]
fn seeded_pairs_against_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let a = random_bars(&mut rng, 5);
        let b = random_bars(&mut rng, 5);
        let d = db(&a, &b);
        assert!((d - brute_bottleneck(&a, &b)).abs() < 1e-9);
        assert!(hausdorff(&dg(a), &dg(b)) <= d + 1e-12);
    }
}

#[test]
fn single_pair_example() {
    assert_eq!(db(&[Bar::new(0.0, 1.0)], &[Bar::new(0.0, 1.5)]), 0.5);
}

fn perturb(points: &Matrix, delta: f64, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = points.clone();
    for i in 0..out.rows() {
        let dir: Vec<f64> = (0..out.cols())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        let r = delta * rng.random_range(0.0..=1.0);
        for (x, v) in out.row_mut(i).iter_mut().zip(&dir) {
            *x += r * v / norm;
        }
    }
    out
}

#[test]
fn h0_stable_under_small_perturbations() {
    for seed in 0..20 {
        let points = random_cloud(20, 3, seed);
        let base = barcode_of(&points, 0).unwrap();
        for delta in [0.001, 0.01] {
            let moved = barcode_of(&perturb(&points, delta, seed + 100), 0).unwrap();
            let d = bottleneck(&base, &moved).unwrap().distance;
            assert!(d <= 2.0 * delta + 1e-12, "seed {seed} delta {delta}: {d}");
        }
    }
}
