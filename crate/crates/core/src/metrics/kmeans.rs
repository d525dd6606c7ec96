use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{sq_euclidean, Matrix};

pub const MAX_LLOYD_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Matrix,
    /// Within-cluster sum of squares after each Lloyd update, starting with the seeding.
    pub objective_trace: Vec<f64>,
}

fn nearest(centroids: &Matrix, row: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centre) in centroids.iter_rows().enumerate() {
        let d = sq_euclidean(centre, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn sse(points: &Matrix, centroids: &Matrix, assign: &[usize]) -> f64 {
    points
        .iter_rows()
        .zip(assign)
        .map(|(r, &c)| sq_euclidean(r, centroids.row(c)))
        .sum()
}

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing (or [`MAX_LLOYD_ITERATIONS`]). Empty clusters are re-seeded at the
/// point farthest from its centroid.
pub fn kmeans(points: &Matrix, clusters: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.rows();
    if clusters > n {
        return Err(Error::CLargerThanN {
            clusters,
            points: n,
        });
    }
    if clusters == 0 {
        return Err(Error::InvalidConfig(
            "cluster count must be positive".into(),
        ));
    }
    let d = points.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++
    let mut centroids = Matrix::zeros(clusters, d);
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(points.row(first));
    let mut d2: Vec<f64> = points
        .iter_rows()
        .map(|r| sq_euclidean(r, centroids.row(0)))
        .collect();
    for c in 1..clusters {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, w) in d2.iter().enumerate() {
                acc += w;
                if acc > target {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(points.row(pick));
        for (i, r) in points.iter_rows().enumerate() {
            d2[i] = d2[i].min(sq_euclidean(r, centroids.row(c)));
        }
    }

    let mut assign: Vec<usize> = points
        .iter_rows()
        .map(|r| nearest(&centroids, r).0)
        .collect();
    let mut trace = vec![sse(points, &centroids, &assign)];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        // update step
        let mut sums = Matrix::zeros(clusters, d);
        let mut counts = vec![0usize; clusters];
        for (r, &c) in points.iter_rows().zip(&assign) {
            counts[c] += 1;
            for (s, x) in sums.row_mut(c).iter_mut().zip(r) {
                *s += x;
            }
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let inv = 1.0 / count as f64;
                for (dst, s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            }
        }
        for c in 0..clusters {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_euclidean(points.row(a), centroids.row(assign[a]));
                        let db = sq_euclidean(points.row(b), centroids.row(assign[b]));
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("n >= clusters >= 1");
                centroids.row_mut(c).copy_from_slice(points.row(far));
                counts[assign[far]] -= 1;
                assign[far] = c;
                counts[c] = 1;
            }
        }
        trace.push(sse(points, &centroids, &assign));
        // assignment step; ties keep the current cluster
        let mut changed = false;
        for (i, r) in points.iter_rows().enumerate() {
            let (c, dist) = nearest(&centroids, r);
            if c != assign[i] && dist < sq_euclidean(r, centroids.row(assign[i])) {
                assign[i] = c;
                changed = true;
            }
        }
        trace.push(sse(points, &centroids, &assign));
        if !changed {
            break;
        }
    }
    Ok(KMeansResult {
        assignments: assign,
        centroids,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64) -> (Matrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for i in 0..40 {
            let c = i % 2;
            let off = if c == 0 { 0.0 } else { 10.0 };
            rows.push([off + noise.sample(&mut rng), off + noise.sample(&mut rng)]);
            truth.push(c);
        }
        (Matrix::from_rows(&rows), truth)
    }

    #[test]
    fn separates_two_blobs() {
        let (pts, truth) = blobs(3);
        let r = kmeans(&pts, 2, 1).unwrap();
        let flip = r.assignments[0] != truth[0];
        for (a, t) in r.assignments.iter().zip(&truth) {
            assert_eq!(*a, if flip { 1 - t } else { *t });
        }
    }

    #[test]
    fn one_cluster_per_point() {
        let pts = Matrix::from_rows(&[[0.0], [1.0], [5.0], [9.0]]);
        let r = kmeans(&pts, 4, 0).unwrap();
        let mut a = r.assignments.clone();
        a.sort();
        assert_eq!(a, vec![0, 1, 2, 3]);
    }

    #[test]
    fn too_many_clusters() {
        let pts = Matrix::from_rows(&[[0.0], [1.0]]);
        assert!(matches!(
            kmeans(&pts, 3, 0),
            Err(Error::CLargerThanN { .. })
        ));
    }

    #[test]
    fn objective_never_increases() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<[f64; 3]> = (0..60)
                .map(|_| [rng.random(), rng.random(), rng.random()])
                .collect();
            let r = kmeans(&Matrix::from_rows(&rows), 5, seed).unwrap();
            for w in r.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{:?}", r.objective_trace);
            }
        }
    }
}
