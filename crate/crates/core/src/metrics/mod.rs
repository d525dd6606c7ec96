//! Global similarity metrics between a real and a synthetic cloud: propensity
//! score MSE, cluster-membership measure and RBF-kernel MMD.

mod kmeans;
mod logistic;

pub use kmeans::{kmeans, KMeansResult, MAX_LLOYD_ITERATIONS};
pub(crate) use logistic::sigmoid as logistic_sigmoid;
pub use logistic::{
    fit_logistic, standardization, LogisticModel, LOGISTIC_ITERATIONS, LOGISTIC_L2,
    LOGISTIC_LEARNING_RATE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{sq_euclidean, Matrix};
use crate::tabular::DatasetPair;

#[derive(Debug, Clone, PartialEq)]
pub struct PropensityResult {
    pub pmse: f64,
    pub predicted: Vec<f64>,
    pub total: usize,
}

/// `pMSE = (1/N) sum (p_i - 0.5)^2`.
pub fn pmse_of(predicted: &[f64]) -> f64 {
    predicted.iter().map(|p| (p - 0.5) * (p - 0.5)).sum::<f64>() / predicted.len() as f64
}

/// Fits a logistic real-vs-synthetic classifier and scores its probabilities.
pub fn propensity_score(pair: &DatasetPair) -> PropensityResult {
    let points = pair.combined();
    let model = fit_logistic(&points, &pair.labels);
    let predicted = model.predict(&points);
    PropensityResult {
        pmse: pmse_of(&predicted),
        total: predicted.len(),
        predicted,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterWeights {
    /// `w_i = 1`
    #[default]
    Uniform,
    /// `w_i = n_i C / N`
    BySize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    /// Members of the cluster.
    pub size: usize,
    /// Members that come from the real data.
    pub real: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMeasureResult {
    pub u_c: f64,
    /// Real share of the combined data, `N_real / N`.
    pub c: f64,
    pub clusters: Vec<ClusterRecord>,
}

/// `U_c = (1/C) sum w_i (n_iD / n_i - c)^2` over non-empty clusters.
///
/// The sum runs over the `C` requested clusters; an empty cluster adds nothing.
pub fn cluster_measure_from_records(records: &[ClusterRecord], c: f64) -> f64 {
    let sum: f64 = records
        .iter()
        .filter(|r| r.size > 0)
        .map(|r| r.weight * (r.real as f64 / r.size as f64 - c).powi(2))
        .sum();
    sum / records.len() as f64
}

/// Builds per-cluster records from cluster assignments of the combined cloud.
pub fn cluster_records(
    assignments: &[usize],
    labels: &[u8],
    clusters: usize,
    weights: ClusterWeights,
) -> Vec<ClusterRecord> {
    let total = assignments.len() as f64;
    let mut records = vec![
        ClusterRecord {
            size: 0,
            real: 0,
            weight: 0.0,
        };
        clusters
    ];
    for (&a, &l) in assignments.iter().zip(labels) {
        records[a].size += 1;
        if l == 0 {
            records[a].real += 1;
        }
    }
    for r in &mut records {
        r.weight = match weights {
            ClusterWeights::Uniform => 1.0,
            ClusterWeights::BySize => r.size as f64 * clusters as f64 / total,
        };
    }
    records
}

pub fn cluster_measure(
    pair: &DatasetPair,
    clusters: usize,
    weights: ClusterWeights,
    seed: u64,
) -> Result<ClusterMeasureResult> {
    if clusters < 2 {
        return Err(Error::InvalidConfig("cluster measure needs C >= 2".into()));
    }
    let points = pair.combined();
    let km = kmeans(&points, clusters, seed)?;
    let records = cluster_records(&km.assignments, &pair.labels, clusters, weights);
    let c = pair.n_real() as f64 / points.rows() as f64;
    Ok(ClusterMeasureResult {
        u_c: cluster_measure_from_records(&records, c),
        c,
        clusters: records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gamma {
    /// `1 / (2 median^2)` of pooled pairwise distances.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MmdEstimator {
    Biased,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmdResult {
    pub mmd2: f64,
    pub gamma: f64,
    pub estimator: MmdEstimator,
}

/// Median-heuristic bandwidth over all distinct pairs of the pooled sample.
pub fn median_gamma(x: &Matrix, y: &Matrix) -> Result<f64> {
    let pooled = x.vstack(y);
    let n = pooled.rows();
    let mut d2 = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            d2.push(sq_euclidean(pooled.row(i), pooled.row(j)));
        }
    }
    if d2.is_empty() {
        return Err(Error::DegenerateGamma);
    }
    d2.sort_by(f64::total_cmp);
    let k = d2.len();
    let med_sq = if k % 2 == 1 {
        d2[k / 2]
    } else {
        // median of distances, squared
        let m = 0.5 * (d2[k / 2 - 1].sqrt() + d2[k / 2].sqrt());
        m * m
    };
    if med_sq <= 0.0 {
        return Err(Error::DegenerateGamma);
    }
    Ok(1.0 / (2.0 * med_sq))
}

fn mean_kernel(a: &Matrix, b: &Matrix, gamma: f64) -> f64 {
    let mut sum = 0.0;
    for ra in a.iter_rows() {
        for rb in b.iter_rows() {
            sum += (-gamma * sq_euclidean(ra, rb)).exp();
        }
    }
    sum / (a.rows() * b.rows()) as f64
}

/// Biased (V-statistic) MMD² with `k(x, x') = exp(-gamma |x - x'|^2)`.
pub fn mmd_rbf(x: &Matrix, y: &Matrix, gamma: Gamma) -> Result<MmdResult> {
    if x.rows() == 0 || y.rows() == 0 {
        return Err(Error::EmptySample);
    }
    let gamma = match gamma {
        Gamma::Auto => median_gamma(x, y)?,
        Gamma::Fixed(g) if g > 0.0 => g,
        Gamma::Fixed(g) => return Err(Error::InvalidConfig(format!("gamma must be > 0, got {g}"))),
    };
    let kxx = mean_kernel(x, x, gamma);
    let kyy = mean_kernel(y, y, gamma);
    let kxy = mean_kernel(x, y, gamma);
    Ok(MmdResult {
        mmd2: (kxx + kyy - 2.0 * kxy).max(0.0),
        gamma,
        estimator: MmdEstimator::Biased,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::PointCloud;

    fn pair_1d(real: &[f64], synth: &[f64]) -> DatasetPair {
        let col = |v: &[f64]| PointCloud::from_matrix(Matrix::from_vec(v.len(), 1, v.to_vec()));
        DatasetPair::from_clouds(col(real), col(synth))
    }

    #[test]
    fn pmse_copy_is_zero() {
        let v: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let r = propensity_score(&pair_1d(&v, &v));
        assert!(r.pmse < 0.01);
        assert_eq!(r.total, 40);
        assert!((r.pmse - pmse_of(&r.predicted)).abs() < 1e-15);
    }

    #[test]
    fn pmse_separated_classes_near_bound() {
        let real = vec![0.0; 20];
        let synth = vec![1.0; 20];
        let r = propensity_score(&pair_1d(&real, &synth));
        assert!(r.pmse >= 0.2 && r.pmse <= 0.25, "{}", r.pmse);
    }

    #[test]
    fn hand_computed_cluster_measure() {
        // 4 real + 4 synthetic; cluster 0 holds 3 real, cluster 1 holds 1 real
        let assignments = [0, 0, 0, 1, 0, 1, 1, 1];
        let labels = [0, 0, 0, 0, 1, 1, 1, 1];
        let recs = cluster_records(&assignments, &labels, 2, ClusterWeights::Uniform);
        assert_eq!((recs[0].size, recs[0].real), (4, 3));
        assert_eq!((recs[1].size, recs[1].real), (4, 1));
        assert_eq!(cluster_measure_from_records(&recs, 0.5), 0.0625);
    }

    #[test]
    fn proportional_clusters_are_zero() {
        let assignments = [0, 1, 0, 1];
        let labels = [0, 0, 1, 1];
        for w in [ClusterWeights::Uniform, ClusterWeights::BySize] {
            let recs = cluster_records(&assignments, &labels, 2, w);
            assert_eq!(cluster_measure_from_records(&recs, 0.5), 0.0);
        }
    }

    #[test]
    fn disjoint_blobs_maximal_measure() {
        let real = [0.0, 0.1, 0.2];
        let synth = [10.0, 10.1, 10.2, 10.3, 10.4, 10.5];
        let r = cluster_measure(&pair_1d(&real, &synth), 2, ClusterWeights::Uniform, 4).unwrap();
        let c: f64 = 1.0 / 3.0;
        let expected = 0.5 * ((1.0 - c).powi(2) + c.powi(2));
        assert!((r.u_c - expected).abs() < 1e-15);
        let by_size =
            cluster_measure(&pair_1d(&real, &synth), 2, ClusterWeights::BySize, 4).unwrap();
        assert!(by_size.u_c >= 0.0);
    }

    #[test]
    fn mmd_cases() {
        let x = Matrix::from_rows(&[[0.0]]);
        let y = Matrix::from_rows(&[[1.0]]);
        let r = mmd_rbf(&x, &y, Gamma::Fixed(1.0)).unwrap();
        let expected = 2.0 - 2.0 * (-1.0f64).exp();
        assert!((r.mmd2 - expected).abs() < 1e-12);
        let z = Matrix::from_rows(&[[0.0, 1.0], [2.0, 0.5], [1.0, 1.0]]);
        assert_eq!(mmd_rbf(&z, &z, Gamma::Auto).unwrap().mmd2, 0.0);
        let same = Matrix::from_rows(&[[1.0], [1.0]]);
        assert!(matches!(
            mmd_rbf(&same, &same, Gamma::Auto),
            Err(Error::DegenerateGamma)
        ));
    }

    #[test]
    fn median_gamma_value() {
        // pooled {0, 1, 3}: distances 1, 3, 2 -> median 2
        let x = Matrix::from_rows(&[[0.0], [1.0]]);
        let y = Matrix::from_rows(&[[3.0]]);
        assert_eq!(median_gamma(&x, &y).unwrap(), 1.0 / 8.0);
    }
}
