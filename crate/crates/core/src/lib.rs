//! Augmentation of small tabular datasets with a Wasserstein GAN, and
//! evaluation of synthetic tables with global metrics (pMSE, cluster measure,
//! MMD) and persistent-homology comparisons (bottleneck distance plus
//! two-sample tests on subsampled barcode distances).

pub mod diagram;
pub mod error;
pub mod fixtures;
pub mod matrix;
pub mod metrics;
pub mod persistence;
pub mod report;
pub mod stats;
pub mod tabular;
pub mod wgan;

pub use diagram::{
    bottleneck, compare_topology, distance_distribution, hausdorff, subsample_barcodes,
    MatchingResult, TopologyComparison, TopologyParams,
};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use metrics::{cluster_measure, mmd_rbf, propensity_score, ClusterWeights, Gamma};
pub use persistence::{
    build_vr, compute_persistence, pairwise_distances, Bar, Barcode, PersistenceDiagram, RipsParams,
};
pub use report::{emit_report, evaluate, EvaluationConfig, EvaluationReport, ReportFormat};
pub use stats::{chi_square_binned, ks_two_sample, mann_whitney_u, Bins, TestKind, TestResult};
pub use tabular::{
    encode, encode_pair, load_csv, load_csv_with_schema, write_csv, DatasetPair, PointCloud,
    TabularDataset,
};
pub use wgan::{augment, init_gan, train, GanConfig, GanModel, TrainingTrace};
