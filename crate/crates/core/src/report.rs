//! End-to-end evaluation of a real/synthetic table pair and report emission.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::{compare_topology, DistributionSummary, TopologyComparison, TopologyParams};
use crate::error::{Error, Result};
use crate::metrics::{cluster_measure, mmd_rbf, propensity_score, ClusterWeights, Gamma};
use crate::stats::{
    chi_square_table, hellinger_pmf, kl_pmf, mann_whitney_u, shared_histograms, Bins, TestKind,
    TestResult,
};
use crate::tabular::{encode_pair, ColumnKind, TabularDataset};
use crate::wgan::TrainingTrace;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub clusters: usize,
    pub cluster_weights: ClusterWeights,
    pub gamma: Gamma,
    /// Defaults to `min(n_real, 20)`.
    pub subsample_size: Option<usize>,
    pub replicates: usize,
    pub homology_dim: usize,
    pub seed: u64,
    pub bins: Bins,
    pub emit_raw: bool,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            clusters: 5,
            cluster_weights: ClusterWeights::Uniform,
            gamma: Gamma::Auto,
            subsample_size: None,
            replicates: 50,
            homology_dim: 0,
            seed: 0,
            bins: Bins::Auto,
            emit_raw: false,
        }
    }
}

impl EvaluationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clusters < 2 {
            return Err(Error::InvalidConfig("clusters must be >= 2".into()));
        }
        if self.replicates < 2 {
            return Err(Error::InvalidConfig("replicates must be >= 2".into()));
        }
        if self.homology_dim > 1 {
            return Err(Error::InvalidConfig(
                "homology dimension must be 0 or 1".into(),
            ));
        }
        if self.subsample_size.is_some_and(|s| s < 2) {
            return Err(Error::InvalidConfig("subsample size must be >= 2".into()));
        }
        if let Bins::Fixed(k) = self.bins {
            if k < 2 {
                return Err(Error::InvalidConfig("bins must be >= 2".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetShape {
    pub rows: usize,
    pub columns: usize,
    pub ratio_rows_columns: f64,
}

impl DatasetShape {
    fn of(ds: &TabularDataset) -> Self {
        DatasetShape {
            rows: ds.n_rows(),
            columns: ds.n_cols(),
            ratio_rows_columns: ds.n_rows() as f64 / ds.n_cols() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalMetrics {
    pub pmse: f64,
    /// Cluster-membership measure; a sum of squares, so never negative.
    pub u_c: f64,
    pub cluster_c: f64,
    pub mmd2: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub homology_dim: usize,
    /// Bottleneck distance between the full diagrams, in encoded units.
    pub bottleneck: f64,
    /// Coordinates the distances are measured in.
    pub encoding: String,
    pub subsample_size: usize,
    pub replicates: usize,
    pub within_real: DistributionSummary,
    pub within_synthetic: DistributionSummary,
    pub ks: TestResult,
    pub mann_whitney: TestResult,
    pub chi_square: TestResult,
    pub within_real_samples: Option<Vec<f64>>,
    pub within_synthetic_samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureComparison {
    pub feature: String,
    pub continuous: bool,
    /// Mann-Whitney U for continuous features, chi-square on counts otherwise.
    pub test: TestResult,
    pub hellinger: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDiff {
    pub features: Vec<String>,
    /// `|rho_real(i, j) - rho_synth(i, j)|`.
    pub matrix: Vec<Vec<f64>>,
    /// Columns constant in either table; their correlations are taken as 0.
    pub constant_features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub real: DatasetShape,
    pub synthetic: DatasetShape,
    pub global: GlobalMetrics,
    pub topology: TopologyReport,
    pub per_feature: Vec<FeatureComparison>,
    pub correlation_diff: CorrelationDiff,
    pub config: EvaluationConfig,
}

/// Raw series behind the plot export.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotData {
    pub trace: Option<TrainingTrace>,
    pub within_real: Vec<f64>,
    pub within_synthetic: Vec<f64>,
    /// Continuous features: (name, real values, synthetic values).
    pub features: Vec<(String, Vec<f64>, Vec<f64>)>,
}

fn unit_test(kind: TestKind, n1: usize, n2: usize) -> TestResult {
    TestResult {
        test: kind,
        statistic: 0.0,
        p_value: 1.0,
        n1,
        n2,
    }
}

/// Univariate comparison of every column.
pub fn per_feature_battery(
    real: &TabularDataset,
    synth: &TabularDataset,
    bins: Bins,
) -> Result<Vec<FeatureComparison>> {
    real.schema()
        .iter()
        .enumerate()
        .map(|(j, col)| match &col.kind {
            ColumnKind::Continuous { .. } => {
                let a = real.numeric_column(j).expect("continuous column");
                let b = synth
                    .numeric_column(j)
                    .ok_or_else(|| Error::SchemaMismatch(format!("column {:?}", col.name)))?;
                let test = mann_whitney_u(&a, &b)?;
                let (hellinger, kl) = match shared_histograms(&a, &b, bins) {
                    Ok((p, q, _)) => (hellinger_pmf(&p, &q), kl_pmf(&p, &q)),
                    Err(Error::DegenerateBinning) => (0.0, 0.0),
                    Err(e) => return Err(e),
                };
                Ok(FeatureComparison {
                    feature: col.name.clone(),
                    continuous: true,
                    test,
                    hellinger,
                    kl,
                })
            }
            ColumnKind::Categorical { categories } => {
                let la = real.label_column(j).expect("categorical column");
                let lb = synth
                    .label_column(j)
                    .ok_or_else(|| Error::SchemaMismatch(format!("column {:?}", col.name)))?;
                let count = |labels: &[&str]| -> Vec<f64> {
                    categories
                        .iter()
                        .map(|c| labels.iter().filter(|l| **l == c.as_str()).count() as f64)
                        .collect()
                };
                let (ca, cb) = (count(&la), count(&lb));
                let test = match chi_square_table(&ca, &cb) {
                    Err(Error::DegenerateBinning) => {
                        unit_test(TestKind::ChiSquare, la.len(), lb.len())
                    }
                    other => {
                        let mut t = other?;
                        t.n1 = la.len();
                        t.n2 = lb.len();
                        t
                    }
                };
                let p: Vec<f64> = ca.iter().map(|c| c / la.len() as f64).collect();
                let q: Vec<f64> = cb.iter().map(|c| c / lb.len() as f64).collect();
                Ok(FeatureComparison {
                    feature: col.name.clone(),
                    continuous: false,
                    test,
                    hellinger: hellinger_pmf(&p, &q),
                    kl: kl_pmf(&p, &q),
                })
            }
        })
        .collect()
}

/// Pearson correlation; `None` when either column is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn correlation_matrix(cols: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<bool>) {
    let k = cols.len();
    let constant: Vec<bool> = cols.iter().map(|c| pearson(c, c).is_none()).collect();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            m[i][j] = if i == j {
                1.0
            } else {
                pearson(&cols[i], &cols[j]).unwrap_or(0.0)
            };
        }
    }
    (m, constant)
}

/// Absolute differences of pairwise Pearson correlations over continuous columns.
pub fn correlation_diff(real: &TabularDataset, synth: &TabularDataset) -> CorrelationDiff {
    let idx: Vec<usize> = real
        .schema()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_continuous())
        .map(|(j, _)| j)
        .collect();
    if idx.len() < 2 {
        return CorrelationDiff::default();
    }
    let take = |ds: &TabularDataset| -> Vec<Vec<f64>> {
        idx.iter()
            .map(|&j| ds.numeric_column(j).expect("continuous column"))
            .collect()
    };
    let (cr, kr) = correlation_matrix(&take(real));
    let (cs, ks) = correlation_matrix(&take(synth));
    let k = idx.len();
    let matrix = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        (cr[i][j] - cs[i][j]).abs()
                    }
                })
                .collect()
        })
        .collect();
    let features: Vec<String> = idx.iter().map(|&j| real.schema()[j].name.clone()).collect();
    let constant_features = features
        .iter()
        .enumerate()
        .filter(|(i, _)| kr[*i] || ks[*i])
        .map(|(_, f)| f.clone())
        .collect();
    CorrelationDiff {
        features,
        matrix,
        constant_features,
    }
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

fn round_value(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            let r = round_significant(n.as_f64().expect("f64 number"));
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_value),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

impl EvaluationReport {
    /// Same report with every float rounded to the canonical precision.
    pub fn canonical(&self) -> Result<Self> {
        let mut v = serde_json::to_value(self).map_err(|e| Error::Serialization(e.to_string()))?;
        round_value(&mut v);
        serde_json::from_value(v).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let t = &self.topology;
        let g = &self.global;
        let _ = writeln!(s, "# Synthetic data evaluation\n");
        let _ = writeln!(s, "| Metric | Value |");
        let _ = writeln!(s, "|---|---|");
        let _ = writeln!(s, "| Number of rows (real) | {} |", self.real.rows);
        let _ = writeln!(
            s,
            "| Number of rows (synthetic) | {} |",
            self.synthetic.rows
        );
        let _ = writeln!(s, "| Number of columns | {} |", self.real.columns);
        let _ = writeln!(
            s,
            "| Ratio rows/columns | {:.1} |",
            self.real.ratio_rows_columns
        );
        let _ = writeln!(s, "| Propensity score pMSE | {:.4} |", g.pmse);
        let _ = writeln!(s, "| Cluster analysis measure U_c | {:.4} |", g.u_c);
        let _ = writeln!(s, "| MMD^2 (gamma = {:.4}) | {:.4} |", g.gamma, g.mmd2);
        let _ = writeln!(
            s,
            "| Bottleneck distance d_B (H{}) | {:.4} |",
            t.homology_dim, t.bottleneck
        );
        let _ = writeln!(s, "| Kolmogorov-Smirnov p-value | {:.4} |", t.ks.p_value);
        let _ = writeln!(
            s,
            "| Mann-Whitney U p-value | {:.4} |",
            t.mann_whitney.p_value
        );
        let _ = writeln!(s, "| Chi-square p-value | {:.4} |", t.chi_square.p_value);
        let _ = writeln!(s, "\nDistances in {} coordinates.\n", t.encoding);
        let _ = writeln!(s, "## Per-feature comparison\n");
        let _ = writeln!(
            s,
            "| Feature | Test | Statistic | p-value | Hellinger | KL |"
        );
        let _ = writeln!(s, "|---|---|---|---|---|---|");
        for f in &self.per_feature {
            let name = match f.test.test {
                TestKind::MannWhitneyU => "Wilcoxon rank-sum",
                TestKind::ChiSquare => "chi-square",
                TestKind::Ks => "KS",
            };
            let _ = writeln!(
                s,
                "| {} | {} | {:.4} | {:.4} | {:.4} | {:.4} |",
                f.feature, name, f.test.statistic, f.test.p_value, f.hellinger, f.kl
            );
        }
        s
    }
}

/// Runs the full comparison of `synth` against `real`.
pub fn evaluate(
    real: &TabularDataset,
    synth: &TabularDataset,
    cfg: &EvaluationConfig,
) -> Result<EvaluationReport> {
    evaluate_detailed(real, synth, cfg).map(|(r, _)| r)
}

/// [`evaluate`] plus the raw series for plotting.
pub fn evaluate_detailed(
    real: &TabularDataset,
    synth: &TabularDataset,
    cfg: &EvaluationConfig,
) -> Result<(EvaluationReport, PlotData)> {
    cfg.validate()?;
    let pair = encode_pair(real, synth)?;
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cluster_seed: u64 = seeds.random();
    let topo_seed: u64 = seeds.random();

    let (global, topology) = rayon::join(
        || -> Result<GlobalMetrics> {
            let prop = propensity_score(&pair);
            let cm = cluster_measure(&pair, cfg.clusters, cfg.cluster_weights, cluster_seed)?;
            let mmd = mmd_rbf(&pair.real.points, &pair.synthetic.points, cfg.gamma)?;
            Ok(GlobalMetrics {
                pmse: prop.pmse,
                u_c: cm.u_c,
                cluster_c: cm.c,
                mmd2: mmd.mmd2,
                gamma: mmd.gamma,
            })
        },
        || -> Result<TopologyComparison> {
            let params = TopologyParams {
                dim: cfg.homology_dim,
                subsample_size: cfg.subsample_size,
                replicates: cfg.replicates,
                seed: topo_seed,
                bins: cfg.bins,
            };
            compare_topology(&pair.real, &pair.synthetic, &params)
        },
    );
    let global = global?;
    let topo = topology?;
    let per_feature = per_feature_battery(real, synth, cfg.bins)?;
    let correlation_diff = correlation_diff(real, synth);

    let raw = |v: &Vec<f64>| cfg.emit_raw.then(|| v.clone());
    let report = EvaluationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        real: DatasetShape::of(real),
        synthetic: DatasetShape::of(synth),
        global,
        topology: TopologyReport {
            homology_dim: cfg.homology_dim,
            bottleneck: topo.bottleneck,
            encoding: "min-max [0,1] continuous, one-hot scale 1/sqrt(2) categorical".into(),
            subsample_size: topo.subsample_size,
            replicates: cfg.replicates,
            within_real: DistributionSummary::of(&topo.within_real.samples),
            within_synthetic: DistributionSummary::of(&topo.within_synthetic.samples),
            ks: topo.ks.clone(),
            mann_whitney: topo.mann_whitney.clone(),
            chi_square: topo.chi_square.clone(),
            within_real_samples: raw(&topo.within_real.samples),
            within_synthetic_samples: raw(&topo.within_synthetic.samples),
        },
        per_feature,
        correlation_diff,
        config: cfg.clone(),
    }
    .canonical()?;

    let features = real
        .schema()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_continuous())
        .map(|(j, c)| {
            (
                c.name.clone(),
                real.numeric_column(j).expect("continuous"),
                synth.numeric_column(j).expect("continuous"),
            )
        })
        .collect();
    let plots = PlotData {
        trace: None,
        within_real: topo.within_real.samples,
        within_synthetic: topo.within_synthetic.samples,
        features,
    };
    Ok((report, plots))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
    PlotCsv,
}

/// Empirical CDF steps `(x, F(x))` at each distinct sample value.
pub fn ecdf(sample: &[f64]) -> Vec<(f64, f64)> {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in s.iter().enumerate() {
        let y = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = y,
            _ => out.push((*x, y)),
        }
    }
    out
}

/// Long-format `series,x,y` rows.
pub fn plot_rows(plots: &PlotData, bins: Bins) -> Vec<(String, f64, f64)> {
    let mut rows = Vec::new();
    if let Some(trace) = &plots.trace {
        for (i, (g, c)) in trace
            .generator_loss
            .iter()
            .zip(&trace.critic_loss)
            .enumerate()
        {
            rows.push(("loss_generator".to_string(), i as f64, *g));
            rows.push(("loss_critic".to_string(), i as f64, *c));
        }
    }
    if !plots.within_real.is_empty() && !plots.within_synthetic.is_empty() {
        if let Ok((p, q, edges)) =
            shared_histograms(&plots.within_real, &plots.within_synthetic, bins)
        {
            let (nr, ns) = (
                plots.within_real.len() as f64,
                plots.within_synthetic.len() as f64,
            );
            for (i, w) in edges.windows(2).enumerate() {
                let x = 0.5 * (w[0] + w[1]);
                rows.push(("barcode_distance_real".to_string(), x, (p[i] * nr).round()));
                rows.push((
                    "barcode_distance_synthetic".to_string(),
                    x,
                    (q[i] * ns).round(),
                ));
            }
        }
    }
    for (name, a, b) in &plots.features {
        for (x, y) in ecdf(a) {
            rows.push((format!("ecdf_real:{name}"), x, y));
        }
        for (x, y) in ecdf(b) {
            rows.push((format!("ecdf_synthetic:{name}"), x, y));
        }
    }
    rows
}

pub fn emit_report(
    report: &EvaluationReport,
    plots: Option<&PlotData>,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Json => {
            let mut t = report.to_json()?;
            t.push('\n');
            t
        }
        ReportFormat::Markdown => report.to_markdown(),
        ReportFormat::PlotCsv => {
            let mut t = String::from("series,x,y\n");
            let empty = PlotData::default();
            for (series, x, y) in plot_rows(plots.unwrap_or(&empty), report.config.bins) {
                let _ = writeln!(t, "{series},{x},{y}");
            }
            t
        }
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
