//! Distances between persistence diagrams and subsampled barcode distributions.

use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::persistence::{rips_persistence, Bar, PersistenceDiagram};
use crate::stats::{chi_square_binned, ks_two_sample, mann_whitney_u, Bins, TestResult};
use crate::tabular::PointCloud;

/// One edge of a diagram matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matched {
    /// Point `i` of the first diagram with point `j` of the second.
    Pair(usize, usize),
    /// Point of the first diagram sent to the diagonal.
    LeftDiagonal(usize),
    /// Point of the second diagram sent to the diagonal.
    RightDiagonal(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingResult {
    pub distance: f64,
    pub matching: Vec<Matched>,
}

fn linf(a: &Bar, b: &Bar) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

/// L-infinity distance from a point to its diagonal projection.
fn diag_cost(a: &Bar) -> f64 {
    (a.death - a.birth) / 2.0
}

/// Cost of one matching edge under the conventions of [`Matched`].
pub fn matched_cost(a: &[Bar], b: &[Bar], m: Matched) -> f64 {
    match m {
        Matched::Pair(i, j) => linf(&a[i], &b[j]),
        Matched::LeftDiagonal(i) => diag_cost(&a[i]),
        Matched::RightDiagonal(j) => diag_cost(&b[j]),
    }
}

/// Exact bottleneck distance.
///
/// Finite points are matched by binary search over the candidate edge costs,
/// testing each threshold for a perfect matching in the bipartite graph where
/// every point may also go to its diagonal projection. Infinite bars are
/// matched among themselves by sorted birth.
/// Bars tagged with their index in the source diagram.
type Indexed = Vec<(usize, Bar)>;

pub fn bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Result<MatchingResult> {
    let (inf_a, fin_a): (Indexed, Indexed) = a
        .bars
        .iter()
        .copied()
        .enumerate()
        .partition(|(_, x)| x.is_infinite());
    let (inf_b, fin_b): (Indexed, Indexed) = b
        .bars
        .iter()
        .copied()
        .enumerate()
        .partition(|(_, x)| x.is_infinite());
    if inf_a.len() != inf_b.len() {
        return Err(Error::InfiniteBarMismatch {
            left: inf_a.len(),
            right: inf_b.len(),
        });
    }

    let pa: Vec<Bar> = fin_a.iter().map(|x| x.1).collect();
    let pb: Vec<Bar> = fin_b.iter().map(|x| x.1).collect();
    let finite = bottleneck_finite(&pa, &pb);
    let mut matching: Vec<Matched> = finite
        .matching
        .iter()
        .map(|m| match *m {
            Matched::Pair(i, j) => Matched::Pair(fin_a[i].0, fin_b[j].0),
            Matched::LeftDiagonal(i) => Matched::LeftDiagonal(fin_a[i].0),
            Matched::RightDiagonal(j) => Matched::RightDiagonal(fin_b[j].0),
        })
        .collect();

    let mut distance = finite.distance;
    let mut sa = inf_a;
    let mut sb = inf_b;
    sa.sort_by(|x, y| x.1.birth.total_cmp(&y.1.birth));
    sb.sort_by(|x, y| x.1.birth.total_cmp(&y.1.birth));
    for (x, y) in sa.iter().zip(&sb) {
        distance = distance.max((x.1.birth - y.1.birth).abs());
        matching.push(Matched::Pair(x.0, y.0));
    }
    Ok(MatchingResult { distance, matching })
}

/// Bottleneck distance between two multisets of finite points.
pub fn bottleneck_finite(a: &[Bar], b: &[Bar]) -> MatchingResult {
    let (n, m) = (a.len(), b.len());
    if n == 0 && m == 0 {
        return MatchingResult {
            distance: 0.0,
            matching: Vec::new(),
        };
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(n * m + n + m + 1);
    candidates.push(0.0);
    for x in a {
        candidates.push(diag_cost(x));
        for y in b {
            candidates.push(linf(x, y));
        }
    }
    candidates.extend(b.iter().map(diag_cost));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let graph = MatchingGraph { a, b };
    // the largest candidate is always feasible: everything to the diagonal
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if graph.perfect_matching(candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let distance = candidates[lo];
    let mate = graph
        .perfect_matching(distance)
        .expect("threshold found feasible by the search");
    let mut matching = Vec::with_capacity(n + m);
    for (left, &right) in mate.iter().enumerate() {
        match (left < n, right < m) {
            (true, true) => matching.push(Matched::Pair(left, right)),
            (true, false) => matching.push(Matched::LeftDiagonal(left)),
            (false, true) => matching.push(Matched::RightDiagonal(right)),
            (false, false) => {}
        }
    }
    MatchingResult { distance, matching }
}

/// Bipartite graph on `a ∪ diag(b)` (left) and `b ∪ diag(a)` (right).
struct MatchingGraph<'a> {
    a: &'a [Bar],
    b: &'a [Bar],
}

impl MatchingGraph<'_> {
    fn adjacency(&self, t: f64) -> Vec<Vec<usize>> {
        let (n, m) = (self.a.len(), self.b.len());
        let mut adj = vec![Vec::new(); n + m];
        for (i, x) in self.a.iter().enumerate() {
            for (j, y) in self.b.iter().enumerate() {
                if linf(x, y) <= t {
                    adj[i].push(j);
                }
            }
            if diag_cost(x) <= t {
                adj[i].push(m + i);
            }
        }
        for (j, y) in self.b.iter().enumerate() {
            let row = &mut adj[n + j];
            if diag_cost(y) <= t {
                row.push(j);
            }
            row.extend((0..n).map(|i| m + i));
        }
        adj
    }

    /// Hopcroft-Karp; returns the right partner of every left vertex if perfect.
    fn perfect_matching(&self, t: f64) -> Option<Vec<usize>> {
        let adj = self.adjacency(t);
        let size = adj.len();
        const NONE: usize = usize::MAX;
        let mut mate_l = vec![NONE; size];
        let mut mate_r = vec![NONE; size];
        let mut dist = vec![0usize; size];
        let mut matched = 0;
        loop {
            // BFS layering from free left vertices
            let mut queue = VecDeque::new();
            for u in 0..size {
                if mate_l[u] == NONE {
                    dist[u] = 0;
                    queue.push_back(u);
                } else {
                    dist[u] = usize::MAX;
                }
            }
            let mut found = false;
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    let w = mate_r[v];
                    if w == NONE {
                        found = true;
                    } else if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
            if !found {
                break;
            }
            for u in 0..size {
                if mate_l[u] == NONE && augment(u, &adj, &mut mate_l, &mut mate_r, &mut dist) {
                    matched += 1;
                }
            }
        }
        (matched == size).then_some(mate_l)
    }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    mate_l: &mut [usize],
    mate_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &v in &adj[u] {
        let w = mate_r[v];
        if w == usize::MAX || (dist[w] == dist[u] + 1 && augment(w, adj, mate_l, mate_r, dist)) {
            mate_l[u] = v;
            mate_r[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

/// Hausdorff distance in L-infinity where each point may also be compared
/// with its own diagonal projection.
pub fn hausdorff(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    fn directed(from: &[Bar], to: &[Bar]) -> f64 {
        from.iter()
            .map(|x| {
                let own = if x.is_infinite() {
                    f64::INFINITY
                } else {
                    diag_cost(x)
                };
                to.iter().map(|y| linf_inf(x, y)).fold(own, f64::min)
            })
            .fold(0.0, f64::max)
    }
    directed(&a.bars, &b.bars).max(directed(&b.bars, &a.bars))
}

/// L-infinity distance that treats two infinite deaths as equal.
fn linf_inf(a: &Bar, b: &Bar) -> f64 {
    let dd = if a.is_infinite() && b.is_infinite() {
        0.0
    } else {
        (a.death - b.death).abs()
    };
    (a.birth - b.birth).abs().max(dd)
}

/// Diagram prepared for matching: zero-length bars dropped, infinite deaths capped.
pub fn matching_ready(d: &PersistenceDiagram, cap: f64) -> PersistenceDiagram {
    d.capped(cap).without_zero_length()
}

/// Rips barcode of `points` at dimension `k`, prepared for matching.
pub fn barcode_of(points: &Matrix, k: usize) -> Result<PersistenceDiagram> {
    let (dgms, max_eps) = rips_persistence(points, k)?;
    Ok(matching_ready(&dgms[k], max_eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Real,
    Synthetic,
}

#[derive(Debug, Clone)]
pub struct BarcodeSampleSet {
    pub replicates: Vec<PersistenceDiagram>,
    pub subsample_size: usize,
    pub dim: usize,
    pub source: Source,
    pub seed: u64,
}

/// Barcodes of `replicates` random subsamples (without replacement) of `cloud`.
pub fn subsample_barcodes(
    cloud: &PointCloud,
    subsample_size: usize,
    replicates: usize,
    k: usize,
    seed: u64,
    source: Source,
) -> Result<BarcodeSampleSet> {
    let n = cloud.len();
    if subsample_size < 2 || subsample_size > n {
        return Err(Error::SubsampleTooLarge {
            size: subsample_size,
            points: n,
        });
    }
    if replicates < 2 {
        return Err(Error::InvalidConfig(
            "at least two replicates are required".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<usize>> = (0..replicates)
        .map(|_| {
            let mut idx = sample(&mut rng, n, subsample_size).into_vec();
            idx.sort_unstable();
            idx
        })
        .collect();
    let replicates = draws
        .par_iter()
        .map(|idx| barcode_of(&cloud.points.select_rows(idx), k))
        .collect::<Result<Vec<_>>>()?;
    Ok(BarcodeSampleSet {
        replicates,
        subsample_size,
        dim: k,
        source,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceDistribution {
    pub samples: Vec<f64>,
    pub source: Source,
}

/// All `R (R - 1) / 2` pairwise bottleneck distances, in `(i, j)` order with `i < j`.
pub fn distance_distribution(set: &BarcodeSampleSet) -> Result<DistanceDistribution> {
    let r = set.replicates.len();
    let pairs: Vec<(usize, usize)> = (0..r)
        .flat_map(|i| ((i + 1)..r).map(move |j| (i, j)))
        .collect();
    let samples = pairs
        .par_iter()
        .map(|&(i, j)| bottleneck(&set.replicates[i], &set.replicates[j]).map(|m| m.distance))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceDistribution {
        samples,
        source: set.source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyParams {
    pub dim: usize,
    /// Defaults to `min(n_real, 20)`.
    pub subsample_size: Option<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub bins: Bins,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            dim: 0,
            subsample_size: None,
            replicates: 50,
            seed: 0,
            bins: Bins::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub count: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl DistributionSummary {
    pub fn of(samples: &[f64]) -> Self {
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let count = s.len();
        let median = match count {
            0 => 0.0,
            c if c % 2 == 1 => s[c / 2],
            c => 0.5 * (s[c / 2 - 1] + s[c / 2]),
        };
        DistributionSummary {
            count,
            min: s.first().copied().unwrap_or(0.0),
            median,
            max: s.last().copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyComparison {
    /// Bottleneck distance between the full real and synthetic diagrams.
    pub bottleneck: f64,
    pub within_real: DistanceDistribution,
    pub within_synthetic: DistanceDistribution,
    pub ks: TestResult,
    pub mann_whitney: TestResult,
    pub chi_square: TestResult,
    pub subsample_size: usize,
}

/// Compares the topology of two clouds sharing one encoding.
///
/// The full diagrams are compared by bottleneck distance; the within-real and
/// within-synthetic subsample distance distributions are compared by the three
/// two-sample tests.
pub fn compare_topology(
    real: &PointCloud,
    synth: &PointCloud,
    params: &TopologyParams,
) -> Result<TopologyComparison> {
    if real.dim() != synth.dim() {
        return Err(Error::SchemaMismatch(format!(
            "clouds have dimensions {} and {}",
            real.dim(),
            synth.dim()
        )));
    }
    let k = params.dim;
    let n_sub = params.subsample_size.unwrap_or(real.len().min(20));
    let (full, sets) = rayon::join(
        || -> Result<f64> {
            let dr = barcode_of(&real.points, k)?;
            let ds = barcode_of(&synth.points, k)?;
            Ok(bottleneck(&dr, &ds)?.distance)
        },
        || -> Result<(DistanceDistribution, DistanceDistribution)> {
            let mut seeds = ChaCha8Rng::seed_from_u64(params.seed);
            let (s_real, s_synth) = (seeds.random::<u64>(), seeds.random::<u64>());
            let real_set =
                subsample_barcodes(real, n_sub, params.replicates, k, s_real, Source::Real)?;
            let synth_set = subsample_barcodes(
                synth,
                n_sub,
                params.replicates,
                k,
                s_synth,
                Source::Synthetic,
            )?;
            Ok((
                distance_distribution(&real_set)?,
                distance_distribution(&synth_set)?,
            ))
        },
    );
    let bottleneck = full?;
    let (within_real, within_synthetic) = sets?;
    let (a, b) = (&within_real.samples, &within_synthetic.samples);
    Ok(TopologyComparison {
        bottleneck,
        ks: ks_two_sample(a, b)?,
        mann_whitney: mann_whitney_u(a, b)?,
        chi_square: chi_square_or_identical(a, b, params.bins)?,
        within_real,
        within_synthetic,
        subsample_size: n_sub,
    })
}

/// Chi-square on quantile bins; two samples that collapse to a single bin with
/// identical support cannot be told apart and get `p = 1`.
fn chi_square_or_identical(a: &[f64], b: &[f64], bins: Bins) -> Result<TestResult> {
    match chi_square_binned(a, b, bins) {
        Err(Error::DegenerateBinning) => Ok(TestResult {
            test: crate::stats::TestKind::ChiSquare,
            statistic: 0.0,
            p_value: 1.0,
            n1: a.len(),
            n2: b.len(),
        }),
        other => other,
    }
}
