//! Two-sample tests and histogram divergences.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "ks")]
    Ks,
    #[serde(rename = "mann_whitney_u")]
    MannWhitneyU,
    #[serde(rename = "chi_square")]
    ChiSquare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Number of bins, either fixed or chosen by Sturges' rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bins {
    #[default]
    Auto,
    Fixed(usize),
}

impl Bins {
    /// Resolves to a bin count for `n` pooled observations: `1 + floor(log2 n)`.
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Bins::Fixed(k) => k,
            Bins::Auto => 1 + (n.max(1) as f64).log2().floor() as usize,
        }
    }
}

fn sorted_copy(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Survival function of the Kolmogorov distribution,
/// `2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2)`, clamped to `[0, 1]`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let a2 = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = (a2 * jf * jf).exp();
        sum += sign * term;
        if term < 1e-18 {
            return (2.0 * sum).clamp(0.0, 1.0);
        }
        sign = -sign;
    }
    // series failed to settle; only happens for tiny lambda where p -> 1
    1.0
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let d = ks_statistic(a, b);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let ne = n1 * n2 / (n1 + n2);
    let sq = ne.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    Ok(TestResult {
        test: TestKind::Ks,
        statistic: d,
        p_value: kolmogorov_sf(lambda),
        n1: a.len(),
        n2: b.len(),
    })
}

/// `sup |F_a - F_b|` by a merged sweep over both sorted samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let a = sorted_copy(a);
    let b = sorted_copy(b);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    d
}

/// Average ranks (1-based) of `values`, ties sharing their mean rank.
/// Also returns the tie term `sum (t^3 - t)`.
fn average_ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = avg;
        }
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        start = end;
    }
    (ranks, tie_term)
}

/// Mann-Whitney U (Wilcoxon rank-sum) with the normal approximation.
///
/// Reports `U_a`, the count of pairs where `a` exceeds `b` (ties count half).
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = average_ranks(&pooled);
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let mean = n1 * n2 / 2.0;
    let n = n1 + n2;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)).max(1.0));
    if var <= 0.0 {
        // every value tied
        return Ok(TestResult {
            test: TestKind::MannWhitneyU,
            statistic: mean,
            p_value: 1.0,
            n1: a.len(),
            n2: b.len(),
        });
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let p_value = (2.0 * std_normal_sf(z)).clamp(0.0, 1.0);
    Ok(TestResult {
        test: TestKind::MannWhitneyU,
        statistic: u,
        p_value,
        n1: a.len(),
        n2: b.len(),
    })
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof / 2.0, x / 2.0).clamp(0.0, 1.0)
}

/// Pearson chi-square test of independence on a 2 x k table of counts.
///
/// Columns whose smallest expected cell is below 1 are merged into a neighbour.
pub fn chi_square_table(row_a: &[f64], row_b: &[f64]) -> Result<TestResult> {
    assert_eq!(row_a.len(), row_b.len(), "table rows differ in length");
    let mut cols: Vec<(f64, f64)> = row_a
        .iter()
        .zip(row_b)
        .map(|(x, y)| (*x, *y))
        .filter(|(x, y)| x + y > 0.0)
        .collect();
    let ta: f64 = cols.iter().map(|c| c.0).sum();
    let tb: f64 = cols.iter().map(|c| c.1).sum();
    let total = ta + tb;
    if ta == 0.0 || tb == 0.0 {
        return Err(Error::EmptySample);
    }
    let min_share = ta.min(tb) / total;
    loop {
        if cols.len() < 2 {
            return Err(Error::DegenerateBinning);
        }
        let small = cols.iter().position(|(x, y)| (x + y) * min_share < 1.0);
        match small {
            None => break,
            Some(i) => {
                let target = if i + 1 < cols.len() { i + 1 } else { i - 1 };
                let (x, y) = cols.remove(i);
                let t = if target > i { target - 1 } else { target };
                cols[t].0 += x;
                cols[t].1 += y;
            }
        }
    }
    let mut chi2 = 0.0;
    for (x, y) in &cols {
        let col_total = x + y;
        let ea = ta * col_total / total;
        let eb = tb * col_total / total;
        chi2 += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let dof = (cols.len() - 1) as f64;
    Ok(TestResult {
        test: TestKind::ChiSquare,
        statistic: chi2,
        p_value: chi_square_sf(chi2, dof),
        n1: ta as usize,
        n2: tb as usize,
    })
}

/// Interior bin edges at the pooled sample's quantiles `j/k`; duplicates collapse.
pub fn quantile_edges(pooled_sorted: &[f64], k: usize) -> Vec<f64> {
    let n = pooled_sorted.len();
    let mut edges: Vec<f64> = (1..k)
        .map(|j| {
            let pos = j as f64 / k as f64 * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            pooled_sorted[lo] + frac * (pooled_sorted[hi] - pooled_sorted[lo])
        })
        .collect();
    edges.dedup();
    edges
}

/// Bin index for `x` given ascending interior edges; a value equal to an edge goes right.
fn bin_of(edges: &[f64], x: f64) -> usize {
    edges.partition_point(|e| *e <= x)
}

/// Chi-square test on counts over quantile bins of the pooled sample.
pub fn chi_square_binned(a: &[f64], b: &[f64], bins: Bins) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let pooled = sorted_copy(&a.iter().chain(b).copied().collect::<Vec<_>>());
    let k = bins.resolve(pooled.len());
    if k < 2 {
        return Err(Error::DegenerateBinning);
    }
    let edges = quantile_edges(&pooled, k);
    let width = edges.len() + 1;
    let mut ca = vec![0.0; width];
    let mut cb = vec![0.0; width];
    for &x in a {
        ca[bin_of(&edges, x)] += 1.0;
    }
    for &x in b {
        cb[bin_of(&edges, x)] += 1.0;
    }
    let mut res = chi_square_table(&ca, &cb)?;
    res.n1 = a.len();
    res.n2 = b.len();
    Ok(res)
}

/// Histogram divergences between two samples on shared bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    pub hellinger: f64,
    pub kl: f64,
    pub bins: Vec<f64>,
}

/// Additive smoothing applied to the reference histogram in KL.
pub const KL_SMOOTHING: f64 = 1e-10;

/// Normalized histograms of `a` and `b` on shared equal-width bins over the pooled range.
pub fn shared_histograms(
    a: &[f64],
    b: &[f64],
    bins: Bins,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let k = bins.resolve(a.len() + b.len());
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    if k < 2 {
        return Err(Error::DegenerateBinning);
    }
    let width = (hi - lo) / k as f64;
    let edges: Vec<f64> = (0..=k).map(|i| lo + width * i as f64).collect();
    let hist = |s: &[f64]| {
        let mut h = vec![0.0; k];
        for &x in s {
            let i = if width > 0.0 {
                (((x - lo) / width) as usize).min(k - 1)
            } else {
                0
            };
            h[i] += 1.0;
        }
        let n = s.len() as f64;
        h.iter_mut().for_each(|v| *v /= n);
        h
    };
    Ok((hist(a), hist(b), edges))
}

/// `sqrt(1/2 sum (sqrt p - sqrt q)^2)`, which equals `sqrt(1 - BC)` for pmfs
/// and is exactly zero for identical inputs.
pub fn hellinger_pmf(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2))
        .sum();
    (0.5 * s).sqrt().min(1.0)
}

/// `sum p log(p / (q + eps))`, natural log, clamped at zero.
pub fn kl_pmf(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| x * (x / (y + KL_SMOOTHING)).ln())
        .sum::<f64>()
        .max(0.0)
}

pub fn hellinger(a: &[f64], b: &[f64], bins: Bins) -> Result<f64> {
    let (p, q, _) = shared_histograms(a, b, bins)?;
    Ok(hellinger_pmf(&p, &q))
}

pub fn kl_divergence(a: &[f64], b: &[f64], bins: Bins) -> Result<f64> {
    let (p, q, _) = shared_histograms(a, b, bins)?;
    Ok(kl_pmf(&p, &q))
}

pub fn divergences(a: &[f64], b: &[f64], bins: Bins) -> Result<DivergenceResult> {
    let (p, q, edges) = shared_histograms(a, b, bins)?;
    Ok(DivergenceResult {
        hellinger: hellinger_pmf(&p, &q),
        kl: kl_pmf(&p, &q),
        bins: edges,
    })
}
