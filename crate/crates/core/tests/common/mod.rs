#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabgauge::persistence::{Bar, FilteredComplex, PersistenceDiagram};
use tabgauge::Matrix;

/// Textbook left-to-right Z/2 column reduction on a dense boundary matrix,
/// without clearing or any other shortcut. Returns diagrams for dims
/// `0..=fc.max_dim()`, sorted.
pub fn naive_persistence(fc: &FilteredComplex) -> Vec<PersistenceDiagram> {
    let simplices = fc.simplices();
    let m = simplices.len();
    let index: HashMap<Vec<u32>, usize> = simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (s.vertices().to_vec(), i))
        .collect();
    let mut cols: Vec<Vec<bool>> = simplices
        .iter()
        .map(|s| {
            let mut col = vec![false; m];
            let vs = s.vertices();
            if vs.len() > 1 {
                for skip in 0..vs.len() {
                    let face: Vec<u32> = vs
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != skip)
                        .map(|(_, v)| *v)
                        .collect();
                    col[index[&face]] = true;
                }
            }
            col
        })
        .collect();
    let low = |c: &[bool]| c.iter().rposition(|x| *x);
    let mut lows: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        while let Some(l) = low(&cols[j]) {
            let Some(k) = (0..j).find(|&k| lows[k] == Some(l)) else {
                break;
            };
            let other = cols[k].clone();
            for (a, b) in cols[j].iter_mut().zip(other) {
                *a ^= b;
            }
        }
        lows[j] = low(&cols[j]);
    }
    let mut diagrams: Vec<PersistenceDiagram> = (0..=fc.max_dim())
        .map(|d| PersistenceDiagram::new(d, Vec::new()))
        .collect();
    let mut paired = vec![false; m];
    for j in 0..m {
        if let Some(i) = lows[j] {
            paired[i] = true;
            paired[j] = true;
            let d = simplices[i].dim();
            if d <= fc.max_dim() {
                diagrams[d]
                    .bars
                    .push(Bar::new(simplices[i].value, simplices[j].value));
            }
        }
    }
    for (i, s) in simplices.iter().enumerate() {
        if !paired[i] && lows[i].is_none() && s.dim() <= fc.max_dim() {
            diagrams[s.dim()]
                .bars
                .push(Bar::new(s.value, f64::INFINITY));
        }
    }
    diagrams.into_iter().map(|d| d.sorted()).collect()
}

fn bar_cost(a: Bar, b: Bar) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

fn diagonal_cost(a: Bar) -> f64 {
    (a.death - a.birth) / 2.0
}

/// Exhaustive bottleneck distance over every partial injection of `a` into
/// `b`; unmatched points go to the diagonal. Finite bars only.
pub fn brute_bottleneck(a: &[Bar], b: &[Bar]) -> f64 {
    fn rec(a: &[Bar], b: &[Bar], i: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if i == a.len() {
            let rest = b
                .iter()
                .zip(used.iter())
                .filter(|(_, u)| !**u)
                .map(|(x, _)| diagonal_cost(*x))
                .fold(acc, f64::max);
            *best = best.min(rest);
            return;
        }
        rec(a, b, i + 1, used, acc.max(diagonal_cost(a[i])), best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                rec(a, b, i + 1, used, acc.max(bar_cost(a[i], b[j])), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(a, b, 0, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

/// Hausdorff distance with each point's own diagonal projection available.
pub fn brute_hausdorff(a: &[Bar], b: &[Bar]) -> f64 {
    let side = |x: &[Bar], y: &[Bar]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| bar_cost(*p, *q))
                    .fold(diagonal_cost(*p), f64::min)
            })
            .fold(0.0, f64::max)
    };
    side(a, b).max(side(b, a))
}

pub fn random_bars(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<Bar> {
    let n = rng.random_range(0..=max_len);
    (0..n)
        .map(|_| {
            let b: f64 = rng.random_range(0.0..1.0);
            Bar::new(b, b + rng.random_range(0.0..1.0))
        })
        .collect()
}

pub fn random_cloud(n: usize, d: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * d).map(|_| rng.random_range(0.0..1.0)).collect();
    Matrix::from_vec(n, d, data)
}

pub fn diagrams_equal(a: &PersistenceDiagram, b: &PersistenceDiagram) -> bool {
    a.dim == b.dim && a.sorted().bars == b.sorted().bars
}
