//! Vietoris-Rips filtrations and persistent homology over Z/2.
//!
//! The complex is built up to triangles, sorted into a filtration and reduced
//! column by column. Columns of the highest dimension are reduced first so that
//! every pivot they produce clears the matching lower-dimensional column
//! (the "twist" optimization).

use std::cmp::Ordering;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{sq_euclidean, Matrix};
use crate::tabular::PointCloud;

/// Default cap on the number of simplices in one complex.
pub const DEFAULT_SIMPLEX_BUDGET: usize = 5_000_000;

/// Symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds from a full matrix; only the upper triangle is read.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// `min_i max_j d(i, j)`; beyond it the Rips complex is a cone.
    pub fn enclosing_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    distances_of(&cloud.points)
}

/// Euclidean distances between matrix rows.
pub fn distances_of(points: &Matrix) -> DistanceMatrix {
    DistanceMatrix::from_fn(points.rows(), |i, j| {
        sq_euclidean(points.row(i), points.row(j)).sqrt()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex {
    /// Sorted vertex ids; only the first `dim + 1` are meaningful.
    vertices: [u32; 3],
    dim: u8,
    pub value: f64,
}

impl Simplex {
    fn new(vs: &[u32], value: f64) -> Self {
        let mut vertices = [0u32; 3];
        vertices[..vs.len()].copy_from_slice(vs);
        Simplex {
            vertices,
            dim: (vs.len() - 1) as u8,
            value,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices[..=self.dim as usize]
    }

    fn filtration_cmp(&self, other: &Simplex) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxEps {
    /// Truncate at the enclosing radius.
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipsParams {
    /// Highest homology dimension to report (0 or 1).
    pub max_dim: usize,
    pub max_eps: MaxEps,
    pub budget: usize,
}

impl Default for RipsParams {
    fn default() -> Self {
        RipsParams {
            max_dim: 1,
            max_eps: MaxEps::Auto,
            budget: DEFAULT_SIMPLEX_BUDGET,
        }
    }
}

impl RipsParams {
    pub fn dim(max_dim: usize) -> Self {
        RipsParams {
            max_dim,
            ..Default::default()
        }
    }
}

/// Simplices in filtration order: by value, then dimension, then vertices.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
    n_vertices: usize,
    max_dim: usize,
    max_eps: f64,
}

impl FilteredComplex {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_eps(&self) -> f64 {
        self.max_eps
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Number of simplices of each dimension with value `<= eps`.
    pub fn counts_at(&self, eps: f64) -> [usize; 3] {
        let mut c = [0; 3];
        for s in self.simplices.iter().take_while(|s| s.value <= eps) {
            c[s.dim()] += 1;
        }
        c
    }
}

pub fn build_vr(dm: &DistanceMatrix, params: RipsParams) -> Result<FilteredComplex> {
    if params.max_dim > 1 {
        return Err(Error::InvalidConfig(format!(
            "homology dimension {} is not supported (max 1)",
            params.max_dim
        )));
    }
    let n = dm.len();
    let max_eps = match params.max_eps {
        MaxEps::Auto => dm.enclosing_radius(),
        MaxEps::Value(v) => v,
    };
    let over = || Error::ComplexTooLarge {
        budget: params.budget,
    };
    if n > params.budget {
        return Err(over());
    }
    let mut simplices: Vec<Simplex> = (0..n as u32).map(|v| Simplex::new(&[v], 0.0)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dm.get(i, j);
            if d <= max_eps {
                if simplices.len() >= params.budget {
                    return Err(over());
                }
                simplices.push(Simplex::new(&[i as u32, j as u32], d));
            }
        }
    }
    if params.max_dim >= 1 {
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = dm.get(i, j);
                if dij > max_eps {
                    continue;
                }
                for k in (j + 1)..n {
                    let v = dij.max(dm.get(i, k)).max(dm.get(j, k));
                    if v <= max_eps {
                        if simplices.len() >= params.budget {
                            return Err(over());
                        }
                        simplices.push(Simplex::new(&[i as u32, j as u32, k as u32], v));
                    }
                }
            }
        }
    }
    simplices.sort_unstable_by(Simplex::filtration_cmp);
    debug_assert!(simplices.windows(2).all(|w| w[0].value <= w[1].value));
    Ok(FilteredComplex {
        simplices,
        n_vertices: n,
        max_dim: params.max_dim,
        max_eps,
    })
}

/// One interval `[birth, death)`; `death` is `f64::INFINITY` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
}

impl Bar {
    pub fn new(birth: f64, death: f64) -> Self {
        Bar { birth, death }
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Persistence pairs of one homology dimension. A barcode is the same multiset
/// read as intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub dim: usize,
    pub bars: Vec<Bar>,
}

pub type Barcode = PersistenceDiagram;

impl PersistenceDiagram {
    pub fn new(dim: usize, bars: Vec<Bar>) -> Self {
        PersistenceDiagram { dim, bars }
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn infinite_count(&self) -> usize {
        self.bars.iter().filter(|b| b.is_infinite()).count()
    }

    /// Drops bars with `birth == death`.
    pub fn without_zero_length(&self) -> Self {
        PersistenceDiagram {
            dim: self.dim,
            bars: self
                .bars
                .iter()
                .copied()
                .filter(|b| b.death > b.birth)
                .collect(),
        }
    }

    /// Replaces infinite deaths with `cap`.
    pub fn capped(&self, cap: f64) -> Self {
        PersistenceDiagram {
            dim: self.dim,
            bars: self
                .bars
                .iter()
                .map(|b| Bar::new(b.birth, if b.is_infinite() { cap } else { b.death }))
                .collect(),
        }
    }

    /// Bars sorted by (birth, death), for multiset comparison.
    pub fn sorted(&self) -> Self {
        let mut bars = self.bars.clone();
        bars.sort_by(|a, b| {
            a.birth
                .total_cmp(&b.birth)
                .then(a.death.total_cmp(&b.death))
        });
        PersistenceDiagram {
            dim: self.dim,
            bars,
        }
    }
}

/// Reduces the boundary matrix of `fc` and returns diagrams for dims `0..=max_dim`.
pub fn compute_persistence(fc: &FilteredComplex) -> Vec<PersistenceDiagram> {
    let mut all = compute_persistence_skeleton(fc);
    all.truncate(fc.max_dim + 1);
    all
}

/// Like [`compute_persistence`] but also returns the diagram of the top
/// simplex dimension (`max_dim + 1`), describing the homology of the truncated
/// skeleton itself.
pub fn compute_persistence_skeleton(fc: &FilteredComplex) -> Vec<PersistenceDiagram> {
    let simplices = &fc.simplices;
    let m = simplices.len();
    let n = fc.n_vertices;
    let top = fc.max_dim + 1;

    // Filtration index lookups for faces.
    let mut vertex_index = vec![usize::MAX; n];
    let mut edge_index = vec![usize::MAX; n * n];
    for (idx, s) in simplices.iter().enumerate() {
        let v = s.vertices();
        match s.dim() {
            0 => vertex_index[v[0] as usize] = idx,
            1 => edge_index[v[0] as usize * n + v[1] as usize] = idx,
            _ => {}
        }
    }
    let boundary = |s: &Simplex| -> Vec<usize> {
        let v = s.vertices();
        let mut col: Vec<usize> = match s.dim() {
            0 => Vec::new(),
            1 => vec![vertex_index[v[0] as usize], vertex_index[v[1] as usize]],
            _ => {
                let e = |a: u32, b: u32| edge_index[a as usize * n + b as usize];
                vec![e(v[0], v[1]), e(v[0], v[2]), e(v[1], v[2])]
            }
        };
        col.sort_unstable();
        col
    };

    let mut columns: Vec<Vec<usize>> = vec![Vec::new(); m];
    // pivot_owner[row] = column whose lowest entry is `row`
    let mut pivot_owner = vec![usize::MAX; m];
    let mut cleared = vec![false; m];

    for dim in (1..=top.min(2)).rev() {
        for j in 0..m {
            if simplices[j].dim() != dim || cleared[j] {
                continue;
            }
            let mut col = boundary(&simplices[j]);
            while let Some(&low) = col.last() {
                let owner = pivot_owner[low];
                if owner == usize::MAX {
                    break;
                }
                col = xor_sorted(&col, &columns[owner]);
            }
            if let Some(&low) = col.last() {
                pivot_owner[low] = j;
                cleared[low] = true;
            }
            columns[j] = col;
        }
    }

    let mut diagrams: Vec<PersistenceDiagram> = (0..=top)
        .map(|d| PersistenceDiagram::new(d, Vec::new()))
        .collect();
    for (j, s) in simplices.iter().enumerate() {
        if let Some(&low) = columns[j].last() {
            let birth = simplices[low].value;
            diagrams[s.dim() - 1].bars.push(Bar::new(birth, s.value));
        } else if pivot_owner[j] == usize::MAX {
            diagrams[s.dim()]
                .bars
                .push(Bar::new(s.value, f64::INFINITY));
        }
    }
    diagrams
}

/// Symmetric difference of two sorted index lists.
fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Number of bars of dimension `k` alive at `eps` (`birth <= eps < death`).
pub fn betti_at(diagrams: &[PersistenceDiagram], eps: f64, k: usize) -> usize {
    diagrams
        .iter()
        .filter(|d| d.dim == k)
        .flat_map(|d| d.bars.iter())
        .filter(|b| b.birth <= eps && eps < b.death)
        .count()
}

/// Convenience: Rips persistence of a point matrix with automatic truncation.
pub fn rips_persistence(points: &Matrix, max_dim: usize) -> Result<(Vec<PersistenceDiagram>, f64)> {
    let dm = distances_of(points);
    let fc = build_vr(&dm, RipsParams::dim(max_dim))?;
    Ok((compute_persistence(&fc), fc.max_eps()))
}

/// Writes `dimension,birth,death` rows; essential classes get death `inf`.
pub fn write_diagrams_csv(diagrams: &[PersistenceDiagram], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("dimension,birth,death\n");
    for d in diagrams {
        for b in &d.bars {
            let death = if b.is_infinite() {
                "inf".to_string()
            } else {
                b.death.to_string()
            };
            out.push_str(&format!("{},{},{}\n", d.dim, b.birth, death));
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
