//! Tabular datasets: CSV ingestion, schema inference and numeric encoding.
//!
//! Continuous columns are min-max scaled to `[0, 1]`. Categorical columns are
//! one-hot encoded with block scale `1/sqrt(2)`, so two rows that differ in a
//! single category are exactly distance 1 apart.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Scale of a one-hot block.
pub const ONE_HOT_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    /// Observed range of the column.
    Continuous { min: f64, max: f64 },
    /// Distinct labels, sorted lexicographically.
    Categorical { categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSchema {
    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, ColumnKind::Continuous { .. })
    }

    pub fn categories(&self) -> Option<&[String]> {
        match &self.kind {
            ColumnKind::Categorical { categories } => Some(categories),
            ColumnKind::Continuous { .. } => None,
        }
    }

    fn same_kind(&self, other: &ColumnSchema) -> bool {
        self.is_continuous() == other.is_continuous()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Num(f64),
    Cat(String),
}

impl Cell {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Cat(_) => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            Cell::Cat(s) => Some(s),
            Cell::Num(_) => None,
        }
    }
}

/// A table of typed columns. Construction validates every cell against the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularDataset {
    schema: Vec<ColumnSchema>,
    rows: Vec<Vec<Cell>>,
}

impl TabularDataset {
    pub fn new(schema: Vec<ColumnSchema>, rows: Vec<Vec<Cell>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if schema.is_empty() {
            return Err(Error::SchemaMismatch("schema has no columns".into()));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::RaggedRow {
                    row: r,
                    found: row.len(),
                    expected: schema.len(),
                });
            }
            for (col, cell) in schema.iter().zip(row) {
                match (&col.kind, cell) {
                    (ColumnKind::Continuous { .. }, Cell::Num(v)) if v.is_finite() => {}
                    (ColumnKind::Categorical { categories }, Cell::Cat(label)) => {
                        if categories.binary_search(label).is_err() {
                            return Err(Error::UnknownCategory {
                                column: col.name.clone(),
                                label: label.clone(),
                            });
                        }
                    }
                    _ => {
                        return Err(Error::SchemaMismatch(format!(
                            "cell {cell:?} does not fit column {:?}",
                            col.name
                        )))
                    }
                }
            }
        }
        Ok(TabularDataset { schema, rows })
    }

    /// Builds a dataset from columns of plain values, computing ranges and category lists.
    pub fn from_columns(columns: Vec<(String, Vec<Cell>)>) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.1.len());
        let mut schema = Vec::with_capacity(columns.len());
        for (name, cells) in &columns {
            if cells.len() != n {
                return Err(Error::RaggedRow {
                    row: cells.len().min(n),
                    found: cells.len(),
                    expected: n,
                });
            }
            let kind = match cells.first() {
                Some(Cell::Num(_)) => {
                    let vals: Option<Vec<f64>> = cells.iter().map(Cell::as_num).collect();
                    let vals = vals.ok_or_else(|| {
                        Error::SchemaMismatch(format!("mixed cell types in column {name:?}"))
                    })?;
                    range_of(&vals)
                }
                _ => {
                    let labels: Option<BTreeSet<String>> = cells
                        .iter()
                        .map(|c| c.as_cat().map(str::to_owned))
                        .collect();
                    let labels = labels.ok_or_else(|| {
                        Error::SchemaMismatch(format!("mixed cell types in column {name:?}"))
                    })?;
                    ColumnKind::Categorical {
                        categories: labels.into_iter().collect(),
                    }
                }
            };
            schema.push(ColumnSchema {
                name: name.clone(),
                kind,
            });
        }
        let rows = (0..n)
            .map(|i| columns.iter().map(|(_, c)| c[i].clone()).collect())
            .collect();
        TabularDataset::new(schema, rows)
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    /// Values of a continuous column; `None` for categorical columns.
    pub fn numeric_column(&self, j: usize) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r[j].as_num()).collect()
    }

    /// Labels of a categorical column; `None` for continuous columns.
    pub fn label_column(&self, j: usize) -> Option<Vec<&str>> {
        self.rows.iter().map(|r| r[j].as_cat()).collect()
    }
}

fn range_of(vals: &[f64]) -> ColumnKind {
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ColumnKind::Continuous { min, max }
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Largest distinct count at which a numeric column is still treated as categorical.
pub fn categorical_threshold(n: usize) -> usize {
    let tenth = (n as f64 * 0.1).ceil() as usize;
    tenth.max(2)
}

/// Infers column kinds from a raw text grid.
///
/// A column is continuous iff every cell parses as a finite number and it has
/// more than `max(2, ceil(0.1 n))` distinct values.
pub fn infer_schema(names: &[String], cells: &[Vec<String>]) -> Vec<ColumnSchema> {
    let n = cells.len();
    let threshold = categorical_threshold(n);
    names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let raw: Vec<&str> = cells.iter().map(|r| r[j].as_str()).collect();
            let nums: Option<Vec<f64>> = raw.iter().map(|s| parse_number(s)).collect();
            let kind = match nums {
                Some(vals) if distinct_count(&vals) > threshold => range_of(&vals),
                _ => {
                    let labels: BTreeSet<String> = raw.iter().map(|s| s.to_string()).collect();
                    ColumnKind::Categorical {
                        categories: labels.into_iter().collect(),
                    }
                }
            };
            ColumnSchema {
                name: name.clone(),
                kind,
            }
        })
        .collect()
}

fn distinct_count(vals: &[f64]) -> usize {
    let mut v = vals.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

fn read_grid(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(Error::EmptyDataset);
    }
    let mut cells = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        if record.len() != names.len() {
            return Err(Error::RaggedRow {
                row: r,
                found: record.len(),
                expected: names.len(),
            });
        }
        let row: Vec<String> = record.iter().map(|s| s.trim().to_string()).collect();
        if let Some(j) = row.iter().position(String::is_empty) {
            return Err(Error::MissingCell {
                row: r,
                column: names[j].clone(),
            });
        }
        cells.push(row);
    }
    if cells.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((names, cells))
}

fn build_rows(schema: &[ColumnSchema], cells: Vec<Vec<String>>) -> Result<Vec<Vec<Cell>>> {
    cells
        .into_iter()
        .map(|row| {
            row.into_iter()
                .zip(schema)
                .map(|(s, col)| match col.kind {
                    ColumnKind::Continuous { .. } => {
                        parse_number(&s)
                            .map(Cell::Num)
                            .ok_or_else(|| Error::InvalidNumber {
                                column: col.name.clone(),
                                value: s,
                            })
                    }
                    ColumnKind::Categorical { .. } => Ok(Cell::Cat(s)),
                })
                .collect()
        })
        .collect()
}

/// Parses a text grid with an inferred schema.
pub fn dataset_from_text(names: &[String], cells: Vec<Vec<String>>) -> Result<TabularDataset> {
    if cells.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let schema = infer_schema(names, &cells);
    let rows = build_rows(&schema, cells)?;
    TabularDataset::new(schema, rows)
}

/// Reads a CSV file with a header row and infers its schema.
pub fn load_csv(path: impl AsRef<Path>) -> Result<TabularDataset> {
    let (names, cells) = read_grid(path.as_ref())?;
    dataset_from_text(&names, cells)
}

/// Reads a CSV file whose columns must follow `reference` (names and kinds).
///
/// Categorical columns keep the reference category list; labels outside it are
/// rejected. Continuous ranges are recomputed from the file.
pub fn load_csv_with_schema(
    path: impl AsRef<Path>,
    reference: &[ColumnSchema],
) -> Result<TabularDataset> {
    let (names, cells) = read_grid(path.as_ref())?;
    let ref_names: Vec<&str> = reference.iter().map(|c| c.name.as_str()).collect();
    if names
        .iter()
        .map(String::as_str)
        .ne(ref_names.iter().copied())
    {
        return Err(Error::SchemaMismatch(format!(
            "columns {names:?} differ from {ref_names:?}"
        )));
    }
    let rows = build_rows(reference, cells)?;
    let schema = reference
        .iter()
        .enumerate()
        .map(|(j, col)| match &col.kind {
            ColumnKind::Continuous { .. } => {
                let vals: Vec<f64> = rows.iter().filter_map(|r| r[j].as_num()).collect();
                ColumnSchema {
                    name: col.name.clone(),
                    kind: range_of(&vals),
                }
            }
            ColumnKind::Categorical { .. } => col.clone(),
        })
        .collect();
    TabularDataset::new(schema, rows)
}

/// Writes a dataset as CSV with a header row.
pub fn write_csv(ds: &TabularDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv(e.to_string()))?;
    w.write_record(ds.schema.iter().map(|c| c.name.as_str()))
        .map_err(|e| Error::Csv(e.to_string()))?;
    for row in &ds.rows {
        let rec: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(v) => v.to_string(),
                Cell::Cat(s) => s.clone(),
            })
            .collect();
        w.write_record(&rec)
            .map_err(|e| Error::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// How one source column maps onto encoded coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBlock {
    pub column: usize,
    pub name: String,
    pub offset: usize,
    pub width: usize,
    pub kind: BlockKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BlockKind {
    MinMax { min: f64, max: f64 },
    OneHot { categories: Vec<String>, scale: f64 },
}

/// Encoding fitted on one dataset and applicable to any dataset with the same columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    blocks: Vec<FeatureBlock>,
    dim: usize,
}

impl Encoding {
    pub fn fit(ds: &TabularDataset) -> Self {
        let mut offset = 0;
        let blocks = ds
            .schema
            .iter()
            .enumerate()
            .map(|(column, col)| {
                let (kind, width) = match &col.kind {
                    ColumnKind::Continuous { min, max } => (
                        BlockKind::MinMax {
                            min: *min,
                            max: *max,
                        },
                        1,
                    ),
                    ColumnKind::Categorical { categories } => (
                        BlockKind::OneHot {
                            categories: categories.clone(),
                            scale: ONE_HOT_SCALE,
                        },
                        categories.len(),
                    ),
                };
                let block = FeatureBlock {
                    column,
                    name: col.name.clone(),
                    offset,
                    width,
                    kind,
                };
                offset += width;
                block
            })
            .collect();
        Encoding {
            blocks,
            dim: offset,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[FeatureBlock] {
        &self.blocks
    }

    /// Checks that `schema` has the fitted column names and kinds.
    pub fn check_schema(&self, schema: &[ColumnSchema]) -> Result<()> {
        if schema.len() != self.blocks.len() {
            return Err(Error::SchemaMismatch(format!(
                "expected {} columns, found {}",
                self.blocks.len(),
                schema.len()
            )));
        }
        for (b, col) in self.blocks.iter().zip(schema) {
            let kind_ok = matches!(
                (&b.kind, &col.kind),
                (BlockKind::MinMax { .. }, ColumnKind::Continuous { .. })
                    | (BlockKind::OneHot { .. }, ColumnKind::Categorical { .. })
            );
            if b.name != col.name || !kind_ok {
                return Err(Error::SchemaMismatch(format!(
                    "column {:?} does not match fitted column {:?}",
                    col.name, b.name
                )));
            }
        }
        Ok(())
    }

    pub fn encode(&self, ds: &TabularDataset) -> Result<PointCloud> {
        self.check_schema(&ds.schema)?;
        let mut points = Matrix::zeros(ds.n_rows(), self.dim);
        for (i, row) in ds.rows.iter().enumerate() {
            let out = points.row_mut(i);
            for b in &self.blocks {
                match (&b.kind, &row[b.column]) {
                    (BlockKind::MinMax { min, max }, Cell::Num(v)) => {
                        out[b.offset] = scale_min_max(*v, *min, *max);
                    }
                    (BlockKind::OneHot { categories, scale }, Cell::Cat(label)) => {
                        let k = categories.binary_search(label).map_err(|_| {
                            Error::UnknownCategory {
                                column: b.name.clone(),
                                label: label.clone(),
                            }
                        })?;
                        out[b.offset + k] = *scale;
                    }
                    _ => unreachable!("cells validated against schema"),
                }
            }
        }
        Ok(PointCloud {
            points,
            feature_map: self.blocks.clone(),
        })
    }

    /// Recovers the label of a one-hot block by arg-max.
    pub fn decode_label<'a>(&'a self, block: &'a FeatureBlock, coords: &[f64]) -> Option<&'a str> {
        match &block.kind {
            BlockKind::OneHot { categories, .. } => {
                let slice = &coords[block.offset..block.offset + block.width];
                let k = argmax(slice);
                Some(categories[k].as_str())
            }
            BlockKind::MinMax { .. } => None,
        }
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn scale_min_max(v: f64, min: f64, max: f64) -> f64 {
    if max > min {
        (v - min) / (max - min)
    } else {
        0.0
    }
}

pub(crate) fn unscale_min_max(u: f64, min: f64, max: f64) -> f64 {
    if max > min {
        min + u * (max - min)
    } else {
        min
    }
}

/// Encoded numeric view of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Matrix,
    pub feature_map: Vec<FeatureBlock>,
}

impl PointCloud {
    /// A cloud of raw coordinates with one min-max block per column and no scaling metadata.
    pub fn from_matrix(points: Matrix) -> Self {
        let feature_map = (0..points.cols())
            .map(|j| FeatureBlock {
                column: j,
                name: format!("x{j}"),
                offset: j,
                width: 1,
                kind: BlockKind::MinMax { min: 0.0, max: 1.0 },
            })
            .collect();
        PointCloud {
            points,
            feature_map,
        }
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    /// Writes the encoded coordinates as CSV (debug export).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv(e.to_string()))?;
        let header: Vec<String> = self
            .feature_map
            .iter()
            .flat_map(|b| match &b.kind {
                BlockKind::MinMax { .. } => vec![b.name.clone()],
                BlockKind::OneHot { categories, .. } => categories
                    .iter()
                    .map(|c| format!("{}={}", b.name, c))
                    .collect(),
            })
            .collect();
        w.write_record(&header)
            .map_err(|e| Error::Csv(e.to_string()))?;
        for row in self.points.iter_rows() {
            w.write_record(row.iter().map(|v| v.to_string()))
                .map_err(|e| Error::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Real and synthetic clouds under one shared encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPair {
    pub real: PointCloud,
    pub synthetic: PointCloud,
    /// 0 for real rows, 1 for synthetic rows, real rows first.
    pub labels: Vec<u8>,
}

impl DatasetPair {
    pub fn from_clouds(real: PointCloud, synthetic: PointCloud) -> Self {
        assert_eq!(real.dim(), synthetic.dim(), "clouds differ in dimension");
        let labels = std::iter::repeat_n(0u8, real.len())
            .chain(std::iter::repeat_n(1u8, synthetic.len()))
            .collect();
        DatasetPair {
            real,
            synthetic,
            labels,
        }
    }

    /// Real rows followed by synthetic rows.
    pub fn combined(&self) -> Matrix {
        self.real.points.vstack(&self.synthetic.points)
    }

    pub fn n_real(&self) -> usize {
        self.real.len()
    }

    pub fn n_synthetic(&self) -> usize {
        self.synthetic.len()
    }
}

/// Encodes a dataset with an encoding fitted on itself.
pub fn encode(ds: &TabularDataset) -> PointCloud {
    Encoding::fit(ds)
        .encode(ds)
        .expect("an encoding always accepts the dataset it was fitted on")
}

/// Encodes both tables with the encoding fitted on `real`.
pub fn encode_pair(real: &TabularDataset, synth: &TabularDataset) -> Result<DatasetPair> {
    let enc = Encoding::fit(real);
    for (a, b) in real.schema.iter().zip(&synth.schema) {
        if a.name != b.name || !a.same_kind(b) {
            return Err(Error::SchemaMismatch(format!(
                "column {:?} vs {:?}",
                a.name, b.name
            )));
        }
    }
    let real_cloud = enc.encode(real)?;
    let synth_cloud = enc.encode(synth)?;
    Ok(DatasetPair::from_clouds(real_cloud, synth_cloud))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn loads_small_mixed_file() {
        let f = write_tmp("a,b\n1.0,x\n2.0,y\n3.5,x\n");
        let ds = load_csv(f.path()).unwrap();
        assert_eq!(ds.n_cols(), 2);
        assert_eq!(ds.n_rows(), 3);
        // 3 distinct values <= max(2, 1) is false: 3 > 2, so continuous
        assert_eq!(
            ds.schema()[0].kind,
            ColumnKind::Continuous { min: 1.0, max: 3.5 }
        );
        assert_eq!(
            ds.schema()[1].kind,
            ColumnKind::Categorical {
                categories: names(&["x", "y"])
            }
        );
    }

    #[test]
    fn header_only_is_empty() {
        let f = write_tmp("a,b\n");
        assert!(matches!(load_csv(f.path()), Err(Error::EmptyDataset)));
    }

    #[test]
    fn ragged_and_missing_rows_rejected() {
        let f = write_tmp("a,b\n1,2\n3\n");
        assert!(matches!(load_csv(f.path()), Err(Error::RaggedRow { .. })));
        let f = write_tmp("a,b\n1,2\n3,\n");
        assert!(matches!(load_csv(f.path()), Err(Error::MissingCell { .. })));
    }

    #[test]
    fn binary_integer_column_is_categorical() {
        // 20 rows of 0/1: 2 distinct <= max(2, 2)
        let mut s = String::from("smooth\n");
        for i in 0..20 {
            s.push_str(if i % 3 == 0 { "1\n" } else { "0\n" });
        }
        let ds = load_csv(write_tmp(&s).path()).unwrap();
        assert_eq!(
            ds.schema()[0].categories().unwrap(),
            &names(&["0", "1"])[..]
        );
    }

    #[test]
    fn inference_rules() {
        let n = 30;
        let numeric: Vec<Vec<String>> = (0..n).map(|i| vec![format!("{}", i.min(27))]).collect();
        let s = infer_schema(&names(&["c"]), &numeric);
        assert!(s[0].is_continuous());

        // exactly at the threshold (3 = ceil(0.1 * 30)) stays categorical
        let codes: Vec<Vec<String>> = (0..n).map(|i| vec![format!("{}", i % 3)]).collect();
        assert!(!infer_schema(&names(&["c"]), &codes)[0].is_continuous());
        let codes: Vec<Vec<String>> = (0..n).map(|i| vec![format!("{}", i % 4)]).collect();
        assert!(infer_schema(&names(&["c"]), &codes)[0].is_continuous());

        let mixed = vec![
            vec!["1.5".to_string()],
            vec!["abc".to_string()],
            vec!["2".into()],
        ];
        assert!(!infer_schema(&names(&["c"]), &mixed)[0].is_continuous());
    }

    fn mixed_dataset() -> TabularDataset {
        TabularDataset::from_columns(vec![
            (
                "x".into(),
                vec![Cell::Num(2.0), Cell::Num(4.0), Cell::Num(6.0)],
            ),
            (
                "k".into(),
                vec![
                    Cell::Cat("A".into()),
                    Cell::Cat("B".into()),
                    Cell::Cat("A".into()),
                ],
            ),
            (
                "c".into(),
                vec![Cell::Num(5.0), Cell::Num(5.0), Cell::Num(5.0)],
            ),
        ])
        .unwrap()
    }

    #[test]
    fn encode_scales_and_one_hots() {
        let cloud = encode(&mixed_dataset());
        assert_eq!(cloud.dim(), 4);
        assert_eq!(cloud.points.row(1)[0], 0.5);
        assert_eq!(cloud.points.row(0)[1..3], [ONE_HOT_SCALE, 0.0]);
        // constant column maps to zero
        assert!(cloud.points.column(3).iter().all(|v| *v == 0.0));
        // rows 0 and 1 differ in category: squared contribution 2 s^2 = 1
        let a = &cloud.points.row(0)[1..3];
        let b = &cloud.points.row(1)[1..3];
        let d = crate::matrix::sq_euclidean(a, b).sqrt();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn categorical_round_trip() {
        let ds = mixed_dataset();
        let enc = Encoding::fit(&ds);
        let cloud = enc.encode(&ds).unwrap();
        let block = &enc.blocks()[1];
        for (i, row) in ds.rows().iter().enumerate() {
            assert_eq!(
                enc.decode_label(block, cloud.points.row(i)),
                row[1].as_cat()
            );
        }
    }

    #[test]
    fn encode_pair_errors_and_labels() {
        let real = mixed_dataset();
        let pair = encode_pair(&real, &real).unwrap();
        assert_eq!(pair.labels, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(pair.real.points, pair.synthetic.points);

        let unknown = TabularDataset::from_columns(vec![
            ("x".into(), vec![Cell::Num(1.0)]),
            ("k".into(), vec![Cell::Cat("Z".into())]),
            ("c".into(), vec![Cell::Num(5.0)]),
        ])
        .unwrap();
        assert!(matches!(
            encode_pair(&real, &unknown),
            Err(Error::UnknownCategory { .. })
        ));

        let renamed = TabularDataset::from_columns(vec![
            ("y".into(), vec![Cell::Num(1.0)]),
            ("k".into(), vec![Cell::Cat("A".into())]),
            ("c".into(), vec![Cell::Num(5.0)]),
        ])
        .unwrap();
        assert!(matches!(
            encode_pair(&real, &renamed),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn synthetic_outside_real_range_is_kept() {
        let real = mixed_dataset();
        let synth = TabularDataset::from_columns(vec![
            ("x".into(), vec![Cell::Num(10.0)]),
            ("k".into(), vec![Cell::Cat("B".into())]),
            ("c".into(), vec![Cell::Num(5.0)]),
        ])
        .unwrap();
        let pair = encode_pair(&real, &synth).unwrap();
        assert_eq!(pair.synthetic.points.row(0)[0], 2.0);
    }

    #[test]
    fn load_with_reference_schema() {
        let real = load_csv(write_tmp("a,b\n1.0,x\n2.0,y\n3.5,x\n").path()).unwrap();
        let synth = load_csv_with_schema(write_tmp("a,b\n9,x\n").path(), real.schema()).unwrap();
        assert_eq!(synth.schema()[1], real.schema()[1]);
        let bad = load_csv_with_schema(write_tmp("a,b\n9,q\n").path(), real.schema());
        assert!(matches!(bad, Err(Error::UnknownCategory { .. })));
    }
}
