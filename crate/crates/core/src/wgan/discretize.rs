use crate::error::Result;
use crate::matrix::Matrix;
use crate::tabular::{unscale_min_max, BlockKind, Cell, Encoding, TabularDataset};

/// Splits `k` items in proportion to `counts` by the largest-remainder rule.
/// Ties in the remainder go to the earlier entry.
pub fn largest_remainder(counts: &[usize], k: usize) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0; counts.len()];
    }
    let mut out: Vec<usize> = counts.iter().map(|c| c * k / total).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = counts[a] * k % total;
        let rb = counts[b] * k % total;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(k - assigned) {
        out[i] += 1;
    }
    out
}

/// Maps generated rows back to table cells.
///
/// Continuous coordinates are inverted through the real min-max range.
/// Each categorical block is reduced to a scalar surrogate (the weighted mean
/// category position); rows are sorted by it and handed out category by
/// category so the synthetic counts reproduce the real frequencies.
pub fn discretize(
    synthetic: &Matrix,
    encoding: &Encoding,
    real: &TabularDataset,
) -> Result<TabularDataset> {
    encoding.check_schema(real.schema())?;
    let k = synthetic.rows();
    let mut columns: Vec<(String, Vec<Cell>)> = Vec::with_capacity(encoding.blocks().len());
    for block in encoding.blocks() {
        let cells = match &block.kind {
            BlockKind::MinMax { min, max } => (0..k)
                .map(|i| Cell::Num(unscale_min_max(synthetic.get(i, block.offset), *min, *max)))
                .collect(),
            BlockKind::OneHot { categories, .. } => {
                let labels = real
                    .label_column(block.column)
                    .expect("one-hot blocks come from categorical columns");
                let counts: Vec<usize> = categories
                    .iter()
                    .map(|c| labels.iter().filter(|l| **l == c.as_str()).count())
                    .collect();
                let quotas = largest_remainder(&counts, k);
                let surrogate: Vec<f64> = (0..k)
                    .map(|i| {
                        let v = &synthetic.row(i)[block.offset..block.offset + block.width];
                        let mass: f64 = v.iter().sum();
                        if mass > 0.0 {
                            v.iter().enumerate().map(|(j, x)| j as f64 * x).sum::<f64>() / mass
                        } else {
                            (block.width as f64 - 1.0) / 2.0
                        }
                    })
                    .collect();
                let mut order: Vec<usize> = (0..k).collect();
                order.sort_by(|&a, &b| surrogate[a].total_cmp(&surrogate[b]).then(a.cmp(&b)));
                let mut cells = vec![Cell::Num(0.0); k];
                let mut pos = 0;
                for (cat, &q) in categories.iter().zip(&quotas) {
                    for &row in &order[pos..pos + q] {
                        cells[row] = Cell::Cat(cat.clone());
                    }
                    pos += q;
                }
                cells
            }
        };
        columns.push((block.name.clone(), cells));
    }
    let mut ds = TabularDataset::from_columns(columns)?;
    // keep the real category lists so unseen-but-valid labels stay representable
    let schema = ds
        .schema()
        .iter()
        .zip(real.schema())
        .map(|(s, r)| {
            if s.is_continuous() {
                s.clone()
            } else {
                r.clone()
            }
        })
        .collect();
    ds = TabularDataset::new(schema, ds.rows().to_vec())?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::encode;

    #[test]
    fn remainder_rule() {
        assert_eq!(largest_remainder(&[6, 3], 90), vec![60, 30]);
        assert_eq!(largest_remainder(&[1, 1, 1], 10), vec![4, 3, 3]);
        assert_eq!(largest_remainder(&[5], 7), vec![7]);
        assert_eq!(largest_remainder(&[2, 1], 0), vec![0, 0]);
    }

    fn real() -> TabularDataset {
        let labels = ["A", "A", "B", "A", "A", "B", "A", "B", "A"];
        TabularDataset::from_columns(vec![
            (
                "x".into(),
                (0..9).map(|i| Cell::Num(2.0 + i as f64 * 0.5)).collect(),
            ),
            (
                "k".into(),
                labels.iter().map(|l| Cell::Cat(l.to_string())).collect(),
            ),
            ("one".into(), vec![Cell::Cat("only".into()); 9]),
        ])
        .unwrap()
    }

    #[test]
    fn pmf_matching_and_inverse_scaling() {
        let real = real();
        let enc = Encoding::fit(&real);
        assert_eq!(enc.dim(), 4);
        let rows: Vec<[f64; 4]> = (0..90)
            .map(|i| {
                let t = (i as f64 * 0.731).fract();
                [0.5, t, 1.0 - t, 0.3]
            })
            .collect();
        let ds = discretize(&Matrix::from_rows(&rows), &enc, &real).unwrap();
        assert_eq!(ds.n_rows(), 90);
        let k = ds.label_column(1).unwrap();
        assert_eq!(k.iter().filter(|l| **l == "A").count(), 60);
        assert_eq!(k.iter().filter(|l| **l == "B").count(), 30);
        assert!(ds.label_column(2).unwrap().iter().all(|l| *l == "only"));
        // real range [2, 6], surrogate 0.5 -> 4
        assert_eq!(ds.numeric_column(0).unwrap()[0], 4.0);
        assert_eq!(ds.schema()[1], real.schema()[1]);
    }

    #[test]
    fn sorted_surrogate_assigns_low_positions_first() {
        let real = real();
        let enc = Encoding::fit(&real);
        // rows leaning to category A (index 0) should become A
        let rows = [
            [0.1, 0.9, 0.1, 0.5],
            [0.1, 0.1, 0.9, 0.5],
            [0.1, 0.8, 0.2, 0.5],
        ];
        let ds = discretize(&Matrix::from_rows(&rows), &enc, &real).unwrap();
        let k = ds.label_column(1).unwrap();
        assert_eq!(k, vec!["A", "B", "A"]);
        let _ = encode(&ds);
    }
}
