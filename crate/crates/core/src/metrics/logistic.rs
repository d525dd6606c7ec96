use crate::matrix::Matrix;

/// L2 penalty on the weights (the bias is not penalized).
pub const LOGISTIC_L2: f64 = 1e-4;
pub const LOGISTIC_ITERATIONS: usize = 2000;
pub const LOGISTIC_LEARNING_RATE: f64 = 0.1;

/// Logistic regression fitted on standardized features.
///
/// The weights live in the standardized space; [`LogisticModel::predict`]
/// applies the stored column means and scales.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Column means and standard deviations; zero-variance columns get scale 1.
pub fn standardization(points: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = points.rows() as f64;
    let d = points.cols();
    let mut mean = vec![0.0; d];
    for row in points.iter_rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for row in points.iter_rows() {
        for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let scale = var
        .iter()
        .map(|v| {
            let s = (v / n).sqrt();
            if s > 1e-12 {
                s
            } else {
                1.0
            }
        })
        .collect();
    (mean, scale)
}

impl LogisticModel {
    fn standardize(&self, row: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = (row[j] - self.mean[j]) / self.scale[j];
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut z = vec![0.0; row.len()];
        self.standardize(row, &mut z);
        sigmoid(self.bias + z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn predict(&self, points: &Matrix) -> Vec<f64> {
        points.iter_rows().map(|r| self.predict_row(r)).collect()
    }
}

/// Minimizes `mean log-loss + (lambda / 2) |w|^2` by full-batch gradient descent
/// from zero, with a fixed iteration count and step.
pub fn fit_logistic(points: &Matrix, labels: &[u8]) -> LogisticModel {
    assert_eq!(points.rows(), labels.len(), "one label per row");
    let (n, d) = (points.rows(), points.cols());
    let (mean, scale) = standardization(points);
    let mut z = Matrix::zeros(n, d);
    for i in 0..n {
        let row = points.row(i);
        for (j, v) in z.row_mut(i).iter_mut().enumerate() {
            *v = (row[j] - mean[j]) / scale[j];
        }
    }
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut grad_w = vec![0.0; d];
    let inv_n = 1.0 / n as f64;
    for _ in 0..LOGISTIC_ITERATIONS {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (i, row) in z.iter_rows().enumerate() {
            let p = sigmoid(b + row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>());
            let r = p - y[i];
            grad_b += r;
            for (g, x) in grad_w.iter_mut().zip(row) {
                *g += r * x;
            }
        }
        for (wj, g) in w.iter_mut().zip(&grad_w) {
            *wj -= LOGISTIC_LEARNING_RATE * (g * inv_n + LOGISTIC_L2 * *wj);
        }
        b -= LOGISTIC_LEARNING_RATE * grad_b * inv_n;
    }
    LogisticModel {
        weights: w,
        bias: b,
        mean,
        scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uninformative_labels_give_half() {
        let pts = Matrix::from_rows(&[[0.0, 1.0], [2.0, 3.0], [0.0, 1.0], [2.0, 3.0]]);
        let m = fit_logistic(&pts, &[0, 0, 1, 1]);
        assert!(m.weights.iter().all(|w| w.abs() < 1e-12));
        for p in m.predict(&pts) {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dimensional_monotone() {
        let pts = Matrix::from_rows(&[[0.0], [0.0], [1.0], [1.0]]);
        let m = fit_logistic(&pts, &[0, 0, 1, 1]);
        assert!(m.predict_row(&[0.0]) < 0.5);
        assert!(m.predict_row(&[1.0]) > 0.5);
    }

    #[test]
    fn constant_column_is_harmless() {
        let pts = Matrix::from_rows(&[[5.0, 0.0], [5.0, 1.0], [5.0, 0.2], [5.0, 0.9]]);
        let m = fit_logistic(&pts, &[0, 1, 0, 1]);
        assert_eq!(m.weights[0], 0.0);
        assert!(m.bias.is_finite());
    }
}
