//! Seeded stand-in datasets with the shapes of small physics and survey tables.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tabular::{Cell, TabularDataset};

pub const FIXTURE_NAMES: &[&str] = &["balls", "gaussian", "escooter", "circle", "moons", "blobs"];

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Shape parameters of the correlated Gaussian table generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianShape {
    /// Added to every column.
    pub shift: f64,
    /// Multiplies the latent factors.
    pub factor_scale: f64,
    /// Standard deviation of the per-cell noise.
    pub noise: f64,
}

impl Default for GaussianShape {
    fn default() -> Self {
        GaussianShape {
            shift: 0.0,
            factor_scale: 1.0,
            noise: 0.5,
        }
    }
}

/// Loadings of the three latent factors; fixed so that every draw of the
/// same shape comes from the same distribution.
fn loadings(m: usize) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_10ad);
    (0..m)
        .map(|_| [gauss(&mut rng), gauss(&mut rng), gauss(&mut rng)])
        .collect()
}

/// `n x m` matrix from a three-factor Gaussian model.
pub fn gaussian_matrix(n: usize, m: usize, shape: GaussianShape, seed: u64) -> Matrix {
    let load = loadings(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Matrix::zeros(n, m);
    for i in 0..n {
        let f = [gauss(&mut rng), gauss(&mut rng), gauss(&mut rng)];
        for (j, l) in load.iter().enumerate() {
            let v = shape.shift
                + shape.factor_scale * (l[0] * f[0] + l[1] * f[1] + l[2] * f[2])
                + shape.noise * gauss(&mut rng);
            out.set(i, j, v);
        }
    }
    out
}

/// Continuous table named `f0..f{m-1}` from a matrix.
pub fn table_from_matrix(points: &Matrix) -> TabularDataset {
    let columns = (0..points.cols())
        .map(|j| {
            (
                format!("f{j}"),
                points.column(j).into_iter().map(Cell::Num).collect(),
            )
        })
        .collect();
    TabularDataset::from_columns(columns).expect("matrix has at least one row and column")
}

/// Correlated Gaussian table, e.g. 30 x 13 like a small simulation study.
pub fn gaussian_table(n: usize, m: usize, seed: u64) -> TabularDataset {
    table_from_matrix(&gaussian_matrix(n, m, GaussianShape::default(), seed))
}

/// Nine dropped balls: material, size, mass, drop and bounce heights, contact
/// time and a binary surface flag.
pub fn balls(seed: u64) -> TabularDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let materials = ["rubber", "steel", "wood"];
    let density = [1.1, 7.8, 0.7];
    let restitution = [0.8, 0.6, 0.45];
    let mut cols: Vec<Vec<Cell>> = vec![Vec::new(); 7];
    for i in 0..9 {
        let k = i % 3;
        let diameter: f64 = rng.random_range(2.0..8.0);
        let volume = PI / 6.0 * diameter.powi(3);
        let mass = density[k] * volume * (1.0 + 0.02 * gauss(&mut rng));
        let drop: f64 = [0.5, 1.0, 1.5][i / 3];
        let e = restitution[k] + 0.03 * gauss(&mut rng);
        let bounce = drop * e * e;
        let contact = 2.0 + 10.0 * (1.0 - e) + 0.2 * gauss(&mut rng);
        let smooth = if k == 1 || rng.random_bool(0.3) {
            "1"
        } else {
            "0"
        };
        cols[0].push(Cell::Cat(materials[k].into()));
        cols[1].push(Cell::Num(round3(diameter)));
        cols[2].push(Cell::Num(round3(mass)));
        cols[3].push(Cell::Num(drop));
        cols[4].push(Cell::Num(round3(bounce)));
        cols[5].push(Cell::Num(round3(contact)));
        cols[6].push(Cell::Cat(smooth.into()));
    }
    let names = [
        "material",
        "diameter_cm",
        "mass_g",
        "drop_height_m",
        "bounce_height_m",
        "contact_ms",
        "smooth",
    ];
    TabularDataset::from_columns(names.iter().map(|s| s.to_string()).zip(cols).collect())
        .expect("fixture is well formed")
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Eleven scooter models, nine columns, two of them categorical.
pub fn escooter(seed: u64) -> TabularDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let brands = ["alpha", "beta", "gamma"];
    let mut cols: Vec<Vec<Cell>> = vec![Vec::new(); 9];
    for i in 0..11 {
        let battery: f64 = rng.random_range(250.0..700.0);
        let power: f64 = rng.random_range(250.0..500.0);
        let range = battery / 14.0 + 3.0 * gauss(&mut rng);
        let weight = 10.0 + battery / 60.0 + gauss(&mut rng);
        let speed = 18.0 + power / 60.0 + gauss(&mut rng);
        let price = 150.0 + 0.6 * battery + 0.4 * power + 30.0 * gauss(&mut rng);
        let share = (20.0 - price / 60.0 + 2.0 * gauss(&mut rng)).max(0.5);
        cols[0].push(Cell::Cat(brands[i % 3].into()));
        cols[1].push(Cell::Num(round3(battery)));
        cols[2].push(Cell::Num(round3(power)));
        cols[3].push(Cell::Num(round3(range)));
        cols[4].push(Cell::Num(round3(weight)));
        cols[5].push(Cell::Num(round3(speed)));
        cols[6].push(Cell::Num(round3(price)));
        cols[7].push(Cell::Num(round3(share)));
        cols[8].push(Cell::Cat(
            if rng.random_bool(0.5) { "yes" } else { "no" }.into(),
        ));
    }
    let names = [
        "brand",
        "battery_wh",
        "power_w",
        "range_km",
        "weight_kg",
        "top_speed_kmh",
        "price",
        "market_share",
        "foldable",
    ];
    TabularDataset::from_columns(names.iter().map(|s| s.to_string()).zip(cols).collect())
        .expect("fixture is well formed")
}

/// `n` points evenly spaced on a circle, optionally jittered.
pub fn circle(n: usize, radius: f64, noise: f64, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            [
                radius * t.cos() + noise * gauss(&mut rng),
                radius * t.sin() + noise * gauss(&mut rng),
            ]
        })
        .collect();
    Matrix::from_rows(&rows)
}

/// Two interleaved half circles.
pub fn two_moons(n: usize, noise: f64, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let t = PI * rng.random::<f64>();
            let (x, y) = if i % 2 == 0 {
                (t.cos(), t.sin())
            } else {
                (1.0 - t.cos(), 0.5 - t.sin())
            };
            [x + noise * gauss(&mut rng), y + noise * gauss(&mut rng)]
        })
        .collect();
    Matrix::from_rows(&rows)
}

/// `n` points spread over `centers` isotropic Gaussian blobs in `dim` dimensions.
pub fn blobs(n: usize, centers: usize, dim: usize, spread: f64, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).expect("spread must be finite and >= 0");
    let mut centre_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb10b);
    let means: Vec<Vec<f64>> = (0..centers)
        .map(|_| {
            (0..dim)
                .map(|_| centre_rng.random_range(-10.0..10.0))
                .collect()
        })
        .collect();
    let mut out = Matrix::zeros(n, dim);
    for i in 0..n {
        let c = &means[i % centers];
        for (j, m) in c.iter().enumerate() {
            out.set(i, j, m + noise.sample(&mut rng));
        }
    }
    out
}

/// Fixture by name, as exposed on the command line.
pub fn by_name(name: &str, rows: Option<usize>, seed: u64) -> Result<TabularDataset> {
    let ds = match name {
        "balls" => balls(seed),
        "escooter" => escooter(seed),
        "gaussian" => gaussian_table(rows.unwrap_or(30), 13, seed),
        "circle" => table_from_matrix(&circle(rows.unwrap_or(40), 1.0, 0.05, seed)),
        "moons" => table_from_matrix(&two_moons(rows.unwrap_or(60), 0.05, seed)),
        "blobs" => table_from_matrix(&blobs(rows.unwrap_or(60), 3, 4, 0.5, seed)),
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown fixture {other:?}; expected one of {FIXTURE_NAMES:?}"
            )))
        }
    };
    Ok(ds)
}
