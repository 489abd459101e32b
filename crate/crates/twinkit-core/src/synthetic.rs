//! Seeded synthetic datasets for tests and benchmarks.
//!
//! All randomness flows through `ChaCha8Rng` seeded from a `u64`, and normal
//! variates come from the Marsaglia polar method, so generated tables are
//! bit-reproducible for a given seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::RawTable;
use crate::error::Result;

/// First-order autoregressive correlation between adjacent columns of the
/// multivariate-normal generator: `cov(col_i, col_j) = RHO^|i-j|`.
pub const MVN_RHO: f64 = 0.5;

/// A zero-mean multivariate normal draw with covariance `0.5^|i-j|`.
#[derive(Debug, Clone, Copy)]
pub struct MvnSpec {
    pub n_rows: usize,
    pub dim: usize,
    pub seed: u64,
}

impl MvnSpec {
    /// The dense covariance matrix, row-major `dim x dim`.
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.dim;
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] = MVN_RHO.powi((i as i32 - j as i32).abs());
            }
        }
        cov
    }
}

/// Standard-normal stream via the polar method. Generates variates in pairs
/// and hands out the spare before drawing again.
struct NormalSource<R: Rng> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> NormalSource<R> {
    fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    fn next(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.rng.gen::<f64>() - 1.0;
            let v = 2.0 * self.rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix,
/// row-major. Returns `None` if a pivot is not strictly positive.
fn cholesky(matrix: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut lower = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = matrix[i * dim + j];
            for k in 0..j {
                s -= lower[i * dim + k] * lower[j * dim + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                lower[i * dim + j] = s.sqrt();
            } else {
                lower[i * dim + j] = s / lower[j * dim + j];
            }
        }
    }
    Some(lower)
}

/// Draws `spec.n_rows` i.i.d. rows from `N(0, Sigma)` with
/// `Sigma_ij = 0.5^|i-j|`, applying the lower Cholesky factor of `Sigma` to
/// standard-normal draws. Columns are named `x1..xd`.
pub fn generate_mvn(spec: &MvnSpec) -> Result<RawTable> {
    assert!(spec.dim >= 1, "dim must be at least 1");
    assert!(spec.n_rows >= 2, "n_rows must be at least 2");
    let d = spec.dim;
    let lower = cholesky(&spec.covariance(), d)
        .expect("AR(1) covariance is positive definite; factorization cannot fail");
    let mut normals = NormalSource::new(ChaCha8Rng::seed_from_u64(spec.seed));
    let mut rows = Vec::with_capacity(spec.n_rows);
    let mut z = vec![0.0; d];
    for _ in 0..spec.n_rows {
        for zj in z.iter_mut() {
            *zj = normals.next();
        }
        let mut row = vec![0.0; d];
        for i in 0..d {
            let mut s = 0.0;
            for (j, &zj) in z.iter().enumerate().take(i + 1) {
                s += lower[i * d + j] * zj;
            }
            row[i] = s;
        }
        rows.push(row);
    }
    let names = (1..=d).map(|i| format!("x{i}")).collect();
    RawTable::from_rows(names, rows)
}

/// Two-column demo shape: `x ~ N(0,1)`, `y | x ~ N(x^2, 1)`.
pub fn generate_parabola(n_rows: usize, seed: u64) -> Result<RawTable> {
    assert!(n_rows >= 2, "n_rows must be at least 2");
    let mut normals = NormalSource::new(ChaCha8Rng::seed_from_u64(seed));
    let mut rows = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let x = normals.next();
        let y = x * x + normals.next();
        rows.push(vec![x, y]);
    }
    RawTable::from_rows(vec!["x".into(), "y".into()], rows)
}
