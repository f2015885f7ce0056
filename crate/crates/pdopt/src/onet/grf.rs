//! Gaussian random fields on (0,1) with zero boundary, drawn from the
//! covariance 49^2 (-Laplace + 49 I)^{-2.5} via a truncated Karhunen-Loeve
//! expansion in the sine basis:
//!
//!   u(x) = sum_{k=1}^{K} sigma_k xi_k sqrt(2) sin(k pi x),
//!   sigma_k = 49 (k^2 pi^2 + 49)^{-1.25},
//!
//! with xi_k i.i.d. standard normal. K is tied to the grid so the expansion
//! fills exactly the resolvable spectrum.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::scalar::{real, Scalar};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// sigma_k of the covariance spectrum.
pub fn grf_mode_std(k: usize) -> f64 {
    let kpi2 = (k as f64) * (k as f64) * std::f64::consts::PI * std::f64::consts::PI;
    49.0 * (kpi2 + 49.0).powf(-1.25)
}

/// One draw evaluated at the interior nodes of an `n_points - 1` cell grid
/// (so the field has `n_points - 2` stored values and exact zeros on the
/// boundary). Truncation K = n_points - 1. Deterministic per seed.
pub fn sample_grf<T: Scalar>(seed: u64, n_points: usize) -> Result<Field<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_grf_with(&mut rng, n_points)
}

/// Same expansion, drawing the normal coefficients from a caller-owned
/// generator; used to derive many draws from one seed.
pub fn sample_grf_with<T: Scalar>(rng: &mut impl Rng, n_points: usize) -> Result<Field<T>> {
    if n_points < 3 {
        return Err(Error::InvalidParameter(format!(
            "a field needs at least 3 points, got {n_points}"
        )));
    }
    let n_cells = n_points - 1;
    let modes = n_points - 1;
    let coeffs: Vec<f64> = (0..modes)
        .map(|k| {
            let xi: f64 = rng.sample(StandardNormal);
            grf_mode_std(k + 1) * xi * std::f64::consts::SQRT_2
        })
        .collect();
    let grid = Grid::stationary(1, n_cells)?;
    let h = 1.0 / n_cells as f64;
    let mut values = Vec::with_capacity(n_cells - 1);
    for j in 1..n_cells {
        let x = j as f64 * h;
        let mut acc = 0.0;
        for (k, &c) in coeffs.iter().enumerate() {
            acc += c * ((k + 1) as f64 * std::f64::consts::PI * x).sin();
        }
        values.push(real::<T>(acc));
    }
    Field::from_values(grid, values)
}
