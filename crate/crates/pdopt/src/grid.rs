//! Uniform tensor grids on the unit interval/square and nodal fields on them.
//!
//! Only interior Dirichlet nodes are stored: `n_cells` cells per axis means
//! `n_cells - 1` unknowns per axis, mesh size h = 1/n_cells. A transient grid
//! additionally carries `n_time_steps` backward-Euler levels t_1..t_N with
//! step tau = 1/n_time_steps; the initial level t_0 is the business of the
//! operator offset, never of a field. Flattened layout: x fastest, then y,
//! then the time level.

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    dim: u8,
    n_cells: usize,
    n_time_steps: usize,
}

impl Grid {
    /// `n_time_steps = 0` means stationary.
    pub fn new(dim: u8, n_cells: usize, n_time_steps: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n_cells < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 cells per axis for an interior node, got {n_cells}"
            )));
        }
        Ok(Grid { dim, n_cells, n_time_steps })
    }

    pub fn stationary(dim: u8, n_cells: usize) -> Result<Self> {
        Grid::new(dim, n_cells, 0)
    }

    pub fn transient(dim: u8, n_cells: usize, n_time_steps: usize) -> Result<Self> {
        if n_time_steps == 0 {
            return Err(Error::InvalidGrid("transient grid needs n_time_steps >= 1".into()));
        }
        Grid::new(dim, n_cells, n_time_steps)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_time_steps(&self) -> usize {
        self.n_time_steps
    }

    pub fn is_transient(&self) -> bool {
        self.n_time_steps > 0
    }

    /// Interior nodes per spatial axis.
    pub fn nodes_per_axis(&self) -> usize {
        self.n_cells - 1
    }

    /// Interior nodes of one spatial slice.
    pub fn spatial_len(&self) -> usize {
        let m = self.nodes_per_axis();
        if self.dim == 1 { m } else { m * m }
    }

    /// Stored time levels (1 for stationary grids).
    pub fn n_levels(&self) -> usize {
        self.n_time_steps.max(1)
    }

    /// Total stored values of a field on this grid.
    pub fn len(&self) -> usize {
        self.spatial_len() * self.n_levels()
    }

    pub fn h<T: Scalar>(&self) -> T {
        real::<T>(1.0) / real::<T>(self.n_cells as f64)
    }

    pub fn tau<T: Scalar>(&self) -> T {
        assert!(self.is_transient(), "tau undefined on a stationary grid");
        real::<T>(1.0) / real::<T>(self.n_time_steps as f64)
    }

    /// Quadrature weight of one nodal value: h^dim, times tau when transient.
    pub fn weight<T: Scalar>(&self) -> T {
        let h = self.h::<T>();
        let mut w = if self.dim == 1 { h } else { h * h };
        if self.is_transient() {
            w = w * self.tau::<T>();
        }
        w
    }

    /// The stationary grid with the same spatial structure.
    pub fn spatial_grid(&self) -> Grid {
        Grid { dim: self.dim, n_cells: self.n_cells, n_time_steps: 0 }
    }

    fn describe(&self) -> String {
        format!("{}d, {} cells, {} time steps", self.dim, self.n_cells, self.n_time_steps)
    }
}

/// Nodal values over the interior of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![T::zero(); grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Field { grid, values })
    }

    /// Sample an analytic function at the nodes. The closure receives
    /// (x, y, t); y is 0 on 1d grids and t is 0 on stationary ones.
    pub fn sample(grid: Grid, mut f: impl FnMut(T, T, T) -> T) -> Self {
        let m = grid.nodes_per_axis();
        let h = grid.h::<T>();
        let mut values = Vec::with_capacity(grid.len());
        for level in 0..grid.n_levels() {
            let t = if grid.is_transient() {
                grid.tau::<T>() * real::<T>((level + 1) as f64)
            } else {
                T::zero()
            };
            if grid.dim() == 1 {
                for i in 0..m {
                    let x = h * real::<T>((i + 1) as f64);
                    values.push(f(x, T::zero(), t));
                }
            } else {
                for j in 0..m {
                    let y = h * real::<T>((j + 1) as f64);
                    for i in 0..m {
                        let x = h * real::<T>((i + 1) as f64);
                        values.push(f(x, y, t));
                    }
                }
            }
        }
        Field { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Values of one time level (the whole field when stationary).
    pub fn level(&self, n: usize) -> &[T] {
        let sl = self.grid.spatial_len();
        &self.values[n * sl..(n + 1) * sl]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [T] {
        let sl = self.grid.spatial_len();
        &mut self.values[n * sl..(n + 1) * sl]
    }

    /// self + c * other, grids must agree.
    pub fn add_scaled(&self, c: T, other: &Field<T>) -> Result<Field<T>> {
        check_same_grid(self, other)?;
        let values =
            self.values.iter().zip(&other.values).map(|(&a, &b)| a + c * b).collect();
        Ok(Field { grid: self.grid, values })
    }

    pub fn sub(&self, other: &Field<T>) -> Result<Field<T>> {
        self.add_scaled(-T::one(), other)
    }

    pub fn scale(&mut self, c: T) {
        for v in &mut self.values {
            *v = *v * c;
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }
}

pub(crate) fn check_same_grid<T>(a: &Field<T>, b: &Field<T>) -> Result<()> {
    if a.grid == b.grid {
        Ok(())
    } else {
        Err(Error::GridMismatch { expected: a.grid.describe(), got: b.grid.describe() })
    }
}

/// Discrete L2 inner product with quadrature weight h^dim (times tau when
/// transient), so values approximate the function-space pairing.
pub fn inner<T: Scalar>(a: &Field<T>, b: &Field<T>) -> Result<T> {
    check_same_grid(a, b)?;
    let mut acc = T::zero();
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        acc = acc + x * y;
    }
    Ok(acc * a.grid.weight::<T>())
}

pub fn norm<T: Scalar>(a: &Field<T>) -> T {
    let mut acc = T::zero();
    for &x in a.as_slice() {
        acc = acc + x * x;
    }
    (acc * a.grid.weight::<T>()).sqrt()
}

/// Weighted l1 norm, same quadrature weight as [`inner`].
pub fn norm_l1<T: Scalar>(a: &Field<T>) -> T {
    let mut acc = T::zero();
    for &x in a.as_slice() {
        acc = acc + x.abs();
    }
    acc * a.grid.weight::<T>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_inputs() {
        assert!(Grid::new(3, 8, 0).is_err());
        assert!(Grid::new(1, 1, 0).is_err());
        assert!(Grid::transient(1, 8, 0).is_err());
        assert!(Grid::new(2, 2, 4).is_ok());
    }

    #[test]
    fn lengths_and_weights() {
        let g = Grid::new(2, 8, 16).unwrap();
        assert_eq!(g.spatial_len(), 49);
        assert_eq!(g.len(), 49 * 16);
        let w: f64 = g.weight();
        assert!((w - (1.0 / 64.0) * (1.0 / 16.0)).abs() < 1e-15);
    }

    #[test]
    fn inner_of_ones_is_one_minus_h() {
        // 1d trapezoidal mass of the constant 1 with zero boundary rows dropped.
        let g = Grid::stationary(1, 8).unwrap();
        let ones = Field::<f64>::sample(g, |_, _, _| 1.0);
        let v = inner(&ones, &ones).unwrap();
        assert!((v - (1.0 - 1.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn sine_has_half_energy() {
        let g = Grid::stationary(1, 64).unwrap();
        let s = Field::<f64>::sample(g, |x, _, _| (std::f64::consts::PI * x).sin());
        let n2 = inner(&s, &s).unwrap();
        assert!((n2 - 0.5).abs() < 1e-3, "norm^2 = {n2}");
    }

    #[test]
    fn inner_rejects_mismatched_grids() {
        let a = Field::<f64>::zeros(Grid::stationary(1, 8).unwrap());
        let b = Field::<f64>::zeros(Grid::stationary(1, 16).unwrap());
        assert!(matches!(inner(&a, &b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn sample_orders_x_fastest_then_y_then_t() {
        let g = Grid::transient(2, 4, 2).unwrap();
        let f = Field::<f64>::sample(g, |x, y, t| x + 10.0 * y + 100.0 * t);
        // first node of level 2: x = y = 1/4, t = 1
        let sl = g.spatial_len();
        assert_eq!(sl, 9);
        assert!((f.as_slice()[sl] - (0.25 + 2.5 + 100.0)).abs() < 1e-15);
        // second node of level 1: x = 1/2, y = 1/4, t = 1/2
        assert!((f.as_slice()[1] - (0.5 + 2.5 + 50.0)).abs() < 1e-15);
    }

    #[test]
    fn level_views_split_time() {
        let g = Grid::transient(1, 4, 4).unwrap();
        let f = Field::<f64>::sample(g, |_, _, t| t);
        assert_eq!(f.level(0), &[0.25; 3]);
        assert_eq!(f.level(3), &[1.0; 3]);
    }
}
