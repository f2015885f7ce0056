//! Operator-learning surrogates: a branch/trunk network pair approximating
//! the solution operator of an elliptic problem on (0,1), trained on random
//! source terms, plus adapters that let the trained net stand in for the
//! exact solver inside the primal-dual iteration.
//!
//! The prediction at query point z for input function v sampled at m sensor
//! locations is
//!
//!   N(v)(z) = w(z) * ( branch(v) . trunk(z) + b0 ),
//!
//! where w is an optional boundary weight that enforces the Dirichlet
//! condition identically.

pub mod grf;
pub mod io;
pub mod mlp;
pub mod surrogate;
pub mod train;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::scalar::{real, Scalar};
use mlp::Mlp;

/// Multiplicative boundary weight; a closed set of variants keeps the model
/// files self-describing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryFactor {
    None,
    /// x (x - 1): vanishes at both ends of the unit interval.
    XTimesXMinus1,
}

impl BoundaryFactor {
    pub fn eval<T: Scalar>(self, x: T) -> T {
        match self {
            BoundaryFactor::None => T::one(),
            BoundaryFactor::XTimesXMinus1 => x * (x - T::one()),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            BoundaryFactor::None => "none",
            BoundaryFactor::XTimesXMinus1 => "x_times_x_minus_1",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "none" => Ok(BoundaryFactor::None),
            "x_times_x_minus_1" => Ok(BoundaryFactor::XTimesXMinus1),
            other => Err(Error::ModelFormat(format!("unknown boundary factor '{other}'"))),
        }
    }
}

/// Provenance and deployment knobs carried with the parameters.
#[derive(Clone, Copy, Debug)]
pub struct NetMetadata<T> {
    /// Coefficients of the elliptic problem the net was trained on.
    pub nu: T,
    pub c: T,
    /// Cells of the training grid; sensors sit on its n_cells + 1 nodes.
    pub n_cells: usize,
    /// Time step when the net represents one backward-Euler stage.
    pub tau: Option<T>,
    pub seed: u64,
    pub iterations: usize,
    pub final_loss: T,
    /// Mean norm of the training inputs, the radius the net knows best.
    pub reference_norm: T,
    /// Rescale inputs onto the reference radius and scale outputs back.
    /// Sound because the target operator is linear; keeps far-out-of-
    /// distribution inputs away from the saturated tanh regime.
    pub normalize_inputs: bool,
    /// Deploy the average of the prediction over the exact symmetries of
    /// the solve being imitated: sign flips (the target is linear, hence
    /// odd) and the reflection of the unit interval (the Dirichlet solve
    /// commutes with x -> 1 - x, and so does the boundary weight). Exact
    /// for the target while cancelling the error components of the wrong
    /// parity; a generic net carries both (bias terms alone make net(0)
    /// nonzero). Costs three extra branch passes per application.
    pub symmetrize: bool,
}

#[derive(Clone, Debug)]
pub struct OperatorNet<T: Scalar> {
    pub branch: Mlp<T>,
    pub trunk: Mlp<T>,
    pub b0: T,
    pub boundary_factor: BoundaryFactor,
    pub meta: NetMetadata<T>,
}

/// Trunk outputs and boundary weights precomputed for the interior nodes of
/// a grid; the trunk never changes between calls, so surrogate applications
/// reduce to one branch pass plus a small dense contraction.
pub struct TrunkCache<T> {
    n_cells: usize,
    /// nodes x n_basis, row-major.
    values: Vec<T>,
    factors: Vec<T>,
}

impl<T: Scalar> OperatorNet<T> {
    /// Sensor count m; inputs are sampled on the closed grid, boundary
    /// included.
    pub fn sensor_count(&self) -> usize {
        self.branch.in_dim()
    }

    pub fn n_basis(&self) -> usize {
        self.branch.out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.branch.param_count() + self.trunk.param_count() + 1
    }

    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        self.branch.flatten_into(&mut out);
        self.trunk.flatten_into(&mut out);
        out.push(self.b0);
        out
    }

    pub fn unflatten(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::ShapeMismatch { expected: self.param_count(), got: flat.len() });
        }
        let mut it = flat.iter();
        self.branch.read_from(it.by_ref().take(self.branch.param_count()))?;
        self.trunk.read_from(it.by_ref().take(self.trunk.param_count()))?;
        self.b0 = *it.next().unwrap();
        Ok(())
    }

    /// [0, interior values, 0]: the closed-grid samples the branch expects.
    pub fn sensor_values_from(&self, interior: &[T]) -> Result<Vec<T>> {
        if interior.len() + 2 != self.sensor_count() {
            return Err(Error::ShapeMismatch {
                expected: self.sensor_count(),
                got: interior.len() + 2,
            });
        }
        let mut v = Vec::with_capacity(self.sensor_count());
        v.push(T::zero());
        v.extend_from_slice(interior);
        v.push(T::zero());
        Ok(v)
    }

    /// Pointwise prediction.
    pub fn forward(&self, u_sensors: &[T], z: T) -> Result<T> {
        if u_sensors.len() != self.sensor_count() {
            return Err(Error::ShapeMismatch {
                expected: self.sensor_count(),
                got: u_sensors.len(),
            });
        }
        let b = self.branch.forward_one(u_sensors)?;
        let t = self.trunk.forward_one(&[z])?;
        let mut acc = self.b0;
        for (bi, ti) in b.iter().zip(&t) {
            acc = acc + *bi * *ti;
        }
        Ok(self.boundary_factor.eval(z) * acc)
    }

    pub fn trunk_cache(&self, n_cells: usize) -> Result<TrunkCache<T>> {
        if n_cells + 1 != self.sensor_count() {
            return Err(Error::ShapeMismatch { expected: self.sensor_count(), got: n_cells + 1 });
        }
        let nodes = n_cells - 1;
        let mut zs = Vec::with_capacity(nodes);
        for j in 1..n_cells {
            zs.push(real::<T>(j as f64 / n_cells as f64));
        }
        let acts = self.trunk.forward_batch(&zs, nodes)?;
        let values = acts.last().unwrap().clone();
        let factors = zs.iter().map(|&z| self.boundary_factor.eval(z)).collect();
        Ok(TrunkCache { n_cells, values, factors })
    }

    /// One branch pass and the basis contraction over all interior nodes.
    fn eval_interior(&self, interior: &[T], cache: &TrunkCache<T>, out: &mut [T]) -> Result<()> {
        let sensors = self.sensor_values_from(interior)?;
        let b = self.branch.forward_one(&sensors)?;
        let n = self.n_basis();
        for (j, o) in out.iter_mut().enumerate() {
            let trow = &cache.values[j * n..(j + 1) * n];
            let mut acc = self.b0;
            for (bi, ti) in b.iter().zip(trow) {
                acc = acc + *bi * *ti;
            }
            *o = cache.factors[j] * acc;
        }
        Ok(())
    }

    /// Interior evaluation honoring the normalization switch: inputs are
    /// rescaled onto the reference radius and the output scaled back, which
    /// is exact for the linear operator the net approximates. Zero input
    /// falls through to a raw evaluation.
    fn eval_normalized(&self, interior: &[T], cache: &TrunkCache<T>, out: &mut [T]) -> Result<()> {
        if !self.meta.normalize_inputs {
            return self.eval_interior(interior, cache, out);
        }
        let h = T::one() / real::<T>(cache.n_cells as f64);
        let mut sq = T::zero();
        for &v in interior {
            sq = sq + v * v;
        }
        let input_norm = (sq * h).sqrt();
        let rho = self.meta.reference_norm;
        if !(input_norm > T::zero()) || !(rho > T::zero()) {
            return self.eval_interior(interior, cache, out);
        }
        let scale = rho / input_norm;
        let scaled: Vec<T> = interior.iter().map(|&v| v * scale).collect();
        self.eval_interior(&scaled, cache, out)?;
        for o in out.iter_mut() {
            *o = *o / scale;
        }
        Ok(())
    }

    /// Deployment evaluation: normalization per the metadata switch, then
    /// the symmetry average when `symmetrize` is set. Every variant is
    /// evaluated on the transformed input and mapped back, so the deployed
    /// map is odd and reflection-equivariant by construction. Sign and
    /// reflection preserve the input norm, hence all four variants share
    /// one normalization scale and homogeneity survives the average.
    pub fn eval_slice(&self, interior: &[T], cache: &TrunkCache<T>, out: &mut [T]) -> Result<()> {
        self.eval_normalized(interior, cache, out)?;
        if !self.meta.symmetrize {
            return Ok(());
        }
        let m = interior.len();
        let mut variant = vec![T::zero(); m];
        let mut scratch = vec![T::zero(); m];
        for j in 0..m {
            variant[j] = -interior[j];
        }
        self.eval_normalized(&variant, cache, &mut scratch)?;
        for j in 0..m {
            out[j] = out[j] - scratch[j];
        }
        for j in 0..m {
            variant[j] = interior[m - 1 - j];
        }
        self.eval_normalized(&variant, cache, &mut scratch)?;
        for j in 0..m {
            out[j] = out[j] + scratch[m - 1 - j];
        }
        for j in 0..m {
            variant[j] = -interior[m - 1 - j];
        }
        self.eval_normalized(&variant, cache, &mut scratch)?;
        for j in 0..m {
            out[j] = out[j] - scratch[m - 1 - j];
        }
        let quarter = real::<T>(0.25);
        for o in out.iter_mut() {
            *o = *o * quarter;
        }
        Ok(())
    }

    /// Whole-field application on the matching stationary grid.
    pub fn apply(&self, v: &Field<T>, cache: &TrunkCache<T>) -> Result<Field<T>> {
        let grid = v.grid();
        if grid.dim() != 1 || grid.is_transient() || grid.n_cells() != cache.n_cells {
            return Err(Error::GridMismatch {
                expected: format!("1d stationary grid with {} cells", cache.n_cells),
                got: format!("{grid:?}"),
            });
        }
        let mut out = Field::zeros(grid);
        // borrow juggling: evaluate into a scratch then move it in
        let mut scratch = vec![T::zero(); v.len()];
        self.eval_slice(v.as_slice(), cache, &mut scratch)?;
        out.as_mut_slice().copy_from_slice(&scratch);
        Ok(out)
    }

    /// Switch input normalization on or off (recorded in the model file).
    pub fn set_input_normalization(&mut self, on: bool) {
        self.meta.normalize_inputs = on;
    }

    /// Switch the symmetry average on or off (recorded in the model file).
    pub fn set_symmetrization(&mut self, on: bool) {
        self.meta.symmetrize = on;
    }
}

pub use grf::{grf_mode_std, sample_grf, sample_grf_with};
pub use io::{load_net, save_net};
pub use surrogate::{
    as_solution_operator, fidelity_check, march_fidelity_check, parabolic_surrogate_operator,
    surrogate_adjoint_march, surrogate_parabolic_march, FidelityReport,
};
pub use train::{
    adam_step, generate_dataset, grad, loss, train, AdamState, GradSet, TrainConfig, TrainingSet,
};
