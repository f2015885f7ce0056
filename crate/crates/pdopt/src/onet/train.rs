//! Full-batch training of the branch/trunk net against an exact solution
//! operator: sampled random sources in, solver outputs as regression targets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::norm;
use crate::operator::SolutionOperator;
use crate::scalar::{real, Scalar};

use super::grf::sample_grf_with;
use super::mlp::Mlp;
use super::{BoundaryFactor, NetMetadata, OperatorNet};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Fixed regression set: every input is evaluated at every query point.
pub struct TrainingSet<T> {
    /// Sensor count m; each input row has m entries, boundary included.
    pub sensor_count: usize,
    pub n_inputs: usize,
    pub n_eval: usize,
    /// n_inputs x sensor_count, row-major.
    pub inputs: Vec<T>,
    pub eval_points: Vec<T>,
    /// n_inputs x n_eval, row-major.
    pub targets: Vec<T>,
    /// Mean norm of the sampled inputs; stored on trained nets as the
    /// reference radius for input normalization.
    pub mean_input_norm: T,
}

impl<T: Scalar> TrainingSet<T> {
    pub fn from_parts(
        sensor_count: usize,
        inputs: Vec<T>,
        eval_points: Vec<T>,
        targets: Vec<T>,
        mean_input_norm: T,
    ) -> Result<Self> {
        if sensor_count == 0 || eval_points.is_empty() || inputs.is_empty() {
            return Err(Error::InvalidParameter("empty training set".into()));
        }
        if inputs.len() % sensor_count != 0 {
            return Err(Error::ShapeMismatch {
                expected: sensor_count,
                got: inputs.len(),
            });
        }
        let n_inputs = inputs.len() / sensor_count;
        let n_eval = eval_points.len();
        if targets.len() != n_inputs * n_eval {
            return Err(Error::ShapeMismatch {
                expected: n_inputs * n_eval,
                got: targets.len(),
            });
        }
        Ok(TrainingSet { sensor_count, n_inputs, n_eval, inputs, eval_points, targets, mean_input_norm })
    }
}

/// Draw `n_inputs` random sources on the operator's grid, solve each one
/// exactly, and record the solution at `n_eval` equi-spaced query points
/// (endpoints included, so n_eval - 1 must divide the cell count).
pub fn generate_dataset<T: Scalar>(
    op: &SolutionOperator<T>,
    n_inputs: usize,
    n_eval: usize,
    seed: u64,
) -> Result<TrainingSet<T>> {
    let grid = op.grid();
    if grid.dim() != 1 || grid.is_transient() {
        return Err(Error::InvalidParameter(
            "dataset generation expects a 1d stationary operator".into(),
        ));
    }
    if n_inputs == 0 {
        return Err(Error::InvalidParameter("need at least one training input".into()));
    }
    let n_cells = grid.n_cells();
    if n_eval < 2 || n_cells % (n_eval - 1) != 0 {
        return Err(Error::InvalidParameter(format!(
            "query count {n_eval} does not place equi-spaced points on the {n_cells}-cell grid"
        )));
    }
    let m = n_cells + 1;
    let stride = n_cells / (n_eval - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(n_inputs * m);
    let mut targets = Vec::with_capacity(n_inputs * n_eval);
    let mut norm_acc = T::zero();
    for _ in 0..n_inputs {
        let draw = sample_grf_with::<T>(&mut rng, m)?;
        norm_acc = norm_acc + norm(&draw);
        inputs.push(T::zero());
        inputs.extend_from_slice(draw.as_slice());
        inputs.push(T::zero());
        let y = op.apply_linear(&draw)?;
        for j in 0..n_eval {
            let node = j * stride;
            if node == 0 || node == n_cells {
                targets.push(T::zero());
            } else {
                targets.push(y.as_slice()[node - 1]);
            }
        }
    }
    let eval_points = (0..n_eval)
        .map(|j| real::<T>(j as f64 / (n_eval - 1) as f64))
        .collect();
    let mean_input_norm = norm_acc / real::<T>(n_inputs as f64);
    TrainingSet::from_parts(m, inputs, eval_points, targets, mean_input_norm)
}

fn batch_forward<T: Scalar>(
    net: &OperatorNet<T>,
    set: &TrainingSet<T>,
) -> Result<(Vec<Vec<T>>, Vec<Vec<T>>, Vec<T>, Vec<T>)> {
    if net.sensor_count() != set.sensor_count {
        return Err(Error::ShapeMismatch { expected: net.sensor_count(), got: set.sensor_count });
    }
    let branch_acts = net.branch.forward_batch(&set.inputs, set.n_inputs)?;
    let trunk_acts = net.trunk.forward_batch(&set.eval_points, set.n_eval)?;
    let b = branch_acts.last().unwrap();
    let t = trunk_acts.last().unwrap();
    let nb = net.n_basis();
    let factors: Vec<T> =
        set.eval_points.iter().map(|&z| net.boundary_factor.eval(z)).collect();
    let mut preds = Vec::with_capacity(set.n_inputs * set.n_eval);
    for i in 0..set.n_inputs {
        let brow = &b[i * nb..(i + 1) * nb];
        for j in 0..set.n_eval {
            let trow = &t[j * nb..(j + 1) * nb];
            let mut acc = net.b0;
            for (bi, ti) in brow.iter().zip(trow) {
                acc = acc + *bi * *ti;
            }
            preds.push(factors[j] * acc);
        }
    }
    Ok((branch_acts, trunk_acts, factors, preds))
}

/// Mean squared error over the full input x query grid.
pub fn loss<T: Scalar>(net: &OperatorNet<T>, set: &TrainingSet<T>) -> Result<T> {
    let (_, _, _, preds) = batch_forward(net, set)?;
    let mut acc = T::zero();
    for (p, g) in preds.iter().zip(&set.targets) {
        let d = *p - *g;
        acc = acc + d * d;
    }
    Ok(acc / real::<T>(preds.len() as f64))
}

/// Gradient container mirroring the parameter layout of `OperatorNet`.
pub struct GradSet<T> {
    pub branch: Mlp<T>,
    pub trunk: Mlp<T>,
    pub b0: T,
}

impl<T: Scalar> GradSet<T> {
    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.branch.param_count() + self.trunk.param_count() + 1);
        self.branch.flatten_into(&mut out);
        self.trunk.flatten_into(&mut out);
        out.push(self.b0);
        out
    }
}

/// Reverse-mode gradient of `loss`; returns the loss value alongside.
pub fn grad<T: Scalar>(net: &OperatorNet<T>, set: &TrainingSet<T>) -> Result<(GradSet<T>, T)> {
    let (branch_acts, trunk_acts, factors, preds) = batch_forward(net, set)?;
    let n1 = set.n_inputs;
    let n2 = set.n_eval;
    let nb = net.n_basis();
    let scale = real::<T>(2.0 / (n1 * n2) as f64);

    let mut loss_acc = T::zero();
    // residuals with the boundary weight folded in: d loss / d (b . t + b0)
    let mut rfac = vec![T::zero(); n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            let d = preds[i * n2 + j] - set.targets[i * n2 + j];
            loss_acc = loss_acc + d * d;
            rfac[i * n2 + j] = scale * d * factors[j];
        }
    }
    let loss_value = loss_acc / real::<T>((n1 * n2) as f64);

    let b = branch_acts.last().unwrap();
    let t = trunk_acts.last().unwrap();
    let mut db0 = T::zero();
    let mut d_branch_out = vec![T::zero(); n1 * nb];
    let mut d_trunk_out = vec![T::zero(); n2 * nb];
    for i in 0..n1 {
        for j in 0..n2 {
            let r = rfac[i * n2 + j];
            db0 = db0 + r;
            let trow = &t[j * nb..(j + 1) * nb];
            let dbrow = &mut d_branch_out[i * nb..(i + 1) * nb];
            for k in 0..nb {
                dbrow[k] = dbrow[k] + r * trow[k];
            }
        }
    }
    for j in 0..n2 {
        let dtrow = &mut d_trunk_out[j * nb..(j + 1) * nb];
        for i in 0..n1 {
            let r = rfac[i * n2 + j];
            let brow = &b[i * nb..(i + 1) * nb];
            for k in 0..nb {
                dtrow[k] = dtrow[k] + r * brow[k];
            }
        }
    }

    let mut grads = GradSet {
        branch: Mlp::zeros(net.branch.widths())?,
        trunk: Mlp::zeros(net.trunk.widths())?,
        b0: db0,
    };
    net.branch.backward_batch(&branch_acts, &d_branch_out, n1, &mut grads.branch)?;
    net.trunk.backward_batch(&trunk_acts, &d_trunk_out, n2, &mut grads.trunk)?;
    Ok((grads, loss_value))
}

/// First-moment / second-moment optimizer state over a flat parameter vector.
pub struct AdamState<T> {
    pub lr: T,
    m: Vec<T>,
    v: Vec<T>,
    t: usize,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(n_params: usize, lr: T) -> Self {
        AdamState { lr, m: vec![T::zero(); n_params], v: vec![T::zero(); n_params], t: 0 }
    }
}

pub fn adam_step<T: Scalar>(
    params: &mut [T],
    grads: &[T],
    state: &mut AdamState<T>,
) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != state.m.len() {
        return Err(Error::ShapeMismatch { expected: state.m.len(), got: params.len().min(grads.len()) });
    }
    state.t += 1;
    let b1 = real::<T>(ADAM_BETA1);
    let b2 = real::<T>(ADAM_BETA2);
    let eps = real::<T>(ADAM_EPS);
    let c1 = T::one() - real::<T>(ADAM_BETA1.powi(state.t as i32));
    let c2 = T::one() - real::<T>(ADAM_BETA2.powi(state.t as i32));
    for ((p, g), (m, v)) in
        params.iter_mut().zip(grads).zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        *m = b1 * *m + (T::one() - b1) * *g;
        *v = b2 * *v + (T::one() - b2) * *g * *g;
        let mhat = *m / c1;
        let vhat = *v / c2;
        *p = *p - state.lr * mhat / (vhat.sqrt() + eps);
    }
    Ok(())
}

pub struct TrainConfig<T> {
    pub hidden_width: usize,
    pub n_basis: usize,
    pub iterations: usize,
    pub lr: T,
    pub boundary_factor: BoundaryFactor,
    /// Problem coefficients recorded on the trained net.
    pub nu: T,
    pub c: T,
    pub tau: Option<T>,
}

impl<T: Scalar> TrainConfig<T> {
    pub fn new(nu: T, c: T) -> Self {
        TrainConfig {
            hidden_width: 20,
            n_basis: 20,
            iterations: 20_000,
            lr: real::<T>(1e-3),
            boundary_factor: BoundaryFactor::XTimesXMinus1,
            nu,
            c,
            tau: None,
        }
    }
}

/// Run full-batch Adam from a seeded uniform init; returns the trained net
/// and the per-iteration loss curve.
pub fn train<T: Scalar>(
    set: &TrainingSet<T>,
    cfg: &TrainConfig<T>,
    seed: u64,
) -> Result<(OperatorNet<T>, Vec<T>)> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidParameter("iteration budget must be positive".into()));
    }
    let m = set.sensor_count;
    let h = cfg.hidden_width;
    let branch_widths = [m, h, h, cfg.n_basis];
    let trunk_widths = [1, h, h, cfg.n_basis];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = OperatorNet {
        branch: Mlp::init_uniform(&branch_widths, &mut rng)?,
        trunk: Mlp::init_uniform(&trunk_widths, &mut rng)?,
        b0: T::zero(),
        boundary_factor: cfg.boundary_factor,
        meta: NetMetadata {
            nu: cfg.nu,
            c: cfg.c,
            n_cells: m - 1,
            tau: cfg.tau,
            seed,
            iterations: cfg.iterations,
            final_loss: T::zero(),
            reference_norm: set.mean_input_norm,
            normalize_inputs: false,
            symmetrize: false,
        },
    };

    let mut params = net.flatten();
    let mut state = AdamState::new(params.len(), cfg.lr);
    let mut losses = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let (grads, loss_value) = grad(&net, set)?;
        if !loss_value.is_finite() {
            return Err(Error::TrainingFailure(format!(
                "loss became non-finite at iteration {it}"
            )));
        }
        losses.push(loss_value);
        let gflat = grads.flatten();
        adam_step(&mut params, &gflat, &mut state)?;
        net.unflatten(&params)?;
    }
    net.meta.final_loss = loss(&net, set)?;
    Ok((net, losses))
}
