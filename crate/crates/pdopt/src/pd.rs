//! The primal-dual iteration for tracking-type control problems
//!
//!   min over u in [a,b]:  1/2 ||S u + y_f - y_d||^2 + alpha/2 ||u||^2 + mu ||u||_1
//!
//! together with its step-size rules, a linearized ADMM formulation that
//! produces the same control iterates, and two monitors: a Lyapunov energy
//! that must descend along the iteration, and a proximal KKT residual that
//! vanishes at the discrete minimizer.
//!
//! Each iteration costs exactly two operator applications: one adjoint for
//! the control update, one forward solve at the extrapolated control for the
//! dual update.

use crate::error::{Error, Result};
use crate::grid::{check_same_grid, norm, norm_l1, Field};
use crate::operator::SolutionOperator;
use crate::prox::{dual_update, prox_primal_box, prox_primal_l1_box};
use crate::scalar::{real, Scalar};

/// Nonsmooth part of the objective acting on the control.
#[derive(Clone, Copy, Debug)]
pub enum Regularizer<T> {
    BoxOnly { lower: T, upper: T },
    L1Box { mu: T, lower: T, upper: T },
}

impl<T: Scalar> Regularizer<T> {
    pub fn bounds(&self) -> (T, T) {
        match *self {
            Regularizer::BoxOnly { lower, upper } => (lower, upper),
            Regularizer::L1Box { lower, upper, .. } => (lower, upper),
        }
    }

    pub fn mu(&self) -> T {
        match *self {
            Regularizer::BoxOnly { .. } => T::zero(),
            Regularizer::L1Box { mu, .. } => mu,
        }
    }

    /// Control update: minimizes the regularizer plus the local quadratic
    /// model around `u_prev` with adjoint state `q`.
    pub fn apply_prox(&self, u_prev: &Field<T>, q: &Field<T>, alpha: T, r: T) -> Result<Field<T>> {
        match *self {
            Regularizer::BoxOnly { lower, upper } => {
                prox_primal_box(u_prev, q, alpha, r, lower, upper)
            }
            Regularizer::L1Box { mu, lower, upper } => {
                prox_primal_l1_box(u_prev, q, alpha, r, mu, lower, upper)
            }
        }
    }

    /// mu * weighted l1 norm of the control; zero for the plain box.
    pub fn penalty(&self, u: &Field<T>) -> T {
        match *self {
            Regularizer::BoxOnly { .. } => T::zero(),
            Regularizer::L1Box { mu, .. } => mu * norm_l1(u),
        }
    }
}

/// Reference solution a run can be scored against.
pub struct ExactSolution<T> {
    pub u: Field<T>,
    pub y: Option<Field<T>>,
    pub lambda: Option<Field<T>>,
}

pub struct ProblemInstance<T: Scalar> {
    pub op: SolutionOperator<T>,
    pub y_d: Field<T>,
    pub alpha: T,
    pub reg: Regularizer<T>,
    pub exact: Option<ExactSolution<T>>,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn new(
        op: SolutionOperator<T>,
        y_d: Field<T>,
        alpha: T,
        reg: Regularizer<T>,
    ) -> Result<Self> {
        if y_d.grid() != op.grid() {
            return Err(Error::GridMismatch {
                expected: format!("{:?}", op.grid()),
                got: format!("{:?}", y_d.grid()),
            });
        }
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        let (a, b) = reg.bounds();
        if !(a <= b) {
            return Err(Error::InvalidParameter(format!("box bounds need a <= b, got [{a}, {b}]")));
        }
        Ok(Self { op, y_d, alpha, reg, exact: None })
    }

    pub fn with_exact(mut self, exact: ExactSolution<T>) -> Result<Self> {
        check_same_grid(&self.y_d, &exact.u)?;
        if let Some(y) = &exact.y {
            check_same_grid(&self.y_d, y)?;
        }
        if let Some(l) = &exact.lambda {
            check_same_grid(&self.y_d, l)?;
        }
        self.exact = Some(exact);
        Ok(self)
    }

    /// 1/2 ||y - y_d||^2 + alpha/2 ||u||^2 + regularizer penalty.
    pub fn objective(&self, u: &Field<T>, y: &Field<T>) -> Result<T> {
        check_same_grid(u, &self.y_d)?;
        check_same_grid(y, &self.y_d)?;
        let half = real::<T>(0.5);
        let misfit = norm(&y.sub(&self.y_d)?);
        let size = norm(u);
        Ok(half * misfit * misfit + half * self.alpha * size * size + self.reg.penalty(u))
    }
}

/// How the step sizes r (primal) and s (dual) are chosen and evolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepRule {
    /// Fixed steps under r*s < 1 / ||S||^2.
    Classic,
    /// Fixed steps under the larger bound r*s < (4 + 2*alpha*r) / (3 ||S||^2)
    /// that exploits the alpha-strong convexity of the smooth part.
    Enlarged,
    /// Every `period` iterations: tau = 1/sqrt(1+s), r /= tau, s *= tau.
    /// The product r*s is invariant, so validity against the enlarged bound
    /// is inherited from the initial pair.
    Adaptive { period: usize },
}

/// Largest admissible r*s for the given rule at operator norm `op_norm`.
/// The adaptive rule shares the enlarged bound: its updates keep r*s fixed
/// while the bound grows with r, so initial validity is preserved.
pub fn step_size_bound<T: Scalar>(rule: StepRule, r: T, alpha: T, op_norm: T) -> Result<T> {
    if !(op_norm > T::zero()) || !op_norm.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "operator norm must be positive and finite, got {op_norm}"
        )));
    }
    let norm_sq = op_norm * op_norm;
    Ok(match rule {
        StepRule::Classic => T::one() / norm_sq,
        StepRule::Enlarged | StepRule::Adaptive { .. } => {
            (real::<T>(4.0) + real::<T>(2.0) * alpha * r) / (real::<T>(3.0) * norm_sq)
        }
    })
}

/// Strict check r*s < bound. Sitting exactly on the bound fails: the
/// convergence theory needs the strict inequality, even though such runs
/// tend to work in practice (the solver only warns, it does not refuse).
pub fn validate_step_sizes<T: Scalar>(r: T, s: T, rule: StepRule, alpha: T, op_norm: T) -> bool {
    match step_size_bound(rule, r, alpha, op_norm) {
        Ok(bound) => r * s < bound,
        Err(_) => false,
    }
}

/// One adaptive rebalancing of the step pair; returns (r, s, tau).
pub fn apd_update<T: Scalar>(r: T, s: T) -> (T, T, T) {
    let tau = T::one() / (T::one() + s).sqrt();
    (r / tau, s * tau, tau)
}

/// Result of a single iteration. `y_bar` is the forward solve at the
/// extrapolated control 2*u - u_prev including the affine offset; the caller
/// reuses it for the dual update it already absorbed and, at the end of a
/// run, for reporting the state and objective.
pub struct PdIterate<T> {
    pub u: Field<T>,
    pub p: Field<T>,
    pub y_bar: Field<T>,
}

pub fn pd_step<T: Scalar>(
    inst: &ProblemInstance<T>,
    u_prev: &Field<T>,
    p_prev: &Field<T>,
    r: T,
    s: T,
) -> Result<PdIterate<T>> {
    let u = {
        let q = inst.op.apply_adjoint(p_prev)?;
        inst.reg.apply_prox(u_prev, &q, inst.alpha, r)?
    };
    let y_bar = {
        let mut u_bar = u.clone();
        u_bar.scale(real::<T>(2.0));
        let u_bar = u_bar.add_scaled(-T::one(), u_prev)?;
        inst.op.apply_affine(&u_bar)?
    };
    let p = dual_update(p_prev, &y_bar, &inst.y_d, s)?;
    Ok(PdIterate { u, p, y_bar })
}

/// ||new - old|| / max(1, ||old||) in the weighted norm.
pub fn relative_change<T: Scalar>(new: &Field<T>, old: &Field<T>) -> Result<T> {
    let diff = norm(&new.sub(old)?);
    Ok(diff / T::one().max(norm(old)))
}

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig<T> {
    pub r: T,
    pub s: T,
    pub rule: StepRule,
    /// Stop when max of the relative control and dual changes drops below.
    pub tol: T,
    pub max_iter: usize,
    /// Print a progress line to stderr every this many iterations; 0 = quiet.
    pub log_every: usize,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(r: T, s: T, rule: StepRule) -> Self {
        Self { r, s, rule, tol: real::<T>(1e-5), max_iter: 100_000, log_every: 0 }
    }
}

pub struct SolveReport<T> {
    pub u: Field<T>,
    pub p: Field<T>,
    /// State from the last dual update, S(2u_K - u_{K-1}) + y_f. At the
    /// stopping tolerance this differs from S u_K + y_f by less than the
    /// tolerance itself, so no extra solve is spent on reporting.
    pub y: Field<T>,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: T,
    pub objective: T,
    /// Forward plus adjoint applications consumed by this run; exactly
    /// 2 * iterations when the operator counts its solves.
    pub pde_solves: usize,
    pub r_final: T,
    pub s_final: T,
    pub warnings: Vec<String>,
    pub residual_history: Vec<T>,
}

pub fn solve<T: Scalar>(inst: &ProblemInstance<T>, cfg: &SolverConfig<T>) -> Result<SolveReport<T>> {
    if !(cfg.r > T::zero()) || !(cfg.s > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "step sizes must be positive, got r={}, s={}",
            cfg.r, cfg.s
        )));
    }
    if !(cfg.tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {}", cfg.tol)));
    }
    if cfg.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    if let StepRule::Adaptive { period } = cfg.rule {
        if period == 0 {
            return Err(Error::InvalidParameter("adaptive period must be at least 1".into()));
        }
    }

    let mut warnings = Vec::new();
    match inst.op.norm_estimate() {
        Some(op_norm) => {
            if !validate_step_sizes(cfg.r, cfg.s, cfg.rule, inst.alpha, op_norm) {
                let bound = step_size_bound(cfg.rule, cfg.r, inst.alpha, op_norm)?;
                warnings.push(format!(
                    "step product r*s = {} does not sit strictly below the stability bound {} \
                     (operator norm {}); proceeding anyway",
                    cfg.r * cfg.s,
                    bound,
                    op_norm
                ));
            }
        }
        None => warnings.push("operator norm unknown; step sizes not validated".into()),
    }

    let grid = inst.op.grid();
    let mut u = Field::zeros(grid);
    let mut p = Field::zeros(grid);
    let mut r = cfg.r;
    let mut s = cfg.s;
    let solves_before = inst.op.pde_solves();
    let mut residual_history = Vec::new();
    let mut converged = false;
    let mut final_residual = T::infinity();
    let mut y_last: Option<Field<T>> = None;
    let mut iterations = 0;

    for k in 1..=cfg.max_iter {
        let it = pd_step(inst, &u, &p, r, s)?;
        let res = relative_change(&it.u, &u)?.max(relative_change(&it.p, &p)?);
        u = it.u;
        p = it.p;
        y_last = Some(it.y_bar);
        residual_history.push(res);
        iterations = k;
        final_residual = res;
        if cfg.log_every > 0 && k % cfg.log_every == 0 {
            eprintln!("iter {k:>6}  residual {res:.3e}  r {r:.6e}  s {s:.6e}");
        }
        if res <= cfg.tol {
            converged = true;
            break;
        }
        if let StepRule::Adaptive { period } = cfg.rule {
            if k % period == 0 {
                let (r2, s2, _) = apd_update(r, s);
                r = r2;
                s = s2;
            }
        }
    }

    if !converged {
        warnings.push(format!(
            "no convergence within {} iterations (residual {final_residual:.3e})",
            cfg.max_iter
        ));
    }

    let y = y_last.expect("max_iter >= 1 guarantees at least one iterate");
    let objective = inst.objective(&u, &y)?;
    Ok(SolveReport {
        u,
        p,
        y,
        iterations,
        converged,
        final_residual,
        objective,
        pde_solves: inst.op.pde_solves() - solves_before,
        r_final: r,
        s_final: s,
        warnings,
        residual_history,
    })
}

/// Absolute and relative errors of a run against a reference solution.
#[derive(Clone, Copy, Debug)]
pub struct ErrorReport<T> {
    pub err_u_abs: T,
    pub err_u_rel: T,
    pub err_y_abs: Option<T>,
    pub err_y_rel: Option<T>,
}

pub fn errors_against<T: Scalar>(
    exact: &ExactSolution<T>,
    u: &Field<T>,
    y: &Field<T>,
) -> Result<ErrorReport<T>> {
    fn pair<T: Scalar>(approx: &Field<T>, truth: &Field<T>) -> Result<(T, T)> {
        let abs = norm(&approx.sub(truth)?);
        let denom = norm(truth);
        let rel = if denom > T::zero() { abs / denom } else { abs };
        Ok((abs, rel))
    }
    let (err_u_abs, err_u_rel) = pair(u, &exact.u)?;
    let (err_y_abs, err_y_rel) = match &exact.y {
        Some(y_star) => {
            let (a, r) = pair(y, y_star)?;
            (Some(a), Some(r))
        }
        None => (None, None),
    };
    Ok(ErrorReport { err_u_abs, err_u_rel, err_y_abs, err_y_rel })
}

/// Fraction of nodes where |u| exceeds `threshold`.
pub fn nonzero_fraction<T: Scalar>(u: &Field<T>, threshold: T) -> f64 {
    let hits = u.as_slice().iter().filter(|v| v.abs() > threshold).count();
    hits as f64 / u.len() as f64
}

/// State of the linearized ADMM formulation. `forward` caches S u + y_f for
/// the current control so each step costs one adjoint and one forward solve,
/// the same budget as the primal-dual step.
pub struct AdmmState<T> {
    pub u: Field<T>,
    pub y: Field<T>,
    pub lambda: Field<T>,
    forward: Field<T>,
}

impl<T: Scalar> AdmmState<T> {
    pub fn forward(&self) -> &Field<T> {
        &self.forward
    }
}

/// Cold start matching the zero-initialized primal-dual run: u = 0 and
/// lambda = s (y_d - y_f), which makes the first effective multiplier
/// lambda + s (S u - y) vanish, exactly like p = 0.
pub fn admm_initial_state<T: Scalar>(inst: &ProblemInstance<T>, s: T) -> Result<AdmmState<T>> {
    if !(s > T::zero()) {
        return Err(Error::InvalidParameter(format!("s must be > 0, got {s}")));
    }
    let forward = inst.op.offset().clone();
    let mut lambda = inst.y_d.sub(&forward)?;
    lambda.scale(s);
    Ok(AdmmState {
        u: Field::zeros(inst.op.grid()),
        y: Field::zeros(inst.op.grid()),
        lambda,
        forward,
    })
}

/// One sweep of the linearized ADMM: state update in closed form, control
/// update through the same prox as the primal-dual step, multiplier ascent.
pub fn admm_step<T: Scalar>(
    inst: &ProblemInstance<T>,
    state: &AdmmState<T>,
    r: T,
    s: T,
) -> Result<AdmmState<T>> {
    let one = T::one();
    // y = (y_d + s (S u + y_f) + lambda) / (1 + s)
    let mut y = inst.y_d.add_scaled(s, &state.forward)?.add_scaled(one, &state.lambda)?;
    y.scale(one / (one + s));
    // effective multiplier at the old control
    let p_tilde = state.lambda.add_scaled(s, &state.forward.sub(&y)?)?;
    let q = inst.op.apply_adjoint(&p_tilde)?;
    let u = inst.reg.apply_prox(&state.u, &q, inst.alpha, r)?;
    let forward = inst.op.apply_affine(&u)?;
    let lambda = state.lambda.add_scaled(s, &forward.sub(&y)?)?;
    Ok(AdmmState { u, y, lambda, forward })
}

/// Lyapunov energy of the iteration evaluated at (u, lambda) with previous
/// control u_prev, measured against the discrete saddle point (u*, lambda*):
///
///   E = (1/r + alpha)||u - u*||^2 + (1/s)||lambda - lambda*||^2
///     + 1/2 [ (1/r)||du||^2 - 3s/(4+2 alpha r) ||S du||^2 ]
///     + sigma/8 ||S du||^2,   sigma = s (2 + 4 alpha r) / (2 + alpha r),
///
/// with du = u - u_prev. Strictly inside the enlarged step bound the middle
/// bracket is a positive quadratic form and E decreases every iteration.
/// Costs one forward solve for S du.
pub fn lyapunov_energy<T: Scalar>(
    inst: &ProblemInstance<T>,
    u: &Field<T>,
    u_prev: &Field<T>,
    lambda: &Field<T>,
    u_star: &Field<T>,
    lambda_star: &Field<T>,
    r: T,
    s: T,
) -> Result<T> {
    let du = u.sub(u_prev)?;
    let s_du = inst.op.apply_linear(&du)?;
    let one = T::one();
    let two = real::<T>(2.0);
    let four = real::<T>(4.0);
    let ar = inst.alpha * r;
    let sigma = s * (two + four * ar) / (two + ar);

    let eu = norm(&u.sub(u_star)?);
    let el = norm(&lambda.sub(lambda_star)?);
    let edu = norm(&du);
    let esdu = norm(&s_du);

    let quad = (one / r) * edu * edu - real::<T>(3.0) * s / (four + two * ar) * esdu * esdu;
    Ok((one / r + inst.alpha) * eu * eu
        + (one / s) * el * el
        + quad / two
        + sigma / real::<T>(8.0) * esdu * esdu)
}

/// Proximal KKT residual at unit step: with lambda(u) = S u + y_f - y_d,
///
///   rho(u) = || u - prox(u, S* lambda(u); r = 1) ||,
///
/// which is zero exactly at the discrete minimizer. Costs one forward and
/// one adjoint solve.
pub fn kkt_residual<T: Scalar>(inst: &ProblemInstance<T>, u: &Field<T>) -> Result<T> {
    let lambda = inst.op.apply_affine(u)?.sub(&inst.y_d)?;
    let q = inst.op.apply_adjoint(&lambda)?;
    let fixed = inst.reg.apply_prox(u, &q, inst.alpha, T::one())?;
    Ok(norm(&u.sub(&fixed)?))
}
