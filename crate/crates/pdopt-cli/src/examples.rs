//! The four benchmark problems: manufactured exact solutions, default
//! parameter presets, and the surrogate training recipes that go with the
//! two 1D problems.
//!
//! Examples 1 and 4 are parabolic (heat equation driven by the control),
//! examples 2 and 3 stationary. All four live on the unit square / unit
//! interval with T = 1; every exact solution is built so that the clamped
//! control, the state, and the misfit target satisfy the optimality system
//! in closed form, which is what the iteration-count and error gates in the
//! acceptance suite compare against.

use std::f64::consts::PI;
use std::path::PathBuf;

use pdopt::pd::ErrorReport;
use pdopt::{
    as_solution_operator, errors_against, estimate_operator_norm, fidelity_check,
    generate_dataset, load_net, make_elliptic_operator, make_parabolic_operator,
    march_fidelity_check, nonzero_fraction, parabolic_surrogate_operator, EllipticProblem, Error,
    ExactSolution, Field, FidelityReport, Grid, OperatorNet, ProblemInstance, Regularizer, Result,
    SolverConfig, StepRule, TrainConfig,
};

/// Control values with magnitude above this count as nonzero in the
/// sparsity fraction reported for example 2.
pub const NOZ_THRESHOLD: f64 = 1e-8;

/// Mean relative error a stationary surrogate must stay under to be
/// deployed in place of the exact solve.
pub const STATIONARY_FIDELITY_GATE: f64 = 5e-2;

/// Same gate for the time-marching surrogate; the march compounds the
/// per-stage error, hence the looser bar.
pub const MARCH_FIDELITY_GATE: f64 = 1e-1;

/// Spatial/temporal resolution of the norm probe for the 2D parabolic
/// operator. The top singular value is carried by the smoothest mode, so it
/// converges long before the meshes the benchmark actually runs on; probing
/// at the run mesh would cost a full 2D march per power step for nothing.
const NORM_PROBE_2D: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Fixed steps under the classic product bound.
    PdC,
    /// Fixed steps under the enlarged bound.
    PdI,
    /// Enlarged bound with the step pair rebalanced periodically; the
    /// payload is the rebalancing period.
    Apd(usize),
    /// Enlarged bound, PDE solves replaced by a trained network.
    PdOnet,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::PdC => "PD-C".into(),
            Method::PdI => "PD-I".into(),
            Method::Apd(m) => format!("APD{m}"),
            Method::PdOnet => "PD-ONet".into(),
        }
    }

    pub fn parse(text: &str) -> Result<Method> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("pd-c") {
            return Ok(Method::PdC);
        }
        if t.eq_ignore_ascii_case("pd-i") {
            return Ok(Method::PdI);
        }
        if t.eq_ignore_ascii_case("pd-onet") {
            return Ok(Method::PdOnet);
        }
        if let Some(digits) = t.strip_prefix("APD").or_else(|| t.strip_prefix("apd")) {
            let m: usize = digits
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad APD period in '{text}'")))?;
            if m == 0 {
                return Err(Error::InvalidParameter("APD period must be at least 1".into()));
            }
            return Ok(Method::Apd(m));
        }
        Err(Error::InvalidParameter(format!(
            "unknown method '{text}' (expected PD-C, PD-I, APD<m>, or PD-ONet)"
        )))
    }

    pub fn rule(&self) -> StepRule {
        match self {
            Method::PdC => StepRule::Classic,
            Method::PdI | Method::PdOnet => StepRule::Enlarged,
            Method::Apd(m) => StepRule::Adaptive { period: *m },
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::parse(s)
    }
}

/// Everything one benchmark run needs. `new` fills the documented defaults
/// for the chosen example; individual fields may be overridden afterwards
/// (config file keys and CLI flags map onto them one to one).
#[derive(Clone, Debug)]
pub struct ExampleSpec {
    pub example: u8,
    pub method: Method,
    pub alpha: f64,
    /// l1 weight; only example 2 has a sparse term, elsewhere it stays 0.
    pub mu: f64,
    pub lower: f64,
    pub upper: f64,
    /// Spatial cells per axis, h = 1/n.
    pub n: usize,
    /// Time steps, tau = 1/nt; ignored by the stationary examples.
    pub nt: usize,
    pub k_s: f64,
    pub k_a: f64,
    pub r: f64,
    pub s: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub log_every: usize,
    pub seed: u64,
    /// Trained network file; required by PD-ONet, unused otherwise.
    pub model: Option<PathBuf>,
}

/// Default step pairs per example and method. Examples 1 and 2 switch
/// presets when alpha drops below 1e-4: with nearly no Tikhonov term the
/// enlarged bound shrinks toward the classic one and the wide dual step
/// stops paying off.
pub fn default_steps(example: u8, method: Method, alpha: f64) -> (f64, f64) {
    match example {
        3 => (2e3, 0.4),
        4 => (8e2, 0.4),
        _ if alpha >= 1e-4 => match method {
            Method::PdC => (4e3, 0.1),
            Method::PdI | Method::PdOnet => (4e3, 0.4),
            Method::Apd(_) => (1e3, 0.4),
        },
        _ => match method {
            Method::PdC => (4e3, 0.1),
            Method::PdI | Method::PdOnet => (5.6e3, 0.1),
            Method::Apd(_) => (4e3, 0.1),
        },
    }
}

impl ExampleSpec {
    pub fn new(example: u8, method: Method) -> Result<Self> {
        let (lower, upper) = match example {
            1 | 3 => (-0.5, 0.5),
            2 => (-30.0, 30.0),
            4 => (-100.0, 100.0),
            id => {
                return Err(Error::InvalidParameter(format!("example must be 1..=4, got {id}")))
            }
        };
        let alpha = 1e-3;
        let (r, s) = default_steps(example, method, alpha);
        // Training seeds were picked by validation: accuracy on the low sine
        // modes (the directions every deployed run drives the net along) and
        // the random-field gate, never on the benchmark targets themselves.
        let (k_s, k_a, seed) = match example {
            3 => (0.2, 1.0, 1),
            4 => (0.3, 500.0, 0),
            _ => (0.0, 0.0, 0),
        };
        Ok(Self {
            example,
            method,
            alpha,
            mu: if example == 2 { 5e-3 } else { 0.0 },
            lower,
            upper,
            n: 64,
            nt: 64,
            k_s,
            k_a,
            r,
            s,
            tol: 1e-5,
            max_iter: 1000,
            log_every: 0,
            seed,
            model: None,
        })
    }

    /// Change alpha and re-derive the step preset; direct field writes keep
    /// whatever (r, s) is already there.
    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
        let (r, s) = default_steps(self.example, self.method, alpha);
        self.r = r;
        self.s = s;
    }

    pub fn is_transient(&self) -> bool {
        matches!(self.example, 1 | 4)
    }

    pub fn mesh_h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn mesh_tau(&self) -> Option<f64> {
        self.is_transient().then(|| 1.0 / self.nt as f64)
    }

    pub fn solver_config(&self) -> SolverConfig<f64> {
        SolverConfig {
            r: self.r,
            s: self.s,
            rule: self.method.rule(),
            tol: self.tol,
            max_iter: self.max_iter,
            log_every: self.log_every,
        }
    }
}

/// Largest singular value of a zero-source forward map, by power iteration.
/// The stationary kernels know their norm in closed form; the marching ones
/// do not, so the solver's step validation needs this probe.
fn probed_parabolic_norm(dim: u8, n: usize, nt: usize) -> Result<f64> {
    let grid = Grid::transient(dim, n, nt)?;
    let mut op = make_parabolic_operator(
        grid,
        EllipticProblem::new(1.0, 0.0)?,
        &Field::zeros(grid),
        &Field::zeros(grid.spatial_grid()),
    )?;
    Ok(estimate_operator_norm(&mut op, 1e-6, 500)?.value)
}

/// 2D heat control on the unit square: state target is the first product
/// mode decaying linearly in time, the control clamps the second mode.
fn build_example1(spec: &ExampleSpec) -> Result<ProblemInstance<f64>> {
    let (a, b) = (spec.lower, spec.upper);
    let alpha = spec.alpha;
    let grid = Grid::transient(2, spec.n, spec.nt)?;
    let mode1 = |x1: f64, x2: f64| (PI * x1).sin() * (PI * x2).sin();
    let mode2 = |x1: f64, x2: f64| (2.0 * PI * x1).sin() * (2.0 * PI * x2).sin();

    let u_star = Field::sample(grid, |x1: f64, x2, t| (-(1.0 - t) * mode2(x1, x2)).clamp(a, b));
    let y_star = Field::sample(grid, |x1: f64, x2, t| (1.0 - t) * mode1(x1, x2));
    let lam_star = Field::sample(grid, |x1: f64, x2, t| {
        alpha * (1.0 + 8.0 * PI * PI * (1.0 - t)) * mode2(x1, x2)
    });
    let y_d = y_star.sub(&lam_star)?;
    // f = dy*/dt - lap y* - u*, so that the forward solve at u* lands on y*.
    let f = Field::sample(grid, |x1: f64, x2, t| {
        (2.0 * PI * PI * (1.0 - t) - 1.0) * mode1(x1, x2)
            - (-(1.0 - t) * mode2(x1, x2)).clamp(a, b)
    });
    let phi = Field::sample(grid.spatial_grid(), |x1: f64, x2, _| mode1(x1, x2));

    let mut op = make_parabolic_operator(grid, EllipticProblem::new(1.0, 0.0)?, &f, &phi)?;
    op.set_norm_estimate(probed_parabolic_norm(2, NORM_PROBE_2D, NORM_PROBE_2D)?);
    ProblemInstance::new(op, y_d, alpha, Regularizer::BoxOnly { lower: a, upper: b })?
        .with_exact(ExactSolution { u: u_star, y: Some(y_star), lambda: Some(lam_star) })
}

/// Poisson control with an l1 term on top of the box; the target is an
/// oscillatory bump with no closed-form optimum, so no exact fields here.
fn build_example2(spec: &ExampleSpec) -> Result<ProblemInstance<f64>> {
    let grid = Grid::stationary(2, spec.n)?;
    let op = make_elliptic_operator(grid, EllipticProblem::new(1.0, 0.0)?, None)?;
    let y_d = Field::sample(grid, |x1: f64, x2, _| {
        (2.0 * x1).exp() / 6.0 * (2.0 * PI * x1).sin() * (2.0 * PI * x2).sin()
    });
    ProblemInstance::new(
        op,
        y_d,
        spec.alpha,
        Regularizer::L1Box { mu: spec.mu, lower: spec.lower, upper: spec.upper },
    )
}

/// 1D reaction-diffusion control, -y'' + y = u + f. The (k_s, k_a) pair
/// scales the state and control targets independently, so one trained
/// surrogate serves the whole family.
fn build_example3(spec: &ExampleSpec, net: Option<&OperatorNet<f64>>) -> Result<ProblemInstance<f64>> {
    let (a, b) = (spec.lower, spec.upper);
    let (alpha, ks, ka) = (spec.alpha, spec.k_s, spec.k_a);
    let grid = Grid::stationary(1, spec.n)?;

    let u_star = Field::sample(grid, |x: f64, _, _| (-ka * (2.0 * PI * x).sin()).clamp(a, b));
    let y_star = Field::sample(grid, |x: f64, _, _| ks * (PI * x).sin());
    let lam_star = Field::sample(grid, |x: f64, _, _| {
        alpha * ka * (4.0 * PI * PI + 1.0) * (2.0 * PI * x).sin()
    });
    let y_d = y_star.sub(&lam_star)?;
    let f = Field::sample(grid, |x: f64, _, _| {
        (PI * PI + 1.0) * ks * (PI * x).sin() - (-ka * (2.0 * PI * x).sin()).clamp(a, b)
    });

    let op = match net {
        Some(net) => as_solution_operator(net, grid, Some(&f))?,
        None => make_elliptic_operator(grid, EllipticProblem::new(1.0, 1.0)?, Some(&f))?,
    };
    ProblemInstance::new(op, y_d, alpha, Regularizer::BoxOnly { lower: a, upper: b })?
        .with_exact(ExactSolution { u: u_star, y: Some(y_star), lambda: Some(lam_star) })
}

/// 1D heat control with an exponentially growing state target and a very
/// wide box; the surrogate path replaces every stage of the march.
fn build_example4(spec: &ExampleSpec, net: Option<&OperatorNet<f64>>) -> Result<ProblemInstance<f64>> {
    let (a, b) = (spec.lower, spec.upper);
    let (alpha, ks, ka) = (spec.alpha, spec.k_s, spec.k_a);
    let grid = Grid::transient(1, spec.n, spec.nt)?;

    let u_star =
        Field::sample(grid, |x: f64, _, t| (-ka * (1.0 - t) * (2.0 * PI * x).sin()).clamp(a, b));
    let y_star = Field::sample(grid, |x: f64, _, t| ks * (t.exp() - 1.0) * (PI * x).sin());
    let lam_star = Field::sample(grid, |x: f64, _, t| {
        alpha * ka * (1.0 + 4.0 * PI * PI * (1.0 - t)) * (2.0 * PI * x).sin()
    });
    let y_d = y_star.sub(&lam_star)?;
    let f = Field::sample(grid, |x: f64, _, t| {
        ks * (t.exp() + PI * PI * (t.exp() - 1.0)) * (PI * x).sin()
            - (-ka * (1.0 - t) * (2.0 * PI * x).sin()).clamp(a, b)
    });
    let phi = Field::zeros(grid.spatial_grid());

    let norm = probed_parabolic_norm(1, spec.n, spec.nt)?;
    let mut op = match net {
        Some(net) => parabolic_surrogate_operator(net, grid, &f)?,
        None => make_parabolic_operator(grid, EllipticProblem::new(1.0, 0.0)?, &f, &phi)?,
    };
    // The surrogate stands in for the exact map, so it answers step-size
    // validation with the exact map's norm.
    op.set_norm_estimate(norm);
    ProblemInstance::new(op, y_d, alpha, Regularizer::BoxOnly { lower: a, upper: b })?
        .with_exact(ExactSolution { u: u_star, y: Some(y_star), lambda: Some(lam_star) })
}

/// Assemble the problem a spec describes, loading the network file when the
/// method calls for one.
pub fn build_example(spec: &ExampleSpec) -> Result<ProblemInstance<f64>> {
    let net = if spec.method == Method::PdOnet {
        if !matches!(spec.example, 3 | 4) {
            return Err(Error::InvalidParameter(format!(
                "PD-ONet is only wired up for examples 3 and 4, not {}",
                spec.example
            )));
        }
        match &spec.model {
            Some(path) => Some(load_net::<f64>(path)?),
            None => {
                return Err(Error::InvalidParameter(
                    "PD-ONet needs a trained model file (set `model`)".into(),
                ))
            }
        }
    } else {
        None
    };
    build_example_with(spec, net.as_ref())
}

/// Same as [`build_example`] but with the network handed over directly,
/// for callers that just trained one and have no reason to touch disk.
pub fn build_example_with(
    spec: &ExampleSpec,
    net: Option<&OperatorNet<f64>>,
) -> Result<ProblemInstance<f64>> {
    if spec.method == Method::PdOnet && net.is_none() {
        return Err(Error::InvalidParameter(
            "PD-ONet needs a trained model file (set `model`)".into(),
        ));
    }
    let net = if spec.method == Method::PdOnet { net } else { None };
    match spec.example {
        1 => build_example1(spec),
        2 => build_example2(spec),
        3 => build_example3(spec, net),
        4 => build_example4(spec, net),
        id => Err(Error::InvalidParameter(format!("example must be 1..=4, got {id}"))),
    }
}

/// Absolute and relative distances of a run's control and state from the
/// exact pair.
pub fn compute_errors(
    u: &Field<f64>,
    y: &Field<f64>,
    exact: &ExactSolution<f64>,
) -> Result<ErrorReport<f64>> {
    errors_against(exact, u, y)
}

/// Fraction of nodes carrying a nonzero control.
pub fn noz(u: &Field<f64>, threshold: f64) -> f64 {
    nonzero_fraction(u, threshold)
}

/// Training recipe for the two surrogate-backed examples. Example 3 learns
/// the stationary solve itself; example 4 learns one backward Euler stage,
/// which the march then applies nt times.
#[derive(Clone, Copy, Debug)]
pub struct TrainSpec {
    pub example: u8,
    pub n: usize,
    pub nt: usize,
    pub n_inputs: usize,
    pub n_eval: usize,
    pub iterations: usize,
    pub lr: f64,
    pub seed: u64,
}

impl TrainSpec {
    pub fn new(example: u8) -> Result<Self> {
        if !matches!(example, 3 | 4) {
            return Err(Error::InvalidParameter(format!(
                "no surrogate recipe for example {example}; PD-ONet covers examples 3 and 4"
            )));
        }
        Ok(Self {
            example,
            n: 64,
            nt: 64,
            n_inputs: 1000,
            n_eval: 65,
            iterations: 20_000,
            lr: 1e-3,
            // Validation-selected, see ExampleSpec::new.
            seed: if example == 3 { 1 } else { 0 },
        })
    }

    /// The stationary problem whose solve the network has to learn, plus
    /// the stage length recorded on example-4 nets.
    fn target(&self) -> Result<(EllipticProblem<f64>, Option<f64>)> {
        match self.example {
            3 => Ok((EllipticProblem::new(1.0, 1.0)?, None)),
            4 => {
                let tau = 1.0 / self.nt as f64;
                // One backward Euler stage of dy/dt - y'' = g reads
                // -tau y'' + y = tau g + previous level.
                Ok((EllipticProblem::new(tau, 1.0)?, Some(tau)))
            }
            id => Err(Error::InvalidParameter(format!("no surrogate recipe for example {id}"))),
        }
    }
}

/// Draw the dataset, fit the network, and switch on the deployment knobs.
/// Returns the net together with the full loss history.
pub fn train_surrogate(spec: &TrainSpec) -> Result<(OperatorNet<f64>, Vec<f64>)> {
    let (prob, tau) = spec.target()?;
    let grid = Grid::stationary(1, spec.n)?;
    let op = make_elliptic_operator(grid, prob, None)?;
    let set = generate_dataset(&op, spec.n_inputs, spec.n_eval, spec.seed)?;
    let mut cfg = TrainConfig::new(prob.nu, prob.c);
    cfg.iterations = spec.iterations;
    cfg.lr = spec.lr;
    cfg.tau = tau;
    let (mut net, history) = pdopt::train(&set, &cfg, spec.seed.wrapping_add(1))?;
    // The target map is linear and commutes with reflecting the interval,
    // so rescaling inputs to the training magnitude is exact and guards
    // against out-of-distribution sources, and averaging the prediction
    // over those symmetries cancels the error components of the wrong
    // parity, which a tanh net cannot avoid carrying.
    net.set_input_normalization(true);
    net.set_symmetrization(true);
    Ok((net, history))
}

/// Measure a trained net against the exact solver it replaces, in exactly
/// the configuration it will be deployed in. Stationary nets are compared
/// solve by solve, stage nets through the full march.
pub fn surrogate_gate(
    net: &OperatorNet<f64>,
    draws: usize,
    seed: u64,
    threshold: Option<f64>,
) -> Result<FidelityReport<f64>> {
    let meta = net.meta;
    let n = meta.n_cells;
    match meta.tau {
        None => {
            let grid = Grid::stationary(1, n)?;
            let exact = make_elliptic_operator(grid, EllipticProblem::new(meta.nu, meta.c)?, None)?;
            let surr = as_solution_operator(net, grid, None)?;
            fidelity_check(&surr, &exact, draws, seed, threshold.unwrap_or(STATIONARY_FIDELITY_GATE))
        }
        Some(tau) => {
            // Undo the stage discretization to recover the time-dependent
            // problem: stage nu = tau * nu_pde, stage c = 1 + tau * c_pde,
            // and the horizon is fixed at T = 1.
            let nt = (1.0 / tau).round() as usize;
            let nu_pde = meta.nu / tau;
            let c_pde = (meta.c - 1.0) / tau;
            let grid = Grid::transient(1, n, nt)?;
            let exact = make_parabolic_operator(
                grid,
                EllipticProblem::new(nu_pde, c_pde)?,
                &Field::zeros(grid),
                &Field::zeros(grid.spatial_grid()),
            )?;
            let surr = parabolic_surrogate_operator(net, grid, &Field::zeros(grid))?;
            march_fidelity_check(&surr, &exact, draws, seed, threshold.unwrap_or(MARCH_FIDELITY_GATE))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pdopt::{kkt_residual, norm};

    fn rel_gap(a: &Field<f64>, b: &Field<f64>) -> f64 {
        norm(&a.sub(b).unwrap()) / norm(b)
    }

    /// Forward-solving the exact control must land on the exact state up to
    /// discretization error; this catches any sign or scaling slip in the
    /// manufactured fields.
    #[test]
    fn manufactured_solutions_satisfy_their_pdes() {
        let mut s1 = ExampleSpec::new(1, Method::PdI).unwrap();
        s1.n = 16;
        s1.nt = 16;
        let inst1 = build_example(&s1).unwrap();
        let e1 = inst1.exact.as_ref().unwrap();
        let y1 = inst1.op.apply_affine(&e1.u).unwrap();
        assert!(rel_gap(&y1, e1.y.as_ref().unwrap()) < 0.15);

        let s3 = ExampleSpec::new(3, Method::PdI).unwrap();
        let inst3 = build_example(&s3).unwrap();
        let e3 = inst3.exact.as_ref().unwrap();
        let y3 = inst3.op.apply_affine(&e3.u).unwrap();
        assert!(rel_gap(&y3, e3.y.as_ref().unwrap()) < 5e-3);

        let s4 = ExampleSpec::new(4, Method::PdI).unwrap();
        let inst4 = build_example(&s4).unwrap();
        let e4 = inst4.exact.as_ref().unwrap();
        let y4 = inst4.op.apply_affine(&e4.u).unwrap();
        assert!(rel_gap(&y4, e4.y.as_ref().unwrap()) < 5e-2);
    }

    /// The exact control is a fixed point of the proximal optimality map up
    /// to discretization error.
    #[test]
    fn exact_controls_are_near_stationary() {
        let s3 = ExampleSpec::new(3, Method::PdI).unwrap();
        let inst = build_example(&s3).unwrap();
        let u = &inst.exact.as_ref().unwrap().u;
        let rho = kkt_residual(&inst, u).unwrap();
        assert!(rho < 1e-2 * (1.0 + norm(u)), "kkt residual {rho}");
    }

    #[test]
    fn exact_controls_respect_their_boxes() {
        for example in [1u8, 3, 4] {
            let spec = ExampleSpec::new(example, Method::PdC).unwrap();
            let inst = build_example(&spec).unwrap();
            let u = &inst.exact.as_ref().unwrap().u;
            let m = u.max_abs();
            assert!(m <= spec.upper + 1e-15, "example {example} control magnitude {m}");
        }
    }

    #[test]
    fn example2_has_no_exact_solution() {
        let spec = ExampleSpec::new(2, Method::PdI).unwrap();
        let inst = build_example(&spec).unwrap();
        assert!(inst.exact.is_none());
        match inst.reg {
            Regularizer::L1Box { mu, lower, upper } => {
                assert_eq!(mu, 5e-3);
                assert_eq!((lower, upper), (-30.0, 30.0));
            }
            _ => panic!("example 2 carries the l1 regularizer"),
        }
    }

    #[test]
    fn method_labels_round_trip() {
        for m in [Method::PdC, Method::PdI, Method::Apd(1), Method::Apd(5), Method::PdOnet] {
            assert_eq!(Method::parse(&m.label()).unwrap(), m);
        }
        assert!(Method::parse("APD0").is_err());
        assert!(Method::parse("newton").is_err());
    }

    #[test]
    fn alpha_switch_changes_step_preset() {
        let mut spec = ExampleSpec::new(1, Method::PdI).unwrap();
        assert_eq!((spec.r, spec.s), (4e3, 0.4));
        spec.set_alpha(1e-5);
        assert_eq!((spec.r, spec.s), (5.6e3, 0.1));
        let mut c = ExampleSpec::new(1, Method::PdC).unwrap();
        c.set_alpha(1e-5);
        assert_eq!((c.r, c.s), (4e3, 0.1));
    }

    #[test]
    fn onet_requires_model_and_supported_example() {
        let mut spec = ExampleSpec::new(3, Method::PdOnet).unwrap();
        assert!(build_example(&spec).is_err());
        spec.example = 1;
        spec.model = Some(PathBuf::from("/nonexistent/net.model"));
        assert!(build_example(&spec).is_err());
    }
}
