//! Adapters that plug a trained net into the solution-operator interface, a
//! time-stepping scheme that reuses one per-stage net across a transient
//! horizon, and the fidelity gate that must clear before a surrogate is
//! allowed anywhere near the optimizer.

use std::rc::Rc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{norm, Field, Grid};
use crate::operator::SolutionOperator;
use crate::scalar::{real, Scalar};

use super::grf::sample_grf_with;
use super::{OperatorNet, TrunkCache};

fn check_net_grid<T: Scalar>(net: &OperatorNet<T>, grid: Grid) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid("surrogates are one-dimensional".into()));
    }
    if grid.n_cells() + 1 != net.sensor_count() {
        return Err(Error::GridMismatch {
            expected: format!("grid with {} nodes", net.sensor_count()),
            got: format!("{} nodes", grid.n_cells() + 1),
        });
    }
    Ok(())
}

fn check_tau<T: Scalar>(net: &OperatorNet<T>, tau: T) -> Result<()> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidParameter("time step must be positive".into()));
    }
    if let Some(trained) = net.meta.tau {
        if (trained - tau).abs() > real::<T>(1e-12) * trained.abs().max(tau.abs()) {
            return Err(Error::InvalidParameter(format!(
                "time step {tau:e} differs from the step {trained:e} the net was trained for"
            )));
        }
    }
    Ok(())
}

/// Wrap the net as a stationary solution operator. The affine map feeds the
/// combined input u + f through the net in a single evaluation, which is the
/// composed form the surrogate stands in for; the offset (the affine map at
/// u = 0) is the net applied to f alone. The net also serves as its own
/// adjoint, mirroring the symmetry of the operator it imitates. Applications
/// are never billed as PDE solves; the spectral norm of the exact
/// counterpart is attached since the surrogate inherits it.
pub fn as_solution_operator<T: Scalar>(
    net: &OperatorNet<T>,
    grid: Grid,
    f: Option<&Field<T>>,
) -> Result<SolutionOperator<T>> {
    if grid.is_transient() {
        return Err(Error::InvalidGrid("stationary adapter got a transient grid".into()));
    }
    check_net_grid(net, grid)?;
    let cache = Rc::new(net.trunk_cache(grid.n_cells())?);
    let net = Rc::new(net.clone());

    let fwd_net = Rc::clone(&net);
    let fwd_cache = Rc::clone(&cache);
    let adj_net = Rc::clone(&net);
    let adj_cache = Rc::clone(&cache);
    let mut op = match f {
        Some(src) => {
            let offset = net.apply(src, &cache)?;
            let aff_net = Rc::clone(&net);
            let aff_cache = Rc::clone(&cache);
            let aff_src = src.clone();
            SolutionOperator::from_closures_with_affine(
                grid,
                move |v| fwd_net.apply(v, &fwd_cache),
                move |v| adj_net.apply(v, &adj_cache),
                move |v| aff_net.apply(&v.add_scaled(T::one(), &aff_src)?, &aff_cache),
                offset,
                false,
            )?
        }
        None => SolutionOperator::from_closures(
            grid,
            move |v| fwd_net.apply(v, &fwd_cache),
            move |v| adj_net.apply(v, &adj_cache),
            Field::zeros(grid),
            false,
        )?,
    };

    let n = grid.n_cells() as f64;
    let mu_min = 4.0 * n * n * (std::f64::consts::PI / (2.0 * n)).sin().powi(2);
    let denom = net.meta.nu * real::<T>(mu_min) + net.meta.c;
    if denom > T::zero() {
        op.set_norm_estimate(T::one() / denom);
    }
    Ok(op)
}

fn march_forward_cached<T: Scalar>(
    net: &OperatorNet<T>,
    cache: &TrunkCache<T>,
    u: &Field<T>,
    f: Option<&Field<T>>,
    tau: T,
) -> Result<Field<T>> {
    let grid = u.grid();
    let nx = grid.spatial_len();
    let mut out = Field::zeros(grid);
    let mut prev = vec![T::zero(); nx];
    let mut rhs = vec![T::zero(); nx];
    for lvl in 0..grid.n_levels() {
        let ul = u.level(lvl);
        match f {
            Some(src) => {
                let fl = src.level(lvl);
                for j in 0..nx {
                    rhs[j] = tau * (ul[j] + fl[j]) + prev[j];
                }
            }
            None => {
                for j in 0..nx {
                    rhs[j] = tau * ul[j] + prev[j];
                }
            }
        }
        net.eval_slice(&rhs, cache, out.level_mut(lvl))?;
        prev.copy_from_slice(out.level(lvl));
    }
    Ok(out)
}

fn march_adjoint_cached<T: Scalar>(
    net: &OperatorNet<T>,
    cache: &TrunkCache<T>,
    p: &Field<T>,
    tau: T,
) -> Result<Field<T>> {
    let grid = p.grid();
    let nx = grid.spatial_len();
    let mut out = Field::zeros(grid);
    let mut next = vec![T::zero(); nx];
    let mut rhs = vec![T::zero(); nx];
    for lvl in (0..grid.n_levels()).rev() {
        let pl = p.level(lvl);
        for j in 0..nx {
            rhs[j] = tau * pl[j] + next[j];
        }
        net.eval_slice(&rhs, cache, out.level_mut(lvl))?;
        next.copy_from_slice(out.level(lvl));
    }
    Ok(out)
}

fn check_march_args<T: Scalar>(
    net: &OperatorNet<T>,
    field: &Field<T>,
    tau: T,
    n_steps: usize,
) -> Result<()> {
    let grid = field.grid();
    if !grid.is_transient() {
        return Err(Error::InvalidGrid("time stepping needs a transient grid".into()));
    }
    check_net_grid(net, grid)?;
    if grid.n_time_steps() != n_steps {
        return Err(Error::InvalidParameter(format!(
            "asked for {n_steps} steps on a grid with {}",
            grid.n_time_steps()
        )));
    }
    let grid_tau = grid.tau::<T>();
    if (grid_tau - tau).abs() > real::<T>(1e-12) * grid_tau {
        return Err(Error::InvalidParameter(format!(
            "step {tau:e} does not match the grid spacing {grid_tau:e}"
        )));
    }
    check_tau(net, tau)
}

/// March the net through a backward-Euler style recursion: every level feeds
/// the previous state plus tau times the current right-hand side through the
/// same stationary net. With `f` absent this is the linear part of the map.
pub fn surrogate_parabolic_march<T: Scalar>(
    net: &OperatorNet<T>,
    u: &Field<T>,
    f: Option<&Field<T>>,
    tau: T,
    n_steps: usize,
) -> Result<Field<T>> {
    check_march_args(net, u, tau, n_steps)?;
    if let Some(src) = f {
        if src.grid() != u.grid() {
            return Err(Error::GridMismatch {
                expected: format!("{:?}", u.grid()),
                got: format!("{:?}", src.grid()),
            });
        }
    }
    let cache = net.trunk_cache(u.grid().n_cells())?;
    march_forward_cached(net, &cache, u, f, tau)
}

/// Transpose recursion of the forward march, run from the final level back
/// to the first; same net, reversed data flow.
pub fn surrogate_adjoint_march<T: Scalar>(
    net: &OperatorNet<T>,
    p: &Field<T>,
    tau: T,
    n_steps: usize,
) -> Result<Field<T>> {
    check_march_args(net, p, tau, n_steps)?;
    let cache = net.trunk_cache(p.grid().n_cells())?;
    march_adjoint_cached(net, &cache, p, tau)
}

/// Wrap the per-stage net as a transient solution operator. The affine map
/// marches the combined right-hand side tau*(u + f) level by level, which is
/// how the stage net was trained to see its input; linear and adjoint parts
/// drop the source. None of this is billed as a PDE solve.
pub fn parabolic_surrogate_operator<T: Scalar>(
    net: &OperatorNet<T>,
    grid: Grid,
    f: &Field<T>,
) -> Result<SolutionOperator<T>> {
    if !grid.is_transient() {
        return Err(Error::InvalidGrid("transient adapter needs a transient grid".into()));
    }
    check_net_grid(net, grid)?;
    if f.grid() != grid {
        return Err(Error::GridMismatch {
            expected: format!("{grid:?}"),
            got: format!("{:?}", f.grid()),
        });
    }
    let tau = grid.tau::<T>();
    check_tau(net, tau)?;
    let cache = Rc::new(net.trunk_cache(grid.n_cells())?);
    let net = Rc::new(net.clone());
    let source = Rc::new(f.clone());

    let offset = march_forward_cached(&net, &cache, &Field::zeros(grid), Some(f), tau)?;

    let lin_net = Rc::clone(&net);
    let lin_cache = Rc::clone(&cache);
    let adj_net = Rc::clone(&net);
    let adj_cache = Rc::clone(&cache);
    let aff_net = Rc::clone(&net);
    let aff_cache = Rc::clone(&cache);
    SolutionOperator::from_closures_with_affine(
        grid,
        move |u| march_forward_cached(&lin_net, &lin_cache, u, None, tau),
        move |p| march_adjoint_cached(&adj_net, &adj_cache, p, tau),
        move |u| march_forward_cached(&aff_net, &aff_cache, u, Some(&source), tau),
        offset,
        false,
    )
}

#[derive(Clone, Copy, Debug)]
pub struct FidelityReport<T> {
    pub n_draws: usize,
    pub mean_rel_err: T,
    pub max_rel_err: T,
    pub threshold: T,
    pub passed: bool,
}

fn relative_gap<T: Scalar>(approx: &Field<T>, truth: &Field<T>) -> Result<T> {
    let gap = norm(&approx.sub(truth)?);
    let den = norm(truth);
    Ok(if den > T::zero() { gap / den } else { gap })
}

/// Compare surrogate and exact operator on fresh random sources; the gate
/// passes when the mean relative error clears the threshold.
pub fn fidelity_check<T: Scalar>(
    surrogate: &SolutionOperator<T>,
    exact: &SolutionOperator<T>,
    n_draws: usize,
    seed: u64,
    threshold: T,
) -> Result<FidelityReport<T>> {
    let grid = surrogate.grid();
    if grid != exact.grid() {
        return Err(Error::GridMismatch {
            expected: format!("{:?}", exact.grid()),
            got: format!("{grid:?}"),
        });
    }
    if grid.is_transient() || n_draws == 0 {
        return Err(Error::InvalidParameter(
            "stationary fidelity check needs a stationary grid and at least one draw".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = T::zero();
    let mut worst = T::zero();
    for _ in 0..n_draws {
        let draw = sample_grf_with::<T>(&mut rng, grid.n_cells() + 1)?;
        let rel = relative_gap(&surrogate.apply_linear(&draw)?, &exact.apply_linear(&draw)?)?;
        mean = mean + rel;
        worst = worst.max(rel);
    }
    mean = mean / real::<T>(n_draws as f64);
    Ok(FidelityReport { n_draws, mean_rel_err: mean, max_rel_err: worst, threshold, passed: mean <= threshold })
}

/// Same gate for the transient adapter: random controls with an independent
/// random draw on every time level, compared against the exact march.
pub fn march_fidelity_check<T: Scalar>(
    surrogate: &SolutionOperator<T>,
    exact: &SolutionOperator<T>,
    n_controls: usize,
    seed: u64,
    threshold: T,
) -> Result<FidelityReport<T>> {
    let grid = surrogate.grid();
    if grid != exact.grid() {
        return Err(Error::GridMismatch {
            expected: format!("{:?}", exact.grid()),
            got: format!("{grid:?}"),
        });
    }
    if !grid.is_transient() || n_controls == 0 {
        return Err(Error::InvalidParameter(
            "transient fidelity check needs a transient grid and at least one control".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = T::zero();
    let mut worst = T::zero();
    for _ in 0..n_controls {
        let mut control = Field::zeros(grid);
        for lvl in 0..grid.n_levels() {
            let draw = sample_grf_with::<T>(&mut rng, grid.n_cells() + 1)?;
            control.level_mut(lvl).copy_from_slice(draw.as_slice());
        }
        let rel = relative_gap(&surrogate.apply_linear(&control)?, &exact.apply_linear(&control)?)?;
        mean = mean + rel;
        worst = worst.max(rel);
    }
    mean = mean / real::<T>(n_controls as f64);
    Ok(FidelityReport { n_draws: n_controls, mean_rel_err: mean, max_rel_err: worst, threshold, passed: mean <= threshold })
}

/// Hard stop when a gate fails; surrogates below the bar never reach the
/// optimizer.
pub fn require_fidelity<T: Scalar>(report: &FidelityReport<T>, what: &str) -> Result<()> {
    if report.passed {
        Ok(())
    } else {
        Err(Error::TrainingFailure(format!(
            "{what}: mean relative error {:.3e} exceeds the gate {:.3e} over {} draws",
            report.mean_rel_err, report.threshold, report.n_draws
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onet::mlp::Mlp;
    use crate::onet::{BoundaryFactor, NetMetadata};
    use crate::operator::{make_elliptic_operator, make_parabolic_operator};
    use crate::sparse::EllipticProblem;

    fn random_net(n_cells: usize, seed: u64) -> OperatorNet<f64> {
        let m = n_cells + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        OperatorNet {
            branch: Mlp::init_uniform(&[m, 6, 4], &mut rng).unwrap(),
            trunk: Mlp::init_uniform(&[1, 6, 4], &mut rng).unwrap(),
            b0: 0.05,
            boundary_factor: BoundaryFactor::XTimesXMinus1,
            meta: NetMetadata {
                nu: 1.0,
                c: 1.0,
                n_cells,
                tau: None,
                seed,
                iterations: 0,
                final_loss: 0.0,
                reference_norm: 0.3,
                normalize_inputs: false,
                symmetrize: false,
            },
        }
    }

    fn zero_net(n_cells: usize) -> OperatorNet<f64> {
        let m = n_cells + 1;
        OperatorNet {
            branch: Mlp::zeros(&[m, 4, 3]).unwrap(),
            trunk: Mlp::zeros(&[1, 4, 3]).unwrap(),
            b0: 0.0,
            boundary_factor: BoundaryFactor::XTimesXMinus1,
            meta: NetMetadata {
                nu: 1.0,
                c: 1.0,
                n_cells,
                tau: None,
                seed: 0,
                iterations: 0,
                final_loss: 0.0,
                reference_norm: 0.3,
                normalize_inputs: false,
                symmetrize: false,
            },
        }
    }

    #[test]
    fn stationary_adapter_matches_direct_application() {
        let net = random_net(8, 1);
        let g = Grid::stationary(1, 8).unwrap();
        let f = Field::sample(g, |x: f64, _, _| (2.0 * x - 0.7).sin());
        let op = as_solution_operator(&net, g, Some(&f)).unwrap();

        let cache = net.trunk_cache(8).unwrap();
        let v = Field::sample(g, |x: f64, _, _| x * (1.0 - x) * 3.0);
        let direct = net.apply(&v, &cache).unwrap();
        let via_op = op.apply_linear(&v).unwrap();
        assert_eq!(direct.as_slice(), via_op.as_slice());
        assert_eq!(op.apply_adjoint(&v).unwrap().as_slice(), direct.as_slice());

        let want_offset = net.apply(&f, &cache).unwrap();
        assert_eq!(op.offset().as_slice(), want_offset.as_slice());
        // affine map is one net pass over the combined input, and reduces
        // to the offset at u = 0
        let combined = net.apply(&v.add_scaled(1.0, &f).unwrap(), &cache).unwrap();
        let affine = op.apply_affine(&v).unwrap();
        assert_eq!(affine.as_slice(), combined.as_slice());
        let at_zero = op.apply_affine(&Field::zeros(g)).unwrap();
        assert_eq!(at_zero.as_slice(), want_offset.as_slice());
        assert_eq!(op.pde_solves(), 0);

        let exact =
            make_elliptic_operator(g, EllipticProblem::<f64>::new(1.0, 1.0).unwrap(), None)
                .unwrap();
        let got = op.norm_estimate().unwrap();
        let want = exact.norm_estimate().unwrap();
        assert!((got - want).abs() <= 1e-14 * want);
    }

    #[test]
    fn zero_net_is_the_zero_operator() {
        let net = zero_net(8);
        let g = Grid::stationary(1, 8).unwrap();
        let op = as_solution_operator(&net, g, None).unwrap();
        let v = Field::sample(g, |x: f64, _, _| x + 0.2);
        assert!(op.apply_linear(&v).unwrap().as_slice().iter().all(|&y| y == 0.0));

        let tg = Grid::transient(1, 8, 4).unwrap();
        let u = Field::sample(tg, |x: f64, _, t| x * t + 0.1);
        let y = surrogate_parabolic_march(&net, &u, None, 0.25, 4).unwrap();
        assert!(y.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_step_march_is_a_single_stage_application() {
        let net = random_net(8, 2);
        let tg = Grid::transient(1, 8, 1).unwrap();
        let u = Field::sample(tg, |x: f64, _, _| (3.0 * x).cos());
        let f = Field::sample(tg, |x: f64, _, _| x - 0.4);
        let y = surrogate_parabolic_march(&net, &u, Some(&f), 1.0, 1).unwrap();

        let sg = Grid::stationary(1, 8).unwrap();
        let mut rhs = Field::zeros(sg);
        for j in 0..rhs.len() {
            rhs.as_mut_slice()[j] = u.as_slice()[j] + f.as_slice()[j];
        }
        let cache = net.trunk_cache(8).unwrap();
        let want = net.apply(&rhs, &cache).unwrap();
        assert_eq!(y.as_slice(), want.as_slice());
    }

    #[test]
    fn adjoint_march_is_the_forward_march_reversed_in_time() {
        let net = random_net(8, 3);
        let tg = Grid::transient(1, 8, 5).unwrap();
        let u = Field::sample(tg, |x: f64, _, t| (x * 2.0 + t).sin());
        let mut p = Field::zeros(tg);
        for lvl in 0..5 {
            p.level_mut(lvl).copy_from_slice(u.level(4 - lvl));
        }
        let tau = 0.2;
        let y = surrogate_parabolic_march(&net, &u, None, tau, 5).unwrap();
        let w = surrogate_adjoint_march(&net, &p, tau, 5).unwrap();
        for lvl in 0..5 {
            assert_eq!(w.level(lvl), y.level(4 - lvl));
        }
    }

    #[test]
    fn march_rejects_mismatched_setup() {
        let mut net = random_net(8, 4);
        let tg = Grid::transient(1, 8, 4).unwrap();
        let u = Field::zeros(tg);
        assert!(surrogate_parabolic_march(&net, &u, None, 0.25, 4).is_ok());
        // wrong step count
        assert!(surrogate_parabolic_march(&net, &u, None, 0.25, 5).is_err());
        // step disagrees with the grid spacing
        assert!(surrogate_parabolic_march(&net, &u, None, 0.5, 4).is_err());
        // net trained for a different stage length
        net.meta.tau = Some(0.125);
        assert!(surrogate_parabolic_march(&net, &u, None, 0.25, 4).is_err());
        net.meta.tau = Some(0.25);
        assert!(surrogate_parabolic_march(&net, &u, None, 0.25, 4).is_ok());
        // sensor count vs grid nodes
        let wide = Grid::transient(1, 16, 4).unwrap();
        assert!(surrogate_parabolic_march(&net, &Field::zeros(wide), None, 0.25, 4).is_err());
        // stationary field has no time axis
        let sg = Grid::stationary(1, 8).unwrap();
        assert!(surrogate_parabolic_march(&net, &Field::zeros(sg), None, 0.25, 4).is_err());
    }

    #[test]
    fn transient_adapter_wires_linear_affine_and_adjoint() {
        let net = random_net(8, 5);
        let tg = Grid::transient(1, 8, 4).unwrap();
        let f = Field::sample(tg, |x: f64, _, t| x * (1.0 - x) * (1.0 + t));
        let op = parabolic_surrogate_operator(&net, tg, &f).unwrap();
        let tau = 0.25;

        let u = Field::sample(tg, |x: f64, _, t| (x - t).cos());
        let lin = op.apply_linear(&u).unwrap();
        let want_lin = surrogate_parabolic_march(&net, &u, None, tau, 4).unwrap();
        assert_eq!(lin.as_slice(), want_lin.as_slice());

        let aff = op.apply_affine(&u).unwrap();
        let want_aff = surrogate_parabolic_march(&net, &u, Some(&f), tau, 4).unwrap();
        assert_eq!(aff.as_slice(), want_aff.as_slice());

        let zero_aff = op.apply_affine(&Field::zeros(tg)).unwrap();
        assert_eq!(zero_aff.as_slice(), op.offset().as_slice());

        let adj = op.apply_adjoint(&u).unwrap();
        let want_adj = surrogate_adjoint_march(&net, &u, tau, 4).unwrap();
        assert_eq!(adj.as_slice(), want_adj.as_slice());

        assert_eq!(op.pde_solves(), 0);
    }

    #[test]
    fn fidelity_gate_separates_perfect_from_useless() {
        let g = Grid::stationary(1, 16).unwrap();
        let prob = EllipticProblem::<f64>::new(1.0, 1.0).unwrap();
        let exact = make_elliptic_operator(g, prob, None).unwrap();
        let twin = make_elliptic_operator(g, prob, None).unwrap();
        let report = fidelity_check(&exact, &twin, 10, 99, 5e-2).unwrap();
        assert!(report.passed);
        assert_eq!(report.mean_rel_err, 0.0);
        assert!(require_fidelity(&report, "stationary gate").is_ok());

        let dud = as_solution_operator(&zero_net(16), g, None).unwrap();
        let report = fidelity_check(&dud, &twin, 10, 99, 5e-2).unwrap();
        assert!(!report.passed);
        assert!((report.mean_rel_err - 1.0).abs() < 1e-12);
        assert!(require_fidelity(&report, "stationary gate").is_err());
    }

    #[test]
    fn transient_fidelity_gate_runs_the_march() {
        let tg = Grid::transient(1, 8, 4).unwrap();
        let prob = EllipticProblem::<f64>::new(1.0, 0.0).unwrap();
        let zero_src = Field::zeros(tg);
        let phi = Field::zeros(Grid::stationary(1, 8).unwrap());
        let exact = make_parabolic_operator(tg, prob, &zero_src, &phi).unwrap();
        let twin = make_parabolic_operator(tg, prob, &zero_src, &phi).unwrap();
        let report = march_fidelity_check(&exact, &twin, 5, 7, 1e-1).unwrap();
        assert!(report.passed && report.mean_rel_err == 0.0);

        let dud = parabolic_surrogate_operator(&zero_net(8), tg, &zero_src).unwrap();
        let report = march_fidelity_check(&dud, &twin, 5, 7, 1e-1).unwrap();
        assert!(!report.passed);
    }
}
