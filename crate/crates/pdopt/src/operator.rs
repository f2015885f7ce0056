//! Control-to-state solution operators.
//!
//! The optimal-control problems all reduce to an affine map u -> S u + y_f
//! between nodal fields. `apply_linear` is the homogeneous part S,
//! `apply_adjoint` its adjoint in the weighted inner product (equal weights on
//! both sides make that the plain matrix transpose), and `offset` carries the
//! fixed right-hand side and initial datum. The elliptic and parabolic kernels
//! diagonalize the Dirichlet Laplacian by sine transforms, which is an exact
//! direct solve and keeps the parabolic adjoint the exact transpose of the
//! backward-Euler forward march (discretize, then transpose).

use crate::dst::{dst_2d, SineTransform};
use crate::error::{Error, Result};
use crate::grid::{check_same_grid, inner, norm, Field, Grid};
use crate::scalar::{real, Scalar};
use crate::sparse::EllipticProblem;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cell::{Cell, RefCell};

type ApplyFn<T> = Box<dyn Fn(&Field<T>) -> Result<Field<T>>>;

enum Kernel<T: Scalar> {
    Elliptic(Spectral<T>),
    Parabolic(Spectral<T>),
    /// `affine`, when present, replaces the linear-plus-offset composition;
    /// surrogates that must see the combined right-hand side need it.
    Custom { linear: ApplyFn<T>, adjoint: ApplyFn<T>, affine: Option<ApplyFn<T>> },
}

/// Sine-basis diagonalization shared by the elliptic and parabolic kernels.
/// `eig` holds, per spatial mode, the symbol of the stationary operator
/// (elliptic) or of one backward-Euler step 1 + tau*(nu*mu + c) (parabolic).
struct Spectral<T: Scalar> {
    grid: Grid,
    eig: Vec<T>,
    tau: T,
    st: RefCell<SineTransform<T>>,
    scratch: RefCell<Vec<T>>,
}

impl<T: Scalar> Spectral<T> {
    fn new(grid: Grid, prob: EllipticProblem<T>) -> Self {
        let m = grid.nodes_per_axis();
        let modes = spatial_eigenvalues(grid);
        let transient = grid.is_transient();
        let tau = if transient { grid.tau::<T>() } else { T::zero() };
        let eig = modes
            .iter()
            .map(|&mu| {
                let sym = prob.nu * mu + prob.c;
                if transient {
                    T::one() + tau * sym
                } else {
                    sym
                }
            })
            .collect();
        let scratch = if grid.dim() == 2 { vec![T::zero(); m * m] } else { Vec::new() };
        Spectral {
            grid,
            eig,
            tau,
            st: RefCell::new(SineTransform::new(m)),
            scratch: RefCell::new(scratch),
        }
    }

    fn forward_all_levels(&self, buf: &mut Field<T>) {
        let sl = self.grid.spatial_len();
        let mut st = self.st.borrow_mut();
        let mut scratch = self.scratch.borrow_mut();
        if self.grid.dim() == 1 {
            // every level is one row; pack them all pairwise in one pass
            st.dst_rows(buf.as_mut_slice(), self.grid.n_levels());
        } else {
            for lev in 0..self.grid.n_levels() {
                dst_2d(&mut st, &mut buf.as_mut_slice()[lev * sl..(lev + 1) * sl], &mut scratch);
            }
        }
    }

    fn synthesis_scale(&self) -> T {
        let s = self.st.borrow().inverse_scale();
        if self.grid.dim() == 1 {
            s
        } else {
            s * s
        }
    }

    /// Stationary solve: transform, divide by the symbol, transform back.
    fn apply_elliptic(&self, v: &Field<T>) -> Field<T> {
        let mut out = v.clone();
        self.forward_all_levels(&mut out);
        for (x, &e) in out.as_mut_slice().iter_mut().zip(&self.eig) {
            *x = *x / e;
        }
        self.forward_all_levels(&mut out);
        out.scale(self.synthesis_scale());
        out
    }

    /// Backward-Euler march y_n = (y_{n-1} + tau g_n) / symbol with spectral
    /// initial slice `y0_hat` (zeros for the homogeneous part).
    fn march_forward(&self, g: &Field<T>, y0_hat: Option<&[T]>) -> Field<T> {
        let sl = self.grid.spatial_len();
        let nt = self.grid.n_time_steps();
        let mut out = g.clone();
        self.forward_all_levels(&mut out);
        let buf = out.as_mut_slice();
        for n in 0..nt {
            let (done, cur) = buf.split_at_mut(n * sl);
            for j in 0..sl {
                let prev = if n == 0 {
                    y0_hat.map_or(T::zero(), |p| p[j])
                } else {
                    done[(n - 1) * sl + j]
                };
                cur[j] = (prev + self.tau * cur[j]) / self.eig[j];
            }
        }
        self.forward_all_levels(&mut out);
        out.scale(self.synthesis_scale());
        out
    }

    /// Exact transpose of [`Self::march_forward`] with zero initial slice:
    /// q_n = (q_{n+1} + tau p_n) / symbol, marched from the final level down.
    fn march_adjoint(&self, p: &Field<T>) -> Field<T> {
        let sl = self.grid.spatial_len();
        let nt = self.grid.n_time_steps();
        let mut out = p.clone();
        self.forward_all_levels(&mut out);
        let buf = out.as_mut_slice();
        for n in (0..nt).rev() {
            let (cur, done) = buf.split_at_mut((n + 1) * sl);
            for j in 0..sl {
                let next = if n + 1 == nt { T::zero() } else { done[j] };
                cur[n * sl + j] = (next + self.tau * cur[n * sl + j]) / self.eig[j];
            }
        }
        self.forward_all_levels(&mut out);
        out.scale(self.synthesis_scale());
        out
    }

    fn spatial_transform(&self, phi: &Field<T>) -> Vec<T> {
        let mut tmp = phi.clone();
        let mut st = self.st.borrow_mut();
        if self.grid.dim() == 1 {
            st.dst(tmp.as_mut_slice());
        } else {
            let mut scratch = self.scratch.borrow_mut();
            dst_2d(&mut st, tmp.as_mut_slice(), &mut scratch);
        }
        tmp.into_values()
    }
}

/// Eigenvalues of the discrete Dirichlet Laplacian on the spatial interior,
/// same flattened ordering as the fields: mu_k = (4/h^2) sin^2(k pi h / 2)
/// per axis, summed over axes.
fn spatial_eigenvalues<T: Scalar>(grid: Grid) -> Vec<T> {
    let m = grid.nodes_per_axis();
    let n = grid.n_cells() as f64;
    let one_d: Vec<T> = (1..=m)
        .map(|k| {
            let s = (std::f64::consts::PI * k as f64 / (2.0 * n)).sin();
            real::<T>(4.0 * n * n * s * s)
        })
        .collect();
    if grid.dim() == 1 {
        one_d
    } else {
        let mut eig = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                eig.push(one_d[i] + one_d[j]);
            }
        }
        eig
    }
}

pub struct SolutionOperator<T: Scalar> {
    grid: Grid,
    kernel: Kernel<T>,
    offset: Field<T>,
    norm_estimate: Option<T>,
    countable: bool,
    counter: Cell<usize>,
}

impl<T: Scalar> SolutionOperator<T> {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Fixed affine part y_f (response to the data f and the initial state).
    pub fn offset(&self) -> &Field<T> {
        &self.offset
    }

    pub fn norm_estimate(&self) -> Option<T> {
        self.norm_estimate
    }

    pub fn set_norm_estimate(&mut self, v: T) {
        self.norm_estimate = Some(v);
    }

    /// PDE solves performed through this operator so far. Surrogate-backed
    /// operators never count.
    pub fn pde_solves(&self) -> usize {
        self.counter.get()
    }

    fn count(&self) {
        if self.countable {
            self.counter.set(self.counter.get() + 1);
        }
    }

    /// Homogeneous part u -> S u.
    pub fn apply_linear(&self, u: &Field<T>) -> Result<Field<T>> {
        check_same_grid(u, &self.offset)?;
        self.count();
        Ok(match &self.kernel {
            Kernel::Elliptic(sp) => sp.apply_elliptic(u),
            Kernel::Parabolic(sp) => sp.march_forward(u, None),
            Kernel::Custom { linear, .. } => linear(u)?,
        })
    }

    /// Adjoint p -> S* p in the weighted inner product.
    pub fn apply_adjoint(&self, p: &Field<T>) -> Result<Field<T>> {
        check_same_grid(p, &self.offset)?;
        self.count();
        Ok(match &self.kernel {
            Kernel::Elliptic(sp) => sp.apply_elliptic(p),
            Kernel::Parabolic(sp) => sp.march_adjoint(p),
            Kernel::Custom { adjoint, .. } => adjoint(p)?,
        })
    }

    /// Affine response S u + y_f. A custom kernel may supply the whole
    /// affine map in one piece instead.
    pub fn apply_affine(&self, u: &Field<T>) -> Result<Field<T>> {
        if let Kernel::Custom { affine: Some(aff), .. } = &self.kernel {
            check_same_grid(u, &self.offset)?;
            self.count();
            return aff(u);
        }
        let su = self.apply_linear(u)?;
        su.add_scaled(T::one(), &self.offset)
    }

    /// Operator defined by a pair of closures; the route used by tests and by
    /// the neural surrogates. `countable` decides whether applications are
    /// billed as PDE solves.
    pub fn from_closures(
        grid: Grid,
        linear: impl Fn(&Field<T>) -> Result<Field<T>> + 'static,
        adjoint: impl Fn(&Field<T>) -> Result<Field<T>> + 'static,
        offset: Field<T>,
        countable: bool,
    ) -> Result<Self> {
        if offset.grid() != grid {
            return Err(Error::GridMismatch {
                expected: format!("{grid:?}"),
                got: format!("{:?}", offset.grid()),
            });
        }
        Ok(SolutionOperator {
            grid,
            kernel: Kernel::Custom {
                linear: Box::new(linear),
                adjoint: Box::new(adjoint),
                affine: None,
            },
            offset,
            norm_estimate: None,
            countable,
            counter: Cell::new(0),
        })
    }

    /// Like [`from_closures`](Self::from_closures) but with a dedicated
    /// affine map that sees the control directly; the offset is kept for
    /// reporting only.
    pub fn from_closures_with_affine(
        grid: Grid,
        linear: impl Fn(&Field<T>) -> Result<Field<T>> + 'static,
        adjoint: impl Fn(&Field<T>) -> Result<Field<T>> + 'static,
        affine: impl Fn(&Field<T>) -> Result<Field<T>> + 'static,
        offset: Field<T>,
        countable: bool,
    ) -> Result<Self> {
        let mut op = Self::from_closures(grid, linear, adjoint, offset, countable)?;
        if let Kernel::Custom { affine: slot, .. } = &mut op.kernel {
            *slot = Some(Box::new(affine));
        }
        Ok(op)
    }
}

/// Inverse of -nu*Laplace + c on a stationary grid. `f` is the fixed source;
/// the offset becomes S f. The spectral norm of the inverse is known in
/// closed form, so `norm_estimate` is filled immediately.
pub fn make_elliptic_operator<T: Scalar>(
    grid: Grid,
    prob: EllipticProblem<T>,
    f: Option<&Field<T>>,
) -> Result<SolutionOperator<T>> {
    EllipticProblem::new(prob.nu, prob.c)?;
    if grid.is_transient() {
        return Err(Error::InvalidGrid("elliptic operator needs a stationary grid".into()));
    }
    let sp = Spectral::new(grid, prob);
    let offset = match f {
        Some(field) => {
            if field.grid() != grid {
                return Err(Error::GridMismatch {
                    expected: format!("{grid:?}"),
                    got: format!("{:?}", field.grid()),
                });
            }
            sp.apply_elliptic(field)
        }
        None => Field::zeros(grid),
    };
    let mu_min = spatial_eigenvalues::<T>(grid)[0];
    let norm_exact = T::one() / (prob.nu * mu_min + prob.c);
    Ok(SolutionOperator {
        grid,
        kernel: Kernel::Elliptic(sp),
        offset,
        norm_estimate: Some(norm_exact),
        countable: true,
        counter: Cell::new(0),
    })
}

/// Backward-Euler solution operator of d/dt y - nu*Laplace y + c y = u + f,
/// y(0) = phi, on a transient grid. The homogeneous part marches u with zero
/// initial slice; f and phi live in the offset. The adjoint is the exact
/// matrix transpose of the forward march.
pub fn make_parabolic_operator<T: Scalar>(
    grid: Grid,
    prob: EllipticProblem<T>,
    f: &Field<T>,
    phi: &Field<T>,
) -> Result<SolutionOperator<T>> {
    EllipticProblem::new(prob.nu, prob.c)?;
    if !grid.is_transient() {
        return Err(Error::InvalidGrid("parabolic operator needs a transient grid".into()));
    }
    if f.grid() != grid {
        return Err(Error::GridMismatch {
            expected: format!("{grid:?}"),
            got: format!("{:?}", f.grid()),
        });
    }
    if phi.grid() != grid.spatial_grid() {
        return Err(Error::GridMismatch {
            expected: format!("{:?}", grid.spatial_grid()),
            got: format!("{:?}", phi.grid()),
        });
    }
    let sp = Spectral::new(grid, prob);
    let phi_hat = sp.spatial_transform(phi);
    let offset = sp.march_forward(f, Some(&phi_hat));
    Ok(SolutionOperator {
        grid,
        kernel: Kernel::Parabolic(sp),
        offset,
        norm_estimate: None,
        countable: true,
        counter: Cell::new(0),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct NormEstimate<T> {
    pub value: T,
    pub converged: bool,
    pub iterations: usize,
}

pub const NORM_TOL_DEFAULT: f64 = 1e-8;

/// Power iteration on S*S. Start vector is the normalized all-ones field
/// (deterministic); a seeded random restart only fires if the iterate falls
/// into the null space. The result is written back into `op.norm_estimate`.
pub fn estimate_operator_norm<T: Scalar>(
    op: &mut SolutionOperator<T>,
    tol: T,
    max_iter: usize,
) -> Result<NormEstimate<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("norm tolerance must be > 0, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
    }
    let grid = op.grid();
    let mut v = Field::sample(grid, |_, _, _| T::one());
    let nv = norm(&v);
    v.scale(T::one() / nv);

    let mut est = T::zero();
    let mut prev: Option<T> = None;
    let mut restarted = false;
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=max_iter {
        iterations = it;
        let w = op.apply_linear(&v)?;
        let z = op.apply_adjoint(&w)?;
        let lam = inner(&v, &z)?; // = |S v|^2 >= 0
        est = lam.max(T::zero()).sqrt();
        let nz = norm(&z);
        if !(nz > T::zero()) {
            if restarted {
                est = T::zero();
                converged = true;
                break;
            }
            restarted = true;
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            v = Field::sample(grid, |_, _, _| real::<T>(rng.gen_range(-1.0..1.0)));
            let nv = norm(&v);
            v.scale(T::one() / nv);
            prev = None;
            continue;
        }
        v = z;
        v.scale(T::one() / nz);
        if let Some(p) = prev {
            if (est - p).abs() <= tol * est.max(T::epsilon()) {
                converged = true;
                break;
            }
        }
        prev = Some(est);
    }

    op.set_norm_estimate(est);
    Ok(NormEstimate { value: est, converged, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{assemble_elliptic, solve_spd};
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn top_singular_value(m: &DMatrix<f64>) -> f64 {
        m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
    }

    fn dense_of(op: &SolutionOperator<f64>, adjoint: bool) -> DMatrix<f64> {
        let g = op.grid();
        let n = g.len();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = Field::zeros(g);
            e.as_mut_slice()[j] = 1.0;
            let col = if adjoint { op.apply_adjoint(&e).unwrap() } else { op.apply_linear(&e).unwrap() };
            for i in 0..n {
                m[(i, j)] = col.as_slice()[i];
            }
        }
        m
    }

    #[test]
    fn elliptic_zero_maps_to_zero() {
        let g = Grid::stationary(2, 8).unwrap();
        let op = make_elliptic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, None).unwrap();
        let y = op.apply_linear(&Field::zeros(g)).unwrap();
        assert_eq!(y.max_abs(), 0.0);
        assert_eq!(op.offset().max_abs(), 0.0);
    }

    #[test]
    fn elliptic_matches_assembled_solve() {
        for (dim, n) in [(1u8, 16usize), (2, 8)] {
            let g = Grid::stationary(dim, n).unwrap();
            let prob = EllipticProblem { nu: 0.7, c: 0.3 };
            let op = make_elliptic_operator(g, prob, None).unwrap();
            let u = Field::sample(g, |x: f64, y, _| (x - 0.3) * (y + 1.0) + x * x);
            let via_spectral = op.apply_linear(&u).unwrap();
            let mat = assemble_elliptic(g, prob).unwrap();
            let via_csr = solve_spd(&mat, &u).unwrap();
            let diff = via_spectral.sub(&via_csr).unwrap().max_abs();
            assert!(diff < 1e-10, "dim {dim}: routes disagree by {diff}");
        }
    }

    #[test]
    fn elliptic_manufactured_solution() {
        let g = Grid::stationary(1, 64).unwrap();
        let op = make_elliptic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, None).unwrap();
        let u = Field::sample(g, |x: f64, _, _| PI * PI * (PI * x).sin());
        let y = op.apply_linear(&u).unwrap();
        let exact = Field::sample(g, |x: f64, _, _| (PI * x).sin());
        assert!(y.sub(&exact).unwrap().max_abs() < 1e-3);
    }

    #[test]
    fn elliptic_offset_carries_source() {
        let g = Grid::stationary(1, 32).unwrap();
        let f = Field::sample(g, |x: f64, _, _| PI * PI * (PI * x).sin());
        let op = make_elliptic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, Some(&f)).unwrap();
        let y = op.apply_affine(&Field::zeros(g)).unwrap();
        let exact = Field::sample(g, |x: f64, _, _| (PI * x).sin());
        assert!(y.sub(&exact).unwrap().max_abs() < 3e-3);
    }

    #[test]
    fn adjoint_identity_elliptic() {
        let g = Grid::stationary(2, 12).unwrap();
        let op = make_elliptic_operator(g, EllipticProblem { nu: 1.3, c: 0.2 }, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u: Field<f64> = Field::sample(g, |_, _, _| rng.gen_range(-1.0..1.0));
            let p: Field<f64> = Field::sample(g, |_, _, _| rng.gen_range(-1.0..1.0));
            let lhs = inner(&op.apply_linear(&u).unwrap(), &p).unwrap();
            let rhs = inner(&u, &op.apply_adjoint(&p).unwrap()).unwrap();
            let scale = norm(&u) * norm(&p);
            assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn parabolic_zero_control_zero_state() {
        let g = Grid::transient(2, 8, 8).unwrap();
        let f = Field::zeros(g);
        let phi = Field::zeros(g.spatial_grid());
        let op =
            make_parabolic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, &f, &phi).unwrap();
        assert_eq!(op.apply_linear(&Field::zeros(g)).unwrap().max_abs(), 0.0);
        assert_eq!(op.offset().max_abs(), 0.0);
    }

    #[test]
    fn parabolic_adjoint_is_exact_transpose() {
        // dense check on a 2d grid with 8 cells per axis and 8 time levels
        let g = Grid::transient(2, 8, 8).unwrap();
        let f = Field::zeros(g);
        let phi = Field::zeros(g.spatial_grid());
        let op =
            make_parabolic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, &f, &phi).unwrap();
        let s = dense_of(&op, false);
        let st = dense_of(&op, true);
        let diff = (&s.transpose() - &st).abs().max();
        assert!(diff <= 1e-12, "transpose defect {diff}");
    }

    #[test]
    fn parabolic_reproduces_linear_in_time_solution() {
        // y = (1 - t) sin(pi x1) sin(pi x2): backward Euler is exact in time
        // here, so the error is pure O(h^2).
        let errs: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&n| {
                let g = Grid::transient(2, n, n).unwrap();
                let sinsin =
                    |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
                let u = Field::sample(g, |x: f64, y, t| {
                    0.3 * (1.0 - t) * (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
                });
                let f = Field::sample(g, |x: f64, y, t| {
                    (-1.0 + 2.0 * PI * PI * (1.0 - t)) * sinsin(x, y)
                        - 0.3 * (1.0 - t) * (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
                });
                let phi = Field::sample(g.spatial_grid(), |x: f64, y, _| sinsin(x, y));
                let op = make_parabolic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, &f, &phi)
                    .unwrap();
                let yh = op.apply_affine(&u).unwrap();
                let exact = Field::sample(g, |x: f64, y, t| (1.0 - t) * sinsin(x, y));
                yh.sub(&exact).unwrap().max_abs()
            })
            .collect();
        let o1 = (errs[0] / errs[1]).log2();
        let o2 = (errs[1] / errs[2]).log2();
        assert!(o1 > 1.7 && o2 > 1.7, "orders {o1:.2} {o2:.2}, errs {errs:?}");
    }

    #[test]
    fn parabolic_first_order_in_time() {
        // y = e^{-t} sin(pi x) has curvature in t, which exposes the O(tau)
        // backward-Euler error under combined tau = h refinement.
        let errs: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&n| {
                let g = Grid::transient(1, n, n).unwrap();
                let f = Field::sample(g, |x: f64, _, t| {
                    (PI * PI - 1.0) * (-t).exp() * (PI * x).sin()
                });
                let phi = Field::sample(g.spatial_grid(), |x: f64, _, _| (PI * x).sin());
                let op = make_parabolic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, &f, &phi)
                    .unwrap();
                let yh = op.apply_affine(&Field::zeros(g)).unwrap();
                let exact = Field::sample(g, |x: f64, _, t| (-t).exp() * (PI * x).sin());
                yh.sub(&exact).unwrap().max_abs()
            })
            .collect();
        let orders: Vec<f64> =
            errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        for o in &orders {
            assert!(*o > 0.9, "orders {orders:?}, errs {errs:?}");
        }
    }

    #[test]
    fn power_iteration_on_diagonal_toy() {
        let g = Grid::stationary(1, 3).unwrap(); // two unknowns
        let apply = |f: &Field<f64>| {
            let v = f.as_slice();
            Field::from_values(f.grid(), vec![2.0 * v[0], v[1]])
        };
        let mut op =
            SolutionOperator::from_closures(g, apply, apply, Field::zeros(g), true).unwrap();
        let est = estimate_operator_norm(&mut op, 1e-10, 200).unwrap();
        assert!(est.converged);
        assert!((est.value - 2.0).abs() < 1e-8);
        assert_eq!(op.norm_estimate(), Some(est.value));
    }

    #[test]
    fn power_iteration_matches_dense_svd() {
        // elliptic inverse, 15 unknowns
        let g = Grid::stationary(1, 16).unwrap();
        let mut op = make_elliptic_operator(g, EllipticProblem { nu: 1.0, c: 0.5 }, None).unwrap();
        let analytic = op.norm_estimate().unwrap();
        let est = estimate_operator_norm(&mut op, 1e-12, 500).unwrap();
        let dense = dense_of(&op, false);
        let sigma = top_singular_value(&dense);
        assert!((est.value - sigma).abs() <= 1e-6 * sigma);
        assert!((analytic - sigma).abs() <= 1e-12 * sigma);

        // parabolic march, 7 x 4 = 28 unknowns
        let g = Grid::transient(1, 8, 4).unwrap();
        let f = Field::zeros(g);
        let phi = Field::zeros(g.spatial_grid());
        let mut op =
            make_parabolic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, &f, &phi).unwrap();
        let est = estimate_operator_norm(&mut op, 1e-12, 1000).unwrap();
        let dense = dense_of(&op, false);
        let sigma = top_singular_value(&dense);
        assert!((est.value - sigma).abs() <= 1e-6 * sigma, "{} vs {sigma}", est.value);
    }

    #[test]
    fn elliptic_inverse_norm_close_to_continuum() {
        let g = Grid::stationary(1, 64).unwrap();
        let mut op = make_elliptic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, None).unwrap();
        let est = estimate_operator_norm(&mut op, 1e-8, 500).unwrap();
        let cont = 1.0 / (PI * PI);
        assert!((est.value - cont).abs() < 0.01 * cont, "{}", est.value);
    }

    #[test]
    fn parabolic_norm_close_to_continuum() {
        let g = Grid::transient(2, 16, 16).unwrap();
        let f = Field::<f64>::zeros(g);
        let phi = Field::zeros(g.spatial_grid());
        let mut op =
            make_parabolic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, &f, &phi).unwrap();
        let est = estimate_operator_norm(&mut op, 1e-8, 2000).unwrap();
        assert!((est.value - 0.05).abs() < 0.2 * 0.05, "norm {}", est.value);
    }

    #[test]
    fn stale_flag_when_budget_too_small() {
        let g = Grid::transient(2, 8, 8).unwrap();
        let f = Field::zeros(g);
        let phi = Field::zeros(g.spatial_grid());
        let mut op =
            make_parabolic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, &f, &phi).unwrap();
        let est = estimate_operator_norm(&mut op, 1e-14, 2).unwrap();
        assert!(!est.converged);
        assert!(est.value > 0.0);
    }

    #[test]
    fn solve_counter_tracks_applications() {
        let g = Grid::stationary(1, 8).unwrap();
        let op = make_elliptic_operator(g, EllipticProblem { nu: 1.0, c: 0.0 }, None).unwrap();
        let u = Field::sample(g, |x: f64, _, _| x);
        let _ = op.apply_linear(&u).unwrap();
        let _ = op.apply_adjoint(&u).unwrap();
        let _ = op.apply_affine(&u).unwrap();
        assert_eq!(op.pde_solves(), 3);
    }
}
