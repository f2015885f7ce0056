//! Closed-form proximal maps of the control update and the dual update.
//!
//! The primal step minimizes, pointwise in each node,
//!   mu*|v| + (alpha/2) v^2 + q v + (v - u_prev)^2 / (2r),
//! over the box [a, b]; q is the adjoint state S*p. Everything here is
//! separable, so the fields are processed elementwise.

use crate::error::{Error, Result};
use crate::grid::{check_same_grid, Field};
use crate::scalar::Scalar;

fn require_box<T: Scalar>(a: T, b: T) -> Result<()> {
    if !(a <= b) {
        return Err(Error::InvalidParameter(format!("box bounds need a <= b, got [{a}, {b}]")));
    }
    Ok(())
}

fn require_positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if !(v > T::zero()) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
    }
    Ok(())
}

#[inline]
pub fn clamp_scalar<T: Scalar>(v: T, a: T, b: T) -> T {
    v.max(a).min(b)
}

/// Soft shrinkage with threshold zeta >= 0; sgn(0) = 0 by construction.
#[inline]
pub fn shrink_scalar<T: Scalar>(v: T, zeta: T) -> T {
    let mag = (v.abs() - zeta).max(T::zero());
    if v > T::zero() {
        mag
    } else if v < T::zero() {
        -mag
    } else {
        T::zero()
    }
}

/// Pointwise closed form of the box-constrained control update.
#[inline]
pub fn prox_box_scalar<T: Scalar>(u_prev: T, q: T, alpha: T, r: T, a: T, b: T) -> T {
    let unconstrained = -(q - u_prev / r) / (alpha + T::one() / r);
    clamp_scalar(unconstrained, a, b)
}

/// Pointwise closed form with the additional mu*|v| term: shrink first, then
/// project. mu = 0 reduces this to [`prox_box_scalar`] exactly.
#[inline]
pub fn prox_l1_box_scalar<T: Scalar>(u_prev: T, q: T, alpha: T, r: T, mu: T, a: T, b: T) -> T {
    let denom = alpha * r + T::one();
    let core = (u_prev - r * q) / denom;
    let zeta = mu * r / denom;
    clamp_scalar(shrink_scalar(core, zeta), a, b)
}

pub fn project_box<T: Scalar>(v: &Field<T>, a: T, b: T) -> Result<Field<T>> {
    require_box(a, b)?;
    let mut out = v.clone();
    for x in out.as_mut_slice() {
        *x = clamp_scalar(*x, a, b);
    }
    Ok(out)
}

pub fn shrink<T: Scalar>(v: &Field<T>, zeta: T) -> Result<Field<T>> {
    if !(zeta >= T::zero()) {
        return Err(Error::InvalidParameter(format!("shrink threshold must be >= 0, got {zeta}")));
    }
    let mut out = v.clone();
    for x in out.as_mut_slice() {
        *x = shrink_scalar(*x, zeta);
    }
    Ok(out)
}

/// Control update for the box-only regularizer.
pub fn prox_primal_box<T: Scalar>(
    u_prev: &Field<T>,
    q: &Field<T>,
    alpha: T,
    r: T,
    a: T,
    b: T,
) -> Result<Field<T>> {
    check_same_grid(u_prev, q)?;
    require_box(a, b)?;
    require_positive("alpha", alpha)?;
    require_positive("r", r)?;
    let mut out = u_prev.clone();
    for (x, &qi) in out.as_mut_slice().iter_mut().zip(q.as_slice()) {
        *x = prox_box_scalar(*x, qi, alpha, r, a, b);
    }
    Ok(out)
}

/// Control update for the box regularizer plus mu times the l1 norm.
pub fn prox_primal_l1_box<T: Scalar>(
    u_prev: &Field<T>,
    q: &Field<T>,
    alpha: T,
    r: T,
    mu: T,
    a: T,
    b: T,
) -> Result<Field<T>> {
    check_same_grid(u_prev, q)?;
    require_box(a, b)?;
    require_positive("alpha", alpha)?;
    require_positive("r", r)?;
    if !(mu >= T::zero()) {
        return Err(Error::InvalidParameter(format!("mu must be >= 0, got {mu}")));
    }
    let mut out = u_prev.clone();
    for (x, &qi) in out.as_mut_slice().iter_mut().zip(q.as_slice()) {
        *x = prox_l1_box_scalar(*x, qi, alpha, r, mu, a, b);
    }
    Ok(out)
}

/// Dual update. `y_affine` must already include the operator offset, so the
/// formula is (S u_bar + y_f + p_prev/s - y_d) / (1 + 1/s).
pub fn dual_update<T: Scalar>(
    p_prev: &Field<T>,
    y_affine: &Field<T>,
    y_d: &Field<T>,
    s: T,
) -> Result<Field<T>> {
    check_same_grid(p_prev, y_affine)?;
    check_same_grid(p_prev, y_d)?;
    require_positive("s", s)?;
    let denom = T::one() + T::one() / s;
    let mut out = p_prev.clone();
    let pv = out.as_mut_slice();
    for ((x, &yi), &ydi) in pv.iter_mut().zip(y_affine.as_slice()).zip(y_d.as_slice()) {
        *x = (yi + *x / s - ydi) / denom;
    }
    Ok(out)
}

/// Defect of the Moreau decomposition
///   w = prox_{phi, s}(w) + s * prox_{phi*, 1/s}(w / s),
/// in the max norm. `prox_f` must be the prox of phi at step s, `prox_fstar`
/// the prox of the conjugate at step 1/s. A correct prox pair drives this to
/// rounding level for every w.
pub fn moreau_check<T: Scalar>(
    w: &Field<T>,
    prox_f: impl Fn(&Field<T>) -> Field<T>,
    prox_fstar: impl Fn(&Field<T>) -> Field<T>,
    s: T,
) -> Result<T> {
    require_positive("s", s)?;
    let pf = prox_f(w);
    check_same_grid(w, &pf)?;
    let mut w_over_s = w.clone();
    w_over_s.scale(T::one() / s);
    let pfs = prox_fstar(&w_over_s);
    check_same_grid(w, &pfs)?;
    let mut defect = T::zero();
    for ((&wi, &ai), &bi) in w.as_slice().iter().zip(pf.as_slice()).zip(pfs.as_slice()) {
        defect = defect.max((wi - ai - s * bi).abs());
    }
    Ok(defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field(vals: Vec<f64>) -> Field<f64> {
        let g = Grid::stationary(1, vals.len() + 1).unwrap();
        Field::from_values(g, vals).unwrap()
    }

    #[test]
    fn clamp_and_reject() {
        let f = field(vec![-2.0, 0.3, 2.0]);
        let p = project_box(&f, -0.5, 0.5).unwrap();
        assert_eq!(p.as_slice(), &[-0.5, 0.3, 0.5]);
        assert!(project_box(&f, 0.5, -0.5).is_err());
    }

    #[test]
    fn shrink_values() {
        let f = field(vec![0.5, -0.5, 0.1, -0.1, 0.0]);
        let s = shrink(&f, 0.2).unwrap();
        assert_eq!(s.as_slice(), &[0.3, -0.3, 0.0, 0.0, 0.0]);
        let id = shrink(&f, 0.0).unwrap();
        assert_eq!(id.as_slice(), f.as_slice());
        assert!(shrink(&f, -0.1).is_err());
    }

    #[test]
    fn zero_start_stays_feasible_zero() {
        // u_prev = 0 and q = 0 leave the control at the feasible zero, which
        // is what makes the first primal step of a cold start a no-op.
        let z = field(vec![0.0; 4]);
        let u1 = prox_primal_box(&z, &z, 1e-3, 4e3, -0.5, 0.5).unwrap();
        assert_eq!(u1.as_slice(), &[0.0; 4]);
    }

    #[test]
    fn box_prox_closed_form_spot_check() {
        // alpha=1, r=1: v = -(q - u)/2 clamped
        let u = field(vec![1.0]);
        let q = field(vec![2.0]);
        let v = prox_primal_box(&u, &q, 1.0, 1.0, -0.4, 0.4).unwrap();
        assert!((v.as_slice()[0] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn l1_with_zero_mu_equals_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u: f64 = rng.gen_range(-2.0..2.0);
            let q = rng.gen_range(-2.0..2.0);
            let alpha = rng.gen_range(1e-4..1.0);
            let r = rng.gen_range(0.5..5e3);
            let lhs = prox_box_scalar(u, q, alpha, r, -0.7, 0.9);
            let rhs = prox_l1_box_scalar(u, q, alpha, r, 0.0, -0.7, 0.9);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    /// Pointwise objective the primal prox must minimize over [a, b].
    fn primal_objective(v: f64, u: f64, q: f64, alpha: f64, r: f64, mu: f64) -> f64 {
        mu * v.abs() + 0.5 * alpha * v * v + q * v + (v - u) * (v - u) / (2.0 * r)
    }

    #[test]
    fn brute_force_grid_agrees_with_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..100 {
            let u = rng.gen_range(-2.0..2.0);
            let q = rng.gen_range(-2.0..2.0);
            let alpha = rng.gen_range(1e-4..1.0);
            let r = rng.gen_range(0.5..5e3);
            let mu = if case % 2 == 0 { 0.0 } else { rng.gen_range(0.0..0.2) };
            let a = rng.gen_range(-1.0..-0.05);
            let b = rng.gen_range(0.05..1.0);

            let closed = prox_l1_box_scalar(u, q, alpha, r, mu, a, b);

            let step = 1e-6;
            let count = ((b - a) / step) as usize;
            let mut best_v = a;
            let mut best = primal_objective(a, u, q, alpha, r, mu);
            for i in 1..=count {
                let v = a + step * i as f64;
                let val = primal_objective(v, u, q, alpha, r, mu);
                if val < best {
                    best = val;
                    best_v = v;
                }
            }
            assert!(
                (closed - best_v).abs() <= 1e-5,
                "case {case}: closed {closed} vs grid {best_v} \
                 (u={u}, q={q}, alpha={alpha}, r={r}, mu={mu}, box [{a},{b}])"
            );
        }
    }

    #[test]
    fn dual_update_from_cold_start() {
        let p0 = field(vec![0.0, 0.0]);
        let y_f = field(vec![1.0, -2.0]);
        let y_d = field(vec![0.5, 0.5]);
        let s = 0.4;
        let p1 = dual_update(&p0, &y_f, &y_d, s).unwrap();
        for i in 0..2 {
            let want = s * (y_f.as_slice()[i] - y_d.as_slice()[i]) / (1.0 + s);
            assert!((p1.as_slice()[i] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn moreau_identity_quadratic_pair() {
        // phi = phi* = half square: prox_{phi,s}(w) = w/(1+s),
        // prox_{phi*,1/s}(z) = z/(1+1/s).
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = Grid::stationary(1, 33).unwrap();
        let w: Field<f64> = Field::sample(g, |_, _, _| rng.gen_range(-3.0..3.0));
        for s in [0.1, 0.5, 1.0, 7.3] {
            let d = moreau_check(
                &w,
                |v| {
                    let mut o = v.clone();
                    o.scale(1.0 / (1.0 + s));
                    o
                },
                |v| {
                    let mut o = v.clone();
                    o.scale(1.0 / (1.0 + 1.0 / s));
                    o
                },
                s,
            )
            .unwrap();
            assert!(d <= 1e-12, "s={s}: defect {d}");
        }
    }

    #[test]
    fn moreau_identity_box_and_l1_pair() {
        // phi = indicator of [-1,1], phi* = |.|: projection and shrink are
        // conjugate proxes for any step.
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let g = Grid::stationary(1, 33).unwrap();
        let w: Field<f64> = Field::sample(g, |_, _, _| rng.gen_range(-4.0..4.0));
        for s in [0.2, 1.0, 3.0] {
            let d = moreau_check(
                &w,
                |v| project_box(v, -1.0, 1.0).unwrap(),
                |v| shrink(v, 1.0 / s).unwrap(),
                s,
            )
            .unwrap();
            assert!(d <= 1e-12, "s={s}: defect {d}");
        }
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(vals in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
            let f = field(vals);
            let once = project_box(&f, -0.5, 0.75).unwrap();
            let twice = project_box(&once, -0.5, 0.75).unwrap();
            prop_assert_eq!(once.as_slice(), twice.as_slice());
        }

        #[test]
        fn shrink_is_odd(v in -10.0f64..10.0, zeta in 0.0f64..3.0) {
            prop_assert_eq!(shrink_scalar(v, zeta), -shrink_scalar(-v, zeta));
        }

        #[test]
        fn primal_prox_lands_in_box(
            u in -5.0f64..5.0,
            q in -5.0f64..5.0,
            alpha in 1e-5f64..1.0,
            r in 0.1f64..1e4,
            mu in 0.0f64..1.0,
        ) {
            let v = prox_l1_box_scalar(u, q, alpha, r, mu, -0.5, 0.5);
            prop_assert!((-0.5..=0.5).contains(&v));
        }

        #[test]
        fn primal_prox_nonexpansive_in_u(
            u1 in -5.0f64..5.0,
            u2 in -5.0f64..5.0,
            q in -5.0f64..5.0,
            alpha in 1e-5f64..1.0,
            r in 0.1f64..1e4,
        ) {
            let v1 = prox_box_scalar(u1, q, alpha, r, -0.5, 0.5);
            let v2 = prox_box_scalar(u2, q, alpha, r, -0.5, 0.5);
            prop_assert!((v1 - v2).abs() <= (u1 - u2).abs() + 1e-12);
        }
    }
}
