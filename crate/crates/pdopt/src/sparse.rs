//! Assembled finite-difference operators and SPD solves.
//!
//! The solver kernels in [`crate::operator`] diagonalize the same matrices by
//! sine transforms; this module is the general-purpose route (any CSR matrix)
//! and the cross-check used by the tests. Tridiagonal systems go through a
//! Thomas elimination, everything else through Jacobi-preconditioned CG with
//! relative residual 1e-12.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::scalar::{real, Scalar};

/// Coefficients of the stationary operator -nu * Laplace + c * Id with
/// homogeneous Dirichlet boundary. Also describes one backward-Euler step
/// when nu is replaced by the time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticProblem<T> {
    pub nu: T,
    pub c: T,
}

impl<T: Scalar> EllipticProblem<T> {
    pub fn new(nu: T, c: T) -> Result<Self> {
        if !(nu > T::zero()) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!("diffusion nu must be > 0, got {nu}")));
        }
        if !(c >= T::zero()) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("reaction c must be >= 0, got {c}")));
        }
        Ok(EllipticProblem { nu, c })
    }
}

/// Compressed sparse row matrix, square, columns sorted within each row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc + self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn diag(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] = self.vals[k];
                }
            }
        }
        d
    }

    /// Entry lookup, zero when the position is not stored.
    pub fn get(&self, i: usize, j: usize) -> T {
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.col_idx[k] == j {
                return self.vals[k];
            }
        }
        T::zero()
    }

    pub fn is_tridiagonal(&self) -> bool {
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if j + 1 < i || j > i + 1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n]; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[i][self.col_idx[k]] = self.vals[k];
            }
        }
        d
    }
}

/// Five-point (three-point in 1d) stencil for [`EllipticProblem`] on the
/// spatial interior of `grid`, lexicographic ordering, x fastest.
pub fn assemble_elliptic<T: Scalar>(
    grid: Grid,
    prob: EllipticProblem<T>,
) -> Result<CsrMatrix<T>> {
    EllipticProblem::new(prob.nu, prob.c)?;
    let m = grid.nodes_per_axis();
    let h = grid.h::<T>();
    let w = prob.nu / (h * h); // off-diagonal magnitude
    let n = grid.spatial_len();

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);

    if grid.dim() == 1 {
        let diag = real::<T>(2.0) * w + prob.c;
        for i in 0..m {
            if i > 0 {
                col_idx.push(i - 1);
                vals.push(-w);
            }
            col_idx.push(i);
            vals.push(diag);
            if i + 1 < m {
                col_idx.push(i + 1);
                vals.push(-w);
            }
            row_ptr.push(col_idx.len());
        }
    } else {
        let diag = real::<T>(4.0) * w + prob.c;
        for j in 0..m {
            for i in 0..m {
                let row = j * m + i;
                if j > 0 {
                    col_idx.push(row - m);
                    vals.push(-w);
                }
                if i > 0 {
                    col_idx.push(row - 1);
                    vals.push(-w);
                }
                col_idx.push(row);
                vals.push(diag);
                if i + 1 < m {
                    col_idx.push(row + 1);
                    vals.push(-w);
                }
                if j + 1 < m {
                    col_idx.push(row + m);
                    vals.push(-w);
                }
                row_ptr.push(col_idx.len());
            }
        }
    }
    Ok(CsrMatrix { n, row_ptr, col_idx, vals })
}

/// Relative residual demanded from the iterative branch of [`solve_spd`].
pub const SPD_SOLVE_TOL: f64 = 1e-12;

/// Solve A x = b for SPD `A`. Tridiagonal matrices are eliminated directly;
/// anything else runs Jacobi-PCG down to [`SPD_SOLVE_TOL`] relative residual
/// and reports [`Error::SolverFailure`] when the cap (2n + 100) is hit.
pub fn solve_spd<T: Scalar>(mat: &CsrMatrix<T>, rhs: &Field<T>) -> Result<Field<T>> {
    if mat.n != rhs.len() {
        return Err(Error::ShapeMismatch { expected: mat.n, got: rhs.len() });
    }
    let b = rhs.as_slice();
    if b.iter().all(|&v| v == T::zero()) {
        return Ok(Field::zeros(rhs.grid()));
    }
    let x = if mat.is_tridiagonal() { thomas(mat, b) } else { pcg(mat, b)? };
    Field::from_values(rhs.grid(), x)
}

fn thomas<T: Scalar>(mat: &CsrMatrix<T>, b: &[T]) -> Vec<T> {
    let n = mat.n;
    let mut diag = vec![T::zero(); n];
    let mut lower = vec![T::zero(); n]; // lower[i] = A[i][i-1]
    let mut upper = vec![T::zero(); n]; // upper[i] = A[i][i+1]
    for i in 0..n {
        diag[i] = mat.get(i, i);
        if i > 0 {
            lower[i] = mat.get(i, i - 1);
        }
        if i + 1 < n {
            upper[i] = mat.get(i, i + 1);
        }
    }
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = upper[0] / diag[0];
    d[0] = b[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (b[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] = x[i] - c[i] * next;
    }
    x
}

fn pcg<T: Scalar>(mat: &CsrMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    let n = mat.n;
    let tol = real::<T>(SPD_SOLVE_TOL);
    let cap = 2 * n + 100;
    let diag = mat.diag();
    if diag.iter().any(|&d| !(d > T::zero())) {
        return Err(Error::InvalidParameter("SPD solve needs a positive diagonal".into()));
    }

    let dot = |u: &[T], v: &[T]| -> T {
        u.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    };
    let nb = dot(b, b).sqrt();

    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&diag).map(|(&ri, &di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![T::zero(); n];

    for it in 1..=cap {
        mat.matvec(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > T::zero()) {
            return Err(Error::SolverFailure {
                iterations: it,
                residual: (dot(&r, &r).sqrt() / nb).to_f64_lossy(),
            });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * q[i];
        }
        let rn = dot(&r, &r).sqrt();
        if rn <= tol * nb {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rn = dot(&r, &r).sqrt();
    Err(Error::SolverFailure { iterations: cap, residual: (rn / nb).to_f64_lossy() })
}
