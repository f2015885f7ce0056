//! Type-I discrete sine transform, the diagonalizer of the Dirichlet
//! Laplacian on a uniform grid.
//!
//! Convention: for v of length L and n = L + 1,
//!   DST(v)_k = sum_{j=1..L} v_j sin(j k pi / n),  k = 1..L.
//! The transform is its own inverse up to the factor 2/n. It is computed by a
//! complex FFT of the odd extension (length 2n); two real vectors ride in one
//! complex FFT, which halves the work for the batched row transforms the
//! operator kernels live on.

use crate::scalar::Scalar;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct SineTransform<T: Scalar> {
    len: usize,
    fft: Arc<dyn Fft<T>>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Scalar> SineTransform<T> {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1);
        let n = 2 * (len + 1);
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        SineTransform { len, fft, buf: vec![Complex::new(T::zero(), T::zero()); n], scratch }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Normalization factor of the round trip: DST(DST(v)) * (2/n) = v.
    pub fn inverse_scale(&self) -> T {
        crate::scalar::real::<T>(2.0 / (self.len as f64 + 1.0))
    }

    /// Transform one vector in place.
    pub fn dst(&mut self, v: &mut [T]) {
        self.dst_pair(v, None);
    }

    /// Transform `count` contiguous rows of length `self.len` in place,
    /// packed two at a time.
    pub fn dst_rows(&mut self, data: &mut [T], count: usize) {
        let l = self.len;
        assert!(data.len() >= count * l);
        let mut c = 0;
        while c + 1 < count {
            let (head, tail) = data[c * l..].split_at_mut(l);
            self.dst_pair(head, Some(&mut tail[..l]));
            c += 2;
        }
        if c < count {
            self.dst_pair(&mut data[c * l..(c + 1) * l], None);
        }
    }

    fn dst_pair(&mut self, a: &mut [T], b: Option<&mut [T]>) {
        let l = self.len;
        assert_eq!(a.len(), l);
        let n = l + 1;
        let big = 2 * n;
        let zero = T::zero();

        self.buf[0] = Complex::new(zero, zero);
        self.buf[n] = Complex::new(zero, zero);
        match &b {
            Some(bv) => {
                assert_eq!(bv.len(), l);
                for j in 1..=l {
                    let re = a[j - 1];
                    let im = bv[j - 1];
                    self.buf[j] = Complex::new(re, im);
                    self.buf[big - j] = Complex::new(-re, -im);
                }
            }
            None => {
                for j in 1..=l {
                    let re = a[j - 1];
                    self.buf[j] = Complex::new(re, zero);
                    self.buf[big - j] = Complex::new(-re, zero);
                }
            }
        }

        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);

        // odd-extended real u transforms to purely imaginary X with
        // DST(u)_k = -Im X_k / 2; the two packed vectors separate through the
        // conjugate symmetry of real inputs.
        let quarter = crate::scalar::real::<T>(0.25);
        match b {
            Some(bv) => {
                for k in 1..=l {
                    let zk = self.buf[k];
                    let zr = self.buf[big - k];
                    a[k - 1] = (zr.im - zk.im) * quarter;
                    bv[k - 1] = (zk.re - zr.re) * quarter;
                }
            }
            None => {
                let half = crate::scalar::real::<T>(0.5);
                for k in 1..=l {
                    a[k - 1] = -self.buf[k].im * half;
                }
            }
        }
    }
}

/// Two-dimensional DST-I of a row-major m-by-m block, both axes.
pub fn dst_2d<T: Scalar>(st: &mut SineTransform<T>, data: &mut [T], scratch: &mut [T]) {
    let m = st.len();
    assert!(data.len() >= m * m && scratch.len() >= m * m);
    st.dst_rows(data, m);
    transpose(data, scratch, m);
    st.dst_rows(scratch, m);
    transpose(scratch, data, m);
}

fn transpose<T: Copy>(src: &[T], dst: &mut [T], m: usize) {
    for j in 0..m {
        for i in 0..m {
            dst[i * m + j] = src[j * m + i];
        }
    }
}
