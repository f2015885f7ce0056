//! Dense multilayer perceptron with tanh hidden layers and identity output,
//! batched forward and reverse passes, and flat parameter packing. Small and
//! allocation-honest; the nets here have a few thousand parameters, so clarity
//! beats cleverness.

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use rand::Rng;

/// Weight matrices are row-major `widths[l+1] x widths[l]`. The same struct
/// doubles as the gradient container, which keeps shapes honest by sharing
/// the constructor.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    widths: Vec<usize>,
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Scalar> Mlp<T> {
    pub fn zeros(widths: &[usize]) -> Result<Self> {
        if widths.len() < 2 || widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidParameter(format!(
                "layer widths must list at least input and output, all nonzero: {widths:?}"
            )));
        }
        let weights = widths.windows(2).map(|w| vec![T::zero(); w[0] * w[1]]).collect();
        let biases = widths[1..].iter().map(|&w| vec![T::zero(); w]).collect();
        Ok(Self { widths: widths.to_vec(), weights, biases })
    }

    /// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) for weights and biases.
    pub fn init_uniform(widths: &[usize], rng: &mut impl Rng) -> Result<Self> {
        let mut net = Self::zeros(widths)?;
        for l in 0..net.n_layers() {
            let bound = 1.0 / (net.widths[l] as f64).sqrt();
            for w in &mut net.weights[l] {
                *w = real::<T>(rng.gen_range(-bound..bound));
            }
            for b in &mut net.biases[l] {
                *b = real::<T>(rng.gen_range(-bound..bound));
            }
        }
        Ok(net)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn in_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn out_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Activations per layer, each a row-major `batch x width` block;
    /// index 0 is the input itself. Hidden layers are tanh, the last layer
    /// is linear.
    pub fn forward_batch(&self, x: &[T], batch: usize) -> Result<Vec<Vec<T>>> {
        if x.len() != batch * self.in_dim() {
            return Err(Error::ShapeMismatch { expected: batch * self.in_dim(), got: x.len() });
        }
        let mut acts = Vec::with_capacity(self.widths.len());
        acts.push(x.to_vec());
        for l in 0..self.n_layers() {
            let (w_in, w_out) = (self.widths[l], self.widths[l + 1]);
            let prev = &acts[l];
            let mut out = vec![T::zero(); batch * w_out];
            for b in 0..batch {
                let row = &prev[b * w_in..(b + 1) * w_in];
                let dst = &mut out[b * w_out..(b + 1) * w_out];
                for (o, d) in dst.iter_mut().enumerate() {
                    let wrow = &self.weights[l][o * w_in..(o + 1) * w_in];
                    let mut acc = self.biases[l][o];
                    for (wi, xi) in wrow.iter().zip(row) {
                        acc = acc + *wi * *xi;
                    }
                    *d = acc;
                }
            }
            if l + 1 < self.n_layers() {
                for v in &mut out {
                    *v = v.tanh();
                }
            }
            acts.push(out);
        }
        Ok(acts)
    }

    /// Convenience single-row forward returning only the output.
    pub fn forward_one(&self, x: &[T]) -> Result<Vec<T>> {
        let acts = self.forward_batch(x, 1)?;
        Ok(acts.last().unwrap().clone())
    }

    /// Reverse pass. `acts` must come from `forward_batch`; `d_out` is the
    /// loss gradient w.r.t. the network output, `batch x out_dim`. Gradients
    /// are accumulated into `grads`, which must share this net's shape.
    pub fn backward_batch(
        &self,
        acts: &[Vec<T>],
        d_out: &[T],
        batch: usize,
        grads: &mut Mlp<T>,
    ) -> Result<()> {
        if grads.widths != self.widths {
            return Err(Error::ShapeMismatch {
                expected: self.param_count(),
                got: grads.param_count(),
            });
        }
        if d_out.len() != batch * self.out_dim() {
            return Err(Error::ShapeMismatch { expected: batch * self.out_dim(), got: d_out.len() });
        }
        let mut d_act = d_out.to_vec();
        for l in (0..self.n_layers()).rev() {
            let (w_in, w_out) = (self.widths[l], self.widths[l + 1]);
            // d_act currently holds dL/d(output of layer l); peel the tanh
            // of hidden layers (the final layer is linear)
            if l + 1 < self.n_layers() {
                let a = &acts[l + 1];
                for (d, &ai) in d_act.iter_mut().zip(a) {
                    *d = *d * (T::one() - ai * ai);
                }
            }
            let prev = &acts[l];
            for b in 0..batch {
                let dz = &d_act[b * w_out..(b + 1) * w_out];
                let row = &prev[b * w_in..(b + 1) * w_in];
                for (o, &dzo) in dz.iter().enumerate() {
                    let wrow = &mut grads.weights[l][o * w_in..(o + 1) * w_in];
                    for (g, &xi) in wrow.iter_mut().zip(row) {
                        *g = *g + dzo * xi;
                    }
                    grads.biases[l][o] = grads.biases[l][o] + dzo;
                }
            }
            if l > 0 {
                let mut d_prev = vec![T::zero(); batch * w_in];
                for b in 0..batch {
                    let dz = &d_act[b * w_out..(b + 1) * w_out];
                    let dst = &mut d_prev[b * w_in..(b + 1) * w_in];
                    for (o, &dzo) in dz.iter().enumerate() {
                        let wrow = &self.weights[l][o * w_in..(o + 1) * w_in];
                        for (d, &wi) in dst.iter_mut().zip(wrow) {
                            *d = *d + dzo * wi;
                        }
                    }
                }
                d_act = d_prev;
            }
        }
        Ok(())
    }

    pub fn flatten_into(&self, out: &mut Vec<T>) {
        for l in 0..self.n_layers() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
    }

    pub fn read_from<'a>(&mut self, mut src: impl Iterator<Item = &'a T>) -> Result<()>
    where
        T: 'a,
    {
        for l in 0..self.widths.len() - 1 {
            for w in &mut self.weights[l] {
                *w = *src.next().ok_or(Error::ShapeMismatch { expected: 1, got: 0 })?;
            }
            for b in &mut self.biases[l] {
                *b = *src.next().ok_or(Error::ShapeMismatch { expected: 1, got: 0 })?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_net_outputs_bias() {
        let mut net = Mlp::<f64>::zeros(&[3, 2]).unwrap();
        net.biases[0] = vec![0.7, -0.2];
        let y = net.forward_one(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y, vec![0.7, -0.2]);
    }

    #[test]
    fn single_linear_layer_is_matvec() {
        let mut net = Mlp::<f64>::zeros(&[2, 2]).unwrap();
        net.weights[0] = vec![1.0, 2.0, 3.0, 4.0];
        net.biases[0] = vec![0.5, -0.5];
        let y = net.forward_one(&[1.0, 1.0]).unwrap();
        assert_eq!(y, vec![3.5, 6.5]);
    }

    #[test]
    fn hidden_layer_applies_tanh() {
        let mut net = Mlp::<f64>::zeros(&[1, 1, 1]).unwrap();
        net.weights[0] = vec![1.0];
        net.weights[1] = vec![1.0];
        let y = net.forward_one(&[0.3]).unwrap();
        assert!((y[0] - 0.3f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::<f64>::init_uniform(&[16, 8, 4], &mut rng).unwrap();
        let bound0 = 1.0 / 4.0;
        assert!(net.weights[0].iter().all(|w| w.abs() < bound0));
        let bound1 = 1.0 / (8.0f64).sqrt();
        assert!(net.weights[1].iter().all(|w| w.abs() < bound1));
        // seeded init is reproducible
        let mut rng2 = ChaCha8Rng::seed_from_u64(1);
        let net2 = Mlp::<f64>::init_uniform(&[16, 8, 4], &mut rng2).unwrap();
        assert_eq!(net, net2);
    }

    #[test]
    fn flatten_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::<f64>::init_uniform(&[3, 4, 2], &mut rng).unwrap();
        let mut flat = Vec::new();
        net.flatten_into(&mut flat);
        assert_eq!(flat.len(), net.param_count());
        let mut copy = Mlp::<f64>::zeros(&[3, 4, 2]).unwrap();
        copy.read_from(flat.iter()).unwrap();
        assert_eq!(net, copy);
    }

    /// Finite-difference probe of the batched reverse pass on a tanh net.
    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::<f64>::init_uniform(&[2, 3, 2], &mut rng).unwrap();
        let batch = 4;
        let x: Vec<f64> = (0..batch * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let target: Vec<f64> = (0..batch * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let loss = |n: &Mlp<f64>| -> f64 {
            let out = n.forward_batch(&x, batch).unwrap().last().unwrap().clone();
            out.iter().zip(&target).map(|(o, t)| (o - t) * (o - t)).sum::<f64>()
                / (batch * 2) as f64
        };

        let acts = net.forward_batch(&x, batch).unwrap();
        let out = acts.last().unwrap();
        let d_out: Vec<f64> = out
            .iter()
            .zip(&target)
            .map(|(o, t)| 2.0 * (o - t) / (batch * 2) as f64)
            .collect();
        let mut grads = Mlp::<f64>::zeros(&[2, 3, 2]).unwrap();
        net.backward_batch(&acts, &d_out, batch, &mut grads).unwrap();

        let mut flat = Vec::new();
        grads.flatten_into(&mut flat);
        let step = 1e-6;
        let mut idx = 0;
        for l in 0..net.n_layers() {
            for kind in 0..2 {
                let len =
                    if kind == 0 { net.weights[l].len() } else { net.biases[l].len() };
                for j in 0..len {
                    let mut plus = net.clone();
                    let mut minus = net.clone();
                    if kind == 0 {
                        plus.weights[l][j] += step;
                        minus.weights[l][j] -= step;
                    } else {
                        plus.biases[l][j] += step;
                        minus.biases[l][j] -= step;
                    }
                    let fd = (loss(&plus) - loss(&minus)) / (2.0 * step);
                    let an = flat[idx];
                    assert!(
                        (fd - an).abs() <= 1e-7 * an.abs().max(1.0),
                        "layer {l} kind {kind} index {j}: fd {fd} vs analytic {an}"
                    );
                    idx += 1;
                }
            }
        }
    }
}
