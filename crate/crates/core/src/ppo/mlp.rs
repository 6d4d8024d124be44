//! Fully connected network with manual backpropagation.
//!
//! All parameters live in one flat buffer: for each layer the weight matrix
//! `[inputs, outputs]` in row-major order, then the bias. Gradients use the
//! same layout, which keeps optimizers and checkpoints trivial.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Elu,
    Identity,
}

impl Activation {
    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Elu if x <= T::zero() => x.exp() - T::one(),
            _ => x,
        }
    }

    /// Derivative expressed through the pre-activation.
    fn derivative<T: Real>(self, x: T) -> T {
        match self {
            Activation::Elu if x <= T::zero() => x.exp(),
            _ => T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    dims: Vec<usize>,
    activation: Activation,
    params: Vec<T>,
}

/// Intermediate values kept by [`Mlp::forward_train`] for the backward pass.
#[derive(Debug, Clone)]
pub struct Tape<T> {
    /// Input to each layer; `inputs[0]` is the network input.
    inputs: Vec<Array2<T>>,
    /// Pre-activation of each hidden layer.
    pre: Vec<Array2<T>>,
}

fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl<T: Real> Mlp<T> {
    /// Zero-initialized network. `dims` lists the input width, hidden widths and output width.
    pub fn zeros(dims: &[usize], activation: Activation) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::contract(format!("invalid layer dims {dims:?}")));
        }
        Ok(Self {
            dims: dims.to_vec(),
            activation,
            params: vec![T::zero(); param_count(dims)],
        })
    }

    /// Uniform Glorot initialization with zero biases; the last layer is
    /// additionally scaled by `output_gain`.
    pub fn new<R: Rng + ?Sized>(dims: &[usize], activation: Activation, output_gain: f64, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(dims, activation)?;
        let layers = net.num_layers();
        let mut off = 0;
        for l in 0..layers {
            let (i, o) = (dims[l], dims[l + 1]);
            let mut a = (6.0 / (i + o) as f64).sqrt();
            if l + 1 == layers {
                a *= output_gain;
            }
            for p in &mut net.params[off..off + i * o] {
                *p = T::lit(rng.random_range(-a..=a));
            }
            off += i * o + o;
        }
        Ok(net)
    }

    /// Rebuilds a network from a flat parameter vector.
    pub fn from_params(dims: &[usize], activation: Activation, params: Vec<T>) -> Result<Self> {
        let mut net = Self::zeros(dims, activation)?;
        if params.len() != net.params.len() {
            return Err(Error::contract(format!(
                "expected {} parameters for dims {dims:?}, got {}",
                net.params.len(),
                params.len()
            )));
        }
        net.params = params;
        Ok(net)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("at least two dims")
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    fn offsets(&self, l: usize) -> (usize, usize, usize) {
        let off: usize = self.dims[..l + 1]
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum();
        let (i, o) = (self.dims[l], self.dims[l + 1]);
        (off, i, o)
    }

    fn layer(&self, l: usize) -> (ArrayView2<'_, T>, ArrayView1<'_, T>) {
        let (off, i, o) = self.offsets(l);
        let w = ArrayView2::from_shape((i, o), &self.params[off..off + i * o]).expect("layout");
        let b = ArrayView1::from(&self.params[off + i * o..off + i * o + o]);
        (w, b)
    }

    fn check_input(&self, x: &ArrayView2<'_, T>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::contract(format!(
                "input has {} columns, network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn affine(&self, l: usize, x: &ArrayView2<'_, T>) -> Array2<T> {
        let (w, b) = self.layer(l);
        let mut z = Array2::zeros((x.nrows(), w.ncols()));
        general_mat_mul(T::one(), x, &w, T::zero(), &mut z);
        z.zip_mut_with(&b, |z, &b| *z = *z + b);
        z
    }

    /// Batched forward pass; rows are samples.
    pub fn forward(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.check_input(&x)?;
        let layers = self.num_layers();
        let mut h = self.affine(0, &x);
        for l in 1..layers {
            h.mapv_inplace(|v| self.activation.apply(v));
            h = self.affine(l, &h.view());
        }
        Ok(h)
    }

    /// Forward pass that records what [`Mlp::backward`] needs.
    pub fn forward_train(&self, x: ArrayView2<'_, T>) -> Result<(Array2<T>, Tape<T>)> {
        self.check_input(&x)?;
        let layers = self.num_layers();
        let mut tape = Tape {
            inputs: Vec::with_capacity(layers),
            pre: Vec::with_capacity(layers - 1),
        };
        tape.inputs.push(x.to_owned());
        let mut z = self.affine(0, &x);
        for l in 1..layers {
            let h = z.mapv(|v| self.activation.apply(v));
            tape.pre.push(z);
            z = self.affine(l, &h.view());
            tape.inputs.push(h);
        }
        Ok((z, tape))
    }

    /// Accumulates parameter gradients into `grads` (same layout as the
    /// parameters) and returns the gradient with respect to the input.
    pub fn backward(&self, tape: &Tape<T>, grad_out: ArrayView2<'_, T>, grads: &mut [T]) -> Result<Array2<T>> {
        if grads.len() != self.params.len() {
            return Err(Error::contract("gradient buffer has the wrong length"));
        }
        let batch = tape.inputs[0].nrows();
        if grad_out.dim() != (batch, self.output_dim()) {
            return Err(Error::contract(format!(
                "output gradient has shape {:?}, expected {:?}",
                grad_out.dim(),
                (batch, self.output_dim())
            )));
        }
        let mut delta = grad_out.to_owned();
        for l in (0..self.num_layers()).rev() {
            let (off, i, o) = self.offsets(l);
            {
                let (gw, gb) = grads[off..off + i * o + o].split_at_mut(i * o);
                let mut gw = ArrayViewMut2::from_shape((i, o), gw).expect("layout");
                general_mat_mul(T::one(), &tape.inputs[l].t(), &delta, T::one(), &mut gw);
                let mut gb = ArrayViewMut1::from(gb);
                gb.zip_mut_with(&delta.sum_axis(Axis(0)), |g, &d| *g = *g + d);
            }
            let (w, _) = self.layer(l);
            let mut dx = Array2::zeros((batch, i));
            general_mat_mul(T::one(), &delta, &w.t(), T::zero(), &mut dx);
            if l > 0 {
                let act = self.activation;
                ndarray::Zip::from(&mut dx)
                    .and(&tape.pre[l - 1])
                    .for_each(|d, &z| *d = *d * act.derivative(z));
            }
            delta = dx;
        }
        Ok(delta)
    }
}
