//! Fully connected feed-forward networks with a single output.
//!
//! Parameters live in one flat vector, layer by layer: the weight matrix
//! (`in × out`, row-major, so entry `(i, j)` connects input `i` to output `j`)
//! followed by the bias vector.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlpError {
    #[error("input has {got} entries, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter vector has {got} entries, network expects {expected}")]
    ParameterCount { expected: usize, got: usize },
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Self::Tanh => tanh(z),
            Self::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn derivative(self, a: f64) -> f64 {
        match self {
            Self::Tanh => 1.0 - a * a,
            Self::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    Logistic,
    Identity,
}

/// `tanh` through one exponential, within a few ulp of `f64::tanh` and
/// several times cheaper.
fn tanh(z: f64) -> f64 {
    if z.abs() > 20.0 {
        return z.signum();
    }
    if z.abs() < 1e-4 {
        return z.tanh();
    }
    let e = (2.0 * z).exp();
    (e - 1.0) / (e + 1.0)
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Layer widths from input to the single output, hidden activations and output head.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    pub activations: Vec<Activation>,
    pub head: Head,
}

impl MlpSpec {
    /// `inputs → hidden[0] → … → 1` with one activation throughout.
    pub fn new(inputs: usize, hidden: &[usize], activation: Activation, head: Head) -> Self {
        let mut widths = vec![inputs];
        widths.extend_from_slice(hidden);
        widths.push(1);
        Self { widths, activations: vec![activation; hidden.len()], head }
    }

    pub fn validate(&self) -> Result<(), MlpError> {
        if self.widths.len() < 3 {
            return Err(MlpError::InvalidSpec("at least one hidden layer is required".into()));
        }
        if self.widths.contains(&0) {
            return Err(MlpError::InvalidSpec("layer widths must be at least 1".into()));
        }
        if *self.widths.last().unwrap() != 1 {
            return Err(MlpError::InvalidSpec("output width must be 1".into()));
        }
        if self.activations.len() != self.widths.len() - 2 {
            return Err(MlpError::InvalidSpec("one activation per hidden layer".into()));
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        self.widths[0]
    }

    pub fn parameter_count(&self) -> usize {
        self.widths.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.widths.windows(2).scan(0, |offset, w| {
            let start = *offset;
            *offset += w[1] * (w[0] + 1);
            Some((start, w[0], w[1]))
        })
    }
}

/// Loss function of a training task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// Binary cross-entropy on the pre-logistic output.
    CrossEntropy,
    MeanSquared,
}

impl Loss {
    /// Loss of raw output `z` against `y`, and its derivative in `z`.
    pub fn eval(self, z: f64, y: f64) -> (f64, f64) {
        match self {
            Self::CrossEntropy => {
                // log(1 + e^z) − y z, evaluated without overflow.
                let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
                (softplus - y * z, logistic(z) - y)
            }
            Self::MeanSquared => {
                let r = z - y;
                (r * r, 2.0 * r)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    spec: MlpSpec,
    params: Vec<f64>,
}

/// Per-sample scratch space for forward and backward passes.
#[derive(Debug, Default)]
pub struct Workspace {
    activations: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
    input: Vec<f64>,
}

impl Workspace {
    /// Buffer for a caller-side input transform, kept apart from the layer activations.
    pub fn input_buffer(&mut self) -> &mut Vec<f64> {
        &mut self.input
    }
}

impl Mlp {
    pub fn from_parameters(spec: MlpSpec, params: Vec<f64>) -> Result<Self, MlpError> {
        spec.validate()?;
        let expected = spec.parameter_count();
        if params.len() != expected {
            return Err(MlpError::ParameterCount { expected, got: params.len() });
        }
        Ok(Self { spec, params })
    }

    pub fn zeros(spec: MlpSpec) -> Result<Self, MlpError> {
        let n = spec.parameter_count();
        Self::from_parameters(spec, vec![0.0; n])
    }

    /// Glorot-uniform weights (He-uniform under rectifiers), zero biases.
    pub fn random<R: Rng>(spec: MlpSpec, rng: &mut R) -> Result<Self, MlpError> {
        let mut net = Self::zeros(spec)?;
        let layers: Vec<_> = net.spec.layers().collect();
        for (l, (start, fan_in, fan_out)) in layers.into_iter().enumerate() {
            let relu = net.spec.activations.get(l) == Some(&Activation::Relu);
            let limit = if relu { (6.0 / fan_in as f64).sqrt() } else { (6.0 / (fan_in + fan_out) as f64).sqrt() };
            for w in &mut net.params[start..start + fan_in * fan_out] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(net)
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn check_input(&self, x: &[f64]) -> Result<(), MlpError> {
        if x.len() != self.spec.inputs() {
            return Err(MlpError::DimensionMismatch { expected: self.spec.inputs(), got: x.len() });
        }
        Ok(())
    }

    /// Output before the head.
    pub fn raw(&self, x: &[f64]) -> Result<f64, MlpError> {
        self.check_input(x)?;
        let mut ws = Workspace::default();
        Ok(self.forward_into(x, &mut ws))
    }

    /// Network output: a probability under a logistic head.
    pub fn forward(&self, x: &[f64]) -> Result<f64, MlpError> {
        self.forward_with(x, &mut Workspace::default())
    }

    /// As [`Mlp::forward`], reusing scratch space.
    pub fn forward_with(&self, x: &[f64], ws: &mut Workspace) -> Result<f64, MlpError> {
        self.check_input(x)?;
        let z = self.forward_into(x, ws);
        Ok(match self.spec.head {
            Head::Logistic => logistic(z),
            Head::Identity => z,
        })
    }

    fn forward_into(&self, x: &[f64], ws: &mut Workspace) -> f64 {
        let n_layers = self.spec.widths.len() - 1;
        ws.activations.resize_with(n_layers + 1, Vec::new);
        ws.activations[0].clear();
        ws.activations[0].extend_from_slice(x);
        for (l, (start, fan_in, fan_out)) in self.spec.layers().enumerate() {
            let (done, rest) = ws.activations.split_at_mut(l + 1);
            let input = &done[l];
            let out = &mut rest[0];
            let weights = &self.params[start..start + fan_in * fan_out];
            out.clear();
            out.extend_from_slice(&self.params[start + fan_in * fan_out..start + fan_out * (fan_in + 1)]);
            for (row, &a) in weights.chunks_exact(fan_out).zip(input.iter()) {
                for (o, w) in out.iter_mut().zip(row) {
                    *o += w * a;
                }
            }
            if let Some(act) = self.spec.activations.get(l) {
                out.iter_mut().for_each(|o| *o = act.apply(*o));
            }
        }
        ws.activations[n_layers][0]
    }

    /// Add `weight · ∂loss/∂params` of one sample to `grad`; returns the sample loss.
    pub fn accumulate_gradient(
        &self,
        x: &[f64],
        y: f64,
        weight: f64,
        loss: Loss,
        grad: &mut [f64],
        ws: &mut Workspace,
    ) -> f64 {
        let z = self.forward_into(x, ws);
        let (value, dz) = loss.eval(z, y);
        let layers: Vec<_> = self.spec.layers().collect();
        ws.deltas.resize_with(layers.len(), Vec::new);
        let last = layers.len() - 1;
        ws.deltas[last].clear();
        ws.deltas[last].push(weight * dz);
        for l in (0..layers.len()).rev() {
            let (start, fan_in, fan_out) = layers[l];
            let input = &ws.activations[l];
            {
                let delta = &ws.deltas[l];
                let (gw, gb) = grad[start..start + fan_out * (fan_in + 1)].split_at_mut(fan_in * fan_out);
                for (g, d) in gb.iter_mut().zip(delta) {
                    *g += d;
                }
                for (row, &a) in gw.chunks_exact_mut(fan_out).zip(input.iter()) {
                    for (g, d) in row.iter_mut().zip(delta) {
                        *g += d * a;
                    }
                }
            }
            if l > 0 {
                let act = self.spec.activations[l - 1];
                let weights = &self.params[start..start + fan_in * fan_out];
                let mut prev = std::mem::take(&mut ws.deltas[l - 1]);
                prev.clear();
                for (row, a) in weights.chunks_exact(fan_out).zip(input.iter()) {
                    let back = row.iter().zip(&ws.deltas[l]).fold(0.0, |acc, (w, d)| acc + w * d);
                    prev.push(back * act.derivative(*a));
                }
                ws.deltas[l - 1] = prev;
            }
        }
        value
    }

    /// Weighted mean loss over a batch and its parameter gradient.
    pub fn loss_and_gradient(
        &self,
        xs: &[&[f64]],
        ys: &[f64],
        weights: &[f64],
        loss: Loss,
    ) -> Result<(f64, Vec<f64>), MlpError> {
        let mut grad = vec![0.0; self.params.len()];
        let mut ws = Workspace::default();
        let total: f64 = weights.iter().sum();
        let mut value = 0.0;
        for ((x, &y), &w) in xs.iter().zip(ys).zip(weights) {
            self.check_input(x)?;
            value += w * self.accumulate_gradient(x, y, w / total, loss, &mut grad, &mut ws);
        }
        Ok((value / total, grad))
    }

    /// Weighted mean loss over a batch.
    pub fn loss(&self, xs: &[&[f64]], ys: &[f64], weights: &[f64], loss: Loss) -> Result<f64, MlpError> {
        let mut ws = Workspace::default();
        let mut value = 0.0;
        let mut total = 0.0;
        for ((x, &y), &w) in xs.iter().zip(ys).zip(weights) {
            self.check_input(x)?;
            value += w * loss.eval(self.forward_into(x, &mut ws), y).0;
            total += w;
        }
        Ok(value / total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights() {
        let id = Mlp::zeros(MlpSpec::new(3, &[4], Activation::Tanh, Head::Identity)).unwrap();
        assert_eq!(id.forward(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let lg = Mlp::zeros(MlpSpec::new(3, &[4], Activation::Relu, Head::Logistic)).unwrap();
        assert_eq!(lg.forward(&[1.0, 2.0, 3.0]).unwrap(), 0.5);
    }

    #[test]
    fn hand_computed_single_unit() {
        // h = tanh(0.5 x0 − 0.25 x1 + 0.1), y = 2 h − 0.3; one output so in×out equals out×in
        let spec = MlpSpec::new(2, &[1], Activation::Tanh, Head::Identity);
        let net = Mlp::from_parameters(spec, vec![0.5, -0.25, 0.1, 2.0, -0.3]).unwrap();
        let y = net.forward(&[1.0, 2.0]).unwrap();
        assert!((y - (2.0 * 0.1f64.tanh() - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let net = Mlp::zeros(MlpSpec::new(3, &[2], Activation::Tanh, Head::Identity)).unwrap();
        assert_eq!(net.forward(&[1.0]), Err(MlpError::DimensionMismatch { expected: 3, got: 1 }));
    }

    #[test]
    fn spec_validation() {
        let no_hidden = MlpSpec { widths: vec![3, 1], activations: vec![], head: Head::Identity };
        assert!(no_hidden.validate().is_err());
        assert!(MlpSpec::new(3, &[0], Activation::Tanh, Head::Identity).validate().is_err());
        assert_eq!(MlpSpec::new(11, &[8, 4], Activation::Tanh, Head::Identity).parameter_count(), 96 + 36 + 5);
    }

    #[test]
    fn cross_entropy_is_stable() {
        let (l, d) = Loss::CrossEntropy.eval(800.0, 0.0);
        assert!((l - 800.0).abs() < 1e-9 && (d - 1.0).abs() < 1e-12);
        let (l, _) = Loss::CrossEntropy.eval(-800.0, 0.0);
        assert!(l.abs() < 1e-300);
    }
}
