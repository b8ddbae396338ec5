//! Dense feedforward network `w^h(x, y; θ)` evaluated on jets.
//!
//! Hidden layers apply an affine map followed by `tanh`; the output layer is
//! affine only. Parameters live in one flat vector, layer by layer, each layer
//! stored as its row-major weight matrix `W[out][in]` followed by its bias.
//!
//! Parameter gradients of derivative-containing losses are computed by reverse
//! accumulation where every adjoint is itself jet-shaped: the forward pass keeps
//! each hidden layer's output jets and the `tanh'` jets, and the backward pass
//! applies the transpose of the jet product with `tanh'` at every neuron.

use std::ops::{Deref, DerefMut};

use ndarray::{linalg::general_mat_mul, Array2, ArrayView1, ArrayView2, ArrayViewMut2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, LEN};

pub const INPUT_DIM: usize = 2;
pub const OUTPUT_DIM: usize = 1;
pub const MAX_HIDDEN_LAYERS: usize = 8;

/// Points handled by one pass of the batched engine. Gradient contributions
/// are summed chunk by chunk in index order, so results do not depend on how
/// chunks are scheduled across threads.
pub const CHUNK_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub hidden_layers: usize,
    pub neurons: usize,
    #[serde(default)]
    pub activation: Activation,
    /// Box `[xmin, xmax, ymin, ymax]` mapped affinely onto `[-1, 1]²` before
    /// the first layer. Without it coordinates enter unchanged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_box: Option<[f64; 4]>,
    /// Constant factor applied to the output layer, so the trainable part
    /// works at unit scale when the deflection is small.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_scale: Option<f64>,
}

impl Architecture {
    pub fn new(hidden_layers: usize, neurons: usize) -> Result<Self> {
        let arch = Architecture {
            hidden_layers,
            neurons,
            activation: Activation::Tanh,
            input_box: None,
            output_scale: None,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers == 0 || self.hidden_layers > MAX_HIDDEN_LAYERS {
            return Err(Error::Architecture(format!(
                "hidden layer count must be in 1..={MAX_HIDDEN_LAYERS}, got {}",
                self.hidden_layers
            )));
        }
        if self.neurons == 0 {
            return Err(Error::Architecture("neurons per layer must be positive".into()));
        }
        if let Some(b) = self.input_box {
            if !(b.iter().all(|v| v.is_finite()) && b[1] > b[0] && b[3] > b[2]) {
                return Err(Error::Architecture(format!("input box must be finite and nonempty, got {b:?}")));
            }
        }
        if let Some(s) = self.output_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Architecture(format!("output scale must be finite and positive, got {s}")));
            }
        }
        Ok(())
    }

    pub fn with_output_scale(mut self, scale: f64) -> Result<Self> {
        self.output_scale = Some(scale);
        self.validate()?;
        Ok(self)
    }

    pub fn output_factor(&self) -> f64 {
        self.output_scale.unwrap_or(1.0)
    }

    pub fn with_input_box(mut self, input_box: [f64; 4]) -> Result<Self> {
        self.input_box = Some(input_box);
        self.validate()?;
        Ok(self)
    }

    /// `(scale, offset)` per coordinate of the input map `u = scale · x + offset`.
    pub fn input_map(&self) -> [(f64, f64); 2] {
        match self.input_box {
            None => [(1.0, 0.0), (1.0, 0.0)],
            Some([x0, x1, y0, y1]) => {
                let (sx, sy) = (2.0 / (x1 - x0), 2.0 / (y1 - y0));
                [(sx, -1.0 - sx * x0), (sy, -1.0 - sy * y0)]
            }
        }
    }

    /// `[2, n, …, n, 1]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_layers + 2);
        sizes.push(INPUT_DIM);
        sizes.extend(std::iter::repeat_n(self.neurons, self.hidden_layers));
        sizes.push(OUTPUT_DIM);
        sizes
    }

    /// Number of affine layers (hidden plus output).
    pub fn num_layers(&self) -> usize {
        self.hidden_layers + 1
    }

    /// Total parameter count `K`.
    pub fn num_params(&self) -> usize {
        self.layer_sizes()
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Offsets and shapes of each layer inside the flat parameter vector.
    pub fn layout(&self) -> Vec<LayerLayout> {
        let mut offset = 0;
        self.layer_sizes()
            .windows(2)
            .map(|w| {
                let l = LayerLayout {
                    offset,
                    fan_in: w[0],
                    fan_out: w[1],
                };
                offset += w[0] * w[1] + w[1];
                l
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerLayout {
    pub offset: usize,
    pub fan_in: usize,
    pub fan_out: usize,
}

impl LayerLayout {
    pub fn weights_range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.fan_in * self.fan_out
    }

    pub fn bias_range(&self) -> std::ops::Range<usize> {
        let start = self.offset + self.fan_in * self.fan_out;
        start..start + self.fan_out
    }
}

/// Weight initialization. Both schemes draw weights with variance `1/fan_in`
/// and set biases to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    #[default]
    ScaledNormal,
    ScaledUniform,
}

/// Flat parameter vector together with the architecture it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    arch: Architecture,
    values: Vec<f64>,
}

impl Parameters {
    pub fn zeros(arch: &Architecture) -> Self {
        Parameters {
            arch: arch.clone(),
            values: vec![0.0; arch.num_params()],
        }
    }

    pub fn from_flat(arch: &Architecture, values: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        let expected = arch.num_params();
        if values.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Parameters {
            arch: arch.clone(),
            values,
        })
    }

    pub fn initialize(arch: &Architecture, scheme: InitScheme, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Parameters::zeros(arch);
        for layer in arch.layout() {
            let scale = (1.0 / layer.fan_in as f64).sqrt();
            let weights = &mut params.values[layer.weights_range()];
            match scheme {
                InitScheme::ScaledNormal => {
                    let dist = Normal::new(0.0, scale).expect("positive std");
                    weights.iter_mut().for_each(|w| *w = dist.sample(&mut rng));
                }
                InitScheme::ScaledUniform => {
                    let half = 3f64.sqrt() * scale;
                    let dist = Uniform::new_inclusive(-half, half).expect("finite bounds");
                    weights.iter_mut().for_each(|w| *w = dist.sample(&mut rng));
                }
            }
        }
        params
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn weights(&self, layer: &LayerLayout) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((layer.fan_out, layer.fan_in), &self.values[layer.weights_range()])
            .expect("layout matches parameter length")
    }

    fn bias(&self, layer: &LayerLayout) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.values[layer.bias_range()])
    }

    /// `w^h(x, y)`.
    pub fn forward_scalar(&self, x: f64, y: f64) -> f64 {
        let [(sx, ox), (sy, oy)] = self.arch.input_map();
        let mut act = vec![sx * x + ox, sy * y + oy];
        let layout = self.arch.layout();
        let last = layout.len() - 1;
        for (l, layer) in layout.iter().enumerate() {
            let w = &self.values[layer.weights_range()];
            let b = &self.values[layer.bias_range()];
            let mut next: Vec<f64> = (0..layer.fan_out)
                .map(|j| {
                    let row = &w[j * layer.fan_in..(j + 1) * layer.fan_in];
                    row.iter().zip(&act).map(|(w, a)| w * a).sum::<f64>() + b[j]
                })
                .collect();
            if l != last {
                next.iter_mut().for_each(|a| *a = a.tanh());
            }
            act = next;
        }
        act[0] * self.arch.output_factor()
    }

    /// Full order-4 jet of `w^h` at `(x, y)`, one point at a time.
    pub fn forward_jet(&self, x: f64, y: f64) -> Jet {
        let [(sx, ox), (sy, oy)] = self.arch.input_map();
        let mut act = vec![Jet::variable_x(x, y).scale(sx) + ox, Jet::variable_y(x, y).scale(sy) + oy];
        let layout = self.arch.layout();
        let last = layout.len() - 1;
        for (l, layer) in layout.iter().enumerate() {
            let w = &self.values[layer.weights_range()];
            let b = &self.values[layer.bias_range()];
            let mut next: Vec<Jet> = (0..layer.fan_out)
                .map(|j| {
                    let row = &w[j * layer.fan_in..(j + 1) * layer.fan_in];
                    let mut a = Jet::constant(b[j]);
                    for (wk, yk) in row.iter().zip(&act) {
                        a += yk.scale(*wk);
                    }
                    a
                })
                .collect();
            if l != last {
                next.iter_mut().for_each(|a| *a = a.tanh());
            }
            act = next;
        }
        act[0].scale(self.arch.output_factor())
    }

    /// Jets of `w^h` at many points using the batched engine.
    pub fn forward_jets(&self, points: &[[f64; 2]]) -> Vec<Jet> {
        points
            .par_chunks(CHUNK_POINTS)
            .flat_map_iter(|chunk| {
                let tape = ChunkTape::forward(self, chunk);
                tape.output_jets()
            })
            .collect()
    }

    /// Sum over points of a per-point loss on the output jet, with its exact
    /// gradient with respect to every parameter.
    ///
    /// `point_loss(i, jet)` returns the contribution of point `i` and the
    /// derivative of that contribution with respect to each jet component.
    pub fn loss_gradient<F>(&self, points: &[[f64; 2]], point_loss: F) -> Result<(f64, GradientVector)>
    where
        F: Fn(usize, &Jet) -> (f64, Jet) + Sync,
    {
        let eval = self.pointwise_loss_gradient(points, point_loss);
        let loss: f64 = eval.contributions.iter().sum();
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss);
        }
        Ok((loss, eval.gradient))
    }

    /// Like [`loss_gradient`](Self::loss_gradient) but keeps the per-point
    /// contributions so callers can split the total into groups.
    pub fn pointwise_loss_gradient<F>(&self, points: &[[f64; 2]], point_loss: F) -> PointwiseEval
    where
        F: Fn(usize, &Jet) -> (f64, Jet) + Sync,
    {
        let k = self.values.len();
        let partials: Vec<(Vec<f64>, Vec<f64>)> = points
            .par_chunks(CHUNK_POINTS)
            .enumerate()
            .map(|(c, chunk)| {
                let base = c * CHUNK_POINTS;
                let tape = ChunkTape::forward(self, chunk);
                let mut contributions = Vec::with_capacity(chunk.len());
                let mut seed = Array2::<f64>::zeros((1, LEN * chunk.len()));
                {
                    let row = seed.as_slice_mut().expect("standard layout");
                    for (p, jet) in tape.output_jets().iter().enumerate() {
                        let (value, adj) = point_loss(base + p, jet);
                        contributions.push(value);
                        row[p * LEN..(p + 1) * LEN].copy_from_slice(adj.coeffs());
                    }
                }
                let mut grad = vec![0.0; k];
                tape.backward(self, seed, &mut grad);
                (contributions, grad)
            })
            .collect();

        let mut contributions = Vec::with_capacity(points.len());
        let mut gradient = vec![0.0; k];
        for (c, g) in partials {
            contributions.extend(c);
            gradient.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        PointwiseEval {
            contributions,
            gradient: GradientVector(gradient),
        }
    }
}

pub struct PointwiseEval {
    pub contributions: Vec<f64>,
    pub gradient: GradientVector,
}

/// `∂loss/∂θ`, aligned with the flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientVector(pub Vec<f64>);

impl Deref for GradientVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for GradientVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Forward values kept for the backward pass over one chunk of points.
///
/// Every matrix has one row per neuron and `15 · points` columns; the 15
/// components of a point's jet are contiguous.
struct ChunkTape {
    points: usize,
    /// Layer inputs: `inputs[0]` holds the coordinate seeds, `inputs[l]` the
    /// outputs of hidden layer `l`.
    inputs: Vec<Array2<f64>>,
    /// `tanh'` jets of each hidden layer's preactivation.
    slopes: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl ChunkTape {
    fn forward(params: &Parameters, chunk: &[[f64; 2]]) -> Self {
        let n = chunk.len();
        let cols = LEN * n;
        let [(sx, ox), (sy, oy)] = params.arch.input_map();
        let mut seed = Array2::<f64>::zeros((INPUT_DIM, cols));
        for (p, &[x, y]) in chunk.iter().enumerate() {
            seed[[0, p * LEN]] = sx * x + ox;
            seed[[0, p * LEN + 1]] = sx;
            seed[[1, p * LEN]] = sy * y + oy;
            seed[[1, p * LEN + 2]] = sy;
        }

        let layout = params.arch.layout();
        let last = layout.len() - 1;
        let mut inputs = vec![seed];
        let mut slopes = Vec::with_capacity(last);
        let mut output = Array2::zeros((OUTPUT_DIM, cols));
        for (l, layer) in layout.iter().enumerate() {
            let mut pre = Array2::<f64>::zeros((layer.fan_out, cols));
            general_mat_mul(1.0, &params.weights(layer), &inputs[l], 0.0, &mut pre);
            let bias = params.bias(layer);
            for (mut row, b) in pre.outer_iter_mut().zip(bias.iter()) {
                let row = row.as_slice_mut().expect("standard layout");
                for p in 0..n {
                    row[p * LEN] += b;
                }
            }
            if l == last {
                output = pre * params.arch.output_factor();
                break;
            }
            let mut slope = Array2::<f64>::zeros((layer.fan_out, cols));
            for (mut pre_row, mut slope_row) in pre.outer_iter_mut().zip(slope.outer_iter_mut()) {
                let pre_row = pre_row.as_slice_mut().expect("standard layout");
                let slope_row = slope_row.as_slice_mut().expect("standard layout");
                for (a, d) in pre_row
                    .chunks_exact_mut(LEN)
                    .zip(slope_row.chunks_exact_mut(LEN))
                {
                    let jet = Jet::from_coeffs(a.try_into().expect("jet width"));
                    let (t, dt) = jet.tanh_with_derivative();
                    a.copy_from_slice(t.coeffs());
                    d.copy_from_slice(dt.coeffs());
                }
            }
            inputs.push(pre);
            slopes.push(slope);
        }
        ChunkTape {
            points: n,
            inputs,
            slopes,
            output,
        }
    }

    fn output_jets(&self) -> Vec<Jet> {
        let row = self.output.as_slice().expect("standard layout");
        row.chunks_exact(LEN)
            .map(|c| Jet::from_coeffs(c.try_into().expect("jet width")))
            .collect()
    }

    /// Accumulate `∂loss/∂θ` into `grad`, given the adjoint of the output jets.
    fn backward(&self, params: &Parameters, output_adjoint: Array2<f64>, grad: &mut [f64]) {
        let layout = params.arch.layout();
        let mut adj = output_adjoint * params.arch.output_factor();
        for (l, layer) in layout.iter().enumerate().rev() {
            let input = &self.inputs[l];
            {
                let mut gw = ArrayViewMut2::from_shape(
                    (layer.fan_out, layer.fan_in),
                    &mut grad[layer.weights_range()],
                )
                .expect("layout matches gradient length");
                general_mat_mul(1.0, &adj, &input.t(), 1.0, &mut gw);
            }
            let gb = &mut grad[layer.bias_range()];
            for (g, row) in gb.iter_mut().zip(adj.outer_iter()) {
                let row = row.as_slice().expect("standard layout");
                *g += (0..self.points).map(|p| row[p * LEN]).sum::<f64>();
            }
            if l == 0 {
                break;
            }
            // adjoint of this layer's input jets, then through tanh
            let mut upstream = Array2::<f64>::zeros((layer.fan_in, LEN * self.points));
            general_mat_mul(1.0, &params.weights(layer).t(), &adj, 0.0, &mut upstream);
            let slope = &self.slopes[l - 1];
            for (mut up_row, d_row) in upstream.outer_iter_mut().zip(slope.outer_iter()) {
                let up_row = up_row.as_slice_mut().expect("standard layout");
                let d_row = d_row.as_slice().expect("standard layout");
                for (g, d) in up_row.chunks_exact_mut(LEN).zip(d_row.chunks_exact(LEN)) {
                    let dt = Jet::from_coeffs(d.try_into().expect("jet width"));
                    let gj = Jet::from_coeffs((&*g).try_into().expect("jet width"));
                    g.copy_from_slice(dt.mul_transpose(&gj).coeffs());
                }
            }
            adj = upstream;
        }
    }
}

/// On-disk parameter file: architecture header plus the flat vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub format: String,
    pub architecture: Architecture,
    #[serde(default)]
    pub seed: Option<u64>,
    pub values: Vec<f64>,
}

pub const PARAMS_FORMAT: &str = "plate-dcm-params/1";

impl ParamsFile {
    pub fn new(params: &Parameters, seed: Option<u64>) -> Self {
        ParamsFile {
            format: PARAMS_FORMAT.to_string(),
            architecture: params.arch.clone(),
            seed,
            values: params.values.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ParamsFile =
            serde_json::from_str(text).map_err(|e| Error::ParamsFile(e.to_string()))?;
        if file.format != PARAMS_FORMAT {
            return Err(Error::ParamsFile(format!(
                "unsupported format tag '{}', expected '{PARAMS_FORMAT}'",
                file.format
            )));
        }
        Ok(file)
    }

    pub fn parameters(&self) -> Result<Parameters> {
        Parameters::from_flat(&self.architecture, self.values.clone())
            .map_err(|e| Error::ParamsFile(e.to_string()))
    }
}
