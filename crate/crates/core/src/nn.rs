//! Layered networks: architecture description, forward and backward passes,
//! weighted binary cross-entropy, momentum SGD and finite-difference checks.
//!
//! A network is a straight chain of [`Layer`]s that must end in
//! `dense{k} → sigmoid`. Only `conv3d` and `dense` carry parameters.
//!
//! # Architecture text
//!
//! One directive per line; blank lines and everything after `#` are ignored.
//!
//! ```text
//! input 1,15,32,32                      # per-sample shape, comma separated
//! outputs 4                             # k, must match the final dense layer
//! conv3d filters=8 kernel=3,3,3 stride=1,1,1
//! relu
//! maxpool3d window=2,2,2 stride=2,2,2
//! flatten
//! dense units=4
//! sigmoid
//! ```
//!
//! `stride` is optional: convolutions default to `1,1,1`, pooling defaults to
//! the window. [`ArchitectureSpec`]'s `Display` always writes it explicitly.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{self, Tensor, Triple};

/// Lower clamp applied to confidences before taking logarithms.
pub const LOG_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Conv3d { filters: usize, kernel: Triple, stride: Triple },
    Relu,
    MaxPool3d { window: Triple, stride: Triple },
    Flatten,
    Dense { units: usize },
    Sigmoid,
}

impl Layer {
    pub fn is_parametric(&self) -> bool {
        matches!(self, Layer::Conv3d { .. } | Layer::Dense { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Layer::Conv3d { .. } => "conv3d",
            Layer::Relu => "relu",
            Layer::MaxPool3d { .. } => "maxpool3d",
            Layer::Flatten => "flatten",
            Layer::Dense { .. } => "dense",
            Layer::Sigmoid => "sigmoid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchitectureSpec {
    pub input_shape: Vec<usize>,
    pub output_count: usize,
    pub layers: Vec<Layer>,
}

impl ArchitectureSpec {
    /// The default desk-scale network for `(1, 15, 32, 32)` windows.
    pub fn micro(k: usize) -> Self {
        ArchitectureSpec {
            input_shape: vec![1, 15, 32, 32],
            output_count: k,
            layers: vec![
                Layer::Conv3d { filters: 8, kernel: [3; 3], stride: [1; 3] },
                Layer::Relu,
                Layer::MaxPool3d { window: [2; 3], stride: [2; 3] },
                Layer::Conv3d { filters: 16, kernel: [3; 3], stride: [1; 3] },
                Layer::Relu,
                Layer::MaxPool3d { window: [2; 3], stride: [2; 3] },
                Layer::Flatten,
                Layer::Dense { units: 64 },
                Layer::Relu,
                Layer::Dense { units: k },
                Layer::Sigmoid,
            ],
        }
    }

    /// Same layers with a different input shape and head width.
    pub fn with_head(&self, input_shape: &[usize], k: usize) -> Self {
        let mut spec = self.clone();
        spec.input_shape = input_shape.to_vec();
        spec.output_count = k;
        if let Some(Layer::Dense { units }) = spec
            .layers
            .iter_mut()
            .rev()
            .find(|l| matches!(l, Layer::Dense { .. }))
        {
            *units = k;
        }
        spec
    }

    /// Per-sample activation shapes: `shapes[0]` is the input, `shapes[i + 1]`
    /// the output of layer `i`. Also checks the `dense{k} → sigmoid` head.
    pub fn shapes(&self) -> Result<Vec<Vec<usize>>> {
        if self.output_count == 0 {
            return Err(Error::Spec("output count must be >= 1".into()));
        }
        let shapes = self.chain_shapes()?;
        let n = self.layers.len();
        let tail_ok = n >= 2
            && self.layers[n - 1] == Layer::Sigmoid
            && self.layers[n - 2] == Layer::Dense { units: self.output_count };
        if !tail_ok {
            return Err(Error::Spec(format!(
                "network must end with `dense units={}` followed by `sigmoid`",
                self.output_count
            )));
        }
        Ok(shapes)
    }

    /// Shape propagation only, without the head check.
    fn chain_shapes(&self) -> Result<Vec<Vec<usize>>> {
        if self.input_shape.is_empty() || self.input_shape.contains(&0) {
            return Err(Error::Spec(format!(
                "input shape {:?} must be non-empty with positive extents",
                self.input_shape
            )));
        }
        let mut shapes = vec![self.input_shape.clone()];
        for (i, layer) in self.layers.iter().enumerate() {
            let cur = shapes.last().unwrap();
            let err = |msg: String| Error::Spec(format!("layer {i} ({}): {msg}", layer.name()));
            let next = match *layer {
                Layer::Conv3d { filters, kernel, stride } => {
                    let [_, d, h, w] = rank4(cur).ok_or_else(|| err(format!("needs [C,D,H,W], got {cur:?}")))?;
                    if filters == 0 || kernel.contains(&0) || stride.contains(&0) {
                        return Err(err("filters, kernel and stride must be >= 1".into()));
                    }
                    if kernel[0] > d || kernel[1] > h || kernel[2] > w {
                        return Err(err(format!("kernel {kernel:?} larger than input {cur:?}")));
                    }
                    vec![
                        filters,
                        tensor::valid_extent(d, kernel[0], stride[0]),
                        tensor::valid_extent(h, kernel[1], stride[1]),
                        tensor::valid_extent(w, kernel[2], stride[2]),
                    ]
                }
                Layer::MaxPool3d { window, stride } => {
                    let [c, d, h, w] = rank4(cur).ok_or_else(|| err(format!("needs [C,D,H,W], got {cur:?}")))?;
                    if window.contains(&0) || stride.contains(&0) {
                        return Err(err("window and stride must be >= 1".into()));
                    }
                    if window[0] > d || window[1] > h || window[2] > w {
                        return Err(err(format!("window {window:?} larger than input {cur:?}")));
                    }
                    vec![
                        c,
                        tensor::valid_extent(d, window[0], stride[0]),
                        tensor::valid_extent(h, window[1], stride[1]),
                        tensor::valid_extent(w, window[2], stride[2]),
                    ]
                }
                Layer::Flatten => vec![cur.iter().product()],
                Layer::Dense { units } => {
                    if cur.len() != 1 {
                        return Err(err(format!("needs a flat input, got {cur:?}; add flatten")));
                    }
                    if units == 0 {
                        return Err(err("units must be >= 1".into()));
                    }
                    vec![units]
                }
                Layer::Relu | Layer::Sigmoid => cur.clone(),
            };
            shapes.push(next);
        }
        Ok(shapes)
    }

    pub fn validate(&self) -> Result<()> {
        self.shapes().map(|_| ())
    }

    /// `(weights shape, bias shape)` for each parametric layer, in order.
    /// Only requires the layer shapes to chain.
    pub fn param_shapes(&self) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
        let shapes = self.chain_shapes()?;
        Ok(self
            .layers
            .iter()
            .enumerate()
            .filter_map(|(i, layer)| match *layer {
                Layer::Conv3d { filters, kernel, .. } => Some((
                    vec![filters, shapes[i][0], kernel[0], kernel[1], kernel[2]],
                    vec![filters],
                )),
                Layer::Dense { units } => Some((vec![units, shapes[i][0]], vec![units])),
                _ => None,
            })
            .collect())
    }
}

fn rank4(s: &[usize]) -> Option<[usize; 4]> {
    match *s {
        [c, d, h, w] => Some([c, d, h, w]),
        _ => None,
    }
}

/// Total scalar parameters (weights plus biases) of a valid spec.
pub fn param_count(spec: &ArchitectureSpec) -> Result<usize> {
    Ok(spec
        .param_shapes()?
        .iter()
        .map(|(w, b)| w.iter().product::<usize>() + b.iter().product::<usize>())
        .sum())
}

fn fmt_triple(t: &Triple) -> String {
    format!("{},{},{}", t[0], t[1], t[2])
}

impl fmt::Display for ArchitectureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let input: Vec<String> = self.input_shape.iter().map(|v| v.to_string()).collect();
        writeln!(f, "input {}", input.join(","))?;
        writeln!(f, "outputs {}", self.output_count)?;
        for layer in &self.layers {
            match layer {
                Layer::Conv3d { filters, kernel, stride } => writeln!(
                    f,
                    "conv3d filters={filters} kernel={} stride={}",
                    fmt_triple(kernel),
                    fmt_triple(stride)
                )?,
                Layer::MaxPool3d { window, stride } => writeln!(
                    f,
                    "maxpool3d window={} stride={}",
                    fmt_triple(window),
                    fmt_triple(stride)
                )?,
                Layer::Dense { units } => writeln!(f, "dense units={units}")?,
                other => writeln!(f, "{}", other.name())?,
            }
        }
        Ok(())
    }
}

fn parse_list(value: &str, line: usize) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Spec(format!("line {line}: `{value}` is not a list of integers")))
        })
        .collect()
}

fn parse_triple(value: &str, line: usize) -> Result<Triple> {
    let v = parse_list(value, line)?;
    v.try_into()
        .map_err(|_| Error::Spec(format!("line {line}: `{value}` must have exactly 3 entries")))
}

impl FromStr for ArchitectureSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut input_shape = None;
        let mut output_count = None;
        let mut layers = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let mut tokens = content.split_whitespace();
            let head = tokens.next().unwrap();
            let mut args = std::collections::BTreeMap::new();
            let mut positional = Vec::new();
            for tok in tokens {
                match tok.split_once('=') {
                    Some((k, v)) => {
                        if args.insert(k, v).is_some() {
                            return Err(Error::Spec(format!("line {line}: duplicate `{k}`")));
                        }
                    }
                    None => positional.push(tok),
                }
            }
            let layer = match head {
                "input" | "outputs" => {
                    let [value] = positional[..] else {
                        return Err(Error::Spec(format!("line {line}: `{head}` takes one value")));
                    };
                    if head == "input" {
                        input_shape = Some(parse_list(value, line)?);
                    } else {
                        output_count = Some(value.parse::<usize>().map_err(|_| {
                            Error::Spec(format!("line {line}: bad output count `{value}`"))
                        })?);
                    }
                    continue;
                }
                "conv3d" => {
                    let filters = args.remove("filters")
                        .ok_or_else(|| Error::Spec(format!("line {line}: conv3d needs filters=")))?;
                    let kernel = args.remove("kernel")
                        .ok_or_else(|| Error::Spec(format!("line {line}: conv3d needs kernel=")))?;
                    let stride = args.remove("stride").map(|s| parse_triple(s, line)).transpose()?;
                    Layer::Conv3d {
                        filters: filters
                            .parse()
                            .map_err(|_| Error::Spec(format!("line {line}: bad filters `{filters}`")))?,
                        kernel: parse_triple(kernel, line)?,
                        stride: stride.unwrap_or([1; 3]),
                    }
                }
                "maxpool3d" => {
                    let window = args.remove("window")
                        .ok_or_else(|| Error::Spec(format!("line {line}: maxpool3d needs window=")))?;
                    let window = parse_triple(window, line)?;
                    let stride = args.remove("stride").map(|s| parse_triple(s, line)).transpose()?;
                    Layer::MaxPool3d { window, stride: stride.unwrap_or(window) }
                }
                "dense" => {
                    let units = args.remove("units")
                        .ok_or_else(|| Error::Spec(format!("line {line}: dense needs units=")))?;
                    Layer::Dense {
                        units: units
                            .parse()
                            .map_err(|_| Error::Spec(format!("line {line}: bad units `{units}`")))?,
                    }
                }
                "relu" => Layer::Relu,
                "flatten" => Layer::Flatten,
                "sigmoid" => Layer::Sigmoid,
                other => return Err(Error::Spec(format!("line {line}: unknown layer `{other}`"))),
            };
            if let Some(k) = args.keys().next() {
                return Err(Error::Spec(format!("line {line}: unexpected argument `{k}`")));
            }
            if !positional.is_empty() {
                return Err(Error::Spec(format!("line {line}: unexpected `{}`", positional[0])));
            }
            layers.push(layer);
        }
        let spec = ArchitectureSpec {
            input_shape: input_shape.ok_or_else(|| Error::Spec("missing `input` line".into()))?,
            output_count: output_count.ok_or_else(|| Error::Spec("missing `outputs` line".into()))?,
            layers,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Weights and bias of one parametric layer. Conv weights are
/// `[C_out, C_in, kD, kH, kW]`, dense weights `[units, inputs]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl LayerParams {
    fn zeros_like(other: &LayerParams) -> Self {
        LayerParams {
            weights: Tensor::zeros(other.weights.shape()),
            bias: Tensor::zeros(other.bias.shape()),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat view across weights then bias.
    pub fn get(&self, i: usize) -> f64 {
        let nw = self.weights.len();
        if i < nw {
            self.weights.data()[i]
        } else {
            self.bias.data()[i - nw]
        }
    }

    pub fn get_mut(&mut self, i: usize) -> &mut f64 {
        let nw = self.weights.len();
        if i < nw {
            &mut self.weights.data_mut()[i]
        } else {
            &mut self.bias.data_mut()[i - nw]
        }
    }
}

/// One gradient (or velocity) pair per parametric layer.
pub type Gradients = Vec<LayerParams>;

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: ArchitectureSpec,
    pub params: Vec<LayerParams>,
    pub seed: u64,
}

impl Model {
    pub fn param_count(&self) -> usize {
        self.params.iter().map(LayerParams::len).sum()
    }

    pub fn zero_like(&self) -> Gradients {
        self.params.iter().map(LayerParams::zeros_like).collect()
    }

    /// Copy with every parameter set to zero.
    pub fn zeroed(&self) -> Model {
        Model {
            spec: self.spec.clone(),
            params: self.zero_like(),
            seed: self.seed,
        }
    }
}

/// Uniform `±sqrt(6 / fan_in)` weights from a ChaCha8 stream seeded by `seed`; zero biases.
pub fn build_model(spec: &ArchitectureSpec, seed: u64) -> Result<Model> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = spec
        .param_shapes()?
        .into_iter()
        .map(|(wshape, bshape)| {
            let fan_in: usize = wshape[1..].iter().product();
            let limit = (6.0 / fan_in as f64).sqrt();
            let n = wshape.iter().product();
            let w = (0..n).map(|_| rng.random_range(-limit..=limit)).collect();
            LayerParams {
                weights: Tensor::from_vec(&wshape, w).expect("shape product"),
                bias: Tensor::zeros(&bshape),
            }
        })
        .collect();
    Ok(Model {
        spec: spec.clone(),
        params,
        seed,
    })
}

/// Per-sample record of a forward pass.
#[derive(Debug, Clone)]
pub struct SampleCache {
    /// `activations[i]` is the input to layer `i`; the last entry is the output.
    pub activations: Vec<Tensor>,
    /// Recorded argmax positions, for pooling layers only.
    pub argmax: Vec<Option<Vec<usize>>>,
}

#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub samples: Vec<SampleCache>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn relu(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
    Tensor::from_vec(x.shape(), data).expect("same shape")
}

fn dense_forward(p: &LayerParams, x: &[f64]) -> Vec<f64> {
    let inputs = x.len();
    p.weights
        .data()
        .chunks_exact(inputs)
        .zip(p.bias.data())
        .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
        .collect()
}

fn sample_forward(model: &Model, input: Tensor) -> Result<SampleCache> {
    let mut activations = Vec::with_capacity(model.spec.layers.len() + 1);
    let mut argmax = Vec::with_capacity(model.spec.layers.len());
    activations.push(input);
    let mut pidx = 0;
    for layer in &model.spec.layers {
        let x = activations.last().unwrap();
        let mut pooled_idx = None;
        let y = match *layer {
            Layer::Conv3d { stride, .. } => {
                let p = &model.params[pidx];
                pidx += 1;
                tensor::conv3d(x, &p.weights, &p.bias, stride)?
            }
            Layer::Relu => relu(x),
            Layer::MaxPool3d { window, stride } => {
                let pooled = tensor::maxpool3d(x, window, stride)?;
                pooled_idx = Some(pooled.argmax);
                pooled.output
            }
            Layer::Flatten => x.clone().reshape(&[x.len()])?,
            Layer::Dense { units } => {
                let p = &model.params[pidx];
                pidx += 1;
                Tensor::from_vec(&[units], dense_forward(p, x.data()))?
            }
            Layer::Sigmoid => {
                Tensor::from_vec(x.shape(), x.data().iter().map(|&z| sigmoid(z)).collect())?
            }
        };
        activations.push(y);
        argmax.push(pooled_idx);
    }
    Ok(SampleCache { activations, argmax })
}

/// Runs a batch `[N, ...input_shape]`; returns confidences `[N, k]`.
pub fn forward(model: &Model, batch: &Tensor) -> Result<(Tensor, ForwardCache)> {
    let spec = &model.spec;
    if batch.shape().len() != spec.input_shape.len() + 1 || batch.shape()[1..] != spec.input_shape[..] {
        return Err(Error::shape(format!(
            "batch must be [N, {:?}], got {:?}",
            spec.input_shape,
            batch.shape()
        )));
    }
    let n = batch.shape()[0];
    let per: usize = spec.input_shape.iter().product();
    let mut samples = Vec::with_capacity(n);
    let mut conf = Vec::with_capacity(n * spec.output_count);
    for chunk in batch.data().chunks_exact(per.max(1)).take(n) {
        let x = Tensor::from_vec(&spec.input_shape, chunk.to_vec())?;
        let cache = sample_forward(model, x)?;
        conf.extend_from_slice(cache.activations.last().unwrap().data());
        samples.push(cache);
    }
    Ok((
        Tensor::from_vec(&[n, spec.output_count], conf)?,
        ForwardCache { samples },
    ))
}

/// Stacks equally shaped sample tensors into a batch `[N, ...]`.
pub fn stack(samples: &[&Tensor]) -> Result<Tensor> {
    let Some(first) = samples.first() else {
        return Err(Error::arg("cannot stack an empty batch"));
    };
    let mut data = Vec::with_capacity(first.len() * samples.len());
    for s in samples {
        if s.shape() != first.shape() {
            return Err(Error::shape(format!(
                "cannot stack {:?} with {:?}",
                first.shape(),
                s.shape()
            )));
        }
        data.extend_from_slice(s.data());
    }
    let mut shape = vec![samples.len()];
    shape.extend_from_slice(first.shape());
    Tensor::from_vec(&shape, data)
}

/// Mean over all `N·k` terms of `−[w·y·ln p + (1−y)·ln(1−p)]`, with `p`
/// clamped to `[ε, 1−ε]`. Weights multiply only the positive-label term.
pub fn weighted_bce(confidences: &Tensor, labels: &Tensor, class_weights: &[f64]) -> Result<(f64, Tensor)> {
    if confidences.shape() != labels.shape() || confidences.shape().len() != 2 {
        return Err(Error::shape(format!(
            "confidences {:?} and labels {:?} must both be [N, k]",
            confidences.shape(),
            labels.shape()
        )));
    }
    let k = confidences.shape()[1];
    if class_weights.len() != k {
        return Err(Error::arg(format!("expected {k} class weights, got {}", class_weights.len())));
    }
    if let Some(w) = class_weights.iter().find(|&&w| w.is_nan() || w < 1.0) {
        return Err(Error::arg(format!("class weight {w} is below 1")));
    }
    let terms = confidences.len();
    if terms == 0 {
        return Err(Error::arg("empty batch"));
    }
    let scale = 1.0 / terms as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(terms);
    for (i, (&p_raw, &y)) in confidences.data().iter().zip(labels.data()).enumerate() {
        let w = class_weights[i % k];
        let p = p_raw.clamp(LOG_EPS, 1.0 - LOG_EPS);
        loss -= w * y * p.ln() + (1.0 - y) * (1.0 - p).ln();
        let inside = p_raw > LOG_EPS && p_raw < 1.0 - LOG_EPS;
        let g = if inside { -w * y / p + (1.0 - y) / (1.0 - p) } else { 0.0 };
        grad.push(g * scale);
    }
    Ok((loss * scale, Tensor::from_vec(confidences.shape(), grad)?))
}

/// Analytic gradients of a scalar loss, given `∂loss/∂confidences` for the cached batch.
pub fn backward(model: &Model, cache: &ForwardCache, grad_confidences: &Tensor) -> Result<Gradients> {
    let layers = &model.spec.layers;
    let k = model.spec.output_count;
    if grad_confidences.shape() != [cache.samples.len(), k] {
        return Err(Error::shape(format!(
            "grad_confidences must be [{}, {k}], got {:?}",
            cache.samples.len(),
            grad_confidences.shape()
        )));
    }
    let mut grads = model.zero_like();
    for (s, sample) in cache.samples.iter().enumerate() {
        if sample.activations.len() != layers.len() + 1 {
            return Err(Error::Internal("forward cache does not match the model's layers".into()));
        }
        let row = &grad_confidences.data()[s * k..(s + 1) * k];
        let mut g = Tensor::from_vec(&[k], row.to_vec())?;
        let mut pidx = model.params.len();
        for (i, layer) in layers.iter().enumerate().rev() {
            let x = &sample.activations[i];
            let y = &sample.activations[i + 1];
            if g.shape() != y.shape() {
                return Err(Error::Internal(format!(
                    "layer {i}: gradient shape {:?} does not match cached output {:?}",
                    g.shape(),
                    y.shape()
                )));
            }
            g = match *layer {
                Layer::Sigmoid => {
                    let d = g.data().iter().zip(y.data()).map(|(gv, p)| gv * p * (1.0 - p)).collect();
                    Tensor::from_vec(y.shape(), d)?
                }
                Layer::Relu => {
                    let d = g
                        .data()
                        .iter()
                        .zip(x.data())
                        .map(|(gv, &xv)| if xv > 0.0 { *gv } else { 0.0 })
                        .collect();
                    Tensor::from_vec(x.shape(), d)?
                }
                Layer::Flatten => g.reshape(x.shape())?,
                Layer::MaxPool3d { .. } => {
                    let idx = sample.argmax[i]
                        .as_ref()
                        .ok_or_else(|| Error::Internal(format!("layer {i}: missing pool indices")))?;
                    tensor::maxpool3d_grad(&g, idx, x.shape())?
                }
                Layer::Conv3d { stride, .. } => {
                    pidx -= 1;
                    let p = &model.params[pidx];
                    let cg = tensor::conv3d_grad(&g, x, &p.weights, stride)?;
                    accumulate(&mut grads[pidx].weights, &cg.kernels);
                    accumulate(&mut grads[pidx].bias, &cg.bias);
                    cg.input
                }
                Layer::Dense { .. } => {
                    pidx -= 1;
                    let p = &model.params[pidx];
                    let inputs = x.len();
                    let gw = grads[pidx].weights.data_mut();
                    for (j, &gy) in g.data().iter().enumerate() {
                        for (dst, &xv) in gw[j * inputs..(j + 1) * inputs].iter_mut().zip(x.data()) {
                            *dst += gy * xv;
                        }
                    }
                    for (dst, &gy) in grads[pidx].bias.data_mut().iter_mut().zip(g.data()) {
                        *dst += gy;
                    }
                    let mut gx = vec![0.0; inputs];
                    for (row, &gy) in p.weights.data().chunks_exact(inputs).zip(g.data()) {
                        for (dst, &w) in gx.iter_mut().zip(row) {
                            *dst += w * gy;
                        }
                    }
                    Tensor::from_vec(x.shape(), gx)?
                }
            };
        }
    }
    Ok(grads)
}

fn accumulate(dst: &mut Tensor, src: &Tensor) {
    for (d, s) in dst.data_mut().iter_mut().zip(src.data()) {
        *d += s;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub mu: f64,
    pub alpha: f64,
    pub window_size: usize,
    pub window_overlap: usize,
    pub resize_factor: usize,
    pub split_ratio: f64,
    /// Stop after this many epochs without a training-loss improvement.
    pub patience: Option<usize>,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            learning_rate: 0.01,
            momentum: 0.9,
            epochs: 30,
            batch_size: 8,
            mu: 0.7,
            alpha: 0.5,
            window_size: 15,
            window_overlap: 5,
            resize_factor: 4,
            split_ratio: 0.7,
            patience: None,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return bad("learning_rate must be > 0");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be >= 1");
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return bad("mu must be in (0, 1]");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must be in (0, 1)");
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad("split_ratio must be in (0, 1)");
        }
        if self.window_size <= self.window_overlap || self.window_size.is_multiple_of(2) {
            return bad("window_size must be odd and larger than window_overlap");
        }
        if self.resize_factor == 0 {
            return bad("resize_factor must be >= 1");
        }
        Ok(())
    }
}

fn check_like(model: &Model, other: &[LayerParams], what: &str) -> Result<()> {
    let ok = other.len() == model.params.len()
        && other.iter().zip(&model.params).all(|(a, b)| {
            a.weights.shape() == b.weights.shape() && a.bias.shape() == b.bias.shape()
        });
    if ok {
        Ok(())
    } else {
        Err(Error::shape(format!("{what} do not match the model's parameter shapes")))
    }
}

/// Classical momentum: `v ← momentum·v − lr·g; θ ← θ + v`.
pub fn sgd_step(model: &mut Model, grads: &Gradients, hyper: &Hyperparameters, velocity: &mut Gradients) -> Result<()> {
    check_like(model, grads, "gradients")?;
    check_like(model, velocity, "velocity")?;
    for ((p, g), v) in model.params.iter_mut().zip(grads).zip(velocity.iter_mut()) {
        for (theta, (gv, vel)) in p
            .weights
            .data_mut()
            .iter_mut()
            .chain(p.bias.data_mut())
            .zip(g.weights.data().iter().chain(g.bias.data()).zip(v.weights.data_mut().iter_mut().chain(v.bias.data_mut())))
        {
            *vel = hyper.momentum * *vel - hyper.learning_rate * gv;
            *theta += *vel;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerCheck {
    /// Index into `spec.layers`.
    pub layer: usize,
    pub kind: &'static str,
    pub max_rel_error: f64,
    pub checked: usize,
    /// Samples rejected because the perturbation crossed a ReLU kink or switched a pooling argmax.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub layers: Vec<LayerCheck>,
    pub tol: f64,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.layers.iter().map(|l| l.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.layers.iter().all(|l| l.checked > 0 && l.max_rel_error < self.tol)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GradCheckOptions {
    pub h: f64,
    pub tol: f64,
    pub samples_per_layer: usize,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions { h: 1e-5, tol: 1e-4, samples_per_layer: 100, seed: 0 }
    }
}

pub fn loss(model: &Model, batch: &Tensor, labels: &Tensor, class_weights: &[f64]) -> Result<(f64, ForwardCache)> {
    let (conf, cache) = forward(model, batch)?;
    let (l, _) = weighted_bce(&conf, labels, class_weights)?;
    Ok((l, cache))
}

/// Analytic gradients of the weighted BCE loss for one batch.
pub fn loss_gradients(model: &Model, batch: &Tensor, labels: &Tensor, class_weights: &[f64]) -> Result<(f64, Gradients)> {
    let (conf, cache) = forward(model, batch)?;
    let (l, gconf) = weighted_bce(&conf, labels, class_weights)?;
    Ok((l, backward(model, &cache, &gconf)?))
}

fn same_branches(a: &ForwardCache, b: &ForwardCache, layers: &[Layer]) -> bool {
    a.samples.iter().zip(&b.samples).all(|(sa, sb)| {
        layers.iter().enumerate().all(|(i, layer)| match layer {
            Layer::Relu => sa.activations[i]
                .data()
                .iter()
                .zip(sb.activations[i].data())
                .all(|(x, y)| (*x > 0.0) == (*y > 0.0)),
            Layer::MaxPool3d { .. } => sa.argmax[i] == sb.argmax[i],
            _ => true,
        })
    })
}

/// Compares analytic gradients against central differences on a seeded
/// sample of each parametric layer's scalars.
pub fn grad_check(
    model: &Model,
    batch: &Tensor,
    labels: &Tensor,
    class_weights: &[f64],
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    let (_, analytic) = loss_gradients(model, batch, labels, class_weights)?;
    grad_check_against(model, batch, labels, class_weights, &analytic, opts)
}

/// Like [`grad_check`], but against caller-supplied "analytic" gradients.
pub fn grad_check_against(
    model: &Model,
    batch: &Tensor,
    labels: &Tensor,
    class_weights: &[f64],
    analytic: &Gradients,
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    check_like(model, analytic, "analytic gradients")?;
    let (_, base_cache) = loss(model, batch, labels, class_weights)?;
    let parametric: Vec<usize> = model
        .spec
        .layers
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_parametric())
        .map(|(i, _)| i)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut probe = model.clone();
    let mut layers = Vec::new();
    for (pidx, &layer) in parametric.iter().enumerate() {
        let n = model.params[pidx].len();
        let order = sample(&mut rng, n, n.min(opts.samples_per_layer.saturating_mul(4)));
        let mut check = LayerCheck {
            layer,
            kind: model.spec.layers[layer].name(),
            max_rel_error: 0.0,
            checked: 0,
            skipped: 0,
        };
        for i in order.iter() {
            if check.checked >= opts.samples_per_layer {
                break;
            }
            let orig = model.params[pidx].get(i);
            *probe.params[pidx].get_mut(i) = orig + opts.h;
            let (lp, cp) = loss(&probe, batch, labels, class_weights)?;
            *probe.params[pidx].get_mut(i) = orig - opts.h;
            let (lm, cm) = loss(&probe, batch, labels, class_weights)?;
            *probe.params[pidx].get_mut(i) = orig;
            let layers_spec = &model.spec.layers;
            if !same_branches(&base_cache, &cp, layers_spec) || !same_branches(&base_cache, &cm, layers_spec) {
                check.skipped += 1;
                continue;
            }
            let numeric = (lp - lm) / (2.0 * opts.h);
            let a = analytic[pidx].get(i);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            check.max_rel_error = check.max_rel_error.max(rel);
            check.checked += 1;
        }
        layers.push(check);
    }
    Ok(GradCheckReport { layers, tol: opts.tol })
}
