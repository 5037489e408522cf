//! Dense row-major `f64` tensors and the 3D spatiotemporal kernels.
//!
//! Convolution uses the cross-correlation convention (no kernel flip) with
//! valid padding. Volumes are laid out as `[C, D, H, W]` where `D` is time.
//! The kernels here walk whole output rows so the innermost loop is a
//! contiguous multiply-add; [`reference`] keeps a plain nested-loop version
//! of each kernel to test them against.

use crate::error::{Error, Result};

/// Per-axis extents or steps over the `(D, H, W)` axes.
pub type Triple = [usize; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Self::filled(shape, 0.0)
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::shape(format!(
                "shape {shape:?} holds {n} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(Error::shape(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest absolute elementwise difference; shapes must match.
    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.shape, other.shape, "max_abs_diff on mismatched shapes");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn dims4(t: &Tensor, what: &str) -> Result<[usize; 4]> {
    match *t.shape() {
        [c, d, h, w] => Ok([c, d, h, w]),
        ref s => Err(Error::shape(format!("{what} must be [C, D, H, W], got {s:?}"))),
    }
}

fn check_steps(stride: Triple, what: &str) -> Result<()> {
    if stride.contains(&0) {
        return Err(Error::shape(format!("{what} must be >= 1 on every axis, got {stride:?}")));
    }
    Ok(())
}

/// Output extent of a valid sliding window along one axis.
pub fn valid_extent(input: usize, window: usize, stride: usize) -> usize {
    debug_assert!(window <= input && stride >= 1);
    (input - window) / stride + 1
}

struct ConvGeom {
    cin: usize,
    cout: usize,
    in_dims: Triple,
    k: Triple,
    stride: Triple,
    out: Triple,
}

fn conv_geometry(input: &Tensor, kernels: &Tensor, stride: Triple) -> Result<ConvGeom> {
    let [cin, d, h, w] = dims4(input, "conv3d input")?;
    let (cout, kcin, kd, kh, kw) = match *kernels.shape() {
        [a, b, c, d, e] => (a, b, c, d, e),
        ref s => {
            return Err(Error::shape(format!(
                "conv3d kernels must be [C_out, C_in, kD, kH, kW], got {s:?}"
            )))
        }
    };
    if kcin != cin {
        return Err(Error::shape(format!(
            "kernels expect {kcin} input channels, input has {cin}"
        )));
    }
    if kd > d || kh > h || kw > w {
        return Err(Error::shape(format!(
            "kernel ({kd},{kh},{kw}) larger than input ({d},{h},{w})"
        )));
    }
    if kd == 0 || kh == 0 || kw == 0 {
        return Err(Error::shape("kernel extents must be >= 1"));
    }
    check_steps(stride, "conv3d stride")?;
    Ok(ConvGeom {
        cin,
        cout,
        in_dims: [d, h, w],
        k: [kd, kh, kw],
        stride,
        out: [
            valid_extent(d, kd, stride[0]),
            valid_extent(h, kh, stride[1]),
            valid_extent(w, kw, stride[2]),
        ],
    })
}

/// Valid 3D cross-correlation: `out[co] = bias[co] + sum_ci kernels[co, ci] ⋆ input[ci]`.
pub fn conv3d(input: &Tensor, kernels: &Tensor, bias: &Tensor, stride: Triple) -> Result<Tensor> {
    let g = conv_geometry(input, kernels, stride)?;
    if bias.shape() != [g.cout] {
        return Err(Error::shape(format!(
            "bias must be [{}], got {:?}",
            g.cout,
            bias.shape()
        )));
    }
    let [d, h, w] = g.in_dims;
    let [kd, kh, kw] = g.k;
    let [sd, sh, sw] = g.stride;
    let [od, oh, ow] = g.out;
    let in_vol = d * h * w;
    let out_vol = od * oh * ow;
    let k_vol = kd * kh * kw;

    let mut out = vec![0.0; g.cout * out_vol];
    let x = input.data();
    let kern = kernels.data();
    for co in 0..g.cout {
        let out_c = &mut out[co * out_vol..(co + 1) * out_vol];
        out_c.fill(bias.data()[co]);
        for ci in 0..g.cin {
            let in_c = &x[ci * in_vol..(ci + 1) * in_vol];
            let k_c = &kern[(co * g.cin + ci) * k_vol..][..k_vol];
            for a in 0..kd {
                for b in 0..kh {
                    for c in 0..kw {
                        let wt = k_c[(a * kh + b) * kw + c];
                        for z in 0..od {
                            let iz = z * sd + a;
                            for y in 0..oh {
                                let iy = y * sh + b;
                                let row_in = &in_c[(iz * h + iy) * w + c..];
                                let row_out = &mut out_c[(z * oh + y) * ow..][..ow];
                                if sw == 1 {
                                    for (o, &v) in row_out.iter_mut().zip(&row_in[..ow]) {
                                        *o += wt * v;
                                    }
                                } else {
                                    for (i, o) in row_out.iter_mut().enumerate() {
                                        *o += wt * row_in[i * sw];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::from_vec(&[g.cout, od, oh, ow], out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub input: Tensor,
    pub kernels: Tensor,
    pub bias: Tensor,
}

/// Gradients of `sum(upstream ⊙ conv3d(input, kernels, bias, stride))`.
pub fn conv3d_grad(
    upstream: &Tensor,
    input: &Tensor,
    kernels: &Tensor,
    stride: Triple,
) -> Result<ConvGrads> {
    let g = conv_geometry(input, kernels, stride)?;
    let [od, oh, ow] = g.out;
    if upstream.shape() != [g.cout, od, oh, ow] {
        return Err(Error::shape(format!(
            "upstream must be {:?}, got {:?}",
            [g.cout, od, oh, ow],
            upstream.shape()
        )));
    }
    let [d, h, w] = g.in_dims;
    let [kd, kh, kw] = g.k;
    let [sd, sh, sw] = g.stride;
    let in_vol = d * h * w;
    let out_vol = od * oh * ow;
    let k_vol = kd * kh * kw;

    let up = upstream.data();
    let x = input.data();
    let kern = kernels.data();
    let mut gx = vec![0.0; x.len()];
    let mut gk = vec![0.0; kern.len()];
    let mut gb = vec![0.0; g.cout];

    for co in 0..g.cout {
        let up_c = &up[co * out_vol..(co + 1) * out_vol];
        gb[co] = up_c.iter().sum();
        for ci in 0..g.cin {
            let in_c = &x[ci * in_vol..(ci + 1) * in_vol];
            let gx_c = &mut gx[ci * in_vol..(ci + 1) * in_vol];
            let base = (co * g.cin + ci) * k_vol;
            for a in 0..kd {
                for b in 0..kh {
                    for c in 0..kw {
                        let kidx = base + (a * kh + b) * kw + c;
                        let wt = kern[kidx];
                        let mut acc = 0.0;
                        for z in 0..od {
                            let iz = z * sd + a;
                            for y in 0..oh {
                                let iy = y * sh + b;
                                let start = (iz * h + iy) * w + c;
                                let row_up = &up_c[(z * oh + y) * ow..][..ow];
                                if sw == 1 {
                                    let row_in = &in_c[start..start + ow];
                                    acc += row_up.iter().zip(row_in).map(|(u, v)| u * v).sum::<f64>();
                                    let row_gx = &mut gx_c[start..start + ow];
                                    for (gv, &u) in row_gx.iter_mut().zip(row_up) {
                                        *gv += wt * u;
                                    }
                                } else {
                                    for (i, &u) in row_up.iter().enumerate() {
                                        acc += u * in_c[start + i * sw];
                                        gx_c[start + i * sw] += wt * u;
                                    }
                                }
                            }
                        }
                        gk[kidx] = acc;
                    }
                }
            }
        }
    }
    Ok(ConvGrads {
        input: Tensor::from_vec(input.shape(), gx)?,
        kernels: Tensor::from_vec(kernels.shape(), gk)?,
        bias: Tensor::from_vec(&[g.cout], gb)?,
    })
}

/// Max-pooling result; `argmax[i]` is the flat input index that produced `output[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    pub output: Tensor,
    pub argmax: Vec<usize>,
}

/// Valid 3D max-pooling per channel. Ties resolve to the first element in
/// row-major scan order; trailing remainders are discarded.
pub fn maxpool3d(input: &Tensor, window: Triple, stride: Triple) -> Result<Pooled> {
    let [ch, d, h, w] = dims4(input, "maxpool3d input")?;
    check_steps(stride, "maxpool3d stride")?;
    if window.contains(&0) {
        return Err(Error::shape("pool window extents must be >= 1"));
    }
    let [wd, wh, ww] = window;
    if wd > d || wh > h || ww > w {
        return Err(Error::shape(format!(
            "pool window {window:?} larger than input ({d},{h},{w})"
        )));
    }
    let [sd, sh, sw] = stride;
    let (od, oh, ow) = (
        valid_extent(d, wd, sd),
        valid_extent(h, wh, sh),
        valid_extent(w, ww, sw),
    );
    let x = input.data();
    let mut out = Vec::with_capacity(ch * od * oh * ow);
    let mut argmax = Vec::with_capacity(ch * od * oh * ow);
    for c in 0..ch {
        let base = c * d * h * w;
        for z in 0..od {
            for y in 0..oh {
                for xo in 0..ow {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_idx = usize::MAX;
                    for a in 0..wd {
                        for b in 0..wh {
                            let row = base + ((z * sd + a) * h + (y * sh + b)) * w + xo * sw;
                            for (e, &v) in x[row..row + ww].iter().enumerate() {
                                if best_idx == usize::MAX || v > best {
                                    best = v;
                                    best_idx = row + e;
                                }
                            }
                        }
                    }
                    out.push(best);
                    argmax.push(best_idx);
                }
            }
        }
    }
    Ok(Pooled {
        output: Tensor::from_vec(&[ch, od, oh, ow], out)?,
        argmax,
    })
}

/// Routes each upstream value back to the input position recorded in `argmax`.
pub fn maxpool3d_grad(upstream: &Tensor, argmax: &[usize], input_shape: &[usize]) -> Result<Tensor> {
    if upstream.len() != argmax.len() {
        return Err(Error::shape(format!(
            "upstream has {} values but {} argmax indices were recorded",
            upstream.len(),
            argmax.len()
        )));
    }
    let mut grad = Tensor::zeros(input_shape);
    let n = grad.len();
    let g = grad.data_mut();
    for (&u, &idx) in upstream.data().iter().zip(argmax) {
        if idx >= n {
            return Err(Error::Internal(format!(
                "argmax index {idx} outside input of {n} elements"
            )));
        }
        g[idx] += u;
    }
    Ok(grad)
}

/// Plain nested-loop kernels, one output element at a time. These are the
/// oracles the row-oriented kernels above are tested against.
pub mod reference {
    use super::*;

    pub fn conv3d(input: &Tensor, kernels: &Tensor, bias: &Tensor, stride: Triple) -> Result<Tensor> {
        let g = conv_geometry(input, kernels, stride)?;
        let [_, h, w] = g.in_dims;
        let d = g.in_dims[0];
        let [kd, kh, kw] = g.k;
        let [od, oh, ow] = g.out;
        let x = input.data();
        let k = kernels.data();
        let mut out = Tensor::zeros(&[g.cout, od, oh, ow]);
        let o = out.data_mut();
        for co in 0..g.cout {
            for z in 0..od {
                for y in 0..oh {
                    for xo in 0..ow {
                        let mut acc = 0.0;
                        for ci in 0..g.cin {
                            for a in 0..kd {
                                for b in 0..kh {
                                    for c in 0..kw {
                                        let iz = z * stride[0] + a;
                                        let iy = y * stride[1] + b;
                                        let ix = xo * stride[2] + c;
                                        let xv = x[((ci * d + iz) * h + iy) * w + ix];
                                        let kv = k[(((co * g.cin + ci) * kd + a) * kh + b) * kw + c];
                                        acc += xv * kv;
                                    }
                                }
                            }
                        }
                        o[((co * od + z) * oh + y) * ow + xo] = acc + bias.data()[co];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn maxpool3d(input: &Tensor, window: Triple, stride: Triple) -> Result<Pooled> {
        let [ch, d, h, w] = dims4(input, "maxpool3d input")?;
        let od = (d - window[0]) / stride[0] + 1;
        let oh = (h - window[1]) / stride[1] + 1;
        let ow = (w - window[2]) / stride[2] + 1;
        let mut out = Vec::new();
        let mut argmax = Vec::new();
        for c in 0..ch {
            for z in 0..od {
                for y in 0..oh {
                    for xo in 0..ow {
                        let mut cells = Vec::new();
                        for a in 0..window[0] {
                            for b in 0..window[1] {
                                for e in 0..window[2] {
                                    let idx = ((c * d + z * stride[0] + a) * h + y * stride[1] + b) * w
                                        + xo * stride[2]
                                        + e;
                                    cells.push(idx);
                                }
                            }
                        }
                        let x = input.data();
                        let max = cells.iter().map(|&i| x[i]).fold(f64::NEG_INFINITY, f64::max);
                        let first = *cells.iter().find(|&&i| x[i] == max).expect("non-empty window");
                        out.push(max);
                        argmax.push(first);
                    }
                }
            }
        }
        Ok(Pooled {
            output: Tensor::from_vec(&[ch, od, oh, ow], out)?,
            argmax,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
        let n = shape.iter().product();
        Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn conv_output_shape_matches_valid_padding() {
        let x = Tensor::zeros(&[1, 15, 32, 32]);
        let k = Tensor::zeros(&[8, 1, 3, 3, 3]);
        let b = Tensor::zeros(&[8]);
        let y = conv3d(&x, &k, &b, [1, 1, 1]).unwrap();
        assert_eq!(y.shape(), &[8, 13, 30, 30]);
    }

    #[test]
    fn identity_kernel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random(&[1, 3, 4, 5], &mut rng);
        let k = Tensor::filled(&[1, 1, 1, 1, 1], 1.0);
        let b = Tensor::zeros(&[1]);
        assert_eq!(conv3d(&x, &k, &b, [1, 1, 1]).unwrap(), x);
        let up = random(&[1, 3, 4, 5], &mut rng);
        let g = conv3d_grad(&up, &x, &k, [1, 1, 1]).unwrap();
        assert_eq!(g.input, up);
    }

    #[test]
    fn conv_matches_reference_on_fixed_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random(&[2, 4, 4, 4], &mut rng);
        let k = random(&[3, 2, 2, 2, 2], &mut rng);
        let b = random(&[3], &mut rng);
        let fast = conv3d(&x, &k, &b, [1, 1, 1]).unwrap();
        let slow = reference::conv3d(&x, &k, &b, [1, 1, 1]).unwrap();
        assert!(fast.max_abs_diff(&slow) < 1e-12);
    }

    #[test]
    fn conv_shape_errors() {
        let x = Tensor::zeros(&[2, 4, 4, 4]);
        let b = Tensor::zeros(&[1]);
        let wrong_cin = Tensor::zeros(&[1, 3, 2, 2, 2]);
        assert!(matches!(conv3d(&x, &wrong_cin, &b, [1, 1, 1]), Err(Error::Shape(_))));
        let too_big = Tensor::zeros(&[1, 2, 5, 2, 2]);
        assert!(matches!(conv3d(&x, &too_big, &b, [1, 1, 1]), Err(Error::Shape(_))));
        let ok = Tensor::zeros(&[1, 2, 2, 2, 2]);
        assert!(matches!(conv3d(&x, &ok, &b, [0, 1, 1]), Err(Error::Shape(_))));
        let up = Tensor::zeros(&[1, 2, 2, 2]);
        assert!(matches!(conv3d_grad(&up, &x, &ok, [1, 1, 1]), Err(Error::Shape(_))));
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random(&[2, 4, 4, 4], &mut rng);
        let k = random(&[3, 2, 2, 2, 2], &mut rng);
        let up = Tensor::zeros(&[3, 3, 3, 3]);
        let g = conv3d_grad(&up, &x, &k, [1, 1, 1]).unwrap();
        assert!(g.input.data().iter().all(|&v| v == 0.0));
        assert!(g.kernels.data().iter().all(|&v| v == 0.0));
        assert!(g.bias.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_pool_picks_first_index() {
        let x = Tensor::filled(&[1, 4, 4, 4], 3.0);
        let p = maxpool3d(&x, [2, 2, 2], [2, 2, 2]).unwrap();
        assert!(p.output.data().iter().all(|&v| v == 3.0));
        // each window's first row-major cell is its corner
        let expected: Vec<usize> = (0..2)
            .flat_map(|z| (0..2).flat_map(move |y| (0..2).map(move |x| (2 * z * 4 + 2 * y) * 4 + 2 * x)))
            .collect();
        assert_eq!(p.argmax, expected);
    }

    #[test]
    fn pool_block_maxima_on_ramp() {
        let x = Tensor::from_vec(&[1, 4, 4, 4], (0..64).map(f64::from).collect()).unwrap();
        let p = maxpool3d(&x, [2, 2, 2], [2, 2, 2]).unwrap();
        // brute force over every element: block id = (z/2, y/2, x/2)
        let mut block_max = [f64::NEG_INFINITY; 8];
        for z in 0..4 {
            for y in 0..4 {
                for xx in 0..4 {
                    let b = (z / 2) * 4 + (y / 2) * 2 + xx / 2;
                    block_max[b] = block_max[b].max(((z * 4 + y) * 4 + xx) as f64);
                }
            }
        }
        assert_eq!(p.output.data(), &block_max);
        assert_eq!(p.output.data(), &[21.0, 23.0, 29.0, 31.0, 53.0, 55.0, 61.0, 63.0]);
    }

    #[test]
    fn pool_discards_remainder() {
        let x = Tensor::zeros(&[1, 5, 5, 5]);
        let p = maxpool3d(&x, [2, 2, 2], [2, 2, 2]).unwrap();
        assert_eq!(p.output.shape(), &[1, 2, 2, 2]);
        assert!(maxpool3d(&x, [6, 1, 1], [1, 1, 1]).is_err());
    }

    #[test]
    fn pool_grad_routes_and_conserves() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random(&[2, 4, 6, 6], &mut rng);
        let p = maxpool3d(&x, [2, 2, 2], [2, 2, 2]).unwrap();
        let zero = Tensor::zeros(p.output.shape());
        let g0 = maxpool3d_grad(&zero, &p.argmax, x.shape()).unwrap();
        assert!(g0.data().iter().all(|&v| v == 0.0));
        let up = random(p.output.shape(), &mut rng);
        let g = maxpool3d_grad(&up, &p.argmax, x.shape()).unwrap();
        assert!((g.sum() - up.sum()).abs() < 1e-12);
        let nonzero = g.data().iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nonzero, up.len());
    }

    #[test]
    fn pool_grad_rejects_bad_index() {
        let up = Tensor::filled(&[1, 1, 1, 1], 1.0);
        let err = maxpool3d_grad(&up, &[8], &[1, 2, 2, 2]).unwrap_err();
        assert!(matches!(err, Error::Internal(_)));
    }

    #[test]
    fn overlapping_pool_grad_accumulates() {
        let x = Tensor::from_vec(&[1, 1, 1, 3], vec![0.0, 5.0, 1.0]).unwrap();
        let p = maxpool3d(&x, [1, 1, 2], [1, 1, 1]).unwrap();
        assert_eq!(p.argmax, vec![1, 1]);
        let g = maxpool3d_grad(&Tensor::filled(&[1, 1, 1, 2], 1.0), &p.argmax, x.shape()).unwrap();
        assert_eq!(g.data(), &[0.0, 2.0, 0.0]);
    }
}
