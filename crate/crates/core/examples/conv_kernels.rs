//! Valid 3D convolution and max-pooling on a small volume, checked against the
//! naive reference loops.

use actionrec::tensor::{self, reference, Tensor};

fn main() -> actionrec::Result<()> {
    let input = Tensor::from_vec(&[1, 4, 4, 4], (0..64).map(f64::from).collect())?;
    // One 2x2x2 averaging kernel.
    let kernels = Tensor::filled(&[1, 1, 2, 2, 2], 0.125);
    let bias = Tensor::zeros(&[1]);

    let out = tensor::conv3d(&input, &kernels, &bias, [1, 1, 1])?;
    println!("conv3d {:?} -> {:?}", input.shape(), out.shape());
    println!("first row: {:?}", &out.data()[..3]);
    let slow = reference::conv3d(&input, &kernels, &bias, [1, 1, 1])?;
    println!("max |fast - reference| = {:e}", out.max_abs_diff(&slow));

    let pooled = tensor::maxpool3d(&input, [2, 2, 2], [2, 2, 2])?;
    println!("maxpool3d -> {:?}: {:?}", pooled.output.shape(), pooled.output.data());
    println!("argmax: {:?}", pooled.argmax);

    let up = Tensor::filled(pooled.output.shape(), 1.0);
    let routed = tensor::maxpool3d_grad(&up, &pooled.argmax, input.shape())?;
    let hot: Vec<usize> = routed.data().iter().enumerate().filter(|(_, g)| **g != 0.0).map(|(i, _)| i).collect();
    println!("pool gradient lands on {hot:?}");

    let strided = tensor::conv3d(&input, &kernels, &bias, [1, 2, 2])?;
    println!("stride (1,2,2) -> {:?}", strided.shape());
    Ok(())
}
