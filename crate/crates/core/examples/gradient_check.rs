//! Finite-difference gradient check of the default network on a random window.
//!
//! `cargo run --release --example gradient_check -- [seed]`

use actionrec::nn::{self, ArchitectureSpec, GradCheckOptions};
use actionrec::tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> actionrec::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let spec = ArchitectureSpec::micro(4);
    println!("{spec}");
    println!("{} parameters", nn::param_count(&spec)?);

    let model = nn::build_model(&spec, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch = Tensor::from_vec(&[1, 1, 15, 32, 32], (0..15 * 32 * 32).map(|_| rng.random_range(-1.0..1.0)).collect())?;
    let labels = Tensor::from_vec(&[1, 4], vec![1.0, 0.0, 0.0, 1.0])?;
    let weights = [1.0, 2.0, 1.5, 3.2];

    let opts = GradCheckOptions { samples_per_layer: 50, seed, ..Default::default() };
    let report = nn::grad_check(&model, &batch, &labels, &weights, &opts)?;
    for l in &report.layers {
        println!(
            "layer {:2} {:8} checked {:3} skipped {:2} max rel error {:.2e}",
            l.layer, l.kind, l.checked, l.skipped, l.max_rel_error
        );
    }
    println!("passed (tol {:e}): {}", report.tol, report.passed());
    Ok(())
}
