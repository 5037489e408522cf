//! Trains the binary-relevance ensemble: one single-output network per class,
//! each on a training set oversampled to balance its class.
//!
//! `cargo run --release --example train_ensemble -- [epochs]`

use actionrec::dataio::{synth_sequences, SynthConfig};
use actionrec::metrics::render_report;
use actionrec::nn::{ArchitectureSpec, Hyperparameters};
use actionrec::pipeline::{self, PreprocessParams};
use actionrec::strategy::{self, Member};

fn main() -> actionrec::Result<()> {
    let epochs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let cfg = SynthConfig::new(4, 12, 105, 128, 128, vec![0.4, 0.2, 0.1, 0.05]);
    let names: Vec<String> = (0..4).map(|j| format!("class{j}")).collect();
    let data = pipeline::preprocess(&names, &synth_sequences(&cfg, 2)?, &PreprocessParams { seed: 2, ..Default::default() })?;

    let spec = ArchitectureSpec::micro(4).with_head(data.input_shape().unwrap(), 1);
    let hyper = Hyperparameters { epochs, ..Default::default() };
    let (system, logs) = strategy::train_ensemble(&data.splits.train, &data.splits.val, &names, &spec, &hyper, 2)?;
    for (i, (m, log)) in system.members.iter().zip(&logs).enumerate() {
        match (m, log) {
            (Member::Trained(_), Some(l)) => println!("member {i} (seed {}): loss {:.4} -> {:.4}", 2 + i, l.initial_loss, l.final_loss),
            _ => println!("member {i}: skipped, no positive training window"),
        }
    }
    println!("{} parameters in total", system.param_count());
    let report = strategy::evaluate(&system, &data.splits.test)?;
    print!("{}", render_report(&report, &names)?);
    Ok(())
}
