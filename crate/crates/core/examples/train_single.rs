//! Trains the single-model system (class-weighted loss, softened thresholds),
//! evaluates it on the test split and saves it.
//!
//! `cargo run --release --example train_single -- [epochs] [out_dir]`

use std::path::PathBuf;

use actionrec::dataio::{synth_sequences, SynthConfig};
use actionrec::metrics::render_report;
use actionrec::nn::{ArchitectureSpec, Hyperparameters};
use actionrec::pipeline::{self, PreprocessParams};
use actionrec::strategy;

fn main() -> actionrec::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(15);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("actionrec-single"));

    let cfg = SynthConfig::new(4, 12, 105, 128, 128, vec![0.4, 0.2, 0.1, 0.05]);
    let names: Vec<String> = (0..4).map(|j| format!("class{j}")).collect();
    let data = pipeline::preprocess(&names, &synth_sequences(&cfg, 2)?, &PreprocessParams { seed: 2, ..Default::default() })?;

    let spec = ArchitectureSpec::micro(4);
    let hyper = Hyperparameters { epochs, ..Default::default() };
    let (system, log) = strategy::train_single(&data.splits.train, &data.splits.val, &names, &spec, &hyper, 2)?;
    println!("loss {:.4} -> {:.4} over {} epochs", log.initial_loss, log.final_loss, log.epoch_losses.len());
    if let Some(cal) = &system.calibration {
        print!("{cal}");
    }

    let report = strategy::evaluate(&system, &data.splits.test)?;
    print!("{}", render_report(&report, &names)?);

    let (bits, conf) = strategy::predict(&system, &data.splits.test[0].volume)?;
    println!("first test window: predicted {bits:?}, truth {:?}, confidences {conf:.3?}", data.splits.test[0].label);

    strategy::save_system(&out, &system)?;
    let back = strategy::load_system(&out)?;
    println!("saved to {}; reload identical: {}", out.display(), back.members == system.members);
    Ok(())
}
