//! Trains the single-model learner twice on data with a rare class: once with
//! class weights and softened thresholds, once with unit weights and 0.5
//! thresholds. Prints the rare class's test recall for both.
//!
//! `cargo run --release --example imbalance_remedies -- [videos] [epochs] [seed]`

use actionrec::dataio::{synth_sequences, SynthConfig};
use actionrec::metrics::render_report;
use actionrec::nn::{ArchitectureSpec, Hyperparameters};
use actionrec::pipeline::{self, PreprocessParams};
use actionrec::strategy::{self, Control, Remedies};

fn main() -> actionrec::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().ok());
    let videos = args.next().flatten().unwrap_or(60) as usize;
    let epochs = args.next().flatten().unwrap_or(20) as usize;
    let seed = args.next().flatten().unwrap_or(10);

    let cfg = SynthConfig::new(3, videos, 105, 64, 64, vec![0.3, 0.2, 0.02]);
    let names: Vec<String> = ["common", "medium", "rare"].map(String::from).to_vec();
    let data = pipeline::preprocess(&names, &synth_sequences(&cfg, seed)?, &PreprocessParams { seed, ..Default::default() })?;
    let rare = |s: &[pipeline::WindowSample]| s.iter().filter(|w| w.label[2]).count();
    println!(
        "rare positives: train {}/{}, val {}/{}, test {}/{}",
        rare(&data.splits.train),
        data.splits.train.len(),
        rare(&data.splits.val),
        data.splits.val.len(),
        rare(&data.splits.test),
        data.splits.test.len()
    );
    let spec = ArchitectureSpec::micro(3).with_head(data.input_shape().unwrap(), 3);
    let hyper = Hyperparameters { epochs, ..Default::default() };
    for (label, remedies) in [
        ("weights + softening", Remedies::default()),
        ("plain", Remedies { class_weights: false, threshold_softening: false }),
    ] {
        let (sys, log) = strategy::train_single_with(
            &data.splits.train,
            &data.splits.val,
            &names,
            &spec,
            &hyper,
            seed,
            remedies,
            &mut |_, _, _| Control::Continue,
        )?;
        let report = strategy::evaluate(&sys, &data.splits.test)?;
        println!("{label}: loss {:.4} -> {:.4}, thresholds {:.4?}", log.initial_loss, log.final_loss, sys.thresholds);
        print!("{}", render_report(&report, &names)?);
    }
    Ok(())
}
