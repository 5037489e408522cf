//! Overfits the single-model learner on 50 synthetic windows and reports the
//! epoch at which training macro-F1 first reaches 1.
//!
//! `cargo run --release --example overfit -- [seed] [lr]`

use std::time::Instant;

use actionrec::dataio::{synth_sequences, SynthConfig};
use actionrec::metrics::MetricsReport;
use actionrec::nn::{self, ArchitectureSpec, Hyperparameters};
use actionrec::pipeline::{raw_windows, Normalizer, PreprocessParams};
use actionrec::strategy::{self, Control, Remedies};
use actionrec::tensor::Tensor;

fn main() -> actionrec::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let lr: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.01);

    let cfg = SynthConfig::new(4, 5, 105, 128, 128, vec![0.4, 0.3, 0.2, 0.15]);
    let videos = synth_sequences(&cfg, seed)?;
    let mut windows = raw_windows(&videos, &PreprocessParams::default())?;
    let norm = Normalizer::fit(windows.iter().map(|w| w.volume.data()))?;
    for w in &mut windows {
        norm.apply(w.volume.data_mut());
    }
    println!("{} windows", windows.len());

    let names: Vec<String> = (0..4).map(|j| format!("class{j}")).collect();
    let hyper = Hyperparameters { epochs: 300, learning_rate: lr, ..Default::default() };
    let truth: Vec<Vec<bool>> = windows.iter().map(|w| w.label.clone()).collect();
    let volumes: Vec<&Tensor> = windows.iter().map(|w| &w.volume).collect();
    let started = Instant::now();
    let mut reached = None;
    let mut observer = |epoch: usize, loss: f64, model: &nn::Model| {
        let (conf, _) = nn::forward(model, &nn::stack(&volumes).unwrap()).unwrap();
        let bits: Vec<Vec<bool>> = conf.data().chunks(4).map(|r| r.iter().map(|&c| c > 0.5).collect()).collect();
        let f1 = MetricsReport::from_predictions(&bits, &truth).unwrap().macro_f1;
        println!("epoch {epoch:3} loss {loss:.5} train macro-F1 {f1:.4}");
        if f1 == 1.0 {
            reached = Some(epoch + 1);
            Control::Stop
        } else {
            Control::Continue
        }
    };
    let (system, log) = strategy::train_single_with(
        &windows,
        &windows,
        &names,
        &ArchitectureSpec::micro(4),
        &hyper,
        seed,
        Remedies::default(),
        &mut observer,
    )?;
    let report = strategy::evaluate(&system, &windows)?;
    println!(
        "epochs {:?}, loss {:.5} -> {:.5}, calibrated train macro-F1 {:.4}, {:.1}s",
        reached,
        log.initial_loss,
        log.final_loss,
        report.macro_f1,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}
