//! Writes a synthetic dataset, preprocesses it into split windows and
//! round-trips the window cache.
//!
//! `cargo run --release --example synth_preprocess -- [out_dir]`

use std::path::PathBuf;

use actionrec::dataio::{self, SynthConfig};
use actionrec::pipeline::{self, Granularity, PreprocessParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("actionrec-synth"));
    let cfg = SynthConfig::new(4, 6, 120, 128, 128, vec![0.4, 0.2, 0.1, 0.05]);
    let manifest = dataio::synth_dataset(&cfg, 7, &out)?;
    println!("wrote {} videos to {}", manifest.entries.len(), out.display());

    let manifest_path = out.join("manifest.txt");
    let videos = dataio::load_sequences(&manifest_path, &manifest)?;
    for (entry, v) in manifest.entries.iter().zip(&videos) {
        let active: Vec<usize> = (0..cfg.k).map(|j| v.labels.iter().filter(|r| r[j]).count()).collect();
        println!("{}: {} frames, positive frames per class {active:?}", entry.video.display(), v.frame_count());
    }

    for granularity in [Granularity::Window, Granularity::Video] {
        let params = PreprocessParams { granularity, seed: 7, ..Default::default() };
        let data = pipeline::preprocess(&manifest.class_names, &videos, &params)?;
        println!(
            "{granularity} split: train {} / val {} / test {} windows of {:?}, mean {:.3} std {:.3}",
            data.splits.train.len(),
            data.splits.val.len(),
            data.splits.test.len(),
            data.input_shape().unwrap_or(&[]),
            data.normalizer.mean,
            data.normalizer.std
        );
        let cache = out.join(format!("cache_{granularity}"));
        let text = std::fs::read_to_string(&manifest_path)?;
        pipeline::save_cache(&cache, &data, &text)?;
        let back = pipeline::load_cache(&cache)?;
        println!("  cache {} round-trips: {}", cache.display(), back == data);
    }
    Ok(())
}
