//! HVD video, label file, manifest and architecture text, each written and
//! read back.

use std::path::PathBuf;

use actionrec::dataio::{self, DatasetManifest, ManifestEntry, SplitTag};
use actionrec::nn::ArchitectureSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::temp_dir().join("actionrec-formats");
    std::fs::create_dir_all(&dir)?;
    let cfg = dataio::SynthConfig::new(2, 1, 20, 16, 12, vec![0.5, 0.3]);
    let video = dataio::synth_sequences(&cfg, 1)?.remove(0);

    let bytes = dataio::encode_hvd(&video)?;
    println!("HVD: {} bytes, header {:02x?}", bytes.len(), &bytes[..dataio::HVD_HEADER_LEN]);
    dataio::write_video(&dir.join("clip.hvd"), &video)?;
    let back = dataio::read_video(&dir.join("clip.hvd"))?;
    println!("frames equal after read: {}", back.frames == video.frames);

    dataio::write_labels(&dir.join("clip.txt"), &video.labels)?;
    print!("labels (first 3 rows):\n{}", dataio::format_labels(&video.labels[..3]));
    println!("labels equal after read: {}", dataio::read_labels(&dir.join("clip.txt"), 2)? == video.labels);

    let manifest = DatasetManifest {
        k: 2,
        class_names: vec!["goal".into(), "play".into()],
        entries: vec![ManifestEntry { video: "clip.hvd".into(), labels: "clip.txt".into(), split: SplitTag::Unassigned }],
        resize_factor: Some(4),
        norm_mean: None,
        norm_std: None,
    };
    dataio::save_manifest(&dir.join("manifest.txt"), &manifest)?;
    print!("manifest:\n{}", manifest.to_text());
    println!("manifest equal after load: {}", dataio::load_manifest(&dir.join("manifest.txt"))? == manifest);

    let spec = ArchitectureSpec::micro(2);
    let text = spec.to_string();
    print!("architecture:\n{text}");
    println!("architecture equal after parse: {}", text.parse::<ArchitectureSpec>()? == spec);

    let bad = dataio::decode_hvd(&bytes[..bytes.len() - 1], &dir.join("clip.hvd"));
    println!("truncated file: {}", bad.unwrap_err());
    Ok(())
}
