//! Class weights from label counts, softened thresholds and the calibration
//! text that stores them.

use std::path::Path;

use actionrec::imbalance::{self, CalibrationState, LabelStats};

fn main() -> actionrec::Result<()> {
    let names: Vec<String> = ["play", "goal", "face_off"].map(String::from).to_vec();
    let stats = LabelStats { m: 1000, positives: vec![700, 10, 900] };
    let weights = imbalance::class_weights(&stats, 0.7)?;
    println!("weights {weights:?}");

    let cmax = [1.0, 0.9, 0.8];
    let th = imbalance::soften_thresholds(&weights, &cmax, 0.5)?;
    println!("thresholds {th:?}");

    let conf = [0.45, 0.2, 0.41];
    println!("at 0.5:      {:?}", imbalance::decide(&conf, &[0.5; 3]));
    println!("softened:    {:?}", imbalance::decide(&conf, &th));

    let cal = CalibrationState::new(&names, &weights, &cmax, 0.5, 0.7)?;
    let text = cal.to_string();
    print!("{text}");
    let back = CalibrationState::parse(&text, Path::new("calibration.txt"))?;
    println!("text round-trips: {}", back.to_string() == text);

    let column = [Some(true), Some(false), Some(false), Some(false), Some(false)];
    println!("oversampled indices {:?}", imbalance::oversample_indices(&column, 3)?);
    Ok(())
}
