//! Precision, recall and F1 per class from predicted and true label rows,
//! rendered as text and comma-separated values.

use std::path::Path;

use actionrec::dataio;
use actionrec::metrics::{self, MetricsReport};

fn main() -> actionrec::Result<()> {
    let truth = dataio::parse_labels("100\n110\n011\n001\n101\n010\n", 3, Path::new("truth"))?;
    let predicted = dataio::parse_labels("100\n010\n011\n000\n111\n110\n", 3, Path::new("predicted"))?;
    let names: Vec<String> = ["goal", "face_off", "play"].map(String::from).to_vec();

    let report = MetricsReport::from_predictions(&predicted, &truth)?;
    let text = metrics::render_report(&report, &names)?;
    print!("{text}");
    print!("{}", metrics::render_csv(&report, &names)?);
    let (_, back) = metrics::parse_report(&text, Path::new("report.txt"))?;
    println!("report round-trips: {}", back == report);

    let scores = [0.62, 0.38, 0.98, 0.85, 0.38, 0.79, 0.30, 0.46, 0.78, 0.86, 0.95];
    println!("macro F1 of 11 per-class scores: {:.4}", metrics::macro_f1(&scores)?);
    Ok(())
}
