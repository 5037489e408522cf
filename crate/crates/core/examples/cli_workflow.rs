//! The command-line workflow run in-process: synth, preprocess, train,
//! evaluate, predict.
//!
//! `cargo run --release --example cli_workflow -- [work_dir]`

use std::path::PathBuf;

fn main() {
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("actionrec-cli"));
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec!["synth".into(), "--k".into(), "3".into(), "--videos".into(), "6".into(), "--frames".into(), "95".into(), "--seed".into(), "7".into(), "--out".into(), p("data")],
        vec!["preprocess".into(), "--manifest".into(), p("data/manifest.txt"), "--seed".into(), "7".into(), "--out".into(), p("cache")],
        vec!["train".into(), "--data".into(), p("cache"), "--strategy".into(), "single".into(), "--epochs".into(), "5".into(), "--seed".into(), "7".into(), "--out".into(), p("model")],
        vec!["evaluate".into(), "--model".into(), p("model"), "--data".into(), p("cache"), "--csv".into(), "--out".into(), p("eval")],
        vec!["predict".into(), "--model".into(), p("model"), "--data".into(), p("cache"), "--part".into(), "val".into()],
    ];
    for step in steps {
        println!("$ actionrec {}", step.join(" "));
        let code = actionrec::cli::dispatch(std::iter::once("actionrec".to_string()).chain(step));
        if code != 0 {
            eprintln!("exit code {code}");
            std::process::exit(code);
        }
    }
}
