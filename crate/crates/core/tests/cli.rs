use std::fs;
use std::path::{Path, PathBuf};

use actionrec::cli::dispatch;
use actionrec::dataio;
use actionrec::metrics::{self, MetricsReport};
use actionrec::pipeline;
use actionrec::strategy;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["actionrec"];
    argv.extend_from_slice(args);
    dispatch(argv)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn synth(dir: &Path, seed: &str) {
    let code = run(&[
        "synth", "--k", "3", "--videos", "6", "--frames", "65", "--width", "64", "--height", "64", "--seed", seed,
        "--out", s(dir),
    ]);
    assert_eq!(code, 0);
}

#[test]
fn golden_six_window_report() {
    let out = tempfile::tempdir().unwrap();
    let code = run(&[
        "evaluate",
        "--predictions",
        s(&fixture("six_predicted.txt")),
        "--truth",
        s(&fixture("six_truth.txt")),
        "--classes",
        "goal,face_off,play",
        "--out",
        s(out.path()),
    ]);
    assert_eq!(code, 0);
    let got = fs::read_to_string(out.path().join("report.txt")).unwrap();
    assert_eq!(got, fs::read_to_string(fixture("six_report.txt")).unwrap());
}

#[test]
fn golden_report_from_library() {
    let truth = dataio::read_labels(&fixture("six_truth.txt"), 3).unwrap();
    let pred = dataio::read_labels(&fixture("six_predicted.txt"), 3).unwrap();
    let report = MetricsReport::from_predictions(&pred, &truth).unwrap();
    let names = ["goal", "face_off", "play"].map(String::from);
    let text = metrics::render_report(&report, &names).unwrap();
    assert_eq!(text, fs::read_to_string(fixture("six_report.txt")).unwrap());
    let (_, back) = metrics::parse_report(&text, Path::new("golden")).unwrap();
    assert_eq!(back, report);
}

#[test]
fn fifteen_frame_fixture_majority() {
    let rows = dataio::read_labels(&fixture("fifteen_labels.txt"), 2).unwrap();
    assert_eq!(rows.len(), 15);
    assert_eq!(pipeline::majority_label(&rows).unwrap(), vec![true, false]);
}

#[test]
fn synth_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    synth(a.path(), "7");
    synth(b.path(), "7");
    assert_eq!(snapshot(a.path()), snapshot(b.path()));
    let c = tempfile::tempdir().unwrap();
    synth(c.path(), "8");
    assert_ne!(snapshot(a.path()), snapshot(c.path()));
}

#[test]
fn train_evaluate_calibrate_predict_flow() {
    let root = tempfile::tempdir().unwrap();
    let p = |n: &str| root.path().join(n);
    synth(&p("data"), "3");
    let data_before = snapshot(&p("data"));
    assert_eq!(run(&["preprocess", "--manifest", s(&p("data/manifest.txt")), "--seed", "3", "--out", s(&p("cache"))]), 0);
    fs::write(p("run.cfg"), "# single run\nstrategy=single\nepochs=2\nseed=3\ndata=cache\nout=model\n").unwrap();
    assert_eq!(run(&["train", "--config", s(&p("run.cfg"))]), 0);
    assert_eq!(snapshot(&p("data")), data_before);

    let log = fs::read_to_string(p("model/train_log.txt")).unwrap();
    let logged = log.lines().find_map(|l| l.strip_prefix("test_macro_f1=")).unwrap().to_string();
    assert_eq!(run(&["evaluate", "--model", s(&p("model")), "--data", s(&p("cache")), "--out", s(&p("eval"))]), 0);
    let report = fs::read_to_string(p("eval/report.txt")).unwrap();
    assert!(report.contains("# seed=3") || report.contains("seed=3"));
    assert_eq!(report.lines().last().unwrap(), format!("macro_f1={logged}"));
    assert_eq!(report, fs::read_to_string(p("model/test_report.txt")).unwrap());

    let model_before = snapshot(&p("model"));
    let cal = |out: &str| run(&["calibrate", "--model", s(&p("model")), "--data", s(&p("cache")), "--out", s(&p(out))]);
    assert_eq!(cal("recal1"), 0);
    assert_eq!(snapshot(&p("model")), model_before);
    assert_eq!(
        fs::read(p("recal1/calibration.txt")).unwrap(),
        fs::read(p("model/calibration.txt")).unwrap()
    );
    assert_eq!(run(&["calibrate", "--model", s(&p("recal1")), "--data", s(&p("cache")), "--out", s(&p("recal2"))]), 0);
    assert_eq!(snapshot(&p("recal1")), snapshot(&p("recal2")));
    assert_eq!(cal("model"), 1);

    assert_eq!(run(&["predict", "--model", s(&p("model")), "--data", s(&p("cache")), "--out", s(&p("pred"))]), 0);
    let cached = pipeline::load_cache(&p("cache")).unwrap();
    let lines = fs::read_to_string(p("pred/predictions.txt")).unwrap();
    let rows: Vec<&str> = lines.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), cached.splits.test.len());
    assert!(rows.iter().all(|r| r.split(' ').count() == 3 + 3));

    assert_eq!(
        run(&["predict", "--model", s(&p("model")), "--video", s(&p("data/video_000.hvd")), "--out", s(&p("vid"))]),
        0
    );
    let vid = fs::read_to_string(p("vid/predictions.txt")).unwrap();
    assert_eq!(vid.lines().count(), 1 + pipeline::window_starts(65, 15, 5).unwrap().len());
}

#[test]
fn ensemble_strategy_via_flags() {
    let root = tempfile::tempdir().unwrap();
    let p = |n: &str| root.path().join(n);
    synth(&p("data"), "4");
    let code = run(&[
        "train", "--manifest", s(&p("data/manifest.txt")), "--strategy", "ensemble", "--split", "video", "--epochs",
        "1", "--seed", "4", "--out", s(&p("model")),
    ]);
    assert_eq!(code, 0);
    let sys = strategy::load_system(&p("model")).unwrap();
    assert_eq!(sys.kind, strategy::StrategyKind::Ensemble);
    assert_eq!(sys.members.len(), 3);
    assert_eq!(sys.thresholds, vec![0.5; 3]);
    assert!(sys.calibration.is_none());
    assert_eq!(run(&["calibrate", "--model", s(&p("model")), "--manifest", s(&p("data/manifest.txt")), "--out", s(&p("x"))]), 1);
}

#[test]
fn input_errors_exit_one() {
    let root = tempfile::tempdir().unwrap();
    let p = |n: &str| root.path().join(n);
    synth(&p("data"), "5");
    let bytes = fs::read(p("data/video_001.hvd")).unwrap();
    fs::write(p("data/video_001.hvd"), &bytes[..bytes.len() - 3]).unwrap();
    assert_eq!(run(&["preprocess", "--manifest", s(&p("data/manifest.txt")), "--out", s(&p("cache"))]), 1);
    assert_eq!(run(&["synth", "--k", "2", "--prevalence", "0.5,1.5", "--out", s(&p("bad"))]), 1);
    assert_eq!(run(&["evaluate", "--model", s(&p("missing")), "--data", s(&p("cache"))]), 1);
    assert_eq!(run(&["train", "--epochs", "notanumber"]), 1);
    fs::write(p("bad.cfg"), "epochs=3\nwat\n").unwrap();
    assert_eq!(run(&["train", "--config", s(&p("bad.cfg"))]), 1);
}
