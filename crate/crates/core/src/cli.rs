//! Command-line entry point: `synth`, `preprocess`, `train`, `calibrate`,
//! `evaluate` and `predict`.
//!
//! Every command also reads an optional `--config` file of `key=value` lines
//! (`#` starts a comment). Flags win over file values. Relative paths in a
//! config file are resolved against the file's directory. Recognised keys:
//! `seed out manifest data model arch strategy split mu alpha epochs lr
//! momentum batch_size patience resize_factor window_size window_overlap
//! split_ratio k videos frames width height prevalence`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 internal error.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::dataio::{self, LabelVec, SynthConfig};
use crate::error::{Error, Result};
use crate::imbalance;
use crate::metrics::{self, MetricsReport};
use crate::nn::{ArchitectureSpec, Hyperparameters};
use crate::pipeline::{self, Granularity, Normalizer, PreparedData, PreprocessParams, WindowSample};
use crate::strategy::{self, StrategyKind, TrainedSystem};
use crate::tensor::Tensor;

#[derive(Debug, Parser)]
#[command(name = "actionrec", version, about = "Multi-label action recognition on HVD videos")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Default, Args)]
struct Common {
    /// Seed for every random choice the command makes.
    #[arg(long)]
    seed: Option<u64>,
    /// `key=value` run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
struct PrepFlags {
    /// Split granularity.
    #[arg(long)]
    split: Option<Granularity>,
    #[arg(long)]
    resize_factor: Option<usize>,
    #[arg(long)]
    window_size: Option<usize>,
    #[arg(long)]
    window_overlap: Option<usize>,
    #[arg(long)]
    split_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
struct HyperFlags {
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Stop after this many epochs without improvement.
    #[arg(long)]
    patience: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
struct DataFlags {
    /// Window cache written by `preprocess`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Dataset manifest, preprocessed in memory when no cache is given.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    prep: PrepFlags,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic labelled dataset.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        videos: Option<usize>,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
        /// Comma-separated per-class frame prevalence.
        #[arg(long)]
        prevalence: Option<String>,
    },
    /// Downscale, normalize, windowize and split into a window cache.
    Preprocess {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        prep: PrepFlags,
    },
    /// Train an ensemble or single-model system.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataFlags,
        #[arg(long)]
        strategy: Option<StrategyKind>,
        /// Architecture text; input shape and head width follow the data.
        #[arg(long)]
        arch: Option<PathBuf>,
        #[command(flatten)]
        hyper: HyperFlags,
    },
    /// Recompute softened thresholds of a single-model system.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataFlags,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Score a system on one split, or compare two label files.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataFlags,
        #[arg(long)]
        model: Option<PathBuf>,
        /// train, val or test.
        #[arg(long, default_value = "test")]
        part: String,
        /// Predicted label file (with --truth, instead of a model).
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Comma-separated class names for label-file evaluation.
        #[arg(long)]
        classes: Option<String>,
        /// Also write comma-separated values.
        #[arg(long)]
        csv: bool,
    },
    /// Print bits and confidences per window.
    Predict {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataFlags,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = "test")]
        part: String,
        /// Raw HVD video to window and predict instead of a split.
        #[arg(long)]
        video: Option<PathBuf>,
    },
}

/// Parsed `key=value` configuration file.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    base: PathBuf,
    values: Vec<(String, String)>,
}

const CONFIG_KEYS: &[&str] = &[
    "seed", "out", "manifest", "data", "model", "arch", "strategy", "split", "mu", "alpha", "epochs", "lr",
    "momentum", "batch_size", "patience", "resize_factor", "window_size", "window_overlap", "split_ratio", "k",
    "videos", "frames", "width", "height", "prevalence",
];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let values = pipeline::read_kv(path)?;
        if let Some((k, _)) = values.iter().find(|(k, _)| !CONFIG_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("{}: unknown key `{k}`", path.display())));
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(RunConfig { base, values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| v.parse().map_err(|_| Error::Config(format!("config key `{key}`: cannot parse `{v}`"))))
            .transpose()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(|v| self.base.join(v))
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    common.config.as_deref().map(RunConfig::load).transpose().map(Option::unwrap_or_default)
}

fn pick<T: FromStr>(flag: Option<T>, cfg: &RunConfig, key: &str) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.get(key),
    }
}

fn pick_path(flag: &Option<PathBuf>, cfg: &RunConfig, key: &str) -> Option<PathBuf> {
    flag.clone().or_else(|| cfg.path(key))
}

fn require<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::arg(format!("missing --{what}")))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn prep_params(flags: &PrepFlags, cfg: &RunConfig, seed: u64) -> Result<PreprocessParams> {
    let d = PreprocessParams::default();
    Ok(PreprocessParams {
        resize_factor: pick(flags.resize_factor, cfg, "resize_factor")?.unwrap_or(d.resize_factor),
        window_size: pick(flags.window_size, cfg, "window_size")?.unwrap_or(d.window_size),
        window_overlap: pick(flags.window_overlap, cfg, "window_overlap")?.unwrap_or(d.window_overlap),
        split_ratio: pick(flags.split_ratio, cfg, "split_ratio")?.unwrap_or(d.split_ratio),
        granularity: pick(flags.split, cfg, "split")?.unwrap_or(d.granularity),
        seed,
    })
}

/// Prepared windows plus `(cache key, manifest digest)` identifying them.
fn load_data(flags: &DataFlags, cfg: &RunConfig, seed: u64) -> Result<(PreparedData, String, String)> {
    if let Some(dir) = pick_path(&flags.data, cfg, "data") {
        let data = pipeline::load_cache(&dir)?;
        let kv = pipeline::read_kv(&dir.join("preprocess.txt"))?;
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone()).unwrap_or_default();
        return Ok((data, get("key"), get("manifest_sha256")));
    }
    let path = require(pick_path(&flags.manifest, cfg, "manifest"), "data or --manifest")?;
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest = dataio::load_manifest(&path)?;
    let videos = dataio::load_sequences(&path, &manifest)?;
    let params = prep_params(&flags.prep, cfg, seed)?;
    let data = pipeline::preprocess(&manifest.class_names, &videos, &params)?;
    Ok((data, pipeline::cache_key(&text, &params), pipeline::sha256_hex(text.as_bytes())))
}

fn part<'a>(data: &'a PreparedData, name: &str) -> Result<&'a [WindowSample]> {
    match name {
        "train" => Ok(&data.splits.train),
        "val" => Ok(&data.splits.val),
        "test" => Ok(&data.splits.test),
        other => Err(Error::arg(format!("part must be train, val or test, got `{other}`"))),
    }
}

fn cmd_synth(
    common: &Common,
    k: Option<usize>,
    videos: Option<usize>,
    frames: Option<usize>,
    width: Option<usize>,
    height: Option<usize>,
    prevalence: Option<String>,
) -> Result<()> {
    let cfg = load_config(common)?;
    let out = require(pick_path(&common.out, &cfg, "out"), "out")?;
    let seed = pick(common.seed, &cfg, "seed")?.unwrap_or(0);
    let k = pick(k, &cfg, "k")?.unwrap_or(4);
    let prevalence: Vec<f64> = match pick(prevalence, &cfg, "prevalence")? {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Error::arg(format!("bad prevalence `{s}`"))))
            .collect::<Result<_>>()?,
        None => (0..k).map(|j| (0.4 / f64::powi(2.0, j as i32)).max(0.02)).collect(),
    };
    let sc = SynthConfig::new(
        k,
        pick(videos, &cfg, "videos")?.unwrap_or(6),
        pick(frames, &cfg, "frames")?.unwrap_or(120),
        pick(width, &cfg, "width")?.unwrap_or(128),
        pick(height, &cfg, "height")?.unwrap_or(128),
        prevalence,
    );
    dataio::synth_dataset(&sc, seed, &out)?;
    let prev: Vec<String> = sc.class_prevalence.iter().map(|p| format!("{p:?}")).collect();
    write_file(
        &out.join("synth.txt"),
        &format!(
            "seed={seed}\nk={}\nvideos={}\nframes={}\nwidth={}\nheight={}\nprevalence={}\n",
            sc.k,
            sc.videos,
            sc.frames_per_video,
            sc.width,
            sc.height,
            prev.join(",")
        ),
    )?;
    println!("wrote {} videos to {}", sc.videos, out.display());
    Ok(())
}

fn cmd_preprocess(common: &Common, manifest: &Option<PathBuf>, prep: &PrepFlags) -> Result<()> {
    let cfg = load_config(common)?;
    let out = require(pick_path(&common.out, &cfg, "out"), "out")?;
    let seed = pick(common.seed, &cfg, "seed")?.unwrap_or(0);
    let path = require(pick_path(manifest, &cfg, "manifest"), "manifest")?;
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m = dataio::load_manifest(&path)?;
    let videos = dataio::load_sequences(&path, &m)?;
    let params = prep_params(prep, &cfg, seed)?;
    let data = pipeline::preprocess(&m.class_names, &videos, &params)?;
    pipeline::save_cache(&out, &data, &text)?;
    println!(
        "cached {} train, {} val, {} test windows in {}",
        data.splits.train.len(),
        data.splits.val.len(),
        data.splits.test.len(),
        out.display()
    );
    Ok(())
}

fn hyper_params(flags: &HyperFlags, cfg: &RunConfig, prep: &PreprocessParams) -> Result<Hyperparameters> {
    let d = Hyperparameters::default();
    let h = Hyperparameters {
        learning_rate: pick(flags.lr, cfg, "lr")?.unwrap_or(d.learning_rate),
        momentum: pick(flags.momentum, cfg, "momentum")?.unwrap_or(d.momentum),
        epochs: pick(flags.epochs, cfg, "epochs")?.unwrap_or(d.epochs),
        batch_size: pick(flags.batch_size, cfg, "batch_size")?.unwrap_or(d.batch_size),
        mu: pick(flags.mu, cfg, "mu")?.unwrap_or(d.mu),
        alpha: pick(flags.alpha, cfg, "alpha")?.unwrap_or(d.alpha),
        window_size: prep.window_size,
        window_overlap: prep.window_overlap,
        resize_factor: prep.resize_factor,
        split_ratio: prep.split_ratio,
        patience: pick(flags.patience, cfg, "patience")?,
    };
    h.validate()?;
    Ok(h)
}

fn report_header(system: &TrainedSystem, part: &str) -> String {
    let mut s = format!("# kind={} seed={} part={part}\n", system.kind, system.seed);
    for (k, v) in &system.provenance {
        s.push_str(&format!("# {k}={v}\n"));
    }
    s
}

fn cmd_train(
    common: &Common,
    data_flags: &DataFlags,
    strategy_flag: Option<StrategyKind>,
    arch: &Option<PathBuf>,
    hyper_flags: &HyperFlags,
) -> Result<()> {
    let cfg = load_config(common)?;
    let out = require(pick_path(&common.out, &cfg, "out"), "out")?;
    let seed = pick(common.seed, &cfg, "seed")?.unwrap_or(0);
    let kind = pick(strategy_flag, &cfg, "strategy")?.unwrap_or(StrategyKind::Single);
    let (data, key, manifest_sha) = load_data(data_flags, &cfg, seed)?;
    let hyper = hyper_params(hyper_flags, &cfg, &data.params)?;
    let k = data.k();
    let shape = data.input_shape().ok_or_else(|| Error::arg("no windows"))?.to_vec();
    let base = match pick_path(arch, &cfg, "arch") {
        Some(p) => fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?.parse()?,
        None => ArchitectureSpec::micro(k),
    };
    let (train, val) = (&data.splits.train, &data.splits.val);
    let mut log_text = format!("seed={seed}\nstrategy={kind}\n");
    let mut system = match kind {
        StrategyKind::Single => {
            let spec = base.with_head(&shape, k);
            let (sys, log) = strategy::train_single(train, val, &data.class_names, &spec, &hyper, seed)?;
            log_text.push_str(&render_log(0, &log));
            sys
        }
        StrategyKind::Ensemble => {
            let spec = base.with_head(&shape, 1);
            let (sys, logs) = strategy::train_ensemble(train, val, &data.class_names, &spec, &hyper, seed)?;
            for (i, l) in logs.iter().enumerate() {
                match l {
                    Some(l) => log_text.push_str(&render_log(i, l)),
                    None => log_text.push_str(&format!("member {i} skipped\n")),
                }
            }
            sys
        }
    };
    let prov = &mut system.provenance;
    for (k, v) in [
        ("data_key", key),
        ("manifest_sha256", manifest_sha),
        ("epochs", hyper.epochs.to_string()),
        ("lr", format!("{:?}", hyper.learning_rate)),
        ("momentum", format!("{:?}", hyper.momentum)),
        ("batch_size", hyper.batch_size.to_string()),
        ("mu", format!("{:?}", hyper.mu)),
        ("alpha", format!("{:?}", hyper.alpha)),
        ("patience", hyper.patience.map_or("none".into(), |p| p.to_string())),
        ("resize_factor", data.params.resize_factor.to_string()),
        ("window_size", data.params.window_size.to_string()),
        ("window_overlap", data.params.window_overlap.to_string()),
        ("norm_mean", format!("{:?}", data.normalizer.mean)),
        ("norm_std", format!("{:?}", data.normalizer.std)),
    ] {
        prov.push((k.to_string(), v));
    }
    strategy::save_system(&out, &system)?;
    if !data.splits.test.is_empty() {
        let report = strategy::evaluate(&system, &data.splits.test)?;
        let text = metrics::render_report(&report, &system.class_names)?;
        write_file(&out.join("test_report.txt"), &(report_header(&system, "test") + &text))?;
        log_text.push_str(&format!("test_macro_f1={:.6}\n", report.macro_f1));
        println!("test macro_f1={:.6}", report.macro_f1);
    }
    write_file(&out.join("train_log.txt"), &log_text)?;
    log::info!("saved {} system to {}", kind, out.display());
    Ok(())
}

fn render_log(member: usize, log: &strategy::TrainingLog) -> String {
    let mut s = format!("member {member} initial_loss={:?}\n", log.initial_loss);
    for (e, l) in log.epoch_losses.iter().enumerate() {
        s.push_str(&format!("member {member} epoch {e} loss={l:?}\n"));
    }
    s.push_str(&format!("member {member} final_loss={:?}\n", log.final_loss));
    s
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn cmd_calibrate(
    common: &Common,
    data_flags: &DataFlags,
    model: &Option<PathBuf>,
    mu: Option<f64>,
    alpha: Option<f64>,
) -> Result<()> {
    let cfg = load_config(common)?;
    let out = require(pick_path(&common.out, &cfg, "out"), "out")?;
    let model_dir = require(pick_path(model, &cfg, "model"), "model")?;
    if same_dir(&out, &model_dir) {
        return Err(Error::arg("--out must differ from --model; inputs are never modified"));
    }
    let mut system = strategy::load_system(&model_dir)?;
    let seed = pick(common.seed, &cfg, "seed")?.unwrap_or(system.seed);
    let (data, _, _) = load_data(data_flags, &cfg, seed)?;
    if data.class_names != system.class_names {
        return Err(Error::arg("data classes differ from the model's classes"));
    }
    let prev = system.calibration.as_ref();
    let d = Hyperparameters::default();
    let mu = pick(mu, &cfg, "mu")?.or(prev.map(|c| c.mu)).unwrap_or(d.mu);
    let alpha = pick(alpha, &cfg, "alpha")?.or(prev.map(|c| c.alpha)).unwrap_or(d.alpha);
    let labels: Vec<LabelVec> = data.splits.train.iter().map(|s| s.label.clone()).collect();
    let weights = imbalance::class_weights(&imbalance::label_stats(&labels)?, mu)?;
    strategy::calibrate(&mut system, &data.splits.val, &weights, alpha, mu)?;
    for (key, v) in [("mu", format!("{mu:?}")), ("alpha", format!("{alpha:?}"))] {
        match system.provenance.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = v,
            None => system.provenance.push((key.to_string(), v)),
        }
    }
    strategy::save_system(&out, &system)?;
    print!("{}", system.calibration.as_ref().map(ToString::to_string).unwrap_or_default());
    Ok(())
}

fn infer_k(path: &Path) -> Result<usize> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .next()
        .map(str::len)
        .filter(|&k| k > 0)
        .ok_or_else(|| Error::Parse { path: path.to_path_buf(), line: 1, msg: "empty label file".into() })
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    common: &Common,
    data_flags: &DataFlags,
    model: &Option<PathBuf>,
    part_name: &str,
    predictions: &Option<PathBuf>,
    truth: &Option<PathBuf>,
    classes: &Option<String>,
    csv: bool,
) -> Result<()> {
    let cfg = load_config(common)?;
    let (names, report, header): (Vec<String>, MetricsReport, String) = match (predictions, truth) {
        (Some(p), Some(t)) => {
            let k = infer_k(t)?;
            let names: Vec<String> = match classes {
                Some(list) => list.split(',').map(str::to_string).collect(),
                None => (0..k).map(|j| format!("class{j}")).collect(),
            };
            if names.len() != k {
                return Err(Error::arg(format!("{} class names for {k}-bit labels", names.len())));
            }
            let report = MetricsReport::from_predictions(&dataio::read_labels(p, k)?, &dataio::read_labels(t, k)?)?;
            (names, report, String::new())
        }
        (None, None) => {
            let model_dir = require(pick_path(model, &cfg, "model"), "model")?;
            let system = strategy::load_system(&model_dir)?;
            let seed = pick(common.seed, &cfg, "seed")?.unwrap_or(system.seed);
            let (data, _, _) = load_data(data_flags, &cfg, seed)?;
            let report = strategy::evaluate(&system, part(&data, part_name)?)?;
            let header = report_header(&system, part_name);
            (system.class_names, report, header)
        }
        _ => return Err(Error::arg("--predictions and --truth go together")),
    };
    let text = metrics::render_report(&report, &names)?;
    print!("{text}");
    if let Some(out) = pick_path(&common.out, &cfg, "out") {
        write_file(&out.join("report.txt"), &(header + &text))?;
        if csv {
            write_file(&out.join("report.csv"), &metrics::render_csv(&report, &names)?)?;
        }
    }
    Ok(())
}

fn provenance_value<T: FromStr>(system: &TrainedSystem, key: &str) -> Result<T> {
    system
        .provenance
        .iter()
        .find(|(k, _)| k == key)
        .and_then(|(_, v)| v.parse().ok())
        .ok_or_else(|| Error::Config(format!("model has no usable `{key}` record")))
}

fn prediction_line(video: usize, start: usize, bits: &[bool], conf: &[f64]) -> String {
    let c: Vec<String> = conf.iter().map(|v| format!("{v:.6}")).collect();
    format!("{video} {start} {} {}\n", dataio::bits_to_string(bits), c.join(" "))
}

fn cmd_predict(
    common: &Common,
    data_flags: &DataFlags,
    model: &Option<PathBuf>,
    part_name: &str,
    video: &Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(common)?;
    let model_dir = require(pick_path(model, &cfg, "model"), "model")?;
    let system = strategy::load_system(&model_dir)?;
    let mut out_text = String::from("# video start bits confidences\n");
    if let Some(path) = video {
        let seq = dataio::read_video(path)?;
        let factor: usize = provenance_value(&system, "resize_factor")?;
        let size: usize = provenance_value(&system, "window_size")?;
        let overlap: usize = provenance_value(&system, "window_overlap")?;
        let norm = Normalizer { mean: provenance_value(&system, "norm_mean")?, std: provenance_value(&system, "norm_std")? };
        let small: Vec<pipeline::RealFrame> = seq
            .frames
            .iter()
            .map(|f| pipeline::downscale(f, seq.width, seq.height, factor))
            .collect::<Result<_>>()?;
        let starts = pipeline::window_starts(small.len(), size, overlap)?;
        let mut volumes = Vec::with_capacity(starts.len());
        for &s in &starts {
            let (h, w) = (small[s].height, small[s].width);
            let mut data: Vec<f64> = small[s..s + size].iter().flat_map(|f| f.data.iter().copied()).collect();
            norm.apply(&mut data);
            volumes.push(Tensor::from_vec(&[1, size, h, w], data)?);
        }
        let refs: Vec<&Tensor> = volumes.iter().collect();
        for (&s, (bits, conf)) in starts.iter().zip(strategy::predict_batch(&system, &refs)?) {
            out_text.push_str(&prediction_line(0, s, &bits, &conf));
        }
    } else {
        let seed = pick(common.seed, &cfg, "seed")?.unwrap_or(system.seed);
        let (data, _, _) = load_data(data_flags, &cfg, seed)?;
        let samples = part(&data, part_name)?;
        let refs: Vec<&Tensor> = samples.iter().map(|s| &s.volume).collect();
        for (s, (bits, conf)) in samples.iter().zip(strategy::predict_batch(&system, &refs)?) {
            out_text.push_str(&prediction_line(s.source.video, s.source.start, &bits, &conf));
        }
    }
    print!("{out_text}");
    if let Some(out) = pick_path(&common.out, &cfg, "out") {
        write_file(&out.join("predictions.txt"), &out_text)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { common, k, videos, frames, width, height, prevalence } => {
            cmd_synth(&common, k, videos, frames, width, height, prevalence)
        }
        Command::Preprocess { common, manifest, prep } => cmd_preprocess(&common, &manifest, &prep),
        Command::Train { common, data, strategy, arch, hyper } => cmd_train(&common, &data, strategy, &arch, &hyper),
        Command::Calibrate { common, data, model, mu, alpha } => cmd_calibrate(&common, &data, &model, mu, alpha),
        Command::Evaluate { common, data, model, part, predictions, truth, classes, csv } => {
            cmd_evaluate(&common, &data, &model, &part, &predictions, &truth, &classes, csv)
        }
        Command::Predict { common, data, model, part, video } => cmd_predict(&common, &data, &model, &part, &video),
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                1
            } else {
                2
            }
        }
    }
}
