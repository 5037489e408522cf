//! The two end-to-end learners and prediction with per-class thresholds.
//!
//! * **Single**: one network with `k` sigmoid outputs, trained with
//!   class-weighted BCE, then thresholds softened from the maximum
//!   validation confidences.
//! * **Ensemble**: `k` independent one-output networks (binary relevance),
//!   each trained on a training set oversampled to balance its own class,
//!   all deciding at the default threshold.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataio::LabelVec;
use crate::error::{Error, Result};
use crate::imbalance::{self, CalibrationState};
use crate::metrics::MetricsReport;
use crate::nn::{self, ArchitectureSpec, Hyperparameters, Model};
use crate::pipeline::WindowSample;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Ensemble,
    Single,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Ensemble => "ensemble",
            StrategyKind::Single => "single",
        })
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ensemble" => Ok(StrategyKind::Ensemble),
            "single" => Ok(StrategyKind::Single),
            other => Err(Error::arg(format!("strategy must be ensemble or single, got `{other}`"))),
        }
    }
}

/// An ensemble slot. Classes with no positive training window get no network
/// and always predict negative.
#[derive(Debug, Clone, PartialEq)]
pub enum Member {
    Trained(Model),
    Skipped,
}

impl Member {
    pub fn model(&self) -> Option<&Model> {
        match self {
            Member::Trained(m) => Some(m),
            Member::Skipped => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedSystem {
    pub kind: StrategyKind,
    pub class_names: Vec<String>,
    /// One entry for `Single`, `k` for `Ensemble`.
    pub members: Vec<Member>,
    pub thresholds: Vec<f64>,
    /// Present for a single system trained with threshold softening.
    pub calibration: Option<CalibrationState>,
    pub seed: u64,
    /// Free-form `key=value` pairs describing the run that produced the system.
    pub provenance: Vec<(String, String)>,
}

impl TrainedSystem {
    pub fn k(&self) -> usize {
        self.class_names.len()
    }

    pub fn spec(&self) -> Option<&ArchitectureSpec> {
        self.members.iter().find_map(Member::model).map(|m| &m.spec)
    }

    pub fn param_count(&self) -> usize {
        self.members.iter().filter_map(Member::model).map(Model::param_count).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    pub initial_loss: f64,
    /// Mean mini-batch loss of each epoch run.
    pub epoch_losses: Vec<f64>,
    /// Full-pass training loss after the last epoch.
    pub final_loss: f64,
}

/// Returned by an epoch observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Called after every epoch with `(epoch index, epoch loss, model)`.
pub type Observer<'a> = dyn FnMut(usize, f64, &Model) -> Control + 'a;

fn label_tensor(rows: &[&[f64]]) -> Result<Tensor> {
    let k = rows.first().map_or(0, |r| r.len());
    Tensor::from_vec(&[rows.len(), k], rows.iter().flat_map(|r| r.iter().copied()).collect())
}

fn full_loss(model: &Model, volumes: &[&Tensor], targets: &[Vec<f64>], weights: &[f64], batch: usize) -> Result<f64> {
    let mut total = 0.0;
    for (vs, ts) in volumes.chunks(batch).zip(targets.chunks(batch)) {
        let rows: Vec<&[f64]> = ts.iter().map(Vec::as_slice).collect();
        let (l, _) = nn::loss(model, &nn::stack(vs)?, &label_tensor(&rows)?, weights)?;
        total += l * vs.len() as f64;
    }
    Ok(total / volumes.len() as f64)
}

/// Mini-batch momentum SGD on `(volume, target)` pairs. Batch order is
/// reshuffled each epoch from a stream seeded by `seed`.
pub fn fit(
    model: &mut Model,
    volumes: &[&Tensor],
    targets: &[Vec<f64>],
    class_weights: &[f64],
    hyper: &Hyperparameters,
    seed: u64,
    observer: &mut Observer<'_>,
) -> Result<TrainingLog> {
    hyper.validate()?;
    if volumes.is_empty() || volumes.len() != targets.len() {
        return Err(Error::arg(format!(
            "need matching non-empty volumes and targets, got {} and {}",
            volumes.len(),
            targets.len()
        )));
    }
    let batch = hyper.batch_size;
    let initial_loss = full_loss(model, volumes, targets, class_weights, batch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut velocity = model.zero_like();
    let mut order: Vec<usize> = (0..volumes.len()).collect();
    let mut epoch_losses = Vec::with_capacity(hyper.epochs);
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        for chunk in order.chunks(batch) {
            let vs: Vec<&Tensor> = chunk.iter().map(|&i| volumes[i]).collect();
            let rows: Vec<&[f64]> = chunk.iter().map(|&i| targets[i].as_slice()).collect();
            let (l, grads) = nn::loss_gradients(model, &nn::stack(&vs)?, &label_tensor(&rows)?, class_weights)?;
            nn::sgd_step(model, &grads, hyper, &mut velocity)?;
            sum += l * chunk.len() as f64;
        }
        let epoch_loss = sum / volumes.len() as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::Internal(format!("training loss diverged at epoch {epoch}")));
        }
        log::debug!("epoch {epoch}: loss {epoch_loss:.6}");
        epoch_losses.push(epoch_loss);
        if observer(epoch, epoch_loss, model) == Control::Stop {
            break;
        }
        if epoch_loss < best {
            best = epoch_loss;
            since_best = 0;
        } else {
            since_best += 1;
            if hyper.patience.is_some_and(|p| since_best >= p) {
                log::info!("stopping after {} epochs without improvement", since_best);
                break;
            }
        }
    }
    let final_loss = full_loss(model, volumes, targets, class_weights, batch)?;
    Ok(TrainingLog { initial_loss, epoch_losses, final_loss })
}

/// Which class-imbalance remedies a single-model run applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Remedies {
    pub class_weights: bool,
    pub threshold_softening: bool,
}

impl Default for Remedies {
    fn default() -> Self {
        Remedies { class_weights: true, threshold_softening: true }
    }
}

fn targets_of(samples: &[WindowSample]) -> Vec<Vec<f64>> {
    samples
        .iter()
        .map(|s| s.label.iter().map(|&b| f64::from(u8::from(b))).collect())
        .collect()
}

fn check_splits(train: &[WindowSample], val: &[WindowSample], k: usize) -> Result<()> {
    if train.is_empty() || val.is_empty() {
        return Err(Error::arg("training and validation sets must be non-empty"));
    }
    if let Some(s) = train.iter().chain(val).find(|s| s.label.len() != k) {
        return Err(Error::arg(format!("window label has {} bits, expected {k}", s.label.len())));
    }
    Ok(())
}

pub fn train_single(
    train: &[WindowSample],
    val: &[WindowSample],
    class_names: &[String],
    spec: &ArchitectureSpec,
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<(TrainedSystem, TrainingLog)> {
    train_single_with(train, val, class_names, spec, hyper, seed, Remedies::default(), &mut |_, _, _| Control::Continue)
}

/// Stage one trains with class weights (or unit weights) at default
/// thresholds; stage two softens thresholds from validation confidences.
#[allow(clippy::too_many_arguments)]
pub fn train_single_with(
    train: &[WindowSample],
    val: &[WindowSample],
    class_names: &[String],
    spec: &ArchitectureSpec,
    hyper: &Hyperparameters,
    seed: u64,
    remedies: Remedies,
    observer: &mut Observer<'_>,
) -> Result<(TrainedSystem, TrainingLog)> {
    let k = class_names.len();
    if spec.output_count != k {
        return Err(Error::arg(format!(
            "architecture has {} outputs for {k} classes",
            spec.output_count
        )));
    }
    check_splits(train, val, k)?;
    let labels: Vec<LabelVec> = train.iter().map(|s| s.label.clone()).collect();
    let weights = if remedies.class_weights {
        imbalance::class_weights(&imbalance::label_stats(&labels)?, hyper.mu)?
    } else {
        vec![1.0; k]
    };
    let mut model = nn::build_model(spec, seed)?;
    let volumes: Vec<&Tensor> = train.iter().map(|s| &s.volume).collect();
    let log = fit(&mut model, &volumes, &targets_of(train), &weights, hyper, seed, observer)?;
    let mut system = TrainedSystem {
        kind: StrategyKind::Single,
        class_names: class_names.to_vec(),
        members: vec![Member::Trained(model)],
        thresholds: vec![hyper.alpha; k],
        calibration: None,
        seed,
        provenance: Vec::new(),
    };
    if remedies.threshold_softening {
        calibrate(&mut system, val, &weights, hyper.alpha, hyper.mu)?;
    }
    Ok((system, log))
}

/// Recomputes softened thresholds for a single system from `val`.
pub fn calibrate(system: &mut TrainedSystem, val: &[WindowSample], weights: &[f64], alpha: f64, mu: f64) -> Result<()> {
    let model = match (system.kind, system.members.first()) {
        (StrategyKind::Single, Some(Member::Trained(m))) => m,
        _ => return Err(Error::arg("threshold calibration applies to single-model systems only")),
    };
    let cmax = imbalance::max_confidences(model, val)?;
    let cal = CalibrationState::new(&system.class_names, weights, &cmax, alpha, mu)?;
    system.thresholds = cal.thresholds();
    system.calibration = Some(cal);
    Ok(())
}

/// Trains one single-output network per class. Member `i` uses seed
/// `seed + i` for initialization, oversampling and batch order. Members train
/// in parallel; each is internally sequential, so results do not depend on
/// scheduling. `val` is not used: ensemble members keep the default threshold.
pub fn train_ensemble(
    train: &[WindowSample],
    val: &[WindowSample],
    class_names: &[String],
    spec_single_output: &ArchitectureSpec,
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<(TrainedSystem, Vec<Option<TrainingLog>>)> {
    let k = class_names.len();
    if spec_single_output.output_count != 1 {
        return Err(Error::arg(format!(
            "ensemble members need a 1-output architecture, got {}",
            spec_single_output.output_count
        )));
    }
    check_splits(train, val, k)?;
    let volumes: Vec<&Tensor> = train.iter().map(|s| &s.volume).collect();
    let results: Vec<Result<(Member, Option<TrainingLog>)>> = (0..k)
        .into_par_iter()
        .map(|class| {
            let member_seed = seed.wrapping_add(class as u64);
            let column: Vec<Option<bool>> = train.iter().map(|s| Some(s.label[class])).collect();
            let positives = column.iter().filter(|b| **b == Some(true)).count();
            if positives == 0 {
                log::warn!("class {} has no positive training window; member skipped", class_names[class]);
                return Ok((Member::Skipped, None));
            }
            let picks: Vec<usize> = if positives == column.len() {
                (0..column.len()).collect()
            } else {
                imbalance::oversample_indices(&column, member_seed)?
            };
            let vs: Vec<&Tensor> = picks.iter().map(|&i| volumes[i]).collect();
            let ts: Vec<Vec<f64>> = picks
                .iter()
                .map(|&i| vec![f64::from(u8::from(train[i].label[class]))])
                .collect();
            let mut model = nn::build_model(spec_single_output, member_seed)?;
            let log = fit(&mut model, &vs, &ts, &[1.0], hyper, member_seed, &mut |_, _, _| Control::Continue)?;
            Ok((Member::Trained(model), Some(log)))
        })
        .collect();
    let mut members = Vec::with_capacity(k);
    let mut logs = Vec::with_capacity(k);
    for r in results {
        let (m, l) = r?;
        members.push(m);
        logs.push(l);
    }
    Ok((
        TrainedSystem {
            kind: StrategyKind::Ensemble,
            class_names: class_names.to_vec(),
            members,
            thresholds: vec![hyper.alpha; k],
            calibration: None,
            seed,
            provenance: Vec::new(),
        },
        logs,
    ))
}

/// Bits and confidences for every volume, in input order.
pub fn predict_batch(system: &TrainedSystem, volumes: &[&Tensor]) -> Result<Vec<(LabelVec, Vec<f64>)>> {
    let k = system.k();
    let n = volumes.len();
    let mut conf = vec![vec![0.0; k]; n];
    match system.kind {
        StrategyKind::Single => {
            let model = system.members.first().and_then(Member::model).ok_or_else(|| {
                Error::Internal("single system without a trained model".into())
            })?;
            for (start, chunk) in (0..n).step_by(16).zip(volumes.chunks(16)) {
                let (c, _) = nn::forward(model, &nn::stack(chunk)?)?;
                for (row, vals) in c.data().chunks_exact(k).enumerate() {
                    conf[start + row].copy_from_slice(vals);
                }
            }
        }
        StrategyKind::Ensemble => {
            if system.members.len() != k {
                return Err(Error::Internal(format!("{} members for {k} classes", system.members.len())));
            }
            for (class, member) in system.members.iter().enumerate() {
                let Some(model) = member.model() else { continue };
                for (start, chunk) in (0..n).step_by(16).zip(volumes.chunks(16)) {
                    let (c, _) = nn::forward(model, &nn::stack(chunk)?)?;
                    for (row, &v) in c.data().iter().enumerate() {
                        conf[start + row][class] = v;
                    }
                }
            }
        }
    }
    Ok(conf
        .into_iter()
        .map(|c| (imbalance::decide(&c, &system.thresholds), c))
        .collect())
}

pub fn predict(system: &TrainedSystem, volume: &Tensor) -> Result<(LabelVec, Vec<f64>)> {
    Ok(predict_batch(system, &[volume])?.remove(0))
}

pub fn evaluate(system: &TrainedSystem, test: &[WindowSample]) -> Result<MetricsReport> {
    if test.is_empty() {
        return Err(Error::arg("test set is empty"));
    }
    let volumes: Vec<&Tensor> = test.iter().map(|s| &s.volume).collect();
    let predicted: Vec<LabelVec> = predict_batch(system, &volumes)?.into_iter().map(|(b, _)| b).collect();
    let truth: Vec<LabelVec> = test.iter().map(|s| s.label.clone()).collect();
    MetricsReport::from_predictions(&predicted, &truth)
}

// Persistence ---------------------------------------------------------------

const SYSTEM_FORMAT: &str = "actionrec-system-1";

fn params_to_bytes(model: &Model) -> Vec<u8> {
    let mut out = Vec::with_capacity(model.param_count() * 8);
    for p in &model.params {
        for v in p.weights.data().iter().chain(p.bias.data()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn params_from_bytes(spec: &ArchitectureSpec, seed: u64, bytes: &[u8], path: &Path) -> Result<Model> {
    let mut model = nn::build_model(spec, seed)?.zeroed();
    let expected = model.param_count() * 8;
    if bytes.len() != expected {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: bytes.len().min(expected) as u64,
            msg: format!("expected {expected} bytes of parameters, found {}", bytes.len()),
        });
    }
    let mut values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    for p in &mut model.params {
        for v in p.weights.data_mut().iter_mut().chain(p.bias.data_mut()) {
            *v = values.next().unwrap();
        }
    }
    Ok(model)
}

fn fmt_exact(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

/// Writes a system directory:
///
/// * `system.txt`: `key=value`: format tag, kind, seed, classes, exact
///   thresholds, skipped members, then `run.<key>=<value>` provenance.
/// * `architecture.txt`: the (shared) architecture text.
/// * `member_<i>.bin`: little-endian f64 parameters of member `i`, each
///   parametric layer's weights then bias, in layer order.
/// * `calibration.txt`: calibration text, for calibrated single systems.
pub fn save_system(dir: &Path, system: &TrainedSystem) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let spec = system
        .spec()
        .ok_or_else(|| Error::arg("system has no trained member to save"))?;
    let skipped: Vec<String> = system
        .members
        .iter()
        .enumerate()
        .filter(|(_, m)| matches!(m, Member::Skipped))
        .map(|(i, _)| i.to_string())
        .collect();
    let mut meta = format!(
        "format={SYSTEM_FORMAT}\nkind={}\nseed={}\nclasses={}\nmembers={}\nskipped={}\nthresholds={}\n",
        system.kind,
        system.seed,
        system.class_names.join(","),
        system.members.len(),
        skipped.join(","),
        fmt_exact(&system.thresholds)
    );
    for (k, v) in &system.provenance {
        meta.push_str(&format!("run.{k}={v}\n"));
    }
    let write = |name: &str, bytes: &[u8]| {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
    };
    write("system.txt", meta.as_bytes())?;
    write("architecture.txt", spec.to_string().as_bytes())?;
    for (i, m) in system.members.iter().enumerate() {
        if let Member::Trained(model) = m {
            write(&format!("member_{i}.bin"), &params_to_bytes(model))?;
        }
    }
    if let Some(cal) = &system.calibration {
        write("calibration.txt", cal.to_string().as_bytes())?;
    }
    Ok(())
}

pub fn load_system(dir: &Path) -> Result<TrainedSystem> {
    let meta_path = dir.join("system.txt");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let mut kv = Vec::new();
    let mut provenance = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: meta_path.clone(),
            line: i + 1,
            msg: "expected key=value".into(),
        })?;
        match k.strip_prefix("run.") {
            Some(rk) => provenance.push((rk.to_string(), v.to_string())),
            None => kv.push((k.to_string(), v.to_string())),
        }
    }
    let get = |key: &str| {
        kv.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Config(format!("{}: missing `{key}`", meta_path.display())))
    };
    let bad = |key: &str| Error::Config(format!("{}: bad `{key}`", meta_path.display()));
    if get("format")? != SYSTEM_FORMAT {
        return Err(bad("format"));
    }
    let kind: StrategyKind = get("kind")?.parse()?;
    let seed: u64 = get("seed")?.parse().map_err(|_| bad("seed"))?;
    let class_names: Vec<String> = get("classes")?.split(',').map(str::to_string).collect();
    let count: usize = get("members")?.parse().map_err(|_| bad("members"))?;
    let skipped: Vec<usize> = get("skipped")?
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| bad("skipped")))
        .collect::<Result<_>>()?;
    let thresholds: Vec<f64> = get("thresholds")?
        .split(',')
        .map(|s| s.parse().map_err(|_| bad("thresholds")))
        .collect::<Result<_>>()?;
    let arch_path = dir.join("architecture.txt");
    let spec: ArchitectureSpec = fs::read_to_string(&arch_path)
        .map_err(|e| Error::io(&arch_path, e))?
        .parse()?;
    let mut members = Vec::with_capacity(count);
    for i in 0..count {
        if skipped.contains(&i) {
            members.push(Member::Skipped);
            continue;
        }
        let p = dir.join(format!("member_{i}.bin"));
        let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
        let member_seed = match kind {
            StrategyKind::Single => seed,
            StrategyKind::Ensemble => seed.wrapping_add(i as u64),
        };
        members.push(Member::Trained(params_from_bytes(&spec, member_seed, &bytes, &p)?));
    }
    let cal_path = dir.join("calibration.txt");
    let calibration = if cal_path.is_file() {
        let text = fs::read_to_string(&cal_path).map_err(|e| Error::io(&cal_path, e))?;
        Some(CalibrationState::parse(&text, &cal_path)?)
    } else {
        None
    };
    let system = TrainedSystem { kind, class_names, members, thresholds, calibration, seed, provenance };
    let k = system.k();
    let expected_members = if kind == StrategyKind::Single { 1 } else { k };
    if system.members.len() != expected_members || system.thresholds.len() != k {
        return Err(Error::Config(format!(
            "{}: inconsistent member or threshold count",
            meta_path.display()
        )));
    }
    Ok(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Layer;
    use crate::pipeline::SampleSource;

    fn tiny_spec(k: usize) -> ArchitectureSpec {
        ArchitectureSpec {
            input_shape: vec![1, 3, 4, 4],
            output_count: k,
            layers: vec![
                Layer::Conv3d { filters: 2, kernel: [2, 2, 2], stride: [1; 3] },
                Layer::Relu,
                Layer::Flatten,
                Layer::Dense { units: k },
                Layer::Sigmoid,
            ],
        }
    }

    fn samples(n: usize, k: usize) -> Vec<WindowSample> {
        (0..n)
            .map(|i| {
                let label: LabelVec = (0..k).map(|j| (i >> j) & 1 == 1).collect();
                let data = (0..48).map(|t| if label[t % k] { 1.0 } else { -1.0 } * ((t * 7 + i) % 5) as f64 / 5.0).collect();
                WindowSample {
                    volume: Tensor::from_vec(&[1, 3, 4, 4], data).unwrap(),
                    label,
                    source: SampleSource { video: 0, start: i },
                }
            })
            .collect()
    }

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|j| format!("c{j}")).collect()
    }

    #[test]
    fn single_is_deterministic_and_learns() {
        let data = samples(12, 2);
        let hyper = Hyperparameters { epochs: 20, batch_size: 4, learning_rate: 0.05, ..Default::default() };
        let (a, log) = train_single(&data, &data[..4], &names(2), &tiny_spec(2), &hyper, 3).unwrap();
        let (b, _) = train_single(&data, &data[..4], &names(2), &tiny_spec(2), &hyper, 3).unwrap();
        assert_eq!(a, b);
        assert!(log.final_loss < log.initial_loss);
        let cal = a.calibration.as_ref().unwrap();
        for c in &cal.classes {
            assert!(c.threshold <= cal.alpha && c.weight >= 1.0);
        }
    }

    #[test]
    fn single_rejects_mismatch() {
        let data = samples(6, 2);
        let hyper = Hyperparameters { epochs: 1, ..Default::default() };
        assert!(train_single(&data, &data, &names(2), &tiny_spec(3), &hyper, 0).is_err());
        assert!(train_single(&data, &[], &names(2), &tiny_spec(2), &hyper, 0).is_err());
    }

    #[test]
    fn ensemble_members_differ_and_skip_absent_class() {
        let mut data = samples(8, 2);
        for s in &mut data {
            s.label.push(false);
        }
        let hyper = Hyperparameters { epochs: 2, batch_size: 4, ..Default::default() };
        let (sys, logs) = train_ensemble(&data, &data, &names(3), &tiny_spec(1), &hyper, 10).unwrap();
        assert_eq!(sys.members.len(), 3);
        assert_eq!(sys.members[2], Member::Skipped);
        assert!(logs[2].is_none());
        let (m0, m1) = (sys.members[0].model().unwrap(), sys.members[1].model().unwrap());
        assert_ne!(m0.params, m1.params);
        let (bits, conf) = predict(&sys, &data[0].volume).unwrap();
        assert_eq!(conf[2], 0.0);
        assert!(!bits[2]);
    }

    #[test]
    fn ensemble_bits_are_member_bits() {
        let data = samples(8, 2);
        let hyper = Hyperparameters { epochs: 2, batch_size: 4, ..Default::default() };
        let (sys, _) = train_ensemble(&data, &data, &names(2), &tiny_spec(1), &hyper, 1).unwrap();
        for s in &data {
            let (bits, conf) = predict(&sys, &s.volume).unwrap();
            for (j, m) in sys.members.iter().enumerate() {
                let (c, _) = nn::forward(m.model().unwrap(), &nn::stack(&[&s.volume]).unwrap()).unwrap();
                assert_eq!(conf[j], c.data()[0]);
                assert_eq!(bits[j], c.data()[0] > 0.5);
            }
        }
    }

    #[test]
    fn system_round_trips_on_disk() {
        let data = samples(8, 2);
        let hyper = Hyperparameters { epochs: 2, batch_size: 4, ..Default::default() };
        let (mut sys, _) = train_single(&data, &data, &names(2), &tiny_spec(2), &hyper, 4).unwrap();
        sys.provenance.push(("note".into(), "x".into()));
        let dir = tempfile::tempdir().unwrap();
        save_system(dir.path(), &sys).unwrap();
        let back = load_system(dir.path()).unwrap();
        assert_eq!(back.members, sys.members);
        assert_eq!(back.thresholds, sys.thresholds);
        assert_eq!(back.provenance, sys.provenance);
        let dir2 = tempfile::tempdir().unwrap();
        save_system(dir2.path(), &back).unwrap();
        for name in ["system.txt", "architecture.txt", "member_0.bin", "calibration.txt"] {
            assert_eq!(fs::read(dir.path().join(name)).unwrap(), fs::read(dir2.path().join(name)).unwrap());
        }
    }
}
