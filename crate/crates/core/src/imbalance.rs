//! Class-imbalance handling: per-class loss weights, threshold softening from
//! validation confidences, and binary oversampling for ensemble members.
//!
//! Weights follow `w_i = max(1, ln(μ·m/m_i))` and thresholds
//! `th_i = α·c_i / w_i`, where `c_i` is the largest confidence the model gave
//! class `i` on any validation window. Decisions everywhere are
//! `confidence > threshold`.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataio::LabelVec;
use crate::error::{Error, Result};
use crate::fmtnum::sig9;
use crate::nn::{self, Model};
use crate::pipeline::WindowSample;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelStats {
    pub m: usize,
    pub positives: Vec<usize>,
}

pub fn label_stats(labels: &[LabelVec]) -> Result<LabelStats> {
    let Some(first) = labels.first() else {
        return Err(Error::arg("label statistics need at least one row"));
    };
    let k = first.len();
    let mut positives = vec![0; k];
    for row in labels {
        if row.len() != k {
            return Err(Error::arg("label rows have differing widths"));
        }
        for (c, &b) in positives.iter_mut().zip(row) {
            *c += usize::from(b);
        }
    }
    Ok(LabelStats { m: labels.len(), positives })
}

/// `max(1, ln(μ·m/m_i))`; a class absent from training is counted as `m_i = 1`.
pub fn class_weights(stats: &LabelStats, mu: f64) -> Result<Vec<f64>> {
    if stats.m == 0 {
        return Err(Error::arg("class weights need m >= 1"));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::arg(format!("mu {mu} outside (0, 1]")));
    }
    Ok(stats
        .positives
        .iter()
        .map(|&mi| {
            if mi == 0 {
                log::warn!("class absent from training data; weighting it as if m_i = 1");
            }
            (mu * stats.m as f64 / mi.max(1) as f64).ln().max(1.0)
        })
        .collect())
}

/// Column maxima of a confidence matrix given as rows.
pub fn column_max(confidences: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = confidences.first() else {
        return Err(Error::arg("confidence matrix is empty"));
    };
    let mut out = first.clone();
    for row in &confidences[1..] {
        if row.len() != out.len() {
            return Err(Error::arg("confidence rows have differing widths"));
        }
        for (m, &v) in out.iter_mut().zip(row) {
            *m = m.max(v);
        }
    }
    Ok(out)
}

/// Model confidences for every sample, batched `batch` windows at a time.
pub fn confidence_matrix(model: &Model, samples: &[WindowSample], batch: usize) -> Result<Vec<Vec<f64>>> {
    let k = model.spec.output_count;
    let mut out = Vec::with_capacity(samples.len());
    for chunk in samples.chunks(batch.max(1)) {
        let vols: Vec<_> = chunk.iter().map(|s| &s.volume).collect();
        let (conf, _) = nn::forward(model, &nn::stack(&vols)?)?;
        out.extend(conf.data().chunks_exact(k).map(<[f64]>::to_vec));
    }
    Ok(out)
}

/// Per-class maximum confidence over all validation windows.
pub fn max_confidences(model: &Model, validation: &[WindowSample]) -> Result<Vec<f64>> {
    if validation.is_empty() {
        return Err(Error::arg("validation set is empty"));
    }
    column_max(&confidence_matrix(model, validation, 16)?)
}

pub fn soften_thresholds(weights: &[f64], confidences: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if weights.len() != confidences.len() {
        return Err(Error::arg(format!(
            "{} weights for {} confidences",
            weights.len(),
            confidences.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!("alpha {alpha} outside (0, 1)")));
    }
    if let Some(w) = weights.iter().find(|&&w| w.is_nan() || w < 1.0) {
        return Err(Error::arg(format!("class weight {w} is below 1")));
    }
    if let Some(c) = confidences.iter().find(|&&c| !(0.0..=1.0).contains(&c)) {
        return Err(Error::arg(format!("confidence {c} outside [0, 1]")));
    }
    Ok(weights.iter().zip(confidences).map(|(w, c)| alpha * c / w).collect())
}

/// Strict decision rule shared by every predictor.
pub fn decide(confidences: &[f64], thresholds: &[f64]) -> LabelVec {
    confidences.iter().zip(thresholds).map(|(c, t)| c > t).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassCalibration {
    pub name: String,
    pub weight: f64,
    pub cmax: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationState {
    pub alpha: f64,
    pub mu: f64,
    pub classes: Vec<ClassCalibration>,
}

impl CalibrationState {
    pub fn new(names: &[String], weights: &[f64], cmax: &[f64], alpha: f64, mu: f64) -> Result<Self> {
        if names.len() != weights.len() {
            return Err(Error::arg(format!("{} names for {} weights", names.len(), weights.len())));
        }
        let thresholds = soften_thresholds(weights, cmax, alpha)?;
        Ok(CalibrationState {
            alpha,
            mu,
            classes: names
                .iter()
                .zip(weights)
                .zip(cmax)
                .zip(thresholds)
                .map(|(((name, &weight), &cmax), threshold)| ClassCalibration {
                    name: name.clone(),
                    weight,
                    cmax,
                    threshold,
                })
                .collect(),
        })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.weight).collect()
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.threshold).collect()
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
        let mut alpha = None;
        let mut mu = None;
        let mut classes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            if let Some(rest) = content.strip_prefix("class ") {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let [name, w, c, t] = toks[..] else {
                    return Err(perr(line, "expected `class <name> weight= cmax= threshold=`".into()));
                };
                let field = |tok: &str, key: &str| -> Result<f64> {
                    tok.strip_prefix(key)
                        .and_then(|v| v.strip_prefix('='))
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| perr(line, format!("bad `{key}` field `{tok}`")))
                };
                classes.push(ClassCalibration {
                    name: name.to_string(),
                    weight: field(w, "weight")?,
                    cmax: field(c, "cmax")?,
                    threshold: field(t, "threshold")?,
                });
            } else if let Some((k, v)) = content.split_once('=') {
                let val: f64 = v.parse().map_err(|_| perr(line, format!("bad value `{v}`")))?;
                match k {
                    "alpha" => alpha = Some(val),
                    "mu" => mu = Some(val),
                    other => return Err(perr(line, format!("unknown key `{other}`"))),
                }
            } else {
                return Err(perr(line, format!("unrecognised line `{content}`")));
            }
        }
        Ok(CalibrationState {
            alpha: alpha.ok_or_else(|| perr(0, "missing alpha".into()))?,
            mu: mu.ok_or_else(|| perr(0, "missing mu".into()))?,
            classes,
        })
    }
}

/// `alpha=…`, `mu=…`, then one `class <name> weight=<w> cmax=<c> threshold=<th>`
/// line per class; reals carry 9 significant digits.
impl fmt::Display for CalibrationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alpha={}", sig9(self.alpha))?;
        writeln!(f, "mu={}", sig9(self.mu))?;
        for c in &self.classes {
            writeln!(
                f,
                "class {} weight={} cmax={} threshold={}",
                c.name,
                sig9(c.weight),
                sig9(c.cmax),
                sig9(c.threshold)
            )?;
        }
        Ok(())
    }
}

/// Duplicates randomly drawn minority windows (for class `target`) until
/// positives and negatives are equal in number. Originals come first, in order.
pub fn oversample_binary(samples: &[WindowSample], target: usize, seed: u64) -> Result<Vec<WindowSample>> {
    let pick = oversample_indices(&samples.iter().map(|s| s.label.get(target).copied()).collect::<Vec<_>>(), seed)?;
    Ok(pick.into_iter().map(|i| samples[i].clone()).collect())
}

/// Index form of [`oversample_binary`] over one label column.
pub fn oversample_indices(column: &[Option<bool>], seed: u64) -> Result<Vec<usize>> {
    if column.iter().any(Option::is_none) {
        return Err(Error::arg("target class index out of range"));
    }
    let pos: Vec<usize> = column.iter().enumerate().filter(|(_, b)| **b == Some(true)).map(|(i, _)| i).collect();
    let neg: Vec<usize> = column.iter().enumerate().filter(|(_, b)| **b == Some(false)).map(|(i, _)| i).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::arg(format!(
            "oversampling needs both classes, got {} positive and {} negative",
            pos.len(),
            neg.len()
        )));
    }
    let (minority, deficit) = if pos.len() < neg.len() {
        (&pos, neg.len() - pos.len())
    } else {
        (&neg, pos.len() - neg.len())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<usize> = (0..column.len()).collect();
    out.extend((0..deficit).map(|_| minority[rng.random_range(0..minority.len())]));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;
    use crate::pipeline::SampleSource;

    fn sample(bits: &[bool], id: usize) -> WindowSample {
        WindowSample {
            volume: Tensor::filled(&[1, 1, 1, 1], id as f64),
            label: bits.to_vec(),
            source: SampleSource { video: 0, start: id },
        }
    }

    #[test]
    fn stats_examples() {
        let s = label_stats(&[vec![true; 3]]).unwrap();
        assert_eq!((s.m, s.positives), (1, vec![1, 1, 1]));
        let col: Vec<LabelVec> = [true, false, true, false].iter().map(|&b| vec![b, true]).collect();
        assert_eq!(label_stats(&col).unwrap().positives, vec![2, 4]);
        assert!(label_stats(&[]).is_err());
    }

    #[test]
    fn weight_examples() {
        let stats = LabelStats { m: 1000, positives: vec![700, 900, 10, 0] };
        let w = class_weights(&stats, 0.7).unwrap();
        assert_eq!(w[0], 1.0);
        assert_eq!(w[1], 1.0);
        assert!((w[2] - 4.248_495_242_049_359).abs() < 1e-12);
        assert!((w[3] - 700f64.ln()).abs() < 1e-12);
        assert!(class_weights(&LabelStats { m: 0, positives: vec![0] }, 0.7).is_err());
    }

    #[test]
    fn threshold_examples() {
        let th = soften_thresholds(&[1.0, 70f64.ln(), 2.0], &[1.0, 0.9, 0.0], 0.5).unwrap();
        assert_eq!(th[0], 0.5);
        assert!((th[1] - 0.105_919_854_998_574).abs() < 1e-12);
        assert_eq!(th[2], 0.0);
        assert!(soften_thresholds(&[0.9], &[0.5], 0.5).is_err());
    }

    #[test]
    fn column_max_by_hand() {
        let c = column_max(&[vec![0.2, 0.9], vec![0.7, 0.1]]).unwrap();
        assert_eq!(c, vec![0.7, 0.9]);
        assert!(column_max(&[]).is_err());
    }

    #[test]
    fn strict_decision() {
        assert_eq!(decide(&[0.0, 0.0], &[0.0, 0.5]), vec![false, false]);
        assert_eq!(decide(&[0.2, 0.12], &[0.5, 0.105_920]), vec![false, true]);
    }

    #[test]
    fn oversample_examples() {
        let balanced: Vec<_> = (0..4).map(|i| sample(&[i % 2 == 0], i)).collect();
        assert_eq!(oversample_binary(&balanced, 0, 1).unwrap(), balanced);

        let skew: Vec<_> = (0..8).map(|i| sample(&[i < 2], i)).collect();
        let out = oversample_binary(&skew, 0, 3).unwrap();
        assert_eq!(out.len(), 12);
        assert_eq!(&out[..8], &skew[..]);
        assert_eq!(out.iter().filter(|s| s.label[0]).count(), 6);
        assert_eq!(out, oversample_binary(&skew, 0, 3).unwrap());

        let all_pos: Vec<_> = (0..3).map(|i| sample(&[true], i)).collect();
        assert!(oversample_binary(&all_pos, 0, 0).is_err());
    }

    #[test]
    fn calibration_text_round_trip() {
        let names = vec!["a".to_string(), "b".to_string()];
        let st = CalibrationState::new(&names, &[1.0, 70f64.ln()], &[1.0, 0.9], 0.5, 0.7).unwrap();
        let text = st.to_string();
        assert!(text.contains("class b weight=4.24849524 cmax=0.9 threshold=0.105919855\n"), "{text}");
        let back = CalibrationState::parse(&text, Path::new("c")).unwrap();
        assert_eq!(back.to_string(), text);
        assert_eq!(CalibrationState::parse(&back.to_string(), Path::new("c")).unwrap(), back);
    }
}
