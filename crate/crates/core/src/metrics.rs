//! Per-class confusion counts, precision / recall / F1, and macro-F1.

use std::path::Path;

use crate::dataio::LabelVec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion_counts(predicted: &[LabelVec], truth: &[LabelVec]) -> Result<Vec<Confusion>> {
    if predicted.len() != truth.len() {
        return Err(Error::arg(format!(
            "{} predictions for {} ground-truth rows",
            predicted.len(),
            truth.len()
        )));
    }
    let k = truth.first().map_or(0, Vec::len);
    let mut out = vec![Confusion::default(); k];
    for (i, (p, t)) in predicted.iter().zip(truth).enumerate() {
        if p.len() != k || t.len() != k {
            return Err(Error::arg(format!("row {i}: expected {k} bits")));
        }
        for (c, (&pb, &tb)) in out.iter_mut().zip(p.iter().zip(t)) {
            match (pb, tb) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
    }
    Ok(out)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `(precision, recall, F1)`; every `0/0` is taken as 0.
pub fn prf1(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let p = ratio(tp as f64, (tp + fp) as f64);
    let r = ratio(tp as f64, (tp + fn_) as f64);
    (p, r, ratio(2.0 * p * r, p + r))
}

pub fn macro_f1(f1: &[f64]) -> Result<f64> {
    if f1.is_empty() {
        return Err(Error::arg("macro F1 of zero classes"));
    }
    Ok(f1.iter().sum::<f64>() / f1.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub counts: Confusion,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub classes: Vec<ClassMetrics>,
    pub macro_f1: f64,
}

impl MetricsReport {
    pub fn from_counts(counts: &[Confusion]) -> Result<Self> {
        let classes: Vec<ClassMetrics> = counts
            .iter()
            .map(|&c| {
                let (precision, recall, f1) = prf1(c.tp, c.fp, c.fn_);
                ClassMetrics { counts: c, precision, recall, f1 }
            })
            .collect();
        let macro_f1 = macro_f1(&classes.iter().map(|c| c.f1).collect::<Vec<_>>())?;
        Ok(MetricsReport { classes, macro_f1 })
    }

    pub fn from_predictions(predicted: &[LabelVec], truth: &[LabelVec]) -> Result<Self> {
        Self::from_counts(&confusion_counts(predicted, truth)?)
    }

    pub fn recall(&self, class: usize) -> f64 {
        self.classes[class].recall
    }
}

/// One line per class then a `macro_f1=` footer, reals to 6 decimals:
///
/// ```text
/// <name> tp=<n> fp=<n> fn=<n> tn=<n> precision=<p> recall=<r> f1=<f>
/// macro_f1=<f>
/// ```
pub fn render_report(report: &MetricsReport, class_names: &[String]) -> Result<String> {
    if class_names.len() != report.classes.len() {
        return Err(Error::arg(format!(
            "{} class names for {} classes",
            class_names.len(),
            report.classes.len()
        )));
    }
    let mut out = String::new();
    for (name, c) in class_names.iter().zip(&report.classes) {
        out.push_str(&format!(
            "{name} tp={} fp={} fn={} tn={} precision={:.6} recall={:.6} f1={:.6}\n",
            c.counts.tp, c.counts.fp, c.counts.fn_, c.counts.tn, c.precision, c.recall, c.f1
        ));
    }
    out.push_str(&format!("macro_f1={:.6}\n", report.macro_f1));
    Ok(out)
}

/// Same fields as [`render_report`], comma separated with a header row.
pub fn render_csv(report: &MetricsReport, class_names: &[String]) -> Result<String> {
    if class_names.len() != report.classes.len() {
        return Err(Error::arg("class name count does not match report"));
    }
    let mut out = String::from("class,tp,fp,fn,tn,precision,recall,f1\n");
    for (name, c) in class_names.iter().zip(&report.classes) {
        out.push_str(&format!(
            "{name},{},{},{},{},{:.6},{:.6},{:.6}\n",
            c.counts.tp, c.counts.fp, c.counts.fn_, c.counts.tn, c.precision, c.recall, c.f1
        ));
    }
    out.push_str(&format!("macro_f1,,,,,,,{:.6}\n", report.macro_f1));
    Ok(out)
}

/// Parses [`render_report`] output; `#` lines are skipped. Counts are exact; reals are recomputed from
/// the counts, so a parse of a rendered report renders identically.
pub fn parse_report(text: &str, path: &Path) -> Result<(Vec<String>, MetricsReport)> {
    let perr = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut names = Vec::new();
    let mut counts = Vec::new();
    let mut saw_footer = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        if raw.starts_with("macro_f1=") {
            saw_footer = true;
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let [name, tp, fp, fn_, tn, p, r, f] = toks[..] else {
            return Err(perr(line, "expected 8 fields".into()));
        };
        let count = |tok: &str, key: &str| -> Result<usize> {
            tok.strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| perr(line, format!("bad `{key}` field `{tok}`")))
        };
        for (tok, key) in [(p, "precision"), (r, "recall"), (f, "f1")] {
            if !tok.starts_with(&format!("{key}=")) {
                return Err(perr(line, format!("expected `{key}=`")));
            }
        }
        names.push(name.to_string());
        counts.push(Confusion {
            tp: count(tp, "tp")?,
            fp: count(fp, "fp")?,
            fn_: count(fn_, "fn")?,
            tn: count(tn, "tn")?,
        });
    }
    if !saw_footer {
        return Err(perr(text.lines().count() + 1, "missing macro_f1 footer".into()));
    }
    Ok((names, MetricsReport::from_counts(&counts)?))
}
