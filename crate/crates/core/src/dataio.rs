//! On-disk video, label and manifest formats plus a seeded synthetic corpus.
//!
//! # HVD video
//!
//! ```text
//! offset  size  field
//! 0       4     magic "HVD1"
//! 4       4     width        u32 little-endian
//! 8       4     height       u32 little-endian
//! 12      4     frame_count  u32 little-endian
//! 16      ...   frame_count * height * width grayscale bytes,
//!               frame-major, row-major within a frame
//! ```
//!
//! # Label file
//!
//! UTF-8 text with LF line endings, one line per frame, each line exactly `k`
//! characters of `0`/`1`. Character `j` is class `j` in manifest order.
//!
//! # Manifest
//!
//! Line-oriented `key=value`; `#` starts a comment line. Paths are relative
//! to the manifest's directory.
//!
//! ```text
//! k=3
//! classes=shot,save,play
//! resize_factor=4
//! norm_mean=87.25
//! norm_std=41.5
//! entry=video_000.hvd,labels_000.txt,unassigned
//! ```
//!
//! `resize_factor`, `norm_mean` and `norm_std` are optional and record any
//! preprocessing already applied. Split tags are `train`, `val`, `test` or
//! `unassigned`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const HVD_MAGIC: &[u8; 4] = b"HVD1";
pub const HVD_HEADER_LEN: usize = 16;

/// One bit per class, for one frame or one window.
pub type LabelVec = Vec<bool>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    pub width: usize,
    pub height: usize,
    /// Each frame is `height * width` bytes, row-major.
    pub frames: Vec<Vec<u8>>,
    /// Empty when only the video was read.
    pub labels: Vec<LabelVec>,
}

impl FrameSequence {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::arg("frame dimensions must be positive"));
        }
        if let Some(i) = self.frames.iter().position(|f| f.len() != self.width * self.height) {
            return Err(Error::arg(format!(
                "frame {i} has {} bytes, expected {}",
                self.frames[i].len(),
                self.width * self.height
            )));
        }
        if self.labels.len() != self.frames.len() {
            return Err(Error::arg(format!(
                "{} label rows for {} frames",
                self.labels.len(),
                self.frames.len()
            )));
        }
        if let Some(i) = self.labels.iter().position(|l| l.len() != k) {
            return Err(Error::arg(format!("label row {i} has {} bits, expected {k}", self.labels[i].len())));
        }
        Ok(())
    }
}

pub fn encode_hvd(video: &FrameSequence) -> Result<Vec<u8>> {
    let dim = |v: usize, what: &str| {
        u32::try_from(v).map_err(|_| Error::arg(format!("{what} {v} does not fit in 32 bits")))
    };
    let (w, h, n) = (
        dim(video.width, "width")?,
        dim(video.height, "height")?,
        dim(video.frames.len(), "frame count")?,
    );
    let frame_len = video.width * video.height;
    let mut out = Vec::with_capacity(HVD_HEADER_LEN + frame_len * video.frames.len());
    out.extend_from_slice(HVD_MAGIC);
    out.extend_from_slice(&w.to_le_bytes());
    out.extend_from_slice(&h.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    for (i, frame) in video.frames.iter().enumerate() {
        if frame.len() != frame_len {
            return Err(Error::arg(format!("frame {i} has {} bytes, expected {frame_len}", frame.len())));
        }
        out.extend_from_slice(frame);
    }
    Ok(out)
}

/// Parses HVD bytes; `path` is only used in error messages.
pub fn decode_hvd(bytes: &[u8], path: &Path) -> Result<FrameSequence> {
    let fail = |offset: usize, msg: String| Error::Format {
        path: path.to_path_buf(),
        offset: offset as u64,
        msg,
    };
    if bytes.len() < 4 {
        return Err(fail(bytes.len(), "truncated before magic".into()));
    }
    if &bytes[..4] != HVD_MAGIC {
        return Err(fail(0, format!("bad magic {:?}, expected \"HVD1\"", &bytes[..4])));
    }
    if bytes.len() < HVD_HEADER_LEN {
        return Err(fail(bytes.len(), "truncated header".into()));
    }
    let field = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (width, height, count) = (field(4), field(8), field(12));
    if width == 0 || height == 0 {
        return Err(fail(4, format!("zero dimension {width}x{height}")));
    }
    let frame_len = width
        .checked_mul(height)
        .ok_or_else(|| fail(4, "frame size overflows".into()))?;
    let payload = frame_len
        .checked_mul(count)
        .ok_or_else(|| fail(12, "payload size overflows".into()))?;
    let body = &bytes[HVD_HEADER_LEN..];
    if body.len() < payload {
        let complete = body.len() / frame_len;
        return Err(fail(
            HVD_HEADER_LEN + complete * frame_len,
            format!("truncated: frame {complete} of {count} incomplete"),
        ));
    }
    if body.len() > payload {
        return Err(fail(HVD_HEADER_LEN + payload, "trailing bytes after last frame".into()));
    }
    Ok(FrameSequence {
        width,
        height,
        frames: body.chunks_exact(frame_len).map(<[u8]>::to_vec).collect(),
        labels: Vec::new(),
    })
}

pub fn read_video(path: &Path) -> Result<FrameSequence> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_hvd(&bytes, path)
}

pub fn write_video(path: &Path, video: &FrameSequence) -> Result<()> {
    let bytes = encode_hvd(video)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str, k: usize) -> std::result::Result<LabelVec, String> {
    if s.chars().count() != k {
        return Err(format!("expected {k} label characters, got {}", s.chars().count()));
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(format!("illegal label character {other:?}")),
        })
        .collect()
}

pub fn parse_labels(text: &str, k: usize, path: &Path) -> Result<Vec<LabelVec>> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split('\n')
        .enumerate()
        .map(|(i, line)| {
            parse_bits(line, k).map_err(|msg| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg,
            })
        })
        .collect()
}

pub fn read_labels(path: &Path, k: usize) -> Result<Vec<LabelVec>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text, k, path)
}

pub fn format_labels(labels: &[LabelVec]) -> String {
    let mut out = String::new();
    for row in labels {
        out.push_str(&bits_to_string(row));
        out.push('\n');
    }
    out
}

pub fn write_labels(path: &Path, labels: &[LabelVec]) -> Result<()> {
    if let Some(first) = labels.first() {
        if labels.iter().any(|r| r.len() != first.len()) {
            return Err(Error::arg("label rows have differing widths"));
        }
    }
    fs::write(path, format_labels(labels)).map_err(|e| Error::io(path, e))
}

/// Reads a video together with its label file and checks they agree.
pub fn read_sequence(video: &Path, labels: &Path, k: usize) -> Result<FrameSequence> {
    let mut seq = read_video(video)?;
    seq.labels = read_labels(labels, k)?;
    if seq.labels.len() != seq.frames.len() {
        return Err(Error::Parse {
            path: labels.to_path_buf(),
            line: seq.labels.len() + 1,
            msg: format!("{} label lines for {} frames", seq.labels.len(), seq.frames.len()),
        });
    }
    Ok(seq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitTag {
    Train,
    Val,
    Test,
    Unassigned,
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::Test => "test",
            SplitTag::Unassigned => "unassigned",
        })
    }
}

impl FromStr for SplitTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitTag::Train),
            "val" => Ok(SplitTag::Val),
            "test" => Ok(SplitTag::Test),
            "unassigned" => Ok(SplitTag::Unassigned),
            other => Err(Error::arg(format!("unknown split tag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub video: PathBuf,
    pub labels: PathBuf,
    pub split: SplitTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub k: usize,
    pub class_names: Vec<String>,
    pub entries: Vec<ManifestEntry>,
    pub resize_factor: Option<usize>,
    pub norm_mean: Option<f64>,
    pub norm_std: Option<f64>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.class_names.len() != self.k {
            return Err(Error::Config(format!(
                "{} class names for k={}",
                self.class_names.len(),
                self.k
            )));
        }
        if let Some(bad) = self
            .class_names
            .iter()
            .find(|n| n.is_empty() || n.contains(|c: char| c.is_whitespace() || c == ','))
        {
            return Err(Error::Config(format!(
                "class name `{bad}` must be non-empty without whitespace or commas"
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("k={}\nclasses={}\n", self.k, self.class_names.join(","));
        if let Some(f) = self.resize_factor {
            out.push_str(&format!("resize_factor={f}\n"));
        }
        if let Some(m) = self.norm_mean {
            out.push_str(&format!("norm_mean={m:?}\n"));
        }
        if let Some(s) = self.norm_std {
            out.push_str(&format!("norm_std={s:?}\n"));
        }
        for e in &self.entries {
            out.push_str(&format!("entry={},{},{}\n", e.video.display(), e.labels.display(), e.split));
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut k = None;
        let mut class_names = None;
        let mut entries = Vec::new();
        let mut manifest = DatasetManifest {
            k: 0,
            class_names: Vec::new(),
            entries: Vec::new(),
            resize_factor: None,
            norm_mean: None,
            norm_std: None,
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| perr(line, format!("expected key=value, got `{content}`")))?;
            let num_err = |_| perr(line, format!("bad value for {key}: `{value}`"));
            match key {
                "k" => k = Some(value.parse::<usize>().map_err(num_err)?),
                "classes" => class_names = Some(value.split(',').map(str::to_string).collect::<Vec<_>>()),
                "resize_factor" => manifest.resize_factor = Some(value.parse::<usize>().map_err(num_err)?),
                "norm_mean" => manifest.norm_mean = Some(value.parse::<f64>().map_err(|_| perr(line, format!("bad norm_mean `{value}`")))?),
                "norm_std" => manifest.norm_std = Some(value.parse::<f64>().map_err(|_| perr(line, format!("bad norm_std `{value}`")))?),
                "entry" => {
                    let parts: Vec<&str> = value.split(',').collect();
                    let [v, l, s] = parts[..] else {
                        return Err(perr(line, "entry needs video,labels,split".into()));
                    };
                    entries.push(ManifestEntry {
                        video: PathBuf::from(v),
                        labels: PathBuf::from(l),
                        split: s.parse().map_err(|e: Error| perr(line, e.to_string()))?,
                    });
                }
                other => return Err(perr(line, format!("unknown key `{other}`"))),
            }
        }
        manifest.k = k.ok_or_else(|| perr(0, "missing k".into()))?;
        manifest.class_names = class_names.ok_or_else(|| perr(0, "missing classes".into()))?;
        manifest.entries = entries;
        manifest.validate()?;
        Ok(manifest)
    }
}

/// Loads a manifest and checks every referenced file exists.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest = DatasetManifest::parse(&text, path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for e in &manifest.entries {
        for p in [&e.video, &e.labels] {
            let full = base.join(p);
            if !full.is_file() {
                return Err(Error::Config(format!("{}: referenced file {} does not exist", path.display(), full.display())));
            }
        }
    }
    Ok(manifest)
}

pub fn save_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    manifest.validate()?;
    fs::write(path, manifest.to_text()).map_err(|e| Error::io(path, e))
}

/// Loads every entry's video and labels, resolving paths against the manifest directory.
pub fn load_sequences(manifest_path: &Path, manifest: &DatasetManifest) -> Result<Vec<FrameSequence>> {
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    manifest
        .entries
        .iter()
        .map(|e| read_sequence(&base.join(&e.video), &base.join(&e.labels), manifest.k))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub k: usize,
    pub videos: usize,
    pub frames_per_video: usize,
    pub width: usize,
    pub height: usize,
    pub class_prevalence: Vec<f64>,
    /// Shortest positive run; defaults to a third of the 15-frame window.
    pub min_run: usize,
    pub max_run: usize,
}

impl SynthConfig {
    pub fn new(k: usize, videos: usize, frames_per_video: usize, width: usize, height: usize, class_prevalence: Vec<f64>) -> Self {
        SynthConfig {
            k,
            videos,
            frames_per_video,
            width,
            height,
            class_prevalence,
            min_run: 5,
            max_run: 45,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k == 0 || self.videos == 0 || self.frames_per_video == 0 {
            return bad("k, videos and frames must be >= 1".into());
        }
        if self.width < 8 || self.height < 8 {
            return bad(format!("frames must be at least 8x8, got {}x{}", self.width, self.height));
        }
        if self.class_prevalence.len() != self.k {
            return bad(format!("{} prevalences for k={}", self.class_prevalence.len(), self.k));
        }
        if let Some(p) = self.class_prevalence.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
            return bad(format!("prevalence {p} outside (0, 1]"));
        }
        if self.min_run == 0 || self.min_run > self.max_run {
            return bad("need 1 <= min_run <= max_run".into());
        }
        if self.frames_per_video < self.min_run {
            return bad(format!(
                "videos of {} frames cannot hold a {}-frame run",
                self.frames_per_video, self.min_run
            ));
        }
        Ok(())
    }
}

/// Places positive runs for one class so the total covers exactly `target`
/// frames. Runs never touch each other, so each stays at least `min_run` long.
fn place_runs(cfg: &SynthConfig, target: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<bool>>> {
    let f = cfg.frames_per_video;
    let mut masks = vec![vec![false; f]; cfg.videos];
    let total = f * cfg.videos;
    if target >= total {
        return Ok(vec![vec![true; f]; cfg.videos]);
    }
    let free = |m: &[bool], s: usize, len: usize| {
        let lo = s.saturating_sub(1);
        let hi = (s + len + 1).min(f);
        m[lo..hi].iter().all(|&b| !b)
    };
    let mut covered = 0;
    let max_run = cfg.max_run.min(f);
    for _ in 0..20_000 {
        let need = target - covered;
        if need < cfg.min_run {
            break;
        }
        let mut len = rng.random_range(cfg.min_run..=max_run).min(need);
        let rem = need - len;
        if rem > 0 && rem < cfg.min_run {
            // leave either nothing or a placeable remainder
            let shrink = cfg.min_run - rem;
            if len >= cfg.min_run + shrink {
                len -= shrink;
            } else if need <= f {
                len = need;
            }
        }
        let v = rng.random_range(0..cfg.videos);
        let s = rng.random_range(0..=f - len);
        if free(&masks[v], s, len) {
            masks[v][s..s + len].iter_mut().for_each(|b| *b = true);
            covered += len;
        }
    }
    // grow existing runs by single frames for any remainder
    while covered < target {
        let spot = masks.iter().enumerate().find_map(|(v, m)| {
            (0..f).find(|&i| {
                !m[i] && ((i > 0 && m[i - 1]) || (i + 1 < f && m[i + 1]))
            })
            .map(|i| (v, i))
        });
        match spot {
            Some((v, i)) => {
                masks[v][i] = true;
                covered += 1;
            }
            None => {
                return Err(Error::Config(format!(
                    "cannot place {target} positive frames in runs of >= {} frames",
                    cfg.min_run
                )))
            }
        }
    }
    Ok(masks)
}

fn render_frame(cfg: &SynthConfig, t: usize, active: &[bool], rng: &mut ChaCha8Rng) -> Vec<u8> {
    let (w, h) = (cfg.width, cfg.height);
    let mut frame: Vec<u8> = (0..w * h).map(|_| rng.random_range(0..=24u8)).collect();
    let side = w.min(h) as f64;
    let radius = (side / 10.0).max(2.0);
    let reach = (side / 2.0 - radius).max(1.0);
    let speed = (side / 32.0).max(1.0);
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    for (j, _) in active.iter().enumerate().filter(|(_, &a)| a) {
        let angle = 2.0 * std::f64::consts::PI * j as f64 / cfg.k as f64;
        let r = (t as f64 * speed) % reach;
        let (bx, by) = (cx + r * angle.cos(), cy + r * angle.sin());
        let x0 = (bx - radius).floor().max(0.0) as usize;
        let x1 = ((bx + radius).ceil() as usize).min(w - 1);
        let y0 = (by - radius).floor().max(0.0) as usize;
        let y1 = ((by + radius).ceil() as usize).min(h - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let d = ((x as f64 - bx).powi(2) + (y as f64 - by).powi(2)).sqrt();
                if d < radius {
                    let add = (200.0 * (1.0 - d / radius)).round() as u8;
                    let px = &mut frame[y * w + x];
                    *px = px.saturating_add(add);
                }
            }
        }
    }
    frame
}

/// Generates label runs and frames in memory.
pub fn synth_sequences(cfg: &SynthConfig, seed: u64) -> Result<Vec<FrameSequence>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = cfg.videos * cfg.frames_per_video;
    let mut per_class = Vec::with_capacity(cfg.k);
    for &p in &cfg.class_prevalence {
        let target = if p >= 1.0 {
            total
        } else {
            ((p * total as f64).round() as usize).max(cfg.min_run).min(total)
        };
        per_class.push(place_runs(cfg, target, &mut rng)?);
    }
    let mut out = Vec::with_capacity(cfg.videos);
    for v in 0..cfg.videos {
        let labels: Vec<LabelVec> = (0..cfg.frames_per_video)
            .map(|t| per_class.iter().map(|m| m[v][t]).collect())
            .collect();
        let frames = labels
            .iter()
            .enumerate()
            .map(|(t, active)| render_frame(cfg, t, active, &mut rng))
            .collect();
        out.push(FrameSequence {
            width: cfg.width,
            height: cfg.height,
            frames,
            labels,
        });
    }
    Ok(out)
}

/// Writes `video_NNN.hvd`, `labels_NNN.txt` and `manifest.txt` into `out_dir`.
pub fn synth_dataset(cfg: &SynthConfig, seed: u64, out_dir: &Path) -> Result<DatasetManifest> {
    let seqs = synth_sequences(cfg, seed)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut entries = Vec::with_capacity(seqs.len());
    for (i, seq) in seqs.iter().enumerate() {
        let video = PathBuf::from(format!("video_{i:03}.hvd"));
        let labels = PathBuf::from(format!("labels_{i:03}.txt"));
        write_video(&out_dir.join(&video), seq)?;
        write_labels(&out_dir.join(&labels), &seq.labels)?;
        entries.push(ManifestEntry {
            video,
            labels,
            split: SplitTag::Unassigned,
        });
    }
    let manifest = DatasetManifest {
        k: cfg.k,
        class_names: (0..cfg.k).map(|j| format!("class{j}")).collect(),
        entries,
        resize_factor: None,
        norm_mean: None,
        norm_std: None,
    };
    save_manifest(&out_dir.join("manifest.txt"), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> FrameSequence {
        FrameSequence {
            width: 2,
            height: 2,
            frames: vec![vec![0, 1, 2, 3]],
            labels: Vec::new(),
        }
    }

    #[test]
    fn tiny_video_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.hvd");
        write_video(&p, &tiny()).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert_eq!(&bytes[..4], b"HVD1");
        assert_eq!(bytes.len(), 16 + 4);
        assert_eq!(read_video(&p).unwrap(), tiny());
    }

    #[test]
    fn bad_magic_and_truncation() {
        let p = Path::new("x.hvd");
        let mut bytes = encode_hvd(&tiny()).unwrap();
        bytes[0] = b'X';
        assert!(matches!(decode_hvd(&bytes, p), Err(Error::Format { offset: 0, .. })));
        let good = encode_hvd(&tiny()).unwrap();
        assert!(matches!(decode_hvd(&good[..10], p), Err(Error::Format { offset: 10, .. })));
        assert!(matches!(decode_hvd(&good[..18], p), Err(Error::Format { offset: 16, .. })));
        let mut long = good.clone();
        long.push(0);
        assert!(matches!(decode_hvd(&long, p), Err(Error::Format { offset: 20, .. })));
        let mut huge = good[..16].to_vec();
        huge[4..8].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(decode_hvd(&huge, p), Err(Error::Format { .. })));
    }

    #[test]
    fn full_size_file_length() {
        let seq = FrameSequence {
            width: 480,
            height: 270,
            frames: vec![vec![7; 480 * 270]; 35],
            labels: Vec::new(),
        };
        assert_eq!(encode_hvd(&seq).unwrap().len(), 16 + 35 * 480 * 270);
        assert_eq!(16 + 35 * 480 * 270, 4_536_016);
    }

    #[test]
    fn label_string_positions() {
        let rows = parse_labels("00000000101\n", 11, Path::new("l.txt")).unwrap();
        let set: Vec<usize> = rows[0].iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        assert_eq!(set, vec![8, 10]);
    }

    #[test]
    fn label_errors_carry_line_numbers() {
        let p = Path::new("l.txt");
        match parse_labels("0101\n011\n", 4, p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_labels("0101\n0101\n01x1\n", 4, p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_labels("0101\r\n", 4, p).is_err());
        let zeros = parse_labels("000\n000\n", 3, p).unwrap();
        assert!(zeros.iter().flatten().all(|&b| !b));
    }

    #[test]
    fn manifest_round_trips() {
        let m = DatasetManifest {
            k: 2,
            class_names: vec!["shot".into(), "play".into()],
            entries: vec![ManifestEntry {
                video: "v.hvd".into(),
                labels: "l.txt".into(),
                split: SplitTag::Test,
            }],
            resize_factor: Some(4),
            norm_mean: Some(12.5),
            norm_std: Some(0.1 + 0.2),
        };
        let back = DatasetManifest::parse(&m.to_text(), Path::new("m")).unwrap();
        assert_eq!(back, m);
        assert!(DatasetManifest::parse("k=2\nclasses=a\n", Path::new("m")).is_err());
        assert!(DatasetManifest::parse("k=1\nclasses=a\nwhat=1\n", Path::new("m")).is_err());
    }

    #[test]
    fn synth_full_prevalence_and_counts() {
        let cfg = SynthConfig::new(4, 6, 120, 16, 16, vec![0.5, 0.5, 0.1, 0.02]);
        let seqs = synth_sequences(&cfg, 5).unwrap();
        let total = 6.0 * 120.0;
        for (j, &p) in cfg.class_prevalence.iter().enumerate() {
            let count = seqs.iter().flat_map(|s| &s.labels).filter(|l| l[j]).count() as f64;
            let freq = count / total;
            assert!((freq - p).abs() <= 0.1 * p, "class {j}: {freq} vs {p}");
        }
        let all = SynthConfig::new(2, 2, 30, 8, 8, vec![1.0, 0.3]);
        let seqs = synth_sequences(&all, 1).unwrap();
        assert!(seqs.iter().flat_map(|s| &s.labels).all(|l| l[0]));
    }

    #[test]
    fn synth_runs_are_long_enough() {
        let cfg = SynthConfig::new(3, 4, 100, 12, 12, vec![0.3, 0.05, 0.6]);
        for s in synth_sequences(&cfg, 9).unwrap() {
            for j in 0..3 {
                let mut run = 0;
                for t in 0..=s.labels.len() {
                    if t < s.labels.len() && s.labels[t][j] {
                        run += 1;
                    } else {
                        assert!(run == 0 || run >= 5, "run of {run}");
                        run = 0;
                    }
                }
            }
        }
    }

    #[test]
    fn synth_config_errors() {
        let bad = SynthConfig::new(2, 1, 30, 4, 8, vec![0.5, 0.5]);
        assert!(matches!(synth_sequences(&bad, 0), Err(Error::Config(_))));
        let bad = SynthConfig::new(2, 1, 30, 8, 8, vec![0.5, 0.0]);
        assert!(matches!(synth_sequences(&bad, 0), Err(Error::Config(_))));
        let bad = SynthConfig::new(1, 1, 3, 8, 8, vec![0.5]);
        assert!(matches!(synth_sequences(&bad, 0), Err(Error::Config(_))));
    }

    #[test]
    fn synth_is_seeded() {
        let cfg = SynthConfig::new(2, 2, 40, 10, 10, vec![0.4, 0.2]);
        assert_eq!(synth_sequences(&cfg, 3).unwrap(), synth_sequences(&cfg, 3).unwrap());
        let a = synth_sequences(&cfg, 3).unwrap();
        let b = synth_sequences(&cfg, 4).unwrap();
        assert_ne!(a[0].frames, b[0].frames);
    }
}
