//! Preprocessing: downscaling, standard normalization, sliding windows,
//! majority-rule window labels and train/val/test splitting.
//!
//! The order matters: windows are cut and labelled from downscaled frames,
//! split, and only then normalized with statistics fitted on the training
//! part.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::dataio::{self, DatasetManifest, FrameSequence, LabelVec, SplitTag};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Floor applied to the fitted standard deviation.
pub const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RealFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

/// Crops to multiples of `factor` and box-averages each `factor × factor` block.
pub fn downscale(frame: &[u8], width: usize, height: usize, factor: usize) -> Result<RealFrame> {
    if factor == 0 {
        return Err(Error::arg("downscale factor must be >= 1"));
    }
    if factor > width || factor > height {
        return Err(Error::arg(format!("factor {factor} exceeds frame {width}x{height}")));
    }
    if frame.len() != width * height {
        return Err(Error::arg(format!("frame has {} bytes, expected {}", frame.len(), width * height)));
    }
    let (ow, oh) = (width / factor, height / factor);
    let area = (factor * factor) as f64;
    let mut data = Vec::with_capacity(ow * oh);
    for by in 0..oh {
        for bx in 0..ow {
            let mut sum = 0u32;
            for y in by * factor..(by + 1) * factor {
                let row = &frame[y * width + bx * factor..y * width + (bx + 1) * factor];
                sum += row.iter().map(|&v| u32::from(v)).sum::<u32>();
            }
            data.push(f64::from(sum) / area);
        }
    }
    Ok(RealFrame { width: ow, height: oh, data })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    pub mean: f64,
    pub std: f64,
}

impl Normalizer {
    /// Population mean and standard deviation over every value of every volume.
    pub fn fit<'a>(volumes: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut n = 0usize;
        let mut sum = 0.0;
        let vols: Vec<&[f64]> = volumes.into_iter().collect();
        for v in &vols {
            n += v.len();
            sum += v.iter().sum::<f64>();
        }
        if n == 0 {
            return Err(Error::arg("cannot fit a normalizer on an empty set"));
        }
        let mean = sum / n as f64;
        let var = vols
            .iter()
            .flat_map(|v| v.iter())
            .map(|&x| (x - mean).powi(2))
            .sum::<f64>()
            / n as f64;
        Ok(Normalizer {
            mean,
            std: var.sqrt().max(STD_FLOOR),
        })
    }

    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn denormalize(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }

    pub fn apply(&self, values: &mut [f64]) {
        values.iter_mut().for_each(|v| *v = self.normalize(*v));
    }
}

/// Start frames of every full window: `0, s, 2s, …` with `s = size − overlap`.
pub fn window_starts(frames: usize, size: usize, overlap: usize) -> Result<Vec<usize>> {
    if size == 0 || overlap >= size {
        return Err(Error::arg(format!("window size {size} must exceed overlap {overlap}")));
    }
    let stride = size - overlap;
    if frames < size {
        return Ok(Vec::new());
    }
    Ok((0..=(frames - size) / stride).map(|i| i * stride).collect())
}

#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    pub start: usize,
    pub frames: &'a [Vec<u8>],
    pub labels: &'a [LabelVec],
}

pub fn windowize(video: &FrameSequence, size: usize, overlap: usize) -> Result<Vec<Window<'_>>> {
    let starts = window_starts(video.frame_count(), size, overlap)?;
    if starts.is_empty() {
        log::info!("video of {} frames is shorter than one {size}-frame window", video.frame_count());
    }
    Ok(starts
        .into_iter()
        .map(|s| Window {
            start: s,
            frames: &video.frames[s..s + size],
            labels: if video.labels.len() >= s + size { &video.labels[s..s + size] } else { &[] },
        })
        .collect())
}

/// Bit `j` is set iff more than half of the rows have bit `j` set.
pub fn majority_label(rows: &[LabelVec]) -> Result<LabelVec> {
    if rows.len().is_multiple_of(2) {
        return Err(Error::arg(format!("majority needs an odd number of rows, got {}", rows.len())));
    }
    let k = rows[0].len();
    if rows.iter().any(|r| r.len() != k) {
        return Err(Error::arg("label rows have differing widths"));
    }
    let need = rows.len() / 2 + 1;
    Ok((0..k)
        .map(|j| rows.iter().filter(|r| r[j]).count() >= need)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SampleSource {
    pub video: usize,
    pub start: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    /// `[1, window_size, H', W']`.
    pub volume: Tensor,
    pub label: LabelVec,
    pub source: SampleSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Window,
    Video,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Window => "window",
            Granularity::Video => "video",
        })
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "window" => Ok(Granularity::Window),
            "video" => Ok(Granularity::Video),
            other => Err(Error::arg(format!("split granularity must be window or video, got `{other}`"))),
        }
    }
}

/// Sizes `(test, val)` for `n` units: `test = round((1−r)·n)`, `val = round((1−r)·(n − test))`.
pub fn split_sizes(n: usize, ratio: f64) -> (usize, usize) {
    let held = 1.0 - ratio;
    let test = (held * n as f64).round() as usize;
    let val = (held * (n - test) as f64).round() as usize;
    (test, val)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partitions item indices `0..videos.len()`; `videos[i]` is item `i`'s source video.
/// Each part is returned in ascending index order.
pub fn split_indices(videos: &[usize], ratio: f64, seed: u64, granularity: Granularity) -> Result<SplitIndices> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::arg(format!("split ratio {ratio} outside (0, 1)")));
    }
    if videos.len() < 3 {
        return Err(Error::arg(format!("need at least 3 samples to split, got {}", videos.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SplitIndices { train: Vec::new(), val: Vec::new(), test: Vec::new() };
    match granularity {
        Granularity::Window => {
            let mut order: Vec<usize> = (0..videos.len()).collect();
            order.shuffle(&mut rng);
            let (test, val) = split_sizes(order.len(), ratio);
            out.test = order[..test].to_vec();
            out.val = order[test..test + val].to_vec();
            out.train = order[test + val..].to_vec();
        }
        Granularity::Video => {
            let mut ids: Vec<usize> = videos.to_vec();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() < 3 {
                return Err(Error::arg(format!("need at least 3 videos for a video-level split, got {}", ids.len())));
            }
            ids.shuffle(&mut rng);
            let (test, val) = split_sizes(ids.len(), ratio);
            let tag = |v: usize| {
                let pos = ids.iter().position(|&x| x == v).unwrap();
                if pos < test {
                    SplitTag::Test
                } else if pos < test + val {
                    SplitTag::Val
                } else {
                    SplitTag::Train
                }
            };
            for (i, &v) in videos.iter().enumerate() {
                match tag(v) {
                    SplitTag::Test => out.test.push(i),
                    SplitTag::Val => out.val.push(i),
                    _ => out.train.push(i),
                }
            }
        }
    }
    out.train.sort_unstable();
    out.val.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub test: Vec<T>,
}

pub fn split_samples(
    samples: Vec<WindowSample>,
    ratio: f64,
    seed: u64,
    granularity: Granularity,
) -> Result<Splits<WindowSample>> {
    let videos: Vec<usize> = samples.iter().map(|s| s.source.video).collect();
    let idx = split_indices(&videos, ratio, seed, granularity)?;
    let mut slots: Vec<Option<WindowSample>> = samples.into_iter().map(Some).collect();
    let mut take = |ids: &[usize]| ids.iter().map(|&i| slots[i].take().unwrap()).collect::<Vec<_>>();
    Ok(Splits {
        train: take(&idx.train),
        val: take(&idx.val),
        test: take(&idx.test),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessParams {
    pub resize_factor: usize,
    pub window_size: usize,
    pub window_overlap: usize,
    pub split_ratio: f64,
    pub granularity: Granularity,
    pub seed: u64,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        PreprocessParams {
            resize_factor: 4,
            window_size: 15,
            window_overlap: 5,
            split_ratio: 0.7,
            granularity: Granularity::Window,
            seed: 0,
        }
    }
}

impl PreprocessParams {
    fn describe(&self) -> String {
        format!(
            "resize_factor={}\nwindow_size={}\nwindow_overlap={}\nsplit_ratio={:?}\ngranularity={}\nseed={}\n",
            self.resize_factor, self.window_size, self.window_overlap, self.split_ratio, self.granularity, self.seed
        )
    }
}

/// Windows ready for training: split, labelled, normalized with train statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub class_names: Vec<String>,
    pub params: PreprocessParams,
    pub normalizer: Normalizer,
    pub splits: Splits<WindowSample>,
}

impl PreparedData {
    pub fn k(&self) -> usize {
        self.class_names.len()
    }

    pub fn input_shape(&self) -> Option<&[usize]> {
        self.splits
            .train
            .first()
            .or(self.splits.val.first())
            .or(self.splits.test.first())
            .map(|s| s.volume.shape())
    }
}

/// Downscaled, labelled but unnormalized windows of every video, in manifest order.
pub fn raw_windows(videos: &[FrameSequence], params: &PreprocessParams) -> Result<Vec<WindowSample>> {
    if params.window_size.is_multiple_of(2) {
        return Err(Error::arg(format!("window size {} must be odd", params.window_size)));
    }
    let mut out = Vec::new();
    for (vid, video) in videos.iter().enumerate() {
        let small: Vec<RealFrame> = video
            .frames
            .iter()
            .map(|f| downscale(f, video.width, video.height, params.resize_factor))
            .collect::<Result<_>>()?;
        for w in windowize(video, params.window_size, params.window_overlap)? {
            if w.labels.len() != params.window_size {
                return Err(Error::arg(format!("video {vid} has fewer label rows than frames")));
            }
            let (h, wd) = (small[0].height, small[0].width);
            let mut data = Vec::with_capacity(params.window_size * h * wd);
            for f in &small[w.start..w.start + params.window_size] {
                data.extend_from_slice(&f.data);
            }
            out.push(WindowSample {
                volume: Tensor::from_vec(&[1, params.window_size, h, wd], data)?,
                label: majority_label(w.labels)?,
                source: SampleSource { video: vid, start: w.start },
            });
        }
    }
    Ok(out)
}

pub fn preprocess(class_names: &[String], videos: &[FrameSequence], params: &PreprocessParams) -> Result<PreparedData> {
    let k = class_names.len();
    for v in videos {
        v.validate(k)?;
    }
    let samples = raw_windows(videos, params)?;
    let mut splits = split_samples(samples, params.split_ratio, params.seed, params.granularity)?;
    let normalizer = Normalizer::fit(splits.train.iter().map(|s| s.volume.data()))?;
    for s in splits.train.iter_mut().chain(&mut splits.val).chain(&mut splits.test) {
        normalizer.apply(s.volume.data_mut());
    }
    Ok(PreparedData {
        class_names: class_names.to_vec(),
        params: params.clone(),
        normalizer,
        splits,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Identifies a cached preprocessing run: manifest contents plus parameters.
pub fn cache_key(manifest_text: &str, params: &PreprocessParams) -> String {
    sha256_hex(format!("{}\n--\n{}", sha256_hex(manifest_text.as_bytes()), params.describe()).as_bytes())
}

const HVW_MAGIC: &[u8; 4] = b"HVW1";

/// Window cache layout inside a directory:
///
/// * `preprocess.txt`: `key=value` lines: cache key, manifest digest, parameters, normalizer, classes.
/// * `windows.hvw`: magic `HVW1`, then count, depth, height, width as u32 LE,
///   then every window's normalized values as f64 LE.
/// * `windows.txt`: one line per window: `<video> <start> <split> <bits>`.
pub fn save_cache(dir: &Path, data: &PreparedData, manifest_text: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let shape = data
        .input_shape()
        .ok_or_else(|| Error::arg("no windows to cache"))?
        .to_vec();
    let parts = [
        (SplitTag::Train, &data.splits.train),
        (SplitTag::Val, &data.splits.val),
        (SplitTag::Test, &data.splits.test),
    ];
    let count: usize = parts.iter().map(|(_, p)| p.len()).sum();
    let mut blob = Vec::with_capacity(20 + count * shape.iter().product::<usize>() * 8);
    blob.extend_from_slice(HVW_MAGIC);
    for v in [count, shape[1], shape[2], shape[3]] {
        blob.extend_from_slice(&(v as u32).to_le_bytes());
    }
    let mut sidecar = String::new();
    for (tag, part) in parts {
        for s in part.iter() {
            for v in s.volume.data() {
                blob.extend_from_slice(&v.to_le_bytes());
            }
            sidecar.push_str(&format!(
                "{} {} {} {}\n",
                s.source.video,
                s.source.start,
                tag,
                dataio::bits_to_string(&s.label)
            ));
        }
    }
    let meta = format!(
        "key={}\nmanifest_sha256={}\n{}norm_mean={:?}\nnorm_std={:?}\nclasses={}\n",
        cache_key(manifest_text, &data.params),
        sha256_hex(manifest_text.as_bytes()),
        data.params.describe(),
        data.normalizer.mean,
        data.normalizer.std,
        data.class_names.join(",")
    );
    let write = |name: &str, bytes: &[u8]| {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
    };
    write("windows.hvw", &blob)?;
    write("windows.txt", sidecar.as_bytes())?;
    write("preprocess.txt", meta.as_bytes())
}

pub(crate) fn read_kv(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Parse { path: path.to_path_buf(), line: i + 1, msg: "expected key=value".into() })
        })
        .collect()
}

/// Cache key recorded in a cache directory, if one exists.
pub fn cached_key(dir: &Path) -> Option<String> {
    let kv = read_kv(&dir.join("preprocess.txt")).ok()?;
    kv.into_iter().find(|(k, _)| k == "key").map(|(_, v)| v)
}

pub fn load_cache(dir: &Path) -> Result<PreparedData> {
    let meta_path = dir.join("preprocess.txt");
    let kv = read_kv(&meta_path)?;
    let get = |key: &str| {
        kv.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Config(format!("{}: missing `{key}`", meta_path.display())))
    };
    let num = |key: &str| -> Result<f64> {
        get(key)?.parse().map_err(|_| Error::Config(format!("{}: bad `{key}`", meta_path.display())))
    };
    let int = |key: &str| -> Result<u64> {
        get(key)?.parse().map_err(|_| Error::Config(format!("{}: bad `{key}`", meta_path.display())))
    };
    let params = PreprocessParams {
        resize_factor: int("resize_factor")? as usize,
        window_size: int("window_size")? as usize,
        window_overlap: int("window_overlap")? as usize,
        split_ratio: num("split_ratio")?,
        granularity: get("granularity")?.parse()?,
        seed: int("seed")?,
    };
    let normalizer = Normalizer { mean: num("norm_mean")?, std: num("norm_std")? };
    let class_names: Vec<String> = get("classes")?.split(',').map(str::to_string).collect();
    let k = class_names.len();

    let blob_path = dir.join("windows.hvw");
    let blob = fs::read(&blob_path).map_err(|e| Error::io(&blob_path, e))?;
    let fail = |offset: usize, msg: &str| Error::Format { path: blob_path.clone(), offset: offset as u64, msg: msg.into() };
    if blob.len() < 20 || &blob[..4] != HVW_MAGIC {
        return Err(fail(0, "bad magic or truncated header"));
    }
    let field = |at: usize| u32::from_le_bytes(blob[at..at + 4].try_into().unwrap()) as usize;
    let (count, d, h, w) = (field(4), field(8), field(12), field(16));
    let per = d * h * w;
    if blob.len() != 20 + count * per * 8 {
        return Err(fail(blob.len().min(20 + count * per * 8), "payload length does not match header"));
    }
    let side_path = dir.join("windows.txt");
    let side = fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
    let lines: Vec<&str> = side.lines().collect();
    if lines.len() != count {
        return Err(Error::Parse { path: side_path, line: lines.len() + 1, msg: format!("expected {count} windows") });
    }
    let mut splits = Splits { train: Vec::new(), val: Vec::new(), test: Vec::new() };
    for (i, line) in lines.iter().enumerate() {
        let perr = |msg: String| Error::Parse { path: side_path.clone(), line: i + 1, msg };
        let fields: Vec<&str> = line.split(' ').collect();
        let [video, start, tag, bits] = fields[..] else {
            return Err(perr("expected `<video> <start> <split> <bits>`".into()));
        };
        let values = blob[20 + i * per * 8..20 + (i + 1) * per * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let sample = WindowSample {
            volume: Tensor::from_vec(&[1, d, h, w], values)?,
            label: dataio::parse_bits(bits, k).map_err(perr)?,
            source: SampleSource {
                video: video.parse().map_err(|_| perr(format!("bad video id `{video}`")))?,
                start: start.parse().map_err(|_| perr(format!("bad start `{start}`")))?,
            },
        };
        match tag.parse::<SplitTag>()? {
            SplitTag::Train => splits.train.push(sample),
            SplitTag::Val => splits.val.push(sample),
            SplitTag::Test => splits.test.push(sample),
            SplitTag::Unassigned => return Err(perr("cached window without a split".into())),
        }
    }
    Ok(PreparedData { class_names, params, normalizer, splits })
}

/// Manifest copy whose entries carry the split each video's windows went to.
/// Entries whose windows landed in more than one part stay `unassigned`.
pub fn annotate_manifest(manifest: &DatasetManifest, data: &PreparedData) -> DatasetManifest {
    let mut out = manifest.clone();
    out.resize_factor = Some(data.params.resize_factor);
    out.norm_mean = Some(data.normalizer.mean);
    out.norm_std = Some(data.normalizer.std);
    for (vid, entry) in out.entries.iter_mut().enumerate() {
        let mut tags: Vec<SplitTag> = [
            (SplitTag::Train, &data.splits.train),
            (SplitTag::Val, &data.splits.val),
            (SplitTag::Test, &data.splits.test),
        ]
        .iter()
        .filter(|(_, part)| part.iter().any(|s| s.source.video == vid))
        .map(|(t, _)| *t)
        .collect();
        tags.dedup();
        entry.split = if tags.len() == 1 { tags[0] } else { SplitTag::Unassigned };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn downscale_identity_and_constant() {
        let frame: Vec<u8> = (0..12).collect();
        let same = downscale(&frame, 4, 3, 1).unwrap();
        assert_eq!(same.data, frame.iter().map(|&v| f64::from(v)).collect::<Vec<_>>());
        let flat = vec![77u8; 8 * 8];
        let small = downscale(&flat, 8, 8, 4).unwrap();
        assert_eq!((small.width, small.height), (2, 2));
        assert!(small.data.iter().all(|&v| v == 77.0));
    }

    #[test]
    fn downscale_full_frame_geometry() {
        let (w, h) = (480, 270);
        let frame: Vec<u8> = (0..w * h).map(|i| ((i % w) % 251) as u8).collect();
        let small = downscale(&frame, w, h, 4).unwrap();
        assert_eq!((small.width, small.height), (120, 67));
        // block (row 0, col 1) covers columns 4..8 of rows 0..4: mean of 4,5,6,7
        assert_eq!(small.data[1], 5.5);
        assert!(downscale(&frame, w, h, 500).is_err());
    }

    #[test]
    fn normalizer_two_points() {
        let data = [0.0, 2.0];
        let n = Normalizer::fit([&data[..]]).unwrap();
        assert_eq!((n.mean, n.std), (1.0, 1.0));
        assert_eq!(n.normalize(0.0), -1.0);
        assert_eq!(n.normalize(2.0), 1.0);
        let flat = [5.0; 4];
        let c = Normalizer::fit([&flat[..]]).unwrap();
        assert_eq!(c.std, STD_FLOOR);
        assert!(flat.iter().all(|&v| c.normalize(v) == 0.0));
        assert!(Normalizer::fit(std::iter::empty::<&[f64]>()).is_err());
        let x = 123.456;
        assert!((n.denormalize(n.normalize(x)) - x).abs() < 1e-9);
    }

    #[test]
    fn window_examples() {
        assert_eq!(window_starts(15, 15, 5).unwrap(), vec![0]);
        assert_eq!(window_starts(35, 15, 5).unwrap(), vec![0, 10, 20]);
        assert!(window_starts(14, 15, 5).unwrap().is_empty());
        assert!(window_starts(30, 5, 5).is_err());
    }

    #[test]
    fn majority_examples() {
        let v = vec![true, false, true];
        assert_eq!(majority_label(&vec![v.clone(); 15]).unwrap(), v);
        let rows: Vec<LabelVec> = (0..15).map(|i| vec![i < 8, i < 7]).collect();
        assert_eq!(majority_label(&rows).unwrap(), vec![true, false]);
        assert!(majority_label(&vec![vec![true]; 14]).is_err());
    }

    #[test]
    fn split_sizes_for_hundred() {
        let videos = vec![0; 100];
        let s = split_indices(&videos, 0.7, 1, Granularity::Window).unwrap();
        assert_eq!((s.test.len(), s.val.len(), s.train.len()), (30, 21, 49));
        assert_eq!(s, split_indices(&videos, 0.7, 1, Granularity::Window).unwrap());
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert!(split_indices(&[0, 1], 0.7, 1, Granularity::Window).is_err());
    }

    #[test]
    fn video_split_keeps_videos_whole() {
        let videos: Vec<usize> = (0..60).map(|i| i / 6).collect();
        let s = split_indices(&videos, 0.7, 3, Granularity::Video).unwrap();
        let vids = |ids: &[usize]| ids.iter().map(|&i| videos[i]).collect::<std::collections::BTreeSet<_>>();
        let (a, b, c) = (vids(&s.train), vids(&s.val), vids(&s.test));
        assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
        assert_eq!((c.len(), b.len(), a.len()), (3, 2, 5));
    }
}
