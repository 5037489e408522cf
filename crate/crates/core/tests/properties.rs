use std::path::Path;

use actionrec::dataio::{self, FrameSequence, LabelVec};
use actionrec::imbalance::{self, LabelStats};
use actionrec::metrics::{self, Confusion, MetricsReport};
use actionrec::pipeline::{self, Granularity};
use actionrec::tensor::{self, reference, valid_extent, Tensor};
use proptest::prelude::*;

fn tensor_of(shape: Vec<usize>) -> impl Strategy<Value = Tensor> {
    let n: usize = shape.iter().product();
    prop::collection::vec(-2.0f64..2.0, n).prop_map(move |d| Tensor::from_vec(&shape, d).unwrap())
}

/// `(input, kernels, bias, stride)` with a kernel that fits the input.
fn conv_case() -> impl Strategy<Value = (Tensor, Tensor, Tensor, [usize; 3])> {
    (1usize..3, 1usize..4, prop::array::uniform3(2usize..8), prop::array::uniform3(1usize..3))
        .prop_flat_map(|(cin, cout, dims, stride)| {
            let k = (1..=dims[0].min(3), 1..=dims[1].min(3), 1..=dims[2].min(3));
            (Just((cin, cout, dims, stride)), k)
        })
        .prop_flat_map(|((cin, cout, dims, stride), (a, b, c))| {
            (
                tensor_of(vec![cin, dims[0], dims[1], dims[2]]),
                tensor_of(vec![cout, cin, a, b, c]),
                tensor_of(vec![cout]),
                Just(stride),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conv_output_shape_follows_formula((x, k, b, s) in conv_case()) {
        let y = tensor::conv3d(&x, &k, &b, s).unwrap();
        let want: Vec<usize> = (0..3).map(|i| (x.shape()[i + 1] - k.shape()[i + 2]) / s[i] + 1).collect();
        prop_assert_eq!(y.shape()[0], k.shape()[0]);
        prop_assert_eq!(&y.shape()[1..], &want[..]);
    }

    #[test]
    fn conv_matches_reference((x, k, b, s) in conv_case()) {
        let fast = tensor::conv3d(&x, &k, &b, s).unwrap();
        let slow = reference::conv3d(&x, &k, &b, s).unwrap();
        prop_assert!(fast.max_abs_diff(&slow) <= 1e-12);
    }

    #[test]
    fn conv_is_linear_in_input((x, k, b, s) in conv_case(), a in -3.0f64..3.0) {
        let zero_b = Tensor::zeros(b.shape());
        let scaled = Tensor::from_vec(x.shape(), x.data().iter().map(|v| a * v).collect()).unwrap();
        let y = tensor::conv3d(&x, &k, &zero_b, s).unwrap();
        let ys = tensor::conv3d(&scaled, &k, &zero_b, s).unwrap();
        let want = Tensor::from_vec(y.shape(), y.data().iter().map(|v| a * v).collect()).unwrap();
        prop_assert!(ys.max_abs_diff(&want) <= 1e-10);
    }

    #[test]
    fn pool_picks_window_maxima(
        x in (1usize..3, prop::array::uniform3(2usize..7)).prop_flat_map(|(c, d)| tensor_of(vec![c, d[0], d[1], d[2]])),
        w in prop::array::uniform3(1usize..3),
        s in prop::array::uniform3(1usize..3),
    ) {
        let p = tensor::maxpool3d(&x, w, s).unwrap();
        let slow = reference::maxpool3d(&x, w, s).unwrap();
        prop_assert_eq!(&p.argmax, &slow.argmax);
        for (o, &i) in p.output.data().iter().zip(&p.argmax) {
            prop_assert_eq!(*o, x.data()[i]);
        }
        let dims: Vec<usize> = (0..3).map(|i| valid_extent(x.shape()[i + 1], w[i], s[i])).collect();
        prop_assert_eq!(&p.output.shape()[1..], &dims[..]);
        let g = tensor::maxpool3d_grad(&Tensor::filled(p.output.shape(), 1.0), &p.argmax, x.shape()).unwrap();
        prop_assert!((g.sum() - p.output.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn window_count_formula(n in 0usize..400, size in (1usize..20).prop_map(|s| 2 * s + 1), overlap in 0usize..10) {
        prop_assume!(overlap < size);
        let starts = pipeline::window_starts(n, size, overlap).unwrap();
        let stride = size - overlap;
        let want = if n < size { 0 } else { (n - size) / stride + 1 };
        prop_assert_eq!(starts.len(), want);
        prop_assert!(starts.iter().all(|s| s % stride == 0 && s + size <= n));
    }

    #[test]
    fn majority_is_monotone(bits in prop::collection::vec(any::<bool>(), 15), flip in 0usize..15) {
        let rows: Vec<LabelVec> = bits.iter().map(|&b| vec![b]).collect();
        let mut more = rows.clone();
        more[flip][0] = true;
        let a = pipeline::majority_label(&rows).unwrap()[0];
        let b = pipeline::majority_label(&more).unwrap()[0];
        prop_assert!(!a || b);
    }

    #[test]
    fn rarer_classes_weigh_more(m in 1usize..5000, a in 0usize..5000, b in 0usize..5000, mu in 0.05f64..1.0) {
        let (lo, hi) = (a.min(b).min(m), a.max(b).min(m));
        let w = imbalance::class_weights(&LabelStats { m, positives: vec![lo, hi] }, mu).unwrap();
        prop_assert!(w[0] >= w[1]);
        prop_assert!(w.iter().all(|&x| x >= 1.0));
    }

    #[test]
    fn thresholds_fall_with_weight(w1 in 1.0f64..10.0, dw in 0.0f64..10.0, c in 0.0f64..1.0, alpha in 0.05f64..0.95) {
        let th = imbalance::soften_thresholds(&[w1, w1 + dw], &[c, c], alpha).unwrap();
        prop_assert!(th[1] <= th[0]);
        prop_assert!(th.iter().all(|&t| (0.0..=alpha).contains(&t)));
    }

    #[test]
    fn prf1_is_scale_invariant(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50, c in 1usize..20) {
        prop_assert_eq!(metrics::prf1(tp, fp, fn_), metrics::prf1(c * tp, c * fp, c * fn_));
    }

    #[test]
    fn f1_lies_between_precision_and_recall(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50) {
        let (p, r, f) = metrics::prf1(tp, fp, fn_);
        if p + r > 0.0 {
            prop_assert!(p.min(r) - 1e-15 <= f && f <= p.max(r) + 1e-15);
        }
    }

    #[test]
    fn macro_f1_ignores_class_order(mut f1 in prop::collection::vec(0.0f64..1.0, 1..12), seed in any::<u64>()) {
        let a = metrics::macro_f1(&f1).unwrap();
        let n = f1.len();
        f1.rotate_left(seed as usize % n);
        f1.reverse();
        prop_assert!((metrics::macro_f1(&f1).unwrap() - a).abs() < 1e-12);
    }

    #[test]
    fn confusion_matches_brute_force(
        rows in prop::collection::vec(prop::collection::vec(any::<(bool, bool)>(), 3), 1..30),
    ) {
        let pred: Vec<LabelVec> = rows.iter().map(|r| r.iter().map(|p| p.0).collect()).collect();
        let truth: Vec<LabelVec> = rows.iter().map(|r| r.iter().map(|p| p.1).collect()).collect();
        let counts = metrics::confusion_counts(&pred, &truth).unwrap();
        for (j, c) in counts.iter().enumerate() {
            let tally = |p: bool, t: bool| rows.iter().filter(|r| r[j] == (p, t)).count();
            prop_assert_eq!(*c, Confusion { tp: tally(true, true), fp: tally(true, false), fn_: tally(false, true), tn: tally(false, false) });
            prop_assert_eq!(c.total(), rows.len());
        }
        let report = MetricsReport::from_counts(&counts).unwrap();
        let names: Vec<String> = (0..3).map(|j| format!("c{j}")).collect();
        let text = metrics::render_report(&report, &names).unwrap();
        let (back_names, back) = metrics::parse_report(&text, Path::new("r")).unwrap();
        prop_assert_eq!(back_names, names);
        prop_assert_eq!(back, report);
    }

    #[test]
    fn hvd_round_trips(w in 1usize..9, h in 1usize..9, frames in prop::collection::vec(any::<u8>(), 0..300)) {
        let per = w * h;
        let count = frames.len() / per;
        let video = FrameSequence {
            width: w,
            height: h,
            frames: frames.chunks_exact(per).take(count).map(<[u8]>::to_vec).collect(),
            labels: Vec::new(),
        };
        let bytes = dataio::encode_hvd(&video).unwrap();
        prop_assert_eq!(bytes.len(), dataio::HVD_HEADER_LEN + count * per);
        let back = dataio::decode_hvd(&bytes, Path::new("v")).unwrap();
        prop_assert_eq!(back.frames, video.frames);
        if !bytes.is_empty() {
            let cut = bytes.len() - 1;
            prop_assert!(count == 0 || dataio::decode_hvd(&bytes[..cut], Path::new("v")).is_err());
        }
    }

    #[test]
    fn label_text_round_trips(k in 1usize..8, rows in prop::collection::vec(any::<u8>(), 0..40)) {
        let labels: Vec<LabelVec> = rows.iter().map(|r| (0..k).map(|j| r >> j & 1 == 1).collect()).collect();
        let text = dataio::format_labels(&labels);
        prop_assert_eq!(dataio::parse_labels(&text, k, Path::new("l")).unwrap(), labels);
    }

    #[test]
    fn splits_partition_items(n in 8usize..80, videos in 3usize..8, seed in any::<u64>(), by_video in any::<bool>()) {
        let owner: Vec<usize> = (0..n).map(|i| i % videos).collect();
        let g = if by_video { Granularity::Video } else { Granularity::Window };
        let s = pipeline::split_indices(&owner, 0.7, seed, g).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        if by_video {
            for part in [&s.train, &s.val] {
                for &i in part.iter() {
                    prop_assert!(s.test.iter().all(|&t| owner[t] != owner[i]));
                }
            }
        } else {
            let (test, val) = pipeline::split_sizes(n, 0.7);
            prop_assert_eq!((s.test.len(), s.val.len()), (test, val));
        }
    }
}
