use proptest::prelude::*;

use vtext::binarizer::{binarize_region, fcm, FcmParams};
use vtext::evalkit::{iou, read_annotations, score_line, write_annotations, AnnotatedBox, FrameAnnotation};
use vtext::glyphfeat::{resample_profile, FeatureVector160};
use vtext::mfi::group_bands;
use vtext::pixelcore::{GrayImage, Grid, Rect};
use vtext::recognizer::{fuzzy_knn_membership, prototype_from_values, FuzzyKnnParams, PrototypeSet};

fn rect() -> impl Strategy<Value = Rect> {
    (0usize..50, 0usize..50, 0usize..30, 0usize..30).prop_map(|(x, y, w, h)| Rect::new(x, y, w, h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn iou_is_symmetric_and_bounded(a in rect(), b in rect()) {
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou(&b, &a));
        if a.area() > 0 {
            prop_assert_eq!(iou(&a, &a), 1.0);
        }
    }

    #[test]
    fn bands_are_sorted_disjoint_and_thick(bits in prop::collection::vec(any::<bool>(), 0..80), gap in 0usize..4, min in 1usize..5) {
        let bands = group_bands(&bits, gap, min);
        for b in &bands {
            prop_assert!(b.thickness() >= min);
            prop_assert!(bits[b.start] && bits[b.end]);
        }
        for w in bands.windows(2) {
            prop_assert!(w[0].end + gap + 1 < w[1].start);
        }
    }

    #[test]
    fn fcm_rows_sum_to_one(points in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..60), m in 1.2f64..3.0, seed in 0u64..100) {
        let pts: Vec<[f64; 2]> = points.iter().map(|&(a, b)| [a, b]).collect();
        if let Ok(r) = fcm(&pts, &FcmParams { m, seed, ..Default::default() }) {
            for u in &r.memberships {
                prop_assert!((u.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(u.iter().all(|v| (0.0..=1.0).contains(v)));
            }
            prop_assert!(r.objective.is_finite());
        }
    }

    #[test]
    fn knn_memberships_ignore_uniform_scaling(
        coords in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..12),
        labels in prop::collection::vec(0usize..3, 12),
        query in (-5.0f64..5.0, -5.0f64..5.0),
        k in 1usize..4,
        scale in 0.1f64..10.0,
    ) {
        let build = |s: f64| {
            let protos = coords
                .iter()
                .zip(&labels)
                .map(|(&(a, b), &l)| {
                    let mut v = vec![0.0; 160];
                    v[0] = a * s;
                    v[1] = b * s;
                    let mut row = vec![0.0; 3];
                    row[l] = 1.0;
                    prototype_from_values(&v, row).unwrap()
                })
                .collect();
            PrototypeSet::new(vec!["a".into(), "b".into(), "c".into()], protos, FuzzyKnnParams::default()).unwrap()
        };
        let q = |s: f64| {
            let mut v = FeatureVector160::zeros();
            v.0[0] = query.0 * s;
            v.0[1] = query.1 * s;
            v
        };
        let params = FuzzyKnnParams { k, m: 2.0 };
        let u1 = fuzzy_knn_membership(&q(1.0), &build(1.0), &params).unwrap();
        let u2 = fuzzy_knn_membership(&q(scale), &build(scale), &params).unwrap();
        prop_assert!((u1.u.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (a, b) in u1.u.iter().zip(&u2.u) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn resampled_profiles_are_distributions(profile in prop::collection::vec(0usize..20, 1..60)) {
        let r = resample_profile(&profile);
        let s: f64 = r.iter().sum();
        if profile.iter().all(|&v| v == 0) {
            prop_assert_eq!(s, 0.0);
        } else {
            prop_assert!((s - 1.0).abs() < 1e-9);
            prop_assert!(r.iter().all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn binarization_keeps_shape(w in 3usize..24, h in 3usize..16, seed in any::<u64>()) {
        let img: GrayImage = Grid::from_fn(w, h, |x, y| ((x as u64 * 31 + y as u64 * 17 + seed) % 256) as u8);
        let b = binarize_region(&img, &FcmParams::default()).unwrap();
        prop_assert_eq!((b.width(), b.height()), (w, h));
    }

    #[test]
    fn scores_never_exceed_totals(pred in "[ابت ]{0,12}", truth in "[ابت ]{0,12}") {
        let t = score_line(&pred, &truth);
        prop_assert!(t.correct_chars <= t.total_chars);
        prop_assert!(t.correct_words <= t.total_words);
        let same = score_line(&truth, &truth);
        prop_assert_eq!(same.correct_chars, same.total_chars);
    }

    #[test]
    fn annotations_round_trip(boxes in prop::collection::vec((rect(), "[a-z ب]{0,6}", prop::option::of(0.0f64..1.0)), 0..4)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.jsonl");
        let records = vec![FrameAnnotation {
            frame: "clip/f.png".into(),
            boxes: boxes
                .into_iter()
                .map(|(r, t, score)| AnnotatedBox { score, ..AnnotatedBox::new(r, t) })
                .collect(),
        }];
        write_annotations(&path, &records).unwrap();
        prop_assert_eq!(read_annotations(&path).unwrap(), records);
    }
}
