//! Property tests for the crate-wide invariants.

use proptest::prelude::*;

use gliofuse::classifiers::{train_gbt_traced, GbtConfig, TrainSet};
use gliofuse::eval::{metrics, stratified_kfold, ConfusionMatrix};
use gliofuse::volume::{normalize_volume, resize_volume, Grade, Interp, Volume};
use gliofuse::wavelet::{dwt2_level1, idwt2_level1, rescale_grayscale, WaveletFilter};

fn volume_strategy(max_side: usize) -> impl Strategy<Value = Volume> {
    (1..=max_side, 1..=max_side, 1..=3usize)
        .prop_flat_map(|(nx, ny, nz)| {
            proptest::collection::vec(-1e3..1e3f64, nx * ny * nz)
                .prop_map(move |data| Volume::new((nx, ny, nz), (1.0, 1.0, 1.0), data).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wavelet_round_trip_and_parseval(
        (nx, ny) in (1..=20usize, 1..=20usize),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let slice: Vec<f64> = (0..nx * ny).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let filter = WaveletFilter::db1();
        let sb = dwt2_level1(&slice, (nx, ny), &filter).unwrap();
        let back = idwt2_level1(&sb, &filter).unwrap();
        for (a, b) in slice.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        if nx % 2 == 0 && ny % 2 == 0 {
            // energy conservation holds exactly for even dims (no padding)
            let ex: f64 = slice.iter().map(|x| x * x).sum();
            prop_assert!(((sb.energy() - ex) / ex.max(1e-12)).abs() < 1e-9);
        }
    }

    #[test]
    fn normalize_stays_in_unit_interval(vol in volume_strategy(8)) {
        let n = normalize_volume(&vol).unwrap();
        prop_assert!(n.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        // zero background is preserved
        for (&a, &b) in vol.data().iter().zip(n.data()) {
            if a == 0.0 {
                prop_assert!(b == 0.0);
            }
        }
    }

    #[test]
    fn rescale_covers_gray_range(vol in volume_strategy(8)) {
        let r = rescale_grayscale(&vol).unwrap();
        let (lo, hi) = r.min_max();
        let (slo, shi) = vol.min_max();
        if slo == shi {
            prop_assert!(lo == 0.0 && hi == 0.0);
        } else {
            prop_assert!(lo == 0.0 && hi == 255.0);
        }
    }

    #[test]
    fn bilinear_resize_never_overshoots(
        vol in volume_strategy(12),
        tx in 1..=20usize,
        ty in 1..=20usize,
    ) {
        let (lo, hi) = vol.min_max();
        let r = resize_volume(&vol, (tx, ty), Interp::Bilinear).unwrap();
        prop_assert!(r.data().iter().all(|&v| v >= lo - 1e-9 && v <= hi + 1e-9));
    }

    #[test]
    fn nearest_resize_preserves_value_set(
        vol in volume_strategy(10),
        tx in 1..=15usize,
        ty in 1..=15usize,
    ) {
        let r = resize_volume(&vol, (tx, ty), Interp::Nearest).unwrap();
        for &v in r.data() {
            prop_assert!(vol.data().contains(&v));
        }
    }

    #[test]
    fn folds_partition_with_bounded_deviation(
        n_h in 2..=60usize,
        n_l in 2..=60usize,
        k in 2..=6usize,
        seed in any::<u64>(),
    ) {
        prop_assume!(n_h >= k && n_l >= k);
        let mut labels = vec![Grade::Hgg; n_h];
        labels.extend(vec![Grade::Lgg; n_l]);
        let folds = stratified_kfold(&labels, k, seed).unwrap();
        let mut seen = vec![0usize; labels.len()];
        for fold in &folds.assignments {
            let hgg = fold.iter().filter(|&&i| labels[i] == Grade::Hgg).count() as f64;
            prop_assert!((hgg - n_h as f64 / k as f64).abs() <= 1.0 + 1e-12);
            for &i in fold {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn gbt_logloss_is_non_increasing(
        n in 8..40usize,
        noise in 0.0..1.5f64,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let y: Vec<Grade> = x
            .iter()
            .enumerate()
            .map(|(i, r)| {
                // half signal, half forced labels so both classes exist
                if i < 2 {
                    [Grade::Hgg, Grade::Lgg][i]
                } else if r[0] + noise * rng.gen_range(-1.0..1.0) > 0.0 {
                    Grade::Hgg
                } else {
                    Grade::Lgg
                }
            })
            .collect();
        let data = TrainSet::new(x, y).unwrap();
        let cfg = GbtConfig { n_rounds: 60, ..GbtConfig::default() };
        let (_, history) = train_gbt_traced(&data, &cfg).unwrap();
        for w in history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "logloss rose {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn metric_identities(
        tp in 0..100usize,
        fn_ in 0..100usize,
        fp in 0..100usize,
        tn in 0..100usize,
    ) {
        prop_assume!(tp + fn_ + fp + tn > 0);
        let cm = ConfusionMatrix { tp, fn_, fp, tn };
        let m = metrics(&cm, None).unwrap();
        // accuracy * N == tp + tn
        prop_assert!((m.accuracy * cm.total() as f64 - (tp + tn) as f64).abs() < 1e-9);
        // f1 * (p + r) == 2 p r when defined
        if !m.undefined.iter().any(|u| u == "f1" || u == "precision" || u == "recall") {
            prop_assert!((m.f1 * (m.precision + m.recall) - 2.0 * m.precision * m.recall).abs() < 1e-12);
        }
        prop_assert!(m.accuracy >= 0.0 && m.accuracy <= 1.0);
    }
}
