mod common;

use motiondet::background::*;
use motiondet::imagecore::RgbImage;
use motiondet::Exec;
use proptest::prelude::*;

fn stack(max_frames: usize) -> impl Strategy<Value = Vec<RgbImage>> {
    (1usize..8, 1usize..8, 1..=max_frames).prop_flat_map(|(w, h, n)| {
        proptest::collection::vec(proptest::collection::vec(any::<u8>(), w * h * 3), n)
            .prop_map(move |fs| fs.into_iter().map(|d| RgbImage::new(w, h, d).unwrap()).collect())
    })
}

/// `round_half_away(sum / n)` with an exact rational comparison.
fn rounded_mean(values: &[u8]) -> u8 {
    let s: u64 = values.iter().map(|&v| v as u64).sum();
    let n = values.len() as u64;
    let q = s / n;
    if 2 * (s - q * n) >= n {
        (q + 1) as u8
    } else {
        q as u8
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mean_matches_per_sample_oracle(frames in stack(12)) {
        let bg = mean_background(&frames).unwrap();
        for i in 0..bg.as_raw().len() {
            let series: Vec<u8> = frames.iter().map(|f| f.as_raw()[i]).collect();
            prop_assert_eq!(bg.as_raw()[i], rounded_mean(&series));
        }
    }

    #[test]
    fn mean_ignores_frame_order(frames in stack(10), rot in 0usize..10) {
        let mut b = MeanBackgroundBuilder::new(frames[0].width(), frames[0].height());
        let mut shuffled = frames.clone();
        shuffled.reverse();
        let r = rot % shuffled.len();
        shuffled.rotate_left(r);
        for f in &shuffled {
            b.add_frame(f).unwrap();
        }
        prop_assert_eq!(b.finalize().unwrap(), mean_background(&frames).unwrap());
    }

    #[test]
    fn mean_execution_modes_agree(frames in stack(10)) {
        let seq = mean_background_with(&frames, Exec::Sequential).unwrap();
        prop_assert_eq!(&seq, &mean_background_with(&frames, Exec::Parallel).unwrap());
        let mut b = MeanBackgroundBuilder::new(frames[0].width(), frames[0].height());
        for f in &frames {
            b.add_frame_with(f, Exec::Parallel).unwrap();
        }
        prop_assert_eq!(&seq, &b.finalize().unwrap());
    }

    #[test]
    fn outputs_stay_within_observed_range(frames in stack(8), seed in any::<u64>()) {
        let mean = mean_background(&frames).unwrap();
        let km = (frames.len() >= 2).then(|| kmeans_background(&frames, 2, seed).unwrap());
        for i in 0..mean.as_raw().len() {
            let lo = frames.iter().map(|f| f.as_raw()[i]).min().unwrap();
            let hi = frames.iter().map(|f| f.as_raw()[i]).max().unwrap();
            prop_assert!((lo..=hi).contains(&mean.as_raw()[i]));
            if let Some(k) = &km {
                let v = k.as_raw()[i];
                prop_assert!(frames.iter().any(|f| f.as_raw()[i] == v), "not an observed value");
            }
        }
    }

    #[test]
    fn kmeans_recovers_a_strict_majority(w in 1usize..6, h in 1usize..6, n in 3usize..12,
                                         base in 0u8..60, seed in any::<u64>(), salt in any::<u64>()) {
        let majority = RgbImage::from_fn(w, h, |x, y| {
            let v = base.wrapping_add((x * 7 + y * 13) as u8 % 40);
            [v, v / 2, 100 - v / 2]
        }).unwrap();
        let minority_count = (n - 1) / 2;
        let mut frames = vec![majority.clone(); n - minority_count];
        for m in 0..minority_count {
            frames.push(RgbImage::from_fn(w, h, |x, y| {
                let j = ((salt >> (m % 8)) as usize + x + y) % 3;
                let c = majority.pixel(x, y);
                [c[0] + 120 + j as u8 * 10, c[1], c[2]]
            }).unwrap());
        }
        frames.rotate_left(seed as usize % n);
        prop_assert_eq!(kmeans_background(&frames, 2, seed).unwrap(), majority);
    }

    #[test]
    fn kmeans_execution_modes_agree(frames in stack(8), seed in any::<u64>()) {
        prop_assume!(frames.len() >= 2);
        prop_assert_eq!(
            kmeans_background_with(&frames, 2, seed, Exec::Sequential).unwrap(),
            kmeans_background_with(&frames, 2, seed, Exec::Parallel).unwrap()
        );
    }

    #[test]
    fn sampling_respects_spacing_and_cap(dts in proptest::collection::vec(0.0f64..1.0, 0..60),
                                         interval in 0.01f64..2.0, cap in 1usize..20) {
        let mut t = 0.0;
        let stamps: Vec<f64> = dts.iter().map(|d| { t += d; t }).collect();
        let policy = SamplingPolicy::new(interval, cap).unwrap();
        let picked = sample_frames(stamps.iter().map(|&s| (s, s)), &policy);
        prop_assert!(picked.len() <= cap);
        prop_assert_eq!(picked.first().copied(), stamps.first().copied());
        prop_assert!(picked.windows(2).all(|w| w[1] - w[0] >= interval));
    }
}

#[test]
fn single_frame_mean_is_that_frame() {
    let f = RgbImage::from_fn(4, 3, |x, y| [x as u8 * 60, y as u8 * 90, 17]).unwrap();
    assert_eq!(mean_background(std::slice::from_ref(&f)).unwrap(), f);
}

#[test]
fn sampling_examples() {
    let ten: Vec<(f64, usize)> = (0..10).map(|i| (i as f64 * 0.1, i)).collect();
    let p = SamplingPolicy::new(0.5, 670).unwrap();
    assert_eq!(sample_frames(ten.clone(), &p), vec![0, 5]);
    assert_eq!(
        sample_frames(ten.clone(), &SamplingPolicy::new(5.0, 670).unwrap()),
        vec![0]
    );
    let long: Vec<(f64, usize)> = (0..100).map(|i| (i as f64, i)).collect();
    assert_eq!(sample_frames(long, &SamplingPolicy::new(0.5, 3).unwrap()).len(), 3);
    assert!(sample_frames(Vec::<(f64, usize)>::new(), &p).is_empty());
}

#[test]
fn pixel_series_examples() {
    let s = |v: &[u8]| v.iter().map(|&x| [x, x, x]).collect::<Vec<_>>();
    for seed in 0..10 {
        assert_eq!(pixel_background(&s(&[50, 52, 48, 200, 51]), 2, seed).unwrap(), [50; 3]);
        assert_eq!(pixel_background(&s(&[0, 0, 0, 255, 255]), 2, seed).unwrap(), [0; 3]);
    }
}

#[test]
fn mismatched_stack_is_rejected() {
    let a = RgbImage::filled(4, 4, [0; 3]).unwrap();
    let b = RgbImage::filled(4, 5, [0; 3]).unwrap();
    assert!(mean_background(&[a.clone(), b.clone()]).is_err());
    assert!(kmeans_background(&[a, b], 2, 0).is_err());
    assert!(mean_background(&[]).is_err());
}
