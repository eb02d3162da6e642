use motiondet::background::mean_background;
use motiondet::synth::*;
use motiondet::Exec;
use proptest::prelude::*;

fn rgb() -> impl Strategy<Value = [u8; 3]> {
    any::<[u8; 3]>()
}

fn backdrop() -> impl Strategy<Value = Backdrop> {
    prop_oneof![
        rgb().prop_map(Backdrop::Flat),
        (rgb(), rgb()).prop_map(|(left, right)| Backdrop::Gradient { left, right }),
        (rgb(), rgb(), 1usize..9).prop_map(|(a, b, cell)| Backdrop::Checker { a, b, cell }),
    ]
}

fn scene() -> impl Strategy<Value = SceneSpec> {
    (8usize..40, 8usize..40, 1usize..12, backdrop()).prop_flat_map(|(w, h, n, bd)| {
        let mv = (
            1..=w / 2,
            1..=h / 2,
            rgb(),
            (-5i64..6, -5i64..6),
            (-50i64..50, -50i64..50),
            0usize..4,
        )
            .prop_map(|(mw, mh, color, velocity, start, phase)| Mover {
                width: mw,
                height: mh,
                color,
                velocity,
                start,
                phase,
            });
        let parked = proptest::option::of((0..w / 2, 0..h / 2, 1..=w / 2, 1..=h / 2, rgb()).prop_map(
            |(x, y, pw, ph, color)| Parked {
                rect: Rect {
                    x,
                    y,
                    width: pw,
                    height: ph,
                },
                color,
            },
        ));
        (proptest::collection::vec(mv, 0..4), parked, 0.0f64..20.0, any::<u64>()).prop_map(
            move |(movers, parked, sigma, seed)| SceneSpec {
                width: w,
                height: h,
                backdrop: bd.clone(),
                movers,
                parked,
                noise_sigma: (sigma * 4.0).round() / 4.0,
                frames: n,
                seed,
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kv_round_trip(s in scene()) {
        let text = s.to_kv().to_text();
        let back = SceneSpec::from_kv(&motiondet::kv::KvMap::parse(&text).unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn generation_is_reproducible_in_both_modes(s in scene()) {
        let a = generate_with(&s, Exec::Sequential).unwrap();
        let b = generate_with(&s, Exec::Parallel).unwrap();
        prop_assert_eq!(&a.0, &b.0);
        prop_assert_eq!(&a.1, &b.1);
        prop_assert_eq!(a.1.per_frame.len(), s.frames);
    }

    #[test]
    fn seed_changes_noise_not_footprints(s in scene(), other in any::<u64>()) {
        prop_assume!(other != s.seed);
        let t = SceneSpec { seed: other, noise_sigma: s.noise_sigma.max(4.0), ..s.clone() };
        let base = SceneSpec { noise_sigma: t.noise_sigma, ..s.clone() };
        let (fa, ga) = generate(&base).unwrap();
        let (fb, gb) = generate(&t).unwrap();
        prop_assert_eq!(ga, gb);
        prop_assert_ne!(fa, fb);
    }

    #[test]
    fn noiseless_frames_show_exact_placements(s in scene()) {
        let s = SceneSpec { noise_sigma: 0.0, ..s };
        let (frames, truth) = generate(&s).unwrap();
        for (t, f) in frames.iter().enumerate() {
            let ft = &truth.per_frame[t];
            prop_assert_eq!(ft.active_mover_count, s.movers.iter().filter(|m| m.phase <= t).count());
            for y in 0..s.height {
                for x in 0..s.width {
                    let top = s.movers.iter().rev()
                        .filter_map(|m| m.footprint(t, s.width, s.height).map(|r| (m, r)))
                        .find(|(_, r)| r.covers(x, y, s.width, s.height));
                    let expected = match top {
                        Some((m, _)) => m.color,
                        None => truth.true_background.pixel(x, y),
                    };
                    prop_assert_eq!(f.pixel(x, y), expected);
                }
            }
        }
    }

    #[test]
    fn untouched_pixels_average_to_the_backdrop(s in scene()) {
        let s = SceneSpec { noise_sigma: 0.0, ..s };
        let (frames, truth) = generate(&s).unwrap();
        let mean = mean_background(&frames).unwrap();
        for y in 0..s.height {
            for x in 0..s.width {
                let touched = truth.per_frame.iter()
                    .any(|ft| ft.footprints.iter().any(|r| r.covers(x, y, s.width, s.height)));
                if !touched {
                    prop_assert_eq!(mean.pixel(x, y), truth.true_background.pixel(x, y));
                }
            }
        }
    }
}

#[test]
fn invalid_specs_name_the_field() {
    for (text, field) in [
        ("width = 0\nheight = 4\nframes = 1", "width"),
        ("width = 4\nheight = 4\nframes = 0", "frames"),
        ("width = 4\nheight = 4\nframes = 2\nnoise_sigma = -1", "noise_sigma"),
        ("width = 4\nheight = 4\nframes = 2\nmover.0.size = 0x3", "mover"),
        (
            "width = 4\nheight = 4\nframes = 2\nmover.0.size = 2x2\nmover.0.colour = 1,2,3",
            "mover.0.colour",
        ),
        ("width = 4\nheight = 4\nframes = 2\nbackdrop = stripes", "backdrop"),
        ("height = 4\nframes = 2", "width"),
    ] {
        let err = motiondet::kv::KvMap::parse(text)
            .and_then(|kv| SceneSpec::from_kv(&kv))
            .unwrap_err();
        assert!(err.to_string().contains(field), "{text:?}: {err}");
    }
}
