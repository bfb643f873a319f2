use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tremorscope::detector::*;
use tremorscope::magnifier::{magnify, MagnificationConfig, Mode};
use tremorscope::synth::{render_clip, texture, MotionComponent, MotionSpec};
use tremorscope::video::{Frame, VideoSequence};

fn noise_texture(size: usize) -> Frame {
    Frame::from_luma(0, &texture::filtered_noise(size, size, 3.0, 0.0, 0.1, 7))
}

fn component(
    amplitude: f64,
    frequency: f64,
    direction: f64,
    start: f64,
    end: f64,
    label: &str,
) -> MotionComponent {
    MotionComponent {
        amplitude,
        frequency,
        direction_deg: direction,
        start_s: start,
        end_s: end,
        label: label.into(),
    }
}

fn dft_power(x: &[f64], k: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let ph = 2.0 * PI * (k * i) as f64 / n as f64;
        re += (v - mean) * ph.cos();
        im -= (v - mean) * ph.sin();
    }
    re * re + im * im
}

#[test]
fn oscillating_blob_region_versus_still_region() {
    let tex = Frame::from_luma(0, &texture::gaussian_blob(112, 112, 56.0, 56.0, 6.0, 0.5));
    let spec = MotionSpec::translate_sin(0.3, 6.0, 4.0, 30.0).with_frame_size(96, 96);
    let (seq, _) = render_clip(&tex, &spec).unwrap();
    let signals = extract_motion_signal(
        &seq,
        &[
            Region::new("a", 32, 32, 32, 32),
            Region::new("b", 0, 0, 16, 16),
        ],
    )
    .unwrap();
    let a = &signals[0].samples;
    assert_eq!(a.len(), seq.len() - 1);
    assert!(a.iter().all(|v| *v >= 0.0));
    // Bin k is k * fps / n Hz.
    let n = a.len();
    let bin = |f: f64| (f * n as f64 / 30.0).round() as usize;
    let (dominant, _) = (1..n / 2)
        .map(|k| (k, dft_power(a, k)))
        .fold((0, 0.0), |m, (k, p)| if p > m.1 { (k, p) } else { m });
    assert!(
        [bin(6.0), bin(12.0)].contains(&dominant),
        "dominant bin {dominant}"
    );
    let mean_a = a.iter().sum::<f64>() / n as f64;
    assert!(signals[1].samples.iter().all(|v| *v < 1e-9 * mean_a));
}

#[test]
fn magnified_signal_energy_is_at_least_ten_times_raw() {
    let spec = MotionSpec::translate_sin(0.1, 6.0, 4.0, 30.0).with_frame_size(96, 96);
    let (seq, _) = render_clip(&noise_texture(112), &spec).unwrap();
    let mag = magnify(&seq, &MagnificationConfig::new(Mode::Dynamic)).unwrap();
    let raw = extract_motion_signal(&seq, &[]).unwrap()[0].energy();
    let amp = extract_motion_signal(&mag, &[]).unwrap()[0].energy();
    assert!(amp >= 10.0 * raw, "{amp} vs {raw}");
}

fn synthetic_clip(tremor_amp: f64, fps: f64) -> VideoSequence {
    let comps = vec![
        component(0.5, 0.8, 90.0, 0.0, 1e9, "breathing"),
        component(tremor_amp, 6.0, 0.0, 4.0, 10.0, "tremor"),
    ];
    let spec = MotionSpec::composite(comps, 16.0, fps).with_frame_size(48, 48);
    render_clip(&noise_texture(64), &spec).unwrap().0
}

#[test]
fn tremor_episode_on_rendered_clip() {
    let seq = synthetic_clip(0.2, 30.0);
    let d = detect(&seq, &[], &DetectorConfig::default()).unwrap();
    let eps = d.episodes();
    assert_eq!(eps.len(), 1, "{eps:?}");
    assert!((eps[0].start_s - 4.0).abs() <= 4.0 && (eps[0].end_s - 10.0).abs() <= 4.0);
}

#[test]
fn white_noise_has_no_twenty_db_bin() {
    let fps = 30.0;
    let cfg = DetectorConfig::default();
    // 8 windows of 4 s at 50 % overlap span 18 s.
    let len = (18.0 * fps) as usize;
    let trials = 300;
    let mut exceed = 0;
    let normal = Normal::new(0.0, 1.0).unwrap();
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signal = MotionSignal {
            region: "noise".into(),
            samples: (0..len).map(|_| normal.sample(&mut rng)).collect(),
            fps,
        };
        let spectra = power_spectrum(&signal, cfg.window_s, cfg.overlap).unwrap();
        assert_eq!(spectra.len(), 8);
        let avg = average_spectra(&spectra).unwrap();
        let med = median_power(&avg);
        if avg.power.iter().skip(1).any(|p| *p > 100.0 * med) {
            exceed += 1;
        }
    }
    assert!(
        exceed as f64 <= 0.01 * trials as f64,
        "{exceed} of {trials}"
    );
}

// Resampling the same motion at another frame rate keeps every window's flag.
#[test]
fn flags_survive_frame_rate_change() {
    let cfg = DetectorConfig::default();
    let a = detect(&synthetic_clip(0.2, 30.0), &[], &cfg).unwrap();
    let b = detect(&synthetic_clip(0.2, 60.0), &[], &cfg).unwrap();
    let (wa, wb) = (&a.regions[0].windows, &b.regions[0].windows);
    assert_eq!(wa.len(), wb.len());
    for (x, y) in wa.iter().zip(wb) {
        assert_eq!(
            x.flag, y.flag,
            "window at {} s: {} vs {}",
            x.start_s, x.score, y.score
        );
    }
}

fn signal_of(f: impl Fn(f64) -> f64, secs: f64, fps: f64) -> MotionSignal {
    MotionSignal {
        region: "r".into(),
        samples: (0..(secs * fps) as usize)
            .map(|i| f(i as f64 / fps))
            .collect(),
        fps,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scores_are_gain_invariant(c in 1e-3f64..1e3, ft in 4.0f64..10.0, fb in 0.3f64..1.5, mix in 0.0f64..1.0) {
        let s = signal_of(|t| mix * (2.0 * PI * ft * t).sin().abs() + (1.0 - mix) * (2.0 * PI * fb * t).sin().abs(), 16.0, 30.0);
        let cfg = DetectorConfig::default();
        let a = detect_signals(std::slice::from_ref(&s), &cfg).unwrap();
        let b = detect_signals(&[s.scaled(c)], &cfg).unwrap();
        for (x, y) in a.regions[0].windows.iter().zip(&b.regions[0].windows) {
            prop_assert!((x.score - y.score).abs() <= 1e-9);
            prop_assert_eq!(x.flag, y.flag);
        }
    }

    #[test]
    fn scores_lie_in_unit_interval(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let s = MotionSignal {
            region: "r".into(),
            samples: (0..400).map(|_| f64::abs(normal.sample(&mut rng))).collect(),
            fps: 30.0,
        };
        let d = detect_signals(&[s], &DetectorConfig::default()).unwrap();
        for w in &d.regions[0].windows {
            prop_assert!((0.0..=1.0).contains(&w.score));
        }
        for e in d.episodes() {
            prop_assert!(e.end_s > e.start_s && (0.0..=1.0).contains(&e.score));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn larger_tremor_never_lowers_the_score(a in 0.02f64..0.3, k in 1.05f64..3.0) {
        let cfg = DetectorConfig::default();
        let lo = detect(&synthetic_clip(a, 30.0), &[], &cfg).unwrap();
        let hi = detect(&synthetic_clip(a * k, 30.0), &[], &cfg).unwrap();
        for (x, y) in lo.regions[0].windows.iter().zip(&hi.regions[0].windows) {
            // Windows inside the tremor interval [4, 10] s.
            if x.start_s >= 4.0 && x.end_s <= 10.0 {
                prop_assert!(y.score >= x.score - 1e-9, "window {}: {} -> {}", x.start_s, x.score, y.score);
            }
        }
    }
}

// The score is a gain-free ratio, so sensor noise alone on a still scene reads
// as broadband motion. An energy floor above the noise level gates it out
// without touching the tremor episode.
#[test]
fn energy_floor_gates_sensor_noise() {
    let render = |tremor: f64| {
        let comps = vec![component(tremor, 6.0, 0.0, 4.0, 10.0, "tremor")];
        let spec = MotionSpec::composite(comps, 16.0, 30.0)
            .with_noise(0.002, 1)
            .with_frame_size(48, 48);
        render_clip(&noise_texture(64), &spec).unwrap().0
    };
    let (still, tremor) = (render(0.0), render(0.2));
    let open = DetectorConfig::default();
    assert!(!detect(&still, &[], &open).unwrap().episodes().is_empty());
    let per_window = |seq: &VideoSequence| -> f64 {
        let d = detect(seq, &[], &open).unwrap();
        let w = &d.regions[0].windows;
        w.iter().map(|w| w.energies.total()).sum::<f64>() / w.len() as f64
    };
    let noise = per_window(&still);
    let gated = DetectorConfig {
        energy_floor: 20.0 * noise,
        ..DetectorConfig::default()
    };
    assert!(detect(&still, &[], &gated).unwrap().episodes().is_empty());
    assert_eq!(detect(&tremor, &[], &gated).unwrap().episodes().len(), 1);
}
