use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ser_core::audio::AudioSignal;
use ser_core::classifier::{EmotionLabel, Gender};
use ser_core::dsp::{frame_signal, MagnitudeSpectrum};
use ser_core::features::{
    extract_features, frame_energy, mel_filterbank, mfcc_frame, pitch_track, speech_rate,
    track_stats, CepstralMode, FeatureConfig, FeatureExtractor, MelFilterbank,
};
use ser_core::synth::SynthSpec;
use std::f64::consts::PI;

fn tone(freq: f64, phase: f64, amp: f64, secs: f64) -> AudioSignal {
    let n = (secs * 16000.0) as usize;
    let x = (0..n)
        .map(|i| amp * (2.0 * PI * freq * i as f64 / 16000.0 + phase).sin())
        .collect();
    AudioSignal::new(x, 16000).unwrap()
}

#[test]
fn tones_across_the_pitch_range() {
    let cfg = FeatureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    for _ in 0..50 {
        let f = rng.gen_range(60.0..=380.0);
        let signal = tone(f, rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.2..0.9), 1.0);
        let frames = frame_signal(&signal, cfg.frame_ms, cfg.hop_ms).unwrap();
        let track = pitch_track(&frames, &cfg).unwrap();
        assert!(track.voiced_fraction >= 0.9, "{f} Hz voiced {}", track.voiced_fraction);
        for p in track.voiced() {
            assert!((p - f).abs() <= 3.0, "{f} Hz tracked as {p}");
        }
    }
}

#[test]
fn noise_is_mostly_unvoiced() {
    let cfg = FeatureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let x: Vec<f64> = (0..32000).map(|_| rng.gen_range(-0.1..0.1)).collect();
    let signal = AudioSignal::new(x, 16000).unwrap();
    let frames = frame_signal(&signal, cfg.frame_ms, cfg.hop_ms).unwrap();
    let track = pitch_track(&frames, &cfg).unwrap();
    assert!(track.voiced_fraction < 0.5, "{}", track.voiced_fraction);
}

#[test]
fn scaling_leaves_ratios_alone_and_shifts_only_c0() {
    let spec = SynthSpec::default();
    let cfg = FeatureConfig::default();
    let extractor = FeatureExtractor::new(&cfg, 16000).unwrap();
    let s = 10.0;
    for utterance in spec.plan().iter().step_by(37) {
        let base: Vec<f64> = spec.render(utterance).iter().map(|v| v * 0.09).collect();
        let scaled: Vec<f64> = base.iter().map(|v| v * s).collect();
        let a = AudioSignal::new(base, 16000).unwrap();
        let b = AudioSignal::new(scaled, 16000).unwrap();

        let fa = frame_signal(&a, cfg.frame_ms, cfg.hop_ms).unwrap();
        let fb = frame_signal(&b, cfg.frame_ms, cfg.hop_ms).unwrap();
        let (pa, pb) = (pitch_track(&fa, &cfg).unwrap(), pitch_track(&fb, &cfg).unwrap());
        assert_eq!(pa.voiced_fraction, pb.voiced_fraction);
        for (x, y) in pa.pitch_hz.iter().zip(&pb.pitch_hz) {
            assert!((x - y).abs() <= 1e-9 * x.max(1.0));
        }
        assert_eq!(speech_rate(&fa, &cfg).unwrap(), speech_rate(&fb, &cfg).unwrap());
        for (x, y) in fa.frames().iter().zip(fb.frames()) {
            let (ea, eb) = (frame_energy(x).unwrap(), frame_energy(y).unwrap());
            assert!((eb - s * s * ea).abs() <= 1e-9 * eb.max(1e-300));
        }

        let ca = extractor.cepstra(&a).unwrap();
        let cb = extractor.cepstra(&b).unwrap();
        let shift = (26f64).sqrt() * (s * s).ln();
        for (x, y) in ca.iter().zip(&cb) {
            assert!((y[0] - x[0] - shift).abs() <= 1e-6);
            for k in 1..13 {
                assert!((x[k] - y[k]).abs() < 1e-6, "c{k}: {} vs {}", x[k], y[k]);
            }
        }
    }
}

#[test]
fn constant_spectrum_gives_flat_cepstrum() {
    // all energies at the floor
    let bank = mel_filterbank(1024, 16000, 26, 0.0, 8000.0).unwrap();
    let silent = MagnitudeSpectrum::new(vec![0.0; 513], 1024, 16000);
    let c = mfcc_frame(&silent, &bank, 13, 1e-10).unwrap();
    assert!((c[0] - (26f64).sqrt() * (1e-10f64).ln()).abs() <= 1e-9);
    assert!(c[1..].iter().all(|v| v.abs() < 1e-9));

    // equal-width boxes over a flat spectrum: every filter sees the same energy
    let rows: Vec<Vec<f64>> = (0..26)
        .map(|m| (0..513).map(|k| if k / 19 == m { 1.0 } else { 0.0 }).collect())
        .collect();
    let boxes = MelFilterbank::from_rows(rows);
    let flat = MagnitudeSpectrum::new(vec![0.37; 513], 1024, 16000);
    let c = mfcc_frame(&flat, &boxes, 13, 1e-10).unwrap();
    assert!(c[1..].iter().all(|v| v.abs() < 1e-9), "{c:?}");
}

#[test]
fn adjacent_triangles_sum_to_one() {
    let bank = mel_filterbank(1024, 16000, 26, 0.0, 8000.0).unwrap();
    assert_eq!(bank.n_filters(), 26);
    assert_eq!(bank.n_bins(), 513);
    let rows = bank.rows();
    // between the first and last centers exactly two triangles overlap
    let center = |m: usize| {
        (0..513)
            .max_by(|&a, &b| rows[m][a].total_cmp(&rows[m][b]))
            .unwrap()
    };
    for k in center(0) + 1..center(25) {
        let sum: f64 = rows.iter().map(|r| r[k]).sum();
        assert!((sum - 1.0).abs() <= 0.02, "bin {k}: {sum}");
    }
}

#[test]
fn vector_shapes_and_determinism() {
    let signal = tone(200.0, 0.0, 1.0, 1.0);
    for (mode, len) in [(CepstralMode::Mfcc, 37), (CepstralMode::Lpcc, 35)] {
        let cfg = FeatureConfig::default().with_mode(mode);
        let a = extract_features(&signal, &cfg).unwrap();
        assert_eq!(a.len(), len);
        assert_eq!(a, extract_features(&signal.clone(), &cfg).unwrap());
        assert!(a.values.iter().all(|v| v.is_finite()));
        assert!((a.values[5] - 200.0).abs() <= 0.05);
        assert!(a.values[9].abs() <= 0.05);
        assert_eq!(a.values[10], 1.0);
    }
}

#[test]
fn synthetic_happy_male_sits_at_160hz() {
    let spec = SynthSpec::default();
    let cfg = FeatureConfig::default();
    let picks: Vec<_> = spec
        .plan()
        .into_iter()
        .filter(|u| u.emotion == EmotionLabel::Happy && u.gender == Gender::M)
        .collect();
    assert_eq!(picks.len(), 25);
    for u in picks {
        let x = spec.render(&u);
        let signal = AudioSignal::new(x, spec.sample_rate_hz).unwrap();
        let v = extract_features(&signal, &cfg).unwrap();
        assert!((v.values[5] - 160.0).abs() <= 2.0, "{}: {}", u.file_name, v.values[5]);
    }
}

proptest! {
    #[test]
    fn track_stats_match_two_pass(track in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let s = track_stats(&track).unwrap();
        let n = track.len() as f64;
        let mean = track.iter().sum::<f64>() / n;
        let var = track.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let max = track.iter().cloned().fold(f64::MIN, f64::max);
        let min = track.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!((s.mean - mean).abs() <= 1e-12 * mean.abs().max(1.0));
        prop_assert!((s.std - var.sqrt()).abs() <= 1e-12 * var.sqrt().max(1.0));
        prop_assert_eq!(s.max, max);
        prop_assert_eq!(s.min, min);
        prop_assert!(s.min <= s.mean && s.mean <= s.max && s.range >= 0.0 && s.std >= 0.0);
    }

    #[test]
    fn mfcc_is_always_finite(bins in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1e6], 513)) {
        let bank = mel_filterbank(1024, 16000, 26, 0.0, 8000.0).unwrap();
        let spectrum = MagnitudeSpectrum::new(bins, 1024, 16000);
        let c = mfcc_frame(&spectrum, &bank, 13, 1e-10).unwrap();
        prop_assert_eq!(c.len(), 13);
        prop_assert!(c.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn pitch_values_stay_in_band(seed in any::<u64>(), f in 30.0f64..900.0) {
        let cfg = FeatureConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..4000)
            .map(|i| 0.5 * (2.0 * PI * f * i as f64 / 16000.0).sin() + rng.gen_range(-0.3..0.3))
            .collect();
        let signal = AudioSignal::new(x, 16000).unwrap();
        let frames = frame_signal(&signal, cfg.frame_ms, cfg.hop_ms).unwrap();
        let track = pitch_track(&frames, &cfg).unwrap();
        for p in track.voiced() {
            prop_assert!(p >= cfg.pitch_min_hz && p <= cfg.pitch_max_hz);
        }
        let voiced = track.voiced().count() as f64 / track.pitch_hz.len() as f64;
        prop_assert_eq!(track.voiced_fraction, voiced);
    }
}
