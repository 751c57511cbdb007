//! Synthetic labelled utterances.
//!
//! Each utterance is a harmonic tone at the emotion's pitch (shifted by the
//! speaker gender's offset), gated into syllable-like bursts and shaped by an
//! envelope, plus uniform noise. Everything is derived from a ChaCha8 stream
//! seeded per file, so a spec and seed always produce the same samples.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{EmotionLabel, Gender};
use crate::corpus::sample_file_name;
use crate::math::{cos, pow, round, sin, PI};

/// Amplitude shape applied inside every burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeShape {
    /// Raised-cosine edges around a flat top.
    Flat,
    /// Swells towards the end of the burst.
    Rising,
    /// Decays from the onset.
    Falling,
}

impl EnvelopeShape {
    /// Gain at position `t` in `[0, 1)` through a burst.
    fn gain(self, t: f64) -> f64 {
        let edge = 0.15;
        let taper = if t < edge {
            0.5 - 0.5 * cos(PI * t / edge)
        } else if t > 1.0 - edge {
            0.5 - 0.5 * cos(PI * (1.0 - t) / edge)
        } else {
            1.0
        };
        let shape = match self {
            Self::Flat => 1.0,
            Self::Rising => 0.35 + 0.65 * t,
            Self::Falling => 1.0 - 0.65 * t,
        };
        taper * shape
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionProfile {
    pub base_pitch_hz: f64,
    pub envelope: EnvelopeShape,
    /// Bursts per second.
    pub burst_rate: f64,
    /// Amplitude ratio between successive harmonics, in `(0, 1)`.
    pub spectral_tilt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// Profiles in canonical emotion order.
    pub profiles: [EmotionProfile; 4],
    /// Pitch offsets for M and F speakers.
    pub gender_offsets_hz: [f64; 2],
    pub genders: Vec<Gender>,
    pub samples_per_cell: usize,
    pub duration_secs: f64,
    pub sample_rate_hz: u32,
    pub noise_amplitude: f64,
    pub seed: u64,
    pub dataset_tag: String,
    /// Distinct speaker ids per gender.
    pub speakers_per_gender: usize,
}

impl Default for SynthSpec {
    /// Four emotions, two genders, 25 utterances per (emotion, gender).
    fn default() -> Self {
        Self {
            profiles: [
                EmotionProfile {
                    base_pitch_hz: 220.0,
                    envelope: EnvelopeShape::Rising,
                    burst_rate: 2.0,
                    spectral_tilt: 0.6,
                },
                EmotionProfile {
                    base_pitch_hz: 150.0,
                    envelope: EnvelopeShape::Falling,
                    burst_rate: 1.0,
                    spectral_tilt: 0.3,
                },
                EmotionProfile {
                    base_pitch_hz: 280.0,
                    envelope: EnvelopeShape::Flat,
                    burst_rate: 3.0,
                    spectral_tilt: 0.8,
                },
                EmotionProfile {
                    base_pitch_hz: 330.0,
                    envelope: EnvelopeShape::Flat,
                    burst_rate: 2.0,
                    spectral_tilt: 0.45,
                },
            ],
            gender_offsets_hz: [-60.0, 40.0],
            genders: alloc::vec![Gender::M, Gender::F],
            samples_per_cell: 25,
            duration_secs: 1.0,
            sample_rate_hz: 16000,
            noise_amplitude: 0.02,
            seed: 7,
            dataset_tag: String::from("SYNTH"),
            speakers_per_gender: 5,
        }
    }
}

impl SynthSpec {
    /// One gender only, `per_emotion` utterances per emotion.
    pub fn single_gender(gender: Gender, per_emotion: usize) -> Self {
        Self {
            genders: alloc::vec![gender],
            samples_per_cell: per_emotion,
            ..Self::default()
        }
    }

    /// Emotions that differ only in pitch, with gender offsets large enough
    /// that one gender's emotion lands on another emotion of the other gender.
    pub fn gender_confounded() -> Self {
        let profile = |pitch: f64| EmotionProfile {
            base_pitch_hz: pitch,
            envelope: EnvelopeShape::Flat,
            burst_rate: 2.0,
            spectral_tilt: 0.5,
        };
        Self {
            profiles: [profile(140.0), profile(180.0), profile(220.0), profile(260.0)],
            gender_offsets_hz: [-20.0, 60.0],
            dataset_tag: String::from("SYNTH-GC"),
            ..Self::default()
        }
    }

    pub fn profile(&self, emotion: EmotionLabel) -> &EmotionProfile {
        &self.profiles[emotion.index()]
    }

    pub fn pitch_hz(&self, emotion: EmotionLabel, gender: Gender) -> f64 {
        let offset = match gender {
            Gender::M => self.gender_offsets_hz[0],
            Gender::F => self.gender_offsets_hz[1],
        };
        self.profile(emotion).base_pitch_hz + offset
    }

    /// Checks counts and that every tone stays inside `[min_hz, max_hz]`.
    pub fn validate(&self, min_hz: f64, max_hz: f64) -> Result<(), SynthError> {
        if self.samples_per_cell == 0 || self.genders.is_empty() || self.speakers_per_gender == 0 {
            return Err(SynthError::InvalidSpec(String::from("counts must be at least 1")));
        }
        if !(self.duration_secs > 0.0) || self.sample_rate_hz < crate::audio::MIN_SAMPLE_RATE_HZ {
            return Err(SynthError::InvalidSpec(String::from(
                "duration must be positive and the rate at least 8 kHz",
            )));
        }
        if !(0.0..0.5).contains(&self.noise_amplitude) {
            return Err(SynthError::InvalidSpec(String::from(
                "noise amplitude must lie in [0, 0.5)",
            )));
        }
        for p in &self.profiles {
            if !(p.burst_rate > 0.0) || !(p.spectral_tilt > 0.0 && p.spectral_tilt < 1.0) {
                return Err(SynthError::InvalidSpec(String::from(
                    "burst rate must be positive and tilt inside (0, 1)",
                )));
            }
        }
        for &g in &self.genders {
            for e in EmotionLabel::ALL {
                let hz = self.pitch_hz(e, g);
                if !(hz >= min_hz && hz <= max_hz) {
                    return Err(SynthError::PitchOutOfRange {
                        emotion: e,
                        gender: g,
                        hz,
                    });
                }
            }
        }
        Ok(())
    }

    /// Every file the spec describes, in generation order
    /// (emotion, then gender, then index).
    pub fn plan(&self) -> Vec<PlannedUtterance> {
        let mut out = Vec::new();
        for emotion in EmotionLabel::ALL {
            for &gender in &self.genders {
                for i in 0..self.samples_per_cell {
                    let g = match gender {
                        Gender::M => 'm',
                        Gender::F => 'f',
                    };
                    let speaker = format!("sy{g}_{:03}", i % self.speakers_per_gender + 1);
                    let file_index = out.len();
                    out.push(PlannedUtterance {
                        file_name: sample_file_name(&speaker, gender, emotion, i + 1),
                        speaker_id: speaker,
                        emotion,
                        gender,
                        seed: self.seed ^ file_index as u64,
                    });
                }
            }
        }
        out
    }

    /// Renders one utterance as samples in `[-1, 1]`.
    pub fn render(&self, utterance: &PlannedUtterance) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(utterance.seed);
        let rate = f64::from(self.sample_rate_hz);
        let n = round(self.duration_secs * rate) as usize;
        let profile = self.profile(utterance.emotion);
        let f0 = self.pitch_hz(utterance.emotion, utterance.gender);

        let harmonics = ((rate / 2.0 / f0) as usize).clamp(1, 8);
        let weights: Vec<f64> = (0..harmonics)
            .map(|h| pow(profile.spectral_tilt, h as f64))
            .collect();
        let norm: f64 = weights.iter().sum();
        let phases: Vec<f64> = (0..harmonics).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();

        let bursts = round(profile.burst_rate * self.duration_secs).max(1.0) as usize;
        let slot = n as f64 / bursts as f64;
        let width = 0.6 * slot;
        let jitter: Vec<f64> = (0..bursts)
            .map(|_| rng.gen_range(-0.05..0.05) * slot)
            .collect();
        let peak = rng.gen_range(0.55..0.85);

        (0..n)
            .map(|i| {
                let t = i as f64 / rate;
                let position = i as f64;
                let k = ((position / slot) as usize).min(bursts - 1);
                let start = k as f64 * slot + 0.2 * slot + jitter[k];
                let u = (position - start) / width;
                let gain = if (0.0..1.0).contains(&u) {
                    profile.envelope.gain(u)
                } else {
                    0.0
                };
                let tone: f64 = weights
                    .iter()
                    .zip(&phases)
                    .enumerate()
                    .map(|(h, (w, p))| w * sin(2.0 * PI * f0 * (h + 1) as f64 * t + p))
                    .sum::<f64>()
                    / norm;
                let noise = if self.noise_amplitude > 0.0 {
                    rng.gen_range(-self.noise_amplitude..self.noise_amplitude)
                } else {
                    0.0
                };
                (peak * gain * tone + noise).clamp(-1.0, 1.0)
            })
            .collect()
    }
}

/// One file of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedUtterance {
    pub file_name: String,
    pub speaker_id: String,
    pub emotion: EmotionLabel,
    pub gender: Gender,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthError {
    InvalidSpec(String),
    PitchOutOfRange {
        emotion: EmotionLabel,
        gender: Gender,
        hz: f64,
    },
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidSpec(why) => write!(f, "invalid synth spec: {why}"),
            Self::PitchOutOfRange { emotion, gender, hz } => write!(
                f,
                "{emotion}/{gender} pitch {hz} Hz falls outside the extractor's pitch range"
            ),
        }
    }
}

impl core::error::Error for SynthError {}
