//! Speech emotion recognition core.
//!
//! Everything in this crate is pure computation over in-memory buffers and
//! builds without `std` (it needs `alloc`). File IO, manifests and the command
//! line live in the companion `ser` crate.
//!
//! The pipeline is:
//!
//! 1. [`audio`]: decode PCM-16 WAV bytes into an [`AudioSignal`] and pre-emphasize.
//! 2. [`dsp`]: framing, Hamming window, radix-2 magnitude FFT, autocorrelation.
//! 3. [`features`]: energy, pitch and speech-rate statistics plus MFCC or LPCC
//!    summaries, aggregated into one [`FeatureVector`] per utterance.
//! 4. [`svm`]: binary RBF soft-margin SVM trained by SMO.
//! 5. [`classifier`]: feature scaling and the one-against-all and
//!    gender-dependent multiclass banks; [`model_format`] is their text codec.
//! 6. [`report`]: confusion matrices and the comparison tables.
//!
//! [`corpus`] holds sample metadata, filename parsing and stratified splits;
//! [`synth`] renders the synthetic labelled corpus used for desk-scale checks.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod audio;
pub mod classifier;
pub mod corpus;
pub mod dsp;
pub mod features;
pub mod model_format;
pub mod report;
pub mod svm;
pub mod synth;

mod math;

pub use audio::{AudioSignal, WavError};
pub use classifier::{EmotionLabel, EmotionModel, Gender, Scaler};
pub use features::{CepstralMode, FeatureConfig, FeatureVector};
pub use svm::{BinarySvmModel, SvmParams};
