//! WAV files on disk.

use std::fs;
use std::path::Path;

use ser_core::audio::{decode_wav, encode_wav_pcm16, quantize_pcm16};
use ser_core::AudioSignal;

use crate::error::SerError;

pub fn read_wav(path: &Path) -> Result<AudioSignal, SerError> {
    let bytes = fs::read(path).map_err(|e| SerError::io(path, e))?;
    decode_wav(&bytes)
        .map(|s| s.with_source_path(path.display().to_string()))
        .map_err(|source| SerError::Wav {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes mono samples in `[-1, 1]` as PCM-16.
pub fn write_wav(path: &Path, samples: &[f64], sample_rate_hz: u32) -> Result<(), SerError> {
    let pcm: Vec<i16> = samples.iter().map(|&s| quantize_pcm16(s)).collect();
    fs::write(path, encode_wav_pcm16(&pcm, sample_rate_hz)).map_err(|e| SerError::io(path, e))
}
