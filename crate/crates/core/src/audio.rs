//! PCM-16 WAV decoding, encoding and pre-emphasis.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Lowest sample rate the pipeline accepts.
pub const MIN_SAMPLE_RATE_HZ: u32 = 8000;

/// A decoded mono utterance with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate_hz: u32,
    source_path: Option<String>,
}

impl AudioSignal {
    /// Builds a signal, checking the amplitude, rate and non-empty invariants.
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self, WavError> {
        if sample_rate_hz < MIN_SAMPLE_RATE_HZ {
            return Err(WavError::UnsupportedFormat(UnsupportedReason::SampleRate(
                sample_rate_hz,
            )));
        }
        if samples.is_empty() {
            return Err(WavError::EmptySignal);
        }
        if let Some(index) = samples.iter().position(|s| !(s.abs() <= 1.0)) {
            return Err(WavError::SampleOutOfRange { index });
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            source_path: None,
        })
    }

    pub fn with_source_path(mut self, path: impl Into<String>) -> Self {
        self.source_path = Some(path.into());
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn source_path(&self) -> Option<&str> {
        self.source_path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnsupportedReason {
    AudioFormat(u16),
    BitsPerSample(u16),
    Channels(u16),
    SampleRate(u32),
    NotRiffWave,
}

impl fmt::Display for UnsupportedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AudioFormat(code) => write!(f, "audio format code {code} is not PCM (1)"),
            Self::BitsPerSample(bits) => write!(f, "{bits}-bit samples (only 16-bit PCM)"),
            Self::Channels(n) => write!(f, "{n} channels (only mono or stereo)"),
            Self::SampleRate(rate) => {
                write!(f, "sample rate {rate} Hz below {MIN_SAMPLE_RATE_HZ} Hz")
            }
            Self::NotRiffWave => f.write_str("not a RIFF/WAVE container"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WavError {
    UnsupportedFormat(UnsupportedReason),
    CorruptHeader(&'static str),
    EmptySignal,
    SampleOutOfRange { index: usize },
    InvalidAlpha,
}

impl fmt::Display for WavError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnsupportedFormat(reason) => write!(f, "unsupported format: {reason}"),
            Self::CorruptHeader(what) => write!(f, "corrupt header: {what}"),
            Self::EmptySignal => f.write_str("empty signal"),
            Self::SampleOutOfRange { index } => {
                write!(f, "sample {index} is outside [-1, 1] or not finite")
            }
            Self::InvalidAlpha => f.write_str("pre-emphasis alpha must lie in [0, 1)"),
        }
    }
}

impl core::error::Error for WavError {}

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

struct FmtChunk {
    channels: u16,
    sample_rate: u32,
    block_align: u16,
}

fn parse_fmt(body: &[u8]) -> Result<FmtChunk, WavError> {
    if body.len() < 16 {
        return Err(WavError::CorruptHeader("fmt chunk shorter than 16 bytes"));
    }
    let audio_format = u16_at(body, 0);
    let channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let block_align = u16_at(body, 12);
    let bits = u16_at(body, 14);
    if audio_format != 1 {
        return Err(WavError::UnsupportedFormat(UnsupportedReason::AudioFormat(
            audio_format,
        )));
    }
    if bits != 16 {
        return Err(WavError::UnsupportedFormat(UnsupportedReason::BitsPerSample(bits)));
    }
    if channels != 1 && channels != 2 {
        return Err(WavError::UnsupportedFormat(UnsupportedReason::Channels(channels)));
    }
    if sample_rate < MIN_SAMPLE_RATE_HZ {
        return Err(WavError::UnsupportedFormat(UnsupportedReason::SampleRate(
            sample_rate,
        )));
    }
    if block_align != channels * 2 {
        return Err(WavError::CorruptHeader("block align disagrees with channel count"));
    }
    Ok(FmtChunk {
        channels,
        sample_rate,
        block_align,
    })
}

/// Decodes a RIFF/WAVE PCM-16 file held in memory.
///
/// Samples are scaled by 1/32768; stereo is downmixed by the mean of the two
/// channels. Chunks other than `fmt ` and `data` are skipped by size.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioSignal, WavError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::UnsupportedFormat(UnsupportedReason::NotRiffWave));
    }
    let riff_size = u32_at(bytes, 4) as usize;
    if riff_size < 4 || riff_size + 8 > bytes.len() {
        return Err(WavError::CorruptHeader("RIFF size exceeds file length"));
    }
    let end = riff_size + 8;

    let mut fmt_chunk: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut at = 12;
    while at + 8 <= end {
        let id = &bytes[at..at + 4];
        let size = u32_at(bytes, at + 4) as usize;
        let body_start = at + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= end)
            .ok_or(WavError::CorruptHeader("chunk size exceeds RIFF body"))?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => fmt_chunk = Some(parse_fmt(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word aligned
        at = body_end + (size & 1);
    }

    let fmt_chunk = fmt_chunk.ok_or(WavError::CorruptHeader("missing fmt chunk"))?;
    let data = data.ok_or(WavError::CorruptHeader("missing data chunk"))?;
    if data.len() % usize::from(fmt_chunk.block_align) != 0 {
        return Err(WavError::CorruptHeader("data size is not a whole number of frames"));
    }
    if data.is_empty() {
        return Err(WavError::EmptySignal);
    }

    let samples: Vec<f64> = match fmt_chunk.channels {
        1 => data
            .chunks_exact(2)
            .map(|b| f64::from(i16::from_le_bytes([b[0], b[1]])) / 32768.0)
            .collect(),
        _ => data
            .chunks_exact(4)
            .map(|b| {
                let left = f64::from(i16::from_le_bytes([b[0], b[1]]));
                let right = f64::from(i16::from_le_bytes([b[2], b[3]]));
                (left + right) * 0.5 / 32768.0
            })
            .collect(),
    };
    AudioSignal::new(samples, fmt_chunk.sample_rate)
}

/// Quantizes one sample in `[-1, 1]` to PCM-16, clamping out-of-range input.
pub fn quantize_pcm16(sample: f64) -> i16 {
    let scaled = crate::math::round(sample * 32768.0);
    scaled.clamp(-32768.0, 32767.0) as i16
}

/// Encodes mono PCM-16 samples as a canonical 44-byte-header WAV file.
pub fn encode_wav_pcm16(samples: &[i16], sample_rate_hz: u32) -> Vec<u8> {
    encode_wav_pcm16_channels(samples, sample_rate_hz, 1)
}

/// Encodes interleaved PCM-16 samples with the given channel count.
pub fn encode_wav_pcm16_channels(samples: &[i16], sample_rate_hz: u32, channels: u16) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let block_align = channels * 2;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(sample_rate_hz * u32::from(block_align)).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

/// First-order pre-emphasis `y[n] = x[n] - alpha * x[n-1]`, with `y[0] = x[0]`.
pub fn pre_emphasize(signal: &AudioSignal, alpha: f64) -> Result<AudioSignal, WavError> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(WavError::InvalidAlpha);
    }
    let x = signal.samples();
    if x.is_empty() {
        return Err(WavError::EmptySignal);
    }
    let mut y = Vec::with_capacity(x.len());
    y.push(x[0]);
    y.extend(x.windows(2).map(|w| w[1] - alpha * w[0]));
    // The filter can push |y| past 1 (up to 1 + alpha); AudioSignal::new
    // would reject that, so construct directly.
    Ok(AudioSignal {
        samples: y,
        sample_rate_hz: signal.sample_rate_hz,
        source_path: signal.source_path.clone(),
    })
}
