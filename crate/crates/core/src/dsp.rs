//! Framing, windowing, magnitude spectra and autocorrelation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::audio::AudioSignal;
use crate::math::{cos, round, sin, sqrt, PI};

#[derive(Debug, Clone, PartialEq)]
pub enum DspError {
    SignalTooShort { samples: usize, frame_len: usize },
    BadFraming,
    FrameTooShort(usize),
    BadNfft { nfft: usize, frame_len: usize },
    LagOutOfRange { max_lag: usize, frame_len: usize },
}

impl fmt::Display for DspError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SignalTooShort { samples, frame_len } => write!(
                f,
                "signal too short: {samples} samples, one frame needs {frame_len}"
            ),
            Self::BadFraming => f.write_str("frame and hop must be positive with hop <= frame"),
            Self::FrameTooShort(n) => write!(f, "frame of {n} samples is too short"),
            Self::BadNfft { nfft, frame_len } => write!(
                f,
                "nfft {nfft} must be a power of two no smaller than the frame ({frame_len})"
            ),
            Self::LagOutOfRange { max_lag, frame_len } => {
                write!(f, "lag {max_lag} out of range for a {frame_len}-sample frame")
            }
        }
    }
}

impl core::error::Error for DspError {}

/// Equal-length frames cut from one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Vec<f64>>,
    frame_len: usize,
    hop_len: usize,
    sample_rate_hz: u32,
    source_len: usize,
}

impl FrameSequence {
    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop_len(&self) -> usize {
        self.hop_len
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Sample count of the signal the frames were cut from.
    pub fn source_len(&self) -> usize {
        self.source_len
    }

    /// Duration of the source signal in seconds.
    pub fn source_duration_secs(&self) -> f64 {
        self.source_len as f64 / f64::from(self.sample_rate_hz)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Start index of frame `i` in the source signal.
    pub fn frame_start(&self, i: usize) -> usize {
        i * self.hop_len
    }
}

/// Converts a duration in milliseconds to a whole number of samples.
pub fn ms_to_samples(ms: f64, sample_rate_hz: u32) -> usize {
    let n = round(ms * f64::from(sample_rate_hz) / 1000.0);
    if n.is_finite() && n > 0.0 {
        n as usize
    } else {
        0
    }
}

/// Cuts `signal` into overlapping frames; a trailing partial frame is dropped.
pub fn frame_signal(
    signal: &AudioSignal,
    frame_ms: f64,
    hop_ms: f64,
) -> Result<FrameSequence, DspError> {
    let rate = signal.sample_rate_hz();
    let frame_len = ms_to_samples(frame_ms, rate);
    let hop_len = ms_to_samples(hop_ms, rate);
    if !(hop_ms <= frame_ms) || frame_len == 0 || hop_len == 0 || hop_len > frame_len {
        return Err(DspError::BadFraming);
    }
    let x = signal.samples();
    if x.len() < frame_len {
        return Err(DspError::SignalTooShort {
            samples: x.len(),
            frame_len,
        });
    }
    let count = (x.len() - frame_len) / hop_len + 1;
    let frames = (0..count)
        .map(|i| x[i * hop_len..i * hop_len + frame_len].to_vec())
        .collect();
    Ok(FrameSequence {
        frames,
        frame_len,
        hop_len,
        sample_rate_hz: rate,
        source_len: x.len(),
    })
}

/// Hamming window coefficients `0.54 - 0.46 cos(2 pi n / (N - 1))`.
pub fn hamming_coefficients(len: usize) -> Result<Vec<f64>, DspError> {
    if len < 2 {
        return Err(DspError::FrameTooShort(len));
    }
    let denom = (len - 1) as f64;
    Ok((0..len)
        .map(|n| 0.54 - 0.46 * cos(2.0 * PI * n as f64 / denom))
        .collect())
}

pub fn hamming_window(frame: &[f64]) -> Result<Vec<f64>, DspError> {
    let w = hamming_coefficients(frame.len())?;
    Ok(frame.iter().zip(&w).map(|(x, w)| x * w).collect())
}

/// One-sided magnitude spectrum `|X[k]|`, `k = 0..=nfft/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrum {
    bins: Vec<f64>,
    nfft: usize,
    sample_rate_hz: u32,
}

impl MagnitudeSpectrum {
    pub fn new(bins: Vec<f64>, nfft: usize, sample_rate_hz: u32) -> Self {
        debug_assert_eq!(bins.len(), nfft / 2 + 1);
        Self {
            bins,
            nfft,
            sample_rate_hz,
        }
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn nfft(&self) -> usize {
        self.nfft
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }
}

/// Smallest power of two that holds `frame_len` samples.
pub fn nfft_for(frame_len: usize) -> usize {
    frame_len.max(1).next_power_of_two()
}

/// In-place iterative radix-2 decimation-in-time FFT over split real and
/// imaginary buffers. `re.len()` must be a power of two.
pub fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    debug_assert!(n.is_power_of_two() && im.len() == n);
    if n < 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = -2.0 * PI / len as f64;
        for k in 0..half {
            // direct twiddles keep the error flat in n
            let angle = step * k as f64;
            let (wr, wi) = (cos(angle), sin(angle));
            let mut start = 0;
            while start < n {
                let a = start + k;
                let b = a + half;
                let tr = re[b] * wr - im[b] * wi;
                let ti = re[b] * wi + im[b] * wr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                start += len;
            }
        }
        len <<= 1;
    }
}

/// Zero-pads `frame` to `nfft` and returns the one-sided magnitude spectrum.
pub fn fft_magnitude(
    frame: &[f64],
    nfft: usize,
    sample_rate_hz: u32,
) -> Result<MagnitudeSpectrum, DspError> {
    if !nfft.is_power_of_two() || nfft < frame.len() {
        return Err(DspError::BadNfft {
            nfft,
            frame_len: frame.len(),
        });
    }
    let mut re = vec![0.0; nfft];
    let mut im = vec![0.0; nfft];
    re[..frame.len()].copy_from_slice(frame);
    fft_in_place(&mut re, &mut im);
    let bins = re[..=nfft / 2]
        .iter()
        .zip(&im[..=nfft / 2])
        .map(|(r, i)| sqrt(r * r + i * i))
        .collect();
    Ok(MagnitudeSpectrum::new(bins, nfft, sample_rate_hz))
}

/// Biased, unnormalized autocorrelation `r[t] = sum x[n] x[n + t]`, `t = 0..=max_lag`.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Result<Vec<f64>, DspError> {
    if max_lag >= frame.len() {
        return Err(DspError::LagOutOfRange {
            max_lag,
            frame_len: frame.len(),
        });
    }
    Ok((0..=max_lag)
        .map(|lag| {
            frame[..frame.len() - lag]
                .iter()
                .zip(&frame[lag..])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signal(n: usize, rate: u32) -> AudioSignal {
        AudioSignal::new(vec![0.0; n], rate).unwrap()
    }

    #[test]
    fn framing_counts() {
        let frames = frame_signal(&signal(16000, 16000), 60.0, 30.0).unwrap();
        assert_eq!(frames.frame_len(), 960);
        assert_eq!(frames.hop_len(), 480);
        assert_eq!(frames.len(), 32);
        assert_eq!(frames.frame_start(31) + 960, 15840);

        let one = frame_signal(&signal(960, 16000), 60.0, 30.0).unwrap();
        assert_eq!(one.len(), 1);

        assert_eq!(
            frame_signal(&signal(100, 16000), 60.0, 30.0),
            Err(DspError::SignalTooShort {
                samples: 100,
                frame_len: 960
            })
        );
        assert_eq!(
            frame_signal(&signal(16000, 16000), 30.0, 60.0),
            Err(DspError::BadFraming)
        );
    }

    #[test]
    fn frames_copy_the_right_samples() {
        let x: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let s = AudioSignal::new(x.clone(), 8000).unwrap();
        // 2.5 ms = 20 samples, hop 1.25 ms = 10 samples
        let frames = frame_signal(&s, 2.5, 1.25).unwrap();
        assert_eq!(frames.len(), 9);
        for (i, f) in frames.frames().iter().enumerate() {
            assert_eq!(f.as_slice(), &x[i * 10..i * 10 + 20]);
        }
    }

    #[test]
    fn hamming_examples() {
        let w = hamming_window(&[1.0, 1.0, 1.0]).unwrap();
        assert!((w[0] - 0.08).abs() < 1e-15);
        assert!((w[1] - 1.0).abs() < 1e-15);
        assert!((w[2] - 0.08).abs() < 1e-15);
        assert_eq!(hamming_window(&[0.0; 7]).unwrap(), vec![0.0; 7]);
        assert_eq!(hamming_window(&[1.0]), Err(DspError::FrameTooShort(1)));
        for n in [2usize, 5, 64, 961] {
            let c = hamming_coefficients(n).unwrap();
            for i in 0..n {
                assert!((c[i] - c[n - 1 - i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fft_impulse_and_dc() {
        let s = fft_magnitude(&[1.0, 0.0, 0.0, 0.0], 4, 8000).unwrap();
        assert_eq!(s.bins(), &[1.0, 1.0, 1.0]);
        let s = fft_magnitude(&[1.0, 1.0, 1.0, 1.0], 4, 8000).unwrap();
        assert_eq!(s.bins(), &[4.0, 0.0, 0.0]);
        assert!(matches!(
            fft_magnitude(&[0.0; 5], 4, 8000),
            Err(DspError::BadNfft { .. })
        ));
        assert!(matches!(
            fft_magnitude(&[0.0; 5], 6, 8000),
            Err(DspError::BadNfft { .. })
        ));
        assert_eq!(nfft_for(960), 1024);
        assert_eq!(nfft_for(1024), 1024);
    }

    #[test]
    fn autocorrelation_examples() {
        assert_eq!(autocorrelation(&[1.0; 4], 2).unwrap(), vec![4.0, 3.0, 2.0]);
        assert_eq!(autocorrelation(&[0.0; 8], 3).unwrap(), vec![0.0; 4]);
        assert!(autocorrelation(&[1.0; 4], 4).is_err());
    }

    #[test]
    fn sine_autocorrelation_peaks_at_period() {
        let frame: Vec<f64> = (0..960)
            .map(|n| sin(2.0 * PI * 200.0 * n as f64 / 16000.0))
            .collect();
        let r = autocorrelation(&frame, 320).unwrap();
        let best = (40..=320)
            .max_by(|&a, &b| r[a].partial_cmp(&r[b]).unwrap().then(b.cmp(&a)))
            .unwrap();
        assert_eq!(best, 80);
    }
}
