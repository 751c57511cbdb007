//! Utterance-level prosodic and cepstral features.
//!
//! An utterance becomes one [`FeatureVector`] with a fixed layout:
//!
//! | block    | components                                        |
//! |----------|---------------------------------------------------|
//! | energy   | mean, max, min, range, std of per-frame energy    |
//! | pitch    | mean, max, min, range, std over voiced frames     |
//! | rate     | energy bursts per second                          |
//! | cepstrum | per-coefficient mean, then per-coefficient std    |
//!
//! The cepstral block holds MFCCs (c0 included) or LPCCs depending on
//! [`CepstralMode`]. Prosodic features come from frames of the raw signal;
//! cepstra come from pre-emphasized, Hamming-windowed frames.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::audio::{pre_emphasize, AudioSignal, WavError};
use crate::dsp::{
    autocorrelation, fft_magnitude, frame_signal, hamming_coefficients, nfft_for, DspError,
    FrameSequence, MagnitudeSpectrum,
};
use crate::math::{ceil, cos, floor, log, log10, pow, sqrt, PI};

/// Which cepstral family fills the cepstral block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CepstralMode {
    Mfcc,
    Lpcc,
}

impl CepstralMode {
    pub const ALL: [CepstralMode; 2] = [CepstralMode::Mfcc, CepstralMode::Lpcc];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mfcc => "MFCC",
            Self::Lpcc => "LPCC",
        }
    }

    /// Case-insensitive parse of `MFCC` / `LPCC`.
    pub fn parse(text: &str) -> Option<Self> {
        if text.eq_ignore_ascii_case("mfcc") {
            Some(Self::Mfcc)
        } else if text.eq_ignore_ascii_case("lpcc") {
            Some(Self::Lpcc)
        } else {
            None
        }
    }
}

impl fmt::Display for CepstralMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureError {
    Dsp(DspError),
    Audio(WavError),
    InvalidConfig(&'static str),
    EmptyFrame,
    EmptyTrack,
    BadPitchBand { min_lag: usize, max_lag: usize },
    BadBand { f_low: f64, f_high: f64, nyquist: f64 },
    DimensionMismatch { expected: usize, found: usize },
    DegenerateFrame,
    NumericalBreakdown { order: usize, reflection: f64 },
    NoAnalyzableFrames,
}

impl fmt::Display for FeatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dsp(e) => e.fmt(f),
            Self::Audio(e) => e.fmt(f),
            Self::InvalidConfig(what) => write!(f, "invalid feature config: {what}"),
            Self::EmptyFrame => f.write_str("empty frame"),
            Self::EmptyTrack => f.write_str("empty track"),
            Self::BadPitchBand { min_lag, max_lag } => {
                write!(f, "empty pitch lag band [{min_lag}, {max_lag}]")
            }
            Self::BadBand {
                f_low,
                f_high,
                nyquist,
            } => write!(
                f,
                "bad filterbank band [{f_low}, {f_high}] Hz (nyquist {nyquist} Hz)"
            ),
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::DegenerateFrame => f.write_str("frame energy at or below the floor"),
            Self::NumericalBreakdown { order, reflection } => write!(
                f,
                "Levinson-Durbin breakdown at order {order} (reflection {reflection})"
            ),
            Self::NoAnalyzableFrames => f.write_str("no frame could be analyzed"),
        }
    }
}

impl core::error::Error for FeatureError {}

impl From<DspError> for FeatureError {
    fn from(e: DspError) -> Self {
        Self::Dsp(e)
    }
}

impl From<WavError> for FeatureError {
    fn from(e: WavError) -> Self {
        Self::Audio(e)
    }
}

/// Analysis parameters. Defaults follow common speech-processing practice.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub pre_emphasis: f64,
    pub n_mel_filters: usize,
    pub n_mfcc: usize,
    pub lpc_order: usize,
    pub n_lpcc: usize,
    pub pitch_min_hz: f64,
    pub pitch_max_hz: f64,
    pub voicing_threshold: f64,
    pub energy_floor: f64,
    pub mode: CepstralMode,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            frame_ms: 60.0,
            hop_ms: 30.0,
            pre_emphasis: 0.97,
            n_mel_filters: 26,
            n_mfcc: 13,
            lpc_order: 12,
            n_lpcc: 12,
            pitch_min_hz: 50.0,
            pitch_max_hz: 400.0,
            voicing_threshold: 0.3,
            energy_floor: 1e-10,
            mode: CepstralMode::Mfcc,
        }
    }
}

impl FeatureConfig {
    pub fn with_mode(mut self, mode: CepstralMode) -> Self {
        self.mode = mode;
        self
    }

    /// Checks the rate-independent constraints.
    pub fn validate(&self) -> Result<(), FeatureError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.frame_ms) || !positive(self.hop_ms) || self.hop_ms > self.frame_ms {
            return Err(FeatureError::InvalidConfig("need 0 < hop_ms <= frame_ms"));
        }
        if !(0.0..1.0).contains(&self.pre_emphasis) {
            return Err(FeatureError::InvalidConfig("pre-emphasis must lie in [0, 1)"));
        }
        if self.n_mel_filters == 0 || self.n_mfcc == 0 || self.lpc_order == 0 || self.n_lpcc == 0
        {
            return Err(FeatureError::InvalidConfig("coefficient counts must be positive"));
        }
        if self.n_mfcc > self.n_mel_filters {
            return Err(FeatureError::InvalidConfig("n_mfcc exceeds n_mel_filters"));
        }
        if !positive(self.pitch_min_hz) || !(self.pitch_min_hz < self.pitch_max_hz) {
            return Err(FeatureError::InvalidConfig("need 0 < pitch_min_hz < pitch_max_hz"));
        }
        if !(self.voicing_threshold > 0.0 && self.voicing_threshold <= 1.0) {
            return Err(FeatureError::InvalidConfig("voicing threshold must lie in (0, 1]"));
        }
        if !positive(self.energy_floor) {
            return Err(FeatureError::InvalidConfig("energy floor must be positive"));
        }
        Ok(())
    }

    /// Checks the constraints that depend on the sample rate.
    pub fn validate_for_rate(&self, sample_rate_hz: u32) -> Result<(), FeatureError> {
        self.validate()?;
        if self.pitch_max_hz > f64::from(sample_rate_hz) / 2.0 {
            return Err(FeatureError::InvalidConfig("pitch_max_hz exceeds nyquist"));
        }
        Ok(())
    }

    pub fn n_cepstra(&self) -> usize {
        match self.mode {
            CepstralMode::Mfcc => self.n_mfcc,
            CepstralMode::Lpcc => self.n_lpcc,
        }
    }

    /// Length of the feature vector this config produces.
    pub fn feature_len(&self) -> usize {
        PROSODIC_LEN + 2 * self.n_cepstra()
    }

    /// Canonical one-line description of every field that affects extraction.
    pub fn canonical_text(&self) -> String {
        format!(
            "frame_ms={} hop_ms={} pre_emphasis={} n_mel_filters={} n_mfcc={} lpc_order={} \
             n_lpcc={} pitch_min_hz={} pitch_max_hz={} voicing_threshold={} energy_floor={} mode={}",
            self.frame_ms,
            self.hop_ms,
            self.pre_emphasis,
            self.n_mel_filters,
            self.n_mfcc,
            self.lpc_order,
            self.n_lpcc,
            self.pitch_min_hz,
            self.pitch_max_hz,
            self.voicing_threshold,
            self.energy_floor,
            self.mode
        )
    }
}

/// Number of prosodic components: 5 energy stats, 5 pitch stats, speech rate.
pub const PROSODIC_LEN: usize = 11;

const STAT_NAMES: [&str; 5] = ["mean", "max", "min", "range", "std"];

/// Component names in vector order.
pub fn feature_layout(cfg: &FeatureConfig) -> Vec<String> {
    let mut names = Vec::with_capacity(cfg.feature_len());
    for block in ["energy", "pitch"] {
        names.extend(STAT_NAMES.iter().map(|s| format!("{block}_{s}")));
    }
    names.push(String::from("speech_rate"));
    let prefix = match cfg.mode {
        CepstralMode::Mfcc => "mfcc",
        CepstralMode::Lpcc => "lpcc",
    };
    // MFCC includes c0, LPCC starts at c1
    let first = match cfg.mode {
        CepstralMode::Mfcc => 0,
        CepstralMode::Lpcc => 1,
    };
    for stat in ["mean", "std"] {
        names.extend((0..cfg.n_cepstra()).map(|i| format!("{prefix}_{stat}_{}", i + first)));
    }
    names
}

/// One utterance's feature values tagged with the cepstral mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub mode: CepstralMode,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, mode: CepstralMode) -> Self {
        Self { values, mode }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Summary statistics of a per-frame track.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackStats {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub range: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl TrackStats {
    pub fn to_array(self) -> [f64; 5] {
        [self.mean, self.max, self.min, self.range, self.std]
    }
}

/// Mean, extrema, range and population std of `track`.
pub fn track_stats(track: &[f64]) -> Result<TrackStats, FeatureError> {
    if track.is_empty() {
        return Err(FeatureError::EmptyTrack);
    }
    let n = track.len() as f64;
    let mean = track.iter().sum::<f64>() / n;
    let max = track.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = track.iter().copied().fold(f64::INFINITY, f64::min);
    let var = track.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok(TrackStats {
        // rounding can push the mean of a constant track a hair outside [min, max]
        mean: mean.clamp(min, max),
        max,
        min,
        range: max - min,
        std: sqrt(var),
    })
}

/// Short-time energy `sum x[n]^2`.
pub fn frame_energy(frame: &[f64]) -> Result<f64, FeatureError> {
    if frame.is_empty() {
        return Err(FeatureError::EmptyFrame);
    }
    Ok(frame.iter().map(|x| x * x).sum())
}

/// Per-frame pitch in Hz; `0.0` marks an unvoiced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack {
    pub pitch_hz: Vec<f64>,
    pub voiced_fraction: f64,
}

impl PitchTrack {
    pub fn from_values(pitch_hz: Vec<f64>) -> Self {
        let voiced = pitch_hz.iter().filter(|&&p| p != 0.0).count();
        let voiced_fraction = if pitch_hz.is_empty() {
            0.0
        } else {
            voiced as f64 / pitch_hz.len() as f64
        };
        Self {
            pitch_hz,
            voiced_fraction,
        }
    }

    pub fn voiced(&self) -> impl Iterator<Item = f64> + '_ {
        self.pitch_hz.iter().copied().filter(|&p| p != 0.0)
    }
}

/// Integer lag band `[ceil(rate / f_max), floor(rate / f_min)]`, capped so a
/// neighbour lag exists on both sides for peak refinement.
pub fn pitch_lag_band(
    sample_rate_hz: u32,
    frame_len: usize,
    cfg: &FeatureConfig,
) -> Result<(usize, usize), FeatureError> {
    let rate = f64::from(sample_rate_hz);
    let min_lag = ceil(rate / cfg.pitch_max_hz) as usize;
    let max_lag = (floor(rate / cfg.pitch_min_hz) as usize).min(frame_len.saturating_sub(2));
    if min_lag < 2 || min_lag > max_lag {
        return Err(FeatureError::BadPitchBand { min_lag, max_lag });
    }
    Ok((min_lag, max_lag))
}

/// Pitch of one frame, or `0.0` when unvoiced.
///
/// The peak lag is the integer argmax of the autocorrelation inside the lag
/// band (ties go to the shorter lag). Voicing uses `r[lag] / r[0]`. The
/// reported frequency refines the integer lag with a parabola through the
/// length-normalized autocorrelation at the neighbouring lags, clamped to the
/// configured pitch range.
pub fn frame_pitch(
    frame: &[f64],
    sample_rate_hz: u32,
    band: (usize, usize),
    cfg: &FeatureConfig,
) -> Result<f64, FeatureError> {
    let (min_lag, max_lag) = band;
    let r = autocorrelation(frame, max_lag + 1)?;
    if !(r[0] > cfg.energy_floor) {
        return Ok(0.0);
    }
    let mut best = min_lag;
    for lag in min_lag + 1..=max_lag {
        if r[lag] > r[best] {
            best = lag;
        }
    }
    if r[best] / r[0] < cfg.voicing_threshold {
        return Ok(0.0);
    }
    // Refine on normalized cross-correlation: exactly 1 at an integer period,
    // so a tone whose period is a whole number of samples is not pulled off it.
    let energy: Vec<f64> = frame.iter().map(|v| v * v).collect();
    let ncc = |lag: usize| {
        let head: f64 = energy[..frame.len() - lag].iter().sum();
        let tail: f64 = energy[lag..].iter().sum();
        let denom = sqrt(head * tail);
        if denom > 0.0 {
            r[lag] / denom
        } else {
            0.0
        }
    };
    let (left, mid, right) = (ncc(best - 1), ncc(best), ncc(best + 1));
    let curvature = left - 2.0 * mid + right;
    let shift = if curvature < 0.0 {
        (0.5 * (left - right) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let hz = f64::from(sample_rate_hz) / (best as f64 + shift);
    Ok(hz.clamp(cfg.pitch_min_hz, cfg.pitch_max_hz))
}

/// Autocorrelation pitch track over every frame.
pub fn pitch_track(frames: &FrameSequence, cfg: &FeatureConfig) -> Result<PitchTrack, FeatureError> {
    if frames.is_empty() {
        return Err(FeatureError::EmptyTrack);
    }
    let band = pitch_lag_band(frames.sample_rate_hz(), frames.frame_len(), cfg)?;
    let pitch = frames
        .frames()
        .iter()
        .map(|f| frame_pitch(f, frames.sample_rate_hz(), band, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PitchTrack::from_values(pitch))
}

/// Statistics over voiced frames; all zeros when nothing is voiced.
pub fn pitch_stats(track: &PitchTrack) -> TrackStats {
    let voiced: Vec<f64> = track.voiced().collect();
    track_stats(&voiced).unwrap_or_default()
}

/// Centered moving average; edge positions average the neighbours that exist.
fn centered_moving_average(values: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Fraction of the peak smoothed energy a frame must reach to count as speech.
pub const BURST_THRESHOLD: f64 = 0.3;
/// Width of the centered energy smoother, in frames.
pub const BURST_SMOOTHING_FRAMES: usize = 5;

/// Energy bursts per second.
///
/// Per-frame energies are smoothed by a centered five-frame moving average; a
/// burst is a maximal run of frames at or above 0.3 times the peak smoothed
/// energy. The count is divided by the source signal's duration.
pub fn speech_rate(frames: &FrameSequence, cfg: &FeatureConfig) -> Result<f64, FeatureError> {
    if frames.is_empty() {
        return Err(FeatureError::EmptyTrack);
    }
    let energies = frames
        .frames()
        .iter()
        .map(|f| frame_energy(f))
        .collect::<Result<Vec<_>, _>>()?;
    let smoothed = centered_moving_average(&energies, BURST_SMOOTHING_FRAMES);
    let peak = smoothed.iter().copied().fold(0.0, f64::max);
    if !(peak > cfg.energy_floor) {
        return Ok(0.0);
    }
    let threshold = BURST_THRESHOLD * peak;
    let mut bursts = 0usize;
    let mut inside = false;
    for &e in &smoothed {
        let active = e >= threshold;
        if active && !inside {
            bursts += 1;
        }
        inside = active;
    }
    Ok(bursts as f64 / frames.source_duration_secs())
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * log10(1.0 + hz / 700.0)
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (pow(10.0, mel / 2595.0) - 1.0)
}

/// Triangular mel filters over the bins of an `nfft`-point one-sided spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    rows: Vec<Vec<f64>>,
}

impl MelFilterbank {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_filters(&self) -> usize {
        self.rows.len()
    }

    pub fn n_bins(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

/// Builds `n_filters` unit-peak triangles with centers equally spaced in mel
/// between `f_low` and `f_high`. Edges sit at fractional bin positions, so a
/// row reaches exactly 1 only where a bin falls on its center.
pub fn mel_filterbank(
    nfft: usize,
    sample_rate_hz: u32,
    n_filters: usize,
    f_low: f64,
    f_high: f64,
) -> Result<MelFilterbank, FeatureError> {
    let nyquist = f64::from(sample_rate_hz) / 2.0;
    if !(f_low >= 0.0 && f_low < f_high && f_high <= nyquist) {
        return Err(FeatureError::BadBand {
            f_low,
            f_high,
            nyquist,
        });
    }
    if n_filters == 0 {
        return Err(FeatureError::InvalidConfig("filterbank needs at least one filter"));
    }
    let (mel_low, mel_high) = (hz_to_mel(f_low), hz_to_mel(f_high));
    let step = (mel_high - mel_low) / (n_filters + 1) as f64;
    let bin_per_hz = nfft as f64 / f64::from(sample_rate_hz);
    let points: Vec<f64> = (0..n_filters + 2)
        .map(|i| mel_to_hz(mel_low + step * i as f64) * bin_per_hz)
        .collect();
    let n_bins = nfft / 2 + 1;
    let rows = (0..n_filters)
        .map(|m| {
            let (left, center, right) = (points[m], points[m + 1], points[m + 2]);
            (0..n_bins)
                .map(|k| {
                    let k = k as f64;
                    if k <= left || k >= right {
                        0.0
                    } else if k <= center {
                        (k - left) / (center - left)
                    } else {
                        (right - k) / (right - center)
                    }
                })
                .collect()
        })
        .collect();
    Ok(MelFilterbank { rows })
}

/// Orthonormal DCT-II, first `n_out` coefficients.
pub fn dct2_orthonormal(input: &[f64], n_out: usize) -> Vec<f64> {
    let m = input.len() as f64;
    (0..n_out)
        .map(|k| {
            let scale = if k == 0 { sqrt(1.0 / m) } else { sqrt(2.0 / m) };
            let sum: f64 = input
                .iter()
                .enumerate()
                .map(|(i, x)| x * cos(PI * k as f64 * (i as f64 + 0.5) / m))
                .sum();
            scale * sum
        })
        .collect()
}

/// MFCCs of one magnitude spectrum: floored log mel power, then DCT-II.
pub fn mfcc_frame(
    spectrum: &MagnitudeSpectrum,
    filterbank: &MelFilterbank,
    n_ceps: usize,
    energy_floor: f64,
) -> Result<Vec<f64>, FeatureError> {
    let bins = spectrum.bins();
    if filterbank.n_bins() != bins.len() {
        return Err(FeatureError::DimensionMismatch {
            expected: filterbank.n_bins(),
            found: bins.len(),
        });
    }
    if n_ceps > filterbank.n_filters() {
        return Err(FeatureError::DimensionMismatch {
            expected: filterbank.n_filters(),
            found: n_ceps,
        });
    }
    let log_energies: Vec<f64> = filterbank
        .rows()
        .iter()
        .map(|row| {
            let e: f64 = row.iter().zip(bins).map(|(h, b)| h * b * b).sum();
            log(e.max(energy_floor))
        })
        .collect();
    Ok(dct2_orthonormal(&log_energies, n_ceps))
}

/// Linear predictor `x[n] ~ sum_k a[k] x[n-k]` and its final error energy.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcResult {
    pub coefficients: Vec<f64>,
    pub residual_energy: f64,
}

/// Levinson-Durbin recursion on autocorrelation `r[0..=order]`.
pub fn levinson_durbin(r: &[f64], order: usize, energy_floor: f64) -> Result<LpcResult, FeatureError> {
    if r.len() <= order {
        return Err(FeatureError::DimensionMismatch {
            expected: order + 1,
            found: r.len(),
        });
    }
    if !(r[0] > energy_floor) {
        return Err(FeatureError::DegenerateFrame);
    }
    let mut a = vec![0.0; order];
    let mut prev = vec![0.0; order];
    let mut error = r[0];
    for i in 1..=order {
        let acc = r[i] - (1..i).map(|j| a[j - 1] * r[i - j]).sum::<f64>();
        let k = acc / error;
        if !(k.abs() < 1.0) {
            return Err(FeatureError::NumericalBreakdown {
                order: i,
                reflection: k,
            });
        }
        prev[..i - 1].copy_from_slice(&a[..i - 1]);
        a[i - 1] = k;
        for j in 1..i {
            a[j - 1] = prev[j - 1] - k * prev[i - j - 1];
        }
        error *= 1.0 - k * k;
    }
    Ok(LpcResult {
        coefficients: a,
        residual_energy: error,
    })
}

/// LPC analysis of one frame via its autocorrelation.
pub fn lpc_levinson(frame: &[f64], order: usize, energy_floor: f64) -> Result<LpcResult, FeatureError> {
    let r = autocorrelation(frame, order)?;
    levinson_durbin(&r, order, energy_floor)
}

/// Cepstrum of the all-pole model:
/// `c[n] = a[n] + sum_{k=1}^{n-1} (k/n) c[k] a[n-k]`, with `a[n] = 0` past the order.
pub fn lpcc_from_lpc(a: &[f64], n_ceps: usize) -> Vec<f64> {
    let coef = |n: usize| if n >= 1 && n <= a.len() { a[n - 1] } else { 0.0 };
    let mut c: Vec<f64> = Vec::with_capacity(n_ceps);
    for n in 1..=n_ceps {
        let tail: f64 = (1..n)
            .map(|k| (k as f64 / n as f64) * c[k - 1] * coef(n - k))
            .sum();
        c.push(coef(n) + tail);
    }
    c
}

/// Reusable per-sample-rate analysis state (window and filterbank).
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    cfg: FeatureConfig,
    sample_rate_hz: u32,
    frame_len: usize,
    nfft: usize,
    window: Vec<f64>,
    filterbank: Option<MelFilterbank>,
}

impl FeatureExtractor {
    pub fn new(cfg: &FeatureConfig, sample_rate_hz: u32) -> Result<Self, FeatureError> {
        cfg.validate_for_rate(sample_rate_hz)?;
        let frame_len = crate::dsp::ms_to_samples(cfg.frame_ms, sample_rate_hz);
        let window = hamming_coefficients(frame_len)?;
        let nfft = nfft_for(frame_len);
        let filterbank = match cfg.mode {
            CepstralMode::Mfcc => Some(mel_filterbank(
                nfft,
                sample_rate_hz,
                cfg.n_mel_filters,
                0.0,
                f64::from(sample_rate_hz) / 2.0,
            )?),
            CepstralMode::Lpcc => None,
        };
        Ok(Self {
            cfg: cfg.clone(),
            sample_rate_hz,
            frame_len,
            nfft,
            window,
            filterbank,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.cfg
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn nfft(&self) -> usize {
        self.nfft
    }

    fn windowed(&self, frame: &[f64]) -> Vec<f64> {
        frame.iter().zip(&self.window).map(|(x, w)| x * w).collect()
    }

    /// Per-frame cepstra of the pre-emphasized signal; LPCC frames whose LPC
    /// analysis fails are skipped.
    pub fn cepstra(&self, signal: &AudioSignal) -> Result<Vec<Vec<f64>>, FeatureError> {
        let emphasized = pre_emphasize(signal, self.cfg.pre_emphasis)?;
        let frames = frame_signal(&emphasized, self.cfg.frame_ms, self.cfg.hop_ms)?;
        let mut out = Vec::with_capacity(frames.len());
        for frame in frames.frames() {
            let windowed = self.windowed(frame);
            match &self.filterbank {
                Some(bank) => {
                    let spectrum = fft_magnitude(&windowed, self.nfft, self.sample_rate_hz)?;
                    out.push(mfcc_frame(
                        &spectrum,
                        bank,
                        self.cfg.n_mfcc,
                        self.cfg.energy_floor,
                    )?);
                }
                None => match lpc_levinson(&windowed, self.cfg.lpc_order, self.cfg.energy_floor) {
                    Ok(lpc) => out.push(lpcc_from_lpc(&lpc.coefficients, self.cfg.n_lpcc)),
                    Err(FeatureError::DegenerateFrame | FeatureError::NumericalBreakdown { .. }) => {}
                    Err(e) => return Err(e),
                },
            }
        }
        if out.is_empty() {
            return Err(FeatureError::NoAnalyzableFrames);
        }
        Ok(out)
    }

    pub fn extract(&self, signal: &AudioSignal) -> Result<FeatureVector, FeatureError> {
        if signal.sample_rate_hz() != self.sample_rate_hz {
            return FeatureExtractor::new(&self.cfg, signal.sample_rate_hz())?.extract(signal);
        }
        let frames = frame_signal(signal, self.cfg.frame_ms, self.cfg.hop_ms)?;
        debug_assert_eq!(frames.frame_len(), self.frame_len);

        let mut values = Vec::with_capacity(self.cfg.feature_len());
        let energies = frames
            .frames()
            .iter()
            .map(|f| frame_energy(f))
            .collect::<Result<Vec<_>, _>>()?;
        values.extend(track_stats(&energies)?.to_array());
        values.extend(pitch_stats(&pitch_track(&frames, &self.cfg)?).to_array());
        values.push(speech_rate(&frames, &self.cfg)?);

        let cepstra = self.cepstra(signal)?;
        let n = self.cfg.n_cepstra();
        let count = cepstra.len() as f64;
        let means: Vec<f64> = (0..n)
            .map(|i| cepstra.iter().map(|c| c[i]).sum::<f64>() / count)
            .collect();
        let stds = (0..n).map(|i| {
            let var = cepstra
                .iter()
                .map(|c| (c[i] - means[i]) * (c[i] - means[i]))
                .sum::<f64>()
                / count;
            sqrt(var)
        });
        values.extend(means.iter().copied());
        values.extend(stds);

        debug_assert!(values.iter().all(|v| v.is_finite()));
        Ok(FeatureVector::new(values, self.cfg.mode))
    }
}

/// One-shot extraction; build a [`FeatureExtractor`] to reuse the filterbank.
pub fn extract_features(
    signal: &AudioSignal,
    cfg: &FeatureConfig,
) -> Result<FeatureVector, FeatureError> {
    FeatureExtractor::new(cfg, signal.sample_rate_hz())?.extract(signal)
}
