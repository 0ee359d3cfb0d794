//! F0 contour extraction and the intonation-preservation metric.
//!
//! The extractor is the classic short-term autocorrelation method: each
//! Hann-windowed frame's autocorrelation is normalized by the window's own
//! autocorrelation, lag candidates inside the pitch band are scored by
//! their (parabolically interpolated) correlation strength minus an octave
//! cost, and the best candidate per frame wins. No cross-frame path search
//! is performed; the correlation metric downstream needs contour shape,
//! not studio-grade smoothness.

use crate::metrics::{pearson, PearsonError};
use thiserror::Error;

/// Mono audio at a fixed sample rate, samples nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Framewise F0 value: a frequency in Hz or an unvoiced decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    Voiced(f64),
    Unvoiced,
}

impl Frame {
    pub fn f0(&self) -> Option<f64> {
        match self {
            Frame::Voiced(f) => Some(*f),
            Frame::Unvoiced => None,
        }
    }
}

/// Framewise fundamental-frequency track.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Contour {
    pub frame_hop: f64,
    pub values: Vec<Frame>,
}

impl F0Contour {
    /// The voiced frames only, in order.
    pub fn voiced(&self) -> Vec<f64> {
        self.values.iter().filter_map(Frame::f0).collect()
    }
}

/// Parameters of the autocorrelation extractor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchConfig {
    pub pitch_floor: f64,
    pub pitch_ceiling: f64,
    /// Seconds between successive analysis frames.
    pub frame_hop: f64,
    pub voicing_threshold: f64,
    /// Frames whose local absolute peak falls below this fraction of the
    /// global peak are unvoiced.
    pub silence_threshold: f64,
    pub octave_cost: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            pitch_floor: 75.0,
            pitch_ceiling: 600.0,
            frame_hop: 0.01,
            voicing_threshold: 0.45,
            silence_threshold: 0.03,
            octave_cost: 0.01,
        }
    }
}

impl PitchConfig {
    /// Analysis window length in seconds: three periods of the pitch floor.
    pub fn window_secs(&self) -> f64 {
        3.0 / self.pitch_floor
    }

    fn validate(&self, sample_rate: u32) -> Result<(), PitchError> {
        let nyq4 = sample_rate as f64 / 4.0;
        if !(self.pitch_floor > 0.0 && self.pitch_floor < self.pitch_ceiling) {
            return Err(PitchError::InvalidConfig("pitch band is empty"));
        }
        if self.pitch_ceiling > nyq4 {
            return Err(PitchError::InvalidConfig("pitch ceiling above sample_rate/4"));
        }
        if self.frame_hop <= 0.0 {
            return Err(PitchError::InvalidConfig("frame_hop must be positive"));
        }
        for t in [self.voicing_threshold, self.silence_threshold] {
            if !(t > 0.0 && t < 1.0) {
                return Err(PitchError::InvalidConfig("thresholds must be in (0,1)"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PitchError {
    #[error("audio too short: {got} samples, need at least {need}")]
    TooShort { got: usize, need: usize },
    #[error("invalid pitch config: {0}")]
    InvalidConfig(&'static str),
    #[error("sample rate {0} below 8000 Hz")]
    SampleRateTooLow(u32),
}

#[derive(Debug, Error, PartialEq)]
pub enum CorrelationError {
    #[error("undefined pitch correlation: {0}")]
    Undefined(&'static str),
    #[error(transparent)]
    Pitch(#[from] PitchError),
    #[error("no pair with a defined pitch correlation")]
    NoValidPairs,
}

/// Extracts the F0 contour of `audio`.
pub fn extract_f0(audio: &AudioBuffer, config: &PitchConfig) -> Result<F0Contour, PitchError> {
    if audio.sample_rate < 8000 {
        return Err(PitchError::SampleRateTooLow(audio.sample_rate));
    }
    config.validate(audio.sample_rate)?;
    let sr = audio.sample_rate as f64;
    let win = (config.window_secs() * sr).round() as usize;
    if audio.samples.len() < win {
        return Err(PitchError::TooShort {
            got: audio.samples.len(),
            need: win,
        });
    }
    let hop = (config.frame_hop * sr).round().max(1.0) as usize;
    let min_lag = (sr / config.pitch_ceiling).ceil() as usize;
    let max_lag = ((sr / config.pitch_floor).floor() as usize).min(win - 1);

    let window: Vec<f64> = hann(win);
    let window_acf = autocorrelation(&window, max_lag);

    let global_peak = audio
        .samples
        .iter()
        .fold(0.0f64, |acc, s| acc.max(s.abs()));

    let n_frames = (audio.samples.len() - win) / hop + 1;
    let mut values = Vec::with_capacity(n_frames);
    let mut frame = vec![0.0f64; win];
    for k in 0..n_frames {
        let start = k * hop;
        let chunk = &audio.samples[start..start + win];
        let local_peak = chunk.iter().fold(0.0f64, |acc, s| acc.max(s.abs()));
        if global_peak == 0.0 || local_peak < config.silence_threshold * global_peak {
            values.push(Frame::Unvoiced);
            continue;
        }
        let mean = chunk.iter().sum::<f64>() / win as f64;
        for (dst, (&s, &w)) in frame.iter_mut().zip(chunk.iter().zip(&window)) {
            *dst = (s - mean) * w;
        }
        let acf = autocorrelation(&frame, max_lag);
        if acf[0] <= 0.0 {
            values.push(Frame::Unvoiced);
            continue;
        }
        // window-normalized autocorrelation
        let norm: Vec<f64> = acf
            .iter()
            .zip(&window_acf)
            .map(|(&a, &w)| (a / acf[0]) / (w / window_acf[0]))
            .collect();
        values.push(best_candidate(&norm, min_lag, max_lag, sr, config));
    }
    Ok(F0Contour {
        frame_hop: hop as f64 / sr,
        values,
    })
}

fn hann(len: usize) -> Vec<f64> {
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / denom).cos())
        .collect()
}

fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|lag| x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum())
        .collect()
}

/// Picks the strongest lag candidate in the pitch band, penalizing low
/// frequencies by octave_cost * log2(pitch_floor * lag_seconds).
fn best_candidate(
    norm: &[f64],
    min_lag: usize,
    max_lag: usize,
    sr: f64,
    config: &PitchConfig,
) -> Frame {
    let mut best: Option<(f64, f64)> = None; // (penalized strength, lag in samples)
    let mut best_raw = 0.0f64;
    for lag in min_lag.max(2)..max_lag {
        if norm[lag] > norm[lag - 1] && norm[lag] >= norm[lag + 1] {
            let (dl, strength) = parabolic_peak(norm[lag - 1], norm[lag], norm[lag + 1]);
            let lag_f = lag as f64 + dl;
            let penalized =
                strength - config.octave_cost * (config.pitch_floor * lag_f / sr).log2();
            if best.map(|(s, _)| penalized > s).unwrap_or(true) {
                best = Some((penalized, lag_f));
                best_raw = strength;
            }
        }
    }
    match best {
        Some((_, lag_f)) if best_raw >= config.voicing_threshold => {
            let f0 = (sr / lag_f).clamp(config.pitch_floor, config.pitch_ceiling);
            Frame::Voiced(f0)
        }
        _ => Frame::Unvoiced,
    }
}

/// Vertex offset and height of the parabola through three equally spaced
/// samples; offset is clamped to half a sample.
fn parabolic_peak(left: f64, mid: f64, right: f64) -> (f64, f64) {
    let denom = left - 2.0 * mid + right;
    if denom.abs() < 1e-15 {
        return (0.0, mid);
    }
    let d = (0.5 * (left - right) / denom).clamp(-0.5, 0.5);
    let height = mid - 0.25 * (left - right) * d;
    (d, height)
}

/// Pearson correlation of the voiced parts of two contours.
///
/// Each contour is reduced to its voiced subsequence; the longer one is
/// linearly resampled to the length of the shorter before correlating.
pub fn pitch_correlation(original: &F0Contour, anonymized: &F0Contour) -> Result<f64, CorrelationError> {
    let a = original.voiced();
    let b = anonymized.voiced();
    if a.len() < 2 || b.len() < 2 {
        return Err(CorrelationError::Undefined(
            "fewer than 2 voiced frames in a contour",
        ));
    }
    let (short, long) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    let resampled = resample_linear(long, short.len());
    match pearson(short, &resampled) {
        Ok(r) => Ok(r),
        Err(PearsonError::DegenerateInput) => Err(CorrelationError::Undefined(
            "constant voiced sequence after alignment",
        )),
        Err(_) => Err(CorrelationError::Undefined("alignment failed")),
    }
}

fn resample_linear(x: &[f64], target_len: usize) -> Vec<f64> {
    if x.len() == target_len {
        return x.to_vec();
    }
    let scale = (x.len() - 1) as f64 / (target_len - 1) as f64;
    (0..target_len)
        .map(|j| {
            let pos = j as f64 * scale;
            let i = (pos.floor() as usize).min(x.len() - 2);
            let frac = pos - i as f64;
            x[i] * (1.0 - frac) + x[i + 1] * frac
        })
        .collect()
}

/// Mean pitch correlation over aligned (original, anonymized) audio pairs.
///
/// Pairs whose correlation is undefined (too few voiced frames, constant
/// contour) are counted and excluded from the mean rather than silently
/// dropped.
pub fn corpus_pitch_correlation(
    pairs: &[(AudioBuffer, AudioBuffer)],
    config: &PitchConfig,
) -> Result<(f64, usize), CorrelationError> {
    let mut sum = 0.0;
    let mut defined = 0usize;
    let mut undefined = 0usize;
    for (orig, anon) in pairs {
        let c_orig = extract_f0(orig, config)?;
        let c_anon = extract_f0(anon, config)?;
        match pitch_correlation(&c_orig, &c_anon) {
            Ok(r) => {
                sum += r;
                defined += 1;
            }
            Err(CorrelationError::Undefined(_)) => undefined += 1,
            Err(e) => return Err(e),
        }
    }
    if defined == 0 {
        return Err(CorrelationError::NoValidPairs);
    }
    Ok((sum / defined as f64, undefined))
}
