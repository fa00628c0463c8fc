use alloc::vec::Vec;

use crate::corpus::LyricLine;
use crate::{Error, Result};

/// Rate every waveform is brought to before MFCC extraction.
pub const CANONICAL_RATE: u32 = 16_000;

/// Mono audio.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("waveform contains non-finite samples".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn duration_ms(&self) -> u64 {
        self.samples.len() as u64 * 1000 / self.sample_rate as u64
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let ss: f64 = self.samples.iter().map(|&s| s as f64 * s as f64).sum();
        crate::math::sqrt(ss / self.samples.len() as f64)
    }

    fn ms_to_sample(&self, ms: u64) -> usize {
        (ms as u128 * self.sample_rate as u128 / 1000) as usize
    }
}

/// Samples covering `[start_ms, end_ms)` of the line, clipped to the
/// waveform's duration.
pub fn slice_line_audio(song: &Waveform, line: &LyricLine) -> Result<Waveform> {
    let start = song.ms_to_sample(line.start_ms);
    let end = song.ms_to_sample(line.end_ms).min(song.samples.len());
    if start >= song.samples.len() || start >= end {
        return Err(Error::EmptySpan {
            start_ms: line.start_ms,
            end_ms: line.end_ms,
        });
    }
    Ok(Waveform {
        samples: song.samples[start..end].to_vec(),
        sample_rate: song.sample_rate,
    })
}

/// Linear-interpolation resampling.
pub fn resample_linear(wave: &Waveform, rate: u32) -> Waveform {
    if wave.sample_rate == rate || wave.samples.is_empty() {
        return Waveform {
            samples: wave.samples.clone(),
            sample_rate: rate,
        };
    }
    let n_in = wave.samples.len();
    let n_out = (n_in as u128 * rate as u128 / wave.sample_rate as u128) as usize;
    let step = wave.sample_rate as f64 / rate as f64;
    let samples = (0..n_out)
        .map(|i| {
            let t = i as f64 * step;
            let j = t as usize;
            let frac = t - j as f64;
            let a = wave.samples[j] as f64;
            let b = wave.samples[(j + 1).min(n_in - 1)] as f64;
            (a + (b - a) * frac) as f32
        })
        .collect();
    Waveform {
        samples,
        sample_rate: rate,
    }
}
