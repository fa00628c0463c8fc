//! MFCC pipeline: pre-emphasis, Hamming-windowed frames, power spectrum,
//! triangular mel filterbank, log with floor, orthonormal DCT-II.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::fft::{Complex, FftPlan};
use super::Waveform;
use crate::{math, Error, Result};

pub const MFCC_COEFFS: usize = 13;
/// Frame count every line's MFCC matrix is pruned or padded to.
pub const TARGET_FRAMES: usize = 1280;

#[derive(Debug, Clone, PartialEq)]
pub struct MfccConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub pre_emphasis: f64,
    pub n_fft: usize,
    pub n_mels: usize,
    pub fmin: f64,
    /// `None` means Nyquist.
    pub fmax: Option<f64>,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            frame_ms: 25.0,
            hop_ms: 10.0,
            pre_emphasis: 0.97,
            n_fft: 512,
            n_mels: 26,
            fmin: 0.0,
            fmax: None,
            log_floor: 1e-10,
        }
    }
}

impl MfccConfig {
    pub fn frame_len(&self, sample_rate: u32) -> usize {
        math::round(self.frame_ms * sample_rate as f64 / 1000.0) as usize
    }

    pub fn hop_len(&self, sample_rate: u32) -> usize {
        math::round(self.hop_ms * sample_rate as f64 / 1000.0) as usize
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        if self.n_mels < MFCC_COEFFS {
            return Err(Error::Config(format!("n_mels {} < {MFCC_COEFFS}", self.n_mels)));
        }
        if !(self.frame_ms > self.hop_ms && self.hop_ms > 0.0) {
            return Err(Error::Config("need frame_ms > hop_ms > 0".into()));
        }
        if !self.n_fft.is_power_of_two() {
            return Err(Error::Config(format!("n_fft {} is not a power of two", self.n_fft)));
        }
        if self.frame_len(sample_rate) > self.n_fft {
            return Err(Error::Config(format!(
                "frame of {} samples exceeds n_fft {}",
                self.frame_len(sample_rate),
                self.n_fft
            )));
        }
        if self.hop_len(sample_rate) == 0 {
            return Err(Error::Config("hop rounds to zero samples".into()));
        }
        let fmax = self.fmax.unwrap_or(sample_rate as f64 / 2.0);
        if !(self.fmin >= 0.0 && fmax > self.fmin && fmax <= sample_rate as f64 / 2.0) {
            return Err(Error::Config(format!("bad mel range [{}, {fmax}]", self.fmin)));
        }
        if !(self.log_floor > 0.0) {
            return Err(Error::Config("log floor must be positive".into()));
        }
        Ok(())
    }
}

/// `frames x 13` coefficient matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MfccMatrix {
    frames: usize,
    data: Vec<f64>,
}

impl MfccMatrix {
    pub fn zeros(frames: usize) -> Self {
        Self {
            frames,
            data: vec![0.0; frames * MFCC_COEFFS],
        }
    }

    pub fn from_rows(data: Vec<f64>) -> Result<Self> {
        if !data.len().is_multiple_of(MFCC_COEFFS) {
            return Err(Error::Shape(format!(
                "{} values is not a multiple of {MFCC_COEFFS}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite MFCC value".into()));
        }
        Ok(Self {
            frames: data.len() / MFCC_COEFFS,
            data,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * MFCC_COEFFS..(i + 1) * MFCC_COEFFS]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * math::log10(1.0 + hz / 700.0)
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (math::powf(10.0, mel / 2595.0) - 1.0)
}

/// Symmetric Hamming window.
pub fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * math::cos(2.0 * PI * i as f64 / (n - 1) as f64))
        .collect()
}

/// Triangular filters on FFT bins, `n_mels x (n_fft/2 + 1)`.
pub fn mel_filterbank(config: &MfccConfig, sample_rate: u32) -> Vec<Vec<f64>> {
    let n_bins = config.n_fft / 2 + 1;
    let fmax = config.fmax.unwrap_or(sample_rate as f64 / 2.0);
    let lo = hz_to_mel(config.fmin);
    let hi = hz_to_mel(fmax);
    let m = config.n_mels;
    let bins: Vec<usize> = (0..m + 2)
        .map(|i| {
            let mel = lo + (hi - lo) * i as f64 / (m + 1) as f64;
            math::floor((config.n_fft + 1) as f64 * mel_to_hz(mel) / sample_rate as f64) as usize
        })
        .collect();
    (0..m)
        .map(|j| {
            let mut f = vec![0.0; n_bins];
            let (a, b, c) = (bins[j], bins[j + 1], bins[j + 2]);
            for (k, w) in f.iter_mut().enumerate().take(c.min(n_bins - 1) + 1) {
                if k >= a && k < b {
                    *w = (k - a) as f64 / (b - a) as f64;
                } else if k >= b && k < c {
                    *w = (c - k) as f64 / (c - b) as f64;
                }
            }
            f
        })
        .collect()
}

/// Orthonormal DCT-II of `x`, first `keep` coefficients.
pub fn dct_ii_ortho(x: &[f64], keep: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (0..keep)
        .map(|k| {
            let scale = if k == 0 {
                math::sqrt(1.0 / n)
            } else {
                math::sqrt(2.0 / n)
            };
            scale
                * x.iter()
                    .enumerate()
                    .map(|(i, v)| v * math::cos(PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)))
                    .sum::<f64>()
        })
        .collect()
}

fn frame_count(len: usize, frame: usize, hop: usize) -> usize {
    1 + (len - frame) / hop
}

/// Per-frame log mel energies, `frames x n_mels`.
pub fn log_mel_energies(wave: &Waveform, config: &MfccConfig) -> Result<Vec<Vec<f64>>> {
    let sr = wave.sample_rate;
    config.validate(sr)?;
    let frame = config.frame_len(sr);
    let hop = config.hop_len(sr);
    let len = wave.samples.len();
    if len < frame {
        return Err(Error::TooShort {
            samples: len,
            needed: frame,
        });
    }
    let mut emph = Vec::with_capacity(len);
    let mut prev = 0.0;
    for &s in &wave.samples {
        let s = s as f64;
        emph.push(s - config.pre_emphasis * prev);
        prev = s;
    }
    let window = hamming(frame);
    let bank = mel_filterbank(config, sr);
    let plan = FftPlan::new(config.n_fft);
    let n_bins = config.n_fft / 2 + 1;
    let mut buf = vec![Complex::default(); config.n_fft];
    let mut power = vec![0.0; n_bins];
    let frames = frame_count(len, frame, hop);
    let mut out = Vec::with_capacity(frames);
    for t in 0..frames {
        let start = t * hop;
        for (i, c) in buf.iter_mut().enumerate() {
            *c = if i < frame {
                Complex::new(emph[start + i] * window[i], 0.0)
            } else {
                Complex::default()
            };
        }
        plan.forward(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p = c.norm_sqr() / config.n_fft as f64;
        }
        out.push(
            bank.iter()
                .map(|f| {
                    let e: f64 = f.iter().zip(&power).map(|(w, p)| w * p).sum();
                    math::ln(e.max(config.log_floor))
                })
                .collect(),
        );
    }
    Ok(out)
}

/// 13 cepstral coefficients per frame; `1 + (len - frame) / hop` frames.
pub fn compute_mfcc(wave: &Waveform, config: &MfccConfig) -> Result<MfccMatrix> {
    let mels = log_mel_energies(wave, config)?;
    let mut data = Vec::with_capacity(mels.len() * MFCC_COEFFS);
    for frame in &mels {
        data.extend(dct_ii_ortho(frame, MFCC_COEFFS));
    }
    MfccMatrix::from_rows(data)
}

/// Truncate at the end or zero-pad at the end to exactly `target` frames.
pub fn fit_frames(mfcc: &MfccMatrix, target: usize) -> MfccMatrix {
    let keep = mfcc.frames.min(target);
    let mut data = vec![0.0; target * MFCC_COEFFS];
    data[..keep * MFCC_COEFFS].copy_from_slice(&mfcc.data[..keep * MFCC_COEFFS]);
    MfccMatrix {
        frames: target,
        data,
    }
}
