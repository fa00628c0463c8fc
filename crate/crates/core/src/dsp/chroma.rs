//! Chroma-template chord estimation for corpora without chord annotations.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::fft::{Complex, FftPlan};
use super::{ChordSequence, ChordSymbol, Waveform};
use crate::{math, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ChromaConfig {
    pub hop_ms: f64,
    /// Frequencies outside `[min_hz, max_hz]` are ignored when folding.
    pub min_hz: f64,
    pub max_hz: f64,
    /// Hops whose chroma norm falls below this are skipped.
    pub silence_norm: f64,
}

impl Default for ChromaConfig {
    fn default() -> Self {
        Self {
            hop_ms: 250.0,
            min_hz: 50.0,
            max_hz: 5000.0,
            silence_norm: 1e-9,
        }
    }
}

fn pitch_class(hz: f64) -> usize {
    // A4 = 440 Hz is pitch class 9.
    let semis = math::round(12.0 * math::log2(hz / 440.0)) as i64 + 9;
    semis.rem_euclid(12) as usize
}

/// 12-bin chroma of one block: Hann-windowed FFT magnitudes folded into
/// pitch classes.
pub fn chroma_vector(block: &[f64], sample_rate: u32, config: &ChromaConfig) -> [f64; 12] {
    let n = block.len().next_power_of_two().max(2);
    let mut buf = vec![Complex::default(); n];
    let len = block.len();
    for (i, &x) in block.iter().enumerate() {
        let w = if len > 1 {
            0.5 - 0.5 * math::cos(2.0 * PI * i as f64 / (len - 1) as f64)
        } else {
            1.0
        };
        buf[i] = Complex::new(x * w, 0.0);
    }
    FftPlan::new(n).forward(&mut buf);
    let mut chroma = [0.0; 12];
    for (k, c) in buf.iter().enumerate().take(n / 2 + 1).skip(1) {
        let hz = k as f64 * sample_rate as f64 / n as f64;
        if hz < config.min_hz || hz > config.max_hz {
            continue;
        }
        chroma[pitch_class(hz)] += math::sqrt(c.norm_sqr());
    }
    chroma
}

/// Cosine similarity of a chroma vector against the 24 binary triad
/// templates, in [`ChordSymbol::all`] order.
pub fn template_scores(chroma: &[f64; 12]) -> [(ChordSymbol, f64); 24] {
    let norm = math::norm(chroma);
    let mut out = [(ChordSymbol::major(0), 0.0); 24];
    for (slot, chord) in out.iter_mut().zip(ChordSymbol::all()) {
        let dot: f64 = chord.pitch_classes().iter().map(|&p| chroma[p as usize]).sum();
        let score = if norm > 0.0 {
            dot / (norm * math::sqrt(3.0))
        } else {
            0.0
        };
        *slot = (chord, score);
    }
    out
}

/// One triad per hop, consecutive duplicates collapsed, silent hops skipped.
pub fn estimate_chords(wave: &Waveform, config: &ChromaConfig) -> Result<ChordSequence> {
    let hop = math::round(config.hop_ms * wave.sample_rate as f64 / 1000.0) as usize;
    if hop == 0 || wave.samples.len() < hop {
        return Err(Error::TooShort {
            samples: wave.samples.len(),
            needed: hop.max(1),
        });
    }
    let mut out: ChordSequence = Vec::new();
    let samples: Vec<f64> = wave.samples.iter().map(|&s| s as f64).collect();
    for block in samples.chunks_exact(hop) {
        let chroma = chroma_vector(block, wave.sample_rate, config);
        if math::norm(&chroma) < config.silence_norm {
            continue;
        }
        let scores = template_scores(&chroma);
        let mut best = scores[0];
        for s in &scores[1..] {
            if s.1 > best.1 {
                best = *s;
            }
        }
        if out.last() != Some(&best.0) {
            out.push(best.0);
        }
    }
    Ok(out)
}
