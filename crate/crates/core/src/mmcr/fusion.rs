use alloc::format;
use alloc::vec::Vec;

use crate::chordvec::{CHORD_DIM, MAX_LINE_CHORDS};
use crate::dsp::{MFCC_COEFFS, TARGET_FRAMES};
use crate::{math, Error, Result};

pub const MFCC_BLOCK: usize = TARGET_FRAMES * MFCC_COEFFS;
pub const CHORD_BLOCK: usize = MAX_LINE_CHORDS * CHORD_DIM;

/// Fused dimension for a lyric block of width `d_h`.
pub const fn fused_dim(d_h: usize) -> usize {
    d_h + MFCC_BLOCK + CHORD_BLOCK
}

/// `L ⊕ M ⊕ C` with `M` flattened row-major.
pub fn fuse(lyric: &[f64], mfcc: &[f64], chord: &[f64]) -> Result<Vec<f64>> {
    if mfcc.len() != MFCC_BLOCK {
        return Err(Error::Shape(format!("MFCC block has {} values, expected {MFCC_BLOCK}", mfcc.len())));
    }
    if chord.len() != CHORD_BLOCK {
        return Err(Error::Shape(format!("chord block has {} values, expected {CHORD_BLOCK}", chord.len())));
    }
    let mut out = Vec::with_capacity(lyric.len() + MFCC_BLOCK + CHORD_BLOCK);
    out.extend_from_slice(lyric);
    out.extend_from_slice(mfcc);
    out.extend_from_slice(chord);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    Lyrics,
    Mfcc,
    Chord,
}

impl Modality {
    pub fn name(self) -> &'static str {
        match self {
            Modality::Lyrics => "lyrics",
            Modality::Mfcc => "mfcc",
            Modality::Chord => "chord",
        }
    }
}

/// Which blocks enter the fused row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModalitySet {
    pub lyrics: bool,
    pub mfcc: bool,
    pub chord: bool,
}

impl ModalitySet {
    pub const ALL: Self = Self {
        lyrics: true,
        mfcc: true,
        chord: true,
    };

    pub fn only(m: Modality) -> Self {
        Self {
            lyrics: m == Modality::Lyrics,
            mfcc: m == Modality::Mfcc,
            chord: m == Modality::Chord,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lyrics || self.mfcc || self.chord)
    }
}

/// How the MFCC block enters the fused row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MfccMode {
    #[default]
    Flatten,
    /// Mean over frames, 13 values.
    MeanPool,
}

/// Per-line inputs before fusion.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFeatures {
    pub lyric: Vec<f64>,
    /// Fitted MFCC matrix flattened row-major.
    pub mfcc: Vec<f32>,
    pub chord: Vec<f64>,
}

impl LineFeatures {
    /// Row for the selected blocks.
    pub fn fused(&self, set: ModalitySet, mode: MfccMode) -> Result<Vec<f64>> {
        if self.mfcc.len() != MFCC_BLOCK || self.chord.len() != CHORD_BLOCK {
            return Err(Error::Shape("line features have the wrong block sizes".into()));
        }
        let mut out = Vec::new();
        if set.lyrics {
            out.extend_from_slice(&self.lyric);
        }
        if set.mfcc {
            match mode {
                MfccMode::Flatten => out.extend(self.mfcc.iter().map(|&v| f64::from(v))),
                MfccMode::MeanPool => {
                    let mut mean = [0.0; MFCC_COEFFS];
                    for frame in self.mfcc.chunks(MFCC_COEFFS) {
                        for (m, &v) in mean.iter_mut().zip(frame) {
                            *m += f64::from(v);
                        }
                    }
                    out.extend(mean.iter().map(|m| m / TARGET_FRAMES as f64));
                }
            }
        }
        if set.chord {
            out.extend_from_slice(&self.chord);
        }
        Ok(out)
    }
}

/// Dense row-major examples stored as `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    rows: Vec<f32>,
    labels: Vec<bool>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push(&mut self, row: &[f64], label: bool) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::LengthMismatch {
                left: row.len(),
                right: self.dim,
            });
        }
        self.rows.extend(row.iter().map(|&v| v as f32));
        self.labels.push(label);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    /// True when both classes are present.
    pub fn has_both_classes(&self) -> bool {
        let p = self.positives();
        p > 0 && p < self.len()
    }

    pub fn standardize(&mut self, s: &Standardizer) -> Result<()> {
        if s.dim() != self.dim {
            return Err(Error::LengthMismatch {
                left: s.dim(),
                right: self.dim,
            });
        }
        for row in self.rows.chunks_mut(self.dim) {
            for ((v, m), sd) in row.iter_mut().zip(&s.mean).zip(&s.std) {
                *v = if *sd > 0.0 { ((f64::from(*v) - m) / sd) as f32 } else { 0.0 };
            }
        }
        Ok(())
    }
}

/// Per-coordinate affine map to zero mean and unit variance; constant
/// coordinates map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Insufficient("cannot standardize an empty split".into()));
        }
        let n = data.len() as f64;
        let mut mean = alloc::vec![0.0; data.dim];
        for i in 0..data.len() {
            for (m, &v) in mean.iter_mut().zip(data.row(i)) {
                *m += f64::from(v);
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; data.dim];
        for i in 0..data.len() {
            for ((s, &v), m) in var.iter_mut().zip(data.row(i)).zip(&mean) {
                let d = f64::from(v) - m;
                *s += d * d;
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = math::sqrt(s / n);
                if sd > 1e-12 {
                    sd
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}
