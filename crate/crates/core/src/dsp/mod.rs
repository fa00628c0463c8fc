//! Tune-side features: line audio slicing, MFCC matrices and a chroma
//! template chord estimator.

mod chord;
mod chroma;
mod fft;
mod mfcc;
mod wave;

pub use chord::{ChordQuality, ChordSequence, ChordSymbol};
pub use chroma::{chroma_vector, estimate_chords, template_scores, ChromaConfig};
pub use fft::{fft_in_place, Complex, FftPlan};
pub use mfcc::{
    compute_mfcc, dct_ii_ortho, fit_frames, hamming, hz_to_mel, log_mel_energies, mel_filterbank,
    mel_to_hz, MfccConfig, MfccMatrix, MFCC_COEFFS, TARGET_FRAMES,
};
pub use wave::{resample_linear, slice_line_audio, Waveform, CANONICAL_RATE};
