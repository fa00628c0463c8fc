//! Multi-modal chorus recognition.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithm of the
//! toolkit: LRC parsing and corpus handling, MFCC and chroma features,
//! skip-gram chord embeddings, TF-IDF text statistics, the heterogeneous
//! graph-attention lyric encoder, the fusion classifier with its baselines,
//! and the chorus-aware n-gram song search. File formats, audio decoding and
//! the command line live in the `chorus` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod autograd;
pub mod chordvec;
pub mod corpus;
pub mod dsp;
mod error;
pub mod hgat;
pub mod math;
pub mod mmcr;
pub mod rng;
pub mod songsearch;
pub mod text;
pub mod textrep;

pub use error::{Error, Result};
