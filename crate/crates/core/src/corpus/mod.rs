//! Songs, lyric lines and the labeled corpus.
//!
//! A song is an ordered list of timed lyric lines, optionally paired with one
//! chord sequence per line and a waveform. Labels (chorus or not) travel in a
//! sidecar TSV, chords in another; see [`load_labels`] and [`load_chords`].

mod lrc;
mod split;
mod synth;
mod tsv;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dsp::{ChordSequence, Waveform};
use crate::text::tokenize;

pub use lrc::{parse_lrc, serialize_lrc};
pub use split::{corpus_stats, split_corpus, CorpusStats, Split, SplitAssignment, SplitRatios};
pub use synth::{synth_corpus, synth_word_vectors, SynthConfig};
pub use tsv::{load_chords, load_labels, parse_chord_rows, ChordRow};

#[derive(Debug, Clone, PartialEq)]
pub struct LyricLine {
    /// 0-based position within the song.
    pub index: usize,
    pub text: String,
    pub start_ms: u64,
    pub end_ms: u64,
    /// `Some(true)` for chorus lines.
    pub label: Option<bool>,
}

impl LyricLine {
    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.text)
    }

    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Song {
    pub id: String,
    pub lines: Vec<LyricLine>,
    /// One chord sequence per line when present.
    pub chords: Option<Vec<ChordSequence>>,
    pub audio: Option<Waveform>,
}

impl Song {
    pub fn new(id: impl Into<String>, lines: Vec<LyricLine>) -> Self {
        Self {
            id: id.into(),
            lines,
            chords: None,
            audio: None,
        }
    }

    pub fn is_labeled(&self) -> bool {
        !self.lines.is_empty() && self.lines.iter().all(|l| l.label.is_some())
    }

    pub fn labels(&self) -> Vec<bool> {
        self.lines.iter().map(|l| l.label.unwrap_or(false)).collect()
    }

    pub fn chorus_count(&self) -> usize {
        self.lines.iter().filter(|l| l.label == Some(true)).count()
    }

    /// Chord sequence of line `i`, empty when the song carries no chords.
    pub fn line_chords(&self, i: usize) -> &[crate::dsp::ChordSymbol] {
        self.chords
            .as_ref()
            .and_then(|c| c.get(i))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub songs: Vec<Song>,
    pub split: BTreeMap<String, Split>,
}

impl Corpus {
    pub fn new(songs: Vec<Song>) -> Self {
        Self {
            songs,
            split: BTreeMap::new(),
        }
    }

    pub fn song(&self, id: &str) -> Option<&Song> {
        self.songs.iter().find(|s| s.id == id)
    }

    pub fn song_index(&self, id: &str) -> Option<usize> {
        self.songs.iter().position(|s| s.id == id)
    }

    pub fn line_count(&self) -> usize {
        self.songs.iter().map(|s| s.lines.len()).sum()
    }

    pub fn assign_split(&mut self, assignment: &SplitAssignment) {
        self.split = assignment.map.clone();
    }

    /// Songs of one split, in corpus order.
    pub fn songs_in(&self, split: Split) -> impl Iterator<Item = &Song> {
        self.songs
            .iter()
            .filter(move |s| self.split.get(&s.id) == Some(&split))
    }

    /// Every chord sequence of every song, in corpus order.
    pub fn chord_sequences(&self) -> Vec<ChordSequence> {
        self.songs
            .iter()
            .filter_map(|s| s.chords.as_ref())
            .flat_map(|c| c.iter().cloned())
            .collect()
    }
}
