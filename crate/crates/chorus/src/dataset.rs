//! Corpus directories.
//!
//! ```text
//! DIR/lrc/<song_id>.lrc     one LRC file per song (required)
//! DIR/labels.tsv            song_id, line_index, 0|1
//! DIR/chords.tsv            song_id, line_index, space-separated chords
//! DIR/audio/<song_id>.wav   mono WAV
//! DIR/words.vec             300-d word vectors
//! ```
//!
//! Everything but `lrc/` is optional.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chorus_core::corpus::{load_chords, load_labels, parse_lrc, serialize_lrc, Corpus, Song};

use crate::formats::{read_text, vectors, write_atomic};
use crate::{wav, Error, Result};

pub const LRC_DIR: &str = "lrc";
pub const AUDIO_DIR: &str = "audio";
pub const LABELS: &str = "labels.tsv";
pub const CHORDS: &str = "chords.tsv";
pub const WORDS: &str = "words.vec";

/// Where each piece of a corpus comes from. Explicit paths override the
/// directory defaults.
#[derive(Debug, Clone, Default)]
pub struct CorpusSource {
    pub dir: PathBuf,
    pub labels: Option<PathBuf>,
    pub chords: Option<PathBuf>,
    pub load_audio: bool,
}

impl CorpusSource {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            load_audio: true,
            ..Self::default()
        }
    }

    fn sidecar(&self, explicit: &Option<PathBuf>, name: &str) -> Result<Option<PathBuf>> {
        match explicit {
            Some(p) if p.is_file() => Ok(Some(p.clone())),
            Some(p) => Err(Error::Usage(format!("{} does not exist", p.display()))),
            None => Ok(Some(self.dir.join(name)).filter(|p| p.is_file())),
        }
    }

    pub fn words_path(&self) -> PathBuf {
        self.dir.join(WORDS)
    }
}

fn list_songs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let lrc = dir.join(LRC_DIR);
    if !lrc.is_dir() {
        return Err(Error::Usage(format!("{} is not a corpus directory (no {LRC_DIR}/)", dir.display())));
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(&lrc).map_err(|e| Error::io(&lrc, e))? {
        let path = entry.map_err(|e| Error::io(&lrc, e))?.path();
        if path.extension().is_some_and(|e| e == "lrc") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn load_corpus(src: &CorpusSource) -> Result<Corpus> {
    let mut songs = Vec::new();
    for (id, path) in list_songs(&src.dir)? {
        let lines = parse_lrc(&read_text(&path)?).map_err(|e| Error::format(&path, e.to_string()))?;
        let mut song = Song::new(id.clone(), lines);
        let audio = src.dir.join(AUDIO_DIR).join(format!("{id}.wav"));
        if src.load_audio && audio.is_file() {
            song.audio = Some(wav::read(&audio)?);
        }
        songs.push(song);
    }
    if songs.is_empty() {
        return Err(Error::format(src.dir.join(LRC_DIR), "no .lrc files"));
    }
    let mut corpus = Corpus::new(songs);
    if let Some(p) = src.sidecar(&src.labels, LABELS)? {
        corpus = load_labels(&read_text(&p)?, corpus).map_err(|e| Error::format(&p, e.to_string()))?;
    }
    if let Some(p) = src.sidecar(&src.chords, CHORDS)? {
        corpus = load_chords(&read_text(&p)?, corpus).map_err(|e| Error::format(&p, e.to_string()))?;
    }
    Ok(corpus)
}

pub fn render_labels(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.songs {
        for l in &s.lines {
            if let Some(y) = l.label {
                writeln!(out, "{}\t{}\t{}", s.id, l.index, u8::from(y)).unwrap();
            }
        }
    }
    out
}

pub fn render_chords(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.songs {
        for (i, seq) in s.chords.iter().flatten().enumerate() {
            let names: Vec<String> = seq.iter().map(|c| c.name()).collect();
            writeln!(out, "{}\t{}\t{}", s.id, i, names.join(" ")).unwrap();
        }
    }
    out
}

/// Writes every part the corpus carries, plus optional word vectors.
pub fn write_corpus(dir: &Path, corpus: &Corpus, words: Option<(usize, &vectors::KeyedVectors)>) -> Result<()> {
    for s in &corpus.songs {
        write_atomic(&dir.join(LRC_DIR).join(format!("{}.lrc", s.id)), serialize_lrc(&s.lines).as_bytes())?;
        if let Some(a) = &s.audio {
            wav::write(&dir.join(AUDIO_DIR).join(format!("{}.wav", s.id)), a)?;
        }
    }
    write_atomic(&dir.join(LABELS), render_labels(corpus).as_bytes())?;
    if corpus.songs.iter().any(|s| s.chords.is_some()) {
        write_atomic(&dir.join(CHORDS), render_chords(corpus).as_bytes())?;
    }
    if let Some((dim, rows)) = words {
        vectors::write(&dir.join(WORDS), dim, rows.iter().map(|(k, v)| (k.as_str(), v.as_slice())))?;
    }
    Ok(())
}
