//! Sidecar TSV files carrying line labels and chord annotations.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::Corpus;
use crate::dsp::{ChordSequence, ChordSymbol};
use crate::{Error, Result};

fn rows(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn row_err(row: usize, message: impl Into<String>) -> Error {
    Error::Row {
        row,
        message: message.into(),
    }
}

fn locate(corpus: &Corpus, row: usize, id: &str, index: &str) -> Result<(usize, usize)> {
    let song = corpus
        .song_index(id)
        .ok_or_else(|| row_err(row, format!("unknown song id `{id}`")))?;
    let line: usize = index
        .parse()
        .map_err(|_| row_err(row, format!("bad line index `{index}`")))?;
    let n = corpus.songs[song].lines.len();
    if line >= n {
        return Err(row_err(
            row,
            format!("line index {line} out of range for `{id}` ({n} lines)"),
        ));
    }
    Ok((song, line))
}

/// Attach `song_id<TAB>line_index<TAB>{0|1}` labels to the corpus.
pub fn load_labels(tsv: &str, mut corpus: Corpus) -> Result<Corpus> {
    for (row, line) in rows(tsv) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(row_err(row, format!("expected 3 fields, got {}", fields.len())));
        }
        let (s, l) = locate(&corpus, row, fields[0], fields[1])?;
        let label = match fields[2].trim() {
            "0" => false,
            "1" => true,
            other => return Err(row_err(row, format!("label `{other}` is not 0 or 1"))),
        };
        corpus.songs[s].lines[l].label = Some(label);
    }
    Ok(corpus)
}

/// One row of a chord annotation file.
#[derive(Debug, Clone, PartialEq)]
pub struct ChordRow {
    pub song_id: String,
    pub line_index: usize,
    pub chords: ChordSequence,
}

/// Parse `song_id<TAB>line_index<TAB>chord chord ...` rows. `N` and `X`
/// (no-chord markers) are dropped.
pub fn parse_chord_rows(tsv: &str) -> Result<Vec<ChordRow>> {
    let mut out = Vec::new();
    for (row, line) in rows(tsv) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(row_err(row, format!("expected 3 fields, got {}", fields.len())));
        }
        let line_index = fields[1]
            .parse()
            .map_err(|_| row_err(row, format!("bad line index `{}`", fields[1])))?;
        let mut chords = Vec::new();
        for sym in fields.get(2).copied().unwrap_or("").split_whitespace() {
            if sym == "N" || sym == "X" {
                continue;
            }
            let c: ChordSymbol = sym
                .parse()
                .map_err(|_| row_err(row, format!("bad chord symbol `{sym}`")))?;
            chords.push(c);
        }
        out.push(ChordRow {
            song_id: fields[0].to_string(),
            line_index,
            chords,
        });
    }
    Ok(out)
}

/// Attach chord annotations; songs touched by the file get one (possibly
/// empty) sequence per line.
pub fn load_chords(tsv: &str, mut corpus: Corpus) -> Result<Corpus> {
    for (row, line) in rows(tsv) {
        // Re-parse row by row so errors carry the row number.
        let parsed = parse_chord_rows(line).map_err(|e| match e {
            Error::Row { message, .. } => row_err(row, message),
            other => other,
        })?;
        let Some(r) = parsed.into_iter().next() else { continue };
        let (s, l) = locate(&corpus, row, &r.song_id, &r.line_index.to_string())?;
        let song = &mut corpus.songs[s];
        let n = song.lines.len();
        song.chords.get_or_insert_with(|| vec![Vec::new(); n])[l] = r.chords;
    }
    Ok(corpus)
}
