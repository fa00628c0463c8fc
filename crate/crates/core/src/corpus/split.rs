use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::Corpus;
use crate::rng::SeededRng;
use crate::{math, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitAssignment {
    pub map: BTreeMap<String, Split>,
}

impl SplitAssignment {
    pub fn count(&self, split: Split) -> usize {
        self.map.values().filter(|&&s| s == split).count()
    }
}

/// Seeded per-song split. Validation and test sizes are floored; the
/// remainder goes to train.
pub fn split_corpus(corpus: &Corpus, ratios: SplitRatios, seed: u64) -> Result<SplitAssignment> {
    let SplitRatios {
        train,
        validation,
        test,
    } = ratios;
    if !(train > 0.0 && validation > 0.0 && test > 0.0) {
        return Err(Error::Config(format!("split ratios must be positive: {ratios:?}")));
    }
    if ((train + validation + test) - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split ratios must sum to 1: {ratios:?}")));
    }
    let n = corpus.songs.len();
    if n < 3 {
        return Err(Error::Insufficient(format!("cannot split {n} songs into 3 parts")));
    }
    let mut ids: Vec<&str> = corpus.songs.iter().map(|s| s.id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    let n = ids.len();
    SeededRng::new(seed).shuffle(&mut ids);

    let floor = |r: f64| math::floor(n as f64 * r + 1e-9) as usize;
    let n_val = floor(validation);
    let n_test = floor(test);
    let n_train = n - n_val - n_test;
    let mut map = BTreeMap::new();
    for (i, id) in ids.into_iter().enumerate() {
        let split = if i < n_train {
            Split::Train
        } else if i < n_train + n_val {
            Split::Validation
        } else {
            Split::Test
        };
        map.insert(String::from(id), split);
    }
    Ok(SplitAssignment { map })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub songs: usize,
    pub lines: usize,
    /// Rounded to two decimals.
    pub mean_lines_per_song: f64,
    /// Chorus lines over labeled lines.
    pub chorus_fraction: f64,
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "songs\t{}\nlines\t{}\nmean_lines_per_song\t{:.2}\nchorus_fraction\t{:.4}",
            self.songs, self.lines, self.mean_lines_per_song, self.chorus_fraction
        )
    }
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let songs = corpus.songs.len();
    let lines = corpus.line_count();
    let labeled = corpus
        .songs
        .iter()
        .flat_map(|s| &s.lines)
        .filter(|l| l.label.is_some())
        .count();
    let chorus: usize = corpus.songs.iter().map(|s| s.chorus_count()).sum();
    CorpusStats {
        songs,
        lines,
        mean_lines_per_song: if songs == 0 {
            0.0
        } else {
            math::round(lines as f64 / songs as f64 * 100.0) / 100.0
        },
        chorus_fraction: if labeled == 0 {
            0.0
        } else {
            chorus as f64 / labeled as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LyricLine, Song};

    fn corpus_of(songs: usize, lines: usize) -> Corpus {
        Corpus::new(
            (0..songs)
                .map(|s| {
                    let lines = (0..lines)
                        .map(|i| LyricLine {
                            index: i,
                            text: "x".into(),
                            start_ms: i as u64 * 10,
                            end_ms: i as u64 * 10 + 10,
                            label: Some(i % 4 == 0),
                        })
                        .collect();
                    Song::new(format!("s{s:04}"), lines)
                })
                .collect(),
        )
    }

    #[test]
    fn ten_songs_split_8_1_1() {
        let a = split_corpus(&corpus_of(10, 1), SplitRatios::default(), 7).unwrap();
        assert_eq!(
            (a.count(Split::Train), a.count(Split::Validation), a.count(Split::Test)),
            (8, 1, 1)
        );
        let b = split_corpus(&corpus_of(10, 1), SplitRatios::default(), 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chord_sized_split_follows_floor_rule() {
        // floor(62.7) = 62 for validation and test, 627 - 124 = 503 to train.
        let a = split_corpus(&corpus_of(627, 1), SplitRatios::default(), 1).unwrap();
        assert_eq!(
            (a.count(Split::Train), a.count(Split::Validation), a.count(Split::Test)),
            (503, 62, 62)
        );
    }

    #[test]
    fn split_rejects_tiny_corpora_and_bad_ratios() {
        assert!(split_corpus(&corpus_of(2, 1), SplitRatios::default(), 0).is_err());
        let bad = SplitRatios {
            train: 0.8,
            validation: 0.1,
            test: 0.2,
        };
        assert!(split_corpus(&corpus_of(5, 1), bad, 0).is_err());
    }

    #[test]
    fn split_is_a_partition() {
        let c = corpus_of(57, 1);
        for seed in 0..5 {
            let a = split_corpus(&c, SplitRatios::default(), seed).unwrap();
            assert_eq!(a.map.len(), 57);
            assert!(c.songs.iter().all(|s| a.map.contains_key(&s.id)));
        }
    }

    #[test]
    fn stats() {
        assert_eq!(
            corpus_stats(&Corpus::default()),
            CorpusStats {
                songs: 0,
                lines: 0,
                mean_lines_per_song: 0.0,
                chorus_fraction: 0.0
            }
        );
        let s = corpus_stats(&corpus_of(1, 4));
        assert_eq!(s.mean_lines_per_song, 4.0);
        assert_eq!(s.chorus_fraction, 0.25);
    }
}
