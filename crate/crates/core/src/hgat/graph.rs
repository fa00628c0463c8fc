use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::autograd::Matrix;
use crate::chordvec::{ChordEmbeddingTable, CHORD_DIM};
use crate::corpus::{Corpus, Song};
use crate::textrep::{TfidfModel, WordEmbeddingTable, WordVocab, WORD_DIM};
use crate::{Error, Result};

pub const TOP_CHORD_COUNT: usize = 12;

/// The `n` most frequent chord symbols over all line sequences; ties go to
/// the lexicographically smaller name.
pub fn top_chords(corpus: &Corpus, n: usize) -> BTreeSet<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for song in &corpus.songs {
        for seq in song.chords.iter().flatten() {
            for c in seq {
                *counts.entry(c.name()).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.into_iter().take(n).map(|(c, _)| c).collect()
}

/// A sentence-to-word or sentence-to-chord edge with its TF-IDF feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub sentence: usize,
    pub node: usize,
    pub weight: f64,
}

/// Per-song graph. Words and chords are kept in lexicographic order and
/// edges sorted by `(sentence, node)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroGraph {
    pub sentences: Matrix,
    pub words: Vec<String>,
    pub word_features: Matrix,
    pub chords: Vec<String>,
    pub chord_features: Matrix,
    pub word_edges: Vec<Edge>,
    pub chord_edges: Vec<Edge>,
}

impl HeteroGraph {
    pub fn line_count(&self) -> usize {
        self.sentences.rows()
    }

    pub fn sentence_dim(&self) -> usize {
        self.sentences.cols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.words.len() != self.word_features.rows() || self.chords.len() != self.chord_features.rows() {
            return Err(Error::Shape("node names and features disagree".into()));
        }
        if self.word_features.cols() != WORD_DIM || self.chord_features.cols() != CHORD_DIM {
            return Err(Error::Shape("unexpected word or chord feature width".into()));
        }
        let check = |edges: &[Edge], n: usize| {
            edges
                .iter()
                .all(|e| e.sentence < self.line_count() && e.node < n && e.weight.is_finite() && e.weight >= 0.0)
        };
        if !check(&self.word_edges, self.words.len()) || !check(&self.chord_edges, self.chords.len()) {
            return Err(Error::Shape("edge endpoint out of range or bad weight".into()));
        }
        Ok(())
    }
}

/// Shared inputs for building graphs of one corpus.
#[derive(Debug, Clone, Copy)]
pub struct GraphInputs<'a> {
    pub word_vocab: &'a WordVocab,
    pub word_table: &'a WordEmbeddingTable,
    pub top_chords: &'a BTreeSet<String>,
    pub chord_table: &'a ChordEmbeddingTable,
}

fn edges_for(sentences: &[Vec<String>], nodes: &[String]) -> Vec<Edge> {
    let model = TfidfModel::from_sentences(sentences);
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let mut edges = Vec::new();
    for (s, toks) in sentences.iter().enumerate() {
        let present: BTreeSet<usize> = toks.iter().filter_map(|t| index.get(t.as_str()).copied()).collect();
        for node in present {
            edges.push(Edge {
                sentence: s,
                node,
                weight: model.tfidf(&nodes[node], toks),
            });
        }
    }
    edges
}

/// Builds the graph of `song`; `base` holds one sentence vector per line.
/// Edge weights use the song's own lines as the TF-IDF collection.
pub fn build_graph(song: &Song, inputs: GraphInputs<'_>, base: &[Vec<f64>]) -> Result<HeteroGraph> {
    if base.len() != song.lines.len() {
        return Err(Error::LengthMismatch {
            left: base.len(),
            right: song.lines.len(),
        });
    }
    let dim = base.first().map_or(0, Vec::len);
    let sentences = Matrix::from_rows(base, dim)?;

    let tokens: Vec<Vec<String>> = song
        .lines
        .iter()
        .map(|l| {
            l.tokens()
                .into_iter()
                .filter(|t| inputs.word_vocab.contains(t))
                .collect()
        })
        .collect();
    let words: Vec<String> = tokens.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let word_rows: Vec<Vec<f64>> = words.iter().map(|w| inputs.word_table.vector_or_zero(w)).collect();

    let chord_tokens: Vec<Vec<String>> = (0..song.lines.len())
        .map(|i| {
            song.line_chords(i)
                .iter()
                .map(|c| c.name())
                .filter(|c| inputs.top_chords.contains(c))
                .collect()
        })
        .collect();
    let chords: Vec<String> = chord_tokens.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let chord_rows: Vec<Vec<f64>> = chords.iter().map(|c| inputs.chord_table.vector(c).to_vec()).collect();
    if inputs.chord_table.dim() != CHORD_DIM {
        return Err(Error::Shape(format!("chord table width {}", inputs.chord_table.dim())));
    }

    let graph = HeteroGraph {
        sentences,
        word_edges: edges_for(&tokens, &words),
        chord_edges: edges_for(&chord_tokens, &chords),
        word_features: Matrix::from_rows(&word_rows, WORD_DIM)?,
        chord_features: Matrix::from_rows(&chord_rows, CHORD_DIM)?,
        words,
        chords,
    };
    graph.validate()?;
    Ok(graph)
}

/// Random graph for property tests: 1-8 lines, up to 10 words and 5
/// chords, each sentence-node pair linked with probability 0.4.
pub fn random_graph(seed: u64, sentence_dim: usize) -> HeteroGraph {
    use crate::rng::SeededRng;
    let mut rng = SeededRng::derive(seed, 0x5eed);
    let lines = 1 + rng.below(8);
    let n_words = rng.below(11);
    let n_chords = rng.below(6);
    let edges = |n: usize, rng: &mut SeededRng| {
        let mut out = Vec::new();
        for s in 0..lines {
            for node in 0..n {
                if rng.bernoulli(0.4) {
                    out.push(Edge {
                        sentence: s,
                        node,
                        weight: rng.uniform_range(0.0, 3.0),
                    });
                }
            }
        }
        out
    };
    let word_edges = edges(n_words, &mut rng);
    let chord_edges = edges(n_chords, &mut rng);
    HeteroGraph {
        sentences: Matrix::normal(lines, sentence_dim, 0.5, &mut rng),
        words: (0..n_words).map(|i| format!("w{i:02}")).collect(),
        word_features: Matrix::normal(n_words, WORD_DIM, 0.1, &mut rng),
        chords: (0..n_chords).map(|i| format!("c{i:02}")).collect(),
        chord_features: Matrix::normal(n_chords, CHORD_DIM, 0.1, &mut rng),
        word_edges,
        chord_edges,
    }
}
