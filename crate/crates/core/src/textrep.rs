//! Word vocabulary, TF-IDF statistics, word vectors and sentence encoders.
//!
//! TF is the count of a word in a sentence; the "out-degree" of a word is the
//! number of distinct sentences containing it, and
//! `tfidf(w, s) = tf(w, s) * ln(N / outdeg(w))`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{Corpus, LyricLine};
use crate::{math, Error, Result};

pub const WORD_DIM: usize = 300;
pub const MAX_WORD_VOCAB: usize = 50_000;
/// Fraction of the vocabulary with the lowest TF-IDF that is dropped.
pub const LOW_TFIDF_DROP: f64 = 0.1;

/// Term frequency of `word` in a tokenized sentence.
pub fn term_frequency<S: AsRef<str>>(word: &str, tokens: &[S]) -> usize {
    tokens.iter().filter(|t| t.as_ref() == word).count()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TfidfModel {
    sentences: usize,
    outdeg: BTreeMap<String, usize>,
}

impl TfidfModel {
    pub fn from_sentences<S: AsRef<str>>(sentences: &[Vec<S>]) -> Self {
        let mut outdeg: BTreeMap<String, usize> = BTreeMap::new();
        for s in sentences {
            let distinct: BTreeSet<&str> = s.iter().map(AsRef::as_ref).collect();
            for w in distinct {
                *outdeg.entry(w.to_string()).or_default() += 1;
            }
        }
        Self {
            sentences: sentences.len(),
            outdeg,
        }
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences
    }

    pub fn out_degree(&self, word: &str) -> usize {
        self.outdeg.get(word).copied().unwrap_or(0)
    }

    /// `ln(N / outdeg)`, zero for unseen words.
    pub fn idf(&self, word: &str) -> f64 {
        match self.out_degree(word) {
            0 => 0.0,
            d => math::ln(self.sentences as f64 / d as f64),
        }
    }

    pub fn tfidf<S: AsRef<str>>(&self, word: &str, tokens: &[S]) -> f64 {
        let tf = term_frequency(word, tokens);
        if tf == 0 {
            0.0
        } else {
            tf as f64 * self.idf(word)
        }
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.outdeg.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordVocab {
    words: Vec<String>,
    ids: BTreeMap<String, usize>,
}

impl WordVocab {
    pub fn from_words(words: Vec<String>) -> Self {
        let ids = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self { words, ids }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.ids.contains_key(word)
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.ids.get(word).copied()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Vocabulary from tokenized sentences: score each word by its maximum
/// TF-IDF over sentences, drop the lowest `floor(drop * V)` (ties dropped in
/// lexicographic order), then keep the top `max_size`. Ids follow the
/// ranking (highest score first).
pub fn build_vocab_from_sentences<S: AsRef<str>>(
    sentences: &[Vec<S>],
    drop: f64,
    max_size: usize,
) -> Result<(WordVocab, TfidfModel)> {
    if sentences.iter().all(|s| s.is_empty()) {
        return Err(Error::Insufficient("cannot build a vocabulary from an empty corpus".into()));
    }
    let model = TfidfModel::from_sentences(sentences);
    let mut score: BTreeMap<&str, f64> = BTreeMap::new();
    for s in sentences {
        let distinct: BTreeSet<&str> = s.iter().map(AsRef::as_ref).collect();
        for w in distinct {
            let v = model.tfidf(w, s);
            let e = score.entry(w).or_insert(v);
            *e = e.max(v);
        }
    }
    let mut ranked: Vec<(&str, f64)> = score.into_iter().collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(b.0)));
    let n_drop = math::floor(ranked.len() as f64 * drop + 1e-9) as usize;
    let mut kept: Vec<(&str, f64)> = ranked.split_off(n_drop);
    kept.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    kept.truncate(max_size);
    let vocab = WordVocab::from_words(kept.into_iter().map(|(w, _)| w.to_string()).collect());
    Ok((vocab, model))
}

/// Corpus-wide vocabulary with the default drop fraction and size cap.
pub fn build_vocab(corpus: &Corpus) -> Result<(WordVocab, TfidfModel)> {
    let sentences: Vec<Vec<String>> = corpus
        .songs
        .iter()
        .flat_map(|s| &s.lines)
        .map(LyricLine::tokens)
        .collect();
    build_vocab_from_sentences(&sentences, LOW_TFIDF_DROP, MAX_WORD_VOCAB)
}

/// Keyed vectors of one fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl VectorStore {
    pub fn from_pairs(dim: usize, pairs: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut vectors = BTreeMap::new();
        for (k, v) in pairs {
            if v.len() != dim {
                return Err(Error::Shape(format!("`{k}` has {} values, expected {dim}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Shape(format!("`{k}` has non-finite values")));
            }
            vectors.insert(k, v);
        }
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.vectors.get(key).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// 300-dimensional word vectors; out-of-table words map to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WordEmbeddingTable {
    store: VectorStore,
}

impl WordEmbeddingTable {
    pub fn from_pairs(pairs: Vec<(String, Vec<f64>)>) -> Result<Self> {
        Ok(Self {
            store: VectorStore::from_pairs(WORD_DIM, pairs)?,
        })
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.store.get(word)
    }

    pub fn vector_or_zero(&self, word: &str) -> Vec<f64> {
        self.get(word).map_or_else(|| vec![0.0; WORD_DIM], <[f64]>::to_vec)
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn store(&self) -> &VectorStore {
        &self.store
    }
}

/// Base sentence representation of a lyric line.
pub trait SentenceEncoder {
    fn dim(&self) -> usize;
    fn encode(&self, song_id: &str, line: &LyricLine) -> Result<Vec<f64>>;
}

/// Interchange key of a line: `song_id:line_index`.
pub fn line_key(song_id: &str, index: usize) -> String {
    format!("{song_id}:{index}")
}

/// Vectors produced offline and loaded from the interchange file.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecomputedEncoder {
    store: VectorStore,
}

impl PrecomputedEncoder {
    pub fn new(store: VectorStore) -> Self {
        Self { store }
    }
}

impl SentenceEncoder for PrecomputedEncoder {
    fn dim(&self) -> usize {
        self.store.dim()
    }

    fn encode(&self, song_id: &str, line: &LyricLine) -> Result<Vec<f64>> {
        let key = line_key(song_id, line.index);
        self.store
            .get(&key)
            .map(<[f64]>::to_vec)
            .ok_or(Error::MissingEmbedding(key))
    }
}

/// Mean of the line's in-table word vectors.
#[derive(Debug, Clone, Copy)]
pub struct MeanWordEncoder<'a> {
    table: &'a WordEmbeddingTable,
}

impl<'a> MeanWordEncoder<'a> {
    pub fn new(table: &'a WordEmbeddingTable) -> Self {
        Self { table }
    }
}

impl SentenceEncoder for MeanWordEncoder<'_> {
    fn dim(&self) -> usize {
        WORD_DIM
    }

    fn encode(&self, _song_id: &str, line: &LyricLine) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; WORD_DIM];
        let mut n = 0usize;
        for t in line.tokens() {
            if let Some(v) = self.table.get(&t) {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
                n += 1;
            }
        }
        if n > 0 {
            for a in &mut acc {
                *a /= n as f64;
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(raw: &[&str]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|s| s.split_whitespace().map(String::from).collect())
            .collect()
    }

    fn line(text: &str) -> LyricLine {
        LyricLine {
            index: 0,
            text: text.into(),
            start_ms: 0,
            end_ms: 1,
            label: None,
        }
    }

    #[test]
    fn ubiquitous_word_has_zero_tfidf() {
        let s = toks(&["a b", "a c", "a d a"]);
        let m = TfidfModel::from_sentences(&s);
        for sent in &s {
            assert_eq!(m.tfidf("a", sent), 0.0);
        }
    }

    #[test]
    fn rare_word_tfidf_is_log_n() {
        // brute force: "z" occurs once, in one of eight sentences
        let s = toks(&["z a", "a", "b", "c", "d", "e", "f", "g"]);
        let m = TfidfModel::from_sentences(&s);
        let n = s.len() as f64;
        let outdeg = s.iter().filter(|x| x.iter().any(|w| w == "z")).count() as f64;
        let tf = s[0].iter().filter(|w| *w == "z").count() as f64;
        assert_eq!(m.tfidf("z", &s[0]), tf * math::ln(n / outdeg));
        assert_eq!(m.tfidf("z", &s[0]), math::ln(8.0));
        assert_eq!(m.tfidf("z", &s[1]), 0.0);
    }

    #[test]
    fn ten_word_vocab_drops_one() {
        let s = toks(&["w0 w1 w2 w3 w4", "w5 w6 w7 w8 w9", "w0 w1 w2 w3 w4 w5 w6 w7 w8"]);
        let (v, _) = build_vocab_from_sentences(&s, LOW_TFIDF_DROP, MAX_WORD_VOCAB).unwrap();
        assert_eq!(v.len(), 9);
        // every word scores ln(3/2) except w9 (ln 3); the tie drops w0 first
        assert!(!v.contains("w0"));
        assert_eq!(v.words()[0], "w9");
    }

    #[test]
    fn vocab_cap_and_empty_corpus() {
        let s = toks(&["a b c d e f g h i j k"]);
        let (v, _) = build_vocab_from_sentences(&s, 0.0, 3).unwrap();
        assert_eq!(v.len(), 3);
        assert!(build_vocab_from_sentences(&toks(&["", ""]), 0.1, 10).is_err());
    }

    fn table(entries: &[(&str, f64)]) -> WordEmbeddingTable {
        WordEmbeddingTable::from_pairs(
            entries
                .iter()
                .map(|(w, x)| (w.to_string(), (0..WORD_DIM).map(|i| x * (i as f64 + 1.0)).collect()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn mean_word_encoder() {
        let t = table(&[("up", 1.0), ("down", -1.0), ("left", 2.0), ("right", 3.0)]);
        let e = MeanWordEncoder::new(&t);
        assert_eq!(e.encode("s", &line("up")).unwrap(), t.get("up").unwrap());
        assert!(e.encode("s", &line("up down")).unwrap().iter().all(|&x| x == 0.0));
        let v = e.encode("s", &line("up left right nowhere")).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-12 && (v[299] - 600.0).abs() < 1e-9);
        assert_eq!(e.encode("s", &line("nowhere")).unwrap(), vec![0.0; WORD_DIM]);
        assert_eq!(e.encode("s", &line("up left")).unwrap(), e.encode("s", &line("up left")).unwrap());
    }

    #[test]
    fn word_table_dimension_is_enforced() {
        assert!(WordEmbeddingTable::from_pairs(vec![("a".into(), vec![0.0; 3])]).is_err());
    }

    #[test]
    fn precomputed_lookup() {
        let store = VectorStore::from_pairs(2, vec![("s1:0".into(), vec![0.25, -1.5])]).unwrap();
        let e = PrecomputedEncoder::new(store);
        assert_eq!(e.dim(), 2);
        assert_eq!(e.encode("s1", &line("x")).unwrap(), [0.25, -1.5]);
        assert_eq!(
            e.encode("s2", &line("x")),
            Err(Error::MissingEmbedding("s2:0".into()))
        );
    }
}
