//! Chorus-aware keyword search over an n-gram inverted index.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{Corpus, Song};
use crate::mmcr::{Prediction, THRESHOLD};
use crate::rng::SeededRng;
use crate::text::tokenize;
use crate::{math, Error, Result};

pub const NGRAM_SIZES: [usize; 2] = [3, 4];

/// Distinct 3- and 4-grams of a token sequence, tokens joined by one space.
pub fn ngrams<S: AsRef<str>>(tokens: &[S]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for n in NGRAM_SIZES {
        for w in tokens.windows(n) {
            let parts: Vec<&str> = w.iter().map(AsRef::as_ref).collect();
            out.insert(parts.join(" "));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posting {
    /// Position in the index's sorted song list.
    pub song: u32,
    pub line: u32,
    pub probability: f32,
}

/// Postings and token statistics of a single song, built independently and
/// merged into an [`NGramIndex`].
#[derive(Debug, Clone, PartialEq)]
pub struct SongIndex {
    pub song_id: String,
    /// `(ngram, line, probability)` in `(ngram, line)` order.
    pub grams: Vec<(String, u32, f32)>,
    pub token_counts: BTreeMap<String, u32>,
}

/// Indexes one song given its per-line chorus probabilities.
pub fn index_song(song: &Song, probabilities: &[f64]) -> Result<SongIndex> {
    if probabilities.len() != song.lines.len() {
        return Err(Error::LengthMismatch {
            left: probabilities.len(),
            right: song.lines.len(),
        });
    }
    let mut grams = Vec::new();
    let mut token_counts: BTreeMap<String, u32> = BTreeMap::new();
    for (line, &p) in song.lines.iter().zip(probabilities) {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Row {
                row: line.index,
                message: format!("probability {p} outside [0, 1]"),
            });
        }
        let toks = line.tokens();
        for t in &toks {
            *token_counts.entry(t.clone()).or_default() += 1;
        }
        for g in ngrams(&toks) {
            grams.push((g, line.index as u32, p as f32));
        }
    }
    grams.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(SongIndex {
        song_id: song.id.clone(),
        grams,
        token_counts,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NGramIndex {
    songs: Vec<String>,
    token_counts: Vec<BTreeMap<String, u32>>,
    doc_freq: BTreeMap<String, u32>,
    postings: BTreeMap<String, Vec<Posting>>,
}

impl NGramIndex {
    /// Merges per-song parts; the result does not depend on their order.
    pub fn merge(mut parts: Vec<SongIndex>) -> Result<Self> {
        parts.sort_by(|a, b| a.song_id.cmp(&b.song_id));
        if let Some(w) = parts.windows(2).find(|w| w[0].song_id == w[1].song_id) {
            return Err(Error::Config(format!("song `{}` indexed twice", w[0].song_id)));
        }
        let mut idx = NGramIndex::default();
        for (si, part) in parts.into_iter().enumerate() {
            for (g, line, p) in part.grams {
                idx.postings.entry(g).or_default().push(Posting {
                    song: si as u32,
                    line,
                    probability: p,
                });
            }
            for t in part.token_counts.keys() {
                *idx.doc_freq.entry(t.clone()).or_default() += 1;
            }
            idx.songs.push(part.song_id);
            idx.token_counts.push(part.token_counts);
        }
        Ok(idx)
    }

    /// Rebuilds an index from stored parts, re-deriving document frequencies.
    pub fn from_parts(
        songs: Vec<String>,
        token_counts: Vec<BTreeMap<String, u32>>,
        postings: BTreeMap<String, Vec<Posting>>,
    ) -> Result<Self> {
        if songs.len() != token_counts.len() {
            return Err(Error::LengthMismatch {
                left: songs.len(),
                right: token_counts.len(),
            });
        }
        if songs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("index songs must be strictly sorted".into()));
        }
        for (g, list) in &postings {
            let sorted = list.windows(2).all(|w| (w[0].song, w[0].line) < (w[1].song, w[1].line));
            let valid = list
                .iter()
                .all(|p| (p.song as usize) < songs.len() && (0.0..=1.0).contains(&p.probability));
            if !sorted || !valid {
                return Err(Error::Config(format!("bad postings for `{g}`")));
            }
        }
        let mut doc_freq: BTreeMap<String, u32> = BTreeMap::new();
        for counts in &token_counts {
            for t in counts.keys() {
                *doc_freq.entry(t.clone()).or_default() += 1;
            }
        }
        Ok(Self {
            songs,
            token_counts,
            doc_freq,
            postings,
        })
    }

    pub fn songs(&self) -> &[String] {
        &self.songs
    }

    pub fn token_counts(&self) -> &[BTreeMap<String, u32>] {
        &self.token_counts
    }

    pub fn postings(&self) -> &BTreeMap<String, Vec<Posting>> {
        &self.postings
    }

    pub fn lookup(&self, ngram: &str) -> &[Posting] {
        self.postings.get(ngram).map_or(&[], Vec::as_slice)
    }

    pub fn posting_count(&self) -> usize {
        self.postings.values().map(Vec::len).sum()
    }

    pub fn song_position(&self, id: &str) -> Option<usize> {
        self.songs.binary_search_by(|s| s.as_str().cmp(id)).ok()
    }

    /// `tf(token, song) * ln(N / df(token))`.
    pub fn tfidf(&self, song: usize, token: &str) -> f64 {
        let tf = self.token_counts[song].get(token).copied().unwrap_or(0);
        let df = self.doc_freq.get(token).copied().unwrap_or(0);
        if tf == 0 || df == 0 {
            return 0.0;
        }
        f64::from(tf) * math::ln(self.songs.len() as f64 / f64::from(df))
    }
}

/// Indexes every song of the corpus with the given predictions.
pub fn build_index(corpus: &Corpus, predictions: &[Prediction]) -> Result<NGramIndex> {
    let by_key: BTreeMap<(&str, usize), f64> = predictions
        .iter()
        .map(|p| ((p.song_id.as_str(), p.line), p.probability))
        .collect();
    let parts = corpus
        .songs
        .iter()
        .map(|song| {
            let probs = song
                .lines
                .iter()
                .map(|l| {
                    by_key.get(&(song.id.as_str(), l.index)).copied().ok_or_else(|| Error::MissingPrediction {
                        song: song.id.clone(),
                        line: l.index,
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            index_song(song, &probs)
        })
        .collect::<Result<Vec<_>>>()?;
    NGramIndex::merge(parts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub song_id: String,
    pub score: f64,
    /// Line behind the score (earliest matching line for TF-IDF).
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueryResult {
    pub hits: Vec<Hit>,
}

impl QueryResult {
    pub fn rank_of(&self, song_id: &str) -> Option<usize> {
        self.hits.iter().position(|h| h.song_id == song_id).map(|r| r + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Chorus,
    Tfidf,
}

impl SearchMethod {
    pub fn name(self) -> &'static str {
        match self {
            SearchMethod::Chorus => "chorus",
            SearchMethod::Tfidf => "tfidf",
        }
    }
}

fn keyword_tokens(keyword: &str) -> Result<Vec<String>> {
    let toks = tokenize(keyword);
    if !NGRAM_SIZES.contains(&toks.len()) {
        return Err(Error::Config(format!(
            "keyword `{keyword}` has {} tokens, expected 3 or 4",
            toks.len()
        )));
    }
    Ok(toks)
}

fn rank(index: &NGramIndex, mut scored: Vec<(usize, f64, usize)>, k: usize) -> QueryResult {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    QueryResult {
        hits: scored
            .into_iter()
            .take(k)
            .map(|(s, score, line)| Hit {
                song_id: index.songs[s].clone(),
                score,
                line,
            })
            .collect(),
    }
}

/// Songs containing the keyword, scored by their most chorus-like matching
/// line.
pub fn query_chorus(index: &NGramIndex, keyword: &str, k: usize) -> Result<QueryResult> {
    let gram = keyword_tokens(keyword)?.join(" ");
    let mut best: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for p in index.lookup(&gram) {
        let e = best.entry(p.song as usize).or_insert((f64::NEG_INFINITY, 0));
        let prob = f64::from(p.probability);
        if prob > e.0 {
            *e = (prob, p.line as usize);
        }
    }
    Ok(rank(index, best.into_iter().map(|(s, (p, l))| (s, p, l)).collect(), k))
}

/// Songs containing the keyword, scored by the mean TF-IDF of its tokens
/// with songs as documents.
pub fn query_tfidf(index: &NGramIndex, keyword: &str, k: usize) -> Result<QueryResult> {
    let toks = keyword_tokens(keyword)?;
    let gram = toks.join(" ");
    let mut first_line: BTreeMap<usize, usize> = BTreeMap::new();
    for p in index.lookup(&gram) {
        first_line.entry(p.song as usize).or_insert(p.line as usize);
    }
    let scored = first_line
        .into_iter()
        .map(|(s, line)| {
            let score = toks.iter().map(|t| index.tfidf(s, t)).sum::<f64>() / toks.len() as f64;
            (s, score, line)
        })
        .collect();
    Ok(rank(index, scored, k))
}

pub fn query(index: &NGramIndex, method: SearchMethod, keyword: &str, k: usize) -> Result<QueryResult> {
    match method {
        SearchMethod::Chorus => query_chorus(index, keyword, k),
        SearchMethod::Tfidf => query_tfidf(index, keyword, k),
    }
}

/// N-grams of the song's chorus lines (probability >= 0.5) that also occur
/// in non-chorus lines of at least two other songs.
pub fn candidate_keywords(index: &NGramIndex, song_id: &str) -> BTreeSet<String> {
    let Some(me) = index.song_position(song_id) else {
        return BTreeSet::new();
    };
    let me = me as u32;
    let chorus = |p: &Posting| f64::from(p.probability) >= THRESHOLD;
    index
        .postings
        .iter()
        .filter(|(_, list)| list.iter().any(|p| p.song == me && chorus(p)))
        .filter(|(_, list)| {
            let others: BTreeSet<u32> = list.iter().filter(|p| p.song != me && !chorus(p)).map(|p| p.song).collect();
            others.len() >= 2
        })
        .map(|(g, _)| g.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchQuery {
    pub keyword: String,
    pub target: String,
}

/// Up to `per_song` seeded picks from each song's candidate keywords, songs
/// in id order.
pub fn generate_queries(index: &NGramIndex, per_song: usize, seed: u64) -> Vec<SearchQuery> {
    let mut rng = SeededRng::derive(seed, 0x5ea);
    let mut out = Vec::new();
    for song in &index.songs {
        let mut cands: Vec<String> = candidate_keywords(index, song).into_iter().collect();
        rng.shuffle(&mut cands);
        for keyword in cands.into_iter().take(per_song) {
            out.push(SearchQuery {
                keyword,
                target: song.to_string(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchEvalReport {
    pub queries: usize,
    pub hits_at_1: f64,
    pub hits_at_3: f64,
}

pub fn eval_hits(index: &NGramIndex, queries: &[SearchQuery], method: SearchMethod) -> Result<SearchEvalReport> {
    if queries.is_empty() {
        return Err(Error::Insufficient("no search queries".into()));
    }
    let (mut h1, mut h3) = (0usize, 0usize);
    for q in queries {
        let r = query(index, method, &q.keyword, 3)?;
        match r.rank_of(&q.target) {
            Some(1) => {
                h1 += 1;
                h3 += 1;
            }
            Some(_) => h3 += 1,
            None => {}
        }
    }
    let n = queries.len() as f64;
    Ok(SearchEvalReport {
        queries: queries.len(),
        hits_at_1: h1 as f64 / n,
        hits_at_3: h3 as f64 / n,
    })
}
