//! Skip-gram chord embeddings trained with negative sampling, and the
//! per-line chord feature built by concatenating embeddings.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dsp::ChordSymbol;
use crate::rng::SeededRng;
use crate::{math, Error, Result};

pub const UNK: &str = "<unk>";
pub const CHORD_DIM: usize = 64;
pub const DEFAULT_VOCAB_SIZE: usize = 500;
/// Chords per line kept in the chord feature.
pub const MAX_LINE_CHORDS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChordVocab {
    symbols: Vec<String>,
    ids: BTreeMap<String, usize>,
}

impl ChordVocab {
    /// Vocabulary from an explicit symbol list; `<unk>` is appended when
    /// missing.
    pub fn from_symbols(symbols: Vec<String>) -> Result<Self> {
        let mut symbols = symbols;
        if !symbols.iter().any(|s| s == UNK) {
            symbols.push(UNK.to_string());
        }
        let mut ids = BTreeMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if ids.insert(s.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate chord symbol `{s}`")));
            }
        }
        Ok(Self { symbols, ids })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn unk(&self) -> usize {
        self.ids[UNK]
    }

    pub fn get(&self, symbol: &str) -> Option<usize> {
        self.ids.get(symbol).copied()
    }

    /// Id of `symbol`, falling back to `<unk>`.
    pub fn id(&self, symbol: &str) -> usize {
        self.get(symbol).unwrap_or_else(|| self.unk())
    }

    pub fn symbol(&self, id: usize) -> &str {
        &self.symbols[id]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn encode<S: AsRef<str>>(&self, seq: &[S]) -> Vec<usize> {
        seq.iter().map(|s| self.id(s.as_ref())).collect()
    }
}

/// Surface strings of chord sequences.
pub fn symbol_sequences(seqs: &[Vec<ChordSymbol>]) -> Vec<Vec<String>> {
    seqs.iter()
        .map(|s| s.iter().map(|c| c.name()).collect())
        .collect()
}

/// Keep the `max_size - 1` most frequent symbols (ties lexicographic) plus
/// `<unk>`, which takes the last id.
pub fn build_chord_vocab<S: AsRef<str>>(sequences: &[Vec<S>], max_size: usize) -> Result<ChordVocab> {
    if max_size == 0 {
        return Err(Error::Config("chord vocabulary size must be at least 1".into()));
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for s in sequences.iter().flatten() {
        *counts.entry(s.as_ref()).or_default() += 1;
    }
    counts.remove(UNK);
    if counts.is_empty() {
        return Err(Error::Insufficient("no chords to build a vocabulary from".into()));
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(max_size - 1);
    ChordVocab::from_symbols(ranked.into_iter().map(|(s, _)| s.to_string()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramConfig {
    pub window: usize,
    pub negatives: usize,
    /// Initial learning rate, decayed linearly towards zero.
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        Self {
            window: 2,
            negatives: 5,
            lr: 0.025,
            epochs: 5,
            seed: 0,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.negatives == 0 {
            return Err(Error::Config("window and negatives must be at least 1".into()));
        }
        if !(self.lr > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Center (input) and context (output) embedding matrices, `vocab x 64`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChordEmbeddingTable {
    vocab: ChordVocab,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl ChordEmbeddingTable {
    /// Seeded initialization: small uniform values in both matrices.
    pub fn init(vocab: ChordVocab, seed: u64) -> Self {
        let mut rng = SeededRng::derive(seed, 0xC0DE);
        let n = vocab.len() * CHORD_DIM;
        let r = 0.5 / CHORD_DIM as f64;
        let input = (0..n).map(|_| rng.uniform_range(-r, r)).collect();
        let output = (0..n).map(|_| rng.uniform_range(-r, r)).collect();
        Self {
            vocab,
            input,
            output,
        }
    }

    /// Table with given center vectors (row-major) and zero context vectors.
    pub fn from_input(vocab: ChordVocab, input: Vec<f64>) -> Result<Self> {
        if input.len() != vocab.len() * CHORD_DIM {
            return Err(Error::Shape(format!(
                "{} values for {} chords of dimension {CHORD_DIM}",
                input.len(),
                vocab.len()
            )));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite chord embedding".into()));
        }
        let output = vec![0.0; input.len()];
        Ok(Self {
            vocab,
            input,
            output,
        })
    }

    pub fn vocab(&self) -> &ChordVocab {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        CHORD_DIM
    }

    pub fn input_row(&self, id: usize) -> &[f64] {
        &self.input[id * CHORD_DIM..(id + 1) * CHORD_DIM]
    }

    pub fn input_row_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.input[id * CHORD_DIM..(id + 1) * CHORD_DIM]
    }

    pub fn output_row(&self, id: usize) -> &[f64] {
        &self.output[id * CHORD_DIM..(id + 1) * CHORD_DIM]
    }

    /// Center vector of a symbol (`<unk>` row when unknown).
    pub fn vector(&self, symbol: &str) -> &[f64] {
        self.input_row(self.vocab.id(symbol))
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }
}

/// Negative-sampling loss of one (center, context, negatives) draw:
/// `-ln s(u_o . v_c) - sum ln s(-u_n . v_c)`.
pub fn pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    let mut loss = math::softplus(-math::dot(context, center));
    for n in negatives {
        loss += math::softplus(math::dot(n, center));
    }
    loss
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Loss and analytic gradient of [`pair_loss`].
pub fn pair_gradient(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let x = math::dot(context, center);
    let g_pos = math::sigmoid(x) - 1.0;
    let mut g_center: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
    let g_context = center.iter().map(|v| g_pos * v).collect();
    let mut g_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g = math::sigmoid(math::dot(n, center));
        for (gc, u) in g_center.iter_mut().zip(n.iter()) {
            *gc += g * u;
        }
        g_negs.push(center.iter().map(|v| g * v).collect());
    }
    PairGradient {
        loss: pair_loss(center, context, negatives),
        center: g_center,
        context: g_context,
        negatives: g_negs,
    }
}

/// Every (center, context) id pair with the context window clipped at the
/// sequence ends.
pub fn training_pairs(sequences: &[Vec<usize>], window: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for seq in sequences {
        for i in 0..seq.len() {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(seq.len().saturating_sub(1));
            for j in lo..=hi {
                if j != i {
                    out.push((seq[i], seq[j]));
                }
            }
        }
    }
    out
}

struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    fn new(counts: &[u64]) -> Option<Self> {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = counts
            .iter()
            .map(|&c| {
                acc += math::powf(c as f64, 0.75);
                acc
            })
            .collect();
        (acc > 0.0).then_some(Self { cumulative })
    }

    fn sample(&self, rng: &mut SeededRng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let x = rng.uniform() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramReport {
    pub pairs_per_epoch: usize,
    /// Mean pair loss of each epoch, measured before each update.
    pub epoch_losses: Vec<f64>,
}

/// Train center/context embeddings on chord sequences.
pub fn train_skipgram<S: AsRef<str>>(
    sequences: &[Vec<S>],
    vocab: &ChordVocab,
    config: &SkipGramConfig,
) -> Result<(ChordEmbeddingTable, SkipGramReport)> {
    config.validate()?;
    let mut table = ChordEmbeddingTable::init(vocab.clone(), config.seed);
    let ids: Vec<Vec<usize>> = sequences.iter().map(|s| vocab.encode(s)).collect();
    let pairs = training_pairs(&ids, config.window);
    let mut counts = vec![0u64; vocab.len()];
    for &i in ids.iter().flatten() {
        counts[i] += 1;
    }
    let mut report = SkipGramReport {
        pairs_per_epoch: pairs.len(),
        epoch_losses: Vec::new(),
    };
    let Some(sampler) = NegativeSampler::new(&counts).filter(|_| !pairs.is_empty()) else {
        return Ok((table, report));
    };
    let mut rng = SeededRng::derive(config.seed, 0x5A5A);
    let total = (pairs.len() * config.epochs) as f64;
    let mut step = 0usize;
    let mut negs: Vec<usize> = Vec::with_capacity(config.negatives);
    for _ in 0..config.epochs {
        let mut loss_sum = 0.0;
        for &(c, o) in &pairs {
            let lr = config.lr * (1.0 - step as f64 / total).max(1e-4);
            step += 1;
            negs.clear();
            for _ in 0..config.negatives {
                let n = sampler.sample(&mut rng);
                if n != o {
                    negs.push(n);
                }
            }
            let g = {
                let neg_rows: Vec<&[f64]> = negs.iter().map(|&n| table.output_row(n)).collect();
                pair_gradient(table.input_row(c), table.output_row(o), &neg_rows)
            };
            loss_sum += g.loss;
            for (v, d) in table.input_row_mut(c).iter_mut().zip(&g.center) {
                *v -= lr * d;
            }
            let out = &mut table.output;
            for (v, d) in out[o * CHORD_DIM..(o + 1) * CHORD_DIM].iter_mut().zip(&g.context) {
                *v -= lr * d;
            }
            for (&n, gn) in negs.iter().zip(&g.negatives) {
                for (v, d) in out[n * CHORD_DIM..(n + 1) * CHORD_DIM].iter_mut().zip(gn) {
                    *v -= lr * d;
                }
            }
        }
        report.epoch_losses.push(loss_sum / pairs.len() as f64);
    }
    Ok((table, report))
}

/// Concatenated center embeddings of a line's chords, pruned or zero-padded
/// to `max_chords` (`max_chords * 64` values).
pub fn chord_feature<S: AsRef<str>>(sequence: &[S], table: &ChordEmbeddingTable, max_chords: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_chords * CHORD_DIM];
    for (slot, sym) in out.chunks_exact_mut(CHORD_DIM).zip(sequence) {
        slot.copy_from_slice(table.vector(sym.as_ref()));
    }
    out
}
