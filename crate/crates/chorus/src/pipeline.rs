//! The experiment pipeline: split, chord and word tables, per-song graphs,
//! graph pre-training, line features, classifier training, the extractive
//! baselines and keyword search.
//!
//! Per-song work runs on the ambient rayon pool; results are collected in
//! corpus order so output never depends on the thread count.

use std::collections::{BTreeMap, BTreeSet};

use chorus_core::autograd::Matrix;
use chorus_core::chordvec::{
    build_chord_vocab, chord_feature, symbol_sequences, train_skipgram, ChordEmbeddingTable, ChordVocab, SkipGramReport,
    CHORD_DIM, MAX_LINE_CHORDS,
};
use chorus_core::corpus::{split_corpus, synth_word_vectors, Corpus, Song, Split, SplitRatios};
use chorus_core::dsp::{
    compute_mfcc, estimate_chords, fit_frames, resample_linear, slice_line_audio, ChromaConfig, MfccConfig,
    CANONICAL_RATE, TARGET_FRAMES,
};
use chorus_core::hgat::{
    build_graph, freeze, pretrain_next_line, top_chords, FrozenGat, GatConfig, GatParams, GraphInputs, HeteroGraph,
    PretrainConfig, PretrainReport, TOP_CHORD_COUNT,
};
use chorus_core::mmcr::{
    evaluate, grid_search, hard_labels, pacsum, select_top_k, textrank, Dataset, FusionClassifier, LineFeatures,
    Metrics, ModalitySet, PacSumConfig, Prediction, Standardizer, MFCC_BLOCK,
};
use chorus_core::songsearch::{build_index, eval_hits, index_song, generate_queries, NGramIndex, SearchEvalReport, SearchMethod, SearchQuery};
use chorus_core::textrep::{
    build_vocab, MeanWordEncoder, PrecomputedEncoder, SentenceEncoder, VectorStore, WordEmbeddingTable, WordVocab,
    WORD_DIM,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::formats::{hgat as hgat_file, tsv, vectors, write_atomic};
use crate::{Error, Result};

/// Plain progress line on stderr.
pub fn note(msg: impl AsRef<str>) {
    eprintln!("chorus: {}", msg.as_ref());
}

pub fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} worker threads: {e}")))
}

/// Assigns the 80/10/10 split.
pub fn assign_split(corpus: &mut Corpus, seed: u64) -> Result<()> {
    let a = split_corpus(corpus, SplitRatios::default(), seed)?;
    corpus.assign_split(&a);
    Ok(())
}

/// Fills chord sequences from the audio for songs that have audio but no
/// annotation. Lines too short to analyse get an empty sequence.
pub fn estimate_missing_chords(corpus: &mut Corpus) -> Result<usize> {
    let cfg = ChromaConfig::default();
    let estimated: Vec<Option<Vec<_>>> = corpus
        .songs
        .par_iter()
        .map(|song| {
            let (None, Some(audio)) = (&song.chords, &song.audio) else {
                return Ok(None);
            };
            song.lines
                .iter()
                .map(|l| match slice_line_audio(audio, l).and_then(|w| estimate_chords(&w, &cfg)) {
                    Ok(seq) => Ok(seq),
                    Err(chorus_core::Error::EmptySpan { .. } | chorus_core::Error::TooShort { .. }) => Ok(Vec::new()),
                    Err(e) => Err(e),
                })
                .collect::<chorus_core::Result<Vec<_>>>()
                .map(Some)
        })
        .collect::<chorus_core::Result<_>>()?;
    let mut n = 0;
    for (song, est) in corpus.songs.iter_mut().zip(estimated) {
        if est.is_some() {
            song.chords = est;
            n += 1;
        }
    }
    Ok(n)
}

/// Train-split songs without their audio.
pub fn train_subset(corpus: &Corpus) -> Corpus {
    let songs = corpus
        .songs_in(Split::Train)
        .map(|s| Song {
            audio: None,
            ..s.clone()
        })
        .collect();
    Corpus::new(songs)
}

pub fn train_chord_table(train: &Corpus, cfg: &RunConfig) -> Result<(ChordEmbeddingTable, SkipGramReport)> {
    let seqs = symbol_sequences(&train.chord_sequences());
    let vocab = build_chord_vocab(&seqs, cfg.chord_vocab)?;
    Ok(train_skipgram(&seqs, &vocab, &cfg.skipgram)?)
}

/// Center vectors keyed by chord symbol, `<unk>` last.
pub fn chord_table_rows(table: &ChordEmbeddingTable) -> vectors::KeyedVectors {
    let vocab = table.vocab();
    (0..vocab.len())
        .map(|i| (vocab.symbol(i).to_string(), table.input_row(i).to_vec()))
        .collect()
}

pub fn chord_table_from_rows(dim: usize, rows: vectors::KeyedVectors) -> Result<ChordEmbeddingTable> {
    if dim != CHORD_DIM {
        return Err(Error::Usage(format!("chord vectors must be {CHORD_DIM}-d, got {dim}")));
    }
    let (symbols, data): (Vec<String>, Vec<Vec<f64>>) = rows.into_iter().unzip();
    let vocab = ChordVocab::from_symbols(symbols)?;
    let mut input: Vec<f64> = data.into_iter().flatten().collect();
    // `<unk>` gets a zero row when the file lacks one.
    input.resize(vocab.len() * CHORD_DIM, 0.0);
    Ok(ChordEmbeddingTable::from_input(vocab, input)?)
}

pub fn write_chord_table(path: &std::path::Path, table: &ChordEmbeddingTable) -> Result<()> {
    let rows = chord_table_rows(table);
    vectors::write(path, CHORD_DIM, rows.iter().map(|(k, v)| (k.as_str(), v.as_slice())))
}

pub fn read_chord_table(path: &std::path::Path) -> Result<ChordEmbeddingTable> {
    let (dim, rows) = vectors::read(path)?;
    chord_table_from_rows(dim, rows)
}

/// Word vectors from the configured file or the corpus's `words.vec`; when
/// neither exists, seeded random vectors stand in.
pub fn load_word_table(corpus: &Corpus, cfg: &RunConfig) -> Result<WordEmbeddingTable> {
    let default = cfg.corpus.as_ref().map(|d| d.join(crate::dataset::WORDS));
    let path = cfg.embeddings.clone().or(default.filter(|p| p.is_file()));
    let rows = match path {
        Some(p) => {
            let (dim, rows) = vectors::read(&p)?;
            if dim != WORD_DIM {
                return Err(Error::format(&p, format!("word vectors must be {WORD_DIM}-d, got {dim}")));
            }
            rows
        }
        None => {
            note("no word vectors found; using seeded random vectors");
            synth_word_vectors(corpus, WORD_DIM, cfg.seed)
        }
    };
    Ok(WordEmbeddingTable::from_pairs(rows)?)
}

/// One sentence vector per line of every song.
pub fn sentence_vectors(corpus: &Corpus, cfg: &RunConfig, words: &WordEmbeddingTable) -> Result<Vec<Vec<Vec<f64>>>> {
    let pre;
    let mean = MeanWordEncoder::new(words);
    let enc: &dyn SentenceEncoder = match &cfg.sentences {
        Some(p) => {
            let (dim, rows) = vectors::read(p)?;
            pre = PrecomputedEncoder::new(VectorStore::from_pairs(dim, rows)?);
            &pre
        }
        None => &mean,
    };
    let out = corpus
        .songs
        .iter()
        .map(|s| s.lines.iter().map(|l| enc.encode(&s.id, l)).collect())
        .collect::<chorus_core::Result<_>>()?;
    Ok(out)
}

/// Everything the graphs are built from.
pub struct TextSide {
    pub word_vocab: WordVocab,
    pub word_table: WordEmbeddingTable,
    pub top_chords: BTreeSet<String>,
    pub base: Vec<Vec<Vec<f64>>>,
}

impl TextSide {
    pub fn build(corpus: &Corpus, train: &Corpus, cfg: &RunConfig) -> Result<Self> {
        let word_table = load_word_table(corpus, cfg)?;
        let (word_vocab, _) = build_vocab(train)?;
        let base = sentence_vectors(corpus, cfg, &word_table)?;
        Ok(Self {
            word_vocab,
            word_table,
            top_chords: top_chords(train, TOP_CHORD_COUNT),
            base,
        })
    }

    pub fn sentence_dim(&self) -> usize {
        self.base.iter().flatten().next().map_or(WORD_DIM, Vec::len)
    }

    pub fn graphs(&self, corpus: &Corpus, chords: &ChordEmbeddingTable) -> Result<Vec<HeteroGraph>> {
        let inputs = GraphInputs {
            word_vocab: &self.word_vocab,
            word_table: &self.word_table,
            top_chords: &self.top_chords,
            chord_table: chords,
        };
        let graphs = corpus
            .songs
            .par_iter()
            .zip(&self.base)
            .map(|(s, b)| build_graph(s, inputs, b))
            .collect::<chorus_core::Result<_>>()?;
        Ok(graphs)
    }
}

fn in_split<'a, T>(corpus: &'a Corpus, items: &'a [T], split: Split) -> impl Iterator<Item = &'a T> {
    corpus
        .songs
        .iter()
        .zip(items)
        .filter(move |(s, _)| corpus.split.get(&s.id) == Some(&split))
        .map(|(_, x)| x)
}

/// Next-line pre-training on the train-split graphs. The result is rounded
/// to `f32` so that it matches what a snapshot reads back.
pub fn pretrain_gat(
    corpus: &Corpus,
    graphs: &[HeteroGraph],
    sentence_dim: usize,
    cfg: &RunConfig,
) -> Result<(GatParams, PretrainReport)> {
    let train: Vec<HeteroGraph> = in_split(corpus, graphs, Split::Train).cloned().collect();
    let gcfg = GatConfig {
        sentence_dim,
        ..cfg.gat
    };
    let params = GatParams::init(gcfg, cfg.seed)?;
    let pcfg = PretrainConfig {
        seed: cfg.seed,
        ..cfg.pretrain
    };
    let (params, report) = pretrain_next_line(&train, params, &pcfg)?;
    Ok((hgat_file::round_to_f32(&params), report))
}

/// Fitted, flattened MFCC block of every line. Lines without usable audio
/// get zeros.
pub fn song_mfcc(song: &Song, cfg: &MfccConfig) -> Result<Vec<Vec<f32>>> {
    let zeros = || vec![0.0f32; MFCC_BLOCK];
    let Some(audio) = &song.audio else {
        return Ok(song.lines.iter().map(|_| zeros()).collect());
    };
    song.lines
        .iter()
        .map(|l| {
            let m = slice_line_audio(audio, l).and_then(|w| {
                let w = if w.sample_rate == CANONICAL_RATE { w } else { resample_linear(&w, CANONICAL_RATE) };
                compute_mfcc(&w, cfg)
            });
            match m {
                Ok(m) => Ok(fit_frames(&m, TARGET_FRAMES).as_slice().iter().map(|&v| v as f32).collect()),
                Err(chorus_core::Error::EmptySpan { .. } | chorus_core::Error::TooShort { .. }) => Ok(zeros()),
                Err(e) => Err(e.into()),
            }
        })
        .collect()
}

pub fn corpus_mfcc(corpus: &Corpus, cfg: &MfccConfig) -> Result<Vec<Vec<Vec<f32>>>> {
    corpus.songs.par_iter().map(|s| song_mfcc(s, cfg)).collect()
}

/// Fused-feature inputs of every line of every song.
pub fn line_features(
    corpus: &Corpus,
    lyrics: &[Matrix],
    mfcc: Vec<Vec<Vec<f32>>>,
    chords: &ChordEmbeddingTable,
) -> Vec<Vec<LineFeatures>> {
    corpus
        .songs
        .iter()
        .zip(lyrics)
        .zip(mfcc)
        .map(|((song, lyr), mf)| {
            mf.into_iter()
                .enumerate()
                .map(|(i, m)| {
                    let names: Vec<String> = song.line_chords(i).iter().map(|c| c.name()).collect();
                    LineFeatures {
                        lyric: lyr.row(i).to_vec(),
                        mfcc: m,
                        chord: chord_feature(&names, chords, MAX_LINE_CHORDS),
                    }
                })
                .collect()
        })
        .collect()
}

/// Outcome of one supervised system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRun {
    pub name: String,
    pub test: Metrics,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub warnings: Vec<String>,
}

/// A trained classifier with its input transform and predictions over the
/// whole corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Fitted {
    pub run: SystemRun,
    pub model: FusionClassifier,
    pub standardizer: Option<Standardizer>,
    pub predictions: Vec<Prediction>,
}

fn require_labels(corpus: &Corpus) -> Result<()> {
    match corpus.songs.iter().find(|s| !s.is_labeled()) {
        Some(s) => Err(Error::Core(chorus_core::Error::Insufficient(format!(
            "song `{}` has unlabeled lines",
            s.id
        )))),
        None => Ok(()),
    }
}

/// Grid-searched classifier over rows produced by `row(song, line)`.
pub fn fit_system<F>(name: &str, corpus: &Corpus, dim: usize, cfg: &RunConfig, row: F) -> Result<Fitted>
where
    F: Fn(usize, usize) -> Result<Vec<f64>>,
{
    require_labels(corpus)?;
    let splits = [Split::Train, Split::Validation, Split::Test];
    let mut data: Vec<Dataset> = splits.iter().map(|_| Dataset::new(dim)).collect();
    let mut keys: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 3];
    for (si, song) in corpus.songs.iter().enumerate() {
        let Some(k) = corpus.split.get(&song.id).and_then(|s| splits.iter().position(|x| x == s)) else {
            continue;
        };
        for (li, line) in song.lines.iter().enumerate() {
            data[k].push(&row(si, li)?, line.label == Some(true))?;
            keys[k].push((si, li));
        }
    }
    let standardizer = if cfg.train.standardize {
        let s = Standardizer::fit(&data[0])?;
        for d in &mut data {
            d.standardize(&s)?;
        }
        Some(s)
    } else {
        None
    };
    let grid = grid_search(&data[0], &data[1], &cfg.train)?;
    for w in &grid.warnings {
        note(format!("{name}: {w}"));
    }
    let mut preds: Vec<(usize, usize, f64)> = Vec::with_capacity(corpus.line_count());
    let mut test = None;
    for (k, d) in data.iter().enumerate() {
        let probs = grid.model.probabilities(d);
        if k == 2 {
            test = Some(evaluate(&hard_labels(&probs), d.labels())?);
        }
        preds.extend(keys[k].iter().zip(probs).map(|(&(s, l), p)| (s, l, p)));
    }
    preds.sort_by_key(|&(s, l, _)| (s, l));
    let predictions = preds
        .into_iter()
        .map(|(s, l, p)| Prediction {
            song_id: corpus.songs[s].id.clone(),
            line: l,
            probability: p,
            label: p >= chorus_core::mmcr::THRESHOLD,
        })
        .collect();
    Ok(Fitted {
        run: SystemRun {
            name: name.to_string(),
            test: test.expect("three splits"),
            lr: Some(grid.lr),
            epochs: Some(grid.epochs),
            warnings: grid.warnings,
        },
        model: grid.model,
        standardizer,
        predictions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    TextRank,
    PacSum,
}

impl Baseline {
    pub const ALL: [Baseline; 2] = [Baseline::TextRank, Baseline::PacSum];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::TextRank => "TextRank",
            Baseline::PacSum => "PacSum",
        }
    }
}

/// Top-K labels on the test split, K being each song's true chorus count.
/// Probabilities are the per-song scores min-max scaled to [0, 1].
pub fn run_baseline(corpus: &Corpus, base: &[Vec<Vec<f64>>], which: Baseline) -> Result<(SystemRun, Vec<Prediction>)> {
    require_labels(corpus)?;
    let mut preds = Vec::new();
    let mut labels = Vec::new();
    for (song, vecs) in corpus.songs.iter().zip(base) {
        if corpus.split.get(&song.id) != Some(&Split::Test) {
            continue;
        }
        let scores = match which {
            Baseline::TextRank => textrank(vecs),
            Baseline::PacSum => pacsum(vecs, &PacSumConfig::default()),
        };
        let picked = select_top_k(&scores, song.chorus_count())?;
        let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (i, (&s, &y)) in scores.iter().zip(&picked).enumerate() {
            let p = if hi > lo { (s - lo) / (hi - lo) } else { 0.5 };
            preds.push(Prediction {
                song_id: song.id.clone(),
                line: i,
                probability: p,
                label: y,
            });
        }
        labels.extend(song.labels());
    }
    let hard: Vec<bool> = preds.iter().map(|p| p.label).collect();
    let run = SystemRun {
        name: which.name().to_string(),
        test: evaluate(&hard, &labels)?,
        lr: None,
        epochs: None,
        warnings: Vec::new(),
    };
    Ok((run, preds))
}

/// Everything a training run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    /// MMCR first, then the other systems.
    pub systems: Vec<SystemRun>,
    pub mmcr: Fitted,
    pub baselines: Vec<(Baseline, Vec<Prediction>)>,
    pub gat: GatParams,
    pub chords: ChordEmbeddingTable,
    pub pretrain: Option<PretrainReport>,
    pub skipgram: Option<SkipGramReport>,
}

impl Experiment {
    pub fn system(&self, name: &str) -> Option<&SystemRun> {
        self.systems.iter().find(|s| s.name == name)
    }
}

/// Pre-built pieces that replace the corresponding training stage.
#[derive(Debug, Clone, Default)]
pub struct Reuse {
    pub chords: Option<ChordEmbeddingTable>,
    pub gat: Option<GatParams>,
}

/// Full training run on a split corpus.
pub fn run_experiment(corpus: &Corpus, cfg: &RunConfig, reuse: Reuse) -> Result<Experiment> {
    if corpus.split.is_empty() {
        return Err(Error::Usage("corpus has no split assigned".into()));
    }
    let train = train_subset(corpus);
    let (chords, skipgram) = match reuse.chords {
        Some(t) => (t, None),
        None => {
            let (t, r) = train_chord_table(&train, cfg)?;
            note(format!("chordvec: {} symbols, {} pairs per epoch", t.vocab().len(), r.pairs_per_epoch));
            (t, Some(r))
        }
    };
    let text = TextSide::build(corpus, &train, cfg)?;
    let graphs = text.graphs(corpus, &chords)?;
    let (gat, pretrain) = match reuse.gat {
        Some(g) => {
            if g.config().sentence_dim != text.sentence_dim() {
                return Err(Error::Usage(format!(
                    "GAT expects {}-d sentence vectors, encoder gives {}",
                    g.config().sentence_dim,
                    text.sentence_dim()
                )));
            }
            (g, None)
        }
        None => {
            let (g, r) = pretrain_gat(corpus, &graphs, text.sentence_dim(), cfg)?;
            note(format!("hgat: next-line loss per epoch {:?}", r.epoch_losses));
            (g, Some(r))
        }
    };
    let frozen: FrozenGat = freeze(gat);
    let lyrics: Vec<Matrix> = graphs
        .par_iter()
        .map(|g| frozen.propagate(g).map(|p| p.lines))
        .collect::<chorus_core::Result<_>>()?;
    drop(graphs);
    let mfcc = corpus_mfcc(corpus, &cfg.mfcc)?;
    let feats = line_features(corpus, &lyrics, mfcc, &chords);
    let d_h = cfg.gat.hidden;

    let fused = |set: ModalitySet| {
        let probe = LineFeatures {
            lyric: vec![0.0; d_h],
            mfcc: vec![0.0; MFCC_BLOCK],
            chord: vec![0.0; MAX_LINE_CHORDS * CHORD_DIM],
        };
        let dim = probe.fused(set, cfg.mfcc_mode).map(|r| r.len());
        let feats = &feats;
        (dim, move |s: usize, l: usize| Ok(feats[s][l].fused(set, cfg.mfcc_mode)?))
    };

    let (dim, row) = fused(ModalitySet::ALL);
    let mmcr = fit_system("MMCR", corpus, dim?, cfg, row)?;
    note(format!("MMCR: test F1 {:.4}", mmcr.run.test.f1));
    let mut systems = vec![mmcr.run.clone()];

    if cfg.ablation {
        for (name, set) in [
            ("lyrics-only", ModalitySet::only(chorus_core::mmcr::Modality::Lyrics)),
            ("MFCC-only", ModalitySet::only(chorus_core::mmcr::Modality::Mfcc)),
            ("chord-only", ModalitySet::only(chorus_core::mmcr::Modality::Chord)),
        ] {
            let (dim, row) = fused(set);
            let f = fit_system(name, corpus, dim?, cfg, row)?;
            note(format!("{name}: test F1 {:.4}", f.run.test.f1));
            systems.push(f.run);
        }
        let base = &text.base;
        let ext = fit_system("Ext", corpus, text.sentence_dim(), cfg, |s, l| Ok(base[s][l].clone()))?;
        note(format!("Ext: test F1 {:.4}", ext.run.test.f1));
        systems.push(ext.run);
    }

    let mut baselines = Vec::new();
    for b in Baseline::ALL {
        let (run, preds) = run_baseline(corpus, &text.base, b)?;
        note(format!("{}: test F1 {:.4}", run.name, run.test.f1));
        systems.push(run);
        baselines.push((b, preds));
    }

    Ok(Experiment {
        systems,
        mmcr,
        baselines,
        gat: frozen.unfreeze(),
        chords,
        pretrain,
        skipgram,
    })
}

pub const CHORDS_FILE: &str = "chords.vec";
pub const GAT_FILE: &str = "gat.hgat";
pub const CLASSIFIER_FILE: &str = "classifier.vec";
pub const PREDICTIONS_FILE: &str = "predictions.tsv";
pub const METRICS_FILE: &str = "metrics.tsv";
pub const INDEX_FILE: &str = "index.ngx";
pub const QUERIES_FILE: &str = "queries.tsv";

pub fn baseline_predictions_file(b: Baseline) -> String {
    format!("predictions-{}.tsv", b.name().to_lowercase())
}

/// Classifier rows: `weight`, `mean`, `std` (identity when training ran
/// unstandardized) and `bias` carrying the bias in its first slot.
pub fn classifier_rows(model: &FusionClassifier, s: Option<&Standardizer>) -> vectors::KeyedVectors {
    let d = model.dim();
    let mut bias = vec![0.0; d];
    if let Some(b) = bias.first_mut() {
        *b = model.bias;
    }
    vec![
        ("weight".into(), model.weights.clone()),
        ("mean".into(), s.map_or(vec![0.0; d], |s| s.mean().to_vec())),
        ("std".into(), s.map_or(vec![1.0; d], |s| s.std().to_vec())),
        ("bias".into(), bias),
    ]
}

pub fn render_metrics(systems: &[SystemRun]) -> String {
    let mut out = String::from(tsv::METRICS_HEADER);
    out.push('\n');
    for s in systems {
        out.push_str(&tsv::metrics_row(&s.name, &s.test));
        out.push('\n');
    }
    out
}

/// Writes models, predictions and the metrics report under `out`.
pub fn write_experiment(out: &std::path::Path, e: &Experiment) -> Result<()> {
    write_chord_table(&out.join(CHORDS_FILE), &e.chords)?;
    hgat_file::write(&out.join(GAT_FILE), &e.gat)?;
    let rows = classifier_rows(&e.mmcr.model, e.mmcr.standardizer.as_ref());
    vectors::write(
        &out.join(CLASSIFIER_FILE),
        e.mmcr.model.dim(),
        rows.iter().map(|(k, v)| (k.as_str(), v.as_slice())),
    )?;
    tsv::write_predictions(&out.join(PREDICTIONS_FILE), &e.mmcr.predictions)?;
    for (b, preds) in &e.baselines {
        tsv::write_predictions(&out.join(baseline_predictions_file(*b)), preds)?;
    }
    write_atomic(&out.join(METRICS_FILE), render_metrics(&e.systems).as_bytes())
}

/// Search queries whose ground truth comes from the chorus labels rather
/// than any model's predictions.
pub fn label_queries(corpus: &Corpus, per_song: usize, seed: u64) -> Result<Vec<SearchQuery>> {
    require_labels(corpus)?;
    let truth: Vec<Prediction> = corpus
        .songs
        .iter()
        .flat_map(|s| {
            s.lines.iter().map(|l| Prediction {
                song_id: s.id.clone(),
                line: l.index,
                probability: if l.label == Some(true) { 1.0 } else { 0.0 },
                label: l.label == Some(true),
            })
        })
        .collect();
    let index = build_index(corpus, &truth)?;
    Ok(generate_queries(&index, per_song, seed))
}

/// Per-song index parts built in parallel, then merged.
pub fn build_search_index(corpus: &Corpus, predictions: &[Prediction]) -> Result<NGramIndex> {
    let by_key: BTreeMap<(&str, usize), f64> = predictions
        .iter()
        .map(|p| ((p.song_id.as_str(), p.line), p.probability))
        .collect();
    let parts = corpus
        .songs
        .par_iter()
        .map(|s| {
            let probs = s
                .lines
                .iter()
                .map(|l| {
                    by_key.get(&(s.id.as_str(), l.index)).copied().ok_or_else(|| {
                        chorus_core::Error::MissingPrediction {
                            song: s.id.clone(),
                            line: l.index,
                        }
                    })
                })
                .collect::<chorus_core::Result<Vec<f64>>>()?;
            index_song(s, &probs)
        })
        .collect::<chorus_core::Result<Vec<_>>>()?;
    Ok(NGramIndex::merge(parts)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchComparison {
    pub chorus: SearchEvalReport,
    pub tfidf: SearchEvalReport,
}

pub fn compare_search(index: &NGramIndex, queries: &[SearchQuery]) -> Result<SearchComparison> {
    Ok(SearchComparison {
        chorus: eval_hits(index, queries, SearchMethod::Chorus)?,
        tfidf: eval_hits(index, queries, SearchMethod::Tfidf)?,
    })
}
