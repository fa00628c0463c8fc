//! Run configuration: a `key = value` text file with `#` comments. Flags
//! given on the command line are applied afterwards and win.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use chorus_core::chordvec::{SkipGramConfig, DEFAULT_VOCAB_SIZE};
use chorus_core::dsp::MfccConfig;
use chorus_core::hgat::{GatConfig, PretrainConfig};
use chorus_core::mmcr::{MfccMode, TrainConfig};

use crate::formats::read_text;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub chords: Option<PathBuf>,
    /// 300-d word vectors; defaults to `words.vec` in the corpus.
    pub embeddings: Option<PathBuf>,
    /// Precomputed sentence vectors keyed `song_id:line_index`. When unset
    /// the mean-word encoder is used.
    pub sentences: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    pub mfcc: MfccConfig,
    pub mfcc_mode: MfccMode,
    pub skipgram: SkipGramConfig,
    pub chord_vocab: usize,
    pub train: TrainConfig,
    /// Hidden width, heads, edge width and FFN width; the sentence width
    /// comes from the encoder.
    pub gat: GatConfig,
    pub pretrain: PretrainConfig,
    /// Also train the single-modality and lyrics-encoder-only systems.
    pub ablation: bool,
    pub queries_per_song: usize,
    pub top: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            labels: None,
            chords: None,
            embeddings: None,
            sentences: None,
            out: PathBuf::from("out"),
            seed: 0,
            jobs: 1,
            mfcc: MfccConfig::default(),
            mfcc_mode: MfccMode::Flatten,
            skipgram: SkipGramConfig::default(),
            chord_vocab: DEFAULT_VOCAB_SIZE,
            train: TrainConfig::default(),
            gat: GatConfig::new(0),
            pretrain: PretrainConfig::default(),
            ablation: true,
            queries_per_song: 2,
            top: 10,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Usage(format!("config key `{key}`: cannot parse `{raw}`")))
}

fn list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',').map(|v| value(key, v.trim())).collect()
}

fn flag(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Usage(format!("config key `{key}`: expected a boolean, got `{raw}`"))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let path = || Some(PathBuf::from(raw));
        match key {
            "corpus" => self.corpus = path(),
            "labels" => self.labels = path(),
            "chords" => self.chords = path(),
            "embeddings" => self.embeddings = path(),
            "sentences" => self.sentences = path(),
            "out" => self.out = PathBuf::from(raw),
            "seed" => self.seed = value(key, raw)?,
            "jobs" => self.jobs = value(key, raw)?,
            "mfcc.frame_ms" => self.mfcc.frame_ms = value(key, raw)?,
            "mfcc.hop_ms" => self.mfcc.hop_ms = value(key, raw)?,
            "mfcc.pre_emphasis" => self.mfcc.pre_emphasis = value(key, raw)?,
            "mfcc.n_fft" => self.mfcc.n_fft = value(key, raw)?,
            "mfcc.n_mels" => self.mfcc.n_mels = value(key, raw)?,
            "mfcc.fmin" => self.mfcc.fmin = value(key, raw)?,
            "mfcc.fmax" => self.mfcc.fmax = Some(value(key, raw)?),
            "mfcc.mode" => {
                self.mfcc_mode = match raw {
                    "flatten" => MfccMode::Flatten,
                    "mean" => MfccMode::MeanPool,
                    _ => return Err(Error::Usage(format!("mfcc.mode must be `flatten` or `mean`, got `{raw}`"))),
                }
            }
            "skipgram.window" => self.skipgram.window = value(key, raw)?,
            "skipgram.negatives" => self.skipgram.negatives = value(key, raw)?,
            "skipgram.lr" => self.skipgram.lr = value(key, raw)?,
            "skipgram.epochs" => self.skipgram.epochs = value(key, raw)?,
            "skipgram.vocab_size" => self.chord_vocab = value(key, raw)?,
            "train.learning_rates" => self.train.learning_rates = list(key, raw)?,
            "train.epochs" => self.train.epochs = list(key, raw)?,
            "train.batch_size" => self.train.batch_size = value(key, raw)?,
            "train.standardize" => self.train.standardize = flag(key, raw)?,
            "hgat.hidden" => self.gat.hidden = value(key, raw)?,
            "hgat.heads" => self.gat.heads = value(key, raw)?,
            "hgat.edge_dim" => self.gat.edge_dim = value(key, raw)?,
            "hgat.ffn_dim" => self.gat.ffn_dim = value(key, raw)?,
            "hgat.pretrain_epochs" => self.pretrain.epochs = value(key, raw)?,
            "hgat.pretrain_lr" => self.pretrain.lr = value(key, raw)?,
            "mmcr.ablation" => self.ablation = flag(key, raw)?,
            "search.queries_per_song" => self.queries_per_song = value(key, raw)?,
            "search.top" => self.top = value(key, raw)?,
            _ => return Err(Error::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::Usage(format!("config file {} does not exist", path.display())));
        }
        Self::parse(&read_text(path)?)
    }

    /// Fixes the seed of every module to the global seed.
    pub fn seeded(mut self) -> Self {
        self.skipgram.seed = self.seed;
        self.train.seed = self.seed;
        self.pretrain.seed = self.seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |e: chorus_core::Error| Error::Usage(e.to_string());
        self.skipgram.validate().map_err(usage)?;
        self.train.validate().map_err(usage)?;
        GatConfig {
            sentence_dim: 1,
            ..self.gat
        }
        .validate()
        .map_err(usage)?;
        if self.jobs == 0 {
            return Err(Error::Usage("--jobs must be at least 1".into()));
        }
        if self.chord_vocab < 2 {
            return Err(Error::Usage("skipgram.vocab_size must be at least 2".into()));
        }
        for p in [&self.corpus, &self.labels, &self.chords, &self.embeddings, &self.sentences]
            .into_iter()
            .flatten()
        {
            if !p.exists() {
                return Err(Error::Usage(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }
}
