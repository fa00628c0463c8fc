use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::autograd::{Matrix, Tape, Var};
use crate::chordvec::CHORD_DIM;
use crate::rng::SeededRng;
use crate::textrep::WORD_DIM;
use crate::{Error, Result};

/// Propagation steps in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    WordToSentence,
    ChordToSentence,
    SentenceToWord,
    SentenceToChord,
}

impl Step {
    pub const ALL: [Step; 4] = [
        Step::WordToSentence,
        Step::ChordToSentence,
        Step::SentenceToWord,
        Step::SentenceToChord,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Step::WordToSentence => "word_to_sentence",
            Step::ChordToSentence => "chord_to_sentence",
            Step::SentenceToWord => "sentence_to_word",
            Step::SentenceToChord => "sentence_to_chord",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatConfig {
    pub sentence_dim: usize,
    pub hidden: usize,
    pub heads: usize,
    pub edge_dim: usize,
    pub ffn_dim: usize,
    pub leaky_slope: f64,
    /// Std of the bilinear next-line scorer at initialization.
    pub scorer_init: f64,
}

impl GatConfig {
    pub fn new(sentence_dim: usize) -> Self {
        Self {
            sentence_dim,
            hidden: 128,
            heads: 4,
            edge_dim: 16,
            ffn_dim: 512,
            leaky_slope: 0.2,
            scorer_init: 1e-4,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.hidden / self.heads
    }

    pub fn validate(&self) -> Result<()> {
        if self.heads == 0 || self.hidden == 0 || !self.hidden.is_multiple_of(self.heads) {
            return Err(Error::Config(format!(
                "hidden width {} must split evenly into {} heads",
                self.hidden, self.heads
            )));
        }
        if self.sentence_dim == 0 || self.edge_dim == 0 || self.ffn_dim == 0 {
            return Err(Error::Config("zero-sized GAT dimension".into()));
        }
        Ok(())
    }

    fn shapes(&self) -> Vec<(String, usize, usize)> {
        let (h, dk) = (self.hidden, self.head_dim());
        let mut out = Vec::new();
        for (ty, d) in [("sentence", self.sentence_dim), ("word", WORD_DIM), ("chord", CHORD_DIM)] {
            out.push((format!("adapt.{ty}.w"), d, h));
            out.push((format!("adapt.{ty}.b"), 1, h));
        }
        for step in Step::ALL {
            let s = step.name();
            for k in 0..self.heads {
                out.push((format!("{s}.head{k}.wq"), h, dk));
                out.push((format!("{s}.head{k}.wk"), h, dk));
                out.push((format!("{s}.head{k}.wv"), h, dk));
                out.push((format!("{s}.head{k}.a"), 2 * dk + self.edge_dim, 1));
            }
            out.push((format!("{s}.edge.w"), 1, self.edge_dim));
            out.push((format!("{s}.edge.b"), 1, self.edge_dim));
            out.push((format!("{s}.ffn.w1"), h, self.ffn_dim));
            out.push((format!("{s}.ffn.b1"), 1, self.ffn_dim));
            out.push((format!("{s}.ffn.w2"), self.ffn_dim, h));
            out.push((format!("{s}.ffn.b2"), 1, h));
        }
        out.push(("scorer.bilinear".into(), h, h));
        out
    }
}

/// Named parameter tensors of the graph attention network.
#[derive(Debug, Clone, PartialEq)]
pub struct GatParams {
    config: GatConfig,
    tensors: Vec<(String, Matrix)>,
    index: BTreeMap<String, usize>,
}

impl GatParams {
    pub fn init(config: GatConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = SeededRng::derive(seed, 0x6a7);
        let tensors = config
            .shapes()
            .into_iter()
            .map(|(name, r, c)| {
                let m = if name == "scorer.bilinear" {
                    Matrix::normal(r, c, config.scorer_init, &mut rng)
                } else if r == 1 && !name.ends_with("edge.w") {
                    Matrix::zeros(r, c)
                } else {
                    Matrix::glorot(r, c, &mut rng)
                };
                (name, m)
            })
            .collect();
        Ok(Self::assemble(config, tensors))
    }

    fn assemble(config: GatConfig, tensors: Vec<(String, Matrix)>) -> Self {
        let index = tensors.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();
        Self { config, tensors, index }
    }

    /// Rebuilds parameters from named tensors, checking every expected
    /// tensor is present with the right shape.
    pub fn from_tensors(config: GatConfig, named: Vec<(String, Matrix)>) -> Result<Self> {
        config.validate()?;
        let mut by_name: BTreeMap<String, Matrix> = named.into_iter().collect();
        let mut tensors = Vec::new();
        for (name, r, c) in config.shapes() {
            let m = by_name
                .remove(&name)
                .ok_or_else(|| Error::Shape(format!("missing tensor `{name}`")))?;
            if m.shape() != (r, c) {
                return Err(Error::Shape(format!(
                    "tensor `{name}` is {}x{}, expected {r}x{c}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_finite() {
                return Err(Error::Shape(format!("tensor `{name}` is not finite")));
            }
            tensors.push((name, m));
        }
        if let Some(extra) = by_name.keys().next() {
            return Err(Error::Shape(format!("unexpected tensor `{extra}`")));
        }
        Ok(Self::assemble(config, tensors))
    }

    pub fn config(&self) -> &GatConfig {
        &self.config
    }

    pub fn tensors(&self) -> &[(String, Matrix)] {
        &self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.position(name).map(|i| &self.tensors[i].1)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Matrix> {
        self.position(name).map(move |i| &mut self.tensors[i].1)
    }

    pub fn tensor_mut(&mut self, i: usize) -> &mut Matrix {
        &mut self.tensors[i].1
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(|(_, m)| m.data().len()).sum()
    }

    /// FNV-1a over names and the bit patterns of all values.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for (name, m) in &self.tensors {
            eat(name.as_bytes());
            for v in m.data() {
                eat(&v.to_bits().to_le_bytes());
            }
        }
        h
    }

    /// Records every tensor as a leaf on `tape`.
    pub fn on_tape(&self, tape: &mut Tape) -> ParamVars {
        ParamVars {
            vars: self.tensors.iter().map(|(_, m)| tape.leaf(m.clone())).collect(),
        }
    }
}

/// Tape handles of a `GatParams`, in tensor order.
#[derive(Debug, Clone)]
pub struct ParamVars {
    vars: Vec<Var>,
}

impl ParamVars {
    pub fn var(&self, params: &GatParams, name: &str) -> Var {
        self.vars[params.position(name).expect("known tensor name")]
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}
