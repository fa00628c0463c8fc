use alloc::format;
use alloc::vec::Vec;

use super::graph::HeteroGraph;
use super::params::{GatParams, ParamVars, Step};
use crate::autograd::{Matrix, Tape, Var};
use crate::{math, Error, Result};

/// Sinusoidal positions: `sin(p / 10000^(2i/d))` on even columns and the
/// matching cosine on odd columns.
pub fn positional_encoding(positions: usize, dim: usize) -> Matrix {
    let mut m = Matrix::zeros(positions, dim);
    for p in 0..positions {
        for c in 0..dim {
            let pair = (c / 2 * 2) as f64;
            let angle = p as f64 / math::powf(10_000.0, pair / dim as f64);
            m.set(p, c, if c % 2 == 0 { math::sin(angle) } else { math::cos(angle) });
        }
    }
    m
}

/// One directed edge of an attention step: `target` attends to `source`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEdge {
    pub target: usize,
    pub source: usize,
    pub weight: f64,
}

/// Attention weights recorded for one step, one column vector per head,
/// aligned with `edges`.
#[derive(Debug, Clone)]
pub struct StepTrace {
    pub step: Step,
    pub edges: Vec<StepEdge>,
    pub heads: Vec<Var>,
}

/// Tape handles produced by a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Sentence states after the chord step.
    pub sentence_states: Var,
    /// Sentence states plus positional encoding.
    pub lines: Var,
    pub word_states: Var,
    pub chord_states: Var,
    pub traces: Vec<StepTrace>,
}

fn adapt(tape: &mut Tape, p: &GatParams, v: &ParamVars, ty: &str, x: &Matrix) -> Result<Var> {
    let x = tape.leaf(x.clone());
    let h = tape.matmul(x, v.var(p, &format!("adapt.{ty}.w")))?;
    tape.add_row(h, v.var(p, &format!("adapt.{ty}.b")))
}

/// One attention step with residual and feed-forward update. Targets
/// without incoming edges come out unchanged.
pub fn attend_on_tape(
    tape: &mut Tape,
    p: &GatParams,
    v: &ParamVars,
    step: Step,
    targets: Var,
    sources: Var,
    edges: &[StepEdge],
) -> Result<(Var, Option<StepTrace>)> {
    if edges.is_empty() {
        return Ok((targets, None));
    }
    let cfg = p.config();
    let n_t = tape.value(targets).rows();
    let n_s = tape.value(sources).rows();
    if tape.value(targets).cols() != cfg.hidden || tape.value(sources).cols() != cfg.hidden {
        return Err(Error::Shape(format!("{} expects width {}", step.name(), cfg.hidden)));
    }
    if edges.iter().any(|e| e.target >= n_t || e.source >= n_s) {
        return Err(Error::Shape(format!("{} edge out of range", step.name())));
    }
    let t_idx: Vec<usize> = edges.iter().map(|e| e.target).collect();
    let s_idx: Vec<usize> = edges.iter().map(|e| e.source).collect();
    let s = step.name();

    let w = tape.leaf(Matrix::column(edges.iter().map(|e| e.weight).collect()));
    let e_emb = tape.matmul(w, v.var(p, &format!("{s}.edge.w")))?;
    let e_emb = tape.add_row(e_emb, v.var(p, &format!("{s}.edge.b")))?;

    let mut heads = Vec::with_capacity(cfg.heads);
    let mut alphas = Vec::with_capacity(cfg.heads);
    for k in 0..cfg.heads {
        let q = tape.matmul(targets, v.var(p, &format!("{s}.head{k}.wq")))?;
        let kk = tape.matmul(sources, v.var(p, &format!("{s}.head{k}.wk")))?;
        let val = tape.matmul(sources, v.var(p, &format!("{s}.head{k}.wv")))?;
        let qe = tape.gather_rows(q, &t_idx)?;
        let ke = tape.gather_rows(kk, &s_idx)?;
        let cat = tape.concat_cols(&[qe, ke, e_emb])?;
        let z = tape.matmul(cat, v.var(p, &format!("{s}.head{k}.a")))?;
        let z = tape.leaky_relu(z, cfg.leaky_slope);
        let alpha = tape.segment_softmax(z, &t_idx)?;
        let ve = tape.gather_rows(val, &s_idx)?;
        let msg = tape.scale_rows(ve, alpha)?;
        heads.push(tape.scatter_add_rows(msg, &t_idx, n_t)?);
        alphas.push(alpha);
    }
    let u = tape.concat_cols(&heads)?;
    let h1 = tape.add(targets, u)?;

    let mut has_edge = alloc::vec![false; n_t];
    for &t in &t_idx {
        has_edge[t] = true;
    }
    let f = tape.matmul(h1, v.var(p, &format!("{s}.ffn.w1")))?;
    let f = tape.add_row(f, v.var(p, &format!("{s}.ffn.b1")))?;
    let f = tape.relu(f);
    let f = tape.matmul(f, v.var(p, &format!("{s}.ffn.w2")))?;
    let f = tape.add_row(f, v.var(p, &format!("{s}.ffn.b2")))?;
    let f = tape.mask_rows(f, &has_edge)?;
    let out = tape.add(h1, f)?;
    Ok((
        out,
        Some(StepTrace {
            step,
            edges: edges.to_vec(),
            heads: alphas,
        }),
    ))
}

/// Adapters, then the four steps in order, then positions.
pub fn forward(tape: &mut Tape, graph: &HeteroGraph, p: &GatParams, v: &ParamVars) -> Result<ForwardPass> {
    graph.validate()?;
    if graph.sentence_dim() != p.config().sentence_dim {
        return Err(Error::Shape(format!(
            "sentence vectors have width {}, parameters expect {}",
            graph.sentence_dim(),
            p.config().sentence_dim
        )));
    }
    let s0 = adapt(tape, p, v, "sentence", &graph.sentences)?;
    let w0 = adapt(tape, p, v, "word", &graph.word_features)?;
    let c0 = adapt(tape, p, v, "chord", &graph.chord_features)?;

    let to_sentence = |edges: &[super::graph::Edge]| -> Vec<StepEdge> {
        edges
            .iter()
            .map(|e| StepEdge {
                target: e.sentence,
                source: e.node,
                weight: e.weight,
            })
            .collect()
    };
    let from_sentence = |edges: &[super::graph::Edge]| -> Vec<StepEdge> {
        edges
            .iter()
            .map(|e| StepEdge {
                target: e.node,
                source: e.sentence,
                weight: e.weight,
            })
            .collect()
    };

    let mut traces = Vec::new();
    let (s1, t) = attend_on_tape(tape, p, v, Step::WordToSentence, s0, w0, &to_sentence(&graph.word_edges))?;
    traces.extend(t);
    let (s2, t) = attend_on_tape(tape, p, v, Step::ChordToSentence, s1, c0, &to_sentence(&graph.chord_edges))?;
    traces.extend(t);
    let (w1, t) = attend_on_tape(tape, p, v, Step::SentenceToWord, w0, s2, &from_sentence(&graph.word_edges))?;
    traces.extend(t);
    let (c1, t) = attend_on_tape(tape, p, v, Step::SentenceToChord, c0, s2, &from_sentence(&graph.chord_edges))?;
    traces.extend(t);

    let pe = positional_encoding(graph.line_count(), p.config().hidden);
    let lines = tape.add_const(s2, &pe)?;
    Ok(ForwardPass {
        sentence_states: s2,
        lines,
        word_states: w1,
        chord_states: c1,
        traces,
    })
}

/// Attention weights of one step: per head, one weight per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    pub step: Step,
    pub edges: Vec<StepEdge>,
    pub heads: Vec<Vec<f64>>,
}

/// Result of running the network on one song.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagated {
    /// Sentence states after the chord step.
    pub hg: Matrix,
    /// `hg` plus positional encoding; one row per line.
    pub lines: Matrix,
    pub words: Matrix,
    pub chords: Matrix,
    pub attention: Vec<AttentionWeights>,
}

fn collect_traces(tape: &Tape, traces: &[StepTrace]) -> Vec<AttentionWeights> {
    traces
        .iter()
        .map(|t| AttentionWeights {
            step: t.step,
            edges: t.edges.clone(),
            heads: t.heads.iter().map(|h| tape.value(*h).data().to_vec()).collect(),
        })
        .collect()
}

pub fn propagate(graph: &HeteroGraph, params: &GatParams) -> Result<Propagated> {
    let mut tape = Tape::new();
    let vars = params.on_tape(&mut tape);
    let f = forward(&mut tape, graph, params, &vars)?;
    Ok(Propagated {
        hg: tape.value(f.sentence_states).clone(),
        lines: tape.value(f.lines).clone(),
        words: tape.value(f.word_states).clone(),
        chords: tape.value(f.chord_states).clone(),
        attention: collect_traces(&tape, &f.traces),
    })
}

/// Runs a single step on explicit hidden-width states.
pub fn gat_attend(
    params: &GatParams,
    step: Step,
    targets: &Matrix,
    sources: &Matrix,
    edges: &[StepEdge],
) -> Result<(Matrix, Vec<Vec<f64>>)> {
    let mut tape = Tape::new();
    let vars = params.on_tape(&mut tape);
    let t = tape.leaf(targets.clone());
    let s = tape.leaf(sources.clone());
    let (out, trace) = attend_on_tape(&mut tape, params, &vars, step, t, s, edges)?;
    let heads = trace
        .map(|tr| tr.heads.iter().map(|h| tape.value(*h).data().to_vec()).collect())
        .unwrap_or_default();
    Ok((tape.value(out).clone(), heads))
}
