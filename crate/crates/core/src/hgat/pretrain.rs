use alloc::vec::Vec;

use super::graph::HeteroGraph;
use super::params::{GatParams, ParamVars};
use super::propagate::forward;
use crate::autograd::{Adam, AdamConfig, Matrix, Tape, Var};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// A scored line pair `(a, b)` with target 1 when `b` follows `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePair {
    pub first: usize,
    pub second: usize,
    pub target: f64,
}

/// Every successor pair of the song plus one negative per positive, drawn
/// uniformly among the lines other than the successor.
pub fn next_line_pairs(lines: usize, rng: &mut SeededRng) -> Vec<LinePair> {
    let mut out = Vec::new();
    if lines < 2 {
        return out;
    }
    for i in 0..lines - 1 {
        out.push(LinePair {
            first: i,
            second: i + 1,
            target: 1.0,
        });
        let mut r = rng.below(lines - 1);
        if r > i {
            r += 1;
        }
        out.push(LinePair {
            first: i,
            second: r,
            target: 0.0,
        });
    }
    out
}

/// Records the mean logistic loss of the bilinear next-line scorer.
pub fn next_line_loss_on_tape(
    tape: &mut Tape,
    graph: &HeteroGraph,
    params: &GatParams,
    vars: &ParamVars,
    pairs: &[LinePair],
) -> Result<Var> {
    if pairs.is_empty() {
        return Err(Error::Insufficient("no line pairs to score".into()));
    }
    let f = forward(tape, graph, params, vars)?;
    let a: Vec<usize> = pairs.iter().map(|p| p.first).collect();
    let b: Vec<usize> = pairs.iter().map(|p| p.second).collect();
    let t: Vec<f64> = pairs.iter().map(|p| p.target).collect();
    let la = tape.gather_rows(f.lines, &a)?;
    let lb = tape.gather_rows(f.lines, &b)?;
    let proj = tape.matmul(la, vars.var(params, "scorer.bilinear"))?;
    let logits = tape.row_dot(proj, lb)?;
    tape.bce_with_logits(logits, &t)
}

/// Loss and per-tensor gradients (zeros for tensors the loss ignores).
pub fn next_line_gradients(graph: &HeteroGraph, params: &GatParams, pairs: &[LinePair]) -> Result<(f64, Vec<Matrix>)> {
    let mut tape = Tape::new();
    let vars = params.on_tape(&mut tape);
    let loss = next_line_loss_on_tape(&mut tape, graph, params, &vars, pairs)?;
    let grads = tape.backward(loss);
    let per_tensor = params
        .tensors()
        .iter()
        .zip(vars.vars())
        .map(|((_, m), v)| grads.get(*v).cloned().unwrap_or_else(|| Matrix::zeros(m.rows(), m.cols())))
        .collect();
    Ok((tape.value(loss).data()[0], per_tensor))
}

pub fn next_line_loss(graph: &HeteroGraph, params: &GatParams, pairs: &[LinePair]) -> Result<f64> {
    let mut tape = Tape::new();
    let vars = params.on_tape(&mut tape);
    let loss = next_line_loss_on_tape(&mut tape, graph, params, &vars, pairs)?;
    Ok(tape.value(loss).data()[0])
}

/// Pair-weighted mean loss over all songs with a fixed pair sample.
pub fn mean_next_line_loss(graphs: &[HeteroGraph], params: &GatParams, seed: u64) -> Result<f64> {
    let mut rng = SeededRng::derive(seed, 0x9e1);
    let (mut total, mut n) = (0.0, 0usize);
    for g in graphs {
        let pairs = next_line_pairs(g.line_count(), &mut rng);
        if pairs.is_empty() {
            continue;
        }
        total += next_line_loss(g, params, &pairs)? * pairs.len() as f64;
        n += pairs.len();
    }
    if n == 0 {
        return Err(Error::Insufficient("no song has two or more lines".into()));
    }
    Ok(total / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            epochs: 3,
            lr: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrainReport {
    /// Pair-weighted mean training loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub positives_per_epoch: usize,
    pub negatives_per_epoch: usize,
}

/// Next-line pre-training with one Adam step per song. Song order and
/// negatives are redrawn every epoch from the seed.
pub fn pretrain_next_line(
    graphs: &[HeteroGraph],
    mut params: GatParams,
    cfg: &PretrainConfig,
) -> Result<(GatParams, PretrainReport)> {
    if cfg.epochs == 0 || !(cfg.lr > 0.0) {
        return Err(Error::Config("pre-training needs epochs >= 1 and lr > 0".into()));
    }
    let sizes: Vec<usize> = params.tensors().iter().map(|(_, m)| m.data().len()).collect();
    let mut opt = Adam::new(AdamConfig::with_lr(cfg.lr), &sizes);
    let mut rng = SeededRng::derive(cfg.seed, 0x9e7);
    let mut report = PretrainReport {
        epoch_losses: Vec::with_capacity(cfg.epochs),
        positives_per_epoch: 0,
        negatives_per_epoch: 0,
    };
    for _ in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..graphs.len()).collect();
        rng.shuffle(&mut order);
        let (mut total, mut n, mut pos) = (0.0, 0usize, 0usize);
        for &gi in &order {
            let pairs = next_line_pairs(graphs[gi].line_count(), &mut rng);
            if pairs.is_empty() {
                continue;
            }
            let (loss, grads) = next_line_gradients(&graphs[gi], &params, &pairs)?;
            total += loss * pairs.len() as f64;
            n += pairs.len();
            pos += pairs.iter().filter(|p| p.target > 0.5).count();
            opt.begin_step();
            for (i, g) in grads.iter().enumerate() {
                opt.update(i, params.tensor_mut(i).data_mut(), g.data());
            }
        }
        if n == 0 {
            return Err(Error::Insufficient("no song has two or more lines".into()));
        }
        report.epoch_losses.push(total / n as f64);
        report.positives_per_epoch = pos;
        report.negatives_per_epoch = n - pos;
    }
    Ok((params, report))
}
