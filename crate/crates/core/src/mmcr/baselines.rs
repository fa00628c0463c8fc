use alloc::vec;
use alloc::vec::Vec;

use crate::{math, Error, Result};

pub const DAMPING: f64 = 0.85;
pub const TEXTRANK_TOL: f64 = 1e-8;
pub const TEXTRANK_MAX_ITERS: usize = 200;

/// Cosine similarity matrix with negatives clipped to 0 and a zero diagonal.
pub fn similarity_graph(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s = math::cosine(&vectors[i], &vectors[j]).max(0.0);
            w[i][j] = s;
            w[j][i] = s;
        }
    }
    w
}

/// Damped power iteration over the row-normalized similarity graph. Lines
/// without positive similarity spread their mass uniformly. Scores sum to 1.
pub fn textrank(vectors: &[Vec<f64>]) -> Vec<f64> {
    let n = vectors.len();
    if n == 0 {
        return Vec::new();
    }
    let w = similarity_graph(vectors);
    let out: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
    let mut s = vec![1.0 / n as f64; n];
    for _ in 0..TEXTRANK_MAX_ITERS {
        let dangling: f64 = (0..n).filter(|&j| out[j] == 0.0).map(|j| s[j]).sum::<f64>() / n as f64;
        let mut next = vec![0.0; n];
        for (i, v) in next.iter_mut().enumerate() {
            let mut acc = dangling;
            for j in 0..n {
                if out[j] > 0.0 {
                    acc += s[j] * w[j][i] / out[j];
                }
            }
            *v = (1.0 - DAMPING) / n as f64 + DAMPING * acc;
        }
        let delta = next.iter().zip(&s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        s = next;
        if delta < TEXTRANK_TOL {
            break;
        }
    }
    let total: f64 = s.iter().sum();
    s.iter().map(|v| v / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacSumConfig {
    /// Weight on similarities to preceding lines.
    pub lambda_preceding: f64,
    /// Weight on similarities to following lines.
    pub lambda_following: f64,
    pub beta: f64,
}

impl Default for PacSumConfig {
    fn default() -> Self {
        Self {
            lambda_preceding: -2.0,
            lambda_following: 1.0,
            beta: 0.6,
        }
    }
}

/// Directed centrality: similarities are shifted down by
/// `min + beta * (max - min)` over all pairs and clamped at 0, then summed
/// separately over preceding and following lines.
pub fn pacsum(vectors: &[Vec<f64>], cfg: &PacSumConfig) -> Vec<f64> {
    let n = vectors.len();
    let mut sim = vec![vec![0.0; n]; n];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            let s = math::cosine(&vectors[i], &vectors[j]);
            sim[i][j] = s;
            sim[j][i] = s;
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    if n < 2 {
        return vec![0.0; n];
    }
    let threshold = lo + cfg.beta * (hi - lo);
    (0..n)
        .map(|i| {
            let edge = |j: usize| (sim[i][j] - threshold).max(0.0);
            let before: f64 = (0..i).map(edge).sum();
            let after: f64 = (i + 1..n).map(edge).sum();
            cfg.lambda_preceding * before + cfg.lambda_following * after
        })
        .collect()
}

/// Marks the `k` highest scores; equal scores favor the earlier line.
pub fn select_top_k(scores: &[f64], k: usize) -> Result<Vec<bool>> {
    if k > scores.len() {
        return Err(Error::Config(alloc::format!("k = {k} exceeds {} lines", scores.len())));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut out = vec![false; scores.len()];
    for &i in &order[..k] {
        out[i] = true;
    }
    Ok(out)
}
