use alloc::vec;
use alloc::vec::Vec;

use super::classifier::FusionClassifier;
use super::fusion::{fused_dim, Standardizer, CHORD_BLOCK, MFCC_BLOCK};
use crate::autograd::{Adam, AdamConfig, Matrix, Tape};
use crate::chordvec::{chord_feature, ChordEmbeddingTable, CHORD_DIM, MAX_LINE_CHORDS};
use crate::hgat::{forward, propagate, GatParams, HeteroGraph};
use crate::rng::SeededRng;
use crate::{math, Error, Result};

/// One song's inputs for end-to-end training.
#[derive(Debug, Clone, Copy)]
pub struct JointSong<'a> {
    pub graph: &'a HeteroGraph,
    /// One flattened fitted MFCC block per line.
    pub mfcc: &'a [Vec<f32>],
    /// Chord symbols per line.
    pub chords: &'a [Vec<alloc::string::String>],
    pub labels: &'a [bool],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConfig {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Update the graph attention parameters through the classifier loss.
    pub train_gat: bool,
    /// Update the chord embedding table through the classifier loss.
    pub train_chords: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    pub classifier: FusionClassifier,
    pub gat: GatParams,
    pub chords: ChordEmbeddingTable,
    pub epoch_losses: Vec<f64>,
}

impl JointModel {
    /// Standardized fused rows of a song under the current parameters.
    pub fn rows(&self, song: &JointSong<'_>, standardizer: &Standardizer) -> Result<Vec<Vec<f64>>> {
        let lines = propagate(song.graph, &self.gat)?.lines;
        (0..song.labels.len())
            .map(|i| {
                let raw = raw_row(lines.row(i), &song.mfcc[i], &chord_feature(&song.chords[i], &self.chords, MAX_LINE_CHORDS))?;
                Ok(standardizer.apply(&raw))
            })
            .collect()
    }
}

fn raw_row(lyric: &[f64], mfcc: &[f32], chord: &[f64]) -> Result<Vec<f64>> {
    if mfcc.len() != MFCC_BLOCK || chord.len() != CHORD_BLOCK {
        return Err(Error::Shape("joint song has malformed blocks".into()));
    }
    let mut row = Vec::with_capacity(lyric.len() + MFCC_BLOCK + CHORD_BLOCK);
    row.extend_from_slice(lyric);
    row.extend(mfcc.iter().map(|&v| f64::from(v)));
    row.extend_from_slice(chord);
    Ok(row)
}

/// One Adam step per song on the classifier, and optionally on the graph
/// attention parameters and chord table, under a fixed standardizer.
pub fn train_joint(
    songs: &[JointSong<'_>],
    gat: GatParams,
    chords: ChordEmbeddingTable,
    standardizer: &Standardizer,
    cfg: &JointConfig,
) -> Result<JointModel> {
    let d_h = gat.config().hidden;
    let dim = fused_dim(d_h);
    if standardizer.dim() != dim {
        return Err(Error::LengthMismatch {
            left: standardizer.dim(),
            right: dim,
        });
    }
    let mut model = JointModel {
        classifier: FusionClassifier::zeros(dim),
        gat,
        chords,
        epoch_losses: Vec::new(),
    };
    let gat_sizes: Vec<usize> = model.gat.tensors().iter().map(|(_, m)| m.data().len()).collect();
    let mut gat_opt = Adam::new(AdamConfig::with_lr(cfg.lr), &gat_sizes);
    let mut cls_opt = Adam::new(AdamConfig::with_lr(cfg.lr), &[dim, 1, model.chords.input().len()]);
    let mut rng = SeededRng::derive(cfg.seed, 0x101);
    let mut order: Vec<usize> = (0..songs.len()).collect();
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let (mut total, mut count) = (0.0, 0usize);
        for &si in &order {
            let song = &songs[si];
            let n = song.labels.len();
            if n == 0 {
                continue;
            }
            let mut tape = Tape::new();
            let vars = model.gat.on_tape(&mut tape);
            let pass = forward(&mut tape, song.graph, &model.gat, &vars)?;
            let lines = tape.value(pass.lines).clone();

            let mut gw = vec![0.0; dim];
            let mut gb = 0.0;
            let mut g_lines = Matrix::zeros(n, d_h);
            let mut g_table = vec![0.0; model.chords.input().len()];
            for i in 0..n {
                let cf = chord_feature(&song.chords[i], &model.chords, MAX_LINE_CHORDS);
                let x = standardizer.apply(&raw_row(lines.row(i), &song.mfcc[i], &cf)?);
                let z = model.classifier.bias + math::dot(&model.classifier.weights, &x);
                let y = if song.labels[i] { 1.0 } else { 0.0 };
                total += math::softplus(z) - y * z;
                let r = (math::sigmoid(z) - y) / n as f64;
                gb += r;
                for (g, v) in gw.iter_mut().zip(&x) {
                    *g += r * v;
                }
                // d loss / d raw = r * w / std on non-constant coordinates
                let raw_grad = |c: usize| {
                    let s = standardizer.std()[c];
                    if s > 0.0 {
                        r * model.classifier.weights[c] / s
                    } else {
                        0.0
                    }
                };
                for c in 0..d_h {
                    g_lines.set(i, c, raw_grad(c));
                }
                let off = d_h + MFCC_BLOCK;
                for (slot, sym) in song.chords[i].iter().take(MAX_LINE_CHORDS).enumerate() {
                    let id = model.chords.vocab().id(sym);
                    for k in 0..CHORD_DIM {
                        g_table[id * CHORD_DIM + k] += raw_grad(off + slot * CHORD_DIM + k);
                    }
                }
            }
            count += n;

            cls_opt.begin_step();
            if cfg.train_gat {
                let grads = tape.backward_with(pass.lines, g_lines);
                gat_opt.begin_step();
                for (ti, v) in vars.vars().iter().enumerate() {
                    if let Some(g) = grads.get(*v) {
                        gat_opt.update(ti, model.gat.tensor_mut(ti).data_mut(), g.data());
                    }
                }
            }
            if cfg.train_chords {
                let mut table = model.chords.input().to_vec();
                cls_opt.update(2, &mut table, &g_table);
                model.chords = ChordEmbeddingTable::from_input(model.chords.vocab().clone(), table)?;
            }
            cls_opt.update(0, &mut model.classifier.weights, &gw);
            let mut b = [model.classifier.bias];
            cls_opt.update(1, &mut b, &[gb]);
            model.classifier.bias = b[0];
        }
        model.epoch_losses.push(total / count.max(1) as f64);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordvec::ChordVocab;
    use crate::hgat::{random_graph, GatConfig};
    use crate::mmcr::fusion::Dataset;
    use alloc::string::{String, ToString};

    #[test]
    fn freeze_flags_control_updates() {
        let cfg = GatConfig {
            hidden: 8,
            heads: 2,
            edge_dim: 4,
            ffn_dim: 16,
            ..GatConfig::new(3)
        };
        let gat = GatParams::init(cfg, 1).unwrap();
        let table = ChordEmbeddingTable::init(ChordVocab::from_symbols(vec!["C".into(), "G".into()]).unwrap(), 2);
        let graph = (0..).map(|s| random_graph(s, 3)).find(|g| g.line_count() >= 3 && !g.word_edges.is_empty()).unwrap();
        let n = graph.line_count();
        let mut rng = SeededRng::new(4);
        let mfcc: Vec<Vec<f32>> = (0..n).map(|_| (0..MFCC_BLOCK).map(|_| rng.normal() as f32).collect()).collect();
        let chords: Vec<Vec<String>> = (0..n).map(|i| vec![if i % 2 == 0 { "C" } else { "G" }.to_string()]).collect();
        let labels: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        let song = JointSong {
            graph: &graph,
            mfcc: &mfcc,
            chords: &chords,
            labels: &labels,
        };
        let frozen = JointModel {
            classifier: FusionClassifier::zeros(fused_dim(8)),
            gat: gat.clone(),
            chords: table.clone(),
            epoch_losses: Vec::new(),
        };
        let mut d = Dataset::new(fused_dim(8));
        for row in frozen.rows(&song, &identity(fused_dim(8))).unwrap() {
            d.push(&row, false).unwrap();
        }
        let st = Standardizer::fit(&d).unwrap();
        let run = |train_gat, train_chords| {
            let c = JointConfig {
                lr: 1e-3,
                epochs: 2,
                seed: 0,
                train_gat,
                train_chords,
            };
            train_joint(&[song], gat.clone(), table.clone(), &st, &c).unwrap()
        };
        let off = run(false, false);
        assert_eq!(off.gat.fingerprint(), gat.fingerprint());
        assert_eq!(off.chords, table);
        let on = run(true, false);
        assert_ne!(on.gat.fingerprint(), gat.fingerprint());
        assert_eq!(on.chords, table);
        assert_ne!(run(false, true).chords, table);
    }

    /// Mean 0 and std 1 on every coordinate.
    fn identity(dim: usize) -> Standardizer {
        let mut d = Dataset::new(dim);
        d.push(&vec![-1.0; dim], false).unwrap();
        d.push(&vec![1.0; dim], true).unwrap();
        Standardizer::fit(&d).unwrap()
    }
}
