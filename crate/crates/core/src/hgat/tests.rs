use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::autograd::Matrix;
use crate::chordvec::{ChordEmbeddingTable, ChordVocab};
use crate::corpus::{LyricLine, Song};
use crate::dsp::ChordSymbol;
use crate::rng::SeededRng;
use crate::textrep::{WordEmbeddingTable, WordVocab, WORD_DIM};

fn small_config(sentence_dim: usize) -> GatConfig {
    GatConfig {
        hidden: 8,
        heads: 2,
        edge_dim: 4,
        ffn_dim: 16,
        ..GatConfig::new(sentence_dim)
    }
}

fn song(lines: &[&str], chords: Option<Vec<Vec<&str>>>) -> Song {
    let mut s = Song::new(
        "s",
        lines
            .iter()
            .enumerate()
            .map(|(i, t)| LyricLine {
                index: i,
                text: t.to_string(),
                start_ms: i as u64 * 1000,
                end_ms: i as u64 * 1000 + 1000,
                label: None,
            })
            .collect(),
    );
    s.chords = chords.map(|c| {
        c.iter()
            .map(|seq| seq.iter().map(|x| x.parse::<ChordSymbol>().unwrap()).collect())
            .collect()
    });
    s
}

struct Fixture {
    vocab: WordVocab,
    table: WordEmbeddingTable,
    top: BTreeSet<String>,
    chords: ChordEmbeddingTable,
}

impl Fixture {
    fn new(words: &[&str]) -> Self {
        let table = WordEmbeddingTable::from_pairs(
            words
                .iter()
                .enumerate()
                .map(|(i, w)| (w.to_string(), vec![i as f64 * 0.01; WORD_DIM]))
                .collect(),
        )
        .unwrap();
        let vocab = WordVocab::from_words(words.iter().map(|w| w.to_string()).collect());
        let cv = ChordVocab::from_symbols(vec!["C".into(), "G".into()]).unwrap();
        Self {
            vocab,
            table,
            top: ["C".to_string(), "G".to_string()].into_iter().collect(),
            chords: ChordEmbeddingTable::init(cv, 1),
        }
    }

    fn inputs(&self) -> GraphInputs<'_> {
        GraphInputs {
            word_vocab: &self.vocab,
            word_table: &self.table,
            top_chords: &self.top,
            chord_table: &self.chords,
        }
    }
}

fn base(n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..dim).map(|j| (i * dim + j) as f64 * 0.1).collect()).collect()
}

#[test]
fn containment_edges() {
    let fx = Fixture::new(&["a", "b", "c"]);
    let g = build_graph(&song(&["a b", "b c"], None), fx.inputs(), &base(2, 3)).unwrap();
    assert_eq!(g.words, ["a", "b", "c"]);
    assert_eq!(g.word_edges.len(), 4);
    assert!(g.chords.is_empty() && g.chord_edges.is_empty());
    // "b" is in both lines of the song, so its edges carry zero weight
    assert!(g.word_edges.iter().filter(|e| e.node == 1).all(|e| e.weight == 0.0));
}

#[test]
fn chord_edge_counts_repeats() {
    let fx = Fixture::new(&["a"]);
    let s = song(&["a", "a"], Some(vec![vec!["C", "C", "G"], vec!["G"]]));
    let g = build_graph(&s, fx.inputs(), &base(2, 3)).unwrap();
    assert_eq!(g.chords, ["C", "G"]);
    let c = g.chord_edges.iter().find(|e| e.sentence == 0 && e.node == 0).unwrap();
    assert!((c.weight - 2.0 * libm::log(2.0)).abs() < 1e-12);
    assert_eq!(g.chord_edges.len(), 3);
}

#[test]
fn out_of_vocab_words_are_not_nodes() {
    let fx = Fixture::new(&["a"]);
    let g = build_graph(&song(&["x y", "z"], None), fx.inputs(), &base(2, 3)).unwrap();
    assert!(g.words.is_empty());
    assert!(build_graph(&song(&["a"], None), fx.inputs(), &base(2, 3)).is_err());
}

fn head_edges(targets: &[usize], sources: &[usize]) -> Vec<StepEdge> {
    targets
        .iter()
        .zip(sources)
        .map(|(&t, &s)| StepEdge {
            target: t,
            source: s,
            weight: 1.0,
        })
        .collect()
}

#[test]
fn singleton_and_symmetric_attention() {
    let p = GatParams::init(small_config(3), 2).unwrap();
    let mut rng = SeededRng::new(3);
    let t = Matrix::normal(2, 8, 1.0, &mut rng);
    let row = Matrix::normal(1, 8, 1.0, &mut rng);
    let mut s = Matrix::zeros(3, 8);
    for r in 0..3 {
        s.row_mut(r).copy_from_slice(row.row(0));
    }
    let (_, heads) = gat_attend(&p, Step::WordToSentence, &t, &s, &head_edges(&[0, 1, 1], &[0, 1, 2])).unwrap();
    for h in heads {
        assert_eq!(h[0], 1.0);
        assert_eq!(h[1], 0.5);
        assert_eq!(h[2], 0.5);
    }
}

fn zero_values(p: &mut GatParams) {
    let names: Vec<String> = p
        .tensors()
        .iter()
        .map(|(n, _)| n.clone())
        .filter(|n| n.ends_with(".wv") || n.ends_with("ffn.w2") || n.ends_with("ffn.b2"))
        .collect();
    for n in names {
        p.get_mut(&n).unwrap().fill(0.0);
    }
}

#[test]
fn residual_identity_is_exact() {
    let mut p = GatParams::init(small_config(3), 4).unwrap();
    zero_values(&mut p);
    for seed in 0..20 {
        let g = random_graph(seed, 3);
        let out = propagate(&g, &p).unwrap();
        let mut tape = crate::autograd::Tape::new();
        let v = p.on_tape(&mut tape);
        let x = tape.leaf(g.sentences.clone());
        let h = tape.matmul(x, v.var(&p, "adapt.sentence.w")).unwrap();
        let h = tape.add_row(h, v.var(&p, "adapt.sentence.b")).unwrap();
        assert_eq!(&out.hg, tape.value(h));
    }
}

#[test]
fn attention_rows_sum_to_one() {
    let p = GatParams::init(small_config(4), 5).unwrap();
    for seed in 0..30 {
        let g = random_graph(seed, 4);
        for a in propagate(&g, &p).unwrap().attention {
            let n = a.edges.iter().map(|e| e.target + 1).max().unwrap();
            for h in &a.heads {
                let mut sums = vec![0.0; n];
                for (e, w) in a.edges.iter().zip(h) {
                    sums[e.target] += w;
                }
                for (t, s) in sums.iter().enumerate() {
                    if a.edges.iter().any(|e| e.target == t) {
                        assert!((s - 1.0).abs() < 1e-6);
                    }
                }
            }
        }
    }
}

#[test]
fn no_chords_means_chord_step_is_inert() {
    let mut g = random_graph(7, 3);
    g.chords.clear();
    g.chord_features = Matrix::zeros(0, crate::chordvec::CHORD_DIM);
    g.chord_edges.clear();
    let p = GatParams::init(small_config(3), 6).unwrap();
    let mut q = p.clone();
    for (name, _) in p.tensors() {
        if name.starts_with("chord_to_sentence") {
            q.get_mut(name).unwrap().fill(0.3);
        }
    }
    assert_eq!(propagate(&g, &p).unwrap().hg, propagate(&g, &q).unwrap().hg);
}

#[test]
fn word_order_does_not_matter() {
    let p = GatParams::init(small_config(3), 8).unwrap();
    for seed in 0..10 {
        let g = random_graph(100 + seed, 3);
        let n = g.words.len();
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut h = g.clone();
        for (new, &old) in perm.iter().enumerate() {
            h.words[new] = g.words[old].clone();
            h.word_features.row_mut(new).copy_from_slice(g.word_features.row(old));
        }
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        for e in &mut h.word_edges {
            e.node = inv[e.node];
        }
        h.word_edges.reverse();
        let (a, b) = (propagate(&g, &p).unwrap(), propagate(&h, &p).unwrap());
        for (x, y) in a.hg.data().iter().zip(b.hg.data()) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn first_position_is_sin_cos_pattern() {
    let pe = positional_encoding(3, 8);
    assert_eq!(pe.row(0), [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    assert!((pe.get(1, 0) - libm::sin(1.0)).abs() < 1e-15);
    assert!((pe.get(1, 3) - libm::cos(1.0 / libm::pow(10_000.0, 2.0 / 8.0))).abs() < 1e-15);
}

#[test]
fn pair_sampling_is_balanced() {
    let mut rng = SeededRng::new(1);
    let p = next_line_pairs(5, &mut rng);
    assert_eq!(p.iter().filter(|x| x.target == 1.0).count(), 4);
    assert_eq!(p.iter().filter(|x| x.target == 0.0).count(), 4);
    assert!(p.iter().filter(|x| x.target == 0.0).all(|x| x.second != x.first + 1 && x.second < 5));
    assert!(next_line_pairs(1, &mut rng).is_empty());
}

#[test]
fn untrained_loss_is_near_chance() {
    let p = GatParams::init(GatConfig::new(6), 9).unwrap();
    let graphs: Vec<HeteroGraph> = (0..10).map(|s| random_graph(s, 6)).collect();
    let loss = mean_next_line_loss(&graphs, &p, 1).unwrap();
    assert!((loss - libm::log(2.0)).abs() < 0.05, "{loss}");
}

#[test]
fn gradients_match_finite_differences() {
    let mut cfg = small_config(3);
    cfg.scorer_init = 0.3;
    let p = GatParams::init(cfg, 10).unwrap();
    let g = (0..)
        .map(|s| random_graph(s, 3))
        .find(|g| g.line_count() == 3 && !g.word_edges.is_empty() && !g.chord_edges.is_empty())
        .unwrap();
    let pairs = next_line_pairs(3, &mut SeededRng::new(2));
    let (_, grads) = next_line_gradients(&g, &p, &pairs).unwrap();
    let mut rng = SeededRng::new(11);
    for (ti, (name, m)) in p.tensors().iter().enumerate() {
        for _ in 0..3 {
            let i = rng.below(m.data().len());
            let h = 1e-6;
            let at = |d: f64| {
                let mut q = p.clone();
                q.tensor_mut(ti).data_mut()[i] += d;
                next_line_loss(&g, &q, &pairs).unwrap()
            };
            let num = (at(h) - at(-h)) / (2.0 * h);
            let ana = grads[ti].data()[i];
            assert!(
                (ana - num).abs() <= 1e-7 + 1e-3 * ana.abs().max(num.abs()),
                "{name}[{i}]: {ana} vs {num}"
            );
        }
    }
}

#[test]
fn pretraining_lowers_loss_and_is_deterministic() {
    let graphs: Vec<HeteroGraph> = (0..6).map(|s| random_graph(s, 4)).collect();
    let p = GatParams::init(small_config(4), 12).unwrap();
    let cfg = PretrainConfig {
        epochs: 8,
        lr: 5e-3,
        seed: 3,
    };
    let (a, ra) = pretrain_next_line(&graphs, p.clone(), &cfg).unwrap();
    let (b, _) = pretrain_next_line(&graphs, p.clone(), &cfg).unwrap();
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert!(ra.epoch_losses.last().unwrap() < &ra.epoch_losses[0]);
    assert_eq!(ra.positives_per_epoch, ra.negatives_per_epoch);
    let frozen = freeze(a);
    let before = frozen.fingerprint();
    frozen.propagate(&graphs[0]).unwrap();
    assert_eq!(frozen.fingerprint(), before);
}

#[test]
fn restore_checks_shapes() {
    let p = GatParams::init(small_config(3), 1).unwrap();
    let named: Vec<(String, Matrix)> = p.tensors().to_vec();
    assert_eq!(GatParams::from_tensors(*p.config(), named.clone()).unwrap(), p);
    let mut short = named.clone();
    short.pop();
    assert!(GatParams::from_tensors(*p.config(), short).is_err());
    let mut bad = named;
    bad[0].1 = Matrix::zeros(1, 1);
    assert!(GatParams::from_tensors(*p.config(), bad).is_err());
}

