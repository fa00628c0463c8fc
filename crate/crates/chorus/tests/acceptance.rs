//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chorus::config::RunConfig;
use chorus::pipeline::{self as pl, Experiment, Reuse};
use chorus_core::autograd::Tape;
use chorus_core::chordvec::{pair_gradient, pair_loss};
use chorus_core::corpus::{
    corpus_stats, split_corpus, synth_corpus, Corpus, LyricLine, Song, Split, SplitRatios, SynthConfig,
};
use chorus_core::dsp::{compute_mfcc, MfccConfig, Waveform};
use chorus_core::hgat::{
    next_line_gradients, next_line_loss, next_line_pairs, propagate, random_graph, GatConfig, GatParams,
};
use chorus_core::mmcr::{select_top_k, Dataset, FusionClassifier, Prediction};
use chorus_core::math;
use chorus_core::rng::SeededRng;
use chorus_core::songsearch::{query_tfidf, NGramIndex};
use chorus_core::text::tokenize;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

// Brute-force MFCC: direct DFT, explicit triangular filters, direct DCT.
fn oracle_mfcc(x: &[f32], sr: f64) -> Vec<Vec<f64>> {
    let frame = (0.025 * sr).round() as usize;
    let hop = (0.010 * sr).round() as usize;
    let n_fft = 512usize;
    let n_mels = 26usize;
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let top = mel(sr / 2.0);
    let edges: Vec<usize> = (0..n_mels + 2)
        .map(|i| ((n_fft + 1) as f64 * hz(top * i as f64 / (n_mels + 1) as f64) / sr).floor() as usize)
        .collect();
    let tri = |j: usize, k: usize| -> f64 {
        let (a, b, c) = (edges[j], edges[j + 1], edges[j + 2]);
        if a <= k && k < b {
            (k - a) as f64 / (b - a) as f64
        } else if b <= k && k < c {
            (c - k) as f64 / (c - b) as f64
        } else {
            0.0
        }
    };
    let y: Vec<f64> = (0..x.len())
        .map(|i| x[i] as f64 - if i == 0 { 0.0 } else { 0.97 * x[i - 1] as f64 })
        .collect();
    let frames = 1 + (x.len() - frame) / hop;
    (0..frames)
        .map(|t| {
            let seg: Vec<f64> = (0..frame)
                .map(|i| y[t * hop + i] * (0.54 - 0.46 * (2.0 * PI * i as f64 / (frame - 1) as f64).cos()))
                .collect();
            let power: Vec<f64> = (0..=n_fft / 2)
                .map(|k| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (n, v) in seg.iter().enumerate() {
                        let ang = -2.0 * PI * (k * n) as f64 / n_fft as f64;
                        re += v * ang.cos();
                        im += v * ang.sin();
                    }
                    (re * re + im * im) / n_fft as f64
                })
                .collect();
            let logmel: Vec<f64> = (0..n_mels)
                .map(|j| {
                    let e: f64 = power.iter().enumerate().map(|(k, p)| tri(j, k) * p).sum();
                    e.max(1e-10).ln()
                })
                .collect();
            (0..13)
                .map(|k| {
                    let s = if k == 0 { (1.0 / n_mels as f64).sqrt() } else { (2.0 / n_mels as f64).sqrt() };
                    s * logmel
                        .iter()
                        .enumerate()
                        .map(|(i, v)| v * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n_mels as f64)).cos())
                        .sum::<f64>()
                })
                .collect()
        })
        .collect()
}

fn dsp_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut r = SeededRng::new(seed);
        let n = 2400 + r.below(3200);
        let f0 = r.uniform_range(80.0, 3000.0);
        let x: Vec<f32> = (0..n)
            .map(|i| (0.5 * (2.0 * PI * f0 * i as f64 / 16000.0).sin() + 0.2 * r.normal()) as f32)
            .collect();
        let got = compute_mfcc(&Waveform::new(x.clone(), 16_000).unwrap(), &MfccConfig::default()).unwrap();
        let want = oracle_mfcc(&x, 16000.0);
        if got.frames() != want.len() {
            return outcome(false, format!("signal {seed}: {} frames vs {}", got.frames(), want.len()));
        }
        for (t, row) in want.iter().enumerate() {
            for (a, b) in got.row(t).iter().zip(row) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let el = t0.elapsed();
    outcome(
        worst <= 1e-6 && el < Duration::from_secs(10),
        format!("max |diff| {worst:.2e} over 20 signals in {}", secs(el)),
    )
}

fn rel_ok(ana: f64, num: f64, rel: f64, abs: f64) -> bool {
    (ana - num).abs() <= abs + rel * ana.abs().max(num.abs())
}

fn gradient_suites() -> Outcome {
    let t0 = Instant::now();
    let mut fails = Vec::new();

    // skip-gram pair loss
    for seed in 0..10u64 {
        let mut r = SeededRng::new(seed);
        let mut v = |n: usize| (0..n).map(|_| 0.3 * r.normal()).collect::<Vec<f64>>();
        let (c, o) = (v(64), v(64));
        let negs: Vec<Vec<f64>> = (0..5).map(|_| v(64)).collect();
        let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
        let g = pair_gradient(&c, &o, &refs);
        let h = 1e-6;
        for j in 0..64 {
            let mut cp = c.clone();
            let mut cm = c.clone();
            cp[j] += h;
            cm[j] -= h;
            let num = (pair_loss(&cp, &o, &refs) - pair_loss(&cm, &o, &refs)) / (2.0 * h);
            if !rel_ok(g.center[j], num, 1e-4, 1e-9) {
                fails.push(format!("skip-gram center[{j}] seed {seed}"));
            }
            let mut op = o.clone();
            let mut om = o.clone();
            op[j] += h;
            om[j] -= h;
            let num = (pair_loss(&c, &op, &refs) - pair_loss(&c, &om, &refs)) / (2.0 * h);
            if !rel_ok(g.context[j], num, 1e-4, 1e-9) {
                fails.push(format!("skip-gram context[{j}] seed {seed}"));
            }
        }
        for (k, gn) in g.negatives.iter().enumerate() {
            for j in 0..64 {
                let mut np = negs.clone();
                let mut nm = negs.clone();
                np[k][j] += h;
                nm[k][j] -= h;
                let rp: Vec<&[f64]> = np.iter().map(Vec::as_slice).collect();
                let rm: Vec<&[f64]> = nm.iter().map(Vec::as_slice).collect();
                let num = (pair_loss(&c, &o, &rp) - pair_loss(&c, &o, &rm)) / (2.0 * h);
                if !rel_ok(gn[j], num, 1e-4, 1e-9) {
                    fails.push(format!("skip-gram negative{k}[{j}] seed {seed}"));
                }
            }
        }
    }

    // fusion classifier
    for seed in 0..5u64 {
        let mut r = SeededRng::new(100 + seed);
        let dim = 12;
        let mut d = Dataset::new(dim);
        for i in 0..50 {
            let row: Vec<f64> = (0..dim).map(|_| r.normal()).collect();
            d.push(&row, i % 3 == 0).unwrap();
        }
        let mut m = FusionClassifier::zeros(dim);
        m.weights.iter_mut().for_each(|w| *w = 0.5 * r.normal());
        m.bias = r.normal();
        let (_, gw, gb) = m.loss_and_gradient(&d, None);
        let h = 1e-6;
        for j in 0..=dim {
            let at = |delta: f64| {
                let mut p = m.clone();
                if j == dim {
                    p.bias += delta;
                } else {
                    p.weights[j] += delta;
                }
                p.loss_and_gradient(&d, None).0
            };
            let num = (at(h) - at(-h)) / (2.0 * h);
            let ana = if j == dim { gb } else { gw[j] };
            if !rel_ok(ana, num, 1e-5, 1e-9) {
                fails.push(format!("classifier coord {j} seed {seed}: {ana} vs {num}"));
            }
        }
    }

    // graph attention network with the next-line scorer
    for seed in 0..3u64 {
        let cfg = GatConfig {
            hidden: 8,
            heads: 2,
            edge_dim: 4,
            ffn_dim: 16,
            scorer_init: 0.3,
            ..GatConfig::new(3)
        };
        let p = GatParams::init(cfg, 20 + seed).unwrap();
        let g = (seed * 1000..)
            .map(|s| random_graph(s, 3))
            .find(|g| g.line_count() >= 3 && !g.word_edges.is_empty() && !g.chord_edges.is_empty())
            .unwrap();
        let pairs = next_line_pairs(g.line_count(), &mut SeededRng::new(seed));
        let (_, grads) = next_line_gradients(&g, &p, &pairs).unwrap();
        let mut r = SeededRng::new(30 + seed);
        for (ti, (name, m)) in p.tensors().iter().enumerate() {
            for _ in 0..2 {
                let i = r.below(m.data().len());
                let h = 1e-6;
                let at = |d: f64| {
                    let mut q = p.clone();
                    q.tensor_mut(ti).data_mut()[i] += d;
                    next_line_loss(&g, &q, &pairs).unwrap()
                };
                let num = (at(h) - at(-h)) / (2.0 * h);
                let ana = grads[ti].data()[i];
                if !rel_ok(ana, num, 1e-3, 1e-7) {
                    fails.push(format!("hgat {name}[{i}] seed {seed}: {ana} vs {num}"));
                }
            }
        }
    }
    let el = t0.elapsed();
    let pass = fails.is_empty() && el < Duration::from_secs(60);
    let detail = match fails.first() {
        None => format!("skip-gram, classifier and graph network agree with central differences in {}", secs(el)),
        Some(f) => format!("{} mismatches, first: {f}", fails.len()),
    };
    outcome(pass, detail)
}

fn attention_normalization() -> Outcome {
    let p = GatParams::init(GatConfig::new(6), 3).unwrap();
    let mut worst = 0.0f64;
    let mut rows = 0usize;
    for seed in 0..100u64 {
        let g = random_graph(seed, 6);
        for a in propagate(&g, &p).unwrap().attention {
            for h in &a.heads {
                let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
                for (e, w) in a.edges.iter().zip(h) {
                    *sums.entry(e.target).or_default() += w;
                }
                rows += sums.len();
                for s in sums.values() {
                    worst = worst.max((s - 1.0).abs());
                }
            }
        }
    }
    // With zero value projections and FFN output, every step adds exactly
    // zero, so the sentence states equal the adapted inputs bit for bit.
    let mut q = GatParams::init(GatConfig::new(6), 4).unwrap();
    let names: Vec<String> = q
        .tensors()
        .iter()
        .map(|(n, _)| n.clone())
        .filter(|n| n.ends_with(".wv") || n.ends_with("ffn.w2") || n.ends_with("ffn.b2"))
        .collect();
    for n in names {
        q.get_mut(&n).unwrap().fill(0.0);
    }
    let mut exact = true;
    for seed in 0..100u64 {
        let g = random_graph(seed, 6);
        let out = propagate(&g, &q).unwrap();
        let mut tape = Tape::new();
        let v = q.on_tape(&mut tape);
        let x = tape.leaf(g.sentences.clone());
        let h = tape.matmul(x, v.var(&q, "adapt.sentence.w")).unwrap();
        let h = tape.add_row(h, v.var(&q, "adapt.sentence.b")).unwrap();
        exact &= &out.hg == tape.value(h);
    }
    outcome(
        worst <= 1e-6 && exact,
        format!("{rows} attention rows over 100 graphs, max |sum - 1| {worst:.1e}; residual identity exact: {exact}"),
    )
}

fn seeded_config(seed: u64) -> RunConfig {
    RunConfig {
        seed,
        ..RunConfig::default()
    }
    .seeded()
}

fn synth(songs: usize, seed: u64) -> Corpus {
    let mut c = synth_corpus(
        &SynthConfig {
            songs,
            ..SynthConfig::default()
        },
        seed,
    )
    .unwrap();
    pl::assign_split(&mut c, seed).unwrap();
    c
}

fn end_to_end(e: &Experiment, el: Duration) -> Outcome {
    let mmcr = e.system("MMCR").unwrap().test.f1;
    let tr = e.system("TextRank").unwrap().test.f1;
    outcome(
        mmcr >= 0.85 && mmcr - tr >= 0.10 && el < Duration::from_secs(600),
        format!("MMCR F1 {mmcr:.4}, TextRank F1 {tr:.4}, margin {:.1} points, run {}", 100.0 * (mmcr - tr), secs(el)),
    )
}

fn ablation(e: &Experiment) -> Outcome {
    let f = |n: &str| e.system(n).unwrap().test.f1;
    let (all, lyr, mf, ch, ext) = (f("MMCR"), f("lyrics-only"), f("MFCC-only"), f("chord-only"), f("Ext"));
    outcome(
        mf >= ch && all >= lyr && all >= mf && all >= ch,
        format!("F1 MMCR {all:.4}, lyrics {lyr:.4}, MFCC {mf:.4}, chord {ch:.4}, Ext {ext:.4}"),
    )
}

// Whole-corpus TF-IDF search computed straight from the lyrics.
fn brute_tfidf(corpus: &Corpus, keyword: &str) -> Vec<(String, f64, usize)> {
    let kw = tokenize(keyword);
    let n = corpus.songs.len() as f64;
    let toks: Vec<Vec<Vec<String>>> = corpus.songs.iter().map(|s| s.lines.iter().map(|l| l.tokens()).collect()).collect();
    let df = |t: &str| toks.iter().filter(|s| s.iter().flatten().any(|x| x == t)).count();
    let mut out = Vec::new();
    for (s, lines) in corpus.songs.iter().zip(&toks) {
        let Some(line) = lines.iter().position(|l| l.windows(kw.len()).any(|w| w == kw.as_slice())) else {
            continue;
        };
        let score = kw
            .iter()
            .map(|t| {
                let tf = lines.iter().flatten().filter(|x| *x == t).count();
                // same log primitive as the index, std ln differs in the last ulp
                f64::from(tf as u32) * math::ln(n / f64::from(df(t) as u32))
            })
            .sum::<f64>()
            / kw.len() as f64;
        out.push((s.id.clone(), score, line));
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

fn search(e: &Experiment, corpus: &Corpus) -> Outcome {
    let t0 = Instant::now();
    let small = synth(50, 2);
    let mut r = SeededRng::new(5);
    let preds: Vec<Prediction> = small
        .songs
        .iter()
        .flat_map(|s| s.lines.iter().map(move |l| (s.id.clone(), l.index)))
        .map(|(song_id, line)| {
            let p = r.uniform();
            Prediction {
                song_id,
                line,
                probability: p,
                label: p >= 0.5,
            }
        })
        .collect();
    let idx: NGramIndex = pl::build_search_index(&small, &preds).unwrap();
    let mut checked = 0usize;
    let mut exact = true;
    for (gi, gram) in idx.postings().keys().enumerate() {
        if gi % 7 != 0 {
            continue;
        }
        let got: Vec<(String, f64, usize)> = query_tfidf(&idx, gram, usize::MAX)
            .unwrap()
            .hits
            .into_iter()
            .map(|h| (h.song_id, h.score, h.line))
            .collect();
        exact &= got == brute_tfidf(&small, gram);
        checked += 1;
    }

    let index = pl::build_search_index(corpus, &e.mmcr.predictions).unwrap();
    let queries = pl::label_queries(corpus, 2, 1).unwrap();
    let cmp = pl::compare_search(&index, &queries).unwrap();
    let el = t0.elapsed();
    let ordered = cmp.chorus.hits_at_1 >= cmp.tfidf.hits_at_1;
    let mono = cmp.chorus.hits_at_1 <= cmp.chorus.hits_at_3 && cmp.tfidf.hits_at_1 <= cmp.tfidf.hits_at_3;
    outcome(
        exact && queries.len() >= 100 && ordered && mono && el < Duration::from_secs(60),
        format!(
            "TF-IDF exact on {checked} keywords: {exact}; {} queries, Hits@1/@3 chorus {:.3}/{:.3}, TF-IDF {:.3}/{:.3}; {}",
            queries.len(),
            cmp.chorus.hits_at_1,
            cmp.chorus.hits_at_3,
            cmp.tfidf.hits_at_1,
            cmp.tfidf.hits_at_3,
            secs(el)
        ),
    )
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = chorus::cli::run_with(std::iter::once("chorus").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8_lossy(&err).into_owned())
}

fn files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let t0 = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut trees = Vec::new();
    for (run, jobs) in [("a", "1"), ("b", "2")] {
        let root = tmp.path().join(run);
        let corpus = root.join("corpus");
        let out = root.join("out");
        let (c, o) = (corpus.to_str().unwrap(), out.to_str().unwrap());
        let steps: [Vec<&str>; 4] = [
            vec!["corpus", "synth", "--songs", "40", "--seed", "3", "--out", c],
            vec!["mmcr", "train", "--corpus", c, "--seed", "3", "--jobs", jobs, "--out", o],
            vec!["search", "build", "--corpus", c, "--seed", "3", "--out", o, "--predictions"],
            vec!["search", "eval", "--corpus", c, "--seed", "3", "--out", o, "--index"],
        ];
        for mut s in steps {
            let extra;
            match s[1] {
                "build" => {
                    extra = out.join(pl::PREDICTIONS_FILE);
                    s.push(extra.to_str().unwrap());
                }
                "eval" => {
                    extra = out.join(pl::INDEX_FILE);
                    s.push(extra.to_str().unwrap());
                }
                _ => {}
            }
            let (code, err) = cli(&s);
            if code != 0 {
                return outcome(false, format!("`{}` exited {code}: {err}", s.join(" ")));
            }
        }
        trees.push(files(&root));
    }
    let same = trees[0] == trees[1];
    let diff: Vec<String> = trees[0]
        .iter()
        .filter(|(k, v)| trees[1].get(*k) != Some(*v))
        .map(|(k, _)| k.display().to_string())
        .collect();
    outcome(
        same,
        if same {
            format!("{} artifacts byte-identical across runs (1 vs 2 workers) in {}", trees[0].len(), secs(t0.elapsed()))
        } else {
            format!("differing files: {}", diff.join(", "))
        },
    )
}

fn protocol(e: &Experiment, corpus: &Corpus) -> Outcome {
    // K positives per test song for every top-K baseline.
    let mut k_ok = true;
    for (_, preds) in &e.baselines {
        let mut per: BTreeMap<&str, usize> = BTreeMap::new();
        for p in preds {
            *per.entry(p.song_id.as_str()).or_default() += usize::from(p.label);
        }
        for s in corpus.songs_in(Split::Test) {
            k_ok &= per.get(s.id.as_str()).copied().unwrap_or(0) == s.chorus_count();
        }
    }
    let mut r = SeededRng::new(9);
    for _ in 0..200 {
        let n = 1 + r.below(40);
        let k = r.below(n + 1);
        let scores: Vec<f64> = (0..n).map(|_| (r.below(5)) as f64).collect();
        k_ok &= select_top_k(&scores, k).unwrap().iter().filter(|&&b| b).count() == k;
    }

    // floor rule on validation and test, remainder to train
    let dummy = |n: usize| {
        let songs = (0..n)
            .map(|i| {
                Song::new(
                    format!("s{i:04}"),
                    vec![LyricLine {
                        index: 0,
                        text: "la".into(),
                        start_ms: 0,
                        end_ms: 1000,
                        label: Some(false),
                    }],
                )
            })
            .collect();
        Corpus::new(songs)
    };
    let mut split_ok = true;
    for n in [10, 57, 200, 627, 1001] {
        let a = split_corpus(&dummy(n), SplitRatios::default(), 1).unwrap();
        let tenth = n / 10;
        split_ok &= a.count(Split::Validation) == tenth
            && a.count(Split::Test) == tenth
            && a.count(Split::Train) == n - 2 * tenth;
    }
    let chord627 = split_corpus(&dummy(627), SplitRatios::default(), 1).unwrap();

    // CHORD shape: 627 songs, 43.17 lines on average (27,068 lines)
    let total = (43.17f64 * 627.0).round() as usize;
    let songs: Vec<Song> = (0..627)
        .map(|i| {
            let n = total / 627 + usize::from(i < total % 627);
            let lines = (0..n)
                .map(|j| LyricLine {
                    index: j,
                    text: "la".into(),
                    start_ms: j as u64 * 1000,
                    end_ms: (j as u64 + 1) * 1000,
                    label: Some(j % 2 == 0),
                })
                .collect();
            Song::new(format!("c{i:03}"), lines)
        })
        .collect();
    let stats = corpus_stats(&Corpus::new(songs));
    let mean = format!("{:.2}", stats.mean_lines_per_song);
    outcome(
        k_ok && split_ok && mean == "43.17",
        format!(
            "top-K exact: {k_ok}; floor split: {split_ok} (627 songs -> {}/{}/{}); {} lines over {} songs -> mean {mean}",
            chord627.count(Split::Train),
            chord627.count(Split::Validation),
            chord627.count(Split::Test),
            stats.lines,
            stats.songs
        ),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("DSP oracle", dsp_oracle()));
    results.push(("Gradient suites", gradient_suites()));
    results.push(("Attention normalization", attention_normalization()));

    let corpus = synth(200, 1);
    let t0 = Instant::now();
    let exp = pl::run_experiment(&corpus, &seeded_config(1), Reuse::default());
    let el = t0.elapsed();
    match &exp {
        Ok(e) => {
            results.push(("End-to-end learning", end_to_end(e, el)));
            results.push(("Ablation ordering", ablation(e)));
            results.push(("Search", search(e, &corpus)));
        }
        Err(err) => {
            for name in ["End-to-end learning", "Ablation ordering", "Search"] {
                results.push((name, outcome(false, format!("pipeline failed: {err}"))));
            }
        }
    }
    results.push(("Determinism", determinism()));
    match &exp {
        Ok(e) => results.push(("Protocol checks", protocol(e, &corpus))),
        Err(err) => results.push(("Protocol checks", outcome(false, format!("pipeline failed: {err}")))),
    }

    println!();
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
