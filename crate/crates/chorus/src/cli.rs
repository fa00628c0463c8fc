//! The `chorus` command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chorus_core::corpus::{corpus_stats, synth_corpus, synth_word_vectors, Corpus, Split, SynthConfig};
use chorus_core::dsp::MFCC_COEFFS;
use chorus_core::mmcr::{evaluate, Metrics};
use chorus_core::songsearch::{query, SearchMethod};
use chorus_core::textrep::WORD_DIM;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::dataset::{load_corpus, write_corpus, CorpusSource};
use crate::formats::{hgat as hgat_file, mfcc as mfcc_file, ngx, read_text, tsv, write_atomic};
use crate::pipeline::{self as pl, note, Baseline, Reuse};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "chorus", version, about = "Chorus recognition and chorus-aware lyric search")]
struct Cli {
    /// Run configuration (`key = value` lines); flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-song work.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus statistics and synthetic corpora.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Audio features.
    #[command(subcommand)]
    Features(FeaturesCmd),
    /// Chord embeddings.
    #[command(subcommand)]
    Chordvec(ChordvecCmd),
    /// Heterogeneous graph attention network.
    #[command(subcommand)]
    Hgat(HgatCmd),
    /// Multimodal chorus classifier.
    #[command(subcommand)]
    Mmcr(MmcrCmd),
    /// Unsupervised extractive baselines.
    #[command(subcommand)]
    Baselines(BaselinesCmd),
    /// Keyword search over lyrics.
    #[command(subcommand)]
    Search(SearchCmd),
}

#[derive(Debug, Subcommand)]
enum CorpusCmd {
    /// Print song, line and split counts.
    Stats(CorpusArgs),
    /// Write a synthetic corpus directory to --out.
    Synth {
        #[arg(long, default_value_t = 200)]
        songs: usize,
    },
}

#[derive(Debug, Subcommand)]
enum FeaturesCmd {
    /// Per-song MFCC matrices (every line's fitted block, stacked) to
    /// --out/mfcc/<song>.mfcc.
    Mfcc(CorpusArgs),
}

#[derive(Debug, Subcommand)]
enum ChordvecCmd {
    /// Train chord embeddings on the train split; writes chords.vec.
    Train(CorpusArgs),
}

#[derive(Debug, Subcommand)]
enum HgatCmd {
    /// Next-line pre-training on the train split; writes gat.hgat.
    Pretrain {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        text: TextArgs,
        #[command(flatten)]
        models: ModelArgs,
    },
}

#[derive(Debug, Subcommand)]
enum MmcrCmd {
    /// Train and evaluate every system; writes models, predictions and
    /// metrics.tsv.
    Train {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        text: TextArgs,
        #[command(flatten)]
        models: ModelArgs,
    },
    /// Metrics of a predictions file against a labels file.
    Eval {
        /// Predictions TSV from `mmcr train` or `baselines eval`
        #[arg(long, value_name = "FILE")]
        predictions: PathBuf,
        /// Labels TSV (`song_id  line  label`)
        #[arg(long, value_name = "FILE")]
        labels: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum BaselinesCmd {
    /// TextRank and PacSum with top-K selection on the test split.
    Eval {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        text: TextArgs,
    },
}

#[derive(Debug, Subcommand)]
enum SearchCmd {
    /// Build the n-gram index from line probabilities; writes index.ngx.
    Build {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Predictions TSV whose probabilities weight the postings
        #[arg(long, value_name = "FILE")]
        predictions: PathBuf,
    },
    /// Rank songs for one keyword; TSV on stdout.
    Query {
        #[arg(long, value_name = "FILE")]
        index: PathBuf,
        /// Three or four words
        #[arg(long)]
        keyword: String,
        #[arg(long, value_enum, default_value_t = Method::Chorus)]
        method: Method,
        /// Number of songs to print (default from `search.top`)
        #[arg(long)]
        top: Option<usize>,
    },
    /// Hits@1 and Hits@3 of both ranking methods. Queries come from
    /// --queries, or are generated from the corpus labels.
    Eval {
        #[arg(long, value_name = "FILE")]
        index: PathBuf,
        /// Queries TSV (`keyword  target_song`)
        #[arg(long, value_name = "FILE")]
        queries: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Generated queries per song (default from `search.queries_per_song`)
        #[arg(long)]
        per_song: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Highest chorus probability among matching lines
    Chorus,
    /// Mean TF-IDF of the keyword's words
    Tfidf,
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Corpus directory.
    #[arg(long, value_name = "DIR")]
    corpus: Option<PathBuf>,
    /// Labels TSV overriding the corpus's labels.tsv.
    #[arg(long, value_name = "FILE")]
    labels: Option<PathBuf>,
    /// Chord TSV overriding the corpus's chords.tsv.
    #[arg(long, value_name = "FILE")]
    chords: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TextArgs {
    /// 300-d word vectors.
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Precomputed sentence vectors keyed `song_id:line_index`.
    #[arg(long, value_name = "FILE")]
    sentences: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Reuse trained chord embeddings instead of training them.
    #[arg(long, value_name = "FILE")]
    chord_vectors: Option<PathBuf>,
    /// Reuse a pre-trained GAT snapshot instead of pre-training.
    #[arg(long, value_name = "FILE")]
    gat: Option<PathBuf>,
}

struct Ctx<'a> {
    cfg: RunConfig,
    out: &'a mut (dyn Write + Send),
}

impl Ctx<'_> {
    fn print(&mut self, text: &str) -> Result<()> {
        self.out
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))
    }

    fn with_corpus(&mut self, a: &CorpusArgs) {
        if a.corpus.is_some() {
            self.cfg.corpus = a.corpus.clone();
        }
        if a.labels.is_some() {
            self.cfg.labels = a.labels.clone();
        }
        if a.chords.is_some() {
            self.cfg.chords = a.chords.clone();
        }
    }

    fn with_text(&mut self, a: &TextArgs) {
        if a.embeddings.is_some() {
            self.cfg.embeddings = a.embeddings.clone();
        }
        if a.sentences.is_some() {
            self.cfg.sentences = a.sentences.clone();
        }
    }

    fn corpus(&self, audio: bool) -> Result<Corpus> {
        let dir = self
            .cfg
            .corpus
            .clone()
            .ok_or_else(|| Error::Usage("--corpus is required (or `corpus` in the config)".into()))?;
        let mut c = load_corpus(&CorpusSource {
            dir,
            labels: self.cfg.labels.clone(),
            chords: self.cfg.chords.clone(),
            load_audio: audio,
        })?;
        if audio {
            let n = pl::estimate_missing_chords(&mut c)?;
            if n > 0 {
                note(format!("estimated chords from audio for {n} songs"));
            }
        }
        pl::assign_split(&mut c, self.cfg.seed)?;
        Ok(c)
    }

    fn reuse(&self, m: &ModelArgs) -> Result<Reuse> {
        for p in [&m.chord_vectors, &m.gat].into_iter().flatten() {
            require(p)?;
        }
        Ok(Reuse {
            chords: m.chord_vectors.as_deref().map(pl::read_chord_table).transpose()?,
            gat: m.gat.as_deref().map(hgat_file::read).transpose()?,
        })
    }

    fn out_file(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }
}

fn require(p: &Path) -> Result<()> {
    if p.exists() {
        Ok(())
    } else {
        Err(Error::Usage(format!("{} does not exist", p.display())))
    }
}

fn metrics_report(rows: &[(String, Metrics)]) -> String {
    let mut s = String::from(tsv::METRICS_HEADER);
    s.push('\n');
    for (n, m) in rows {
        s.push_str(&tsv::metrics_row(n, m));
        s.push('\n');
    }
    s
}

fn parse_label_file(path: &Path) -> Result<BTreeMap<(String, usize), bool>> {
    let mut out = BTreeMap::new();
    for (n, line) in read_text(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::format(path, format!("row {}: expected `song_id<TAB>line_index<TAB>0|1`", n + 1));
        let f: Vec<&str> = line.split('\t').collect();
        let [song, idx, y] = f[..] else { return Err(bad()) };
        let y = match y.trim() {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        };
        out.insert((song.to_string(), idx.parse().map_err(|_| bad())?), y);
    }
    Ok(out)
}

fn exec(cli: Cli, ctx: &mut Ctx<'_>) -> Result<()> {
    match cli.command {
        Command::Corpus(CorpusCmd::Stats(a)) => {
            ctx.with_corpus(&a);
            ctx.cfg.validate()?;
            let c = ctx.corpus(false)?;
            let mut s = corpus_stats(&c).to_string();
            for sp in [Split::Train, Split::Validation, Split::Test] {
                s.push_str(&format!("\n{sp}\t{}", c.songs_in(sp).count()));
            }
            s.push('\n');
            ctx.print(&s)
        }
        Command::Corpus(CorpusCmd::Synth { songs }) => {
            ctx.cfg.validate()?;
            let c = synth_corpus(&SynthConfig { songs, ..SynthConfig::default() }, ctx.cfg.seed)?;
            let words = synth_word_vectors(&c, WORD_DIM, ctx.cfg.seed);
            write_corpus(&ctx.cfg.out, &c, Some((WORD_DIM, &words)))?;
            let msg = format!("wrote {} songs ({} lines) to {}\n", c.songs.len(), c.line_count(), ctx.cfg.out.display());
            ctx.print(&msg)
        }
        Command::Features(FeaturesCmd::Mfcc(a)) => {
            ctx.with_corpus(&a);
            ctx.cfg.validate()?;
            let c = ctx.corpus(true)?;
            let all = pl::corpus_mfcc(&c, &ctx.cfg.mfcc)?;
            for (song, lines) in c.songs.iter().zip(all) {
                let rows = lines.len() * chorus_core::dsp::TARGET_FRAMES;
                let data: Vec<f32> = lines.into_iter().flatten().collect();
                let path = ctx.out_file(&format!("mfcc/{}.mfcc", song.id));
                mfcc_file::write(&path, rows, MFCC_COEFFS, &data)?;
            }
            let msg = format!("wrote MFCC for {} songs\n", c.songs.len());
            ctx.print(&msg)
        }
        Command::Chordvec(ChordvecCmd::Train(a)) => {
            ctx.with_corpus(&a);
            ctx.cfg.validate()?;
            let c = ctx.corpus(true)?;
            let (table, report) = pl::train_chord_table(&pl::train_subset(&c), &ctx.cfg)?;
            pl::write_chord_table(&ctx.out_file(pl::CHORDS_FILE), &table)?;
            let mut s = format!("symbols\t{}\npairs_per_epoch\t{}\n", table.vocab().len(), report.pairs_per_epoch);
            for (i, l) in report.epoch_losses.iter().enumerate() {
                s.push_str(&format!("epoch{}\t{l:.6}\n", i + 1));
            }
            ctx.print(&s)
        }
        Command::Hgat(HgatCmd::Pretrain { corpus, text, models }) => {
            ctx.with_corpus(&corpus);
            ctx.with_text(&text);
            ctx.cfg.validate()?;
            let reuse = ctx.reuse(&models)?;
            let c = ctx.corpus(true)?;
            let train = pl::train_subset(&c);
            let chords = match reuse.chords {
                Some(t) => t,
                None => {
                    let (t, _) = pl::train_chord_table(&train, &ctx.cfg)?;
                    pl::write_chord_table(&ctx.out_file(pl::CHORDS_FILE), &t)?;
                    t
                }
            };
            let side = pl::TextSide::build(&c, &train, &ctx.cfg)?;
            let graphs = side.graphs(&c, &chords)?;
            let (gat, report) = pl::pretrain_gat(&c, &graphs, side.sentence_dim(), &ctx.cfg)?;
            hgat_file::write(&ctx.out_file(pl::GAT_FILE), &gat)?;
            let mut s = format!("parameters\t{}\n", gat.parameter_count());
            for (i, l) in report.epoch_losses.iter().enumerate() {
                s.push_str(&format!("epoch{}\t{l:.6}\n", i + 1));
            }
            ctx.print(&s)
        }
        Command::Mmcr(MmcrCmd::Train { corpus, text, models }) => {
            ctx.with_corpus(&corpus);
            ctx.with_text(&text);
            ctx.cfg.validate()?;
            let reuse = ctx.reuse(&models)?;
            let c = ctx.corpus(true)?;
            let e = pl::run_experiment(&c, &ctx.cfg, reuse)?;
            pl::write_experiment(&ctx.cfg.out, &e)?;
            let rows: Vec<(String, Metrics)> = e.systems.iter().map(|s| (s.name.clone(), s.test)).collect();
            let mut s = tsv::metrics_table(&rows);
            if let (Some(lr), Some(ep)) = (e.mmcr.run.lr, e.mmcr.run.epochs) {
                s.push_str(&format!("MMCR grid choice: lr {lr:e}, {ep} epochs\n"));
            }
            ctx.print(&s)
        }
        Command::Mmcr(MmcrCmd::Eval { predictions, labels }) => {
            require(&predictions)?;
            require(&labels)?;
            let preds = tsv::read_predictions(&predictions)?;
            let truth = parse_label_file(&labels)?;
            if preds.len() != truth.len() {
                return Err(Error::format(
                    &predictions,
                    format!("{} predictions but {} labels", preds.len(), truth.len()),
                ));
            }
            let mut hard = Vec::with_capacity(preds.len());
            let mut gold = Vec::with_capacity(preds.len());
            for p in &preds {
                let y = truth.get(&(p.song_id.clone(), p.line)).ok_or_else(|| {
                    Error::format(&predictions, format!("no label for {}:{}", p.song_id, p.line))
                })?;
                hard.push(p.label);
                gold.push(*y);
            }
            let m = evaluate(&hard, &gold)?;
            let line = format!("{}\n", tsv::metrics_row("predictions", &m));
            let table = tsv::metrics_table(&[("predictions".into(), m)]);
            ctx.print(&format!("{}\n{line}\n{table}", tsv::METRICS_HEADER))
        }
        Command::Baselines(BaselinesCmd::Eval { corpus, text }) => {
            ctx.with_corpus(&corpus);
            ctx.with_text(&text);
            ctx.cfg.validate()?;
            let c = ctx.corpus(false)?;
            let words = pl::load_word_table(&c, &ctx.cfg)?;
            let base = pl::sentence_vectors(&c, &ctx.cfg, &words)?;
            let mut rows = Vec::new();
            for b in Baseline::ALL {
                let (run, preds) = pl::run_baseline(&c, &base, b)?;
                tsv::write_predictions(&ctx.out_file(&pl::baseline_predictions_file(b)), &preds)?;
                rows.push((run.name, run.test));
            }
            write_atomic(&ctx.out_file("metrics-baselines.tsv"), metrics_report(&rows).as_bytes())?;
            ctx.print(&tsv::metrics_table(&rows))
        }
        Command::Search(SearchCmd::Build { corpus, predictions }) => {
            ctx.with_corpus(&corpus);
            ctx.cfg.validate()?;
            require(&predictions)?;
            let c = ctx.corpus(false)?;
            let preds = tsv::read_predictions(&predictions)?;
            let index = pl::build_search_index(&c, &preds).map_err(|e| match e {
                Error::Core(inner) => Error::format(&predictions, inner.to_string()),
                other => other,
            })?;
            ngx::write(&ctx.out_file(pl::INDEX_FILE), &index)?;
            let msg = format!("indexed {} songs, {} n-grams\n", index.songs().len(), index.postings().len());
            ctx.print(&msg)
        }
        Command::Search(SearchCmd::Query {
            index,
            keyword,
            method,
            top,
        }) => {
            ctx.cfg.validate()?;
            require(&index)?;
            let idx = ngx::read(&index)?;
            let m = match method {
                Method::Chorus => SearchMethod::Chorus,
                Method::Tfidf => SearchMethod::Tfidf,
            };
            let r = query(&idx, m, &keyword, top.unwrap_or(ctx.cfg.top))?;
            ctx.print(&tsv::render_hits(&r))
        }
        Command::Search(SearchCmd::Eval {
            index,
            queries,
            corpus,
            per_song,
        }) => {
            ctx.with_corpus(&corpus);
            ctx.cfg.validate()?;
            require(&index)?;
            let idx = ngx::read(&index)?;
            let qs = match queries {
                Some(q) => {
                    require(&q)?;
                    tsv::read_queries(&q)?
                }
                None => {
                    let c = ctx.corpus(false)?;
                    let qs = pl::label_queries(&c, per_song.unwrap_or(ctx.cfg.queries_per_song), ctx.cfg.seed)?;
                    tsv::write_queries(&ctx.out_file(pl::QUERIES_FILE), &qs)?;
                    qs
                }
            };
            let cmp = pl::compare_search(&idx, &qs)?;
            let mut s = String::from("method\tqueries\thits_at_1\thits_at_3\n");
            for (name, r) in [("chorus", cmp.chorus), ("tfidf", cmp.tfidf)] {
                s.push_str(&format!("{name}\t{}\t{:.6}\t{:.6}\n", r.queries, r.hits_at_1, r.hits_at_3));
            }
            write_atomic(&ctx.out_file("search.tsv"), s.as_bytes())?;
            ctx.print(&s)
        }
    }
}

/// Runs the command line and returns the exit code: 0 on success, 1 for
/// usage errors, 2 for data errors.
pub fn run_with<I, T>(argv: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let result = (|| {
        let mut cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(j) = cli.jobs {
            cfg.jobs = j;
        }
        if let Some(o) = &cli.out {
            cfg.out = o.clone();
        }
        let cfg = cfg.seeded();
        let pool = pl::thread_pool(cfg.jobs)?;
        let mut ctx = Ctx { cfg, out: &mut *out };
        pool.install(|| exec(cli, &mut ctx))
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}
