//! Tab-separated carriers: predictions, search query sets, query results
//! and metric rows.

use std::fmt::Write as _;
use std::path::Path;

use chorus_core::mmcr::{Metrics, Prediction};
use chorus_core::songsearch::{QueryResult, SearchQuery};

use super::{read_text, write_atomic};
use crate::{Error, Result};

fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split('\t').collect()))
}

/// `song_id  line_index  probability  hard_label`
pub fn render_predictions(preds: &[Prediction]) -> String {
    let mut out = String::new();
    for p in preds {
        writeln!(out, "{}\t{}\t{:.9}\t{}", p.song_id, p.line, p.probability, u8::from(p.label)).unwrap();
    }
    out
}

pub fn parse_predictions(text: &str, path: &Path) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (n, f) in rows(text) {
        let bad = |m: &str| Error::format(path, format!("row {n}: {m}"));
        let [song, line, prob, label] = f[..] else {
            return Err(bad("expected 4 tab-separated fields"));
        };
        let probability: f64 = prob.parse().map_err(|_| bad("probability is not a number"))?;
        if !(0.0..=1.0).contains(&probability) {
            return Err(bad("probability outside [0, 1]"));
        }
        out.push(Prediction {
            song_id: song.to_string(),
            line: line.parse().map_err(|_| bad("bad line index"))?,
            probability,
            label: match label {
                "0" => false,
                "1" => true,
                _ => return Err(bad("hard label must be 0 or 1")),
            },
        });
    }
    Ok(out)
}

pub fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<()> {
    write_atomic(path, render_predictions(preds).as_bytes())
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    parse_predictions(&read_text(path)?, path)
}

/// `keyword  target_song_id`
pub fn render_queries(queries: &[SearchQuery]) -> String {
    queries.iter().map(|q| format!("{}\t{}\n", q.keyword, q.target)).collect()
}

pub fn parse_queries(text: &str, path: &Path) -> Result<Vec<SearchQuery>> {
    rows(text)
        .map(|(n, f)| match f[..] {
            [k, t] if !k.trim().is_empty() => Ok(SearchQuery {
                keyword: k.to_string(),
                target: t.to_string(),
            }),
            _ => Err(Error::format(path, format!("row {n}: expected `keyword<TAB>song_id`"))),
        })
        .collect()
}

pub fn read_queries(path: &Path) -> Result<Vec<SearchQuery>> {
    parse_queries(&read_text(path)?, path)
}

pub fn write_queries(path: &Path, queries: &[SearchQuery]) -> Result<()> {
    write_atomic(path, render_queries(queries).as_bytes())
}

/// `rank  song_id  score  line_index`, ranks from 1.
pub fn render_hits(result: &QueryResult) -> String {
    let mut out = String::new();
    for (i, h) in result.hits.iter().enumerate() {
        writeln!(out, "{}\t{}\t{:.6}\t{}", i + 1, h.song_id, h.score, h.line).unwrap();
    }
    out
}

pub const METRICS_HEADER: &str = "system\taccuracy\tprecision\trecall\tf1\ttp\tfp\tfn\ttn";

pub fn metrics_row(system: &str, m: &Metrics) -> String {
    format!(
        "{system}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}",
        m.accuracy, m.precision, m.recall, m.f1, m.tp, m.fp, m.fn_, m.tn
    )
}

/// Aligned plain-text table for the terminal.
pub fn metrics_table(rows: &[(String, Metrics)]) -> String {
    let w = rows.iter().map(|(s, _)| s.len()).max().unwrap_or(0).max(6);
    let mut out = format!("{:<w$}  {:>8}  {:>9}  {:>6}  {:>6}\n", "system", "accuracy", "precision", "recall", "f1");
    for (s, m) in rows {
        writeln!(out, "{s:<w$}  {:>8.4}  {:>9.4}  {:>6.4}  {:>6.4}", m.accuracy, m.precision, m.recall, m.f1).unwrap();
    }
    out
}
