//! Keyed vectors in word2vec text form: a `count dim` header, then one
//! `key v1 .. vdim` row per entry.

use std::fmt::Write as _;
use std::path::Path;

use super::{read_text, write_atomic};
use crate::{Error, Result};

/// Renders rows with 17 significant digits, which round-trips `f64`.
pub fn render<'a, I>(dim: usize, rows: I) -> Result<String>
where
    I: IntoIterator<Item = (&'a str, &'a [f64])>,
{
    let mut body = String::new();
    let mut count = 0usize;
    for (key, v) in rows {
        if key.is_empty() || key.chars().any(char::is_whitespace) {
            return Err(Error::Usage(format!("vector key `{key}` is empty or has whitespace")));
        }
        if v.len() != dim {
            return Err(Error::Usage(format!("`{key}` has {} values, expected {dim}", v.len())));
        }
        body.push_str(key);
        for x in v {
            write!(body, " {x:.16e}").unwrap();
        }
        body.push('\n');
        count += 1;
    }
    Ok(format!("{count} {dim}\n{body}"))
}

pub type KeyedVectors = Vec<(String, Vec<f64>)>;

/// Parses the text form; `path` only labels errors.
pub fn parse(text: &str, path: &Path) -> Result<(usize, KeyedVectors)> {
    let err = |line: usize, msg: String| Error::format(path, format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing `count dim` header".into()))?;
    let mut h = header.split_whitespace();
    let (Some(c), Some(d), None) = (h.next(), h.next(), h.next()) else {
        return Err(err(1, format!("bad header `{header}`")));
    };
    let count: usize = c.parse().map_err(|_| err(1, format!("bad count `{c}`")))?;
    let dim: usize = d.parse().map_err(|_| err(1, format!("bad dimension `{d}`")))?;
    let mut out = Vec::with_capacity(count);
    let mut seen = std::collections::BTreeSet::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ').filter(|p| !p.is_empty());
        let key = parts.next().unwrap().to_string();
        let values = parts
            .map(|p| p.parse::<f64>().map_err(|_| err(i + 1, format!("bad number `{p}`"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(err(i + 1, format!("{} values, expected {dim}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(err(i + 1, "non-finite value".into()));
        }
        if !seen.insert(key.clone()) {
            return Err(err(i + 1, format!("duplicate key `{key}`")));
        }
        out.push((key, values));
    }
    if out.len() != count {
        return Err(err(1, format!("header promises {count} rows, found {}", out.len())));
    }
    Ok((dim, out))
}

pub fn read(path: &Path) -> Result<(usize, KeyedVectors)> {
    parse(&read_text(path)?, path)
}

pub fn write<'a, I>(path: &Path, dim: usize, rows: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, &'a [f64])>,
{
    write_atomic(path, render(dim, rows)?.as_bytes())
}
