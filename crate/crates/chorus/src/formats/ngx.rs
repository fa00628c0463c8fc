//! `NGX1` index snapshots: song ids, per-song token counts and postings,
//! all in sorted order with little-endian counts and `f32` probabilities.

use std::collections::BTreeMap;
use std::path::Path;

use chorus_core::songsearch::{NGramIndex, Posting};

use super::bytes::{put_f32, put_str, put_u32, Reader};
use super::{read_bytes, write_atomic};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"NGX1";

pub fn encode(index: &NGramIndex) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    put_u32(&mut out, index.songs().len() as u32);
    for (id, counts) in index.songs().iter().zip(index.token_counts()) {
        put_str(&mut out, id);
        put_u32(&mut out, counts.len() as u32);
        for (t, c) in counts {
            put_str(&mut out, t);
            put_u32(&mut out, *c);
        }
    }
    put_u32(&mut out, index.postings().len() as u32);
    for (g, list) in index.postings() {
        put_str(&mut out, g);
        put_u32(&mut out, list.len() as u32);
        for p in list {
            put_u32(&mut out, p.song);
            put_u32(&mut out, p.line);
            put_f32(&mut out, p.probability);
        }
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<NGramIndex> {
    let bad = |m: String| Error::format(path, m);
    let mut r = Reader::new(bytes);
    if r.take(MAGIC.len()).map_err(&bad)? != MAGIC {
        return Err(bad("missing NGX1 magic".into()));
    }
    let n_songs = r.u32().map_err(&bad)?;
    let mut songs = Vec::new();
    let mut counts = Vec::new();
    for _ in 0..n_songs {
        songs.push(r.string().map_err(&bad)?);
        let n = r.u32().map_err(&bad)?;
        let mut m = BTreeMap::new();
        for _ in 0..n {
            let t = r.string().map_err(&bad)?;
            m.insert(t, r.u32().map_err(&bad)?);
        }
        counts.push(m);
    }
    let n_grams = r.u32().map_err(&bad)?;
    let mut postings = BTreeMap::new();
    for _ in 0..n_grams {
        let g = r.string().map_err(&bad)?;
        let n = r.u32().map_err(&bad)?;
        let mut list = Vec::with_capacity(n as usize);
        for _ in 0..n {
            list.push(Posting {
                song: r.u32().map_err(&bad)?,
                line: r.u32().map_err(&bad)?,
                probability: r.f32().map_err(&bad)?,
            });
        }
        postings.insert(g, list);
    }
    r.finish().map_err(&bad)?;
    NGramIndex::from_parts(songs, counts, postings).map_err(|e| bad(e.to_string()))
}

pub fn write(path: &Path, index: &NGramIndex) -> Result<()> {
    write_atomic(path, &encode(index))
}

pub fn read(path: &Path) -> Result<NGramIndex> {
    decode(&read_bytes(path)?, path)
}
