//! `HGAT1` parameter snapshots: magic, tensor count, then per tensor its
//! name, rows, cols and row-major little-endian `f32` values. A `meta`
//! tensor carries the network shape.

use std::path::Path;

use chorus_core::autograd::Matrix;
use chorus_core::hgat::{GatConfig, GatParams};

use super::bytes::{put_f32, put_str, put_u32, Reader};
use super::{read_bytes, write_atomic};
use crate::{Error, Result};

const MAGIC: &[u8; 5] = b"HGAT1";
const META: &str = "meta";

fn meta(cfg: &GatConfig) -> Vec<f64> {
    vec![
        cfg.sentence_dim as f64,
        cfg.hidden as f64,
        cfg.heads as f64,
        cfg.edge_dim as f64,
        cfg.ffn_dim as f64,
        cfg.leaky_slope,
        cfg.scorer_init,
    ]
}

fn config_from_meta(m: &[f32]) -> Option<GatConfig> {
    let int = |v: f32| (v >= 0.0 && v.fract() == 0.0).then_some(v as usize);
    // scalars go through f32, so snap them back to six decimals
    let real = |v: f32| (f64::from(v) * 1e6).round() / 1e6;
    match m {
        [s, h, k, e, f, slope, init] => Some(GatConfig {
            sentence_dim: int(*s)?,
            hidden: int(*h)?,
            heads: int(*k)?,
            edge_dim: int(*e)?,
            ffn_dim: int(*f)?,
            leaky_slope: real(*slope),
            scorer_init: f64::from(*init),
        }),
        _ => None,
    }
}

/// Parameters as they will read back from disk.
pub fn round_to_f32(params: &GatParams) -> GatParams {
    let tensors = params
        .tensors()
        .iter()
        .map(|(n, m)| {
            let data = m.data().iter().map(|&v| f64::from(v as f32)).collect();
            (n.clone(), Matrix::from_vec(m.rows(), m.cols(), data).unwrap())
        })
        .collect();
    let stored: Vec<f32> = meta(params.config()).iter().map(|&v| v as f32).collect();
    let config = config_from_meta(&stored).unwrap_or(*params.config());
    GatParams::from_tensors(config, tensors).expect("same shapes")
}

pub fn encode(params: &GatParams) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    put_u32(&mut out, params.len() as u32 + 1);
    let meta = meta(params.config());
    let mut section = |name: &str, rows: usize, cols: usize, data: &mut dyn Iterator<Item = f64>| {
        put_str(&mut out, name);
        put_u32(&mut out, rows as u32);
        put_u32(&mut out, cols as u32);
        for v in data {
            put_f32(&mut out, v as f32);
        }
    };
    section(META, 1, meta.len(), &mut meta.iter().copied());
    for (name, m) in params.tensors() {
        section(name, m.rows(), m.cols(), &mut m.data().iter().copied());
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<GatParams> {
    let bad = |m: String| Error::format(path, m);
    let mut r = Reader::new(bytes);
    if r.take(MAGIC.len()).map_err(&bad)? != MAGIC {
        return Err(bad("missing HGAT1 magic".into()));
    }
    let count = r.u32().map_err(&bad)?;
    let mut config = None;
    let mut tensors = Vec::new();
    for _ in 0..count {
        let name = r.string().map_err(&bad)?;
        let rows = r.u32().map_err(&bad)? as usize;
        let cols = r.u32().map_err(&bad)? as usize;
        let data = (0..rows * cols).map(|_| r.f32()).collect::<Result<Vec<f32>, String>>().map_err(&bad)?;
        if name == META {
            config = Some(config_from_meta(&data).ok_or_else(|| bad("malformed meta tensor".into()))?);
        } else {
            let m = Matrix::from_vec(rows, cols, data.into_iter().map(f64::from).collect())?;
            tensors.push((name, m));
        }
    }
    r.finish().map_err(&bad)?;
    let config = config.ok_or_else(|| bad("missing meta tensor".into()))?;
    GatParams::from_tensors(config, tensors).map_err(|e| bad(e.to_string()))
}

pub fn write(path: &Path, params: &GatParams) -> Result<()> {
    write_atomic(path, &encode(params))
}

pub fn read(path: &Path) -> Result<GatParams> {
    decode(&read_bytes(path)?, path)
}
