//! Weights file: one ASCII header line
//! `NEUROCORE-W1 d=<d> T=<T> layers=<c dims>;<l dims>;<v dims>` followed by
//! every parameter as a little-endian f64 (c_update, l_update, v_proj; per
//! layer the row-major matrix, then the bias).

use std::path::Path;

use thiserror::Error;

use super::{Mlp, NetworkWeights};

const MAGIC: &str = "NEUROCORE-W1";

#[derive(Debug, Error)]
pub enum WeightsIoError {
    #[error("not a weights file (bad magic)")]
    BadMagic,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("truncated: expected {expected} parameter bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{0} trailing bytes after parameters")]
    Trailing(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn dims_str(m: &Mlp) -> String {
    m.dims()
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn save_weights(w: &NetworkWeights) -> Vec<u8> {
    let header = format!(
        "{MAGIC} d={} T={} layers={};{};{}\n",
        w.d,
        w.iterations,
        dims_str(&w.c_update),
        dims_str(&w.l_update),
        dims_str(&w.v_proj)
    );
    let mut out = header.into_bytes();
    out.reserve(8 * w.num_params());
    for slice in w.params() {
        for x in slice {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn field<'a>(tok: Option<&'a str>, key: &str) -> Result<&'a str, WeightsIoError> {
    tok.and_then(|t| t.strip_prefix(key))
        .ok_or_else(|| WeightsIoError::BadHeader(format!("expected {key}")))
}

fn num(s: &str) -> Result<usize, WeightsIoError> {
    s.parse()
        .map_err(|_| WeightsIoError::BadHeader(format!("bad number {s:?}")))
}

pub fn load_weights(bytes: &[u8]) -> Result<NetworkWeights, WeightsIoError> {
    if !bytes.starts_with(MAGIC.as_bytes()) {
        return Err(WeightsIoError::BadMagic);
    }
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| WeightsIoError::BadHeader("no newline".into()))?;
    let header = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| WeightsIoError::BadHeader("not ASCII".into()))?;
    let mut toks = header.split_ascii_whitespace();
    if toks.next() != Some(MAGIC) {
        return Err(WeightsIoError::BadMagic);
    }
    let d = num(field(toks.next(), "d=")?)?;
    let iterations = num(field(toks.next(), "T=")?)?;
    let layers = field(toks.next(), "layers=")?;
    if toks.next().is_some() {
        return Err(WeightsIoError::BadHeader("extra fields".into()));
    }
    let lists: Vec<Vec<usize>> = layers
        .split(';')
        .map(|l| l.split(',').map(num).collect())
        .collect::<Result<_, _>>()?;
    if lists.len() != 3 || lists.iter().any(|l| l.len() < 2) {
        return Err(WeightsIoError::BadHeader("need three layer lists".into()));
    }
    if d == 0 || iterations == 0 {
        return Err(WeightsIoError::DimMismatch(
            "d and T must be positive".into(),
        ));
    }
    let mut w = NetworkWeights {
        d,
        iterations,
        c_update: Mlp::zeros(&lists[0]),
        l_update: Mlp::zeros(&lists[1]),
        v_proj: Mlp::zeros(&lists[2]),
    };
    w.validate()
        .map_err(|e| WeightsIoError::DimMismatch(e.to_string()))?;
    let body = &bytes[nl + 1..];
    let expected = 8 * w.num_params();
    if body.len() < expected {
        return Err(WeightsIoError::Truncated {
            expected,
            found: body.len(),
        });
    }
    if body.len() > expected {
        return Err(WeightsIoError::Trailing(body.len() - expected));
    }
    let mut chunks = body.chunks_exact(8);
    for slice in w.params_mut() {
        for x in slice.iter_mut() {
            let c = chunks.next().expect("length checked");
            *x = f64::from_le_bytes(c.try_into().expect("8 bytes"));
        }
    }
    Ok(w)
}

pub fn write_weights_file(w: &NetworkWeights, path: &Path) -> Result<(), WeightsIoError> {
    std::fs::write(path, save_weights(w))?;
    Ok(())
}

pub fn read_weights_file(path: &Path) -> Result<NetworkWeights, WeightsIoError> {
    load_weights(&std::fs::read(path)?)
}
