//! Datapoint files and dataset directories.
//!
//! A datapoint is plain DIMACS followed by `c core <v1> ... <vk> 0`. A
//! dataset is a directory of `NNNNNN.cnf` files plus `manifest.tsv`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{Datapoint, Emitted};
use crate::cnf::{parse_dimacs, write_dimacs, DimacsError, VarMask};

pub const MANIFEST: &str = "manifest.tsv";
const MANIFEST_HEADER: &str = "file\tnum_vars\tnum_clauses\tcore_vars\tdepth\tsolve_seconds";

#[derive(Debug, Error)]
pub enum DatapointError {
    #[error(transparent)]
    Dimacs(#[from] DimacsError),
    #[error("missing `c core ... 0` line")]
    MissingCore,
    #[error("empty core")]
    EmptyCore,
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: Box<DatapointError>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_datapoint<W: Write>(dp: &Datapoint, out: &mut W) -> io::Result<()> {
    write_dimacs(&dp.formula, out)?;
    write!(out, "c core")?;
    for v in dp.core_vars.iter() {
        write!(out, " {}", v.dimacs())?;
    }
    writeln!(out, " 0")
}

pub fn read_datapoint(input: &[u8]) -> Result<Datapoint, DatapointError> {
    let mut formula = parse_dimacs(input)?;
    let core = formula
        .origin_mut()
        .core
        .take()
        .ok_or(DatapointError::MissingCore)?;
    if core.is_empty() {
        return Err(DatapointError::EmptyCore);
    }
    let core_vars = VarMask::from_vars(formula.num_vars(), core);
    Ok(Datapoint { formula, core_vars })
}

/// Writes datapoints as numbered files and the manifest on `finish`.
pub struct DatasetWriter {
    dir: PathBuf,
    rows: Vec<String>,
    timings: bool,
}

impl DatasetWriter {
    /// With `timings` off, solve times are recorded as 0 so that repeated
    /// runs produce identical manifests.
    pub fn create(dir: &Path, timings: bool) -> io::Result<DatasetWriter> {
        fs::create_dir_all(dir)?;
        Ok(DatasetWriter {
            dir: dir.to_path_buf(),
            rows: Vec::new(),
            timings,
        })
    }

    pub fn write(&mut self, e: &Emitted) -> io::Result<PathBuf> {
        let name = format!("{:06}.cnf", self.rows.len());
        let path = self.dir.join(&name);
        let mut buf = Vec::new();
        write_datapoint(&e.datapoint, &mut buf)?;
        fs::write(&path, buf)?;
        let f = &e.datapoint.formula;
        let seconds = if self.timings { e.solve_seconds } else { 0.0 };
        self.rows.push(format!(
            "{name}\t{}\t{}\t{}\t{}\t{seconds:.6}",
            f.num_vars(),
            f.num_clauses(),
            e.datapoint.core_vars.count(),
            e.depth
        ));
        Ok(path)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn finish(self) -> io::Result<PathBuf> {
        let path = self.dir.join(MANIFEST);
        let mut text = String::from(MANIFEST_HEADER);
        text.push('\n');
        for r in &self.rows {
            text.push_str(r);
            text.push('\n');
        }
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// Loads every datapoint listed in `dir/manifest.tsv`, in manifest order.
pub fn read_dataset(dir: &Path) -> Result<Vec<Datapoint>, DatapointError> {
    let manifest = fs::read_to_string(dir.join(MANIFEST))?;
    let mut lines = manifest.lines();
    if lines.next() != Some(MANIFEST_HEADER) {
        return Err(DatapointError::Manifest("unexpected header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let name = l
                .split('\t')
                .next()
                .ok_or_else(|| DatapointError::Manifest(format!("bad row {l:?}")))?;
            let path = dir.join(name);
            let bytes = fs::read(&path)?;
            read_datapoint(&bytes).map_err(|e| DatapointError::File {
                path,
                source: Box::new(e),
            })
        })
        .collect()
}
