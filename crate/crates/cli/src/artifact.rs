//! Artifact emission. JSON artifacts carry a top-level `provenance` object;
//! CSV artifacts start with a `# run: {...}` comment line holding the same
//! object; tensor files keep it in their metadata header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ntf_core::data::Dataset;
use ntf_core::tensor::DenseTensor3;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

pub struct Artifacts {
    dir: PathBuf,
    provenance: Value,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(dir: &Path, provenance: Value) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            provenance,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn open(&mut self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| CliError::output(&path, e))?;
        self.written.push(path.clone());
        Ok((path, BufWriter::new(f)))
    }

    /// Writes `payload` with `provenance` merged in as a top-level key.
    /// Non-object payloads land under `data`.
    pub fn json<T: Serialize>(&mut self, name: &str, payload: &T) -> Result<PathBuf> {
        let mut map = Map::new();
        map.insert("provenance".into(), self.provenance.clone());
        match serde_json::to_value(payload).map_err(ntf_core::Error::from)? {
            Value::Object(fields) => map.extend(fields),
            other => {
                map.insert("data".into(), other);
            }
        }
        let (path, mut w) = self.open(name)?;
        serde_json::to_writer_pretty(&mut w, &Value::Object(map)).map_err(ntf_core::Error::from)?;
        w.write_all(b"\n")
            .and_then(|_| w.flush())
            .map_err(|e| CliError::output(&path, e))?;
        Ok(path)
    }

    fn run_line(&self) -> String {
        format!("# run: {}\n", self.provenance)
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let line = self.run_line();
        let (path, mut w) = self.open(name)?;
        let io = |e| CliError::output(&path, e);
        w.write_all(line.as_bytes()).map_err(io)?;
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(header).map_err(|e| io(e.into()))?;
        for row in rows {
            cw.write_record(&row).map_err(|e| io(e.into()))?;
        }
        cw.flush().map_err(io)?;
        Ok(path)
    }

    pub fn dataset_csv(&mut self, name: &str, d: &Dataset) -> Result<PathBuf> {
        let line = self.run_line();
        let (path, mut w) = self.open(name)?;
        w.write_all(line.as_bytes())
            .map_err(|e| CliError::output(&path, e))?;
        d.write_csv(&mut w)?;
        w.flush().map_err(|e| CliError::output(&path, e))?;
        Ok(path)
    }

    /// Tensor file whose metadata is `meta` plus `provenance`.
    pub fn tensor(&mut self, name: &str, t: &DenseTensor3, meta: Value) -> Result<PathBuf> {
        let mut map = Map::new();
        map.insert("provenance".into(), self.provenance.clone());
        if let Value::Object(fields) = meta {
            map.extend(fields);
        }
        let (path, w) = self.open(name)?;
        ntf_core::tensor_file::write_tensor(w, t, &Value::Object(map))
            .map_err(|e| CliError::output(&path, e))?;
        Ok(path)
    }
}

/// Shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
