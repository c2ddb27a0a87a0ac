mod analyze;
mod ingest;
mod scan;
mod synth;

use std::path::Path;

use ntf_core::data::{
    ingest_with_stats, normalize_tensor, raw_tensor, Dataset, IngestStats, Normalized, FEATURES,
};
use ntf_core::tensor::DenseTensor3;
use serde::Serialize;
use serde_json::Value;

use crate::args::{Cli, Command, TensorArgs};
use crate::config::dataset_options;
use crate::error::{CliError, Result};

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => ingest::run(a, &cli.out_dir, cli.threads),
        Command::RankScan(a) => scan::run(a, &cli.out_dir, cli.threads),
        Command::Analyze(a) => analyze::run(a, &cli.out_dir, cli.threads),
        Command::Synth(a) => synth::run(a, &cli.out_dir, cli.threads),
    }
}

/// A tensor together with whatever is known about its rows and columns.
pub(crate) struct Loaded {
    pub tensor: DenseTensor3,
    pub players: Vec<String>,
    pub features: Vec<String>,
    /// Present when the tensor was built from records in this run.
    pub dataset: Option<(Dataset, IngestStats, Normalized)>,
}

pub(crate) fn ingest_records(
    input: &crate::args::InputArgs,
) -> Result<(Dataset, IngestStats, Normalized)> {
    let path = input
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let (d, stats) = ingest_with_stats(path, input.format, &dataset_options(input))
        .map_err(|e| CliError::input(format!("ingesting {}", path.display()), e))?;
    let norm = normalize_tensor(&raw_tensor(&d), input.norm_scope)?;
    for c in &norm.constant {
        tracing::warn!(feature = FEATURES[c.feature], player = ?c.player, "constant feature mapped to zeros");
    }
    Ok((d, stats, norm))
}

pub(crate) fn load_source(src: &TensorArgs) -> Result<Loaded> {
    if let Some(path) = &src.tensor {
        let (tensor, meta) = ntf_core::tensor_file::load(path)
            .map_err(|e| CliError::input(format!("reading {}", path.display()), e))?;
        let (di, dj, _) = tensor.dims();
        let players = string_list(&meta, "players", di)
            .unwrap_or_else(|| (0..di).map(|i| i.to_string()).collect());
        let features = string_list(&meta, "features", dj).unwrap_or_else(|| default_features(dj));
        return Ok(Loaded {
            tensor,
            players,
            features,
            dataset: None,
        });
    }
    if src.input.input.is_none() {
        return Err(CliError::Usage(
            "one of --tensor or --input is required".into(),
        ));
    }
    let (d, stats, norm) = ingest_records(&src.input)?;
    Ok(Loaded {
        tensor: norm.tensor.clone(),
        players: d.players.clone(),
        features: default_features(FEATURES.len()),
        dataset: Some((d, stats, norm)),
    })
}

fn string_list(meta: &Value, key: &str, len: usize) -> Option<Vec<String>> {
    let list: Vec<String> = meta
        .get(key)?
        .as_array()?
        .iter()
        .map(|v| v.as_str().map(str::to_owned))
        .collect::<Option<_>>()?;
    (list.len() == len).then_some(list)
}

pub(crate) fn default_features(n: usize) -> Vec<String> {
    if n == FEATURES.len() {
        FEATURES.iter().map(|s| s.to_string()).collect()
    } else {
        (0..n).map(|j| format!("feature_{j}")).collect()
    }
}

pub(crate) fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
pub(crate) enum Status {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub(crate) struct StageReport {
    pub stage: &'static str,
    pub status: Status,
    pub detail: Option<String>,
}

#[derive(Debug, Default)]
pub(crate) struct Stages(pub Vec<StageReport>);

impl Stages {
    pub fn ok(&mut self, stage: &'static str) {
        self.push(stage, Status::Ok, None);
    }

    pub fn fail(&mut self, stage: &'static str, err: impl std::fmt::Display) {
        tracing::error!(stage, "{err}");
        self.push(stage, Status::Failed, Some(err.to_string()));
    }

    pub fn skip(&mut self, stage: &'static str, why: impl Into<String>) {
        self.push(stage, Status::Skipped, Some(why.into()));
    }

    fn push(&mut self, stage: &'static str, status: Status, detail: Option<String>) {
        self.0.push(StageReport {
            stage,
            status,
            detail,
        });
    }

    pub fn into_result(self) -> Result<()> {
        let failed: Vec<(String, String)> = self
            .0
            .into_iter()
            .filter(|s| matches!(s.status, Status::Failed))
            .map(|s| (s.stage.to_string(), s.detail.unwrap_or_default()))
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Stages(failed))
        }
    }
}

pub(crate) fn file_names(paths: &[std::path::PathBuf]) -> Vec<String> {
    paths
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect()
}

pub(crate) fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input("reading", ntf_core::Error::io(path, e)))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("parsing {}", path.display()), e.into()))
}
