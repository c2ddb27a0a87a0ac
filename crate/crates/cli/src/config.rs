use std::path::PathBuf;

use ntf_core::cp::DecomposeConfig;
use ntf_core::data::{DatasetOptions, InputFormat, NormScope, SyntheticSpec};
use ntf_core::mining::KdeMode;
use serde::Serialize;

use crate::args::{FitArgs, InputArgs};

pub const TOOL: &str = "ntf";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputEcho {
    pub path: PathBuf,
    pub format: InputFormat,
}

/// Everything that determines a command's output. Echoed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub input: Option<InputEcho>,
    pub arena_id: Option<i64>,
    pub matches: Option<usize>,
    pub norm_scope: Option<NormScope>,
    pub tensor: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub ranks: Option<Vec<usize>>,
    pub rank: Option<usize>,
    pub k: Option<usize>,
    pub decompose: Option<DecomposeConfig>,
    pub membership_fraction: Option<f64>,
    pub kde_mode: Option<KdeMode>,
    pub synth: Option<SyntheticSpec>,
    pub out_dir: PathBuf,
    pub threads: usize,
}

impl RunConfig {
    pub fn new(command: &'static str, out_dir: PathBuf, threads: usize) -> Self {
        Self {
            command,
            input: None,
            arena_id: None,
            matches: None,
            norm_scope: None,
            tensor: None,
            dataset: None,
            ranks: None,
            rank: None,
            k: None,
            decompose: None,
            membership_fraction: None,
            kde_mode: None,
            synth: None,
            out_dir,
            threads,
        }
    }

    pub fn with_input(mut self, a: &InputArgs) -> Self {
        self.input = a.input.clone().map(|path| InputEcho {
            path,
            format: a.format,
        });
        if self.input.is_some() {
            self.arena_id = dataset_options(a).arena_id;
            self.matches = Some(a.matches);
            self.norm_scope = Some(a.norm_scope);
        }
        self
    }

    /// The `provenance` block written into artifacts.
    pub fn provenance(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": TOOL,
            "version": VERSION,
            "config": self,
        })
    }
}

pub fn dataset_options(a: &InputArgs) -> DatasetOptions {
    DatasetOptions {
        arena_id: (!a.all_arenas).then_some(a.arena_id),
        matches: a.matches,
    }
}

pub fn decompose_config(f: &FitArgs) -> DecomposeConfig {
    DecomposeConfig {
        max_outer_iters: f.max_iters,
        abs_tol: f.abs_tol,
        rel_tol: f.rel_tol,
        n_restarts: f.restarts,
        seed: f.seed,
        ..DecomposeConfig::default()
    }
}
