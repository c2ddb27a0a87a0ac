use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ntf_core::data::{InputFormat, NormScope, DEFAULT_ARENA_ID, DEFAULT_MATCHES};
use ntf_core::mining::KdeMode;

#[derive(Debug, Parser)]
#[command(
    name = "ntf",
    version,
    about = "Non-negative tensor factorization of player telemetry"
)]
pub struct Cli {
    /// Worker threads for restarts; 1 is the sequential reference, 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Directory for all artifacts.
    #[arg(long, global = true, env = "NTF_OUT_DIR", default_value = "ntf-out")]
    pub out_dir: PathBuf,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read match records and write the normalized tensor with a summary.
    Ingest(IngestArgs),
    /// Fit every rank in a range and pick one from the core-consistency curve.
    RankScan(RankScanArgs),
    /// Fit one rank and emit signatures, clusters, profiles and win-rate statistics.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic dataset with planted factors.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Match record file.
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: InputFormat,

    /// Keep only matches played in this arena.
    #[arg(long, default_value_t = DEFAULT_ARENA_ID, conflicts_with = "all_arenas")]
    pub arena_id: i64,

    /// Keep matches from every arena.
    #[arg(long)]
    pub all_arenas: bool,

    /// Matches per player; shorter histories are dropped, longer ones truncated.
    #[arg(long, default_value_t = DEFAULT_MATCHES)]
    pub matches: usize,

    #[arg(long, default_value = "global", value_parser = parse_scope)]
    pub norm_scope: NormScope,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

/// Where the tensor comes from: a tensor file or raw records.
#[derive(Debug, Clone, Args)]
pub struct TensorArgs {
    /// Tensor file written by `ingest` or `synth`.
    #[arg(long, conflicts_with = "input")]
    pub tensor: Option<PathBuf>,

    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Independent restarts per rank; restart s is seeded with seed + s.
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,

    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,

    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RankScanArgs {
    #[command(flatten)]
    pub source: TensorArgs,

    /// Ranks to fit: `1..10` (inclusive), `3`, or `2,3,5`.
    #[arg(long, default_value = "1..10", value_parser = parse_ranks)]
    pub ranks: Ranks,

    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: TensorArgs,

    /// Canonical dataset CSV supplying match outcomes when the tensor comes from a file.
    #[arg(long, conflicts_with = "input")]
    pub dataset: Option<PathBuf>,

    /// Rank to fit; defaults to the one in `rank_selection.json` under the output directory.
    #[arg(long)]
    pub rank: Option<usize>,

    /// Number of player clusters; defaults to the rank.
    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long, default_value_t = 0.95)]
    pub membership_fraction: f64,

    #[arg(long, default_value = "player-mean", value_parser = parse_kde_mode)]
    pub kde_mode: KdeMode,

    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// JSON generator spec; missing fields take their defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub noise: Option<f64>,

    /// Skip count rounding; the tensor file holds the latent tensor.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranks(pub Vec<usize>);

pub fn parse_ranks(s: &str) -> Result<Ranks, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid rank {t:?}"))
    };
    let mut out = Vec::new();
    for part in s.split(',') {
        if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
            if lo > hi {
                return Err(format!("empty rank range {part:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(num(part)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.first() == Some(&0) {
        return Err("ranks must be at least 1".into());
    }
    if out.is_empty() {
        return Err("no ranks given".into());
    }
    Ok(Ranks(out))
}

fn parse_format(s: &str) -> Result<InputFormat, String> {
    s.parse().map_err(|e: ntf_core::Error| e.to_string())
}

fn parse_scope(s: &str) -> Result<NormScope, String> {
    match s {
        "global" => Ok(NormScope::Global),
        "per-player" => Ok(NormScope::PerPlayer),
        _ => Err(format!(
            "unknown scope {s:?}; expected global or per-player"
        )),
    }
}

fn parse_kde_mode(s: &str) -> Result<KdeMode, String> {
    match s {
        "player-mean" => Ok(KdeMode::PlayerMean),
        "raw" => Ok(KdeMode::Raw),
        _ => Err(format!(
            "unknown KDE mode {s:?}; expected player-mean or raw"
        )),
    }
}
