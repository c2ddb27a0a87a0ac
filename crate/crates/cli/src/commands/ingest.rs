use std::path::Path;

use ntf_core::data::FEATURES;
use serde_json::json;

use super::ingest_records;
use crate::args::IngestArgs;
use crate::artifact::Artifacts;
use crate::config::RunConfig;
use crate::error::Result;

pub fn run(args: &IngestArgs, out_dir: &Path, threads: usize) -> Result<()> {
    let cfg = RunConfig::new("ingest", out_dir.to_path_buf(), threads).with_input(&args.input);
    let (d, stats, norm) = ingest_records(&args.input)?;
    let mut out = Artifacts::create(out_dir, cfg.provenance())?;

    let (di, dj, dk) = norm.tensor.dims();
    let meta = json!({
        "features": FEATURES,
        "players": d.players,
        "norm_scope": norm.scope,
        "feature_ranges": norm.ranges,
        "constant_features": norm.constant,
    });
    out.tensor("tensor.ntf", &norm.tensor, meta)?;
    out.dataset_csv("dataset.csv", &d)?;
    out.json(
        "summary.json",
        &json!({
            "dims": [di, dj, dk],
            "players_retained": di,
            "matches_per_player": dk,
            "players_dropped": stats.dropped_players,
            "records_read": stats.records_read,
            "other_arena_records": stats.other_arena_records,
            "truncated_records": stats.truncated_records,
            "features": FEATURES,
            "norm_scope": norm.scope,
            "feature_ranges": norm.ranges,
            "constant_features": norm.constant,
        }),
    )?;
    eprintln!(
        "ingested {di} players x {dk} matches into {}",
        out.dir().display()
    );
    Ok(())
}
