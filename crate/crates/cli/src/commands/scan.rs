use std::path::Path;

use ntf_core::cp::rank_scan;
use serde_json::json;

use super::{load_source, with_threads, Stages};
use crate::args::RankScanArgs;
use crate::artifact::{opt_num, Artifacts};
use crate::config::{decompose_config, RunConfig};
use crate::error::Result;

pub fn run(args: &RankScanArgs, out_dir: &Path, threads: usize) -> Result<()> {
    let dcfg = decompose_config(&args.fit);
    let mut cfg =
        RunConfig::new("rank-scan", out_dir.to_path_buf(), threads).with_input(&args.source.input);
    cfg.tensor = args.source.tensor.clone();
    cfg.ranks = Some(args.ranks.0.clone());
    cfg.decompose = Some(dcfg.clone());

    let src = load_source(&args.source)?;
    let mut out = Artifacts::create(out_dir, cfg.provenance())?;
    let mut stages = Stages::default();
    match with_threads(threads, || rank_scan(&src.tensor, &args.ranks.0, &dcfg))? {
        Ok(scan) => {
            let failed = scan.records().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                tracing::warn!(failed, "some restarts failed; see cc_curve.csv");
            }
            out.csv(
                "cc_curve.csv",
                &[
                    "rank",
                    "restart",
                    "seed",
                    "core_consistency",
                    "fit",
                    "error",
                ],
                scan.records().map(|r| {
                    vec![
                        r.rank.to_string(),
                        r.restart.to_string(),
                        r.seed.to_string(),
                        opt_num(r.core_consistency),
                        opt_num(r.fit),
                        r.error.clone().unwrap_or_default(),
                    ]
                }),
            )?;
            let curve: Vec<_> = scan
                .curve()
                .into_iter()
                .map(|(rank, cc)| json!({"rank": rank, "best_core_consistency": cc}))
                .collect();
            out.json(
                "rank_selection.json",
                &json!({
                    "selected_rank": scan.selected_rank,
                    "rationale": scan.selection_rationale,
                    "curve": curve,
                    "failed_restarts": failed,
                    "ranks": scan.ranks,
                }),
            )?;
            eprintln!(
                "selected rank {}: {}",
                scan.selected_rank, scan.selection_rationale
            );
            stages.ok("rank-scan");
        }
        Err(e) => stages.fail("rank-scan", e),
    }
    stages.into_result()
}
