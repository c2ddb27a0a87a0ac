use std::collections::BTreeSet;
use std::path::Path;

use ntf_core::cp::decompose_best;
use ntf_core::data::{ingest, DatasetOptions, InputFormat};
use ntf_core::mining::{
    cluster_feature_trajectories, feature_membership, intra_component_membership, kmeans,
    temporal_modulation, win_rate_stats, ClusterAssignment,
};
use serde_json::json;

use super::{file_names, load_source, read_json, with_threads, Loaded, Stages};
use crate::args::AnalyzeArgs;
use crate::artifact::{num, opt_num, Artifacts};
use crate::config::{decompose_config, RunConfig};
use crate::error::{CliError, Result};

const KMEANS_INITS: usize = 10;

pub fn run(args: &AnalyzeArgs, out_dir: &Path, threads: usize) -> Result<()> {
    let rank = resolve_rank(args, out_dir)?;
    let k = args.k.unwrap_or(rank);
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    if !(args.membership_fraction > 0.0 && args.membership_fraction <= 1.0) {
        return Err(CliError::Usage(
            "--membership-fraction must be in (0, 1]".into(),
        ));
    }
    let dcfg = decompose_config(&args.fit);
    let mut cfg =
        RunConfig::new("analyze", out_dir.to_path_buf(), threads).with_input(&args.source.input);
    cfg.tensor = args.source.tensor.clone();
    cfg.dataset = args.dataset.clone();
    cfg.rank = Some(rank);
    cfg.k = Some(k);
    cfg.decompose = Some(dcfg.clone());
    cfg.membership_fraction = Some(args.membership_fraction);
    cfg.kde_mode = Some(args.kde_mode);

    let src = load_source(&args.source)?;
    let winners = match (&src.dataset, &args.dataset) {
        (Some((d, _, _)), _) => Some(d.winners()),
        (None, Some(path)) => Some(outcomes_from_csv(path, &src)?),
        (None, None) => None,
    };

    let mut out = Artifacts::create(out_dir, cfg.provenance())?;
    let mut stages = Stages::default();
    let t = &src.tensor;

    let (best, restarts) = match with_threads(threads, || decompose_best(t, rank, &dcfg))? {
        Ok(x) => x,
        Err(e) => {
            stages.fail("decompose", e);
            for s in [
                "signatures",
                "clusters",
                "temporal",
                "trajectories",
                "win-stats",
            ] {
                stages.skip(s, "decompose failed");
            }
            write_report(&mut out, &stages, rank, k, None)?;
            return stages.into_result();
        }
    };
    let model = &best.model;
    out.json(
        "factor_model.json",
        &json!({
            "rank": rank,
            "core_consistency": best.core_consistency,
            "features": src.features,
            "players": src.players,
            "model": model,
            "restarts": restarts,
        }),
    )?;
    out.csv(
        "temporal_factors.csv",
        &["component", "match", "value", "weighted"],
        (0..rank).flat_map(|r| {
            (0..model.c.rows()).map(move |kk| {
                let v = model.c.get(kk, r);
                vec![
                    r.to_string(),
                    kk.to_string(),
                    num(v),
                    num(model.lambda[r] * v),
                ]
            })
        }),
    )?;
    stages.ok("decompose");

    match feature_membership(&model.b, args.membership_fraction) {
        Ok(sig) => {
            let masked = sig.masked(model.b.rows());
            let comps: Vec<_> = sig
                .components
                .iter()
                .map(|c| {
                    json!({
                        "component": c.component,
                        "features": c.indices().iter().map(|&j| &src.features[j]).collect::<Vec<_>>(),
                        "retained": c.retained.iter().map(|&(j, v)| json!({"index": j, "feature": src.features[j], "value": v})).collect::<Vec<_>>(),
                        "degenerate": c.degenerate,
                    })
                })
                .collect();
            out.json(
                "feature_signatures.json",
                &json!({"fraction": sig.fraction, "components": comps}),
            )?;
            out.csv(
                "feature_membership.csv",
                &[
                    "component",
                    "feature_index",
                    "feature",
                    "value",
                    "masked_value",
                    "retained",
                ],
                (0..rank).flat_map(|r| {
                    let masked = &masked;
                    let features = &src.features;
                    (0..model.b.rows()).map(move |j| {
                        let m = masked.get(j, r);
                        vec![
                            r.to_string(),
                            j.to_string(),
                            features[j].clone(),
                            num(model.b.get(j, r)),
                            num(m),
                            u8::from(m != 0.0).to_string(),
                        ]
                    })
                }),
            )?;
            stages.ok("signatures");
        }
        Err(e) => stages.fail("signatures", e),
    }

    let clusters = cluster_stage(&mut out, &mut stages, &src, model, rank, k, args.fit.seed)?;

    match &clusters {
        Some(c) => {
            match temporal_modulation(model, c) {
                Ok(p) => {
                    out.csv(
                        "temporal_profiles.csv",
                        &["cluster", "component", "match", "mean", "stderr"],
                        series_rows(&p.profiles, |r| r.to_string()),
                    )?;
                    stages.ok("temporal");
                }
                Err(e) => stages.fail("temporal", e),
            }
            match cluster_feature_trajectories(t, c) {
                Ok(tr) => {
                    out.csv(
                        "trajectories.csv",
                        &["cluster", "feature", "match", "mean", "stderr"],
                        series_rows(&tr.series, |j| src.features[j].clone()),
                    )?;
                    stages.ok("trajectories");
                }
                Err(e) => stages.fail("trajectories", e),
            }
        }
        None => {
            stages.skip("temporal", "clustering failed");
            stages.skip("trajectories", "clustering failed");
        }
    }

    match (&clusters, &winners) {
        (Some(c), Some(w)) => match win_rate_stats(w, c, args.kde_mode) {
            Ok(s) => {
                out.csv(
                    "kde.csv",
                    &["cluster", "x", "density"],
                    s.clusters.iter().flat_map(|cw| {
                        cw.grid
                            .iter()
                            .zip(&cw.density)
                            .map(|(&x, &d)| vec![cw.cluster.to_string(), num(x), num(d)])
                    }),
                )?;
                out.json("win_stats.json", &s)?;
                stages.ok("win-stats");
            }
            Err(e) => stages.fail("win-stats", e),
        },
        (None, _) => stages.skip("win-stats", "clustering failed"),
        (_, None) => stages.skip("win-stats", "no match outcomes; pass --input or --dataset"),
    }

    write_report(
        &mut out,
        &stages,
        rank,
        k,
        Some((best.core_consistency, model.fit)),
    )?;
    stages.into_result()
}

fn resolve_rank(args: &AnalyzeArgs, out_dir: &Path) -> Result<usize> {
    if let Some(r) = args.rank {
        return Ok(r);
    }
    let path = out_dir.join("rank_selection.json");
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "no --rank given and {} does not exist; run rank-scan first",
            path.display()
        )));
    }
    read_json(&path)?
        .get("selected_rank")
        .and_then(|v| v.as_u64())
        .map(|r| r as usize)
        .ok_or_else(|| CliError::Usage(format!("{}: missing selected_rank", path.display())))
}

fn outcomes_from_csv(path: &Path, src: &Loaded) -> Result<Vec<Vec<bool>>> {
    let (_, _, dk) = src.tensor.dims();
    let opts = DatasetOptions {
        arena_id: None,
        matches: dk,
    };
    let d = ingest(path, InputFormat::Csv, &opts)
        .map_err(|e| CliError::input(format!("reading {}", path.display()), e))?;
    if d.players != src.players {
        return Err(CliError::Usage(format!(
            "{}: players do not match the tensor's players",
            path.display()
        )));
    }
    Ok(d.winners())
}

fn cluster_stage(
    out: &mut Artifacts,
    stages: &mut Stages,
    src: &Loaded,
    model: &ntf_core::cp::FactorModel,
    rank: usize,
    k: usize,
    seed: u64,
) -> Result<Option<ClusterAssignment>> {
    let points = &model.a;
    let mut ks: BTreeSet<usize> = (rank.saturating_sub(1).max(2)..=rank + 2).collect();
    ks.insert(k);
    let mut warnings = Vec::new();
    let mut sweep = Vec::new();
    let mut primary = None;
    for &kk in &ks {
        match kmeans(points, kk, KMEANS_INITS, seed) {
            Ok(c) => {
                sweep.push(json!({"k": kk, "silhouette": c.silhouette, "inertia": c.inertia, "sizes": c.sizes()}));
                if kk == k {
                    primary = Some(Ok(c));
                }
            }
            Err(e) => {
                warnings.push(format!("k={kk}: {e}"));
                sweep.push(json!({"k": kk, "silhouette": null, "inertia": null, "sizes": null, "warning": e.to_string()}));
                if kk == k {
                    primary = Some(Err(e));
                }
            }
        }
    }
    for w in &warnings {
        tracing::warn!("clustering {w}");
    }
    out.csv(
        "silhouettes.csv",
        &["k", "silhouette", "inertia", "warning"],
        sweep.iter().map(|s| {
            vec![
                s["k"].to_string(),
                opt_num(s["silhouette"].as_f64()),
                opt_num(s["inertia"].as_f64()),
                s.get("warning")
                    .and_then(|w| w.as_str())
                    .unwrap_or_default()
                    .to_string(),
            ]
        }),
    )?;

    let mut intra = Vec::new();
    for r in 0..rank {
        match intra_component_membership(points, r) {
            Ok(m) => intra.push(Some(m)),
            Err(e) => {
                warnings.push(format!("intra-component membership of component {r}: {e}"));
                intra.push(None);
            }
        }
    }

    let clusters = match primary.expect("primary k is in the sweep") {
        Ok(c) => Some(c),
        Err(e) => {
            stages.fail("clusters", format!("k={k}: {e}"));
            None
        }
    };
    let mut header = vec![
        "player".to_string(),
        "player_id".into(),
        "cluster".into(),
        "silhouette".into(),
    ];
    header.extend((0..rank).map(|r| format!("a_{r}")));
    header.extend((0..rank).map(|r| format!("member_{r}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv(
        "user_factors.csv",
        &header,
        (0..points.rows()).map(|i| {
            let mut row = vec![i.to_string(), src.players[i].clone()];
            match &clusters {
                Some(c) => {
                    row.push(c.labels[i].to_string());
                    row.push(
                        c.sample_silhouettes
                            .get(i)
                            .map(|&s| num(s))
                            .unwrap_or_default(),
                    );
                }
                None => row.extend([String::new(), String::new()]),
            }
            row.extend((0..rank).map(|r| num(points.get(i, r))));
            row.extend(intra.iter().map(|m| {
                m.as_ref()
                    .map(|m| u8::from(m[i]).to_string())
                    .unwrap_or_default()
            }));
            row
        }),
    )?;
    out.json(
        "clusters.json",
        &json!({
            "k": k,
            "points": "player factor rows",
            "labels": clusters.as_ref().map(|c| &c.labels),
            "sizes": clusters.as_ref().map(|c| c.sizes()),
            "centroids": clusters.as_ref().map(|c| &c.centroids),
            "inertia": clusters.as_ref().map(|c| c.inertia),
            "silhouette": clusters.as_ref().and_then(|c| c.silhouette),
            "silhouettes_by_k": sweep,
            "warnings": warnings,
        }),
    )?;
    if clusters.is_some() {
        stages.ok("clusters");
    }
    Ok(clusters)
}

fn series_rows(
    series: &[Vec<ntf_core::mining::Series>],
    label: impl Fn(usize) -> String,
) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (c, per) in series.iter().enumerate() {
        for (j, s) in per.iter().enumerate() {
            for (kk, (&m, &e)) in s.mean.iter().zip(&s.stderr).enumerate() {
                rows.push(vec![
                    c.to_string(),
                    label(j),
                    kk.to_string(),
                    num(m),
                    num(e),
                ]);
            }
        }
    }
    rows
}

fn write_report(
    out: &mut Artifacts,
    stages: &Stages,
    rank: usize,
    k: usize,
    fit: Option<(f64, f64)>,
) -> Result<()> {
    let artifacts = file_names(out.written());
    out.json(
        "report.json",
        &json!({
            "rank": rank,
            "k": k,
            "core_consistency": fit.map(|f| f.0),
            "fit": fit.map(|f| f.1),
            "stages": stages.0,
            "artifacts": artifacts,
        }),
    )?;
    Ok(())
}
