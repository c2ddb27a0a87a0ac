use std::path::Path;

use ntf_core::data::{generate_synthetic, SyntheticSpec, FEATURES};
use serde_json::json;

use super::read_json;
use crate::args::SynthArgs;
use crate::artifact::{num, Artifacts};
use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub fn run(args: &SynthArgs, out_dir: &Path, threads: usize) -> Result<()> {
    let mut spec: SyntheticSpec = match &args.spec {
        Some(path) => serde_json::from_value(read_json(path)?)
            .map_err(|e| CliError::input(format!("parsing {}", path.display()), e.into()))?,
        None => SyntheticSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(noise) = args.noise {
        spec.noise = noise;
    }
    spec.exact |= args.exact;
    spec.validate()
        .map_err(|e| CliError::input("synthetic spec", e))?;

    let mut cfg = RunConfig::new("synth", out_dir.to_path_buf(), threads);
    cfg.synth = Some(spec.clone());
    let data = generate_synthetic(&spec)?;
    let tensor = data.tensor()?;
    let mut out = Artifacts::create(out_dir, cfg.provenance())?;

    out.json("spec.json", &json!({ "spec": spec }))?;
    out.dataset_csv("dataset.csv", &data.dataset)?;
    out.json(
        "truth.json",
        &json!({
            "features": FEATURES,
            "signatures": spec.signatures,
            "group_sizes": spec.group_sizes,
            "model": data.truth,
        }),
    )?;
    let players = &data.dataset.players;
    out.csv(
        "labels.csv",
        &["player", "player_id", "group"],
        data.labels
            .iter()
            .enumerate()
            .map(|(i, g)| vec![i.to_string(), players[i].clone(), g.to_string()]),
    )?;
    out.csv(
        "truth_factors.csv",
        &["mode", "index", "component", "value"],
        [
            ("player", &data.truth.a),
            ("feature", &data.truth.b),
            ("match", &data.truth.c),
        ]
        .into_iter()
        .flat_map(|(mode, m)| {
            (0..m.rows()).flat_map(move |i| {
                (0..m.cols()).map(move |r| {
                    vec![
                        mode.to_string(),
                        i.to_string(),
                        r.to_string(),
                        num(m.get(i, r)),
                    ]
                })
            })
        }),
    )?;
    out.tensor(
        "tensor.ntf",
        &tensor,
        json!({
            "features": FEATURES,
            "players": players,
            "norm_scope": if spec.exact { None } else { Some("global") },
            "latent": spec.exact,
        }),
    )?;
    eprintln!(
        "generated {} players x {} matches into {}",
        spec.n_players,
        spec.matches,
        out.dir().display()
    );
    Ok(())
}
