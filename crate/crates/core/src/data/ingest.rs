use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::record::{Dataset, DatasetOptions, IngestStats, MatchRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Csv,
    JsonLines,
    RiotMatchJson,
}

impl InputFormat {
    pub fn name(self) -> &'static str {
        match self {
            InputFormat::Csv => "csv",
            InputFormat::JsonLines => "json-lines",
            InputFormat::RiotMatchJson => "riot-match-json",
        }
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(InputFormat::Csv),
            "json-lines" | "jsonl" => Ok(InputFormat::JsonLines),
            "riot-match-json" | "riot" => Ok(InputFormat::RiotMatchJson),
            other => Err(Error::InvalidArgument(format!(
                "unknown input format {other:?}"
            ))),
        }
    }
}

/// Reads `path` and builds a validated [`Dataset`].
pub fn ingest(path: &Path, format: InputFormat, opts: &DatasetOptions) -> Result<Dataset> {
    ingest_with_stats(path, format, opts).map(|(d, _)| d)
}

pub fn ingest_with_stats(
    path: &Path,
    format: InputFormat,
    opts: &DatasetOptions,
) -> Result<(Dataset, IngestStats)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let records = match format {
        InputFormat::Csv => read_csv(reader, path)?,
        InputFormat::JsonLines => read_json_lines(reader, path)?,
        InputFormat::RiotMatchJson => read_riot(reader, path)?,
    };
    let (d, stats) = Dataset::build(records, opts)?;
    tracing::info!(
        path = %path.display(),
        players = d.n_players(),
        dropped = stats.dropped_players,
        "ingested dataset"
    );
    Ok((d, stats))
}

fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedRecord {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

pub fn read_csv<R: Read>(reader: R, path: &Path) -> Result<Vec<MatchRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<MatchRecord>() {
        match row {
            Ok(r) => out.push(r),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                return Err(malformed(path, line, e.to_string()));
            }
        }
    }
    Ok(out)
}

pub fn read_json_lines<R: BufRead>(reader: R, path: &Path) -> Result<Vec<MatchRecord>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|e| malformed(path, n + 1, e.to_string()))?;
        out.push(r);
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RiotMatch {
    game_id: i64,
    map_id: i64,
    game_creation: i64,
    participant_identities: Vec<RiotIdentity>,
    participants: Vec<RiotParticipant>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RiotIdentity {
    participant_id: u32,
    player: RiotPlayer,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RiotPlayer {
    account_id: serde_json::Value,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RiotParticipant {
    participant_id: u32,
    stats: RiotStats,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RiotStats {
    win: bool,
    kills: u64,
    deaths: u64,
    assists: u64,
    gold_earned: u64,
}

/// Saved match responses, either one JSON array or one match per line.
/// Each player's matches are numbered by `(gameCreation, gameId)`.
pub fn read_riot<R: BufRead>(mut reader: R, path: &Path) -> Result<Vec<MatchRecord>> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::io(path, e))?;
    let matches: Vec<(usize, RiotMatch)> = if text.trim_start().starts_with('[') {
        let all: Vec<RiotMatch> =
            serde_json::from_str(&text).map_err(|e| malformed(path, e.line(), e.to_string()))?;
        all.into_iter().map(|m| (0, m)).collect()
    } else {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| {
                serde_json::from_str(l)
                    .map(|m| (n + 1, m))
                    .map_err(|e| malformed(path, n + 1, e.to_string()))
            })
            .collect::<Result<_>>()?
    };

    struct Entry {
        order: (i64, i64),
        rec: MatchRecord,
    }
    let mut by_player: BTreeMap<String, Vec<Entry>> = BTreeMap::new();
    for (line, m) in matches {
        for p in &m.participants {
            let ident = m
                .participant_identities
                .iter()
                .find(|id| id.participant_id == p.participant_id)
                .ok_or_else(|| {
                    malformed(
                        path,
                        line,
                        format!(
                            "game {}: participant {} has no identity",
                            m.game_id, p.participant_id
                        ),
                    )
                })?;
            let player_id = match &ident.player.account_id {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                other => {
                    return Err(malformed(
                        path,
                        line,
                        format!("game {}: unsupported accountId {other}", m.game_id),
                    ))
                }
            };
            let s = &p.stats;
            by_player.entry(player_id.clone()).or_default().push(Entry {
                order: (m.game_creation, m.game_id),
                rec: MatchRecord {
                    player_id,
                    match_index: 0,
                    assists: s.assists,
                    deaths: s.deaths,
                    kills: s.kills,
                    gold: s.gold_earned,
                    winner: s.win,
                    arena_id: m.map_id,
                },
            });
        }
    }
    let mut out = Vec::new();
    for (player, mut entries) in by_player {
        entries.sort_by_key(|e| e.order);
        if let Some(w) = entries.windows(2).find(|w| w[0].order == w[1].order) {
            return Err(Error::InvalidArgument(format!(
                "player {player} appears twice in game {}",
                w[0].order.1
            )));
        }
        for (idx, mut e) in entries.into_iter().enumerate() {
            e.rec.match_index = idx as u32;
            out.push(e.rec);
        }
    }
    Ok(out)
}
