use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Tensor feature order: assists (0), deaths (1), kills (2), gold (3).
pub const FEATURES: [&str; 4] = ["assists", "deaths", "kills", "gold"];
pub const N_FEATURES: usize = FEATURES.len();

/// Summoner's Rift.
pub const DEFAULT_ARENA_ID: i64 = 11;
pub const DEFAULT_MATCHES: usize = 100;

pub const CSV_HEADER: [&str; 8] = [
    "player_id",
    "match_index",
    "assists",
    "deaths",
    "kills",
    "gold",
    "winner",
    "arena_id",
];

/// One player's performance in one match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub player_id: String,
    /// Position in the player's match history.
    pub match_index: u32,
    pub assists: u64,
    pub deaths: u64,
    pub kills: u64,
    pub gold: u64,
    #[serde(deserialize_with = "bool_or_int")]
    pub winner: bool,
    pub arena_id: i64,
}

impl MatchRecord {
    /// Feature `f` in [`FEATURES`] order.
    pub fn feature(&self, f: usize) -> f64 {
        match f {
            0 => self.assists as f64,
            1 => self.deaths as f64,
            2 => self.kills as f64,
            3 => self.gold as f64,
            _ => panic!("feature index {f} out of range"),
        }
    }
}

/// Accepts `true`/`false` as well as `0`/`1`.
fn bool_or_int<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Bool(bool),
        Int(u8),
    }
    match Flag::deserialize(d)? {
        Flag::Bool(b) => Ok(b),
        Flag::Int(0) => Ok(false),
        Flag::Int(1) => Ok(true),
        Flag::Int(n) => Err(serde::de::Error::custom(format!(
            "winner must be 0 or 1, got {n}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetOptions {
    /// Keep only records from this arena; `None` keeps all.
    pub arena_id: Option<i64>,
    /// Matches per retained player.
    pub matches: usize,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            arena_id: Some(DEFAULT_ARENA_ID),
            matches: DEFAULT_MATCHES,
        }
    }
}

/// Validated match records: every retained player has exactly `matches`
/// records, indexed `0..matches`, sorted by `(player_id, match_index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<MatchRecord>,
    pub players: Vec<String>,
    pub matches: usize,
    pub arena_id: Option<i64>,
}

/// What [`Dataset::build`] discarded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records_read: usize,
    /// Records outside the arena filter.
    pub other_arena_records: usize,
    /// Players with fewer than `matches` records in the arena.
    pub dropped_players: usize,
    /// Records past the first `matches` of a retained player.
    pub truncated_records: usize,
}

impl Dataset {
    /// Filters to the arena, keeps each player's first `matches` records in
    /// history order (renumbered from 0) and drops players with fewer.
    pub fn from_records(records: Vec<MatchRecord>, opts: &DatasetOptions) -> Result<Self> {
        Self::build(records, opts).map(|(d, _)| d)
    }

    pub fn build(records: Vec<MatchRecord>, opts: &DatasetOptions) -> Result<(Self, IngestStats)> {
        if opts.matches == 0 {
            return Err(Error::InvalidArgument(
                "matches per player must be positive".into(),
            ));
        }
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert((r.player_id.as_str(), r.match_index)) {
                return Err(Error::DuplicateKey {
                    player_id: r.player_id.clone(),
                    match_index: r.match_index,
                });
            }
        }
        let mut stats = IngestStats {
            records_read: records.len(),
            ..IngestStats::default()
        };
        let mut by_player: BTreeMap<String, Vec<MatchRecord>> = BTreeMap::new();
        for r in records {
            if opts.arena_id.is_none_or(|a| a == r.arena_id) {
                by_player.entry(r.player_id.clone()).or_default().push(r);
            } else {
                stats.other_arena_records += 1;
            }
        }
        let k = opts.matches;
        let mut out = Vec::new();
        let mut players = Vec::new();
        for (player, mut recs) in by_player {
            if recs.len() < k {
                stats.dropped_players += 1;
                continue;
            }
            recs.sort_by_key(|r| r.match_index);
            stats.truncated_records += recs.len() - k;
            recs.truncate(k);
            for (idx, r) in recs.iter_mut().enumerate() {
                r.match_index = idx as u32;
            }
            out.extend(recs);
            players.push(player);
        }
        if stats.dropped_players > 0 {
            tracing::warn!(
                dropped = stats.dropped_players,
                matches = k,
                "dropped players with too few matches"
            );
        }
        if players.is_empty() {
            return Err(Error::NoPlayersRetained);
        }
        let d = Self {
            records: out,
            players,
            matches: k,
            arena_id: opts.arena_id,
        };
        Ok((d, stats))
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    /// Records of the `i`-th player in match order.
    pub fn player_records(&self, i: usize) -> &[MatchRecord] {
        &self.records[i * self.matches..(i + 1) * self.matches]
    }

    /// `winners()[i][k]` is whether player `i` won match `k`.
    pub fn winners(&self) -> Vec<Vec<bool>> {
        (0..self.n_players())
            .map(|i| self.player_records(i).iter().map(|r| r.winner).collect())
            .collect()
    }

    /// Canonical CSV emission; re-ingesting it reproduces this dataset.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        wr.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.records {
            wr.write_record([
                r.player_id.clone(),
                r.match_index.to_string(),
                r.assists.to_string(),
                r.deaths.to_string(),
                r.kills.to_string(),
                r.gold.to_string(),
                u8::from(r.winner).to_string(),
                r.arena_id.to_string(),
            ])
            .map_err(io)?;
        }
        wr.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}
