//! Match records, ingestion, normalization and synthetic data.

pub mod ingest;
pub mod normalize;
pub mod record;
pub mod synth;

pub use ingest::{ingest, ingest_with_stats, InputFormat};
pub use normalize::{
    normalize_minmax, normalize_tensor, raw_tensor, ConstantFeature, FeatureRange, NormScope,
    Normalized,
};
pub use record::{
    Dataset, DatasetOptions, IngestStats, MatchRecord, CSV_HEADER, DEFAULT_ARENA_ID,
    DEFAULT_MATCHES, FEATURES, N_FEATURES,
};
pub use synth::{
    add_noise, gaussian_blobs, generate_synthetic, planted_tensor, Planted, SyntheticData,
    SyntheticSpec,
};
