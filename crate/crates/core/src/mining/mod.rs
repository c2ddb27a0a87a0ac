//! Interpretation of a fitted model: feature signatures, player clusters,
//! temporal profiles and win-rate statistics.

mod cluster;
mod membership;
mod stats;
mod temporal;
mod winrate;

pub use cluster::{
    adjusted_rand_index, intra_component_membership, kmeans, kmeans_with, silhouette,
    ClusterAssignment, KMeansConfig,
};
pub use membership::{feature_membership, ComponentSignature, FeatureSignature};
pub use stats::{
    kde_gaussian, kde_grid, silverman_bandwidth, trapezoid, welch_t_test, WelchTest, KDE_GRID_PAD,
};
pub use temporal::{
    cluster_feature_trajectories, global_modulation_mean, temporal_modulation, FeatureTrajectories,
    Series, TemporalProfile,
};
pub use winrate::{
    win_rate_stats, ClusterWinRate, KdeMode, PairwiseTest, WinRateStats, KDE_MIN_GRID_POINTS,
};
