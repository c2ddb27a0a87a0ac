mod common;

use common::{best_split_1d, random_matrix, welch_oracle};
use nalgebra::DMatrix;
use ntf_core::cp::{decompose_best, DecomposeConfig, FactorModel};
use ntf_core::data::{gaussian_blobs, generate_synthetic, SyntheticSpec};
use ntf_core::mining::*;
use ntf_core::tensor::{DenseMatrix, DenseTensor3};
use ntf_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

fn unit_blobs(seed: u64) -> (DenseMatrix, Vec<usize>) {
    let centers = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    gaussian_blobs(&centers, &[100, 100, 100], 0.05, seed).unwrap()
}

fn assignment(labels: Vec<usize>, k: usize) -> ClusterAssignment {
    ClusterAssignment {
        k,
        labels,
        centroids: DenseMatrix::zeros(k, 1),
        inertia: 0.0,
        silhouette: None,
        sample_silhouettes: Vec::new(),
    }
}

#[test]
fn three_blobs_are_recovered() {
    let (x, truth) = unit_blobs(1);
    let c = kmeans(&x, 3, 10, 0).unwrap();
    assert_eq!(adjusted_rand_index(&c.labels, &truth).unwrap(), 1.0);
    assert!(c.silhouette.unwrap() >= 0.6);
    assert_eq!(c.sizes(), vec![100, 100, 100]);
}

#[test]
fn silhouette_matches_direct_computation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = random_matrix(25, 3, &mut rng);
    let labels: Vec<usize> = (0..25).map(|i| i % 3).collect();
    let (overall, per) = silhouette(&x, &labels).unwrap();
    let d = |a: usize, b: usize| {
        x.row(a)
            .iter()
            .zip(x.row(b))
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    };
    let mut total = 0.0;
    for i in 0..25 {
        let mean_to = |c: usize| {
            let m: Vec<usize> = (0..25).filter(|&j| j != i && labels[j] == c).collect();
            m.iter().map(|&j| d(i, j)).sum::<f64>() / m.len() as f64
        };
        let a = mean_to(labels[i]);
        let b = (0..3)
            .filter(|&c| c != labels[i])
            .map(mean_to)
            .fold(f64::INFINITY, f64::min);
        let s = (b - a) / a.max(b);
        assert!((per[i] - s).abs() < 1e-12);
        total += s;
    }
    assert!((overall - total / 25.0).abs() < 1e-12);
}

#[test]
fn intra_component_examples() {
    let a = DenseMatrix::from_vec(5, 1, vec![0.0, 0.0, 0.0, 10.0, 10.0]).unwrap();
    assert_eq!(
        intra_component_membership(&a, 0).unwrap(),
        vec![false, false, false, true, true]
    );
    let flat = DenseMatrix::from_vec(3, 1, vec![2.0; 3]).unwrap();
    assert!(matches!(
        intra_component_membership(&flat, 0),
        Err(Error::ConstantColumn(0))
    ));
}

#[test]
fn planted_clusters_show_their_dominant_component() {
    let spec = SyntheticSpec {
        n_players: 150,
        matches: 40,
        group_sizes: vec![60, 50, 40],
        seed: 3,
        ..SyntheticSpec::default()
    };
    let data = generate_synthetic(&spec).unwrap();
    let t = data.tensor().unwrap();
    let (fit, _) = decompose_best(&t, 3, &DecomposeConfig::default()).unwrap();
    let clusters = kmeans(&fit.model.a, 3, 10, 0).unwrap();
    assert!(adjusted_rand_index(&clusters.labels, &data.labels).unwrap() >= 0.9);
    let prof = temporal_modulation(&fit.model, &clusters).unwrap();
    for (c, comps) in prof.profiles.iter().enumerate() {
        let dominant = (0..3)
            .max_by(|&x, &y| {
                clusters
                    .centroids
                    .get(c, x)
                    .total_cmp(&clusters.centroids.get(c, y))
            })
            .unwrap();
        for k in 0..40 {
            for r in (0..3).filter(|&r| r != dominant) {
                assert!(
                    comps[dominant].mean[k] > comps[r].mean[k],
                    "cluster {c} step {k}"
                );
            }
        }
    }
}

#[test]
fn planted_behaviors_separate_trajectories() {
    // features: 0 = assists, 2 = kills
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let labels: Vec<usize> = (0..40).map(|i| i % 2).collect();
    let t = DenseTensor3::from_fn((40, 4, 25), |i, j, _| {
        let base = match (labels[i], j) {
            (0, 2) | (1, 0) => 5.0,
            (_, 0) | (_, 2) => 1.0,
            _ => 2.0,
        };
        base + 0.5 * rng.random::<f64>()
    });
    let tr = cluster_feature_trajectories(&t, &assignment(labels, 2)).unwrap();
    for k in 0..25 {
        assert!(tr.series[0][2].mean[k] > tr.series[1][2].mean[k]);
        assert!(tr.series[1][0].mean[k] > tr.series[0][0].mean[k]);
    }
}

#[test]
fn identical_players_give_common_series() {
    let t = DenseTensor3::from_fn((3, 2, 4), |_, j, k| (j * 4 + k) as f64);
    let tr = cluster_feature_trajectories(&t, &assignment(vec![0, 0, 0], 1)).unwrap();
    for j in 0..2 {
        assert_eq!(tr.series[0][j].stderr, vec![0.0; 4]);
        let expect: Vec<f64> = (0..4).map(|k| (j * 4 + k) as f64).collect();
        assert_eq!(tr.series[0][j].mean, expect);
    }
}

#[test]
fn kde_of_normal_sample_tracks_the_density() {
    // One sample's worst-case deviation has sd ~0.005, so judge the median.
    let grid: Vec<f64> = (0..=800).map(|i| -4.0 + i as f64 * 0.01).collect();
    let mut worst: Vec<f64> = (0..21u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = (0..10_000)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let dens = kde_gaussian(&values, &grid, None).unwrap();
            grid.iter()
                .zip(&dens)
                .map(|(&x, &d)| {
                    (d - (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    worst.sort_by(f64::total_cmp);
    assert!(worst[10] <= 0.02, "median deviation {}", worst[10]);
    assert!(worst[20] <= 0.04, "largest deviation {}", worst[20]);
}

#[test]
fn repeated_value_is_a_gaussian_bump() {
    let grid: Vec<f64> = (0..=100).map(|i| 2.0 + i as f64 * 0.02).collect();
    let dens = kde_gaussian(&[3.0; 5], &grid, Some(0.25)).unwrap();
    for (&x, &d) in grid.iter().zip(&dens) {
        let z = (x - 3.0) / 0.25;
        let expect = (-0.5 * z * z).exp() / (0.25 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((d - expect).abs() < 1e-12);
    }
}

#[test]
fn welch_matches_quadrature_oracle() {
    let fixtures: [(Vec<f64>, Vec<f64>); 4] = [
        (vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![2.0, 3.0, 4.0, 5.0, 6.0]),
        (
            vec![0.1, 0.4, 0.35, 0.8, 0.55, 0.2],
            vec![1.2, 0.9, 1.6, 2.1],
        ),
        (
            vec![10.0, 12.0, 9.5, 11.2, 10.8, 9.9, 10.1],
            vec![10.5, 10.4, 10.9, 10.6],
        ),
        (
            vec![0.5, 0.52, 0.47, 0.55, 0.49, 0.51, 0.53, 0.46],
            vec![0.56, 0.6, 0.58, 0.61, 0.57],
        ),
    ];
    for (x, y) in &fixtures {
        let got = welch_t_test(x, y).unwrap();
        let (t, df, p) = welch_oracle(x, y);
        assert!((got.t - t).abs() <= 1e-12 * t.abs().max(1.0));
        assert!((got.df - df).abs() <= 1e-10 * df);
        assert!((got.p - p).abs() <= 1e-6, "p {} vs oracle {p}", got.p);
    }
    let first = welch_t_test(&fixtures[0].0, &fixtures[0].1).unwrap();
    assert!((first.t + 1.0).abs() < 1e-12);
    assert!((first.df - 8.0).abs() < 1e-12);
}

#[test]
fn identical_samples_have_unit_p() {
    let x = [0.2, 0.4, 0.9, 0.1];
    let w = welch_t_test(&x, &x).unwrap();
    assert_eq!((w.t, w.p), (0.0, 1.0));
}

#[test]
fn small_mean_shift_is_detected_at_scale() {
    let mut significant = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = Normal::new(0.5, 0.05)
            .unwrap()
            .sample_iter(&mut rng)
            .take(500)
            .collect();
        let b: Vec<f64> = Normal::new(0.52, 0.05)
            .unwrap()
            .sample_iter(&mut rng)
            .take(500)
            .collect();
        if welch_t_test(&a, &b).unwrap().p <= 1e-3 {
            significant += 1;
        }
    }
    assert!(significant >= 95, "{significant} of 100");
}

fn rotation(seed: u64, dim: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    m.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kmeans_is_rotation_invariant(seed in any::<u64>()) {
        let (x, _) = unit_blobs(seed);
        let q = rotation(seed ^ 1, 3);
        let xm = DMatrix::from_row_slice(300, 3, x.values());
        let rotated = &xm * q.transpose();
        let y = DenseMatrix::from_fn(300, 3, |r, c| rotated[(r, c)]);
        let cx = kmeans(&x, 3, 10, 7).unwrap();
        let cy = kmeans(&y, 3, 10, 7).unwrap();
        prop_assert_eq!(adjusted_rand_index(&cx.labels, &cy.labels).unwrap(), 1.0);
        prop_assert!((cx.inertia - cy.inertia).abs() <= 1e-9 * cx.inertia.max(1e-300));
    }

    #[test]
    fn bimodal_split_matches_exhaustive_oracle(seed in any::<u64>(), n_lo in 2usize..30, n_hi in 2usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values: Vec<f64> = (0..n_lo).map(|_| rng.random_range(0.0..1.0)).collect();
        values.extend((0..n_hi).map(|_| rng.random_range(3.0..4.0)));
        let a = DenseMatrix::from_vec(values.len(), 1, values.clone()).unwrap();
        prop_assert_eq!(intra_component_membership(&a, 0).unwrap(), best_split_1d(&values));
    }

    #[test]
    fn temporal_profiles_aggregate_to_global_mean(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let model = FactorModel::from_factors(
            (0..3).map(|_| rng.random_range(0.5..2.0)).collect(),
            random_matrix(n, 3, &mut rng),
            random_matrix(4, 3, &mut rng),
            random_matrix(12, 3, &mut rng),
        ).unwrap();
        let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
        for i in (1..n).rev() {
            labels.swap(i, rng.random_range(0..=i));
        }
        let prof = temporal_modulation(&model, &assignment(labels, k)).unwrap();
        for r in 0..3 {
            let global = global_modulation_mean(&model, r);
            for t in 0..12 {
                let weighted: f64 = (0..k)
                    .map(|c| prof.cluster_sizes[c] as f64 * prof.profiles[c][r].mean[t])
                    .sum::<f64>() / n as f64;
                prop_assert!((weighted - global[t]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn kde_is_a_density(values in prop::collection::vec(-50.0f64..50.0, 2..200)) {
        prop_assume!(values.iter().any(|&v| v != values[0]));
        let h = silverman_bandwidth(&values).unwrap();
        let grid = kde_grid(&values, h, KDE_MIN_GRID_POINTS);
        let dens = kde_gaussian(&values, &grid, Some(h)).unwrap();
        prop_assert!(dens.iter().all(|&d| d >= 0.0));
        let area = trapezoid(&grid, &dens);
        prop_assert!((0.999..=1.001).contains(&area), "area {}", area);
    }

    #[test]
    fn welch_is_antisymmetric(
        x in prop::collection::vec(-10.0f64..10.0, 2..40),
        y in prop::collection::vec(-10.0f64..10.0, 2..40),
    ) {
        let a = welch_t_test(&x, &y).unwrap();
        let b = welch_t_test(&y, &x).unwrap();
        prop_assert_eq!(a.t, -b.t);
        prop_assert_eq!(a.p, b.p);
    }

    #[test]
    fn membership_is_scale_invariant(
        col in prop::collection::vec(0.0f64..1.0, 1..12),
        s in 1e-3f64..1e3,
        fraction in 0.05f64..1.0,
    ) {
        prop_assume!(col.iter().any(|&v| v > 0.0));
        let b = DenseMatrix::from_vec(col.len(), 1, col.clone()).unwrap();
        let scaled = DenseMatrix::from_vec(col.len(), 1, col.iter().map(|v| v * s).collect()).unwrap();
        let x = feature_membership(&b, fraction).unwrap();
        let y = feature_membership(&scaled, fraction).unwrap();
        prop_assert_eq!(x.components[0].indices(), y.components[0].indices());
    }

    #[test]
    fn full_fraction_retains_every_nonzero(col in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], 1..12)) {
        prop_assume!(col.iter().any(|&v| v > 0.0));
        let b = DenseMatrix::from_vec(col.len(), 1, col.clone()).unwrap();
        let expect: Vec<usize> = (0..col.len()).filter(|&i| col[i] > 0.0).collect();
        prop_assert_eq!(feature_membership(&b, 1.0).unwrap().components[0].indices(), expect);
    }
}
