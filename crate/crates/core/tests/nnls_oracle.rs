mod common;

use common::{nnls_exhaustive, well_conditioned_ls};
use ntf_core::nnls::{kkt_residual, solve_nnls_bpp, solve_nnls_bpp_with, BppConfig, NnlsProblem};
use ntf_core::tensor::DenseMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;

fn max_diff_to_oracle(p: &NnlsProblem, x: &DenseMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for c in 0..p.n_rhs() {
        let expect = nnls_exhaustive(p.gram(), &p.rhs().column(c));
        for (v, e) in x.column(c).iter().zip(&expect) {
            worst = worst.max((v - e).abs());
        }
    }
    worst
}

#[test]
fn matches_exhaustive_enumeration_on_random_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6e6c73);
    let mut worst: f64 = 0.0;
    for _ in 0..1200 {
        let (g, y) = well_conditioned_ls(1, &mut rng);
        let p = NnlsProblem::from_least_squares(&g, &y).unwrap();
        let sol = solve_nnls_bpp(&p, TOL, 1000).unwrap();
        assert!(sol.kkt_residual <= TOL, "kkt {}", sol.kkt_residual);
        worst = worst.max(max_diff_to_oracle(&p, &sol.x));
    }
    assert!(worst <= 1e-8, "max deviation {worst}");
}

#[test]
fn multi_column_problems_match_per_column_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let (g, y) = well_conditioned_ls(5, &mut rng);
        let p = NnlsProblem::from_least_squares(&g, &y).unwrap();
        let sol = solve_nnls_bpp(&p, TOL, 1000).unwrap();
        assert!(max_diff_to_oracle(&p, &sol.x) <= 1e-8);
    }
}

#[test]
fn single_variable_clamps_at_zero() {
    let p = NnlsProblem::new(
        DenseMatrix::from_vec(1, 1, vec![4.0]).unwrap(),
        DenseMatrix::from_vec(1, 1, vec![-2.0]).unwrap(),
    )
    .unwrap();
    let sol = solve_nnls_bpp(&p, TOL, 100).unwrap();
    assert_eq!(sol.x.values(), &[0.0]);
    assert_eq!(p.gradient(&sol.x).unwrap().values(), &[2.0]);
}

#[test]
fn interior_optimum_is_returned_unchanged() {
    let p = NnlsProblem::new(
        DenseMatrix::identity(2),
        DenseMatrix::from_vec(2, 1, vec![1.0, 2.0]).unwrap(),
    )
    .unwrap();
    let sol = solve_nnls_bpp(&p, TOL, 100).unwrap();
    assert!((sol.x.get(0, 0) - 1.0).abs() < 1e-10);
    assert!((sol.x.get(1, 0) - 2.0).abs() < 1e-10);
}

#[test]
fn kkt_residual_examples() {
    let gram = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
    let rhs = DenseMatrix::from_vec(2, 1, vec![2.0, 3.0]).unwrap();
    let p = NnlsProblem::new(gram, rhs).unwrap();
    let exact = DenseMatrix::from_vec(2, 1, vec![1.0, 0.75]).unwrap();
    assert!(kkt_residual(&p, &exact).unwrap() < 1e-15);
    let zero = DenseMatrix::zeros(2, 1);
    assert!((kkt_residual(&p, &zero).unwrap() - 3.0).abs() < 1e-15);
}

#[test]
fn kkt_residual_grows_with_perturbation() {
    let gram = DenseMatrix::from_rows(&[
        vec![3.0, 1.0, 0.5],
        vec![1.0, 2.0, 0.3],
        vec![0.5, 0.3, 1.5],
    ])
    .unwrap();
    let rhs = DenseMatrix::from_vec(3, 1, vec![1.0, -0.5, 2.0]).unwrap();
    let p = NnlsProblem::new(gram, rhs).unwrap();
    let x = solve_nnls_bpp(&p, TOL, 100).unwrap().x;
    let mut last = kkt_residual(&p, &x).unwrap();
    for step in 1..=20 {
        let eps = step as f64 * 0.01;
        let xp = DenseMatrix::from_fn(3, 1, |r, c| x.get(r, c) + eps);
        let res = kkt_residual(&p, &xp).unwrap();
        assert!(
            res > last,
            "residual {res} did not grow past {last} at eps {eps}"
        );
        last = res;
    }
}

#[test]
fn backup_rule_terminates_without_full_exchanges() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = BppConfig {
        full_exchange_budget: 0,
        ..BppConfig::default()
    };
    for _ in 0..300 {
        let (g, y) = well_conditioned_ls(3, &mut rng);
        let p = NnlsProblem::from_least_squares(&g, &y).unwrap();
        let sol = solve_nnls_bpp_with(&p, &cfg).unwrap();
        assert!(sol.kkt_residual <= TOL);
        assert!(max_diff_to_oracle(&p, &sol.x) <= 1e-8);
    }
}

proptest! {
    #[test]
    fn column_permutation_invariance(seed in any::<u64>(), cols in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, y) = well_conditioned_ls(cols, &mut rng);
        let p = NnlsProblem::from_least_squares(&g, &y).unwrap();
        let x = solve_nnls_bpp(&p, TOL, 1000).unwrap().x;
        let order: Vec<usize> = (0..cols).rev().collect();
        let y2 = DenseMatrix::from_fn(6, cols, |r, c| y.get(r, order[c]));
        let p2 = NnlsProblem::from_least_squares(&g, &y2).unwrap();
        let x2 = solve_nnls_bpp(&p2, TOL, 1000).unwrap().x;
        for c in 0..cols {
            for r in 0..4 {
                prop_assert!((x2.get(r, c) - x.get(r, order[c])).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn objective_never_exceeds_origin(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, y) = well_conditioned_ls(3, &mut rng);
        let p = NnlsProblem::from_least_squares(&g, &y).unwrap();
        let x = solve_nnls_bpp(&p, TOL, 1000).unwrap().x;
        prop_assert!(p.objective(&x).unwrap() <= p.objective(&DenseMatrix::zeros(4, 3)).unwrap());
    }

    #[test]
    fn nonnegative_unconstrained_solution_is_kept(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, _) = well_conditioned_ls(1, &mut rng);
        // choose Y in the range of G with a positive preimage
        let truth = DenseMatrix::from_fn(4, 2, |r, c| 0.1 + ((r + 3 * c) % 5) as f64);
        let y = g.matmul(&truth).unwrap();
        let p = NnlsProblem::from_least_squares(&g, &y).unwrap();
        let x = solve_nnls_bpp(&p, TOL, 1000).unwrap().x;
        prop_assert!(x.max_abs_diff(&truth) <= 1e-10 * truth.frobenius_norm());
    }
}
