mod common;

use common::{khatri_rao_loops, random_matrix, reconstruct_loops, unfold_loops};
use ntf_core::cp::FactorModel;
use ntf_core::tensor::{fold, frobenius_norm, khatri_rao, unfold, DenseMatrix, DenseTensor3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn as_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

#[test]
fn mode1_unfolding_of_index_tensor() {
    let t = DenseTensor3::from_fn((2, 2, 2), |i, j, k| (i + 2 * j + 4 * k) as f64);
    let m = unfold(&t, 1).unwrap();
    assert_eq!(as_rows(&m), unfold_loops(&t, 1));
    assert_eq!(m.row(0), &[0.0, 2.0, 4.0, 6.0]);
}

#[test]
fn mode3_fold_matches_loops() {
    let m = DenseMatrix::from_fn(5, 12, |r, c| (r * 12 + c) as f64);
    let t = fold(&m, 3, (3, 4, 5)).unwrap();
    assert_eq!(unfold_loops(&t, 3), as_rows(&m));
}

#[test]
fn every_mode_matches_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = common::random_tensor((3, 4, 5), &mut rng);
    for mode in 1..=3 {
        assert_eq!(as_rows(&unfold(&t, mode).unwrap()), unfold_loops(&t, mode));
    }
}

#[test]
fn trivial_shapes() {
    let t = DenseTensor3::from_vec((1, 1, 1), vec![5.0]).unwrap();
    for mode in 1..=3 {
        assert_eq!(unfold(&t, mode).unwrap().values(), &[5.0]);
    }
    let m = DenseMatrix::from_vec(1, 1, vec![5.0]).unwrap();
    assert_eq!(fold(&m, 2, (1, 1, 1)).unwrap(), t);
    assert!(unfold(&t, 0).is_err());
    assert!(unfold(&t, 4).is_err());
}

#[test]
fn khatri_rao_examples() {
    let two = DenseMatrix::from_vec(1, 1, vec![2.0]).unwrap();
    let three = DenseMatrix::from_vec(1, 1, vec![3.0]).unwrap();
    assert_eq!(khatri_rao(&two, &three).unwrap().values(), &[6.0]);

    let id = DenseMatrix::identity(2);
    let kr = khatri_rao(&id, &id).unwrap();
    assert_eq!(kr.shape(), (4, 2));
    assert_eq!(as_rows(&kr), khatri_rao_loops(&id, &id));

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_matrix(5, 3, &mut rng);
    let ones = DenseMatrix::from_fn(1, 3, |_, _| 1.0);
    assert_eq!(khatri_rao(&a, &ones).unwrap(), a);
}

#[test]
fn reconstruct_examples() {
    let one = |v: f64| DenseMatrix::from_vec(1, 1, vec![v]).unwrap();
    let m = FactorModel::from_factors(vec![1.0], one(1.0), one(1.0), one(1.0)).unwrap();
    assert_eq!(m.reconstruct().unwrap().values(), &[1.0]);

    let m = FactorModel::from_factors(
        vec![2.0],
        DenseMatrix::from_vec(2, 1, vec![1.0, 2.0]).unwrap(),
        DenseMatrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap(),
        DenseMatrix::from_vec(2, 1, vec![1.0, 0.0]).unwrap(),
    )
    .unwrap();
    let t = m.reconstruct().unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(t.get(i, j, 0), 2.0 * (i + 1) as f64);
            assert_eq!(t.get(i, j, 1), 0.0);
        }
    }
}

#[test]
fn reconstruct_matches_triple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = FactorModel::from_factors(
        vec![1.5, 0.7, 2.0],
        random_matrix(4, 3, &mut rng),
        random_matrix(3, 3, &mut rng),
        random_matrix(5, 3, &mut rng),
    )
    .unwrap();
    let fast = m.reconstruct().unwrap();
    let slow = reconstruct_loops(&m);
    let scale = frobenius_norm(&slow);
    assert!(fast.max_abs_diff(&slow) <= 1e-12 * scale);
}

#[test]
fn frobenius_examples() {
    assert_eq!(frobenius_norm(&DenseTensor3::zeros((2, 3, 4))), 0.0);
    assert_eq!(
        frobenius_norm(&DenseTensor3::from_vec((1, 1, 1), vec![3.0]).unwrap()),
        3.0
    );
    let ones = DenseTensor3::from_fn((2, 2, 2), |_, _, _| 1.0);
    assert!((frobenius_norm(&ones) - 8f64.sqrt()).abs() < 1e-15);
}

#[test]
fn tensor_json_layout() {
    let t = DenseTensor3::from_fn((2, 1, 3), |i, _, k| (10 * i + k) as f64);
    let json: serde_json::Value = serde_json::from_str(&t.to_json().unwrap()).unwrap();
    assert_eq!(json["dims"], serde_json::json!([2, 1, 3]));
    assert_eq!(
        json["values"],
        serde_json::json!([0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
    );
    assert_eq!(DenseTensor3::from_json(&t.to_json().unwrap()).unwrap(), t);
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=8, 1usize..=8, 1usize..=8)
}

proptest! {
    #[test]
    fn fold_unfold_round_trip(d in dims(), mode in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = common::random_tensor(d, &mut rng);
        let m = unfold(&t, mode).unwrap();
        prop_assert_eq!(&fold(&m, mode, d).unwrap(), &t);
        prop_assert_eq!(unfold(&fold(&m, mode, d).unwrap(), mode).unwrap(), m);
    }

    #[test]
    fn frobenius_is_layout_independent(d in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = common::random_tensor(d, &mut rng);
        let n = frobenius_norm(&t);
        for mode in 1..=3 {
            let m = unfold(&t, mode).unwrap();
            prop_assert!((m.frobenius_norm() - n).abs() <= 1e-12 * n.max(1.0));
        }
    }

    #[test]
    fn khatri_rao_gram_identity(ra in 1usize..7, rb in 1usize..7, r in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(ra, r, &mut rng);
        let b = random_matrix(rb, r, &mut rng);
        let lhs = khatri_rao(&a, &b).unwrap().gram();
        let rhs = a.gram().hadamard(&b.gram()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
        prop_assert_eq!(as_rows(&khatri_rao(&a, &b).unwrap()), khatri_rao_loops(&a, &b));
    }

    #[test]
    fn reconstruct_matches_loops_for_random_factors(d in dims(), r in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda: Vec<f64> = (0..r).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
        let m = FactorModel::from_factors(
            lambda,
            random_matrix(d.0, r, &mut rng),
            random_matrix(d.1, r, &mut rng),
            random_matrix(d.2, r, &mut rng),
        ).unwrap();
        let slow = reconstruct_loops(&m);
        let scale = frobenius_norm(&slow).max(f64::MIN_POSITIVE);
        prop_assert!(m.reconstruct().unwrap().max_abs_diff(&slow) <= 1e-12 * scale);
    }
}
