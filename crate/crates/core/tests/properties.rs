//! Invariants over seeded random inputs.

use proptest::prelude::*;
use uniclass_core::blocksvd::{
    block_svd_distance, canonicalize, compute_block_svd_seeded, has_block_svd,
};
use uniclass_core::channels::{stinespring_map, StinespringChannel};
use uniclass_core::classify::{classify_all, consistency_violations, is_aut};
use uniclass_core::generate::{
    block_diag_a_sample, block_diag_b, ginibre, haar_unitary, product_sample, random_density,
    rng_from_seed,
};
use uniclass_core::json::{operator_from_json, operator_to_json};
use uniclass_core::matcore::{
    hs_norm, max_diff, min_hermitian_eigenvalue, operator_schmidt, tensor, trace,
};
use uniclass_core::{c64, BipartiteOperator, CMatrix, Tolerances, Witness};

fn haar_op(n: usize, k: usize, seed: u64) -> BipartiteOperator {
    BipartiteOperator::from_dims(n, k, haar_unitary(n * k, seed)).unwrap()
}

/// `Tr_B(U (X ⊗ β) U*)` by explicit index sums.
fn channel_by_loops(u: &CMatrix, n: usize, k: usize, beta: &CMatrix, x: &CMatrix) -> CMatrix {
    let d = n * k;
    let mut inner = CMatrix::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            for s in 0..k {
                for t in 0..k {
                    inner[(i * k + s, j * k + t)] = x[(i, j)] * beta[(s, t)];
                }
            }
        }
    }
    let full = u * inner * u.adjoint();
    CMatrix::from_fn(n, n, |i, j| {
        (0..k).map(|s| full[(i * k + s, j * k + s)]).sum()
    })
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channel_matches_index_oracle((n, k) in dims(), seed in any::<u64>()) {
        let u = haar_op(n, k, seed);
        let beta = random_density(k, k, seed ^ 1).unwrap();
        let x = ginibre(&mut rng_from_seed(seed ^ 2), n, n);
        let got = stinespring_map(&u, beta.mat(), &x).unwrap();
        let want = channel_by_loops(u.mat(), n, k, beta.mat(), &x);
        prop_assert!(max_diff(&got, &want) < 1e-12);
    }

    #[test]
    fn channels_preserve_trace_and_have_psd_choi((n, k) in dims(), seed in any::<u64>()) {
        let tol = Tolerances::default();
        let u = haar_op(n, k, seed);
        let ch = StinespringChannel::new(u, random_density(k, 1 + (seed as usize) % k, seed ^ 3).unwrap(), &tol).unwrap();
        let x = ginibre(&mut rng_from_seed(seed ^ 4), n, n);
        prop_assert!((trace(&ch.apply(&x).unwrap()) - trace(&x)).norm() < 1e-12);
        prop_assert!(min_hermitian_eigenvalue(&ch.choi().mat) > -1e-12);
    }

    #[test]
    fn partial_transpose_is_an_involution((n, k) in dims(), seed in any::<u64>()) {
        let x = BipartiteOperator::from_dims(n, k, ginibre(&mut rng_from_seed(seed), n * k, n * k)).unwrap();
        prop_assert_eq!(x.partial_transpose_b().partial_transpose_b(), x.clone());
        prop_assert_eq!(x.swap_factors().swap_factors(), x);
    }

    #[test]
    fn schmidt_weights_carry_the_norm((n, k) in dims(), seed in any::<u64>()) {
        let u = haar_op(n, k, seed);
        let total: f64 = operator_schmidt(&u).iter().map(|t| t.weight * t.weight).sum();
        prop_assert!((total - hs_norm(u.mat()).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn product_recovery_reconstructs((n, k) in dims(), seed in any::<u64>()) {
        let s = product_sample(n, k, seed).unwrap();
        let v = is_aut(&s.op, &Tolerances::default()).unwrap();
        prop_assert!(v.is_yes());
        let Witness::Product { v, w } = v.witness else { panic!("product witness expected") };
        prop_assert!(max_diff(&tensor(&v, &w), s.op.mat()) < 1e-9);
    }

    #[test]
    fn block_svd_of_generated_members((n, k) in dims(), seed in any::<u64>()) {
        let tol = Tolerances::default();
        let p = if n == 1 { 1 } else { 1 + (seed as usize) % k };
        let s = block_diag_a_sample(n, k, p, seed).unwrap();
        prop_assert!(has_block_svd(&s.op, &tol).holds);
        let a = compute_block_svd_seeded(&s.op, &tol, seed).unwrap();
        let b = compute_block_svd_seeded(&s.op, &tol, seed.rotate_left(17)).unwrap();
        prop_assert_eq!(a.len(), p);
        prop_assert!(max_diff(&a.reconstruct(), s.op.mat()) < 1e-8);
        prop_assert!(block_svd_distance(&canonicalize(&a), &canonicalize(&b)) < 1e-8);
    }

    #[test]
    fn left_environment_unitary_keeps_channels((n, k) in dims(), seed in any::<u64>()) {
        let u = haar_op(n, k, seed);
        let w = haar_unitary(k, seed ^ 5);
        let wu = BipartiteOperator::from_dims(n, k, tensor(&CMatrix::identity(n, n), &w) * u.mat()).unwrap();
        let beta = random_density(k, k, seed ^ 6).unwrap();
        let x = ginibre(&mut rng_from_seed(seed ^ 7), n, n);
        let a = stinespring_map(&u, beta.mat(), &x).unwrap();
        let b = stinespring_map(&wu, beta.mat(), &x).unwrap();
        prop_assert!(max_diff(&a, &b) < 1e-10);
    }

    #[test]
    fn operator_json_round_trips((n, k) in dims(), seed in any::<u64>()) {
        let u = haar_op(n, k, seed);
        prop_assert_eq!(operator_from_json(&operator_to_json(&u)).unwrap(), u);
    }

    #[test]
    fn generators_are_deterministic((n, k) in dims(), seed in any::<u64>()) {
        prop_assert_eq!(haar_op(n, k, seed), haar_op(n, k, seed));
        let p = if k == 1 { 1 } else { n };
        prop_assert_eq!(block_diag_b(n, k, p, seed).unwrap(), block_diag_b(n, k, p, seed).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reports_are_consistent((n, k) in dims(), seed in any::<u64>(), which in 0usize..3) {
        let u = match which {
            0 => haar_op(n, k, seed),
            1 => block_diag_a_sample(n, k, if n == 1 { 1 } else { k }, seed).unwrap().op,
            _ => block_diag_b(n, k, if k == 1 { 1 } else { n }, seed).unwrap(),
        };
        let r = classify_all(&u, &Tolerances::default()).unwrap();
        prop_assert!(consistency_violations(&r).is_empty());
    }

    #[test]
    fn scaling_a_unitary_breaks_unitarity(seed in any::<u64>(), s in 1.01f64..3.0) {
        let u = haar_op(2, 2, seed);
        let scaled = BipartiteOperator::from_dims(2, 2, u.mat() * c64(s, 0.0)).unwrap();
        prop_assert!(classify_all(&scaled, &Tolerances::default()).is_err());
    }
}
