//! Randomized invariants across the kernel, state, operation and filter layers.

use lqcc_core::concentrate;
use lqcc_core::lqcc::{self, LocalOperation};
use lqcc_core::numerics::{self, ComplexMatrix, C64};
use lqcc_core::rng::{complex_gaussian, stream_rng};
use lqcc_core::states::{self, Party, PureBipartiteState};
use lqcc_core::theorem;
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, "properties", 0)
}

fn full_rank(n: usize, r: &mut ChaCha8Rng) -> PureBipartiteState {
    loop {
        let s = states::random_pure_state_from(n, n, r).unwrap();
        if states::schmidt_decompose(&s).unwrap().smallest() > 1e-6 {
            return s;
        }
    }
}

fn contraction_op(party: Party, n: usize, r: &mut ChaCha8Rng) -> LocalOperation {
    LocalOperation::new(party, theorem::random_contraction(n, r)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn svd_roundtrip(m in 1usize..=8, n in 1usize..=8, seed in any::<u64>()) {
        let a = complex_gaussian(m, n, &mut rng(seed));
        let s = numerics::svd(&a).unwrap();
        prop_assert!((s.reconstruct() - &a).norm() <= 1e-10 * a.norm());
        prop_assert!(s.singular_values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(numerics::isometry_defect(&s.u) < 1e-10);
        prop_assert!(numerics::isometry_defect(&s.v) < 1e-10);
    }

    #[test]
    fn eigh_reconstructs(n in 1usize..=8, seed in any::<u64>()) {
        let g = complex_gaussian(n, n, &mut rng(seed));
        let h = &g + g.adjoint();
        let e = numerics::eigh(&h, 1e-12).unwrap();
        prop_assert!((e.reconstruct() - &h).norm() <= 1e-10 * h.norm());
        prop_assert!(numerics::isometry_defect(&e.vectors) <= 1e-10);
    }

    #[test]
    fn completion_extends_isometry(n in 1usize..=8, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let v = numerics::haar_unitary(n, &mut rng(seed)).columns(0, k).into_owned();
        let u = numerics::complete_isometry(&v).unwrap();
        prop_assert!(numerics::is_unitary(&u, 1e-10));
        prop_assert_eq!(u.columns(0, k).into_owned(), v);
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>(), p in 1usize..=3, q in 1usize..=3) {
        let mut r = rng(seed);
        let (a, c) = (complex_gaussian(p, p, &mut r), complex_gaussian(p, p, &mut r));
        let (b, d) = (complex_gaussian(q, q, &mut r), complex_gaussian(q, q, &mut r));
        let lhs = numerics::kron(&a, &b) * numerics::kron(&c, &d);
        prop_assert!((lhs - numerics::kron(&(&a * &c), &(&b * &d))).norm() <= 1e-12 * (1.0 + a.norm() * b.norm() * c.norm() * d.norm()));
    }

    #[test]
    fn schmidt_reconstruction_and_symmetry(da in 1usize..=8, db in 1usize..=8, seed in any::<u64>()) {
        let s = states::random_pure_state(da, db, seed).unwrap();
        let f = states::schmidt_decompose(&s).unwrap();
        prop_assert!((f.reconstruct() - s.coeff()).norm() <= 1e-9);
        let alice = states::marginal(&s, Party::Alice).spectrum().unwrap();
        let bob = states::marginal(&s, Party::Bob).spectrum().unwrap();
        for (k, l) in f.coeffs.iter().enumerate() {
            prop_assert!((alice[k] - l).abs() <= 1e-9 && (bob[k] - l).abs() <= 1e-9);
        }
        // the larger marginal's extra eigenvalues vanish
        for extra in alice.iter().skip(f.coeffs.len()).chain(bob.iter().skip(f.coeffs.len())) {
            prop_assert!(extra.abs() <= 1e-9);
        }
    }

    #[test]
    fn local_unitaries_preserve_spectrum_and_far_marginal(n in 1usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = states::random_pure_state_from(n, n, &mut r).unwrap();
        let (ua, ub) = (numerics::haar_unitary(n, &mut r), numerics::haar_unitary(n, &mut r));
        let moved = s.apply_local_unitaries(&ua, &ub).unwrap();
        let (a, b) = (states::schmidt_decompose(&s).unwrap().coeffs, states::schmidt_decompose(&moved).unwrap().coeffs);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        let bob_only = s.apply_local_unitaries(&numerics::identity(n), &ub).unwrap();
        prop_assert!(theorem::marginal_distance(&s, &bob_only, Party::Alice).unwrap() <= 1e-9);
    }

    #[test]
    fn probe_commutes_with_far_unitary(n in 2usize..=4, probe in 2usize..=3, bob_side in any::<bool>(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = states::random_pure_state_from(n, n, &mut r).unwrap();
        let party = if bob_side { Party::Bob } else { Party::Alice };
        let d = lqcc::dilate(&contraction_op(party, n, &mut r), probe).unwrap();
        let far = lqcc::lift_local_unitary(party.other(), &numerics::haar_unitary(n, &mut r), n, n, probe);
        let joint = d.joint_operator(n);
        let psi = lqcc::attach_probe(&s, probe);
        prop_assert!((&joint * (&far * &psi) - &far * (&joint * &psi)).norm() <= 1e-10);
    }

    #[test]
    fn dilation_weight_matches_direct(n in 1usize..=5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = states::random_pure_state_from(n, n, &mut r).unwrap();
        let a = contraction_op(Party::Alice, n, &mut r);
        let b = contraction_op(Party::Bob, n, &mut r);
        let direct_a = lqcc::apply_pair(&s, &a, &LocalOperation::identity(Party::Bob, n)).unwrap().probability;
        let direct_b = lqcc::apply_pair(&s, &LocalOperation::identity(Party::Alice, n), &b).unwrap().probability;
        prop_assert!((lqcc::dilate(&a, 2).unwrap().success_probability(&s).unwrap() - direct_a).abs() <= 1e-10);
        prop_assert!((lqcc::dilate(&b, 3).unwrap().success_probability(&s).unwrap() - direct_b).abs() <= 1e-10);
    }

    #[test]
    fn composition_multiplies_probabilities(n in 1usize..=5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = full_rank(n, &mut r);
        let (a1, a2) = (contraction_op(Party::Alice, n, &mut r), contraction_op(Party::Alice, n, &mut r));
        let first = lqcc::apply_local(&s, &a1).unwrap();
        let second = lqcc::apply_local(&first.state, &a2).unwrap();
        let both = lqcc::apply_local(&s, &a2.after(&a1).unwrap()).unwrap();
        prop_assert!((first.probability * second.probability - both.probability).abs() <= 1e-10);
        prop_assert!(second.state.distance(&both.state) <= 1e-8);
    }

    #[test]
    fn filter_is_basis_covariant(n in 2usize..=5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = full_rank(n, &mut r);
        let (ua, ub) = (numerics::haar_unitary(n, &mut r), numerics::haar_unitary(n, &mut r));
        let k = concentrate::build_filter(&s).unwrap();
        let moved = s.apply_local_unitaries(&ua, &ub).unwrap();
        let k_moved = LocalOperation::new(Party::Alice, &ua * k.kraus() * ua.adjoint()).unwrap();
        let p = lqcc::apply_local(&s, &k).unwrap().probability;
        let p_moved = lqcc::apply_local(&moved, &k_moved).unwrap().probability;
        prop_assert!((p - p_moved).abs() <= 1e-10);
        // and the filter built from the moved state is that conjugate
        prop_assert!((concentrate::build_filter(&moved).unwrap().kraus() - k_moved.kraus()).norm() <= 1e-8);
    }
}

#[test]
fn side_transfer_roundtrip_on_100_pairs() {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let mut r = stream_rng(3, "transfer", i);
        let n = 2 + (i as usize) % 4;
        let s = full_rank(n, &mut r);
        let b = contraction_op(Party::Bob, n, &mut r);
        let t = lqcc::transfer_to_alice_side(&s, &b).unwrap();
        assert!(numerics::is_unitary(&t.bob_fix, 1e-9));
        assert!(t.scale >= 1.0);
        let lhs = s.coeff() * b.kraus().transpose();
        let rhs = t.alice.kraus() * s.coeff() * t.bob_fix.transpose() * C64::new(t.scale, 0.0);
        worst = worst.max((lhs - rhs).norm());
    }
    assert!(worst <= 1e-9, "worst {worst:e}");
}

#[test]
fn shift_flip_through_filter_dilation() {
    // the isolated |k⟩|n⟩ term scaled by the filter gain √(λ_N/λ_k), then the
    // success branch, gives 2√λ_N = √(4γ/N)
    for d in 2..=6usize {
        for rep in 0..10u64 {
            let mut r = stream_rng(4, "shift-flip", d as u64 * 100 + rep);
            let s0 = full_rank(d, &mut r);
            let lambda = states::schmidt_decompose(&s0).unwrap().coeffs;
            let s = PureBipartiteState::from_schmidt_coefficients(&lambda).unwrap();
            let dil = lqcc::dilate(&concentrate::build_filter(&s).unwrap(), 2).unwrap();
            let gamma = concentrate::gamma_max(&s).unwrap();
            for k in 0..d {
                for n in 0..d {
                    let out = concentrate::shift_flip_extract(&s, k, n).unwrap();
                    let branch = dil.branch_operator(dil.success_outcome()) * &out.coeff;
                    let expected = (4.0 * gamma / d as f64).sqrt();
                    assert!((branch[(k, n)].norm() - expected).abs() <= 1e-9, "d={d} k={k} n={n}");
                    assert!((branch.norm() - expected).abs() <= 1e-9);
                }
            }
        }
    }
}

#[test]
fn dilation_measurement_frequency_matches_weight() {
    let s = PureBipartiteState::from_schmidt_coefficients(&[0.6, 0.3, 0.1]).unwrap();
    let dil = lqcc::dilate(&concentrate::build_filter(&s).unwrap(), 2).unwrap();
    let p = dil.success_probability(&s).unwrap();
    assert!((p - 0.3).abs() < 1e-12);
    let trials = 20_000;
    let hits = (0..trials)
        .filter(|&t| lqcc::simulate_measurement(&dil, &s, t).unwrap().outcome == dil.success_outcome())
        .count();
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((hits as f64 / trials as f64 - p).abs() <= 5.0 * sigma);
    let freq = lqcc::success_frequency(&dil, &s, trials as usize, 9, Default::default()).unwrap();
    assert!((freq - p).abs() <= 5.0 * sigma);
}

#[test]
fn measurement_postselects_maximal_state() {
    let s = states::random_pure_state(3, 3, 17).unwrap();
    let dil = lqcc::dilate(&concentrate::build_filter(&s).unwrap(), 2).unwrap();
    let m = (0..)
        .map(|seed| lqcc::simulate_measurement(&dil, &s, seed).unwrap())
        .find(|m| m.outcome == dil.success_outcome())
        .unwrap();
    assert!(states::is_maximally_entangled(&m.state, 1e-8));
}

#[test]
fn unitary_embedding_is_an_isometry_on_every_fixture() {
    for i in 0..50u64 {
        let mut r = stream_rng(5, "embedding", i);
        let n = 1 + (i as usize) % 5;
        let g: ComplexMatrix = complex_gaussian(n, n, &mut r);
        let k = g.unscale(numerics::operator_norm(&g).unwrap());
        let d = lqcc::dilate(&LocalOperation::new(Party::Alice, k.clone()).unwrap(), 2 + (i as usize) % 3).unwrap();
        assert!(numerics::is_unitary(d.unitary(), 1e-9));
        assert!((d.branch_operator(d.success_outcome()) - &k).norm() <= 1e-12);
    }
}
