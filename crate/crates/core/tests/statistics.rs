//! Sampling distributions, protocol-level invariants and search behaviour,
//! checked against closed forms.

use lqcc_core::numerics::{self, C64};
use lqcc_core::rng::stream_rng;
use lqcc_core::states::{self, DensityMatrix, Party, PureBipartiteState};
use lqcc_core::superdense::{self, Status};
use lqcc_core::theorem;
use lqcc_core::Execution;
use rand::Rng;

/// Sample mean and its standard error.
fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn haar_entries_have_uniform_second_moment() {
    // |u_ij|² of a Haar unitary on C^n is Beta(1, n−1): mean 1/n
    let n = 3;
    let mut r = stream_rng(1, "haar-moment", 0);
    let samples: Vec<f64> = (0..10_000).map(|_| numerics::haar_unitary(n, &mut r)[(0, 1)].norm_sqr()).collect();
    let (mean, err) = mean_and_error(&samples);
    let expected_err = ((n as f64 - 1.0) / ((n * n) as f64 * (n as f64 + 1.0)) / 1e4).sqrt();
    assert!((mean - 1.0 / 3.0).abs() <= 5.0 * expected_err, "mean {mean}");
    assert!((err / expected_err - 1.0).abs() < 0.1);
}

#[test]
fn haar_phases_are_unbiased() {
    let mut r = stream_rng(2, "haar-phase", 0);
    let sum: C64 = (0..10_000).map(|_| numerics::haar_unitary(2, &mut r)[(0, 0)]).sum();
    // E[u_00] = 0, Var|u_00|² summed ≈ 1/2 per draw
    assert!((sum / 1e4).norm() <= 5.0 * (0.5f64 / 1e4).sqrt());
}

#[test]
fn random_two_qubit_states_follow_the_induced_measure() {
    // Gaussian coefficient matrices induce eigenvalue density ∝ (λ₁ − λ₂)²;
    // with λ₁ = x the mean of max(x, 1 − x) is computed by quadrature.
    let steps = 200_000;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..steps {
        let x = (i as f64 + 0.5) / steps as f64;
        let w = (2.0 * x - 1.0).powi(2);
        num += x.max(1.0 - x) * w;
        den += w;
    }
    let oracle = num / den;
    assert!((oracle - 0.875).abs() < 1e-9);

    let mut r = stream_rng(3, "induced-measure", 0);
    let samples: Vec<f64> = (0..10_000)
        .map(|_| states::schmidt_decompose(&states::random_pure_state_from(2, 2, &mut r).unwrap()).unwrap().coeffs[0])
        .collect();
    let (mean, err) = mean_and_error(&samples);
    assert!((mean - oracle).abs() <= 5.0 * err, "mean {mean} vs {oracle}");
}

#[test]
fn random_states_are_reproducible_per_seed() {
    assert_eq!(states::random_pure_state(3, 2, 9).unwrap(), states::random_pure_state(3, 2, 9).unwrap());
    assert_ne!(states::random_pure_state(3, 2, 9).unwrap(), states::random_pure_state(3, 2, 10).unwrap());
    assert_eq!(numerics::random_haar_unitary(4, 1).unwrap(), numerics::random_haar_unitary(4, 1).unwrap());
}

#[test]
fn werner_and_isotropic_entangled_fractions() {
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let fef = states::fully_entangled_fraction(&DensityMatrix::werner(p).unwrap(), 0, 0).unwrap();
        assert!((fef - (1.0 + 3.0 * p) / 4.0).abs() < 1e-12, "p={p}");
        let iso = DensityMatrix::isotropic(3, p).unwrap();
        let sampled = states::fully_entangled_fraction(&iso, 64, 0).unwrap();
        assert!((sampled - (p + (1.0 - p) / 9.0)).abs() < 1e-12, "p={p}");
    }
}

#[test]
fn matrix_condition_holds_only_with_equal_spectra() {
    let mut holds = 0;
    for i in 0..1000u64 {
        let mut r = stream_rng(4, "matrix-condition", i);
        let n = 2 + (i as usize) % 4;
        let draw = |r: &mut rand_chacha::ChaCha8Rng| {
            let raw: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
            let t: f64 = raw.iter().sum();
            let mut v: Vec<f64> = raw.iter().map(|x| x / t).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        };
        let lambda = draw(&mut r);
        let mu = if i % 2 == 0 { lambda.clone() } else { draw(&mut r) };
        // every fourth case uses a diagonal phase unitary, which commutes with diag(μ)
        let u = if i % 4 == 0 {
            nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
                C64::from_polar(1.0, r.random::<f64>() * 6.0)
            }))
        } else {
            numerics::haar_unitary(n, &mut r)
        };
        let rep = theorem::check_matrix_condition(&u, &lambda, &mu, 1e-9).unwrap();
        let equal = lambda.iter().zip(&mu).all(|(a, b)| (a - b).abs() <= 1e-9);
        assert_eq!(rep.spectra_equal, equal);
        assert!(!rep.mismatch, "proportionality without its consequences at case {i}");
        if rep.holds {
            assert!(equal);
            holds += 1;
        }
        if i % 4 == 0 {
            assert!(rep.holds, "commuting unitary with equal spectra must satisfy the condition");
        }
    }
    assert_eq!(holds, 250);
}

#[test]
fn superdense_never_misdecodes_on_random_states() {
    for i in 0..100u64 {
        let s = states::random_pure_state(2, 2, 1000 + i).unwrap();
        let decoder = superdense::Decoder::new(&s).unwrap();
        let mut r = stream_rng(5, "superdense-random", i);
        for msg in 0..4u8 {
            let encoded = superdense::encode(&s, msg).unwrap();
            assert!(
                (states::marginal(&encoded, Party::Alice).matrix() - states::marginal(&s, Party::Alice).matrix())
                    .norm()
                    <= 1e-12
            );
            for _ in 0..5 {
                let o = decoder.decode(&encoded, &mut r).unwrap();
                if let Status::Success { decoded } = o.status {
                    assert_eq!(decoded, msg);
                    assert!(o.filter_fired);
                }
            }
        }
    }
}

#[test]
fn superdense_rate_is_execution_independent() {
    let s = superdense::state_with_lambda2(0.3).unwrap();
    let a = superdense::run_batch_with(&s, 10_000, 1, Execution::Sequential).unwrap();
    let b = superdense::run_batch_with(&s, 10_000, 1, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let sigma = (0.6f64 * 0.4 / 1e4).sqrt();
    assert!((a.success_rate - 0.6).abs() <= 5.0 * sigma);
}

#[test]
fn falsifier_reports_are_deterministic() {
    let s1 = states::random_pure_state(3, 3, 1).unwrap();
    let s2 = states::random_pure_state(3, 3, 2).unwrap();
    let a = theorem::proposition_falsifier_with(&s1, &s2, 3000, 5, Execution::Sequential).unwrap();
    let b = theorem::proposition_falsifier_with(&s1, &s2, 3000, 5, Execution::Parallel).unwrap();
    assert_eq!(a.best_score.to_bits(), b.best_score.to_bits());
    assert_eq!(a.clauses, b.clauses);
    assert_eq!(a.best_operation.unwrap().a, b.best_operation.unwrap().a);

    let w = DensityMatrix::werner(0.7).unwrap();
    let a = theorem::purification_falsifier_with(&w, 2000, 5, Execution::Sequential).unwrap();
    let b = theorem::purification_falsifier_with(&w, 2000, 5, Execution::Parallel).unwrap();
    assert_eq!(a.best_score.to_bits(), b.best_score.to_bits());
}

#[test]
fn score_reaches_one_on_a_common_target() {
    // the same state up to a global phase is concentrated to one target by its own filter
    let s1 = states::random_pure_state(3, 3, 21).unwrap();
    let c2 = s1.coeff() * C64::from_polar(1.0, 0.7);
    let k = lqcc_core::concentrate::build_filter(&s1).unwrap();
    let pair = theorem::KrausPair { a: k.kraus().clone(), b: numerics::identity(3) };
    let score = theorem::common_target_score(s1.coeff(), &c2, &pair).unwrap();
    assert!((score - 1.0).abs() < 1e-9, "score {score}");
    // without the filter the first output is not maximal
    let identity = theorem::KrausPair { a: numerics::identity(3), b: numerics::identity(3) };
    assert!(theorem::common_target_score(s1.coeff(), &c2, &identity).unwrap() < 1.0 - 1e-3);
}

#[test]
fn distinct_marginals_stay_below_the_search_margin() {
    let s1 = PureBipartiteState::from_schmidt_coefficients(&[0.7, 0.3]).unwrap();
    let s2 = states::max_entangled(2).unwrap();
    let r = theorem::proposition_falsifier(&s1, &s2, 20_000, 3).unwrap();
    assert!(r.best_score < 1.0 - theorem::PROPOSITION_MARGIN);
    assert_eq!(r.trials, 20_000);
}
