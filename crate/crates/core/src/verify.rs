//! One-shot invariant suite behind `lqcc verify`.
//!
//! Each check draws seeded fixtures, measures the worst deviation from the
//! identity it covers and compares it with a fixed tolerance. `Quick` uses
//! small sample counts; `Full` uses the sample counts and search budgets of
//! the acceptance suite.

use serde::Serialize;

use crate::concentrate;
use crate::error::Result;
use crate::lqcc::{self, LocalOperation};
use crate::numerics::{self, C64};
use crate::rng;
use crate::states::{self, DensityMatrix, Party, PureBipartiteState};
use crate::superdense;
use crate::theorem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    fn samples(self) -> usize {
        match self {
            Level::Quick => 20,
            Level::Full => 200,
        }
    }

    fn budget(self) -> usize {
        match self {
            Level::Quick => 2_000,
            Level::Full => 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub tag: &'static str,
    pub passed: bool,
    /// Worst observed deviation (or score) against `threshold`.
    pub worst: f64,
    pub threshold: f64,
}

const SEED: u64 = 0x5eed;

fn fixture_state(n: usize, i: usize) -> PureBipartiteState {
    states::random_pure_state_from(n, n, &mut rng::stream_rng(SEED, "verify-state", i as u64)).expect("nonzero dims")
}

fn worst(mut iter: impl Iterator<Item = Result<f64>>) -> Result<f64> {
    iter.try_fold(0.0, |acc, x| Ok(f64::max(acc, x?)))
}

fn within(name: &'static str, tag: &'static str, value: f64, threshold: f64) -> CheckResult {
    CheckResult { name, tag, passed: value <= threshold, worst: value, threshold }
}

fn check_svd(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples()).map(|i| {
        let mut r = rng::stream_rng(SEED, "verify-svd", i as u64);
        let (m, n) = (1 + i % 8, 1 + (i / 8) % 8);
        let a = rng::complex_gaussian(m, n, &mut r);
        let s = numerics::svd(&a)?;
        Ok((s.reconstruct() - &a).norm() / a.norm())
    }))?;
    Ok(within("svd round-trip (relative)", "kernel", w, 1e-10))
}

fn check_eigh(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples()).map(|i| {
        let mut r = rng::stream_rng(SEED, "verify-eigh", i as u64);
        let g = rng::complex_gaussian(1 + i % 8, 1 + i % 8, &mut r);
        let h = &g + g.adjoint();
        let e = numerics::eigh(&h, 1e-12)?;
        Ok(((e.reconstruct() - &h).norm() / h.norm()).max(numerics::isometry_defect(&e.vectors)))
    }))?;
    Ok(within("eigh reconstruction and orthonormality", "kernel", w, 1e-10))
}

fn check_kron(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples()).map(|i| {
        let mut r = rng::stream_rng(SEED, "verify-kron", i as u64);
        let [a, b, c, d] = [0; 4].map(|_| rng::complex_gaussian(2, 2, &mut r));
        let lhs = numerics::kron(&a, &b) * numerics::kron(&c, &d);
        Ok((lhs - numerics::kron(&(&a * &c), &(&b * &d))).norm())
    }))?;
    Ok(within("kron mixed-product identity", "kernel", w, 1e-12))
}

fn check_completion(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples()).map(|i| {
        let mut r = rng::stream_rng(SEED, "verify-complete", i as u64);
        let n = 2 + i % 6;
        let k = 1 + i % n;
        let v = numerics::haar_unitary(n, &mut r).columns(0, k).into_owned();
        let u = numerics::complete_isometry(&v)?;
        Ok(numerics::isometry_defect(&u).max((u.columns(0, k) - &v).norm()))
    }))?;
    Ok(within("isometry completion is unitary and extends input", "kernel", w, 1e-10))
}

fn check_schmidt(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples()).map(|i| {
        let s = states::random_pure_state_from(
            1 + i % 8,
            1 + (i / 3) % 8,
            &mut rng::stream_rng(SEED, "verify-schmidt", i as u64),
        )?;
        let f = states::schmidt_decompose(&s)?;
        let alice = states::marginal(&s, Party::Alice).spectrum()?;
        let bob = states::marginal(&s, Party::Bob).spectrum()?;
        let symmetry =
            f.coeffs.iter().enumerate().map(|(k, l)| (alice[k] - l).abs().max((bob[k] - l).abs())).fold(0.0, f64::max);
        Ok((f.reconstruct() - s.coeff()).norm().max(symmetry))
    }))?;
    Ok(within("Schmidt reconstruction and marginal symmetry", "schmidt-form", w, 1e-9))
}

fn check_local_invariance(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples()).map(|i| {
        let n = 2 + i % 4;
        let s = fixture_state(n, i);
        let mut r = rng::stream_rng(SEED, "verify-local", i as u64);
        let (ua, ub) = (numerics::haar_unitary(n, &mut r), numerics::haar_unitary(n, &mut r));
        let moved = s.apply_local_unitaries(&ua, &ub)?;
        let (a, b) = (states::schmidt_decompose(&s)?.coeffs, states::schmidt_decompose(&moved)?.coeffs);
        let spectrum = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let bob_only = s.apply_local_unitaries(&numerics::identity(n), &ub)?;
        let marg = theorem::marginal_distance(&s, &bob_only, Party::Alice)?;
        Ok(spectrum.max(marg))
    }))?;
    Ok(within("local unitaries keep Schmidt spectrum and far marginal", "schmidt-form", w, 1e-9))
}

fn random_operation(party: Party, n: usize, r: &mut rand_chacha::ChaCha8Rng) -> Result<LocalOperation> {
    LocalOperation::new(party, theorem::random_contraction(n, r))
}

fn check_commutation(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples()).map(|i| {
        let n = 2 + i % 3;
        let s = fixture_state(n, i);
        let mut r = rng::stream_rng(SEED, "verify-commute", i as u64);
        let d = lqcc::dilate(&random_operation(Party::Alice, n, &mut r)?, 2 + i % 2)?;
        let ub = lqcc::lift_local_unitary(Party::Bob, &numerics::haar_unitary(n, &mut r), n, n, d.probe_dim());
        let uap = d.joint_operator(n);
        let psi = lqcc::attach_probe(&s, d.probe_dim());
        Ok((&uap * (&ub * &psi) - &ub * (&uap * &psi)).norm())
    }))?;
    Ok(within("probe unitary commutes with far-side unitary", "probe-commutation", w, 1e-10))
}

fn check_dilation(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples()).map(|i| {
        let n = 2 + i % 4;
        let s = fixture_state(n, i);
        let mut r = rng::stream_rng(SEED, "verify-dilate", i as u64);
        let a = random_operation(Party::Alice, n, &mut r)?;
        let d = lqcc::dilate(&a, 2)?;
        let direct = lqcc::apply_pair(&s, &a, &LocalOperation::identity(Party::Bob, n))?.probability;
        let unitarity = numerics::isometry_defect(d.unitary()) * 0.1;
        Ok((d.success_probability(&s)? - direct).abs().max(unitarity))
    }))?;
    Ok(within("dilation unitary and branch weight equal direct probability", "probe-dilation", w, 1e-10))
}

fn check_transfer(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples()).map(|i| {
        let n = 2 + i % 3;
        let s = fixture_state(n, i);
        let mut r = rng::stream_rng(SEED, "verify-transfer", i as u64);
        let b = random_operation(Party::Bob, n, &mut r)?;
        let t = lqcc::transfer_to_alice_side(&s, &b)?;
        let lhs = s.coeff() * b.kraus().transpose();
        let rhs = t.alice.kraus() * s.coeff() * t.bob_fix.transpose() * C64::new(t.scale, 0.0);
        Ok((lhs - rhs).norm())
    }))?;
    Ok(within("side transfer reproduces the far-side operation", "side-transfer", w, 1e-9))
}

fn check_optimal_filter(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples() * 5).map(|i| {
        let s = fixture_state(2 + i % 4, i);
        let c = concentrate::concentrate(&s)?;
        let gap = (c.success_probability - concentrate::gamma_max(&s)?).abs();
        let dev = states::maximal_entanglement_deviation(&c.output_state).unwrap_or(f64::INFINITY);
        Ok(gap.max(dev * 0.1))
    }))?;
    Ok(within("optimal filter attains N·λ_N with maximal output", "optimal-filter", w, 1e-9))
}

fn check_shift_flip(level: Level) -> Result<CheckResult> {
    let mut values = Vec::new();
    for d in 2..=6 {
        for rep in 0..level.samples().min(20) {
            let mut r = rng::stream_rng(SEED, "verify-shift", (d * 1000 + rep) as u64);
            let raw: Vec<f64> = (0..d).map(|_| rand::Rng::random::<f64>(&mut r) + 0.01).collect();
            let total: f64 = raw.iter().sum();
            let mut lambda: Vec<f64> = raw.iter().map(|x| x / total).collect();
            lambda.sort_by(|a, b| b.total_cmp(a));
            let s = PureBipartiteState::from_schmidt_coefficients(&lambda)?;
            let filter = lqcc::dilate(&concentrate::build_filter(&s)?, 2)?;
            let gamma = concentrate::gamma_max(&s)?;
            for k in 0..d {
                for n in 0..d {
                    let out = concentrate::shift_flip_extract(&s, k, n)?;
                    values.push((out.norm - 2.0 * lambda[k].sqrt()).abs());
                    let filtered = filter.branch_operator(1) * &out.coeff;
                    values.push((filtered[(k, n)].norm() - (4.0 * gamma / d as f64).sqrt()).abs());
                }
            }
        }
    }
    let w = values.into_iter().fold(0.0, f64::max);
    Ok(within("shift-flip extraction amplitude through the filter", "shift-flip", w, 1e-9))
}

fn check_sufficiency(level: Level) -> Result<CheckResult> {
    let w = worst((0..level.samples()).map(|i| {
        let n = 2 + i % 3;
        let mut r = rng::stream_rng(SEED, "verify-sufficiency", i as u64);
        let s = if i % 2 == 0 {
            fixture_state(n, i)
        } else {
            let mut lambda = vec![0.0; n];
            for (k, l) in lambda.iter_mut().enumerate() {
                *l = if k < n / 2 + 1 { 2.0 } else { 1.0 };
            }
            let t: f64 = lambda.iter().sum();
            let base =
                PureBipartiteState::from_schmidt_coefficients(&lambda.iter().map(|l| l / t).collect::<Vec<_>>())?;
            base.apply_local_unitaries(&numerics::haar_unitary(n, &mut r), &numerics::haar_unitary(n, &mut r))?
        };
        let partner = theorem::shared_marginal_partner(&s, Party::Alice, &mut r)?;
        let v = theorem::shared_concentrator(&s, &partner, Party::Alice, theorem::MARGINAL_TOL)?;
        match v.decision {
            theorem::Decision::Concentratable { checks, .. } => Ok((checks[0].probability - checks[1].probability)
                .abs()
                .max(checks[0].maximality_deviation * 0.01)
                .max(checks[1].maximality_deviation * 0.01)),
            theorem::Decision::Impossible { .. } => Ok(f64::INFINITY),
        }
    }))?;
    Ok(within("shared marginal pairs share one filter", "shared-marginal", w, 1e-10))
}

fn distinct_marginal_pair(i: usize) -> Result<(PureBipartiteState, PureBipartiteState)> {
    let n = 2 + i % 2;
    let mut k = 0;
    loop {
        let s1 = fixture_state(n, 10_000 + i);
        let s2 =
            states::random_pure_state_from(n, n, &mut rng::stream_rng(SEED, "verify-necessity", (i * 100 + k) as u64))?;
        if theorem::marginal_distance(&s1, &s2, Party::Alice)? > 0.01 {
            return Ok((s1, s2));
        }
        k += 1;
    }
}

fn check_necessity(level: Level) -> Result<CheckResult> {
    let pairs = match level {
        Level::Quick => 5,
        Level::Full => 200,
    };
    let w = worst((0..pairs).map(|i| {
        let (s1, s2) = distinct_marginal_pair(i)?;
        let v = theorem::shared_concentrator(&s1, &s2, Party::Alice, theorem::MARGINAL_TOL)?;
        let theorem::Decision::Impossible { cross_check } = v.decision else { return Ok(f64::INFINITY) };
        if cross_check.maximality_deviation <= 1e-3 {
            return Ok(f64::INFINITY);
        }
        Ok(theorem::proposition_falsifier(&s1, &s2, level.budget(), i as u64)?.best_score)
    }))?;
    Ok(within(
        "distinct marginals admit no common concentrator",
        "no-common-concentrator",
        w,
        1.0 - theorem::PROPOSITION_MARGIN,
    ))
}

fn check_matrix_condition(level: Level) -> Result<CheckResult> {
    let mut failures = 0usize;
    for i in 0..level.samples() * 5 {
        let mut r = rng::stream_rng(SEED, "verify-matrix", i as u64);
        let n = 2 + i % 3;
        let prob = |r: &mut rand_chacha::ChaCha8Rng| {
            let raw: Vec<f64> = (0..n).map(|_| rand::Rng::random::<f64>(r)).collect();
            let t: f64 = raw.iter().sum();
            let mut v: Vec<f64> = raw.iter().map(|x| x / t).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        };
        let lambda = prob(&mut r);
        let mu = if i % 3 == 0 { lambda.clone() } else { prob(&mut r) };
        let u = if i % 6 == 0 { numerics::identity(n) } else { numerics::haar_unitary(n, &mut r) };
        let rep = theorem::check_matrix_condition(&u, &lambda, &mu, 1e-9)?;
        let equal = lambda.iter().zip(&mu).all(|(a, b)| (a - b).abs() <= 1e-9);
        if rep.mismatch || (rep.holds && !equal) || (i % 6 == 0 && !rep.holds) {
            failures += 1;
        }
    }
    Ok(within("conjugation condition forces equal spectra", "spectrum-condition", failures as f64, 0.0))
}

fn check_bob_reduction(level: Level) -> Result<CheckResult> {
    let mut failures = 0usize;
    for i in 0..level.samples() {
        let n = 2 + i % 3;
        let mut r = rng::stream_rng(SEED, "verify-bob", i as u64);
        let s1 = fixture_state(n, i);
        let (va, wb) = (numerics::haar_unitary(n, &mut r), numerics::haar_unitary(n, &mut r));
        let s2 = s1.apply_local_unitaries(&va, &wb)?;
        let b = random_operation(Party::Bob, n, &mut r)?;
        let positive = theorem::check_bob_side_reduction(&s1, &s2, &b, &wb.adjoint(), 1e-8)?;
        let other = states::random_pure_state_from(n, n, &mut r)?;
        let negative = theorem::check_bob_side_reduction(&s1, &other, &b, &numerics::identity(n), 1e-8)?;
        let implication_ok =
            positive.clauses.iter().chain(&negative.clauses).all(|c| c.name != theorem::CLAUSE_IMPLICATION || c.holds);
        if !positive.holds
            || negative.holds
            || !negative.failing_clauses().contains(&theorem::CLAUSE_INPUT_SPECTRA)
            || !implication_ok
        {
            failures += 1;
        }
    }
    Ok(within("far-side branch reduction clauses", "side-reduction", failures as f64, 0.0))
}

fn check_superdense(level: Level) -> Result<CheckResult> {
    let trials = match level {
        Level::Quick => 2_000,
        Level::Full => 10_000,
    };
    let w = worst([0.05, 0.15, 0.25, 0.4, 0.5].into_iter().map(|l2| {
        let s = superdense::state_with_lambda2(l2)?;
        let p = superdense::success_probability(&s)?;
        let b = superdense::run_batch(&s, trials, SEED)?;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt().max(1.0 / trials as f64);
        let z = (b.success_rate - p).abs() / sigma;
        Ok(if b.errors_given_success > 0 { f64::INFINITY } else { z })
    }))?;
    Ok(within("superdense success rate 2λ₂ (σ units), zero errors", "superdense", w, 5.0))
}

fn check_purification(level: Level) -> Result<CheckResult> {
    let r = theorem::purification_falsifier(&DensityMatrix::werner(0.5)?, level.budget(), SEED)?;
    Ok(within("Werner p=0.5 stays far from maximal", "purification", r.best_score, 1.0 - theorem::PURIFICATION_MARGIN))
}

/// Runs every check and returns one row per invariant.
pub fn run_suite(level: Level) -> Result<Vec<CheckResult>> {
    let checks: [fn(Level) -> Result<CheckResult>; 18] = [
        check_svd,
        check_eigh,
        check_kron,
        check_completion,
        check_schmidt,
        check_local_invariance,
        check_commutation,
        check_dilation,
        check_transfer,
        check_optimal_filter,
        check_shift_flip,
        check_sufficiency,
        check_necessity,
        check_matrix_condition,
        check_bob_reduction,
        check_superdense,
        check_purification,
        check_determinism,
    ];
    checks.iter().map(|c| c(level)).collect()
}

fn check_determinism(_level: Level) -> Result<CheckResult> {
    let (s1, s2) = distinct_marginal_pair(0)?;
    let a = theorem::proposition_falsifier(&s1, &s2, 500, 1)?;
    let b = theorem::proposition_falsifier(&s1, &s2, 500, 1)?;
    let same = a.best_score == b.best_score && a.clauses == b.clauses;
    Ok(within("falsifier reports are reproducible", "determinism", if same { 0.0 } else { 1.0 }, 0.0))
}
