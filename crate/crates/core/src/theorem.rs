//! When can one local filter concentrate two different states?
//!
//! Two full-rank states on `C^N ⊗ C^N` are concentrated by the same local
//! filter on one party's side exactly when their marginals on that side
//! coincide. [`shared_concentrator`] decides this from the marginals alone.
//! The remaining operations check the matrix conditions the criterion rests
//! on, and run seeded randomized searches over individual-pair operations
//! that corroborate the no-go side empirically.

use rand::Rng;
use serde::Serialize;

use crate::concentrate;
use crate::error::{Error, Result};
use crate::lqcc::{self, LocalOperation, ANNIHILATION_THRESHOLD};
use crate::numerics::{self, ComplexMatrix, C64};
use crate::parallel::{self, Execution};
use crate::rng;
use crate::states::{self, DensityMatrix, Party, PureBipartiteState};

/// Default tolerance for comparing marginals.
pub const MARGINAL_TOL: f64 = 1e-7;

/// Maximality tolerance used when verifying concentrated outputs.
pub const MAXIMALITY_TOL: f64 = 1e-8;

/// Score margin the suite applies to [`proposition_falsifier`]. It reflects a
/// finite search, not a constant of the theory.
pub const PROPOSITION_MARGIN: f64 = 1e-4;

/// Score margin the suite applies to [`purification_falsifier`] on Werner inputs.
pub const PURIFICATION_MARGIN: f64 = 1e-3;

/// Haar samples per output when the fully entangled fraction is estimated (`N ≥ 3`).
pub const FEF_SAMPLES_PER_TRIAL: usize = 256;

fn same_square_dims(s1: &PureBipartiteState, s2: &PureBipartiteState) -> Result<usize> {
    if !s1.is_square() || s1.coeff().shape() != s2.coeff().shape() {
        return Err(Error::invalid("states must both live on the same N×N space"));
    }
    Ok(s1.dim_a())
}

fn require_full_rank(s: &PureBipartiteState) -> Result<()> {
    let form = states::schmidt_decompose(s)?;
    let smallest = form.smallest();
    if smallest <= states::SCHMIDT_RANK_THRESHOLD {
        return Err(Error::ZeroCoefficient { smallest, threshold: states::SCHMIDT_RANK_THRESHOLD });
    }
    Ok(())
}

/// Frobenius distance between the two states' marginals on `side`.
pub fn marginal_distance(s1: &PureBipartiteState, s2: &PureBipartiteState, side: Party) -> Result<f64> {
    if s1.coeff().shape() != s2.coeff().shape() {
        return Err(Error::invalid("states have different dimensions"));
    }
    Ok((states::marginal(s1, side).matrix() - states::marginal(s2, side).matrix()).norm())
}

pub fn marginals_equal(s1: &PureBipartiteState, s2: &PureBipartiteState, side: Party, tol: f64) -> Result<bool> {
    Ok(marginal_distance(s1, s2, side)? <= tol)
}

/// What a filter did to one state.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FilterCheck {
    pub probability: f64,
    /// `max_i |λ_i − 1/N|` of the output.
    pub maximality_deviation: f64,
    pub maximal: bool,
}

fn check_filter(s: &PureBipartiteState, filter: &LocalOperation) -> Result<FilterCheck> {
    let out = lqcc::apply_local(s, filter)?;
    let maximality_deviation = states::maximal_entanglement_deviation(&out.state).unwrap_or(f64::INFINITY);
    Ok(FilterCheck {
        probability: out.probability,
        maximality_deviation,
        maximal: maximality_deviation <= MAXIMALITY_TOL,
    })
}

#[derive(Debug, Clone)]
pub enum Decision {
    /// One filter on `side` concentrates both states; `checks` holds its effect on each.
    Concentratable { filter: LocalOperation, checks: [FilterCheck; 2] },
    /// The marginals differ; `cross_check` is the first state's filter applied to the second.
    Impossible { cross_check: FilterCheck },
}

#[derive(Debug, Clone)]
pub struct SharedConcentratorVerdict {
    pub side: Party,
    pub marginal_distance: f64,
    pub decision: Decision,
}

impl SharedConcentratorVerdict {
    pub fn is_concentratable(&self) -> bool {
        matches!(self.decision, Decision::Concentratable { .. })
    }
}

/// Decides whether a single filter on `side` concentrates both states.
///
/// The verdict comes from the marginal comparison. A concentratable verdict
/// is then verified by applying the filter to both states; an impossible one
/// records how the first state's filter fails on the second.
pub fn shared_concentrator(
    s1: &PureBipartiteState,
    s2: &PureBipartiteState,
    side: Party,
    tol: f64,
) -> Result<SharedConcentratorVerdict> {
    same_square_dims(s1, s2)?;
    require_full_rank(s1)?;
    require_full_rank(s2)?;
    let distance = marginal_distance(s1, s2, side)?;
    let filter = concentrate::build_filter_on(s1, side)?;
    let decision = if distance <= tol {
        let checks = [check_filter(s1, &filter)?, check_filter(s2, &filter)?];
        // marginals agree only to `tol`, so the outputs are maximal to about that order
        let slack = 10.0 * tol + MAXIMALITY_TOL;
        if checks.iter().any(|c| c.maximality_deviation > slack) {
            return Err(Error::NumericalFailure(format!(
                "shared filter failed verification (deviations {:e}, {:e})",
                checks[0].maximality_deviation, checks[1].maximality_deviation
            )));
        }
        Decision::Concentratable { filter, checks }
    } else {
        Decision::Impossible { cross_check: check_filter(s2, &filter)? }
    };
    Ok(SharedConcentratorVerdict { side, marginal_distance: distance, decision })
}

/// Clause-by-clause result of the condition `C·diag(λ) = U·diag(μ)·U†`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatrixConditionReport {
    /// Least-squares proportionality constant.
    pub constant: f64,
    /// `‖C·diag(λ) − U·diag(μ)·U†‖_F`.
    pub residual: f64,
    pub proportional: bool,
    pub constant_is_one: bool,
    pub spectra_equal: bool,
    /// Proportionality held but its forced consequences (`C = 1`, `λ = μ`) did not.
    pub mismatch: bool,
    pub holds: bool,
}

fn check_probability_vector(v: &[f64], name: &str) -> Result<()> {
    if v.iter().any(|&x| x < -numerics::DEFAULT_TOL) || (v.iter().sum::<f64>() - 1.0).abs() > numerics::DEFAULT_TOL {
        return Err(Error::invalid(format!("{name} is not a probability vector")));
    }
    if v.windows(2).any(|w| w[1] > w[0] + numerics::DEFAULT_TOL) {
        return Err(Error::invalid(format!("{name} must be sorted in descending order")));
    }
    Ok(())
}

/// Tests `C·diag(λ) = U·diag(μ)·U†` for some constant `C`.
///
/// Unitary conjugation preserves the spectrum and both vectors sum to one, so
/// proportionality forces `C = 1` and, for descending vectors, `λ = μ`
/// elementwise. All three clauses are checked separately.
pub fn check_matrix_condition(
    u_a: &ComplexMatrix,
    lambda: &[f64],
    mu: &[f64],
    tol: f64,
) -> Result<MatrixConditionReport> {
    let n = lambda.len();
    if mu.len() != n || u_a.shape() != (n, n) || n == 0 {
        return Err(Error::invalid("matrix condition inputs have inconsistent dimensions"));
    }
    if !numerics::is_unitary(u_a, numerics::FACTORIZATION_TOL.max(tol)) {
        return Err(Error::invalid("U_A is not unitary"));
    }
    check_probability_vector(lambda, "λ")?;
    check_probability_vector(mu, "μ")?;

    let rotated = u_a * numerics::diag_real(mu) * u_a.adjoint();
    let diag_lambda = numerics::diag_real(lambda);
    let norm_sq: f64 = lambda.iter().map(|l| l * l).sum();
    let constant = (0..n).map(|i| lambda[i] * rotated[(i, i)].re).sum::<f64>() / norm_sq;
    let residual = (diag_lambda * C64::new(constant, 0.0) - rotated).norm();
    let proportional = residual <= tol;
    let constant_is_one = (constant - 1.0).abs() <= tol;
    let spectra_equal = lambda.iter().zip(mu).all(|(l, m)| (l - m).abs() <= tol);
    Ok(MatrixConditionReport {
        constant,
        residual,
        proportional,
        constant_is_one,
        spectra_equal,
        mismatch: proportional && !(constant_is_one && spectra_equal),
        holds: proportional && constant_is_one && spectra_equal,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub holds: bool,
    pub value: f64,
}

/// Bob-side reduction check for one Kraus branch `B` and Bob unitary `U_B`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BobReductionReport {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// Schmidt spectrum of `(I ⊗ B)|s1⟩`, normalized.
    pub kappa_first: Vec<f64>,
    /// Schmidt spectrum of `(I ⊗ B·U_B)|s2⟩`, normalized.
    pub kappa_second: Vec<f64>,
    pub weight_first: f64,
    pub weight_second: f64,
    /// Distance between the Bob marginals of the two normalized outputs.
    pub output_marginal_distance: f64,
    pub clauses: Vec<Clause>,
    pub holds: bool,
}

impl BobReductionReport {
    pub fn failing_clauses(&self) -> Vec<&'static str> {
        self.clauses.iter().filter(|c| !c.holds).map(|c| c.name).collect()
    }
}

pub const CLAUSE_OUTPUT_SPECTRA: &str = "output spectra agree";
pub const CLAUSE_WEIGHTS: &str = "success weights agree";
pub const CLAUSE_INPUT_SPECTRA: &str = "input spectra agree";
pub const CLAUSE_IMPLICATION: &str = "equal output marginals force equal weights and spectra";

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Applies `B` to the first state and `B·U_B` to the second, both on Bob's
/// side, and compares Schmidt spectra `κ`, success weights `ε`, `ϵ` and input
/// spectra `λ`, `μ`.
///
/// `holds` requires all three to agree. The fourth clause is the reduction
/// itself: when `B` is invertible, equal Bob marginals after the operation
/// force `ε = ϵ` and `λ = μ`.
pub fn check_bob_side_reduction(
    s1: &PureBipartiteState,
    s2: &PureBipartiteState,
    b_op: &LocalOperation,
    u_b: &ComplexMatrix,
    tol: f64,
) -> Result<BobReductionReport> {
    let n = same_square_dims(s1, s2)?;
    require_full_rank(s1)?;
    require_full_rank(s2)?;
    if b_op.party() != Party::Bob || b_op.dim() != n {
        return Err(Error::invalid("expected a Bob operation on the states' subsystem"));
    }
    if u_b.shape() != (n, n) || !numerics::is_unitary(u_b, numerics::FACTORIZATION_TOL) {
        return Err(Error::invalid("U_B is not a unitary of the right dimension"));
    }
    let image1 = lqcc::local_image(s1, b_op)?;
    let image2 = s2.coeff() * (b_op.kraus() * u_b).transpose();
    let (weight_first, weight_second) = (image1.norm_squared(), image2.norm_squared());
    for w in [weight_first, weight_second] {
        if w < ANNIHILATION_THRESHOLD {
            return Err(Error::Annihilated { probability: w });
        }
    }
    let out1 = PureBipartiteState::normalized(image1)?;
    let out2 = PureBipartiteState::normalized(image2)?;
    let kappa_first = states::schmidt_decompose(&out1)?.coeffs;
    let kappa_second = states::schmidt_decompose(&out2)?.coeffs;
    let lambda = states::schmidt_decompose(s1)?.coeffs;
    let mu = states::schmidt_decompose(s2)?.coeffs;
    let output_marginal_distance = marginal_distance(&out1, &out2, Party::Bob)?;

    let spectra_gap = max_abs_diff(&kappa_first, &kappa_second);
    let weight_gap = (weight_first - weight_second).abs();
    let input_gap = max_abs_diff(&lambda, &mu);
    let invertible = numerics::svd(b_op.kraus())?.singular_values[n - 1] > 1e-6;
    let premise = invertible && output_marginal_distance <= tol;
    let implication = !premise || (weight_gap <= tol * 10.0 && input_gap <= tol * 10.0);

    let clauses = vec![
        Clause { name: CLAUSE_OUTPUT_SPECTRA, holds: spectra_gap <= tol, value: spectra_gap },
        Clause { name: CLAUSE_WEIGHTS, holds: weight_gap <= tol, value: weight_gap },
        Clause { name: CLAUSE_INPUT_SPECTRA, holds: input_gap <= tol, value: input_gap },
        Clause { name: CLAUSE_IMPLICATION, holds: implication, value: output_marginal_distance },
    ];
    let holds = clauses[..3].iter().all(|c| c.holds);
    Ok(BobReductionReport {
        lambda,
        mu,
        kappa_first,
        kappa_second,
        weight_first,
        weight_second,
        output_marginal_distance,
        clauses,
        holds,
    })
}

/// Kraus pair `(A, B)` acting on Alice and Bob.
#[derive(Debug, Clone)]
pub struct KrausPair {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

/// Summary of a randomized search.
#[derive(Debug, Clone)]
pub struct FalsifierReport {
    pub trials: usize,
    /// Best score found, in `[0, 1]`.
    pub best_score: f64,
    pub best_operation: Option<KrausPair>,
    pub seed: u64,
    pub clauses: Vec<String>,
}

/// Complex Gaussian matrix scaled so its largest singular value is exactly 1.
pub fn random_contraction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let g = rng::complex_gaussian(n, n, rng);
        if let Ok(top) = numerics::operator_norm(&g) {
            if top > 0.0 {
                return g.unscale(top);
            }
        }
    }
}

/// Trial 0 is the do-nothing pair; every other trial draws a fresh pair from
/// its own stream.
fn trial_pair(stream: &str, seed: u64, trial: usize, dim_a: usize, dim_b: usize) -> KrausPair {
    if trial == 0 {
        return KrausPair { a: numerics::identity(dim_a), b: numerics::identity(dim_b) };
    }
    let mut r = rng::stream_rng(seed, stream, trial as u64);
    let a = random_contraction(dim_a, &mut r);
    let b = random_contraction(dim_b, &mut r);
    KrausPair { a, b }
}

/// Running maximum that keeps the lowest trial index on ties.
fn better(x: Option<(f64, usize)>, y: Option<(f64, usize)>) -> Option<(f64, usize)> {
    match (x, y) {
        (None, y) => y,
        (x, None) => x,
        (Some(a), Some(b)) => {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

const PROPOSITION_STREAM: &str = "proposition-falsifier";
const PURIFICATION_STREAM: &str = "purification-falsifier";

/// How close `(A ⊗ B)` brings both states to one common maximally entangled
/// state: the target is the maximally entangled state nearest to the first
/// output, and the score is the smaller of the two fidelities with it.
pub fn common_target_score(c1: &ComplexMatrix, c2: &ComplexMatrix, pair: &KrausPair) -> Option<f64> {
    let bt = pair.b.transpose();
    let out1 = &pair.a * c1 * &bt;
    let out2 = &pair.a * c2 * &bt;
    let (w1, w2) = (out1.norm_squared(), out2.norm_squared());
    if w1 < ANNIHILATION_THRESHOLD || w2 < ANNIHILATION_THRESHOLD {
        return None;
    }
    let n = c1.nrows() as f64;
    let dec = numerics::svd(&out1).ok()?;
    // nearest maximally entangled coefficient matrix is Y/√N with Y the polar factor of out1
    let polar = &dec.u * dec.v.adjoint();
    let trace_norm: f64 = dec.singular_values.iter().sum();
    let fidelity_first = trace_norm * trace_norm / (n * w1);
    let fidelity_second = polar.dotc(&out2).norm_sqr() / (n * w2);
    Some(fidelity_first.min(fidelity_second).clamp(0.0, 1.0))
}

pub fn proposition_falsifier(
    s1: &PureBipartiteState,
    s2: &PureBipartiteState,
    budget: usize,
    seed: u64,
) -> Result<FalsifierReport> {
    proposition_falsifier_with(s1, s2, budget, seed, Execution::default())
}

/// Randomized search for one Kraus pair mapping two different states to the
/// same maximally entangled state.
pub fn proposition_falsifier_with(
    s1: &PureBipartiteState,
    s2: &PureBipartiteState,
    budget: usize,
    seed: u64,
    exec: Execution,
) -> Result<FalsifierReport> {
    let n = same_square_dims(s1, s2)?;
    if s1.distance(s2) <= 1e-6 {
        return Err(Error::invalid("the two states coincide; nothing to falsify"));
    }
    if budget == 0 {
        return Err(Error::invalid("budget must be at least 1"));
    }
    let (c1, c2) = (s1.coeff(), s2.coeff());
    let best = parallel::map_reduce(
        exec,
        budget,
        |t| common_target_score(c1, c2, &trial_pair(PROPOSITION_STREAM, seed, t, n, n)).map(|s| (s, t)),
        || None,
        better,
    );
    let dist_a = marginal_distance(s1, s2, Party::Alice)?;
    let dist_b = marginal_distance(s1, s2, Party::Bob)?;
    let best_score = best.map_or(0.0, |(s, _)| s);
    let clauses = vec![
        format!("marginal distance Alice {dist_a:.3e}, Bob {dist_b:.3e}"),
        format!(
            "best common-target fidelity {best_score:.9} below 1 - {PROPOSITION_MARGIN:e}: {}",
            best_score < 1.0 - PROPOSITION_MARGIN
        ),
        "margin reflects a finite search, not a constant of the theory".to_string(),
    ];
    Ok(FalsifierReport {
        trials: budget,
        best_score,
        best_operation: best.map(|(_, t)| trial_pair(PROPOSITION_STREAM, seed, t, n, n)),
        seed,
        clauses,
    })
}

/// Normalized `(A ⊗ B)ρ(A ⊗ B)†`, or `None` if annihilated.
pub fn filtered_density(rho: &DensityMatrix, pair: &KrausPair) -> Option<DensityMatrix> {
    let k = numerics::kron(&pair.a, &pair.b);
    let out = &k * rho.matrix() * k.adjoint();
    let trace = out.trace().re;
    if trace < ANNIHILATION_THRESHOLD {
        return None;
    }
    DensityMatrix::with_tolerance(out.unscale(trace), 1e-8).ok()
}

pub fn purification_falsifier(rho: &DensityMatrix, budget: usize, seed: u64) -> Result<FalsifierReport> {
    purification_falsifier_with(rho, budget, seed, Execution::default())
}

/// Randomized search for a single-pair Kraus pair that turns a mixed state
/// into a maximally entangled one, scored by fully entangled fraction.
pub fn purification_falsifier_with(
    rho: &DensityMatrix,
    budget: usize,
    seed: u64,
    exec: Execution,
) -> Result<FalsifierReport> {
    let n = rho.bipartite_dim()?;
    let spectrum = rho.spectrum()?;
    let rank = spectrum.iter().filter(|&&e| e > states::SCHMIDT_RANK_THRESHOLD).count();
    if rank < 2 {
        return Err(Error::invalid(
            "input is pure; a pure full-rank state is concentrated with a filter rather than purified",
        ));
    }
    if budget == 0 {
        return Err(Error::invalid("budget must be at least 1"));
    }
    let score = |t: usize| {
        let pair = trial_pair(PURIFICATION_STREAM, seed, t, n, n);
        let out = filtered_density(rho, &pair)?;
        let fef_seed = seed.wrapping_add(t as u64);
        states::fully_entangled_fraction(&out, FEF_SAMPLES_PER_TRIAL, fef_seed).ok().map(|f| (f, t))
    };
    let best = parallel::map_reduce(exec, budget, score, || None, better);
    let best_score = best.map_or(0.0, |(s, _)| s);
    let shown: Vec<String> = spectrum.iter().take(8).map(|e| format!("{e:.6}")).collect();
    let mut clauses = vec![
        format!("spectral decomposition: rank {rank}, eigenvalues [{}]", shown.join(", ")),
        format!(
            "best fully entangled fraction {best_score:.9} below 1 - {PURIFICATION_MARGIN:e}: {}",
            best_score < 1.0 - PURIFICATION_MARGIN
        ),
        "margin reflects a finite search, not a constant of the theory".to_string(),
    ];
    if n > 2 {
        clauses.push(format!(
            "fully entangled fraction estimated from {FEF_SAMPLES_PER_TRIAL} samples per output (lower bound)"
        ));
    }
    Ok(FalsifierReport {
        trials: budget,
        best_score,
        best_operation: best.map(|(_, t)| trial_pair(PURIFICATION_STREAM, seed, t, n, n)),
        seed,
        clauses,
    })
}

/// Unitary commuting with the Hermitian `rho`: Haar-random on each block of
/// (numerically) equal eigenvalues, expressed in `rho`'s eigenbasis.
pub fn commutant_unitary<R: Rng + ?Sized>(rho: &ComplexMatrix, tol: f64, rng: &mut R) -> Result<ComplexMatrix> {
    let e = numerics::eigh(rho, numerics::DEFAULT_TOL)?;
    let n = e.values.len();
    let mut block = ComplexMatrix::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (e.values[start] - e.values[end]).abs() <= tol {
            end += 1;
        }
        let u = numerics::haar_unitary(end - start, rng);
        block.view_mut((start, start), (end - start, end - start)).copy_from(&u);
        start = end;
    }
    Ok(&e.vectors * block * e.vectors.adjoint())
}

/// A different state with the same marginal on `side`: the commutant of that
/// marginal acts on `side`, a Haar unitary on the other party.
pub fn shared_marginal_partner<R: Rng + ?Sized>(
    s: &PureBipartiteState,
    side: Party,
    rng: &mut R,
) -> Result<PureBipartiteState> {
    let rho = states::marginal(s, side);
    let w = commutant_unitary(rho.matrix(), 1e-10, rng)?;
    let u = numerics::haar_unitary(s.dim(side.other()), rng);
    match side {
        Party::Alice => s.apply_local_unitaries(&w, &u),
        Party::Bob => s.apply_local_unitaries(&u, &w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{is_maximally_entangled, max_entangled, random_pure_state};
    use approx::assert_abs_diff_eq;

    fn schmidt(lambda: &[f64]) -> PureBipartiteState {
        PureBipartiteState::from_schmidt_coefficients(lambda).unwrap()
    }

    #[test]
    fn marginals_equal_examples() {
        let s = random_pure_state(3, 3, 1).unwrap();
        let u = numerics::random_haar_unitary(3, 2).unwrap();
        let moved = s.apply_local_unitaries(&numerics::identity(3), &u).unwrap();
        assert!(marginals_equal(&s, &moved, Party::Alice, 1e-9).unwrap());

        let (a, b) = (schmidt(&[0.75, 0.25]), schmidt(&[0.5, 0.5]));
        assert!(!marginals_equal(&a, &b, Party::Alice, 1e-9).unwrap());
        assert!(!marginals_equal(&a, &b, Party::Bob, 1e-9).unwrap());

        let phi = schmidt(&[0.5, 0.5]);
        let ua = numerics::random_haar_unitary(2, 3).unwrap();
        let rotated = phi.apply_local_unitaries(&ua, &numerics::identity(2)).unwrap();
        assert!(marginals_equal(&phi, &rotated, Party::Alice, 1e-9).unwrap());
    }

    #[test]
    fn shared_concentrator_examples() {
        let s1 = random_pure_state(3, 3, 4).unwrap();
        let u = numerics::random_haar_unitary(3, 5).unwrap();
        let s2 = s1.apply_local_unitaries(&numerics::identity(3), &u).unwrap();
        let v = shared_concentrator(&s1, &s2, Party::Alice, MARGINAL_TOL).unwrap();
        let Decision::Concentratable { checks, .. } = &v.decision else { panic!("expected concentratable") };
        assert!(checks.iter().all(|c| c.maximal));
        assert_abs_diff_eq!(checks[0].probability, checks[1].probability, epsilon = 1e-10);

        let v =
            shared_concentrator(&schmidt(&[0.75, 0.25]), &schmidt(&[0.5, 0.5]), Party::Alice, MARGINAL_TOL).unwrap();
        let Decision::Impossible { cross_check } = &v.decision else { panic!("expected impossible") };
        assert!(!cross_check.maximal);
        assert!(v.marginal_distance > MARGINAL_TOL);

        let v = shared_concentrator(&s1, &s1, Party::Bob, MARGINAL_TOL).unwrap();
        let Decision::Concentratable { filter, checks } = &v.decision else { panic!() };
        let direct = concentrate::build_filter_on(&s1, Party::Bob).unwrap();
        assert!((filter.kraus() - direct.kraus()).norm() < 1e-14);
        assert_abs_diff_eq!(checks[0].probability, concentrate::gamma_max(&s1).unwrap(), epsilon = 1e-10);

        assert!(matches!(
            shared_concentrator(&schmidt(&[1.0, 0.0]), &s1, Party::Alice, MARGINAL_TOL),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            shared_concentrator(&schmidt(&[1.0, 0.0]), &schmidt(&[0.5, 0.5]), Party::Alice, MARGINAL_TOL),
            Err(Error::ZeroCoefficient { .. })
        ));
    }

    #[test]
    fn matrix_condition_examples() {
        let r = check_matrix_condition(&numerics::identity(2), &[0.7, 0.3], &[0.7, 0.3], 1e-9).unwrap();
        assert!(r.holds);
        let u = numerics::random_haar_unitary(2, 1).unwrap();
        let r = check_matrix_condition(&u, &[0.5, 0.5], &[0.5, 0.5], 1e-9).unwrap();
        assert!(r.holds);
        for seed in 0..100 {
            let u = numerics::random_haar_unitary(2, seed).unwrap();
            let r = check_matrix_condition(&u, &[0.75, 0.25], &[0.5, 0.5], 1e-9).unwrap();
            assert!(!r.holds && !r.proportional && !r.mismatch);
        }
        let not_unitary = numerics::diag_real(&[1.0, 0.5]);
        assert!(check_matrix_condition(&not_unitary, &[0.5, 0.5], &[0.5, 0.5], 1e-9).is_err());
        assert!(check_matrix_condition(&numerics::identity(2), &[0.25, 0.75], &[0.25, 0.75], 1e-9).is_err());
    }

    #[test]
    fn bob_reduction_examples() {
        let s = random_pure_state(2, 2, 3).unwrap();
        let id = LocalOperation::identity(Party::Bob, 2);
        let r = check_bob_side_reduction(&s, &s, &id, &numerics::identity(2), 1e-9).unwrap();
        assert!(r.holds, "{:?}", r.failing_clauses());

        let (a, b) = (schmidt(&[0.75, 0.25]), schmidt(&[0.6, 0.4]));
        let r = check_bob_side_reduction(&a, &b, &id, &numerics::identity(2), 1e-9).unwrap();
        assert!(!r.holds);
        assert!(r.failing_clauses().contains(&CLAUSE_INPUT_SPECTRA));

        let kill = LocalOperation::new(Party::Bob, ComplexMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(
            check_bob_side_reduction(&a, &b, &kill, &numerics::identity(2), 1e-9),
            Err(Error::Annihilated { .. })
        ));
    }

    #[test]
    fn proposition_falsifier_examples() {
        let (a, b) = (schmidt(&[0.75, 0.25]), schmidt(&[0.5, 0.5]));
        let r = proposition_falsifier(&a, &b, 2000, 7).unwrap();
        assert!(r.best_score < 1.0 - PROPOSITION_MARGIN);
        assert_eq!(r.trials, 2000);
        assert!(r.best_operation.is_some());
        assert!(proposition_falsifier(&a, &a, 10, 0).is_err());
    }

    #[test]
    fn proposition_falsifier_on_shared_marginal_pair() {
        let s1 = random_pure_state(2, 2, 11).unwrap();
        let u = numerics::random_haar_unitary(2, 12).unwrap();
        let s2 = s1.apply_local_unitaries(&numerics::identity(2), &u).unwrap();
        let r = proposition_falsifier(&s1, &s2, 2000, 1).unwrap();
        assert!(r.best_score < 1.0);
    }

    #[test]
    fn falsifier_is_deterministic_across_execution_modes() {
        let (a, b) = (schmidt(&[0.7, 0.3]), schmidt(&[0.55, 0.45]));
        let seq = proposition_falsifier_with(&a, &b, 500, 3, Execution::Sequential).unwrap();
        let par = proposition_falsifier_with(&a, &b, 500, 3, Execution::Parallel).unwrap();
        assert_eq!(seq.best_score, par.best_score);
        assert_eq!(seq.clauses, par.clauses);

        let w = DensityMatrix::werner(0.5).unwrap();
        let seq = purification_falsifier_with(&w, 300, 9, Execution::Sequential).unwrap();
        let par = purification_falsifier_with(&w, 300, 9, Execution::Parallel).unwrap();
        assert_eq!(seq.best_score, par.best_score);
    }

    #[test]
    fn purification_falsifier_examples() {
        let mixed = DensityMatrix::new(numerics::identity(4).unscale(4.0)).unwrap();
        let identity_pair = KrausPair { a: numerics::identity(2), b: numerics::identity(2) };
        let out = filtered_density(&mixed, &identity_pair).unwrap();
        assert_abs_diff_eq!(states::fully_entangled_fraction(&out, 0, 0).unwrap(), 0.25, epsilon = 1e-12);
        let r = purification_falsifier(&mixed, 100, 0).unwrap();
        assert!(r.best_score >= 0.25 - 1e-12);

        let pure = DensityMatrix::from_pure(&max_entangled(2).unwrap());
        assert!(matches!(purification_falsifier(&pure, 10, 0), Err(Error::InvalidInput(_))));

        let w = DensityMatrix::werner(0.5).unwrap();
        let r = purification_falsifier(&w, 2000, 4).unwrap();
        assert!(r.best_score >= 0.625 - 1e-12 && r.best_score < 1.0 - PURIFICATION_MARGIN);
    }

    #[test]
    fn commutant_preserves_degenerate_marginal() {
        let mut r = rng::stream_rng(1, "t", 0);
        let base = schmidt(&[0.3, 0.3, 0.2, 0.2]);
        let ua = numerics::haar_unitary(4, &mut r);
        let ub = numerics::haar_unitary(4, &mut r);
        let s = base.apply_local_unitaries(&ua, &ub).unwrap();
        let w = commutant_unitary(states::marginal(&s, Party::Alice).matrix(), 1e-10, &mut r).unwrap();
        assert!(numerics::is_unitary(&w, 1e-10));
        assert!((&w - numerics::identity(4)).norm() > 0.1);
        let partner = shared_marginal_partner(&s, Party::Alice, &mut r).unwrap();
        assert!(marginal_distance(&s, &partner, Party::Alice).unwrap() < 1e-10);
        let filter = concentrate::build_filter(&s).unwrap();
        let out = lqcc::apply_local(&partner, &filter).unwrap();
        assert!(is_maximally_entangled(&out.state, 1e-8));
    }
}
