//! Optimal single-copy concentration filters.
//!
//! For a full-rank state on `C^N ⊗ C^N` with smallest Schmidt coefficient
//! `λ_N`, the filter `K = √λ_N · ρ^{-1/2}` built from one party's marginal `ρ`
//! succeeds with probability `N·λ_N`, the optimum, and leaves a maximally
//! entangled state. `K` depends on the state only through `ρ`, so it
//! concentrates every state sharing that marginal.

use crate::error::{Error, Result};
use crate::lqcc::{self, LocalOperation};
use crate::numerics::{self, ComplexMatrix, C64};
use crate::states::{self, Party, PureBipartiteState, SCHMIDT_RANK_THRESHOLD};

/// Outcome of applying the optimal filter.
#[derive(Debug, Clone)]
pub struct ConcentrationResult {
    pub success_probability: f64,
    pub output_state: PureBipartiteState,
    pub filter: LocalOperation,
}

fn require_square(s: &PureBipartiteState) -> Result<usize> {
    if !s.is_square() {
        return Err(Error::invalid(format!("concentration needs an N×N state, got {}x{}", s.dim_a(), s.dim_b())));
    }
    Ok(s.dim_a())
}

/// `N·λ_N`; zero for rank-deficient states.
pub fn gamma_max(s: &PureBipartiteState) -> Result<f64> {
    let n = require_square(s)?;
    let form = states::schmidt_decompose(s)?;
    let smallest = form.smallest();
    Ok(if smallest <= SCHMIDT_RANK_THRESHOLD * form.coeffs[0] { 0.0 } else { n as f64 * smallest })
}

/// Optimal filter on `side`'s subsystem.
pub fn build_filter_on(s: &PureBipartiteState, side: Party) -> Result<LocalOperation> {
    require_square(s)?;
    filter_from_marginal(&states::marginal(s, side), side)
}

/// Optimal filter on Alice's subsystem.
pub fn build_filter(s: &PureBipartiteState) -> Result<LocalOperation> {
    build_filter_on(s, Party::Alice)
}

/// `√λ_min · ρ^{-1/2}` for a full-rank marginal `ρ`.
pub fn filter_from_marginal(rho: &states::DensityMatrix, side: Party) -> Result<LocalOperation> {
    let e = numerics::eigh(rho.matrix(), numerics::DEFAULT_TOL)?;
    let smallest = *e.values.last().expect("nonempty spectrum");
    if smallest <= SCHMIDT_RANK_THRESHOLD {
        return Err(Error::ZeroCoefficient { smallest, threshold: SCHMIDT_RANK_THRESHOLD });
    }
    let gains: Vec<f64> = e.values.iter().map(|&l| (smallest / l).sqrt()).collect();
    let k = &e.vectors * numerics::diag_real(&gains) * e.vectors.adjoint();
    LocalOperation::new(side, k)
}

/// Builds the optimal filter and applies it.
pub fn concentrate(s: &PureBipartiteState) -> Result<ConcentrationResult> {
    let filter = build_filter(s)?;
    let out = lqcc::apply_local(s, &filter)?;
    Ok(ConcentrationResult { success_probability: out.probability, output_state: out.state, filter })
}

fn check_index(d: usize, idx: usize, what: &str) -> Result<()> {
    if d == 0 || idx >= d {
        return Err(Error::invalid(format!("{what} index {idx} out of range for dimension {d}")));
    }
    Ok(())
}

/// Cyclic shift `T_k|j⟩ = |(j + k) mod d⟩`, with 0-based labels.
pub fn shift_operator(d: usize, k: usize) -> Result<ComplexMatrix> {
    check_index(d, k, "shift")?;
    Ok(ComplexMatrix::from_fn(
        d,
        d,
        |row, col| {
            if row == (col + k) % d {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        },
    ))
}

/// Sign flip `S^i|j⟩ = (−1)^{δ_ij}|j⟩`, with 0-based labels.
pub fn flip_operator(d: usize, i: usize) -> Result<ComplexMatrix> {
    check_index(d, i, "flip")?;
    let mut m = numerics::identity(d);
    m[(i, i)] = C64::new(-1.0, 0.0);
    Ok(m)
}

/// A state vector whose norm is carried explicitly rather than normalized away.
#[derive(Debug, Clone)]
pub struct SubnormalizedState {
    pub coeff: ComplexMatrix,
    pub norm: f64,
}

/// Applies `I ⊗ (I − Sⁿ)·T_{(n−k) mod d}` to a Schmidt-diagonal state
/// `Σ √λ_i |i⟩|i⟩`, isolating the single term `2√λ_k |k⟩|n⟩`.
pub fn shift_flip_extract(s: &PureBipartiteState, k: usize, n: usize) -> Result<SubnormalizedState> {
    let d = require_square(s)?;
    check_index(d, k, "k")?;
    check_index(d, n, "n")?;
    let c = s.coeff();
    let off_diagonal: f64 = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| c[(i, j)].norm_sqr())
        .sum();
    let diagonal_phase = (0..d).map(|i| c[(i, i)].im.abs() + (-c[(i, i)].re).max(0.0)).fold(0.0, f64::max);
    if off_diagonal.sqrt() > numerics::DEFAULT_TOL || diagonal_phase > numerics::DEFAULT_TOL {
        return Err(Error::invalid("state is not in Schmidt-diagonal form"));
    }
    let bob = (numerics::identity(d) - flip_operator(d, n)?) * shift_operator(d, (n + d - k) % d)?;
    let coeff = c * bob.transpose();
    let norm = coeff.norm();
    Ok(SubnormalizedState { coeff, norm })
}
