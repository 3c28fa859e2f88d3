//! Bipartite pure states, their Schmidt form, marginals and density matrices.
//!
//! A state on `C^m ⊗ C^n` is stored as its `m×n` coefficient matrix `C` with
//! `|ψ⟩ = Σ C[i,j] |i⟩_A |j⟩_B`. A pair of local operators `(A, B)` acts as
//! `C ↦ A · C · Bᵀ`, which turns every local-operation identity into matrix
//! algebra. Flattened state vectors use the index `i·n + j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix, C64, DEFAULT_TOL};
use crate::rng;

/// One of the two parties sharing the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    #[serde(alias = "alice", alias = "A")]
    Alice,
    #[serde(alias = "bob", alias = "B")]
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Party::Alice => "Alice",
            Party::Bob => "Bob",
        })
    }
}

impl std::str::FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alice" | "a" => Ok(Party::Alice),
            "bob" | "b" => Ok(Party::Bob),
            other => Err(Error::invalid(format!("unknown party {other:?}"))),
        }
    }
}

/// Normalized pure state of a bipartite system.
#[derive(Debug, Clone, PartialEq)]
pub struct PureBipartiteState {
    coeff: ComplexMatrix,
}

impl PureBipartiteState {
    /// Wraps a coefficient matrix whose Frobenius norm is 1 within [`DEFAULT_TOL`].
    pub fn new(coeff: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(coeff, DEFAULT_TOL)
    }

    pub fn with_tolerance(coeff: ComplexMatrix, tol: f64) -> Result<Self> {
        if coeff.is_empty() {
            return Err(Error::invalid("state has an empty coefficient matrix"));
        }
        numerics::ensure_finite(&coeff)?;
        let norm = coeff.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::invalid(format!("state is not normalized (norm {norm})")));
        }
        Ok(PureBipartiteState { coeff })
    }

    /// Rescales any nonzero coefficient matrix to unit norm.
    pub fn normalized(coeff: ComplexMatrix) -> Result<Self> {
        numerics::ensure_finite(&coeff)?;
        let norm = coeff.norm();
        if coeff.is_empty() || norm == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        Ok(PureBipartiteState { coeff: coeff.unscale(norm) })
    }

    /// `Σ √λ_i |i⟩|i⟩` for a probability vector `λ`.
    pub fn from_schmidt_coefficients(lambda: &[f64]) -> Result<Self> {
        if lambda.iter().any(|&l| l.is_nan() || l < 0.0) {
            return Err(Error::invalid("Schmidt coefficients must be nonnegative"));
        }
        let sqrt: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
        Self::new(numerics::diag_real(&sqrt))
    }

    pub fn coeff(&self) -> &ComplexMatrix {
        &self.coeff
    }

    pub fn into_coeff(self) -> ComplexMatrix {
        self.coeff
    }

    pub fn dim_a(&self) -> usize {
        self.coeff.nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.coeff.ncols()
    }

    pub fn dim(&self, party: Party) -> usize {
        match party {
            Party::Alice => self.dim_a(),
            Party::Bob => self.dim_b(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.dim_a() == self.dim_b()
    }

    /// `(U_A ⊗ U_B)|ψ⟩` for unitaries `U_A`, `U_B`.
    pub fn apply_local_unitaries(&self, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> Result<Self> {
        if u_a.shape() != (self.dim_a(), self.dim_a()) || u_b.shape() != (self.dim_b(), self.dim_b()) {
            return Err(Error::invalid("local unitary dimensions do not match the state"));
        }
        for u in [u_a, u_b] {
            if !numerics::is_unitary(u, numerics::FACTORIZATION_TOL) {
                return Err(Error::invalid("local operator is not unitary"));
            }
        }
        Self::normalized(u_a * &self.coeff * u_b.transpose())
    }

    /// State vector in the `i·dim_b + j` ordering.
    pub fn to_vector(&self) -> nalgebra::DVector<C64> {
        nalgebra::DVector::from_iterator(self.coeff.len(), self.coeff.transpose().iter().copied())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureBipartiteState) -> f64 {
        self.coeff.dotc(&other.coeff).norm_sqr()
    }

    pub fn distance(&self, other: &PureBipartiteState) -> f64 {
        (&self.coeff - &other.coeff).norm()
    }
}

/// Schmidt decomposition `C = L · diag(√λ) · Rᵀ`.
///
/// Columns of `left` and `right` are the Schmidt kets of Alice and Bob. For
/// degenerate coefficients the basis is whatever the SVD returns, so
/// comparisons between Schmidt forms should look at `coeffs` only.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    pub coeffs: Vec<f64>,
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
}

/// Coefficients below this fraction of the largest one count as zero.
pub const SCHMIDT_RANK_THRESHOLD: f64 = 1e-9;

impl SchmidtForm {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let sqrt: Vec<f64> = self.coeffs.iter().map(|l| l.sqrt()).collect();
        &self.left * numerics::diag_real(&sqrt) * self.right.transpose()
    }

    pub fn rank(&self) -> usize {
        let top = self.coeffs.first().copied().unwrap_or(0.0);
        self.coeffs.iter().filter(|&&l| l > SCHMIDT_RANK_THRESHOLD * top).count()
    }

    /// Smallest coefficient, `λ_N`.
    pub fn smallest(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Von Neumann entropy of either marginal, in bits.
    pub fn entropy(&self) -> f64 {
        self.coeffs.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum::<f64>() + 0.0
    }
}

pub fn schmidt_decompose(s: &PureBipartiteState) -> Result<SchmidtForm> {
    let dec = numerics::svd(s.coeff())?;
    let coeffs = dec.singular_values.iter().map(|sv| (sv * sv).min(1.0)).collect();
    Ok(SchmidtForm { coeffs, left: dec.u, right: dec.v.map(|z| z.conj()) })
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DEFAULT_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.is_empty() {
            return Err(Error::invalid("density matrix must be square and nonempty"));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(Error::invalid(format!("density matrix trace is {trace}, expected 1")));
        }
        let spectrum = numerics::eigh(&matrix, tol)?;
        let lowest = spectrum.values.last().copied().unwrap_or(0.0);
        if lowest < -tol {
            return Err(Error::invalid(format!("density matrix has negative eigenvalue {lowest:e}")));
        }
        let matrix = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        Ok(DensityMatrix { matrix })
    }

    /// Normalizes a nonzero positive operator by its trace.
    pub fn from_unnormalized(matrix: ComplexMatrix) -> Result<Self> {
        let trace = matrix.trace().re;
        if trace.is_nan() || trace <= 0.0 {
            return Err(Error::invalid("operator has nonpositive trace"));
        }
        Self::new(matrix.unscale(trace))
    }

    /// `|ψ⟩⟨ψ|` on the joint space.
    pub fn from_pure(s: &PureBipartiteState) -> Self {
        let v = s.to_vector();
        DensityMatrix { matrix: &v * v.adjoint() }
    }

    /// `p·|Φ_N⟩⟨Φ_N| + (1−p)·I/N²`; for `N = 2` this is the Werner state.
    pub fn isotropic(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("mixing weight {p} outside [0, 1]")));
        }
        let phi = Self::from_pure(&max_entangled(n)?);
        let d = n * n;
        let noise = numerics::identity(d).unscale(d as f64);
        Ok(DensityMatrix { matrix: phi.matrix * C64::new(p, 0.0) + noise * C64::new(1.0 - p, 0.0) })
    }

    pub fn werner(p: f64) -> Result<Self> {
        Self::isotropic(2, p)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(numerics::eigh(&self.matrix, DEFAULT_TOL)?.values)
    }

    pub fn rank(&self, tol: f64) -> Result<usize> {
        Ok(self.spectrum()?.into_iter().filter(|&e| e > tol).count())
    }

    /// Local dimension `N` when this acts on `C^N ⊗ C^N`.
    pub fn bipartite_dim(&self) -> Result<usize> {
        let d = self.dim();
        let n = (d as f64).sqrt().round() as usize;
        if n < 2 || n * n != d {
            return Err(Error::invalid(format!("dimension {d} is not N² for a bipartite N×N system with N ≥ 2")));
        }
        Ok(n)
    }
}

pub fn marginal(s: &PureBipartiteState, side: Party) -> DensityMatrix {
    let c = s.coeff();
    let m = match side {
        Party::Alice => c * c.adjoint(),
        Party::Bob => (c.adjoint() * c).transpose(),
    };
    DensityMatrix { matrix: (&m + m.adjoint()) * C64::new(0.5, 0.0) }
}

/// `|Φ_N⟩ = N^{-1/2} Σ |i⟩|i⟩`.
pub fn max_entangled(n: usize) -> Result<PureBipartiteState> {
    if n < 2 {
        return Err(Error::invalid(format!("maximally entangled state needs N ≥ 2, got {n}")));
    }
    Ok(PureBipartiteState { coeff: numerics::identity(n).unscale((n as f64).sqrt()) })
}

/// True iff the state is square and every Schmidt coefficient is `1/N` within `tol`.
pub fn is_maximally_entangled(s: &PureBipartiteState, tol: f64) -> bool {
    maximal_entanglement_deviation(s).is_some_and(|dev| dev <= tol)
}

/// `max_i |λ_i − 1/N|`, or `None` for a non-square state.
pub fn maximal_entanglement_deviation(s: &PureBipartiteState) -> Option<f64> {
    if !s.is_square() {
        return None;
    }
    let n = s.dim_a() as f64;
    let form = schmidt_decompose(s).ok()?;
    Some(form.coeffs.iter().map(|l| (l - 1.0 / n).abs()).fold(0.0, f64::max))
}

/// Gaussian-matrix random state, deterministic in `seed`.
pub fn random_pure_state(dim_a: usize, dim_b: usize, seed: u64) -> Result<PureBipartiteState> {
    random_pure_state_from(dim_a, dim_b, &mut rng::stream_rng(seed, "pure-state", 0))
}

pub fn random_pure_state_from<R: rand::Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> Result<PureBipartiteState> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::invalid("state dimensions must be positive"));
    }
    PureBipartiteState::normalized(rng::complex_gaussian(dim_a, dim_b, rng))
}

/// Magic basis of two qubits: maximally entangled states are exactly the
/// real combinations of these columns, up to a global phase.
fn magic_basis() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x * h, 0.0);
    let i = |x: f64| C64::new(0.0, x * h);
    let z = C64::new(0.0, 0.0);
    #[rustfmt::skip]
    let cols = [
        r(1.0), i(1.0),  z,      z,
        z,      z,       i(1.0), r(1.0),
        z,      z,       i(1.0), r(-1.0),
        r(1.0), i(-1.0), z,      z,
    ];
    ComplexMatrix::from_row_slice(4, 4, &cols)
}

fn fef_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    let m = magic_basis();
    let in_magic = m.adjoint() * rho.matrix() * &m;
    let real_part = in_magic.map(|z| C64::new(z.re, 0.0));
    Ok(numerics::eigh(&real_part, 1e-8)?.values[0])
}

/// `⟨Φ_U|ρ|Φ_U⟩` with `|Φ_U⟩ = (U ⊗ I)|Φ_N⟩`.
fn overlap_with_rotated_max_entangled(rho: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    let n = u.nrows();
    let phi = nalgebra::DVector::from_iterator(n * n, u.transpose().iter().map(|z| z / (n as f64).sqrt()));
    phi.dotc(&(rho * &phi)).re
}

/// Lower bound on the fully entangled fraction from `sample_budget` Haar
/// rotations plus the identity. Rotating one side is enough, because
/// `(U_A ⊗ U_B)|Φ_N⟩ = (U_A U_Bᵀ ⊗ I)|Φ_N⟩`.
pub fn fully_entangled_fraction_sampled(rho: &DensityMatrix, sample_budget: usize, seed: u64) -> Result<f64> {
    let n = rho.bipartite_dim()?;
    let mut best = overlap_with_rotated_max_entangled(rho.matrix(), &numerics::identity(n));
    let mut r = rng::stream_rng(seed, "fef-sampling", 0);
    for _ in 0..sample_budget {
        let u = numerics::haar_unitary(n, &mut r);
        best = best.max(overlap_with_rotated_max_entangled(rho.matrix(), &u));
    }
    Ok(best.clamp(0.0, 1.0))
}

/// Largest overlap of `rho` with any maximally entangled state.
///
/// Exact for two qubits (magic-basis eigenvalue). For `N ≥ 3` it is the
/// sampled lower bound of [`fully_entangled_fraction_sampled`].
pub fn fully_entangled_fraction(rho: &DensityMatrix, sample_budget: usize, seed: u64) -> Result<f64> {
    match rho.bipartite_dim()? {
        2 => Ok(fef_two_qubit(rho)?.clamp(0.0, 1.0)),
        _ => fully_entangled_fraction_sampled(rho, sample_budget, seed),
    }
}
