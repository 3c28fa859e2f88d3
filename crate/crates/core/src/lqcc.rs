//! Local generalized measurements on one party's subsystem.
//!
//! Each [`LocalOperation`] is a single Kraus branch. A branch is realized
//! physically by a [`ProbeDilation`]: a unitary on system ⊗ probe that maps
//! `|ψ⟩|P₀⟩` to `K|ψ⟩|P₁⟩ + √(I − K†K)|ψ⟩|P₀⟩`, after which the probe is
//! measured and outcome `P₁` is kept.

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix, C64, DEFAULT_TOL};
use crate::rng;
use crate::states::{Party, PureBipartiteState};

/// Outcome probabilities below this are treated as annihilation.
pub const ANNIHILATION_THRESHOLD: f64 = 1e-12;

/// One Kraus operator acting on `party`'s subsystem, with `K†K ≤ I`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperation {
    party: Party,
    kraus: ComplexMatrix,
}

impl LocalOperation {
    pub fn new(party: Party, kraus: ComplexMatrix) -> Result<Self> {
        if !kraus.is_square() || kraus.is_empty() {
            return Err(Error::invalid(format!(
                "Kraus operator must be square, got {}x{}",
                kraus.nrows(),
                kraus.ncols()
            )));
        }
        numerics::ensure_finite(&kraus)?;
        let top = numerics::operator_norm(&kraus)?;
        if top * top > 1.0 + DEFAULT_TOL {
            return Err(Error::invalid(format!("Kraus operator is not a contraction (‖K‖² = {})", top * top)));
        }
        Ok(LocalOperation { party, kraus })
    }

    pub fn identity(party: Party, dim: usize) -> Self {
        LocalOperation { party, kraus: numerics::identity(dim) }
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn kraus(&self) -> &ComplexMatrix {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus.nrows()
    }

    /// `self` applied after `first` on the same party.
    pub fn after(&self, first: &LocalOperation) -> Result<LocalOperation> {
        if self.party != first.party || self.dim() != first.dim() {
            return Err(Error::invalid("composed operations must act on the same subsystem"));
        }
        LocalOperation::new(self.party, &self.kraus * &first.kraus)
    }

    fn check_against(&self, s: &PureBipartiteState) -> Result<()> {
        if self.dim() != s.dim(self.party) {
            return Err(Error::invalid(format!(
                "{} operation has dimension {} but the subsystem has dimension {}",
                self.party,
                self.dim(),
                s.dim(self.party)
            )));
        }
        Ok(())
    }
}

/// Largest eigenvalue of `Σ K†K − I`; a family is a valid (possibly
/// incomplete) measurement iff this is `≤ 0` within tolerance.
pub fn completeness_excess(ops: &[LocalOperation]) -> Result<f64> {
    let first = ops.first().ok_or_else(|| Error::invalid("empty Kraus family"))?;
    let n = first.dim();
    let mut total = ComplexMatrix::zeros(n, n);
    for op in ops {
        if op.dim() != n || op.party != first.party {
            return Err(Error::invalid("Kraus family mixes subsystems"));
        }
        total += op.kraus.adjoint() * &op.kraus;
    }
    Ok(numerics::eigh(&(total - numerics::identity(n)), DEFAULT_TOL)?.values[0])
}

/// Normalized output of a local operation together with its probability.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub state: PureBipartiteState,
    pub probability: f64,
}

fn renormalize(image: ComplexMatrix) -> Result<Outcome> {
    let probability = image.norm_squared();
    if probability < ANNIHILATION_THRESHOLD {
        return Err(Error::Annihilated { probability });
    }
    Ok(Outcome { state: PureBipartiteState::normalized(image)?, probability })
}

/// Unnormalized `(A ⊗ B)|ψ⟩` as a coefficient matrix, `A · C · Bᵀ`.
pub fn pair_image(s: &PureBipartiteState, a: &LocalOperation, b: &LocalOperation) -> Result<ComplexMatrix> {
    if a.party != Party::Alice || b.party != Party::Bob {
        return Err(Error::invalid("apply_pair takes an Alice operation and a Bob operation"));
    }
    a.check_against(s)?;
    b.check_against(s)?;
    Ok(&a.kraus * s.coeff() * b.kraus.transpose())
}

/// Unnormalized image of a single-party operation.
pub fn local_image(s: &PureBipartiteState, op: &LocalOperation) -> Result<ComplexMatrix> {
    op.check_against(s)?;
    Ok(match op.party {
        Party::Alice => &op.kraus * s.coeff(),
        Party::Bob => s.coeff() * op.kraus.transpose(),
    })
}

/// `(A ⊗ B)|ψ⟩` renormalized, with probability `‖A · C · Bᵀ‖²_F`.
pub fn apply_pair(s: &PureBipartiteState, a: &LocalOperation, b: &LocalOperation) -> Result<Outcome> {
    renormalize(pair_image(s, a, b)?)
}

pub fn apply_local(s: &PureBipartiteState, op: &LocalOperation) -> Result<Outcome> {
    renormalize(local_image(s, op)?)
}

/// Unitary on system ⊗ probe realizing one Kraus branch by postselection.
///
/// Basis index of `|i⟩|P_p⟩` is `i·probe_dim + p`.
#[derive(Debug, Clone)]
pub struct ProbeDilation {
    party: Party,
    system_dim: usize,
    probe_dim: usize,
    unitary: ComplexMatrix,
    success_outcome: usize,
}

pub const DEFAULT_PROBE_DIM: usize = 2;

/// Builds the probe unitary for `op`.
///
/// The isometry `|ψ⟩ ↦ K|ψ⟩|P₁⟩ + √(I − K†K)|ψ⟩|P₀⟩` fills the columns that
/// take the probe from `|P₀⟩`; the remaining columns are an orthonormal
/// completion.
pub fn dilate(op: &LocalOperation, probe_dim: usize) -> Result<ProbeDilation> {
    if probe_dim < 2 {
        return Err(Error::invalid(format!("probe dimension must be at least 2, got {probe_dim}")));
    }
    let n = op.dim();
    let k = &op.kraus;
    let defect = numerics::identity(n) - k.adjoint() * k;
    let e = numerics::eigh(&defect, DEFAULT_TOL)?;
    if let Some(&low) = e.values.last() {
        if low < -DEFAULT_TOL {
            return Err(Error::invalid(format!(
                "Kraus operator is not a contraction (I − K†K has eigenvalue {low:e})"
            )));
        }
    }
    let roots: Vec<f64> = e.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let rest = &e.vectors * numerics::diag_real(&roots) * e.vectors.adjoint();

    let dim = n * probe_dim;
    let mut isometry = ComplexMatrix::zeros(dim, n);
    for i in 0..n {
        for j in 0..n {
            isometry[(i * probe_dim + 1, j)] = k[(i, j)];
            isometry[(i * probe_dim, j)] = rest[(i, j)];
        }
    }
    let completed = numerics::complete_isometry(&isometry)?;

    // completed columns 0..n are the isometry; place them at |j⟩|P₀⟩
    let mut unitary = ComplexMatrix::zeros(dim, dim);
    let mut spare = n..dim;
    for j in 0..n {
        for p in 0..probe_dim {
            let src = if p == 0 { j } else { spare.next().expect("dimension count") };
            unitary.set_column(j * probe_dim + p, &completed.column(src));
        }
    }
    Ok(ProbeDilation { party: op.party, system_dim: n, probe_dim, unitary, success_outcome: 1 })
}

impl ProbeDilation {
    pub fn party(&self) -> Party {
        self.party
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_dim
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn success_outcome(&self) -> usize {
        self.success_outcome
    }

    /// System operator taking `|ψ⟩|P₀⟩` to the `outcome` branch.
    pub fn branch_operator(&self, outcome: usize) -> ComplexMatrix {
        let np = self.probe_dim;
        ComplexMatrix::from_fn(self.system_dim, self.system_dim, |i, j| self.unitary[(i * np + outcome, j * np)])
    }

    /// Unnormalized coefficient matrices of every probe branch.
    pub fn branches(&self, s: &PureBipartiteState) -> Result<Vec<ComplexMatrix>> {
        if s.dim(self.party) != self.system_dim {
            return Err(Error::invalid("dilation and state dimensions differ"));
        }
        Ok((0..self.probe_dim)
            .map(|p| {
                let k = self.branch_operator(p);
                match self.party {
                    Party::Alice => k * s.coeff(),
                    Party::Bob => s.coeff() * k.transpose(),
                }
            })
            .collect())
    }

    pub fn branch_weights(&self, s: &PureBipartiteState) -> Result<Vec<f64>> {
        Ok(self.branches(s)?.iter().map(|b| b.norm_squared()).collect())
    }

    /// Born weight of the success branch.
    pub fn success_probability(&self, s: &PureBipartiteState) -> Result<f64> {
        Ok(self.branch_weights(s)?[self.success_outcome])
    }

    /// This dilation as an operator on the joint space `A ⊗ B ⊗ P`, index
    /// `(a·dim_b + b)·probe_dim + p`. `other_dim` is the dimension of the
    /// party the dilation does not touch.
    pub fn joint_operator(&self, other_dim: usize) -> ComplexMatrix {
        let (n, np) = (self.system_dim, self.probe_dim);
        let (dim_a, dim_b) = match self.party {
            Party::Alice => (n, other_dim),
            Party::Bob => (other_dim, n),
        };
        let dim = dim_a * dim_b * np;
        ComplexMatrix::from_fn(dim, dim, |row, col| {
            let (a, b, p) = (row / (dim_b * np), (row / np) % dim_b, row % np);
            let (a2, b2, p2) = (col / (dim_b * np), (col / np) % dim_b, col % np);
            match self.party {
                Party::Alice if b == b2 => self.unitary[(a * np + p, a2 * np + p2)],
                Party::Bob if a == a2 => self.unitary[(b * np + p, b2 * np + p2)],
                _ => C64::new(0.0, 0.0),
            }
        })
    }
}

/// `|ψ⟩ ⊗ |P₀⟩` in the `A ⊗ B ⊗ P` ordering.
pub fn attach_probe(s: &PureBipartiteState, probe_dim: usize) -> DVector<C64> {
    let v = s.to_vector();
    DVector::from_fn(v.len() * probe_dim, |i, _| if i % probe_dim == 0 { v[i / probe_dim] } else { C64::new(0.0, 0.0) })
}

/// A local unitary on one party, lifted to `A ⊗ B ⊗ P`.
pub fn lift_local_unitary(
    party: Party,
    u: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    probe_dim: usize,
) -> ComplexMatrix {
    let id_probe = numerics::identity(probe_dim);
    match party {
        Party::Alice => numerics::kron(&numerics::kron(u, &numerics::identity(dim_b)), &id_probe),
        Party::Bob => numerics::kron(&numerics::kron(&numerics::identity(dim_a), u), &id_probe),
    }
}

/// Result of measuring the probe once.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: usize,
    pub state: PureBipartiteState,
}

pub fn simulate_measurement(d: &ProbeDilation, s: &PureBipartiteState, seed: u64) -> Result<Measurement> {
    simulate_measurement_with(d, s, &mut rng::stream_rng(seed, "probe-measurement", 0))
}

pub fn simulate_measurement_with<R: Rng + ?Sized>(
    d: &ProbeDilation,
    s: &PureBipartiteState,
    rng: &mut R,
) -> Result<Measurement> {
    let branches = d.branches(s)?;
    let weights: Vec<f64> = branches.iter().map(|b| b.norm_squared()).collect();
    let outcome = sample_index(&weights, rng);
    let branch = branches.into_iter().nth(outcome).expect("outcome in range");
    Ok(Measurement { outcome, state: PureBipartiteState::normalized(branch)? })
}

/// Fraction of `trials` probe measurements that report the success outcome.
/// Trial `t` draws from its own stream, so the result does not depend on `exec`.
pub fn success_frequency(
    d: &ProbeDilation,
    s: &PureBipartiteState,
    trials: usize,
    seed: u64,
    exec: crate::parallel::Execution,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let weights = d.branch_weights(s)?;
    let hits = crate::parallel::map_reduce(
        exec,
        trials,
        |t| {
            usize::from(
                sample_index(&weights, &mut rng::stream_rng(seed, "probe-frequency", t as u64)) == d.success_outcome(),
            )
        },
        || 0,
        |a, b| a + b,
    );
    Ok(hits as f64 / trials as f64)
}

/// Index drawn with probability proportional to `weights`; zero-weight
/// entries are never chosen.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut target = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = i;
        if target < w {
            return i;
        }
        target -= w;
    }
    last
}

/// Bob's operation rewritten as an Alice operation plus a Bob unitary:
/// `(I ⊗ B)|ψ⟩ = scale · (alice ⊗ bob_fix)|ψ⟩`.
#[derive(Debug, Clone)]
pub struct SideTransfer {
    pub alice: LocalOperation,
    pub bob_fix: ComplexMatrix,
    /// Factor pulled out of the Alice operator to keep it a contraction; 1 when no rescaling was needed.
    pub scale: f64,
}

/// Moves a Bob-side Kraus operator to Alice's side of a full-rank state.
///
/// Two candidates are built: `C·Bᵀ·C⁻¹` with no Bob correction (for a
/// maximally entangled state and unitary `B` this is `Bᵀ`), and the polar form
/// `|X†|·(CC†)^{-1/2}` with `X = C·Bᵀ` and a Bob unitary correction. The one
/// with the smaller operator norm is kept.
pub fn transfer_to_alice_side(s: &PureBipartiteState, b: &LocalOperation) -> Result<SideTransfer> {
    if b.party != Party::Bob {
        return Err(Error::invalid("transfer_to_alice_side takes a Bob operation"));
    }
    if !s.is_square() {
        return Err(Error::invalid("side transfer needs equal local dimensions"));
    }
    b.check_against(s)?;
    let n = s.dim_a();
    let c = s.coeff();
    let dc = numerics::svd(c)?;
    let smallest = dc.singular_values[n - 1].powi(2);
    if smallest <= crate::states::SCHMIDT_RANK_THRESHOLD {
        let rank = dc.singular_values.iter().filter(|sv| sv.powi(2) > crate::states::SCHMIDT_RANK_THRESHOLD).count();
        return Err(Error::RankDeficient { rank, dim: n });
    }
    let x = c * b.kraus().transpose();
    let inv_sv: Vec<f64> = dc.singular_values.iter().map(|sv| 1.0 / sv).collect();
    let c_inv = &dc.v * numerics::diag_real(&inv_sv) * dc.u.adjoint();

    let direct = (&x * &c_inv, numerics::identity(n));

    let dx = numerics::svd(&x)?;
    let abs_x = &dx.u * numerics::diag_real(&dx.singular_values) * dx.u.adjoint();
    let inv_sqrt_rho = &dc.u * numerics::diag_real(&inv_sv) * dc.u.adjoint();
    let polar_c = &dc.u * dc.v.adjoint();
    let polar_x = &dx.u * dx.v.adjoint();
    let polar = (abs_x * inv_sqrt_rho, (polar_c.adjoint() * polar_x).transpose());

    let norm_direct = numerics::operator_norm(&direct.0)?;
    let norm_polar = numerics::operator_norm(&polar.0)?;
    let ((a, fix), norm) =
        if norm_polar < norm_direct * (1.0 - 1e-12) { (polar, norm_polar) } else { (direct, norm_direct) };
    let scale = norm.max(1.0);
    let alice = LocalOperation::new(Party::Alice, a.unscale(scale))?;

    let rebuilt = (alice.kraus() * c * fix.transpose()) * C64::new(scale, 0.0);
    let residual = (&rebuilt - &x).norm();
    if residual > DEFAULT_TOL {
        return Err(Error::NumericalFailure(format!("side transfer residual {residual:e}")));
    }
    Ok(SideTransfer { alice, bob_fix: fix, scale })
}
