//! Dense complex linear algebra used by every other module.
//!
//! Matrices are `nalgebra` dynamic matrices of `Complex64`. The factorizations
//! wrap nalgebra's implementations with the conventions the rest of the crate
//! relies on: spectra sorted in descending order (stable in the original
//! index on ties), nonnegative real singular values with all phases absorbed
//! into the left factor, and an explicit iteration cap that turns
//! non-convergence into an error.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

pub use num_complex::Complex64 as C64;

pub type ComplexMatrix = DMatrix<C64>;

/// Default tolerance for equality tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance for factorization residuals and isometry checks.
pub const FACTORIZATION_TOL: f64 = 1e-10;

const SWEEPS_PER_DIM: usize = 100;

fn iteration_cap(n: usize) -> usize {
    SWEEPS_PER_DIM * n.max(1)
}

/// Rejects matrices with NaN or infinite entries.
pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("matrix has non-finite entries"))
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) })
}

/// Indices that sort `values` descending; ties keep their original order.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

fn permute_columns(m: &ComplexMatrix, order: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), order.len(), |i, j| m[(i, order[j])])
}

/// Thin singular value decomposition `M = U · diag(S) · V†`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.u * diag_real(&self.singular_values) * self.v.adjoint()
    }
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    if m.is_empty() {
        return Err(Error::invalid("svd of an empty matrix"));
    }
    ensure_finite(m)?;
    let cap = iteration_cap(m.nrows().max(m.ncols()));
    let dec = m
        .clone()
        .try_svd(true, true, f64::EPSILON, cap)
        .ok_or_else(|| Error::NumericalFailure(format!("svd did not converge within {cap} iterations")))?;
    let (u, v_t) = match (dec.u, dec.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::NumericalFailure("svd factors missing".into())),
    };
    let raw: Vec<f64> = dec.singular_values.iter().copied().collect();
    let order = descending_order(&raw);
    Ok(Svd {
        u: permute_columns(&u, &order),
        singular_values: order.iter().map(|&i| raw[i]).collect(),
        v: permute_columns(&v_t.adjoint(), &order),
    })
}

/// Hermitian eigendecomposition `H = Q · diag(e) · Q†` with `e` descending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.vectors * diag_real(&self.values) * self.vectors.adjoint()
    }
}

/// Distance of `h` from hermiticity, relative to its size.
pub fn hermiticity_defect(h: &ComplexMatrix) -> f64 {
    (h - h.adjoint()).norm() / h.norm().max(1.0)
}

pub fn eigh(h: &ComplexMatrix, tol: f64) -> Result<Eigh> {
    if !h.is_square() || h.is_empty() {
        return Err(Error::invalid(format!("eigh needs a nonempty square matrix, got {}x{}", h.nrows(), h.ncols())));
    }
    ensure_finite(h)?;
    let defect = hermiticity_defect(h);
    if defect > tol {
        return Err(Error::invalid(format!("matrix is not Hermitian (defect {defect:e} > {tol:e})")));
    }
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let cap = iteration_cap(h.nrows());
    let dec = SymmetricEigen::try_new(sym, f64::EPSILON, cap)
        .ok_or_else(|| Error::NumericalFailure(format!("eigh did not converge within {cap} iterations")))?;
    let raw: Vec<f64> = dec.eigenvalues.iter().copied().collect();
    let order = descending_order(&raw);
    Ok(Eigh { values: order.iter().map(|&i| raw[i]).collect(), vectors: permute_columns(&dec.eigenvectors, &order) })
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(h: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let e = eigh(h, DEFAULT_TOL)?;
    let mapped: Vec<f64> = e.values.iter().map(|&x| f(x)).collect();
    Ok(&e.vectors * diag_real(&mapped) * e.vectors.adjoint())
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `‖M†M − I‖_F` for a matrix with orthonormal columns this is zero.
pub fn isometry_defect(m: &ComplexMatrix) -> f64 {
    (m.adjoint() * m - identity(m.ncols())).norm()
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && isometry_defect(m) <= tol
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(svd(m)?.singular_values[0])
}

/// Extends an `n×k` isometry to an `n×n` unitary whose first `k` columns are `v`.
///
/// The new columns come from Gram-Schmidt on the standard basis, each round
/// taking the candidate with the largest residual.
pub fn complete_isometry(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, k) = v.shape();
    if k > n || n == 0 {
        return Err(Error::invalid(format!("cannot complete a {n}x{k} matrix to a unitary")));
    }
    ensure_finite(v)?;
    let defect = isometry_defect(v);
    if defect > FACTORIZATION_TOL {
        return Err(Error::invalid(format!("columns are not orthonormal (defect {defect:e})")));
    }
    let mut basis: Vec<nalgebra::DVector<C64>> = (0..k).map(|j| v.column(j).into_owned()).collect();
    while basis.len() < n {
        let mut best: Option<(f64, nalgebra::DVector<C64>)> = None;
        for j in 0..n {
            let mut r = nalgebra::DVector::<C64>::zeros(n);
            r[j] = C64::new(1.0, 0.0);
            // two passes of projection keep the result orthogonal to working precision
            for _ in 0..2 {
                for q in &basis {
                    let overlap = q.dotc(&r);
                    r -= q * overlap;
                }
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.expect("n > 0");
        if norm < 1e-8 {
            return Err(Error::NumericalFailure("orthonormal completion lost rank".into()));
        }
        basis.push(r.unscale(norm));
    }
    Ok(ComplexMatrix::from_columns(&basis))
}

/// Haar-distributed unitary drawn from `rng`: complex Gaussian matrix, QR,
/// then the phases of R's diagonal moved into Q.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = rng::complex_gaussian(n, n, rng);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn random_haar_unitary(n: usize, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::invalid("unitary dimension must be at least 1"));
    }
    Ok(haar_unitary(n, &mut rng::stream_rng(seed, "haar-unitary", 0)))
}
