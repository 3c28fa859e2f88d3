//! Probabilistic superdense coding over a partially entangled qubit pair.
//!
//! Bob encodes two bits with one of `{I, σx, iσy, σz}` and sends his qubit to
//! Alice. Alice runs the optimal concentration filter of the unencoded state
//! on her original qubit; the filter commutes with Bob's encoding, so on
//! success she holds one of four orthogonal Bell states of the filtered frame
//! and decodes without error. The success rate is `2λ₂`.

use rand::Rng;
use serde::Serialize;

use crate::concentrate;
use crate::error::{Error, Result};
use crate::lqcc::{self, ProbeDilation, DEFAULT_PROBE_DIM};
use crate::numerics::{ComplexMatrix, C64};
use crate::parallel::{self, Execution};
use crate::rng;
use crate::states::{self, PureBipartiteState};

/// Message-to-operator map: 0 → I, 1 → σx, 2 → iσy, 3 → σz.
pub fn encoding_operator(msg: u8) -> Result<ComplexMatrix> {
    let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let entries = match msg {
        0 => [l, o, o, l],
        1 => [o, l, l, o],
        2 => [o, l, -l, o],
        3 => [l, o, o, -l],
        _ => return Err(Error::invalid(format!("message {msg} is not in 0..=3"))),
    };
    Ok(ComplexMatrix::from_row_slice(2, 2, &entries))
}

fn require_qubit_pair(s: &PureBipartiteState) -> Result<()> {
    if s.coeff().shape() != (2, 2) {
        return Err(Error::invalid("superdense coding needs a two-qubit state"));
    }
    Ok(())
}

/// `(I ⊗ σ_msg)|ψ⟩`.
pub fn encode(s: &PureBipartiteState, msg: u8) -> Result<PureBipartiteState> {
    require_qubit_pair(s)?;
    let op = encoding_operator(msg)?;
    PureBipartiteState::new(s.coeff() * op.transpose())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success { decoded: u8 },
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub status: Status,
    pub filter_fired: bool,
}

/// Alice's decoder for a fixed shared state: the filter's probe dilation plus
/// the four Bell states of the filtered frame.
#[derive(Debug, Clone)]
pub struct Decoder {
    dilation: ProbeDilation,
    bell_basis: Vec<ComplexMatrix>,
}

impl Decoder {
    pub fn new(s: &PureBipartiteState) -> Result<Self> {
        require_qubit_pair(s)?;
        let filter = concentrate::build_filter(s)?;
        let filtered = lqcc::apply_local(s, &filter)?.state;
        let bell_basis = (0..4).map(|m| encode(&filtered, m).map(|b| b.into_coeff())).collect::<Result<_>>()?;
        Ok(Decoder { dilation: lqcc::dilate(&filter, DEFAULT_PROBE_DIM)?, bell_basis })
    }

    /// Filters the received pair and, on success, measures in the Bell basis.
    pub fn decode<R: Rng + ?Sized>(&self, received: &PureBipartiteState, rng: &mut R) -> Result<TrialOutcome> {
        let m = lqcc::simulate_measurement_with(&self.dilation, received, rng)?;
        if m.outcome != self.dilation.success_outcome() {
            return Ok(TrialOutcome { status: Status::Inconclusive, filter_fired: false });
        }
        let weights: Vec<f64> = self.bell_basis.iter().map(|b| b.dotc(m.state.coeff()).norm_sqr()).collect();
        let decoded = lqcc::sample_index(&weights, rng) as u8;
        Ok(TrialOutcome { status: Status::Success { decoded }, filter_fired: true })
    }
}

/// One encode/send/decode round, deterministic in `seed`.
pub fn decode_run(s: &PureBipartiteState, msg: u8, seed: u64) -> Result<TrialOutcome> {
    let decoder = Decoder::new(s)?;
    decoder.decode(&encode(s, msg)?, &mut rng::stream_rng(seed, "superdense-run", 0))
}

/// `2λ₂`, the success rate of concentrate-then-decode. This equals the
/// optimal unambiguous discrimination probability `1 − (λ₁ − λ₂)` of the four
/// encoded states.
pub fn success_probability(s: &PureBipartiteState) -> Result<f64> {
    require_qubit_pair(s)?;
    let form = states::schmidt_decompose(s)?;
    Ok(2.0 * form.coeffs[1])
}

/// `√(1−λ₂)|00⟩ + √λ₂|11⟩` for `0 < λ₂ ≤ 1/2`.
pub fn state_with_lambda2(lambda2: f64) -> Result<PureBipartiteState> {
    if !(lambda2 > 0.0 && lambda2 <= 0.5) {
        return Err(Error::invalid(format!("λ₂ = {lambda2} outside (0, 0.5]")));
    }
    PureBipartiteState::from_schmidt_coefficients(&[1.0 - lambda2, lambda2])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BatchResult {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub errors_given_success: usize,
}

pub fn run_batch(s: &PureBipartiteState, trials: usize, seed: u64) -> Result<BatchResult> {
    run_batch_with(s, trials, seed, Execution::default())
}

/// `trials` rounds with uniformly random messages; trial `t` uses its own stream.
pub fn run_batch_with(s: &PureBipartiteState, trials: usize, seed: u64, exec: Execution) -> Result<BatchResult> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let decoder = Decoder::new(s)?;
    let encoded: Vec<PureBipartiteState> = (0..4).map(|m| encode(s, m)).collect::<Result<_>>()?;
    let tally = parallel::map_reduce(
        exec,
        trials,
        |t| {
            let mut r = rng::stream_rng(seed, "superdense-batch", t as u64);
            let msg: u8 = r.random_range(0..4);
            decoder.decode(&encoded[msg as usize], &mut r).map(|o| match o.status {
                Status::Success { decoded } => (1usize, usize::from(decoded != msg)),
                Status::Inconclusive => (0, 0),
            })
        },
        || Ok((0, 0)),
        |a, b| {
            let (x, y) = (a?, b?);
            Ok::<_, Error>((x.0 + y.0, x.1 + y.1))
        },
    )?;
    Ok(BatchResult {
        trials,
        successes: tally.0,
        success_rate: tally.0 as f64 / trials as f64,
        errors_given_success: tally.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{max_entangled, Party};
    use approx::assert_abs_diff_eq;

    #[test]
    fn encoding_examples() {
        let s = states::random_pure_state(2, 2, 1).unwrap();
        assert_eq!(encode(&s, 0).unwrap(), s);
        assert!(encode(&s, 4).is_err());

        let phi = max_entangled(2).unwrap();
        let x = encode(&phi, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = ComplexMatrix::from_row_slice(2, 2, &[0.0, h, h, 0.0].map(|v| C64::new(v, 0.0)));
        assert!((x.coeff() - expected).norm() < 1e-15);

        let bells: Vec<_> = (0..4).map(|m| encode(&phi, m).unwrap()).collect();
        for i in 0..4 {
            for j in 0..4 {
                let f = bells[i].fidelity(&bells[j]);
                assert_abs_diff_eq!(f, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn operators_are_trace_orthogonal_unitaries() {
        let ops: Vec<_> = (0..4).map(|m| encoding_operator(m).unwrap()).collect();
        for (i, a) in ops.iter().enumerate() {
            assert!(crate::numerics::is_unitary(a, 1e-15));
            for (j, b) in ops.iter().enumerate() {
                let ip = (a.adjoint() * b).trace().norm();
                assert_abs_diff_eq!(ip, if i == j { 2.0 } else { 0.0 }, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn encode_keeps_alice_marginal() {
        let s = states::random_pure_state(2, 2, 6).unwrap();
        let rho = states::marginal(&s, Party::Alice);
        for m in 0..4 {
            let e = states::marginal(&encode(&s, m).unwrap(), Party::Alice);
            assert!((e.matrix() - rho.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn maximally_entangled_always_decodes() {
        let phi = max_entangled(2).unwrap();
        for msg in 0..4 {
            for seed in 0..25 {
                let o = decode_run(&phi, msg, seed).unwrap();
                assert_eq!(o.status, Status::Success { decoded: msg });
            }
        }
    }

    #[test]
    fn success_probability_examples() {
        assert_abs_diff_eq!(success_probability(&max_entangled(2).unwrap()).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(success_probability(&state_with_lambda2(0.25).unwrap()).unwrap(), 0.5, epsilon = 1e-14);
        let product = PureBipartiteState::from_schmidt_coefficients(&[1.0, 0.0]).unwrap();
        assert_eq!(success_probability(&product).unwrap(), 0.0);
        assert!(matches!(decode_run(&product, 0, 0), Err(Error::ZeroCoefficient { .. })));
        assert!(state_with_lambda2(0.6).is_err());
    }

    #[test]
    fn batch_modes_agree() {
        let s = state_with_lambda2(0.2).unwrap();
        let a = run_batch_with(&s, 2000, 5, Execution::Sequential).unwrap();
        let b = run_batch_with(&s, 2000, 5, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.errors_given_success, 0);
    }
}
