//! Eavesdropper strategies, basis-independent channel models, and the
//! optimal-measurement bounds for distinguishing two quantum states.
//!
//! The channel deliberately has no basis input: loss and depolarization act
//! on the state alone, so detector efficiency cannot leak basis information
//! by construction.
//!
//! Strategies act per position with finite POVMs. Collective measurements
//! entangling many positions (or unbounded auxiliary systems) are not
//! simulated; the multi-copy ceiling [`helstrom_bound`] is checked against
//! per-position product strategies only.

use crate::quantum::{
    abs_eigenvalue_sum, hermitian_eigen, sample_povm, ComplexMatrix, DensityMatrix,
    MeasurementOperator, Povm, QuantumError,
};
use crate::source::{ideal_bb84_source, QuasiPerfectCertificate, SourceError};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::FRAC_PI_4;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("certificate violates unit trace: Tr(P H) = {0}")]
    UnnormalizableWitness(f64),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Source(#[from] SourceError),
}

/// Lossy, depolarizing channel. Loss swallows the photon with probability
/// `loss_probability`; otherwise the state is replaced by the maximally mixed
/// state with probability `flip_probability`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChannelModel {
    pub loss_probability: f64,
    pub flip_probability: f64,
}

impl ChannelModel {
    pub fn new(loss_probability: f64, flip_probability: f64) -> Result<Self, AdversaryError> {
        for p in [loss_probability, flip_probability] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AdversaryError::BadProbability(p));
            }
        }
        Ok(Self { loss_probability, flip_probability })
    }

    pub fn noiseless() -> Self {
        Self { loss_probability: 0.0, flip_probability: 0.0 }
    }
}

/// Result of pushing one state through the channel.
#[derive(Debug, Clone)]
pub enum ChannelOutput {
    Lost,
    /// The state passed untouched; the caller keeps using its reference.
    Passed,
    /// The state was replaced (depolarized).
    Replaced(DensityMatrix),
}

/// Applies loss and depolarization. Never consults any basis information:
/// the signature has nowhere to put it.
pub fn apply_channel<R: Rng>(ch: &ChannelModel, state: &DensityMatrix, rng: &mut R) -> ChannelOutput {
    if ch.loss_probability > 0.0 && rng.random::<f64>() < ch.loss_probability {
        return ChannelOutput::Lost;
    }
    if ch.flip_probability > 0.0 && rng.random::<f64>() < ch.flip_probability {
        return ChannelOutput::Replaced(DensityMatrix::maximally_mixed(state.dim()));
    }
    ChannelOutput::Passed
}

/// Which basis an intercept-resend eavesdropper measures in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasisPolicy {
    Random,
    Fixed(u8),
}

/// What a custom attack does with the photon after measuring it.
#[derive(Debug, Clone)]
pub enum ResendRule {
    /// Forward the original state untouched.
    PassThrough,
    /// Resend a fixed state keyed by the measurement outcome.
    PerOutcome(Vec<DensityMatrix>),
    /// Conjugate the original state by a fixed unitary.
    Conjugate(ComplexMatrix),
}

/// Per-position eavesdropping behavior.
#[derive(Debug, Clone, Default)]
pub enum AttackStrategy {
    #[default]
    None,
    /// Measure in a basis, resend the ideal-source state for the observed
    /// (basis, outcome) pair.
    InterceptResend { basis_policy: BasisPolicy },
    /// A two-outcome measurement aimed at separating the witness-projector
    /// states, resending the guessed witness state.
    Distinguish { povm: Povm, resend: Vec<DensityMatrix> },
    /// Arbitrary per-position POVM plus resend rule.
    CustomPovm { povm: Povm, rule: ResendRule },
}

impl AttackStrategy {
    pub fn intercept_resend_random() -> Self {
        Self::InterceptResend { basis_policy: BasisPolicy::Random }
    }

    pub fn intercept_resend_fixed(basis: u8) -> Self {
        Self::InterceptResend { basis_policy: BasisPolicy::Fixed(basis & 1) }
    }

    /// The canonical distinguishing attack against a certified source: the
    /// optimal binary measurement between the two witness states
    /// `P_0^0 H` and `Ptilde_0^0 H`, resending the guessed one.
    pub fn distinguish_witness(cert: &QuasiPerfectCertificate) -> Result<Self, AdversaryError> {
        let h = &cert.averaged;
        let sigma = witness_state(cert.projector(0, 0), h)?;
        let sigma_tilde = witness_state(cert.tilde_projector(0, 0), h)?;
        let povm = optimal_binary_measurement(&sigma, &sigma_tilde)?;
        Ok(Self::Distinguish { povm, resend: vec![sigma, sigma_tilde] })
    }
}

/// One eavesdropped position: measurement outcome, guessed bit, and an
/// identifier for the state resent to the receiver.
#[derive(Debug, Clone, Serialize)]
pub struct EveNote {
    pub outcome: u8,
    pub guess: u8,
    pub resent: &'static str,
}

/// Everything the eavesdropper accumulated over a session; one note per
/// successfully exchanged signal.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EveRecord {
    pub notes: Vec<Option<EveNote>>,
}

impl EveRecord {
    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    /// Guessed key bits at the given positions (0 where the attack recorded
    /// nothing).
    pub fn guesses_at(&self, positions: &[usize]) -> Vec<u8> {
        positions
            .iter()
            .map(|&p| self.notes.get(p).and_then(|n| n.as_ref()).map_or(0, |n| n.guess))
            .collect()
    }
}

/// Upper bound `(1/2 + Delta/4)^m` on the probability that `m` independent
/// equiprobable guesses between `rho0` and `rho1` are all correct.
pub fn helstrom_bound(rho0: &DensityMatrix, rho1: &DensityMatrix, m: u32) -> Result<f64, QuantumError> {
    let delta = abs_eigenvalue_sum(rho0, rho1)?;
    Ok((0.5 + 0.25 * delta).powi(m as i32))
}

/// The measurement achieving the single-copy bound: project onto the
/// nonnegative eigenspace of `rho0 - rho1` (eigenvalue 0 counts as outcome 0).
pub fn optimal_binary_measurement(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
) -> Result<Povm, QuantumError> {
    if rho0.dim() != rho1.dim() {
        return Err(QuantumError::DimMismatch(rho0.dim(), rho1.dim()));
    }
    let diff = rho0.matrix().sub(rho1.matrix());
    let (eigs, vectors) = hermitian_eigen(&diff)?;
    let dim = rho0.dim();
    let mut f0 = ComplexMatrix::zeros(dim);
    for (k, &l) in eigs.iter().enumerate() {
        if l >= 0.0 {
            for i in 0..dim {
                for j in 0..dim {
                    let add = vectors.get(i, k) * vectors.get(j, k).conj();
                    f0.set(i, j, f0.get(i, j) + add);
                }
            }
        }
    }
    let f1 = ComplexMatrix::identity(dim).sub(&f0);
    Povm::new(
        vec!["0".into(), "1".into()],
        vec![MeasurementOperator::new(f0)?, MeasurementOperator::new(f1)?],
    )
}

/// Success probability of a binary POVM at distinguishing two equiprobable
/// states (outcome index = state index).
pub fn binary_success_probability(povm: &Povm, rho0: &DensityMatrix, rho1: &DensityMatrix) -> f64 {
    0.5 * (povm.operators()[0].probability(rho0) + povm.operators()[1].probability(rho1))
}

fn witness_state(p: &MeasurementOperator, h: &ComplexMatrix) -> Result<DensityMatrix, AdversaryError> {
    let raw = p.matrix().matmul(h);
    let trace = raw.trace().re;
    if trace.abs() < 1e-12 {
        return Err(AdversaryError::UnnormalizableWitness(trace));
    }
    // For a certified source P H = P H P, so this is already a state up to
    // the trace normalization.
    let m = raw.scale(Complex64::new(1.0 / trace, 0.0));
    let sym = m.add(&m.adjoint()).scale(Complex64::new(0.5, 0.0));
    Ok(DensityMatrix::new(sym)?)
}

/// Report produced by [`r_guess_success_rate`].
#[derive(Debug, Clone, Serialize)]
pub struct RGuessReport {
    /// The certified ceiling `1/2 + gamma_qp / 4`.
    pub p_suc: f64,
    /// Achievable rate per (basis, key) pair from the optimal measurement on
    /// the witness states.
    pub achievable: [[f64; 2]; 2],
}

/// Ceiling and per-pair achievable rates for guessing which witness family a
/// position was measured in.
pub fn r_guess_success_rate(cert: &QuasiPerfectCertificate) -> Result<RGuessReport, AdversaryError> {
    let h = &cert.averaged;
    let mut achievable = [[0.0f64; 2]; 2];
    for a in 0..2u8 {
        for g in 0..2u8 {
            let sigma = witness_state(cert.projector(a, g), h)?;
            let sigma_tilde = witness_state(cert.tilde_projector(a, g), h)?;
            let povm = optimal_binary_measurement(&sigma, &sigma_tilde)?;
            achievable[a as usize][g as usize] = binary_success_probability(&povm, &sigma, &sigma_tilde);
        }
    }
    Ok(RGuessReport { p_suc: 0.5 + 0.25 * cert.gamma_qp, achievable })
}

/// Outcome of one attacked position.
pub struct AttackOutcome {
    /// State to forward (None = forward the original unchanged).
    pub resent: Option<DensityMatrix>,
    pub note: Option<EveNote>,
}

/// Applies one strategy to one in-flight state.
pub fn apply_attack<R: Rng>(
    strategy: &AttackStrategy,
    state: &DensityMatrix,
    rng: &mut R,
) -> Result<AttackOutcome, AdversaryError> {
    match strategy {
        AttackStrategy::None => Ok(AttackOutcome { resent: None, note: None }),
        AttackStrategy::InterceptResend { basis_policy } => {
            let basis = match basis_policy {
                BasisPolicy::Fixed(b) => *b,
                BasisPolicy::Random => rng.random::<bool>() as u8,
            };
            let povm = Povm::qubit_basis(basis as f64 * FRAC_PI_4);
            let outcome = sample_povm(&povm, state, rng)? as u8;
            let (ideal, _) = ideal_bb84_source();
            let resend = ideal.emit_state(basis, outcome).clone();
            Ok(AttackOutcome {
                resent: Some(resend),
                note: Some(EveNote {
                    outcome,
                    guess: outcome,
                    resent: if basis == 0 { "ideal-basis0" } else { "ideal-basis1" },
                }),
            })
        }
        AttackStrategy::Distinguish { povm, resend } => {
            let outcome = sample_povm(povm, state, rng)? as u8;
            Ok(AttackOutcome {
                resent: Some(resend[outcome as usize].clone()),
                note: Some(EveNote { outcome, guess: outcome, resent: "witness-guess" }),
            })
        }
        AttackStrategy::CustomPovm { povm, rule } => {
            let outcome = sample_povm(povm, state, rng)? as u8;
            let resent = match rule {
                ResendRule::PassThrough => None,
                ResendRule::PerOutcome(states) => Some(states[outcome as usize].clone()),
                ResendRule::Conjugate(u) => {
                    let moved = state.matrix().conjugate_by(&u.adjoint());
                    Some(DensityMatrix::new(moved)?)
                }
            };
            Ok(AttackOutcome {
                resent,
                note: Some(EveNote { outcome, guess: outcome, resent: "custom" }),
            })
        }
    }
}
