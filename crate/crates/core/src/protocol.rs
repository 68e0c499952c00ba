//! The executable key-distribution session: pre-agreement validation, the
//! quantum transmission loop, and the classical negotiation steps C1-C9,
//! including the two analysis variants of the protocol.
//!
//! A session is fully deterministic given its seed: every participant draws
//! from its own counter-addressed stream of one seeded generator, so batches
//! can run on any number of threads and still reproduce bit-identical
//! transcripts.
//!
//! In the `Bb84M` variant the randomizing box flips the measurement basis on
//! the complement of the test set before transmission, and in `Bb84MM` the
//! receiver additionally commits the full result vector before the test set
//! is revealed while the sender over-announces her key bits outside the key
//! positions. Both exist for analysis, not key generation.

use crate::adversary::{
    apply_attack, apply_channel, AdversaryError, AttackStrategy, ChannelModel, ChannelOutput,
    EveRecord,
};
use crate::codes::{gf2_matvec, splitmix64, BitString, CodeError, LinearCode, PrivacyAmplifier};
use crate::quantum::{sample_povm, Povm, QuantumError};
use crate::source::{QuasiPerfectCertificate, SourceModel};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("parameters failed validation: {0}")]
    InvalidParams(String),
    #[error("protocol requires qubit sources, got dimension {0}")]
    UnsupportedDimension(usize),
    #[error("parameter shape error: {0}")]
    BadShape(String),
    #[error("step order violation: {0}")]
    StepOrder(&'static str),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Which protocol variant a session runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolMode {
    Bb84,
    Bb84M,
    Bb84MM,
}

impl std::fmt::Display for ProtocolMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Bb84 => "bb84",
            Self::Bb84M => "bb84m",
            Self::Bb84MM => "bb84mm",
        };
        f.write_str(s)
    }
}

/// Pre-agreed operating parameters for a session.
#[derive(Debug, Clone)]
pub struct ProtocolParams {
    /// Key length `m`.
    pub key_len: usize,
    /// Verification threshold fraction.
    pub delta_p: f64,
    /// Test/key block size `n`.
    pub block_size: usize,
    /// Oversampling constant; `N_total = ceil((4 + eps_n) n)` rounded to even.
    pub eps_n: f64,
    /// Security parameter.
    pub eps: f64,
    /// Split parameter balancing test leniency against key-side slack.
    pub lambda: f64,
    /// Error-correcting code whose parity check defines the syndrome map.
    pub code: LinearCode,
    /// Privacy-amplification matrix compressing the corrected block.
    pub privacy: PrivacyAmplifier,
    pub mode: ProtocolMode,
    /// Master seed; per-session streams derive from it.
    pub master_seed: u64,
}

impl ProtocolParams {
    /// Structural checks: shapes, positivity, row independence.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        key_len: usize,
        delta_p: f64,
        block_size: usize,
        eps_n: f64,
        eps: f64,
        lambda: f64,
        code: LinearCode,
        privacy: PrivacyAmplifier,
        mode: ProtocolMode,
        master_seed: u64,
    ) -> Result<Self, ProtocolError> {
        if key_len >= block_size {
            return Err(ProtocolError::BadShape(format!(
                "key length {key_len} must be below the block size {block_size}"
            )));
        }
        if code.length() != block_size {
            return Err(ProtocolError::BadShape(format!(
                "code length {} does not match block size {block_size}",
                code.length()
            )));
        }
        if privacy.rows() != key_len {
            return Err(ProtocolError::BadShape(format!(
                "privacy matrix has {} rows, key length is {key_len}",
                privacy.rows()
            )));
        }
        if privacy.rows() > 0 && privacy.matrix().cols() != block_size {
            return Err(ProtocolError::BadShape("privacy matrix width mismatch".into()));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(delta_p) || !positive(eps) || !positive(eps_n) {
            return Err(ProtocolError::BadShape(
                "delta_p, eps and eps_n must be positive".into(),
            ));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(ProtocolError::BadShape("lambda must lie in (0, 1)".into()));
        }
        if privacy.rows() > 0
            && !code.parity_check().stack(privacy.matrix()).has_independent_rows()
        {
            return Err(ProtocolError::BadShape(
                "stacked parity and privacy rows must be independent".into(),
            ));
        }
        Ok(Self {
            key_len,
            delta_p,
            block_size,
            eps_n,
            eps,
            lambda,
            code,
            privacy,
            mode,
            master_seed,
        })
    }

    /// Number of successfully exchanged signals, rounded up to even so the
    /// test set is exactly half.
    pub fn n_total(&self) -> usize {
        let raw = ((4.0 + self.eps_n) * self.block_size as f64).ceil() as usize;
        raw + raw % 2
    }

    /// Allowed error count on the test positions.
    pub fn test_threshold(&self) -> usize {
        (self.delta_p * self.block_size as f64).floor() as usize
    }

    /// Errors the code must correct.
    pub fn required_correction(&self) -> usize {
        ((self.delta_p + self.eps) * self.block_size as f64).ceil() as usize
    }

    /// Joint-weight floor for the privacy matrix, given the source tilt.
    pub fn required_joint_weight(&self, gamma_qp: f64) -> f64 {
        2.0 * (self.delta_p / (1.0 - self.lambda) + 0.5 * gamma_qp + self.eps)
            * self.block_size as f64
    }

    /// Smallest `lambda` satisfying the split condition for the given source,
    /// nudged up so the inequality holds exactly.
    pub fn minimal_lambda(delta_p: f64, eps: f64, beta_qp: f64) -> f64 {
        let x = (0.5 * eps + beta_qp) / delta_p;
        let lambda = x / (1.0 + x);
        (lambda * (1.0 + 1e-9) + 1e-12).min(0.999)
    }
}

/// One inequality from the pre-agreement validation.
#[derive(Debug, Clone, Serialize)]
pub struct ParamCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Outcome of [`validate_params`]: each condition with both sides.
#[derive(Debug, Clone, Serialize)]
pub struct ParamsReport {
    pub checks: Vec<ParamCheck>,
    pub pass: bool,
}

impl ParamsReport {
    pub fn summary(&self) -> String {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{}: {:.6} {} {:.6}",
                    c.label,
                    c.lhs,
                    if c.pass { ">=" } else { "<" },
                    c.rhs
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Checks the three operating conditions tying the parameters to the source:
/// the lambda split inequality, the joint-weight floor on the privacy matrix,
/// and the correction capability of the code.
pub fn validate_params(p: &ProtocolParams, cert: &QuasiPerfectCertificate) -> ParamsReport {
    let mut checks = Vec::new();
    let lhs = p.lambda / (1.0 - p.lambda) * p.delta_p;
    let rhs = 0.5 * p.eps + cert.beta_qp;
    checks.push(ParamCheck { label: "lambda-split".into(), lhs, rhs, pass: lhs >= rhs });

    let dw = if p.key_len == 0 { f64::INFINITY } else { p.privacy.d_w() as f64 };
    let need = p.required_joint_weight(cert.gamma_qp);
    checks.push(ParamCheck { label: "joint-weight".into(), lhs: dw, rhs: need, pass: dw >= need });

    let t = p.code.t_max() as f64;
    let need_t = p.required_correction() as f64;
    checks.push(ParamCheck { label: "correction".into(), lhs: t, rhs: need_t, pass: t >= need_t });

    let pass = checks.iter().all(|c| c.pass);
    ParamsReport { checks, pass }
}

/// One labeled entry of the public announcement log.
#[derive(Debug, Clone, Serialize)]
pub struct Announcement {
    pub step: String,
    pub payload: String,
}

/// Everything generated during one session, in announcement order.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub n_total: usize,
    /// Sender basis bits `a`.
    pub alice_bases: BitString,
    /// Box basis bits `b`.
    pub box_bases: BitString,
    /// Bases actually measured (`b` except on the flipped complement in the
    /// M/MM variants).
    pub measured_bases: BitString,
    /// Sender key bits `g`.
    pub alice_keys: BitString,
    /// Receiver results `h`.
    pub bob_results: BitString,
    /// Test-set membership mask `R`.
    pub test_mask: BitString,
    /// Basis-agreement mask (set where `a = b`).
    pub agreement_mask: BitString,
    /// Ranking permutation `pi`.
    pub permutation: Vec<u32>,
    /// Test positions (first `n` agreeing test-set positions in `pi` order).
    pub test_positions: Option<Vec<usize>>,
    /// Key positions (first `n` agreeing complement positions in `pi` order).
    pub key_positions: Option<Vec<usize>>,
    pub syndrome: Option<BitString>,
    pub announcements: Vec<Announcement>,
}

impl Transcript {
    pub fn announced_steps(&self) -> Vec<&str> {
        self.announcements.iter().map(|a| a.step.as_str()).collect()
    }

    /// Hex-packed JSON dump with the ordered announcement log.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n_total": self.n_total,
            "a": self.alice_bases.to_hex(),
            "b": self.box_bases.to_hex(),
            "b_tilde": self.measured_bases.to_hex(),
            "g": self.alice_keys.to_hex(),
            "h": self.bob_results.to_hex(),
            "r_mask": self.test_mask.to_hex(),
            "omega_mask": self.agreement_mask.to_hex(),
            "pi": self.permutation,
            "s_p": self.test_positions,
            "s_k": self.key_positions,
            "syndrome": self.syndrome.as_ref().map(BitString::to_hex),
            "announcements": self.announcements.iter()
                .map(|a| serde_json::json!({"step": a.step, "payload": a.payload}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Why a session stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    /// Too few agreeing positions on one side of the test split (step C5).
    AgreementCheck,
    /// Too many errors on the revealed test positions (step C7).
    Verification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionStatus {
    Completed,
    Aborted(AbortReason),
}

impl SessionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::Aborted(AbortReason::AgreementCheck) => "aborted-agreement",
            Self::Aborted(AbortReason::Verification) => "aborted-verification",
        }
    }
}

/// Result of one session: keys, error counts, and the full transcript.
#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub status: SessionStatus,
    /// Sender key; uniform random when the session aborted.
    pub kappa: BitString,
    /// Receiver key; absent when negotiation halted before step C9.
    pub kappa_b: Option<BitString>,
    /// Errors on the revealed test positions (absent if C5 failed).
    pub d_sp: Option<usize>,
    /// Errors on the key positions before correction (completed sessions).
    pub d_sk: Option<usize>,
    pub exchanged_count: usize,
    pub lost_count: usize,
    pub eve: EveRecord,
    pub transcript: Transcript,
}

impl SessionOutcome {
    pub fn key_equal(&self) -> Option<bool> {
        self.kappa_b.as_ref().map(|kb| *kb == self.kappa)
    }

    /// CSV row `seed,status,d_sp,d_sk,key_equal` with empty cells for
    /// undefined values.
    pub fn csv_row(&self, seed: u64) -> String {
        let opt = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
        let keq = self.key_equal().map_or(String::new(), |b| b.to_string());
        format!(
            "{seed},{},{},{},{keq}",
            self.status.as_str(),
            opt(self.d_sp),
            opt(self.d_sk)
        )
    }
}

pub const CSV_HEADER: &str = "seed,status,d_sp,d_sk,key_equal";

/// Deterministic per-session seed derived from the master seed.
pub fn session_seed(master_seed: u64, session_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(session_index.wrapping_add(0x5EED)))
}

// Stream ids for the independent randomness roles of one session.
const STREAM_ALICE: u64 = 0;
const STREAM_BOX: u64 = 1;
const STREAM_EVE: u64 = 2;
const STREAM_CHANNEL: u64 = 3;
const STREAM_DETECTOR: u64 = 4;
const STREAM_ABORT: u64 = 5;

fn role_rng(seed: u64, role: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(role);
    rng
}

/// Checks that both sides of the test split contain at least `n` agreeing
/// positions (step C5).
pub fn agreement_check(t: &Transcript, p: &ProtocolParams) -> bool {
    let mut in_test = 0usize;
    let mut in_complement = 0usize;
    for i in 0..t.n_total {
        if t.agreement_mask.get(i) {
            if t.test_mask.get(i) {
                in_test += 1;
            } else {
                in_complement += 1;
            }
        }
    }
    in_test >= p.block_size && in_complement >= p.block_size
}

/// Compares the revealed test bits against the threshold (step C7).
/// Errors if the test positions were never defined (C5 did not pass).
pub fn verification_test(t: &Transcript, p: &ProtocolParams) -> Result<(bool, usize), ProtocolError> {
    let positions = t
        .test_positions
        .as_ref()
        .ok_or(ProtocolError::StepOrder("verification before agreement check"))?;
    let g = t.alice_keys.select(positions);
    let h = t.bob_results.select(positions);
    let d_sp = g.distance(&h);
    Ok((d_sp <= p.test_threshold(), d_sp))
}

/// Runs one session after checking the operating conditions against the
/// source certificate. Refuses to run on invalid parameters.
pub fn run_session(
    params: &ProtocolParams,
    src: &SourceModel,
    cert: &QuasiPerfectCertificate,
    channel: &ChannelModel,
    attack: &AttackStrategy,
    session_index: u64,
) -> Result<SessionOutcome, ProtocolError> {
    let report = validate_params(params, cert);
    if !report.pass {
        return Err(ProtocolError::InvalidParams(report.summary()));
    }
    run_session_unchecked(params, src, channel, attack, session_index)
}

/// Runs one session without revalidating the operating conditions. Exists
/// for experiments that deliberately explore non-conforming parameter points;
/// everything structural is still enforced.
pub fn run_session_unchecked(
    params: &ProtocolParams,
    src: &SourceModel,
    channel: &ChannelModel,
    attack: &AttackStrategy,
    session_index: u64,
) -> Result<SessionOutcome, ProtocolError> {
    if src.dim() != 2 {
        return Err(ProtocolError::UnsupportedDimension(src.dim()));
    }
    let seed = session_seed(params.master_seed, session_index);
    let n_total = params.n_total();
    let n = params.block_size;

    let mut alice_rng = role_rng(seed, STREAM_ALICE);
    let mut box_rng = role_rng(seed, STREAM_BOX);
    let mut eve_rng = role_rng(seed, STREAM_EVE);
    let mut channel_rng = role_rng(seed, STREAM_CHANNEL);
    let mut detector_rng = role_rng(seed, STREAM_DETECTOR);

    // The box fixes its basis string, the test split, and the ranking
    // permutation up front, in a fixed draw order. Honest parties never see
    // them before the announcement step that reveals them.
    let box_bases = BitString::random(n_total, &mut box_rng);
    let test_mask = {
        let mut order: Vec<usize> = (0..n_total).collect();
        for i in 0..n_total - 1 {
            let j = i + (box_rng.random::<u64>() as usize) % (n_total - i);
            order.swap(i, j);
        }
        let mut mask = BitString::zeros(n_total);
        for &pos in order.iter().take(n_total / 2) {
            mask.set(pos, true);
        }
        mask
    };
    let permutation: Vec<u32> = {
        let mut order: Vec<u32> = (0..n_total as u32).collect();
        for i in 0..n_total - 1 {
            let j = i + (box_rng.random::<u64>() as usize) % (n_total - i);
            order.swap(i, j);
        }
        order
    };

    // Measured basis per position: the box flips the complement in the M/MM
    // variants before announcing the bit to the receiver.
    let mut measured_bases = box_bases.clone();
    if params.mode != ProtocolMode::Bb84 {
        for i in 0..n_total {
            if !test_mask.get(i) {
                measured_bases.flip(i);
            }
        }
    }

    let basis_povms = [Povm::qubit_basis(0.0), Povm::qubit_basis(FRAC_PI_4)];

    // Quantum transmission: repeat until n_total signals got through. A lost
    // signal keeps its position (the receiver retains the basis bit), so the
    // number of basis bits drawn equals the number of exchanged signals.
    let mut alice_bases = BitString::zeros(n_total);
    let mut alice_keys = BitString::zeros(n_total);
    let mut bob_results = BitString::zeros(n_total);
    let mut eve = EveRecord::default();
    let mut exchanged = 0usize;
    let mut lost = 0usize;
    while exchanged < n_total {
        let a = alice_rng.random::<bool>();
        let g = alice_rng.random::<bool>();
        let state = src.emit_state(a as u8, g as u8);
        let attack_outcome = apply_attack(attack, state, &mut eve_rng)?;
        let in_flight = attack_outcome.resent.as_ref().unwrap_or(state);
        let replaced;
        let received = match apply_channel(channel, in_flight, &mut channel_rng) {
            ChannelOutput::Lost => {
                lost += 1;
                continue;
            }
            ChannelOutput::Passed => in_flight,
            ChannelOutput::Replaced(s) => {
                replaced = s;
                &replaced
            }
        };
        let basis = measured_bases.get(exchanged) as usize;
        let outcome = sample_povm(&basis_povms[basis], received, &mut detector_rng)?;
        alice_bases.set(exchanged, a);
        alice_keys.set(exchanged, g);
        bob_results.set(exchanged, outcome == 1);
        eve.notes.push(attack_outcome.note);
        exchanged += 1;
    }
    debug_assert_eq!(eve.len(), exchanged);

    let mut agreement_mask = BitString::zeros(n_total);
    for i in 0..n_total {
        if alice_bases.get(i) == box_bases.get(i) {
            agreement_mask.set(i, true);
        }
    }

    let mut transcript = Transcript {
        n_total,
        alice_bases,
        box_bases,
        measured_bases,
        alice_keys,
        bob_results,
        test_mask,
        agreement_mask,
        permutation,
        test_positions: None,
        key_positions: None,
        syndrome: None,
        announcements: Vec::new(),
    };

    // Classical negotiation. Announcements are appended strictly in step
    // order; negotiation halts at the first failed check.
    if params.mode == ProtocolMode::Bb84MM {
        // The receiver commits the complete result vector before the test
        // set is revealed.
        transcript.announcements.push(Announcement {
            step: "MM:h".into(),
            payload: transcript.bob_results.to_hex(),
        });
    }
    transcript.announcements.push(Announcement {
        step: "C1".into(),
        payload: format!("b={};R={}", transcript.box_bases.to_hex(), transcript.test_mask.to_hex()),
    });
    let h_on_test = {
        let positions: Vec<usize> =
            (0..n_total).filter(|&i| transcript.test_mask.get(i)).collect();
        transcript.bob_results.select(&positions)
    };
    transcript.announcements.push(Announcement {
        step: "C2".into(),
        payload: format!("h[R]={}", h_on_test.to_hex()),
    });
    transcript.announcements.push(Announcement {
        step: "C3".into(),
        payload: format!("pi#{:016x}", fnv1a(&transcript.permutation)),
    });
    transcript.announcements.push(Announcement {
        step: "C4".into(),
        payload: format!("a={}", transcript.alice_bases.to_hex()),
    });

    let abort = |reason: AbortReason, transcript: Transcript, eve: EveRecord, d_sp: Option<usize>| {
        let mut abort_rng = role_rng(seed, STREAM_ABORT);
        let kappa = BitString::random(params.key_len, &mut abort_rng);
        SessionOutcome {
            status: SessionStatus::Aborted(reason),
            kappa,
            kappa_b: None,
            d_sp,
            d_sk: None,
            exchanged_count: exchanged,
            lost_count: lost,
            eve,
            transcript,
        }
    };

    let agreement_ok = agreement_check(&transcript, params);
    transcript.announcements.push(Announcement {
        step: "C5".into(),
        payload: if agreement_ok { "pass".into() } else { "fail".into() },
    });
    if !agreement_ok {
        return Ok(abort(AbortReason::AgreementCheck, transcript, eve, None));
    }

    // Ranked selection: the first n agreeing positions on each side of the
    // split, ordered by the permutation.
    let ranked = |want_test: bool, t: &Transcript| -> Vec<usize> {
        let mut positions: Vec<usize> = (0..n_total)
            .filter(|&i| t.agreement_mask.get(i) && t.test_mask.get(i) == want_test)
            .collect();
        positions.sort_by_key(|&i| t.permutation[i]);
        positions.truncate(n);
        positions
    };
    let test_positions = ranked(true, &transcript);
    let key_positions = ranked(false, &transcript);
    assert_eq!(test_positions.len(), n);
    assert_eq!(key_positions.len(), n);
    // Disjointness is structural: the two selections live on opposite sides
    // of the test mask.
    transcript.test_positions = Some(test_positions.clone());
    transcript.key_positions = Some(key_positions.clone());

    let c6_payload = if params.mode == ProtocolMode::Bb84MM {
        // Over-announcement: every key bit outside the key positions.
        let mut in_key = vec![false; n_total];
        for &p in &key_positions {
            in_key[p] = true;
        }
        let outside: Vec<usize> = (0..n_total).filter(|&i| !in_key[i]).collect();
        format!("g[!S_K]={}", transcript.alice_keys.select(&outside).to_hex())
    } else {
        format!("g[S_P]={}", transcript.alice_keys.select(&test_positions).to_hex())
    };
    transcript.announcements.push(Announcement { step: "C6".into(), payload: c6_payload });

    let (verify_ok, d_sp) = verification_test(&transcript, params)?;
    transcript.announcements.push(Announcement {
        step: "C7".into(),
        payload: format!("d_sp={};{}", d_sp, if verify_ok { "pass" } else { "fail" }),
    });
    if !verify_ok {
        return Ok(abort(AbortReason::Verification, transcript, eve, Some(d_sp)));
    }

    let g_key = transcript.alice_keys.select(&key_positions);
    let h_key = transcript.bob_results.select(&key_positions);
    let syndrome = params.code.syndrome(&g_key)?;
    transcript.announcements.push(Announcement {
        step: "C8".into(),
        payload: format!("s={}", syndrome.to_hex()),
    });
    transcript.syndrome = Some(syndrome.clone());
    let kappa = params.privacy.compress(&g_key)?;

    let corrected = crate::codes::syndrome_decode(&h_key, &syndrome, &params.code)?;
    let kappa_b = params.privacy.compress(&corrected)?;
    transcript.announcements.push(Announcement { step: "C9".into(), payload: "decoded".into() });

    let d_sk = g_key.distance(&h_key);
    // Decoder contract: within the correction radius the corrected block is
    // the sender's block exactly.
    if d_sk <= params.code.t_max() {
        assert_eq!(corrected, g_key, "decoder failed within its correction radius");
    }
    debug_assert_eq!(gf2_matvec(params.code.parity_check(), &g_key)?, syndrome);

    Ok(SessionOutcome {
        status: SessionStatus::Completed,
        kappa,
        kappa_b: Some(kappa_b),
        d_sp: Some(d_sp),
        d_sk: Some(d_sk),
        exchanged_count: exchanged,
        lost_count: lost,
        eve,
        transcript,
    })
}

fn fnv1a(values: &[u32]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for v in values {
        for b in v.to_le_bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    hash
}

/// Convenience builder for the block-structured parameter sets used by the
/// long-session experiments: block-repetition code plus block-pattern
/// privacy rows.
#[allow(clippy::too_many_arguments)]
pub fn block_params(
    block_size: usize,
    block_len: usize,
    key_len: usize,
    delta_p: f64,
    eps: f64,
    eps_n: f64,
    lambda: f64,
    mode: ProtocolMode,
    master_seed: u64,
) -> Result<ProtocolParams, ProtocolError> {
    if !block_size.is_multiple_of(block_len) {
        return Err(ProtocolError::BadShape(format!(
            "block length {block_len} must divide the block size {block_size}"
        )));
    }
    let blocks = block_size / block_len;
    let code = LinearCode::block_repetition(blocks, block_len)?;
    let d_min = (2.0 * (delta_p / (1.0 - lambda) + eps) * block_size as f64).ceil().max(1.0) as usize;
    let privacy = crate::codes::build_block_pattern_privacy(
        blocks,
        block_len,
        key_len,
        d_min,
        master_seed,
    )?;
    ProtocolParams::new(
        key_len, delta_p, block_size, eps_n, eps, lambda, code, privacy, mode, master_seed,
    )
}
