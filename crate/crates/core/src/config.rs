//! JSON-facing experiment configuration: sources, codes, channels, attacks,
//! and batch settings, shared between the library and the CLI.
//!
//! Top-level documents reject unknown keys so typos fail loudly instead of
//! silently running a different experiment.

use crate::adversary::{AttackStrategy, BasisPolicy, ChannelModel, ResendRule};
use crate::codes::{
    build_block_pattern_privacy, build_privacy_matrix, gilbert_varshamov_construct, Gf2Matrix,
    LinearCode, PrivacyAmplifier,
};
use crate::protocol::{ProtocolMode, ProtocolParams};
use crate::quantum::{ComplexMatrix, DensityMatrix, MeasurementOperator, Povm};
use crate::source::{QuasiPerfectCertificate, SourceModel, SourceSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Source(#[from] crate::source::SourceError),
    #[error(transparent)]
    Code(#[from] crate::codes::CodeError),
    #[error(transparent)]
    Protocol(#[from] crate::protocol::ProtocolError),
    #[error(transparent)]
    Quantum(#[from] crate::quantum::QuantumError),
    #[error(transparent)]
    Adversary(#[from] crate::adversary::AdversaryError),
}

/// How the session's error-correcting code is obtained.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CodeSpec {
    /// Greedy minimum-distance construction (lengths up to the enumeration cap).
    GilbertVarshamov { t: usize, seed: u64 },
    /// Block-repetition code; tractable at any length.
    BlockRepetition { block_len: usize },
    /// Explicit parity rows with a claimed correction capability.
    Explicit { rows: Vec<String>, t_max: usize },
}

impl CodeSpec {
    pub fn build(&self, n: usize) -> Result<LinearCode, ConfigError> {
        Ok(match self {
            Self::GilbertVarshamov { t, seed } => gilbert_varshamov_construct(n, *t, *seed)?,
            Self::BlockRepetition { block_len } => {
                if !n.is_multiple_of(*block_len) {
                    return Err(ConfigError::Inconsistent(format!(
                        "block length {block_len} does not divide n = {n}"
                    )));
                }
                LinearCode::block_repetition(n / block_len, *block_len)?
            }
            Self::Explicit { rows, t_max } => {
                let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
                LinearCode::from_parity_check(Gf2Matrix::parse_rows(&refs)?, *t_max)?
            }
        })
    }
}

/// How the privacy-amplification matrix is obtained.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PrivacySpec {
    /// Coset-search construction against the code's parity check.
    CosetSearch { d_min: usize, seed: u64 },
    /// Block-pattern rows for a block-repetition code.
    BlockPattern { d_min: usize, seed: u64 },
    /// Explicit rows; the joint weight is recomputed when enumerable.
    Explicit { rows: Vec<String>, d_w: Option<usize> },
}

impl PrivacySpec {
    pub fn build(&self, code: &LinearCode, m: usize) -> Result<PrivacyAmplifier, ConfigError> {
        Ok(match self {
            Self::CosetSearch { d_min, seed } => {
                build_privacy_matrix(code.parity_check(), *d_min, m, *seed)?
            }
            Self::BlockPattern { d_min, seed } => {
                let n = code.length();
                let blocks_len = block_len_of(code).ok_or_else(|| {
                    ConfigError::Inconsistent(
                        "block-pattern privacy requires a block-repetition code".into(),
                    )
                })?;
                build_block_pattern_privacy(n / blocks_len, blocks_len, m, *d_min, *seed)?
            }
            Self::Explicit { rows, d_w } => {
                let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
                let k = Gf2Matrix::parse_rows(&refs)?;
                if k.rows() != m {
                    return Err(ConfigError::Inconsistent(format!(
                        "privacy rows {} do not match key length {m}",
                        k.rows()
                    )));
                }
                PrivacyAmplifier::from_matrix(k, code.parity_check(), *d_w)?
            }
        })
    }
}

fn block_len_of(code: &LinearCode) -> Option<usize> {
    // A block-repetition parity check has n - n/L rows.
    let n = code.length();
    let r = code.redundancy();
    let blocks = n.checked_sub(r)?;
    if blocks == 0 || !n.is_multiple_of(blocks) {
        return None;
    }
    Some(n / blocks)
}

/// Protocol parameter section of a session config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub m: usize,
    pub n: usize,
    pub delta_p: f64,
    pub eps: f64,
    #[serde(default = "default_eps_n")]
    pub eps_n: f64,
    /// Absent means: use the smallest value satisfying the split condition.
    #[serde(default)]
    pub lambda: Option<f64>,
    pub code: CodeSpec,
    pub privacy: PrivacySpec,
    #[serde(default = "default_mode")]
    pub mode: ProtocolMode,
}

fn default_eps_n() -> f64 {
    1.0
}

fn default_mode() -> ProtocolMode {
    ProtocolMode::Bb84
}

/// Channel section; both fields default to a noiseless channel.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default)]
    pub loss: f64,
    #[serde(default)]
    pub depolarize: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { loss: 0.0, depolarize: 0.0 }
    }
}

/// Resend behavior of a custom attack.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResendConfig {
    PassThrough,
    PerOutcome { states: Vec<Vec<Vec<[f64; 2]>>> },
    Conjugate { unitary: ComplexMatrix },
}

/// Attack section. Unit variants are plain strings (`"none"`,
/// `"intercept-resend"`, `"distinguish"`); parameterized forms are objects.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[derive(Default)]
pub enum AttackConfig {
    #[default]
    None,
    /// Random measurement basis per position.
    InterceptResend,
    /// Fixed measurement basis.
    InterceptResendFixed { basis: u8 },
    /// Witness-state distinguishing attack derived from the certificate.
    Distinguish,
    Custom { povm: Vec<ComplexMatrix>, resend: ResendConfig },
}


impl AttackConfig {
    pub fn build(&self, cert: &QuasiPerfectCertificate) -> Result<AttackStrategy, ConfigError> {
        Ok(match self {
            Self::None => AttackStrategy::None,
            Self::InterceptResend => {
                AttackStrategy::InterceptResend { basis_policy: BasisPolicy::Random }
            }
            Self::InterceptResendFixed { basis } => {
                AttackStrategy::InterceptResend { basis_policy: BasisPolicy::Fixed(basis & 1) }
            }
            Self::Distinguish => AttackStrategy::distinguish_witness(cert)?,
            Self::Custom { povm, resend } => {
                let ops: Result<Vec<MeasurementOperator>, _> =
                    povm.iter().map(|mat| MeasurementOperator::new(mat.clone())).collect();
                let povm = Povm::new(
                    (0..povm.len()).map(|i| i.to_string()).collect(),
                    ops?,
                )?;
                let rule = match resend {
                    ResendConfig::PassThrough => ResendRule::PassThrough,
                    ResendConfig::Conjugate { unitary } => ResendRule::Conjugate(unitary.clone()),
                    ResendConfig::PerOutcome { states } => {
                        let mut parsed = Vec::with_capacity(states.len());
                        for rows in states {
                            let json = serde_json::to_value(rows)?;
                            let matrix: ComplexMatrix = serde_json::from_value(json)?;
                            parsed.push(DensityMatrix::new(matrix)?);
                        }
                        if parsed.len() != povm.len() {
                            return Err(ConfigError::Inconsistent(
                                "one resend state per POVM outcome required".into(),
                            ));
                        }
                        ResendRule::PerOutcome(parsed)
                    }
                };
                AttackStrategy::CustomPovm { povm, rule }
            }
        })
    }
}

/// A complete simulation run: source, parameters, channel, attack, batch size.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub source: SourceSpec,
    pub params: ParamsConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub attack: AttackConfig,
    pub sessions: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Run even when the operating conditions fail (research escape hatch).
    #[serde(default)]
    pub allow_invalid_params: bool,
}

/// Everything a batch run needs, built from a [`SessionConfig`].
pub struct BuiltSession {
    pub params: ProtocolParams,
    pub source: SourceModel,
    pub certificate: QuasiPerfectCertificate,
    pub channel: ChannelModel,
    pub attack: AttackStrategy,
    pub sessions: u64,
    pub seed: u64,
    pub allow_invalid_params: bool,
}

impl SessionConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Materializes the config. `fallback_seed` is used (and should be
    /// reported) when the document does not pin one.
    pub fn build(&self, fallback_seed: u64) -> Result<BuiltSession, ConfigError> {
        let (source, certificate) = self.source.build()?;
        let seed = self.seed.unwrap_or(fallback_seed);
        let code = self.params.code.build(self.params.n)?;
        let privacy = self.params.privacy.build(&code, self.params.m)?;
        let lambda = self.params.lambda.unwrap_or_else(|| {
            ProtocolParams::minimal_lambda(self.params.delta_p, self.params.eps, certificate.beta_qp)
        });
        let params = ProtocolParams::new(
            self.params.m,
            self.params.delta_p,
            self.params.n,
            self.params.eps_n,
            self.params.eps,
            lambda,
            code,
            privacy,
            self.params.mode,
            seed,
        )?;
        let channel = ChannelModel::new(self.channel.loss, self.channel.depolarize)?;
        let attack = self.attack.build(&certificate)?;
        Ok(BuiltSession {
            params,
            source,
            certificate,
            channel,
            attack,
            sessions: self.sessions,
            seed,
            allow_invalid_params: self.allow_invalid_params,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::run_batch;
    use crate::protocol::SessionStatus;

    const BASE: &str = r#"{
        "source": {"kind": "ideal"},
        "params": {
            "m": 2, "n": 16, "delta_p": 0.01, "eps": 0.01, "eps_n": 3.0,
            "code": {"kind": "block-repetition", "block_len": 4},
            "privacy": {"kind": "block-pattern", "d_min": 1, "seed": 9}
        },
        "sessions": 5,
        "seed": 42
    }"#;

    #[test]
    fn minimal_config_roundtrip() {
        let cfg = SessionConfig::from_json(BASE).unwrap();
        let built = cfg.build(0).unwrap();
        assert_eq!(built.seed, 42);
        assert_eq!(built.params.key_len, 2);
        let outcomes = run_batch(
            &built.params,
            &built.source,
            &built.certificate,
            &built.channel,
            &built.attack,
            built.sessions,
            true,
        )
        .unwrap();
        assert_eq!(outcomes.len(), 5);
        assert!(outcomes.iter().all(|o| o.status == SessionStatus::Completed));
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = BASE.replace(r#""sessions": 5,"#, r#""sessions": 5, "tpyo": 1,"#);
        assert!(SessionConfig::from_json(&bad).is_err());
    }

    #[test]
    fn lambda_defaults_to_minimal() {
        let cfg = SessionConfig::from_json(BASE).unwrap();
        let built = cfg.build(0).unwrap();
        let expected = ProtocolParams::minimal_lambda(0.01, 0.01, 0.0);
        assert!((built.params.lambda - expected).abs() < 1e-12);
    }

    #[test]
    fn attack_strings_parse() {
        for (text, trials) in [("\"none\"", true), ("\"intercept-resend\"", true), ("\"distinguish\"", true)] {
            let doc = BASE.replace(r#""sessions": 5,"#, &format!(r#""attack": {text}, "sessions": 5,"#));
            let cfg = SessionConfig::from_json(&doc).unwrap();
            assert!(cfg.build(0).is_ok() == trials);
        }
    }

    #[test]
    fn gv_code_spec_builds() {
        let doc = r#"{
            "source": {"kind": "ideal"},
            "params": {
                "m": 1, "n": 7, "delta_p": 0.05, "eps": 0.02,
                "code": {"kind": "gilbert-varshamov", "t": 1, "seed": 5},
                "privacy": {"kind": "coset-search", "d_min": 1, "seed": 6}
            },
            "sessions": 1
        }"#;
        let cfg = SessionConfig::from_json(doc).unwrap();
        let built = cfg.build(123).unwrap();
        assert_eq!(built.seed, 123);
        assert_eq!(built.params.code.redundancy(), 4);
    }

    #[test]
    fn angular_source_config() {
        let doc = r#"{
            "source": {"kind": "angular",
                       "p0": {"kind": "uniform", "center": 0.0, "half_width": 0.1},
                       "p1": {"kind": "delta", "angle": 0.7853981633974483}},
            "params": {
                "m": 2, "n": 16, "delta_p": 0.01, "eps": 0.005, "eps_n": 3.0,
                "code": {"kind": "block-repetition", "block_len": 4},
                "privacy": {"kind": "block-pattern", "d_min": 1, "seed": 9}
            },
            "sessions": 2,
            "seed": 1
        }"#;
        let cfg = SessionConfig::from_json(doc).unwrap();
        let built = cfg.build(0).unwrap();
        assert!(built.certificate.beta_qp > 0.0);
    }

    #[test]
    fn custom_attack_config() {
        let doc = r#"{
            "source": {"kind": "ideal"},
            "params": {
                "m": 2, "n": 16, "delta_p": 0.01, "eps": 0.01, "eps_n": 3.0,
                "code": {"kind": "block-repetition", "block_len": 4},
                "privacy": {"kind": "block-pattern", "d_min": 1, "seed": 9}
            },
            "attack": {"custom": {
                "povm": [[[[1.0,0],[0,0]],[[0,0],[1.0,0]]]],
                "resend": {"kind": "pass-through"}
            }},
            "sessions": 2,
            "seed": 7
        }"#;
        let cfg = SessionConfig::from_json(doc).unwrap();
        let built = cfg.build(0).unwrap();
        let outcomes = run_batch(
            &built.params,
            &built.source,
            &built.certificate,
            &built.channel,
            &built.attack,
            2,
            true,
        )
        .unwrap();
        // A trivial POVM with pass-through resend leaves sessions noiseless.
        assert!(outcomes.iter().all(|o| o.d_sp == Some(0)));
    }
}
