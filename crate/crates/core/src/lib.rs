//! Simulation and numerical verification toolkit for a BB84-style quantum key
//! distribution protocol driven by quasiperfect (imperfect-polarization)
//! sources.
//!
//! The crate is organized around the stages of the protocol:
//!
//! - [`quantum`]: dense complex matrices, density operators, POVMs, tensor
//!   products, Hermitian eigendecomposition, partial-trace reduction.
//! - [`source`]: construction and certification of quasiperfect sources,
//!   including the rotated-projector construction from angular polarization
//!   distributions.
//! - [`codes`]: GF(2) linear algebra, error-correcting codes with syndrome
//!   decoding, privacy-amplification matrices, and the rate formulas.
//! - [`adversary`]: eavesdropper strategies, basis-independent channel
//!   models, and optimal state-discrimination measurements.
//! - [`protocol`]: the executable session state machine (quantum transmission
//!   plus classical negotiation) and its parameter validation.
//! - [`analysis`]: numerical verification of the reliability, tail, and
//!   privacy bounds, plus brute-force key-independence checks.
//! - [`config`]: JSON-facing experiment configuration shared with the CLI.

pub mod adversary;
pub mod analysis;
pub mod codes;
pub mod config;
pub mod protocol;
pub mod quantum;
pub mod source;

pub use adversary::{apply_attack, apply_channel, AttackStrategy, ChannelModel, EveRecord};
pub use codes::{BitString, Gf2Matrix, LinearCode, PrivacyAmplifier};
pub use analysis::{BoundReport, JointDistribution};
pub use config::SessionConfig;
pub use protocol::{ProtocolMode, ProtocolParams, SessionOutcome, SessionStatus, Transcript};
pub use quantum::{ComplexMatrix, DensityMatrix, MeasurementOperator, Povm};
pub use source::{AngularDistribution, CertificateReport, QuasiPerfectCertificate, SourceModel};
