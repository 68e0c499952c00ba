//! Numerical verification of the quantitative bounds: double-binomial tail
//! inequalities, the reliability bound, the privacy bookkeeping functions,
//! conditional Shannon entropy with small-sample handling, brute-force
//! key-independence checks, and small-sphere projectors on tiny blocks.
//!
//! Experiments parallelize over sessions with independent seeds; every
//! aggregation is a fold over a session-indexed vector, so results are
//! identical for any thread count.

use crate::adversary::{AttackStrategy, ChannelModel};
use crate::codes::{BitString, CodeError, Gf2Matrix};
use crate::protocol::{
    run_session_unchecked, ProtocolError, ProtocolParams, SessionOutcome, SessionStatus,
};
use crate::quantum::{tensor_chain, ComplexMatrix, MeasurementOperator, QuantumError};
use crate::source::{QuasiPerfectCertificate, SourceModel};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("parameter ordering violated: need 0 < r <= p < p + t < 1, got r={r}, p={p}, t={t}")]
    BadTailParams { p: f64, r: f64, t: f64 },
    #[error("distance threshold {threshold} exceeds half the joint minimum weight {d_w}")]
    ThresholdTooWide { threshold: usize, d_w: usize },
    #[error("joint distribution sums to {0}, not 1")]
    NotADistribution(f64),
    #[error("block too large: {0} positions exceed the cap {1}")]
    BlockTooLarge(usize, usize),
    #[error("support hypothesis violated: ||X Ptilde|| = {0:.3e} at a far pattern")]
    HypothesisViolated(f64),
    #[error("stacked key/parity rows must be independent")]
    DependentRows,
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Joint probability table over (key, view-label) cells.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    key_count: usize,
    view_count: usize,
    /// Row-major: `probs[key * view_count + view]`.
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(key_count: usize, view_count: usize, probs: Vec<f64>) -> Result<Self, AnalysisError> {
        assert_eq!(probs.len(), key_count * view_count);
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(AnalysisError::NotADistribution(total));
        }
        Ok(Self { key_count, view_count, probs })
    }

    pub fn from_counts(key_count: usize, view_count: usize, counts: &[u64]) -> Self {
        let total: u64 = counts.iter().sum();
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self { key_count, view_count, probs }
    }

    pub fn prob(&self, key: usize, view: usize) -> f64 {
        self.probs[key * self.view_count + view]
    }

    pub fn view_marginal(&self, view: usize) -> f64 {
        (0..self.key_count).map(|k| self.prob(k, view)).sum()
    }

    pub fn key_count(&self) -> usize {
        self.key_count
    }

    pub fn view_count(&self) -> usize {
        self.view_count
    }
}

/// Conditional Shannon entropy `H(key | view)` in bits, with `0 log 0 = 0`.
pub fn conditional_entropy(j: &JointDistribution) -> f64 {
    let mut h = 0.0;
    for v in 0..j.view_count() {
        let pv = j.view_marginal(v);
        if pv <= 0.0 {
            continue;
        }
        for k in 0..j.key_count() {
            let pkv = j.prob(k, v);
            if pkv > 0.0 {
                h -= pkv * (pkv / pv).log2();
            }
        }
    }
    h
}

fn check_tail_params(p: f64, r: f64, t: f64) -> Result<(), AnalysisError> {
    if !(0.0 < r && r <= p && p < p + t && p + t < 1.0) {
        return Err(AnalysisError::BadTailParams { p, r, t });
    }
    Ok(())
}

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    // P(X = k) by the multiplicative recurrence; stable for n <= a few hundred.
    let q = 1.0 - p;
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = q.powi(n as i32);
    for k in 1..=n {
        pmf[k] = pmf[k - 1] * ((n - k + 1) as f64 / k as f64) * (p / q);
    }
    pmf
}

/// Exact upper tail of the sum of two independent binomials against the
/// exponential bound `e^(-2 t^2 n)`: the mass of
/// `{(i_r, i_p) : i_r + i_p >= (p + t) n}` with `n = n_r + n_p`.
pub fn binomial_tail_bound(
    p: f64,
    r: f64,
    t: f64,
    n_r: usize,
    n_p: usize,
) -> Result<(f64, f64), AnalysisError> {
    check_tail_params(p, r, t)?;
    let n = n_r + n_p;
    let cutoff = (p + t) * n as f64;
    let pmf_p = binomial_pmf(n_p, p);
    let pmf_r = binomial_pmf(n_r, r);
    let mut exact = 0.0;
    for (i_r, w_r) in pmf_r.iter().enumerate() {
        for (i_p, w_p) in pmf_p.iter().enumerate() {
            if (i_r + i_p) as f64 >= cutoff {
                exact += w_r * w_p;
            }
        }
    }
    let bound = (-2.0 * t * t * n as f64).exp();
    Ok((exact, bound))
}

/// Lower-tail variant: the mass of `{i_r + i_p <= (r - t) n}` under the same
/// exponential bound, obtained by complementing both success probabilities.
pub fn binomial_tail_bound_lower(
    p: f64,
    r: f64,
    t: f64,
    n_r: usize,
    n_p: usize,
) -> Result<(f64, f64), AnalysisError> {
    if !(0.0 < r - t && r <= p && p < 1.0) {
        return Err(AnalysisError::BadTailParams { p, r, t });
    }
    let n = n_r + n_p;
    let cutoff = (r - t) * n as f64;
    let pmf_p = binomial_pmf(n_p, p);
    let pmf_r = binomial_pmf(n_r, r);
    let mut exact = 0.0;
    for (i_r, w_r) in pmf_r.iter().enumerate() {
        for (i_p, w_p) in pmf_p.iter().enumerate() {
            if (i_r + i_p) as f64 <= cutoff {
                exact += w_r * w_p;
            }
        }
    }
    let bound = (-2.0 * t * t * n as f64).exp();
    Ok((exact, bound))
}

/// Ceiling on `P(keys differ and the verification test passed)`: the larger
/// of the two exponential case bounds from splitting on the total error count.
pub fn reliability_bound(n: usize, eps: f64, delta_p: f64) -> f64 {
    assert!(n >= 1 && eps > 0.0 && delta_p > 0.0);
    let nf = n as f64;
    let first = (-(eps * eps / 4.0) * (delta_p + 0.5 * eps) * nf).exp();
    let second = (-0.25 * (delta_p + 1.5 * eps).powi(2) / (delta_p + 0.5 * eps) * nf).exp();
    first.max(second)
}

/// The privacy bookkeeping quantities for block size `n`, key length `m`, and
/// security parameter `eps`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PrivacyBookkeeping {
    /// `g = e^(-eps^2 n) + e^(-eps^2 n / 2)`.
    pub g: f64,
    /// `h = 2 g^(1/4) + g^(1/2)`.
    pub h: f64,
    /// Entropy-defect ceiling `2(m + 1/ln 2) h + 2 sqrt(2 (m + 1/ln 2) m h) + m p_bad`.
    pub eps1: f64,
    /// Internal balance parameter `sqrt(m / (2 (m + 1/ln 2) h))`; the
    /// derivation of `eps1` is valid only where `q >= 1`.
    pub q: f64,
}

impl PrivacyBookkeeping {
    pub fn valid(&self) -> bool {
        self.q >= 1.0
    }
}

/// Evaluates the bookkeeping functions. `p_bad` is the probability mass of
/// passing views without the small-sphere property; when absent it defaults
/// to `sqrt(g)`, its own ceiling.
pub fn privacy_bookkeeping(n: usize, m: usize, eps: f64, p_bad: Option<f64>) -> PrivacyBookkeeping {
    assert!(n >= 1 && m >= 1 && eps > 0.0);
    let nf = n as f64;
    let g = (-eps * eps * nf).exp() + (-0.5 * eps * eps * nf).exp();
    let h = 2.0 * g.powf(0.25) + g.sqrt();
    let c = m as f64 + 1.0 / std::f64::consts::LN_2;
    let p_bad = p_bad.unwrap_or_else(|| g.sqrt());
    let eps1 = 2.0 * c * h + 2.0 * (2.0 * c * m as f64 * h).sqrt() + m as f64 * p_bad;
    let q = (m as f64 / (2.0 * c * h)).sqrt();
    PrivacyBookkeeping { g, h, eps1, q }
}

/// One point of the entropy-defect decay scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlopePoint {
    pub n: usize,
    pub m: usize,
    pub eps1: f64,
    pub q: f64,
}

/// Log-linear decay scan of the entropy defect at fixed rate `m = floor(lambda n)`.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeReport {
    pub points: Vec<SlopePoint>,
    /// Smallest scanned `n` where the derivation's balance condition holds.
    pub valid_from: Option<usize>,
    /// Least-squares slope of `ln eps1` against `n` over the valid region.
    pub slope: f64,
    /// Strictly decreasing over the valid region.
    pub monotone: bool,
    pub pass: bool,
}

/// Scans `eps1(n, floor(lambda n), eps)` over a grid and fits the log-linear
/// slope on the region where the balance condition `q >= 1` holds (reported
/// alongside, since the ceiling is only derived there).
pub fn eps1_decay_scan(n_values: &[usize], lambda: f64, eps: f64) -> SlopeReport {
    let points: Vec<SlopePoint> = n_values
        .iter()
        .map(|&n| {
            let m = ((lambda * n as f64).floor() as usize).max(1);
            let b = privacy_bookkeeping(n, m, eps, None);
            SlopePoint { n, m, eps1: b.eps1, q: b.q }
        })
        .collect();
    let valid: Vec<&SlopePoint> = points.iter().filter(|p| p.q >= 1.0).collect();
    let valid_from = valid.first().map(|p| p.n);
    let slope = if valid.len() >= 2 {
        let xs: Vec<f64> = valid.iter().map(|p| p.n as f64).collect();
        let ys: Vec<f64> = valid.iter().map(|p| p.eps1.ln()).collect();
        least_squares_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    let monotone = valid.windows(2).all(|w| w[1].eps1 < w[0].eps1);
    let pass = valid.len() >= 2 && slope < 0.0 && monotone;
    SlopeReport { points, valid_from, slope, monotone, pass }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Empirical value against an analytic ceiling.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub kind: String,
    pub n: usize,
    pub trials: u64,
    pub empirical: f64,
    pub bound: f64,
    /// Binomial standard error of the empirical estimate.
    pub sigma: f64,
    pub pass: bool,
    pub notes: String,
}

impl BoundReport {
    pub fn new(kind: &str, n: usize, trials: u64, empirical: f64, bound: f64, notes: String) -> Self {
        let sigma = (empirical * (1.0 - empirical) / trials as f64).max(0.0).sqrt();
        let pass = empirical <= bound + 3.0 * sigma;
        Self { kind: kind.into(), n, trials, empirical, bound, sigma, pass, notes }
    }
}

/// Runs a batch of sessions in parallel with per-session seeds; results come
/// back in session order regardless of the thread count.
pub fn run_batch(
    params: &ProtocolParams,
    src: &SourceModel,
    cert: &QuasiPerfectCertificate,
    channel: &ChannelModel,
    attack: &AttackStrategy,
    sessions: u64,
    enforce_validation: bool,
) -> Result<Vec<SessionOutcome>, ProtocolError> {
    if enforce_validation {
        // Validate once up front; per-session revalidation would be identical.
        let report = crate::protocol::validate_params(params, cert);
        if !report.pass {
            return Err(ProtocolError::InvalidParams(report.summary()));
        }
    }
    (0..sessions)
        .into_par_iter()
        .map(|i| run_session_unchecked(params, src, channel, attack, i))
        .collect()
}

/// Reliability Monte Carlo: empirical `P(keys differ and the test passed)`
/// against [`reliability_bound`], plus the hard decoder guarantee that keys
/// agree whenever the key-side error count is within the correction radius.
#[derive(Debug, Clone, Serialize)]
pub struct ReliabilityReport {
    pub report: BoundReport,
    pub completed: u64,
    pub aborted: u64,
    /// Sessions with `d_sk <= t_max` whose keys disagreed (must be zero).
    pub guarantee_violations: u64,
}

pub fn reliability_experiment(
    params: &ProtocolParams,
    src: &SourceModel,
    cert: &QuasiPerfectCertificate,
    channel: &ChannelModel,
    sessions: u64,
) -> Result<ReliabilityReport, AnalysisError> {
    let validation = crate::protocol::validate_params(params, cert);
    if !validation.pass {
        return Err(ProtocolError::InvalidParams(validation.summary()).into());
    }
    // Fold per-session statistics in parallel instead of materializing every
    // transcript; the counters are order-independent sums.
    #[derive(Default, Clone, Copy)]
    struct Stats {
        bad: u64,
        completed: u64,
        violations: u64,
    }
    let stats = (0..sessions)
        .into_par_iter()
        .try_fold(Stats::default, |mut st, i| -> Result<Stats, ProtocolError> {
            let o = run_session_unchecked(params, src, channel, &AttackStrategy::None, i)?;
            if o.status == SessionStatus::Completed {
                st.completed += 1;
                if o.key_equal() == Some(false) {
                    st.bad += 1;
                    if o.d_sk.unwrap_or(usize::MAX) <= params.code.t_max() {
                        st.violations += 1;
                    }
                }
            }
            Ok(st)
        })
        .try_reduce(Stats::default, |a, b| {
            Ok(Stats {
                bad: a.bad + b.bad,
                completed: a.completed + b.completed,
                violations: a.violations + b.violations,
            })
        })?;
    let (bad, completed, violations) = (stats.bad, stats.completed, stats.violations);
    let empirical = bad as f64 / sessions as f64;
    let bound = reliability_bound(params.block_size, params.eps, params.delta_p);
    let report = BoundReport::new(
        "reliability",
        params.block_size,
        sessions,
        empirical,
        bound,
        format!(
            "q={}, completed={completed}, key-mismatches={bad}",
            channel.flip_probability
        ),
    );
    Ok(ReliabilityReport {
        report,
        completed,
        aborted: sessions - completed,
        guarantee_violations: violations,
    })
}

/// Report of the brute-force key-independence check.
#[derive(Debug, Clone, Serialize)]
pub struct IndependenceReport {
    /// Largest `||X Ptilde^j|| / dim` over far patterns; must be below the
    /// tolerance for the hypothesis to hold.
    pub hypothesis_residual: f64,
    pub hypothesis_ok: bool,
    /// Largest spread of `Tr(X rho)` across keys, maximized over syndromes.
    pub max_spread: f64,
    pub pass: bool,
    pub syndromes_checked: usize,
}

/// Brute-force verification that `Tr(X rho_{key, syndrome})` cannot depend on
/// the key: for every syndrome, the averaged block states for any two keys
/// give the same trace against `X`, provided `X` is supported on patterns
/// close to `h` (within `d_threshold < d_w / 2`).
///
/// `basis` selects the projector family per position; the block states are
/// built in the complementary basis, which is what ties the masking
/// conditions of the certificate into the argument.
#[allow(clippy::too_many_arguments)]
pub fn key_independence_check(
    f: &Gf2Matrix,
    k: &Gf2Matrix,
    src: &SourceModel,
    cert: &QuasiPerfectCertificate,
    basis: &BitString,
    h: &BitString,
    d_threshold: usize,
    x: &MeasurementOperator,
    tol: f64,
) -> Result<IndependenceReport, AnalysisError> {
    let n = basis.len();
    const MAX_POSITIONS: usize = 8;
    if n > MAX_POSITIONS {
        return Err(AnalysisError::BlockTooLarge(n, MAX_POSITIONS));
    }
    assert_eq!(h.len(), n);
    assert_eq!(f.cols(), n);
    assert_eq!(k.cols(), n);
    if k.rows() > 0 && !f.stack(k).has_independent_rows() {
        return Err(AnalysisError::DependentRows);
    }
    // The argument needs room to split far patterns between the two sides of
    // the support hypothesis.
    let d_w = crate::codes::joint_min_weight(f, k)?;
    if 2 * d_threshold > d_w {
        return Err(AnalysisError::ThresholdTooWide { threshold: d_threshold, d_w });
    }
    let dim = 1usize << n;
    assert_eq!(x.dim(), dim);

    // Hypothesis check: ||X Ptilde^j||_F as exact norms of X applied to an
    // orthonormal basis of each pattern projector's range. Going through the
    // squared trace instead would halve the attainable precision.
    let mut range_vectors: Vec<[Vec<Vec<Complex64>>; 2]> = Vec::with_capacity(n);
    for pos in 0..n {
        let mut per_w: [Vec<Vec<Complex64>>; 2] = [Vec::new(), Vec::new()];
        for w in 0..2u8 {
            let proj = cert.tilde_projector(basis.get(pos) as u8, w).matrix();
            let (eigs, vectors) = crate::quantum::hermitian_eigen(proj)?;
            for (idx, &l) in eigs.iter().enumerate() {
                if l > 0.5 {
                    per_w[w as usize]
                        .push((0..proj.dim()).map(|row| vectors.get(row, idx)).collect());
                }
            }
        }
        range_vectors.push(per_w);
    }
    let mut hypothesis_residual = 0.0f64;
    for j in 0..(1u64 << n) {
        let dist = (j ^ h.as_word()).count_ones() as usize;
        if dist < d_threshold {
            continue;
        }
        // Cartesian product of per-position range bases (one vector each for
        // rank-1 projectors).
        let counts: Vec<usize> =
            (0..n).map(|pos| range_vectors[pos][((j >> pos) & 1) as usize].len()).collect();
        let total: usize = counts.iter().product();
        for choice in 0..total {
            let mut rem = choice;
            let picks: Vec<&Vec<Complex64>> = (0..n)
                .map(|pos| {
                    let pick = rem % counts[pos];
                    rem /= counts[pos];
                    &range_vectors[pos][((j >> pos) & 1) as usize][pick]
                })
                .collect();
            // Tensor vector with position 0 on the least significant bit.
            let phi: Vec<Complex64> = (0..dim)
                .map(|idx| {
                    (0..n).fold(Complex64::ONE, |acc, pos| {
                        acc * picks[pos][(idx >> pos) & 1]
                    })
                })
                .collect();
            let mut norm_sq = 0.0f64;
            let xm = x.matrix();
            for row in 0..dim {
                let acc: Complex64 = phi
                    .iter()
                    .enumerate()
                    .map(|(col, &amp)| xm.get(row, col) * amp)
                    .sum();
                norm_sq += acc.norm_sqr();
            }
            hypothesis_residual = hypothesis_residual.max(norm_sq.sqrt());
        }
    }
    let hypothesis_ok = hypothesis_residual < tol;
    if !hypothesis_ok {
        return Ok(IndependenceReport {
            hypothesis_residual,
            hypothesis_ok,
            max_spread: f64::NAN,
            pass: false,
            syndromes_checked: 0,
        });
    }

    // Averaged block states per (key, syndrome) bucket, built in the
    // complementary basis, then traced against X.
    let r = f.rows();
    let m = k.rows();
    let mut traces: Vec<Vec<f64>> = vec![Vec::new(); 1 << r];
    let mut bucket_sums: Vec<Option<ComplexMatrix>> = (0..(1usize << (r + m))).map(|_| None).collect();
    let mut bucket_counts = vec![0u64; 1 << (r + m)];
    for bits in 0..(1u64 << n) {
        let g = BitString::from_word(bits, n);
        let s = crate::codes::gf2_matvec(f, &g)?.as_word() as usize;
        let kappa = crate::codes::gf2_matvec(k, &g)?.as_word() as usize;
        let factors: Vec<&ComplexMatrix> = (0..n)
            .map(|pos| {
                let emit_basis = 1 - basis.get(pos) as u8;
                src.emit_state(emit_basis, ((bits >> pos) & 1) as u8).matrix()
            })
            .collect();
        let product = position_tensor(&factors)?;
        let idx = kappa * (1 << r) + s;
        bucket_counts[idx] += 1;
        bucket_sums[idx] = Some(match bucket_sums[idx].take() {
            Some(acc) => acc.add(&product),
            None => product,
        });
    }
    for (s, per_key) in traces.iter_mut().enumerate() {
        for kappa in 0..(1usize << m) {
            let idx = kappa * (1 << r) + s;
            let count = bucket_counts[idx];
            if count == 0 {
                continue;
            }
            let avg = bucket_sums[idx]
                .as_ref()
                .expect("non-empty bucket has a sum")
                .scale(Complex64::new(1.0 / count as f64, 0.0));
            per_key.push(x.matrix().trace_product(&avg).re);
        }
    }
    let mut max_spread = 0.0f64;
    let mut syndromes_checked = 0usize;
    for per_key in &traces {
        if per_key.len() < 2 {
            continue;
        }
        syndromes_checked += 1;
        let lo = per_key.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = per_key.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max_spread = max_spread.max(hi - lo);
    }
    Ok(IndependenceReport {
        hypothesis_residual,
        hypothesis_ok,
        max_spread,
        pass: max_spread < tol,
        syndromes_checked,
    })
}

/// Tensor product over positions with position 0 living on the least
/// significant bit of the flat index, matching `BitString::as_word`.
fn position_tensor(factors_by_position: &[&ComplexMatrix]) -> Result<ComplexMatrix, QuantumError> {
    let reversed: Vec<&ComplexMatrix> = factors_by_position.iter().rev().copied().collect();
    tensor_chain(&reversed)
}

/// Builds the tensor projector family member `Ptilde^w` over the given basis
/// string, position 0 on the least significant index bit.
pub fn tilde_pattern_projector(
    cert: &QuasiPerfectCertificate,
    basis: &BitString,
    pattern: u64,
) -> Result<ComplexMatrix, QuantumError> {
    let n = basis.len();
    let factors: Vec<&ComplexMatrix> = (0..n)
        .map(|pos| {
            cert.tilde_projector(basis.get(pos) as u8, ((pattern >> pos) & 1) as u8).matrix()
        })
        .collect();
    position_tensor(&factors)
}

/// Sum of `Ptilde^w` over all patterns `w` whose distance to `h` on the key
/// positions is at least `threshold_count`. The result is a projector
/// (idempotent within 1e-9) because the summands are mutually orthogonal.
pub fn small_sphere_projector(
    cert: &QuasiPerfectCertificate,
    measured_bases: &BitString,
    h: &BitString,
    key_positions: &[usize],
    threshold_count: usize,
) -> Result<MeasurementOperator, AnalysisError> {
    let n = measured_bases.len();
    const MAX_POSITIONS: usize = 10;
    if n > MAX_POSITIONS {
        return Err(AnalysisError::BlockTooLarge(n, MAX_POSITIONS));
    }
    assert_eq!(h.len(), n);
    let dim = 1usize << n;
    let mut acc = ComplexMatrix::zeros(dim);
    for w in 0..(1u64 << n) {
        let mut dist = 0usize;
        for &pos in key_positions {
            if ((w >> pos) & 1) != (h.get(pos) as u64) {
                dist += 1;
            }
        }
        if dist >= threshold_count {
            acc = acc.add(&tilde_pattern_projector(cert, measured_bases, w)?);
        }
    }
    // The summands are mutually orthogonal projectors, so the sum is itself a
    // projector; validate idempotency rather than a full spectrum.
    Ok(MeasurementOperator::from_projector(acc)?)
}

/// Coarse eavesdropper view used by the entropy experiment: abort state, a
/// clamped test-error count, and the key guess the attack's notes compress to.
fn coarse_view(outcome: &SessionOutcome, params: &ProtocolParams, d_cap: usize) -> usize {
    let status_idx = match outcome.status {
        SessionStatus::Completed => 0usize,
        SessionStatus::Aborted(crate::protocol::AbortReason::Verification) => 1,
        SessionStatus::Aborted(crate::protocol::AbortReason::AgreementCheck) => 2,
    };
    let d_idx = outcome.d_sp.map_or(d_cap + 1, |d| d.min(d_cap));
    let guess_idx = match &outcome.transcript.key_positions {
        Some(positions) => {
            let bits = outcome.eve.guesses_at(positions);
            let guess = BitString::from_bits(&bits);
            match outcome.kappa_b {
                // Compression only defined when the matrix width matches.
                _ if bits.len() == params.privacy.matrix().cols() => params
                    .privacy
                    .compress(&guess)
                    .map(|k| k.as_word() as usize)
                    .unwrap_or(0),
                _ => 0,
            }
        }
        None => 0,
    };
    (status_idx * (d_cap + 2) + d_idx) * (1 << params.key_len) + guess_idx
}

/// Result of the coarse-view conditional entropy experiment.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    /// Plug-in estimate with small-sample correction.
    pub empirical_entropy: f64,
    /// `m - eps1`: the certified floor for the full view, which coarsening
    /// can only raise.
    pub floor: f64,
    /// Estimation-error band around the empirical value.
    pub band: f64,
    pub eps1: f64,
    pub sessions: u64,
    pub occupied_cells: usize,
    pub pass: bool,
}

/// Estimates `H(key | coarse view)` over simulated sessions and compares it
/// against the bookkeeping floor. The coarse view (abort state, clamped test
/// errors, compressed attack guesses) only discards information, so the floor
/// remains valid for it.
pub fn entropy_vs_bound_experiment(
    params: &ProtocolParams,
    src: &SourceModel,
    cert: &QuasiPerfectCertificate,
    channel: &ChannelModel,
    attack: &AttackStrategy,
    sessions: u64,
    enforce_validation: bool,
) -> Result<EntropyReport, AnalysisError> {
    let m = params.key_len;
    assert!(m <= 8, "key space must stay enumerable");
    let d_cap = 8usize;
    let view_count = 3 * (d_cap + 2) * (1 << m);
    if enforce_validation {
        let validation = crate::protocol::validate_params(params, cert);
        if !validation.pass {
            return Err(ProtocolError::InvalidParams(validation.summary()).into());
        }
    }
    let counts = (0..sessions)
        .into_par_iter()
        .try_fold(
            || vec![0u64; (1 << m) * view_count],
            |mut acc, i| -> Result<Vec<u64>, ProtocolError> {
                let o = run_session_unchecked(params, src, channel, attack, i)?;
                let key = o.kappa.as_word() as usize;
                let view = coarse_view(&o, params, d_cap);
                acc[key * view_count + view] += 1;
                Ok(acc)
            },
        )
        .try_reduce(
            || vec![0u64; (1 << m) * view_count],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    let joint = JointDistribution::from_counts(1 << m, view_count, &counts);
    let plugin = conditional_entropy(&joint);

    // Small-sample correction for the conditional plug-in estimator: the
    // bias difference of the joint and marginal estimators.
    let occupied_joint = counts.iter().filter(|&&c| c > 0).count();
    let occupied_views = (0..view_count)
        .filter(|&v| (0..(1usize << m)).any(|k| counts[k * view_count + v] > 0))
        .count();
    let nf = sessions as f64;
    let mm = (occupied_joint.saturating_sub(occupied_views)) as f64 / (2.0 * nf * std::f64::consts::LN_2);
    let empirical = plugin + mm;

    // Band: the correction itself plus three standard errors of the
    // surprisal mean.
    let mut var = 0.0;
    for v in 0..view_count {
        let pv = joint.view_marginal(v);
        if pv <= 0.0 {
            continue;
        }
        for k in 0..(1usize << m) {
            let pkv = joint.prob(k, v);
            if pkv > 0.0 {
                let s = -(pkv / pv).log2();
                var += pkv * (s - plugin) * (s - plugin);
            }
        }
    }
    let band = mm + 3.0 * (var / nf).sqrt() + 3.0 / nf;

    let book = privacy_bookkeeping(params.block_size, m, params.eps, None);
    let floor = m as f64 - book.eps1;
    let pass = empirical >= floor - band;
    Ok(EntropyReport {
        empirical_entropy: empirical,
        floor,
        band,
        eps1: book.eps1,
        sessions,
        occupied_cells: occupied_joint,
        pass,
    })
}

/// Mean observed test-error fraction over a batch; the headline statistic of
/// the intercept-resend signature.
pub fn mean_test_error_rate(outcomes: &[SessionOutcome], block_size: usize) -> Option<f64> {
    let rates: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.d_sp.map(|d| d as f64 / block_size as f64))
        .collect();
    if rates.is_empty() {
        None
    } else {
        Some(rates.iter().sum::<f64>() / rates.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::BasisPolicy;
    use crate::codes::{build_block_pattern_privacy, joint_min_weight, LinearCode};
    use crate::protocol::{block_params, ProtocolMode};
    use crate::quantum::hermitian_eigen;
    use crate::source::{build_from_distributions, ideal_bb84_source, AngularDistribution};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn conditional_entropy_independent_uniform() {
        // Uniform 3-bit key independent of a 5-cell view marginal.
        let key_count = 8;
        let view_count = 5;
        let view_marginal = [0.1, 0.3, 0.2, 0.25, 0.15];
        let probs: Vec<f64> = (0..key_count)
            .flat_map(|_| view_marginal.iter().map(|v| v / key_count as f64))
            .collect();
        let j = JointDistribution::new(key_count, view_count, probs).unwrap();
        assert!((conditional_entropy(&j) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_determined_key() {
        // Key equals the view index: no residual uncertainty.
        let n = 4;
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            probs[i * n + i] = 1.0 / n as f64;
        }
        let j = JointDistribution::new(n, n, probs).unwrap();
        assert!(conditional_entropy(&j).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_hand_example() {
        let j = JointDistribution::new(2, 2, vec![0.25, 0.25, 0.25, 0.25]).unwrap();
        assert!((conditional_entropy(&j) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_symmetric_example() {
        let (exact, bound) = binomial_tail_bound(0.5, 0.5, 0.1, 10, 10).unwrap();
        assert!((bound - (-0.4f64).exp()).abs() < 1e-12);
        // Upper tail of Bin(20, 1/2) at >= 12: 263950 / 2^20.
        assert!((exact - 263950.0 / 1048576.0).abs() < 1e-9);
        assert!(exact <= bound);
    }

    #[test]
    fn tail_bound_near_empty_tail() {
        // The precondition p + t < 1 keeps the corner (n_r, n_p) inside the
        // summation set, so the smallest reachable tail is that single term.
        let (exact, bound) = binomial_tail_bound(0.55, 0.5, 0.44, 5, 5).unwrap();
        let corner = 0.55f64.powi(5) * 0.5f64.powi(5);
        assert!((exact - corner).abs() < 1e-12);
        assert!(exact <= bound);
    }

    #[test]
    fn tail_bound_random_tuples() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..200 {
            let r = 0.05 + 0.75 * rng.random::<f64>();
            let p = r + (0.94 - r) * rng.random::<f64>();
            let t = (1.0 - p) * (0.05 + 0.9 * rng.random::<f64>());
            let n_r = 1 + (rng.random::<u64>() % 20) as usize;
            let n_p = 1 + (rng.random::<u64>() % (40 - n_r as u64)) as usize;
            if p + t >= 1.0 {
                continue;
            }
            let (exact, bound) = binomial_tail_bound(p, r, t, n_r, n_p).unwrap();
            assert!(exact <= bound + 1e-12, "p={p} r={r} t={t} n_r={n_r} n_p={n_p}");
        }
    }

    #[test]
    fn tail_bound_lower_variant() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let r = 0.1 + 0.6 * rng.random::<f64>();
            let p = r + (0.95 - r) * rng.random::<f64>();
            let t = r * (0.1 + 0.8 * rng.random::<f64>());
            let n_r = 1 + (rng.random::<u64>() % 20) as usize;
            let n_p = 1 + (rng.random::<u64>() % 20) as usize;
            let (exact, bound) = binomial_tail_bound_lower(p, r, t, n_r, n_p).unwrap();
            assert!(exact <= bound + 1e-12);
        }
    }

    #[test]
    fn tail_bound_rejects_bad_ordering() {
        assert!(binomial_tail_bound(0.3, 0.5, 0.1, 5, 5).is_err());
    }

    #[test]
    fn reliability_bound_values() {
        // Monotone decreasing in n.
        let mut prev = f64::INFINITY;
        for n in [100, 200, 500, 1000, 2000] {
            let b = reliability_bound(n, 0.05, 0.05);
            assert!(b < prev);
            prev = b;
        }
        let b = reliability_bound(1000, 0.05, 0.05);
        let first = (-(0.05f64 * 0.05 / 4.0) * 0.075 * 1000.0).exp();
        assert!((b - first).abs() < 1e-12);
        assert!((b - 0.9542).abs() < 1e-4);
    }

    #[test]
    fn bookkeeping_formula_values() {
        let b = privacy_bookkeeping(100, 3, 0.3, None);
        let expected_g = (-9.0f64).exp() + (-4.5f64).exp();
        assert!((b.g - expected_g).abs() < 1e-12);
        assert!((b.h - (2.0 * expected_g.powf(0.25) + expected_g.sqrt())).abs() < 1e-12);
        let c = 3.0 + 1.0 / std::f64::consts::LN_2;
        let expected_eps1 =
            2.0 * c * b.h + 2.0 * (2.0 * c * 3.0 * b.h).sqrt() + 3.0 * expected_g.sqrt();
        assert!((b.eps1 - expected_eps1).abs() < 1e-12);
    }

    #[test]
    fn bookkeeping_halving_property() {
        // eps1(2n) < eps1(n) once inside the valid region.
        for n in [1300usize, 1600, 2000] {
            let m1 = (0.05 * n as f64).floor() as usize;
            let m2 = (0.05 * (2 * n) as f64).floor() as usize;
            let a = privacy_bookkeeping(n, m1, 0.1, None);
            let b = privacy_bookkeeping(2 * n, m2, 0.1, None);
            assert!(a.valid());
            assert!(b.eps1 < a.eps1, "n={n}");
        }
    }

    #[test]
    fn decay_scan_negative_slope_on_valid_region() {
        let grid: Vec<usize> = (200..=2000).step_by(150).collect();
        let report = eps1_decay_scan(&grid, 0.05, 0.1);
        assert!(report.pass, "slope {}, valid_from {:?}", report.slope, report.valid_from);
        assert!(report.slope < 0.0);
        // The balance condition excludes the small-n prefix.
        assert!(report.valid_from.unwrap() > 200);
    }

    #[test]
    fn small_sphere_extremes() {
        let (_, cert) = ideal_bb84_source();
        let n = 3;
        let bases = BitString::from_bits(&[0, 1, 0]);
        let h = BitString::from_bits(&[1, 0, 1]);
        let all_positions = [0usize, 1, 2];
        // Threshold zero includes every pattern: the identity.
        let full = small_sphere_projector(&cert, &bases, &h, &all_positions, 0).unwrap();
        assert!(full.matrix().sub(&ComplexMatrix::identity(1 << n)).max_abs() < 1e-9);
        // Threshold beyond the positions: empty sum.
        let empty = small_sphere_projector(&cert, &bases, &h, &all_positions, 4).unwrap();
        assert!(empty.matrix().max_abs() < 1e-12);
    }

    #[test]
    fn small_sphere_rank_and_idempotency() {
        let (_, cert) = ideal_bb84_source();
        let bases = BitString::from_bits(&[0, 1, 1]);
        let h = BitString::from_bits(&[0, 0, 1]);
        let positions = [0usize, 1, 2];
        let proj = small_sphere_projector(&cert, &bases, &h, &positions, 2).unwrap();
        let m = proj.matrix();
        assert!(m.matmul(m).sub(m).max_abs() < 1e-9);
        assert!(m.hermiticity_residual() < 1e-9);
        // Patterns at distance >= 2 from h over 3 positions: C(3,2) + C(3,3) = 4.
        assert!((m.trace().re - 4.0).abs() < 1e-9);
        // Same threshold for a tilted source still yields a projector.
        let (_, tilted) = build_from_distributions(
            &AngularDistribution::delta(0.0),
            &AngularDistribution::delta(FRAC_PI_4 + 0.05),
        )
        .unwrap();
        let proj2 = small_sphere_projector(&tilted, &bases, &h, &positions, 2).unwrap();
        let m2 = proj2.matrix();
        assert!(m2.matmul(m2).sub(m2).max_abs() < 1e-9);
        assert!((m2.trace().re - 4.0).abs() < 1e-9);
    }

    fn sandwich_operator(
        cert: &QuasiPerfectCertificate,
        basis: &BitString,
        h: &BitString,
        rng: &mut ChaCha8Rng,
    ) -> MeasurementOperator {
        // Ptilde^h M Ptilde^h for a random PSD M is supported within the
        // distance-0 sphere around h.
        let n = basis.len();
        let dim = 1usize << n;
        let a = ComplexMatrix::from_fn(dim, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let psd = a.adjoint().matmul(&a);
        let p = tilde_pattern_projector(cert, basis, h.as_word()).unwrap();
        MeasurementOperator::new(p.matmul(&psd).matmul(&p)).unwrap()
    }

    #[test]
    fn independence_worked_example() {
        // n = 3, F empty, K = [111]: d_w = 3, so distance threshold 1 is in
        // range and the key-averaged traces cannot depend on the key.
        let (src, cert) = ideal_bb84_source();
        let f = Gf2Matrix::empty(3);
        let k = Gf2Matrix::parse_rows(&["111"]).unwrap();
        assert_eq!(joint_min_weight(&f, &k).unwrap(), 3);
        let basis = BitString::from_bits(&[0, 1, 0]);
        let h = BitString::from_bits(&[1, 1, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let x = sandwich_operator(&cert, &basis, &h, &mut rng);
        let report =
            key_independence_check(&f, &k, &src, &cert, &basis, &h, 1, &x, 1e-9).unwrap();
        assert!(report.hypothesis_ok, "residual {}", report.hypothesis_residual);
        assert!(report.pass, "spread {}", report.max_spread);
        assert!(report.max_spread < 1e-10);
    }

    #[test]
    fn independence_zero_operator_is_trivial() {
        let (src, cert) = ideal_bb84_source();
        let f = Gf2Matrix::empty(3);
        let k = Gf2Matrix::parse_rows(&["111"]).unwrap();
        let basis = BitString::from_bits(&[0, 0, 1]);
        let h = BitString::from_bits(&[0, 0, 0]);
        let x = MeasurementOperator::new(ComplexMatrix::zeros(8)).unwrap();
        let report =
            key_independence_check(&f, &k, &src, &cert, &basis, &h, 1, &x, 1e-9).unwrap();
        assert!(report.pass);
        assert!(report.max_spread < 1e-15);
    }

    #[test]
    fn independence_with_tilted_source() {
        let (src, cert) = build_from_distributions(
            &AngularDistribution::delta(0.0),
            &AngularDistribution::delta(FRAC_PI_4 + 0.04),
        )
        .unwrap();
        let f = Gf2Matrix::parse_rows(&["1111"]).unwrap();
        let k = Gf2Matrix::parse_rows(&["1100", "0110"]).unwrap();
        let d_w = joint_min_weight(&f, &k).unwrap();
        assert!(d_w >= 2);
        let basis = BitString::from_bits(&[1, 0, 1, 0]);
        let h = BitString::from_bits(&[0, 1, 1, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let x = sandwich_operator(&cert, &basis, &h, &mut rng);
        let report =
            key_independence_check(&f, &k, &src, &cert, &basis, &h, d_w / 2, &x, 1e-9).unwrap();
        assert!(report.hypothesis_ok);
        assert!(report.pass, "spread {}", report.max_spread);
    }

    #[test]
    fn independence_rejects_oversized_threshold() {
        let (src, cert) = ideal_bb84_source();
        let f = Gf2Matrix::empty(3);
        let k = Gf2Matrix::parse_rows(&["111"]).unwrap();
        let basis = BitString::from_bits(&[0, 1, 0]);
        let h = BitString::from_bits(&[1, 1, 0]);
        let x = MeasurementOperator::new(ComplexMatrix::zeros(8)).unwrap();
        // d_w = 3, so thresholds above 1 violate the precondition.
        let err = key_independence_check(&f, &k, &src, &cert, &basis, &h, 2, &x, 1e-9).unwrap_err();
        assert!(matches!(err, AnalysisError::ThresholdTooWide { threshold: 2, d_w: 3 }));
    }

    #[test]
    fn independence_flags_wide_support() {
        // An operator spread across every pattern violates the hypothesis
        // and must surface as a precondition failure, not an independence one.
        let (src, cert) = ideal_bb84_source();
        let f = Gf2Matrix::empty(3);
        let k = Gf2Matrix::parse_rows(&["111"]).unwrap();
        let basis = BitString::from_bits(&[0, 1, 0]);
        let h = BitString::from_bits(&[1, 1, 0]);
        let x = MeasurementOperator::new(ComplexMatrix::identity(8)).unwrap();
        let report =
            key_independence_check(&f, &k, &src, &cert, &basis, &h, 1, &x, 1e-9).unwrap();
        assert!(!report.hypothesis_ok);
        assert!(!report.pass);
    }

    #[test]
    fn reliability_experiment_small_grid() {
        let (src, cert) = ideal_bb84_source();
        let params =
            block_params(100, 10, 2, 0.02, 0.005, 1.0, 0.2, ProtocolMode::Bb84, 61).unwrap();
        let channel = ChannelModel::new(0.0, 0.015).unwrap();
        let rel = reliability_experiment(&params, &src, &cert, &channel, 300).unwrap();
        assert!(rel.report.pass, "empirical {} vs bound {}", rel.report.empirical, rel.report.bound);
        assert_eq!(rel.guarantee_violations, 0);
        assert!(rel.completed > 0);
    }

    #[test]
    fn entropy_experiment_no_attack() {
        let (src, cert) = ideal_bb84_source();
        let params =
            block_params(40, 5, 3, 1.0 / 40.0, 0.5 / 40.0, 1.5, 0.2, ProtocolMode::Bb84, 62)
                .unwrap();
        let report = entropy_vs_bound_experiment(
            &params,
            &src,
            &cert,
            &ChannelModel::noiseless(),
            &AttackStrategy::None,
            4000,
            true,
        )
        .unwrap();
        assert!(report.pass);
        // Honest sessions leave the key independent of every view.
        assert!((report.empirical_entropy - 3.0).abs() < report.band + 0.05);
    }

    #[test]
    fn entropy_experiment_aborted_sessions_have_uniform_keys() {
        // Force aborts by a tiny threshold under depolarizing noise: the
        // abort keys are uniform so the conditional entropy stays at m.
        let (src, cert) = ideal_bb84_source();
        let params =
            block_params(40, 5, 3, 1.0 / 40.0, 0.5 / 40.0, 1.5, 0.2, ProtocolMode::Bb84, 63)
                .unwrap();
        let channel = ChannelModel::new(0.0, 0.8).unwrap();
        let report = entropy_vs_bound_experiment(
            &params,
            &src,
            &cert,
            &channel,
            &AttackStrategy::None,
            3000,
            true,
        )
        .unwrap();
        assert!(report.pass);
        assert!((report.empirical_entropy - 3.0).abs() < report.band + 0.08);
    }

    #[test]
    fn entropy_experiment_intercept_resend() {
        let (src, cert) = ideal_bb84_source();
        let params =
            block_params(40, 5, 3, 1.0 / 40.0, 0.5 / 40.0, 1.5, 0.2, ProtocolMode::Bb84, 64)
                .unwrap();
        let attack = AttackStrategy::InterceptResend { basis_policy: BasisPolicy::Random };
        let report = entropy_vs_bound_experiment(
            &params,
            &src,
            &cert,
            &ChannelModel::noiseless(),
            &attack,
            3000,
            true,
        )
        .unwrap();
        // The desk-scale floor is far below zero, so the content of the check
        // is that the report is well-formed and the bound direction holds.
        assert!(report.pass);
        assert!(report.floor < 0.0);
        assert!(report.empirical_entropy > 0.0);
    }

    #[test]
    fn batch_results_are_order_deterministic() {
        let (src, cert) = ideal_bb84_source();
        let params =
            block_params(40, 5, 2, 1.0 / 40.0, 0.5 / 40.0, 1.5, 0.2, ProtocolMode::Bb84, 65)
                .unwrap();
        let channel = ChannelModel::new(0.1, 0.05).unwrap();
        let a = run_batch(&params, &src, &cert, &channel, &AttackStrategy::None, 50, true).unwrap();
        let b = run_batch(&params, &src, &cert, &channel, &AttackStrategy::None, 50, true).unwrap();
        let rows_a: Vec<String> = a.iter().enumerate().map(|(i, o)| o.csv_row(i as u64)).collect();
        let rows_b: Vec<String> = b.iter().enumerate().map(|(i, o)| o.csv_row(i as u64)).collect();
        assert_eq!(rows_a, rows_b);
    }

    #[test]
    fn small_sphere_respects_dimension_cap() {
        let (_, cert) = ideal_bb84_source();
        let bases = BitString::zeros(11);
        let h = BitString::zeros(11);
        let err = small_sphere_projector(&cert, &bases, &h, &[0], 1).unwrap_err();
        assert!(matches!(err, AnalysisError::BlockTooLarge(11, 10)));
    }

    #[test]
    fn randomized_independence_instances() {
        // A batch of randomized tiny instances across sources and codes.
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let sources = [
            ideal_bb84_source(),
            build_from_distributions(
                &AngularDistribution::delta(0.0),
                &AngularDistribution::delta(FRAC_PI_4 - 0.03),
            )
            .unwrap(),
        ];
        for trial in 0..20 {
            let (src, cert) = &sources[trial % sources.len()];
            let n = 3 + (rng.random::<u64>() % 3) as usize; // 3..=5
            // Random independent stacked rows: retry until independent.
            let (f, k) = loop {
                let f_rows = (rng.random::<u64>() % 2) as usize;
                let mut rows = Vec::new();
                for _ in 0..f_rows + 1 {
                    rows.push(BitString::random(n, &mut rng));
                }
                let f = Gf2Matrix::new(rows[..f_rows].to_vec(), n);
                let k = Gf2Matrix::new(rows[f_rows..].to_vec(), n);
                if k.row(0).is_zero() {
                    continue;
                }
                if f.stack(&k).has_independent_rows() {
                    break (f, k);
                }
            };
            let d_w = joint_min_weight(&f, &k).unwrap();
            if d_w < 2 {
                continue;
            }
            let basis = BitString::random(n, &mut rng);
            let h = BitString::random(n, &mut rng);
            let x = sandwich_operator(cert, &basis, &h, &mut rng);
            let report =
                key_independence_check(&f, &k, src, cert, &basis, &h, d_w / 2, &x, 1e-9)
                    .unwrap();
            assert!(report.hypothesis_ok, "trial {trial}");
            assert!(report.pass, "trial {trial}: spread {}", report.max_spread);
        }
    }

    #[test]
    fn eigen_confirms_projector_rank() {
        // Cross-check the small-sphere rank through the spectrum.
        let (_, cert) = ideal_bb84_source();
        let bases = BitString::from_bits(&[0, 1]);
        let h = BitString::from_bits(&[1, 0]);
        let proj = small_sphere_projector(&cert, &bases, &h, &[0, 1], 1).unwrap();
        let (eigs, _) = hermitian_eigen(proj.matrix()).unwrap();
        let rank = eigs.iter().filter(|&&l| l > 0.5).count();
        assert_eq!(rank as f64, proj.matrix().trace().re.round());
        assert!(eigs.iter().all(|&l| l < 1.0 + 1e-9 && l > -1e-9));
    }

    #[test]
    fn block_repetition_code_integrates_with_checks() {
        // The long-session construction satisfies the operating conditions it
        // is built for.
        let code = LinearCode::block_repetition(20, 10).unwrap();
        let privacy = build_block_pattern_privacy(20, 10, 2, 10, 5).unwrap();
        assert!(code.parity_check().stack(privacy.matrix()).has_independent_rows());
        assert!(privacy.d_w() >= 10);
    }
}
