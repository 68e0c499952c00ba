//! Acceptance suite: one test per release criterion, each printing a
//! `ACCEPTANCE <id> ... PASS` line (visible with `--nocapture`).
//!
//! Every tolerance is pinned here; the tests are deterministic via fixed
//! seeds, so a failure is a regression, not noise.

use num_complex::Complex64;
use qkdlab_core::adversary::{
    helstrom_bound, optimal_binary_measurement, AttackStrategy, BasisPolicy, ChannelModel,
};
use qkdlab_core::analysis::{
    binomial_tail_bound, entropy_vs_bound_experiment, eps1_decay_scan, key_independence_check,
    reliability_experiment, run_batch, tilde_pattern_projector,
};
use qkdlab_core::codes::{
    asymptotic_rate, binary_entropy, build_privacy_matrix, gilbert_varshamov_construct,
    joint_min_weight, syndrome_decode, Gf2Matrix,
};
use qkdlab_core::protocol::{block_params, ProtocolMode};
use qkdlab_core::quantum::sample_povm;
use qkdlab_core::source::{
    build_from_distributions, ideal_bb84_source, verify_certificate, AngularDistribution,
};
use qkdlab_core::{BitString, ComplexMatrix, DensityMatrix, MeasurementOperator};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_4;
use std::process::Command;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id:02} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

#[test]
fn acceptance_01_key_rate_reproduction() {
    let rate = asymptotic_rate(0.05, 0.0, 0.0, 0.0).unwrap();
    let pass = (rate - 0.0620).abs() <= 0.0005;
    report(1, "key rate at the 5% operating point", pass, &format!("rate = {rate:.6}"));
}

#[test]
fn acceptance_02_ideal_source_certification() {
    let (model, cert) = ideal_bb84_source();
    let rep = verify_certificate(&model, &cert, 1e-12).unwrap();
    let pass = rep.pass
        && rep.max_residual() < 1e-12
        && rep.recomputed_beta < 1e-12
        && rep.recomputed_gamma < 1e-12;
    report(
        2,
        "ideal source certificate",
        pass,
        &format!(
            "max residual = {:.2e}, recovered = ({:.2e}, {:.2e})",
            rep.max_residual(),
            rep.recomputed_beta,
            rep.recomputed_gamma
        ),
    );
}

#[test]
fn acceptance_03_spread_source_certification() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_residual = 0.0f64;
    let mut worst_param_gap = 0.0f64;
    for trial in 0..20 {
        let draw_dist = |rng: &mut ChaCha8Rng, center: f64| {
            let offset = 0.2 * rng.random::<f64>() - 0.1;
            let spread = 0.02 + 0.18 * rng.random::<f64>();
            if rng.random::<bool>() {
                AngularDistribution::uniform(center + offset, spread)
            } else {
                AngularDistribution::von_mises_like(center + offset, spread)
            }
        };
        let p0 = draw_dist(&mut rng, 0.0);
        let p1 = draw_dist(&mut rng, FRAC_PI_4);
        let (model, cert) = build_from_distributions(&p0, &p1).unwrap();
        let rep = verify_certificate(&model, &cert, 1e-7).unwrap();
        assert!(rep.pass, "trial {trial}: failed {:?}", rep.failed_labels());
        worst_residual = worst_residual.max(rep.max_residual());

        // Closed forms from the construction's moments.
        let phi = cert.phi.unwrap();
        let beta_closed = p0.shifted_sin2_moment(phi[0]).max(p1.shifted_sin2_moment(phi[1]));
        let gamma_closed = (2.0 * (phi[1] - phi[0] - FRAC_PI_4).sin().abs())
            .min(2.0 * (phi[0] - phi[1] - FRAC_PI_4).sin().abs());
        worst_param_gap = worst_param_gap
            .max((rep.recomputed_beta - beta_closed).abs())
            .max((rep.recomputed_gamma - gamma_closed).abs());
    }
    let pass = worst_param_gap < 1e-6;
    report(
        3,
        "spread-source certification over 20 randomized pairs",
        pass,
        &format!("worst residual = {worst_residual:.2e}, worst closed-form gap = {worst_param_gap:.2e}"),
    );
}

#[test]
fn acceptance_04_optimal_distinguishing() {
    let one = Complex64::new(1.0, 0.0);
    let zero_state = DensityMatrix::pure(&[one, Complex64::ZERO]).unwrap();
    let plus_state = DensityMatrix::pure(&[one, one]).unwrap();
    let povm = optimal_binary_measurement(&zero_state, &plus_state).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let trials = 100_000u64;
    let mut correct = 0u64;
    for _ in 0..trials {
        let which = rng.random::<bool>() as usize;
        let rho = if which == 0 { &zero_state } else { &plus_state };
        if sample_povm(&povm, rho, &mut rng).unwrap() == which {
            correct += 1;
        }
    }
    let single = correct as f64 / trials as f64;
    let mut pass = (single - 0.8536).abs() <= 0.005;
    let mut detail = format!("single-copy success = {single:.4}");

    // Product strategies over m copies never beat the multi-copy ceiling.
    let pairs = [
        (zero_state.clone(), plus_state.clone()),
        (
            DensityMatrix::pure(&[Complex64::new(0.8, 0.0), Complex64::new(0.6, 0.0)]).unwrap(),
            DensityMatrix::pure(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap(),
        ),
    ];
    for (rho0, rho1) in &pairs {
        let pair_povm = optimal_binary_measurement(rho0, rho1).unwrap();
        for m in [2u32, 4, 8] {
            let bound = helstrom_bound(rho0, rho1, m).unwrap();
            let sub_trials = 30_000u64;
            let mut all_correct = 0u64;
            for _ in 0..sub_trials {
                let ok = (0..m).all(|_| {
                    let which = rng.random::<bool>() as usize;
                    let rho = if which == 0 { rho0 } else { rho1 };
                    sample_povm(&pair_povm, rho, &mut rng).unwrap() == which
                });
                if ok {
                    all_correct += 1;
                }
            }
            let freq = all_correct as f64 / sub_trials as f64;
            let sigma = (bound * (1.0 - bound) / sub_trials as f64).sqrt().max(1e-5);
            if freq > bound + 3.0 * sigma {
                pass = false;
                detail = format!("m = {m}: {freq:.4} exceeds ceiling {bound:.4}");
            }
        }
    }
    report(4, "optimal distinguishing rates", pass, &detail);
}

#[test]
fn acceptance_05_intercept_resend_signature() {
    let params =
        block_params(256, 16, 2, 1.0 / 256.0, 0.5 / 256.0, 1.0, 0.2, ProtocolMode::Bb84, 505)
            .unwrap();
    let (src, cert) = ideal_bb84_source();
    let attack = AttackStrategy::InterceptResend { basis_policy: BasisPolicy::Random };
    let outcomes =
        run_batch(&params, &src, &cert, &ChannelModel::noiseless(), &attack, 200, true).unwrap();
    let mean = qkdlab_core::analysis::mean_test_error_rate(&outcomes, 256).unwrap();
    let pass = (mean - 0.25).abs() <= 0.02;
    report(
        5,
        "intercept-resend error signature over 200 sessions",
        pass,
        &format!("mean d_sp/n = {mean:.4}"),
    );
}

#[test]
fn acceptance_06_reliability_grid() {
    let (src, cert) = ideal_bb84_source();
    let sessions = 10_000u64;
    let mut detail = String::new();
    let mut pass = true;
    for (n, m) in [(200usize, 2usize), (500, 4), (1000, 8)] {
        let delta_p = 3.0 / n as f64;
        let eps = 1.0 / n as f64;
        let params =
            block_params(n, 10, m, delta_p, eps, 1.0, 0.2, ProtocolMode::Bb84, 606 + n as u64)
                .unwrap();
        for q_factor in [0.0f64, 0.5, 1.0] {
            let channel = ChannelModel::new(0.0, q_factor * delta_p).unwrap();
            let rel = reliability_experiment(&params, &src, &cert, &channel, sessions).unwrap();
            if !rel.report.pass || rel.guarantee_violations > 0 {
                pass = false;
            }
            detail = format!(
                "last point n={n} q={:.5}: empirical={:.2e} bound={:.3} violations={}",
                q_factor * delta_p,
                rel.report.empirical,
                rel.report.bound,
                rel.guarantee_violations
            );
        }
    }
    report(6, "reliability bound over the 9-point grid", pass, &detail);
}

#[test]
fn acceptance_07_binomial_tail_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut checked = 0u32;
    let mut violations = 0u32;
    while checked < 200 {
        let r = 0.05 + 0.75 * rng.random::<f64>();
        let p = r + (0.94 - r) * rng.random::<f64>();
        let t = (1.0 - p) * (0.05 + 0.9 * rng.random::<f64>());
        if p + t >= 1.0 {
            continue;
        }
        let n_r = 1 + (rng.random::<u64>() % 20) as usize;
        let n_p = 1 + (rng.random::<u64>() % (40 - n_r as u64)) as usize;
        let (exact, bound) = binomial_tail_bound(p, r, t, n_r, n_p).unwrap();
        if exact > bound + 1e-12 {
            violations += 1;
        }
        checked += 1;
    }
    report(
        7,
        "double-binomial tail inequality on 200 tuples",
        violations == 0,
        &format!("violations = {violations}"),
    );
}

#[test]
fn acceptance_08_coding_suite() {
    // (7, 3) construction with exhaustively verified distance.
    let code73 = gilbert_varshamov_construct(7, 1, 808).unwrap();
    let mut pass = code73.dimension() == 3 && code73.minimum_distance().unwrap() >= 3;

    // Exhaustive decoding of every correctable error for short codes.
    for (n, t, seed) in [(7usize, 1usize, 1u64), (10, 1, 2), (12, 2, 3), (15, 2, 4)] {
        let code = gilbert_varshamov_construct(n, t, seed).unwrap();
        let gen = code.generator();
        let k = gen.rows();
        for mask in 0u64..(1 << k) {
            let mut x = BitString::zeros(n);
            for j in 0..k {
                if (mask >> j) & 1 == 1 {
                    x.xor_assign(gen.row(j));
                }
            }
            let s = code.syndrome(&x).unwrap();
            // All error patterns of weight <= t_max.
            let mut stack = vec![(BitString::zeros(n), 0usize, 0usize)];
            while let Some((e, start, w)) = stack.pop() {
                let y = x.xor(&e);
                if syndrome_decode(&y, &s, &code).unwrap() != x {
                    pass = false;
                }
                if w < code.t_max() {
                    for pos in start..n {
                        let mut e2 = e.clone();
                        e2.flip(pos);
                        stack.push((e2, pos + 1, w + 1));
                    }
                }
            }
        }
    }

    // Privacy-amplification outputs verified against the exhaustive joint weight.
    let empty = Gf2Matrix::empty(10);
    let pa = build_privacy_matrix(&empty, 2, 5, 5).unwrap();
    pass &= joint_min_weight(&empty, pa.matrix()).unwrap() >= 2;
    let code14 = gilbert_varshamov_construct(14, 1, 6).unwrap();
    let pa14 = build_privacy_matrix(code14.parity_check(), 3, 2, 7).unwrap();
    pass &= joint_min_weight(code14.parity_check(), pa14.matrix()).unwrap() >= 3;

    // Redundancy respects the entropy form of the counting bound.
    let mut worst_gap = f64::NEG_INFINITY;
    for (n, t, seed) in [
        (7usize, 1usize, 10u64),
        (10, 1, 11),
        (12, 2, 12),
        (15, 1, 13),
        (15, 2, 14),
        (18, 2, 15),
        (20, 1, 16),
        (23, 2, 17),
        (24, 2, 18),
    ] {
        let code = gilbert_varshamov_construct(n, t, seed).unwrap();
        let lhs = code.redundancy() as f64 / n as f64;
        let rhs = binary_entropy(2.0 * t as f64 / n as f64).unwrap() + 2.0 / n as f64;
        worst_gap = worst_gap.max(lhs - rhs);
        if lhs > rhs + 1e-12 {
            pass = false;
        }
    }
    report(
        8,
        "coding suite (distance, decoding, privacy rows, rate bound)",
        pass,
        &format!("worst r/n slack = {worst_gap:.4}"),
    );
}

#[test]
fn acceptance_09_key_independence_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let ideal = ideal_bb84_source();
    let tilted = build_from_distributions(
        &AngularDistribution::delta(0.0),
        &AngularDistribution::delta(FRAC_PI_4 + 0.05),
    )
    .unwrap();
    let spread_src = build_from_distributions(
        &AngularDistribution::uniform(0.02, 0.1),
        &AngularDistribution::von_mises_like(FRAC_PI_4 - 0.03, 0.15),
    )
    .unwrap();
    let sources = [&ideal, &tilted, &spread_src];

    // The worked example: n = 3, no parity rows, a single full-weight key row.
    let f3 = Gf2Matrix::empty(3);
    let k3 = Gf2Matrix::parse_rows(&["111"]).unwrap();
    assert_eq!(joint_min_weight(&f3, &k3).unwrap(), 3);
    let basis3 = BitString::from_bits(&[0, 1, 0]);
    let h3 = BitString::from_bits(&[1, 0, 1]);
    let x3 = sandwich(&ideal.1, &basis3, &h3, &mut rng);
    let worked = key_independence_check(&f3, &k3, &ideal.0, &ideal.1, &basis3, &h3, 1, &x3, 1e-9)
        .unwrap();
    let mut pass = worked.pass && worked.max_spread < 1e-9;
    let mut worst = worked.max_spread;

    let mut ran = 0u32;
    while ran < 100 {
        let (src, cert) = sources[(ran % 3) as usize];
        // Mostly small blocks with a top-of-range instance every 16th draw.
        let n = if ran % 16 == 15 {
            7 + (rng.random::<u64>() % 2) as usize // 7..=8
        } else {
            3 + (rng.random::<u64>() % 4) as usize // 3..=6
        };
        let f_rows = (rng.random::<u64>() % 2) as usize;
        let mut rows = Vec::new();
        for _ in 0..=f_rows {
            rows.push(BitString::random(n, &mut rng));
        }
        let f = Gf2Matrix::new(rows[..f_rows].to_vec(), n);
        let k = Gf2Matrix::new(rows[f_rows..].to_vec(), n);
        if k.row(0).is_zero() || !f.stack(&k).has_independent_rows() {
            continue;
        }
        let d_w = joint_min_weight(&f, &k).unwrap();
        if d_w < 2 {
            continue;
        }
        let basis = BitString::random(n, &mut rng);
        let h = BitString::random(n, &mut rng);
        let x = sandwich(cert, &basis, &h, &mut rng);
        let rep = key_independence_check(&f, &k, src, cert, &basis, &h, d_w / 2, &x, 1e-9)
            .unwrap();
        if !rep.pass {
            pass = false;
        }
        worst = worst.max(rep.max_spread);
        ran += 1;
    }
    report(
        9,
        "key independence over 100 randomized instances",
        pass,
        &format!("worst key spread = {worst:.2e}"),
    );
}

// Helper building a measurement operator supported on the pattern h.
fn sandwich(
    cert: &qkdlab_core::QuasiPerfectCertificate,
    basis: &BitString,
    h: &BitString,
    rng: &mut ChaCha8Rng,
) -> MeasurementOperator {
    let dim = 1usize << basis.len();
    let a = ComplexMatrix::from_fn(dim, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let psd = a.adjoint().matmul(&a);
    let p = tilde_pattern_projector(cert, basis, h.as_word()).unwrap();
    MeasurementOperator::new(p.matmul(&psd).matmul(&p)).unwrap()
}


#[test]
fn acceptance_10_privacy_bookkeeping() {
    // Exponential decay of the entropy defect at fixed rate, on the region
    // where the derivation's balance condition holds.
    let grid: Vec<usize> = (200..=2000).step_by(100).collect();
    let scan = eps1_decay_scan(&grid, 0.05, 0.1);
    let mut pass = scan.pass && scan.slope < 0.0;
    let mut detail = format!(
        "slope = {:.3e} on n >= {:?}",
        scan.slope,
        scan.valid_from
    );

    // Coarse-view entropy stays above the floor for honest and attacked runs.
    let (src, cert) = ideal_bb84_source();
    let params =
        block_params(40, 5, 3, 1.0 / 40.0, 0.5 / 40.0, 1.5, 0.2, ProtocolMode::Bb84, 1010)
            .unwrap();
    let honest = entropy_vs_bound_experiment(
        &params,
        &src,
        &cert,
        &ChannelModel::noiseless(),
        &AttackStrategy::None,
        6000,
        true,
    )
    .unwrap();
    pass &= honest.pass && (honest.empirical_entropy - 3.0).abs() < honest.band + 0.05;
    let attack = AttackStrategy::InterceptResend { basis_policy: BasisPolicy::Random };
    let attacked = entropy_vs_bound_experiment(
        &params,
        &src,
        &cert,
        &ChannelModel::noiseless(),
        &attack,
        6000,
        true,
    )
    .unwrap();
    pass &= attacked.pass;
    detail.push_str(&format!(
        "; honest H = {:.3}, attacked H = {:.3} >= floor {:.1}",
        honest.empirical_entropy, attacked.empirical_entropy, attacked.floor
    ));
    report(10, "privacy bookkeeping decay and entropy floor", pass, &detail);
}

#[test]
fn acceptance_11_simulation_determinism() {
    let exe = env!("CARGO_BIN_EXE_qkdlab");
    let dir = std::env::temp_dir().join("qkdlab-acceptance-11");
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("config.json");
    std::fs::write(
        &config_path,
        r#"{
            "source": {"kind": "ideal"},
            "params": {
                "m": 2, "n": 64, "delta_p": 0.015625, "eps": 0.0078125, "eps_n": 1.0,
                "code": {"kind": "block-repetition", "block_len": 8},
                "privacy": {"kind": "block-pattern", "d_min": 4, "seed": 3}
            },
            "channel": {"loss": 0.1, "depolarize": 0.01},
            "attack": "intercept-resend",
            "sessions": 60,
            "seed": 1111
        }"#,
    )
    .unwrap();
    let run = |threads: &str, out: &std::path::Path| {
        let status = Command::new(exe)
            .args(["simulate", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(out)
            .env("QKDLAB_THREADS", threads)
            .output()
            .expect("running the simulator");
        assert!(status.status.success(), "simulate failed: {status:?}");
        std::fs::read(out).unwrap()
    };
    let first = run("1", &dir.join("run1.csv"));
    let second = run("1", &dir.join("run2.csv"));
    let threaded = run("8", &dir.join("run8.csv"));
    let pass = first == second && first == threaded;
    report(
        11,
        "byte-identical CSV across reruns and thread counts",
        pass,
        &format!("{} bytes", first.len()),
    );
}
