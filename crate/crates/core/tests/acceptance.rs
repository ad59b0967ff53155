//! Acceptance suite. Each test checks one criterion and prints a single
//! `[PASS]` / `[FAIL]` line; run with `-- --nocapture --test-threads=1` to see
//! them in order.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semrdp::model::TransformDirection;
use semrdp::simulate::transform_residual;
use semrdp::*;

mod tolerance {
    /// Closed form vs oracle, bits.
    pub const SANDWICH: f64 = 0.02;
    /// Oracle grid step for the sandwich sweep.
    pub const ORACLE_RESOLUTION: f64 = 0.01;
    /// Closed form at q = 0 vs the three-branch Bernoulli function.
    pub const REDUCTION: f64 = 1e-12;
    /// Spot value of the closed form.
    pub const SPOT_CLOSED: f64 = 2e-4;
    /// Spot value, oracle vs closed form.
    pub const SPOT_ORACLE: f64 = 0.01;
    /// Rate regarded as zero when bisecting for the plateau.
    pub const ZERO_RATE: f64 = 1e-3;
    /// Plateau location.
    pub const THRESHOLD: f64 = 0.01;
    /// Standard errors allowed for Monte Carlo agreement.
    pub const SIGMAS: f64 = 4.0;
    /// Slack for monotonicity and ordering comparisons.
    pub const MONOTONE: f64 = 1e-9;
    /// Chain-rule residuals.
    pub const CHAIN_RULE: f64 = 1e-9;
}

const INF: f64 = f64::INFINITY;
const PI_X: f64 = 0.2;
const QS: [f64; 3] = [0.0, 0.1, 0.2];
const PS: [f64; 4] = [0.02, 0.05, 0.1, INF];
const GRID_POINTS: usize = 20;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id} ({name}): {detail}");
}

fn d_grid(q: f64) -> Vec<f64> {
    let (lo, hi) = (q + 0.01, 0.45);
    (0..GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect()
}

/// One sweep point of the criterion-1 grid.
#[derive(Debug, Clone, Copy)]
struct GridPoint {
    q: f64,
    perception: f64,
    distortion: f64,
    closed: f64,
    oracle: f64,
}

/// `[q][P][D]`
fn sandwich_grid() -> &'static Vec<Vec<Vec<GridPoint>>> {
    static GRID: OnceLock<Vec<Vec<Vec<GridPoint>>>> = OnceLock::new();
    GRID.get_or_init(|| {
        QS.iter()
            .map(|&q| {
                let model = dsbs_model(q, PI_X).unwrap();
                PS.iter()
                    .map(|&perception| {
                        d_grid(q)
                            .into_iter()
                            .map(|distortion| GridPoint {
                                q,
                                perception,
                                distortion,
                                closed: theorem2_rate(&model, distortion, perception).unwrap(),
                                oracle: oracle_min_rate(
                                    &model,
                                    distortion,
                                    perception,
                                    tolerance::ORACLE_RESOLUTION,
                                )
                                .unwrap()
                                .rate,
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    })
}

fn seeded_laws() -> Vec<DecoderLaw> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a55);
    (0..20)
        .map(|_| DecoderLaw::new(rng.gen(), rng.gen(), rng.gen(), rng.gen()).unwrap())
        .collect()
}

#[test]
fn criterion_1_closed_form_oracle_sandwich() {
    let mut worst: Option<GridPoint> = None;
    let mut failures = 0;
    for point in sandwich_grid().iter().flatten().flatten() {
        let gap = (point.closed - point.oracle).abs();
        if gap > tolerance::SANDWICH {
            failures += 1;
        }
        if worst.map_or(true, |w| gap > (w.closed - w.oracle).abs()) {
            worst = Some(*point);
        }
    }
    let w = worst.unwrap();
    let detail = format!(
        "{failures}/240 points exceed {} bits; worst gap {:.4} at q={}, P={}, D={:.4} \
         (closed {:.4}, oracle {:.4})",
        tolerance::SANDWICH,
        (w.closed - w.oracle).abs(),
        w.q,
        w.perception,
        w.distortion,
        w.closed,
        w.oracle
    );
    report(1, "closed-form/oracle sandwich", failures == 0, &detail);
    assert_eq!(failures, 0, "{detail}");
}

#[test]
fn criterion_2_direct_observation_reduction() {
    let model = dsbs_model(0.0, PI_X).unwrap();
    let mut failures = Vec::new();
    for &perception in &PS {
        for distortion in d_grid(0.0) {
            let closed = theorem2_rate(&model, distortion, perception).unwrap();
            let piecewise = rdpf_piecewise(PI_X, distortion, perception).unwrap();
            if (closed - piecewise).abs() > tolerance::REDUCTION {
                failures.push((perception, distortion, closed, piecewise));
            }
        }
    }
    let detail = match failures.first() {
        None => "all 80 points agree within 1e-12".to_string(),
        Some((p, d, c, w)) => format!(
            "{}/80 points differ; first at P={p}, D={d:.4}: closed {c:.4} vs piecewise {w:.4}",
            failures.len()
        ),
    };
    report(2, "direct-observation reduction", failures.is_empty(), &detail);
    assert!(failures.is_empty(), "{detail}");
}

#[test]
fn criterion_3_spot_values() {
    let model = dsbs_model(0.1, PI_X).unwrap();
    let closed = theorem2_rate(&model, 0.2, 0.05).unwrap();
    let oracle = oracle_min_rate(&model, 0.2, 0.05, tolerance::ORACLE_RESOLUTION)
        .unwrap()
        .rate;
    let closed_ok = (closed - 0.1937).abs() <= tolerance::SPOT_CLOSED;
    let oracle_ok = (oracle - closed).abs() <= tolerance::SPOT_ORACLE;
    let zero_ok = [0.0, 0.02, 0.05, 0.1, 0.2, 0.3, INF]
        .iter()
        .all(|&p| theorem2_rate(&model, 0.26, p).unwrap() == 0.0);
    let pass = closed_ok && oracle_ok && zero_ok;
    let detail = format!(
        "closed {closed:.6} (ok: {closed_ok}), oracle {oracle:.6} (within 0.01: {oracle_ok}), \
         zero at D=0.26 for all P: {zero_ok}"
    );
    report(3, "spot values", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_4_zero_rate_threshold() {
    let model = dsbs_model(0.1, PI_X).unwrap();
    let target = model.pi_x_prime().unwrap();
    let zero_rate = |d: f64, p: f64| {
        oracle_min_rate(&model, d, p, tolerance::ORACLE_RESOLUTION)
            .unwrap()
            .rate
            <= tolerance::ZERO_RATE
    };
    let mut thresholds = Vec::new();
    for p in [0.05, INF] {
        let (mut lo, mut hi) = (model.q1(), 0.5);
        assert!(!zero_rate(lo, p) && zero_rate(hi, p));
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if zero_rate(mid, p) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        thresholds.push(hi);
    }
    let side = evaluate_decoder(&model, &DecoderLaw::side_information()).unwrap();
    let side_ok = side.rate == 0.0 && (side.distortion - 0.26).abs() < 1e-15 && side.perception.abs() < 1e-15;
    let located = thresholds
        .iter()
        .all(|t| (t - target).abs() <= tolerance::THRESHOLD);
    let pass = side_ok && located;
    let detail = format!(
        "thresholds {:?} vs pi_x' = {target}; side-information decoder (R, D, P) = ({}, {}, {})",
        thresholds, side.rate, side.distortion, side.perception
    );
    report(4, "zero-rate threshold", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_5_distortion_transform() {
    let q = 0.1;
    let model = dsbs_model(q, PI_X).unwrap();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for (i, law) in seeded_laws().iter().enumerate() {
        let seed = 1000 + i as u64;
        let blocks = sample_block(&model, 100_000, seed);
        let shat = apply_decoder(law, &blocks.x, &blocks.y, seed).unwrap();
        let residual = transform_residual(&blocks.s, &blocks.x, &shat, q).unwrap();
        worst = worst.max(residual.mean.abs() / residual.std_error);
        if !residual.within(0.0, tolerance::SIGMAS) {
            failures += 1;
        }
    }
    // the linear map itself round-trips
    let d = distortion_transform(0.2, q, TransformDirection::SemanticToObserved).unwrap();
    let back = distortion_transform(d, q, TransformDirection::ObservedToSemantic).unwrap();
    let pass = failures == 0 && (back - 0.2).abs() < 1e-12;
    let detail = format!("{failures}/20 laws outside 4 SE; worst |mean|/SE = {worst:.2}");
    report(5, "distortion transform", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_6_monotonicity_and_ordering() {
    let grid = sandwich_grid();
    let mut d_violations = 0;
    let mut p_violations = 0;
    for per_q in grid {
        for sweep in per_q {
            for w in sweep.windows(2) {
                if w[1].closed > w[0].closed + tolerance::MONOTONE {
                    d_violations += 1;
                }
                if w[1].oracle > w[0].oracle + tolerance::MONOTONE {
                    d_violations += 1;
                }
            }
        }
        for k in 0..GRID_POINTS {
            for pair in per_q.windows(2) {
                let (tight, loose) = (pair[0][k], pair[1][k]);
                if loose.closed > tight.closed + tolerance::MONOTONE {
                    p_violations += 1;
                }
                if loose.oracle > tight.oracle + tolerance::MONOTONE {
                    p_violations += 1;
                }
            }
        }
    }

    // 51-point sweeps over [0, 0.5]
    let sweep: Vec<f64> = (0..51).map(|i| i as f64 * 0.01).collect();
    let models: Vec<_> = QS.iter().map(|&q| dsbs_model(q, PI_X).unwrap()).collect();
    let mut q_order = 0;
    for &d in sweep.iter().filter(|&&d| d >= 0.2) {
        let r: Vec<f64> = models
            .iter()
            .map(|m| theorem2_rate(m, d, INF).unwrap())
            .collect();
        if r[0] > r[1] + tolerance::MONOTONE || r[1] > r[2] + tolerance::MONOTONE {
            q_order += 1;
        }
    }
    let mut p_order = 0;
    for &d in sweep.iter().filter(|&&d| d >= 0.1) {
        let r: Vec<f64> = [0.02, 0.05, 0.1]
            .iter()
            .map(|&p| theorem2_rate(&models[1], d, p).unwrap())
            .collect();
        if r[1] > r[0] + tolerance::MONOTONE || r[2] > r[1] + tolerance::MONOTONE {
            p_order += 1;
        }
    }
    let pass = d_violations == 0 && p_violations == 0 && q_order == 0 && p_order == 0;
    let detail = format!(
        "violations: in D {d_violations}, in P {p_violations}, ordering by q {q_order}, ordering by P {p_order}"
    );
    report(6, "monotonicity and ordering", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_7_simulation_consistency() {
    let model = dsbs_model(0.1, PI_X).unwrap();
    let mut failures = Vec::new();
    for (i, law) in seeded_laws().iter().enumerate() {
        let exact = evaluate_decoder(&model, law).unwrap();
        let cfg = TrialConfig::new(10_000, 10, 2000 + i as u64).unwrap();
        let report = simulate_decoder(&model, law, &cfg).unwrap();
        if !report.distortion.within(exact.distortion, tolerance::SIGMAS) {
            failures.push(format!("law {i}: D {:?} vs {}", report.distortion, exact.distortion));
        }
        if !report.p_marginal.within(exact.perception, tolerance::SIGMAS) {
            failures.push(format!("law {i}: P {:?} vs {}", report.p_marginal, exact.perception));
        }
    }
    let detail = if failures.is_empty() {
        "20 laws, D and P_marginal within 4 SE of exact".to_string()
    } else {
        failures.join("; ")
    };
    report(7, "simulation consistency", failures.is_empty(), &detail);
    assert!(failures.is_empty(), "{detail}");
}

#[test]
fn criterion_8_binning_trend() {
    let model = dsbs_model(0.1, PI_X).unwrap();
    let base = theorem2_rate(&model, 0.2, INF).unwrap();
    let law = DecoderLaw::copy_observation();
    let estimates: Vec<Estimate> = [0.2, 0.4, 0.8]
        .iter()
        .map(|margin| {
            let r1 = base + margin;
            let cfg = TrialConfig::new(12, 200, 77).unwrap().with_rates(r1, r1).unwrap();
            random_binning_trial(&model, &cfg, &law).unwrap().distortion
        })
        .collect();
    let pass = estimates.windows(2).all(|w| {
        let se = w[0].std_error.hypot(w[1].std_error);
        w[1].mean <= w[0].mean + se
    });
    let detail = format!(
        "mean D at margins +0.2/+0.4/+0.8: {}",
        estimates
            .iter()
            .map(|e| format!("{:.4}±{:.4}", e.mean, e.std_error))
            .collect::<Vec<_>>()
            .join(", ")
    );
    report(8, "binning achievability trend", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_9_chain_rule_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let weights: Vec<f64> = (0..16).map(|_| rng.gen::<f64>().powi(3)).collect();
        let total: f64 = weights.iter().sum();
        let joint = JointDistribution::new(
            ["S", "X", "Y", "Z"],
            vec![2; 4],
            weights.iter().map(|w| w / total).collect(),
        )
        .unwrap();
        let terms = chain_rule_decomposition(&joint).unwrap();
        worst = worst
            .max(terms.difference_residual().abs())
            .max(terms.entropy_residual().abs());
    }
    let pass = worst < tolerance::CHAIN_RULE;
    let detail = format!("max residual over 1000 joints: {worst:.2e}");
    report(9, "chain-rule identities", pass, &detail);
    assert!(pass, "{detail}");
}
