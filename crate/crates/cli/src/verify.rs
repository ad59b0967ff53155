use std::fmt::Write as _;

use anyhow::{bail, Result};
use rayon::prelude::*;
use semrdp::simulate::{derive_seed, transform_residual};
use semrdp::{
    apply_decoder, breakpoints, dsbs_model, evaluate_decoder, oracle_min_rate, rdpf_piecewise,
    sample_block, simulate_decoder, theorem2_rate, DecoderLaw, SemanticModel, TrialConfig,
};

use crate::args::{Check, VerifyArgs};
use crate::sweep::{fmt_value, rate_or_inf};

pub const SANDWICH_TOL: f64 = 0.02;
pub const REDUCTION_TOL: f64 = 1e-12;
pub const SPOT_CLOSED_TOL: f64 = 2e-4;
pub const SPOT_ORACLE_TOL: f64 = 0.01;
pub const ZERO_RATE: f64 = 1e-3;
pub const THRESHOLD_TOL: f64 = 0.01;
pub const SIGMAS: f64 = 4.0;
pub const MONOTONE_TOL: f64 = 1e-9;
pub const CONTINUITY_TOL: f64 = 1e-6;

const D_MAX: f64 = 0.45;
const LAWS: usize = 20;
const BISECTIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub q: f64,
    pub perception: f64,
    pub distortion: f64,
    pub closed: f64,
    /// NaN when no check needs the oracle.
    pub oracle: f64,
}

impl CurvePoint {
    pub fn gap(&self) -> f64 {
        (self.closed - self.oracle).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdEstimate {
    pub perception: f64,
    pub estimate: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub check: Check,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationSummary {
    /// Grouped by q, then P, then ascending D.
    pub points: Vec<CurvePoint>,
    pub max_gap: f64,
    pub monotonicity_violations: usize,
    pub thresholds: Vec<ThresholdEstimate>,
    pub verdicts: Vec<Verdict>,
}

impl VerificationSummary {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.verdicts {
            let tag = match v.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let name = format!("{:?}", v.check).to_lowercase();
            writeln!(s, "[{tag}] {name}: {}", v.detail).unwrap();
        }
        writeln!(s, "verdict: {}", if self.passed() { "PASS" } else { "FAIL" }).unwrap();
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("q,P,D,R_closed,R_oracle,gap\n");
        for p in &self.points {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                fmt_value(p.q),
                fmt_value(p.perception),
                fmt_value(p.distortion),
                fmt_value(p.closed),
                fmt_value(p.oracle),
                fmt_value(p.gap())
            )
            .unwrap();
        }
        s
    }
}

fn verdict(check: Check, pass: bool, detail: String) -> Verdict {
    let status = if pass { Status::Pass } else { Status::Fail };
    Verdict { check, status, detail }
}

fn unit(seed: u64, index: u64) -> f64 {
    (derive_seed(seed, index) >> 11) as f64 / (1u64 << 53) as f64
}

/// Decoder laws with uniformly drawn entries.
pub fn seeded_laws(seed: u64, count: usize) -> Vec<DecoderLaw> {
    (0..count as u64)
        .map(|i| {
            DecoderLaw::new(
                unit(seed, 4 * i),
                unit(seed, 4 * i + 1),
                unit(seed, 4 * i + 2),
                unit(seed, 4 * i + 3),
            )
            .expect("unit draws are probabilities")
        })
        .collect()
}

fn d_grid(q: f64, points: usize) -> Vec<f64> {
    let lo = q + 0.01;
    (0..points)
        .map(|i| lo + (D_MAX - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

struct Runner<'a> {
    args: &'a VerifyArgs,
    delta: f64,
}

impl Runner<'_> {
    fn closed(&self, model: &SemanticModel, d: f64, p: f64) -> semrdp::Result<f64> {
        Ok(rate_or_inf(theorem2_rate(model, d, p))? + self.delta)
    }

    fn oracle(&self, model: &SemanticModel, d: f64, p: f64) -> semrdp::Result<f64> {
        rate_or_inf(oracle_min_rate(model, d, p, self.args.resolution).map(|r| r.rate))
    }

    fn grid(&self, with_oracle: bool) -> Result<Vec<CurvePoint>> {
        let mut jobs = Vec::new();
        for &q in &self.args.qs {
            for &p in &self.args.ps {
                for d in d_grid(q, self.args.points) {
                    jobs.push((q, p, d));
                }
            }
        }
        let points = jobs
            .par_iter()
            .map(|&(q, perception, distortion)| {
                let model = dsbs_model(q, self.args.pi_x)?;
                Ok(CurvePoint {
                    q,
                    perception,
                    distortion,
                    closed: self.closed(&model, distortion, perception)?,
                    oracle: if with_oracle {
                        self.oracle(&model, distortion, perception)?
                    } else {
                        f64::NAN
                    },
                })
            })
            .collect::<semrdp::Result<_>>()?;
        Ok(points)
    }

    fn sandwich(&self, points: &[CurvePoint]) -> Verdict {
        let failures = points.iter().filter(|p| p.gap() > SANDWICH_TOL).count();
        let worst = points
            .iter()
            .max_by(|a, b| a.gap().total_cmp(&b.gap()))
            .expect("grid is non-empty");
        verdict(
            Check::Sandwich,
            failures == 0,
            format!(
                "{failures}/{} points exceed {SANDWICH_TOL} bits; worst gap {:.4} at q={}, P={}, D={:.4}",
                points.len(),
                worst.gap(),
                worst.q,
                worst.perception,
                worst.distortion
            ),
        )
    }

    fn reduction(&self, points: &[CurvePoint]) -> Result<Verdict> {
        let direct: Vec<&CurvePoint> = points.iter().filter(|p| p.q == 0.0).collect();
        if direct.is_empty() {
            return Ok(Verdict {
                check: Check::Reduction,
                status: Status::Skipped,
                detail: "no q = 0 curve in the grid".into(),
            });
        }
        let mut failures = 0;
        for p in &direct {
            let reference = rdpf_piecewise(self.args.pi_x, p.distortion, p.perception)?;
            if (p.closed - reference).abs() > REDUCTION_TOL {
                failures += 1;
            }
        }
        Ok(verdict(
            Check::Reduction,
            failures == 0,
            format!("{failures}/{} q = 0 points differ from the Bernoulli function", direct.len()),
        ))
    }

    fn spot(&self) -> Result<Verdict> {
        let model = dsbs_model(0.1, 0.2)?;
        let closed = self.closed(&model, 0.2, 0.05)?;
        let oracle = self.oracle(&model, 0.2, 0.05)?;
        let zero = [0.0, 0.02, 0.05, 0.1, 0.2, f64::INFINITY]
            .iter()
            .map(|&p| self.closed(&model, 0.26, p))
            .collect::<semrdp::Result<Vec<_>>>()?
            .iter()
            .all(|&r| r == 0.0);
        let pass = (closed - 0.1937).abs() <= SPOT_CLOSED_TOL
            && (oracle - closed).abs() <= SPOT_ORACLE_TOL
            && zero;
        Ok(verdict(
            Check::Spot,
            pass,
            format!("dsbs(0.1, 0.2) at D=0.2, P=0.05: closed {closed:.6}, oracle {oracle:.6}; zero at D=0.26: {zero}"),
        ))
    }

    fn thresholds(&self) -> Result<(Vec<ThresholdEstimate>, Verdict)> {
        let model = dsbs_model(0.1, self.args.pi_x)?;
        let target = model.pi_x_prime()?;
        let zero_rate = |d: f64, p: f64| -> semrdp::Result<bool> { Ok(self.oracle(&model, d, p)? <= ZERO_RATE) };
        let estimates = self
            .args
            .ps
            .par_iter()
            .map(|&p| {
                let (mut lo, mut hi) = (model.q1(), 0.5);
                if zero_rate(lo, p)? || !zero_rate(hi, p)? {
                    return Ok(ThresholdEstimate { perception: p, estimate: f64::NAN, target });
                }
                for _ in 0..BISECTIONS {
                    let mid = 0.5 * (lo + hi);
                    if zero_rate(mid, p)? {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(ThresholdEstimate { perception: p, estimate: hi, target })
            })
            .collect::<semrdp::Result<Vec<_>>>()?;
        let side = evaluate_decoder(&model, &DecoderLaw::side_information())?;
        let side_ok = side.rate.abs() < 1e-15
            && (side.distortion - target).abs() < 1e-12
            && side.perception.abs() < 1e-15;
        let located = estimates.iter().all(|t| (t.estimate - t.target).abs() <= THRESHOLD_TOL);
        let listed: Vec<String> = estimates
            .iter()
            .map(|t| format!("P={}: {:.4}", fmt_value(t.perception), t.estimate))
            .collect();
        let v = verdict(
            Check::Threshold,
            side_ok && located,
            format!(
                "zero-rate thresholds [{}] vs pi_x' = {target:.4}; side-information decoder exact: {side_ok}",
                listed.join(", ")
            ),
        );
        Ok((estimates, v))
    }

    fn monotonicity(&self, points: &[CurvePoint]) -> Result<(usize, Verdict)> {
        let per_curve = self.args.points;
        let curves: Vec<&[CurvePoint]> = points.chunks(per_curve).collect();
        let mut in_d = 0;
        for c in &curves {
            for w in c.windows(2) {
                in_d += usize::from(w[1].closed > w[0].closed + MONOTONE_TOL);
                in_d += usize::from(w[1].oracle > w[0].oracle + MONOTONE_TOL);
            }
        }
        // curves sharing q, ordered by ascending P
        let mut in_p = 0;
        for family in curves.chunks(self.args.ps.len()) {
            let mut order: Vec<&[CurvePoint]> = family.to_vec();
            order.sort_by(|a, b| a[0].perception.total_cmp(&b[0].perception));
            for pair in order.windows(2) {
                for (tight, loose) in pair[0].iter().zip(pair[1]) {
                    in_p += usize::from(loose.closed > tight.closed + MONOTONE_TOL);
                    in_p += usize::from(loose.oracle > tight.oracle + MONOTONE_TOL);
                }
            }
        }
        // larger q never lowers the unconstrained curve on the common range
        let mut qs = self.args.qs.clone();
        qs.sort_by(f64::total_cmp);
        let models = qs
            .iter()
            .map(|&q| dsbs_model(q, self.args.pi_x))
            .collect::<semrdp::Result<Vec<_>>>()?;
        let d_common = qs.last().copied().unwrap_or(0.0);
        let mut by_q = 0;
        for d in (0..=50).map(|i| i as f64 * 0.01).filter(|&d| d >= d_common) {
            let r = models
                .iter()
                .map(|m| self.closed(m, d, f64::INFINITY))
                .collect::<semrdp::Result<Vec<_>>>()?;
            by_q += r.windows(2).filter(|w| w[0] > w[1] + MONOTONE_TOL).count();
        }
        let total = in_d + in_p + by_q;
        Ok((
            total,
            verdict(
                Check::Monotonicity,
                total == 0,
                format!("violations: in D {in_d}, in P {in_p}, ordering by q {by_q}"),
            ),
        ))
    }

    fn continuity(&self) -> Result<Verdict> {
        let eps = 1e-9;
        let mut jumps = Vec::new();
        for &q in &self.args.qs {
            let model = dsbs_model(q, self.args.pi_x)?;
            for &p in &self.args.ps {
                let bp = breakpoints(&model, p)?;
                for (name, at) in [("D'", bp.d_prime), ("pi_x'", bp.pi_x_prime)] {
                    if at - eps <= q || at + eps >= 0.5 {
                        continue;
                    }
                    let jump = (self.closed(&model, at - eps, p)? - self.closed(&model, at + eps, p)?).abs();
                    if jump > CONTINUITY_TOL {
                        jumps.push(format!("q={q}, P={}, at {name}: {jump:.4}", fmt_value(p)));
                    }
                }
            }
        }
        let detail = if jumps.is_empty() {
            "closed form continuous at every breakpoint".to_string()
        } else {
            format!("jumps: {}", jumps.join("; "))
        };
        Ok(verdict(Check::Continuity, jumps.is_empty(), detail))
    }

    fn transform(&self, laws: &[DecoderLaw]) -> Result<Verdict> {
        let q = 0.1;
        let model = dsbs_model(q, self.args.pi_x)?;
        let residuals = laws
            .par_iter()
            .enumerate()
            .map(|(i, law)| {
                let seed = derive_seed(self.args.seed, 1000 + i as u64);
                let blocks = sample_block(&model, 100_000, seed);
                let shat = apply_decoder(law, &blocks.x, &blocks.y, seed)?;
                transform_residual(&blocks.s, &blocks.x, &shat, q)
            })
            .collect::<semrdp::Result<Vec<_>>>()?;
        let failures = residuals.iter().filter(|r| !r.within(0.0, SIGMAS)).count();
        let worst = residuals
            .iter()
            .map(|r| r.mean.abs() / r.std_error)
            .fold(0.0, f64::max);
        Ok(verdict(
            Check::Transform,
            failures == 0,
            format!("{failures}/{} laws outside {SIGMAS} SE; worst |mean|/SE = {worst:.2}", laws.len()),
        ))
    }

    fn simulation(&self, laws: &[DecoderLaw]) -> Result<Verdict> {
        let model = dsbs_model(0.1, self.args.pi_x)?;
        let misses = laws
            .par_iter()
            .enumerate()
            .map(|(i, law)| {
                let exact = evaluate_decoder(&model, law)?;
                let cfg = TrialConfig::new(10_000, 10, derive_seed(self.args.seed, 2000 + i as u64))?;
                let r = simulate_decoder(&model, law, &cfg)?;
                Ok(usize::from(!r.distortion.within(exact.distortion, SIGMAS))
                    + usize::from(!r.p_marginal.within(exact.perception, SIGMAS)))
            })
            .collect::<semrdp::Result<Vec<usize>>>()?;
        let failures: usize = misses.iter().sum();
        Ok(verdict(
            Check::Simulation,
            failures == 0,
            format!("{failures} of {} (D, P_marginal) estimates outside {SIGMAS} SE", 2 * laws.len()),
        ))
    }
}

pub fn verify_report(args: &VerifyArgs) -> Result<VerificationSummary> {
    if args.qs.is_empty() || args.ps.is_empty() {
        bail!("--qs and --ps need at least one value");
    }
    if let Some(q) = args.qs.iter().find(|&&q| q + 0.01 >= D_MAX) {
        bail!("q = {q} leaves no distortion range below {D_MAX}");
    }
    if args.points < 2 {
        bail!("--points must be at least 2");
    }
    let mut checks = args.checks.clone();
    checks.sort();
    checks.dedup();
    let runner = Runner {
        args,
        delta: args.corrupt_closed_form,
    };
    let enabled = |c| checks.contains(&c);
    let points = runner.grid(enabled(Check::Sandwich) || enabled(Check::Monotonicity))?;
    let laws = seeded_laws(args.seed, LAWS);

    let mut verdicts = Vec::new();
    let mut thresholds = Vec::new();
    let mut monotonicity_violations = 0;
    for &check in &checks {
        let v = match check {
            Check::Sandwich => runner.sandwich(&points),
            Check::Reduction => runner.reduction(&points)?,
            Check::Spot => runner.spot()?,
            Check::Threshold => {
                let (t, v) = runner.thresholds()?;
                thresholds = t;
                v
            }
            Check::Monotonicity => {
                let (count, v) = runner.monotonicity(&points)?;
                monotonicity_violations = count;
                v
            }
            Check::Continuity => runner.continuity()?,
            Check::Transform => runner.transform(&laws)?,
            Check::Simulation => runner.simulation(&laws)?,
        };
        verdicts.push(v);
    }
    let max_gap = points
        .iter()
        .map(CurvePoint::gap)
        .filter(|g| !g.is_nan())
        .fold(0.0, f64::max);
    Ok(VerificationSummary {
        points,
        max_gap,
        monotonicity_violations,
        thresholds,
        verdicts,
    })
}
