use anyhow::Result;
use rayon::prelude::*;
use semrdp::simulate::{derive_seed, empirical_conditional_rate};
use semrdp::{
    apply_decoder, oracle_min_rate, sample_block, solve_min2, theorem2_rate, Error,
    SemanticModel,
};

use crate::args::{Axis, CurveArgs, MethodArg};

/// Maps "no decoder meets the constraints" to an infinite rate and keeps
/// every other error.
pub fn rate_or_inf(r: semrdp::Result<f64>) -> semrdp::Result<f64> {
    match r {
        Err(Error::Infeasible { .. }) | Err(Error::NoFeasiblePoint { .. }) => Ok(f64::INFINITY),
        other => other,
    }
}

pub fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.6}")
    }
}

/// Selected methods in column order, without repeats.
pub fn ordered_methods(methods: &[MethodArg]) -> Vec<MethodArg> {
    let mut m = methods.to_vec();
    m.sort();
    m.dedup();
    m
}

pub fn header(methods: &[MethodArg]) -> String {
    let mut cols = vec!["D", "P"];
    cols.extend(methods.iter().map(|m| m.column()));
    cols.join(",")
}

struct PointContext<'a> {
    model: &'a SemanticModel,
    resolution: f64,
    n: usize,
    trials: usize,
    seed: u64,
}

fn simulated_rate(ctx: &PointContext, d: f64, p: f64, index: u64) -> semrdp::Result<f64> {
    let law = match oracle_min_rate(ctx.model, d, p, ctx.resolution) {
        Ok(r) => r.law().expect("oracle reports a decoder law"),
        Err(e) => return rate_or_inf(Err(e)),
    };
    let seed = derive_seed(ctx.seed, index);
    let blocks = sample_block(ctx.model, ctx.n * ctx.trials, seed);
    let shat = apply_decoder(&law, &blocks.x, &blocks.y, seed)?;
    empirical_conditional_rate(&blocks.x, &blocks.y, &shat)
}

fn evaluate(ctx: &PointContext, method: MethodArg, d: f64, p: f64, index: u64) -> semrdp::Result<f64> {
    match method {
        MethodArg::ClosedForm => rate_or_inf(theorem2_rate(ctx.model, d, p)),
        MethodArg::Min2 => rate_or_inf(solve_min2(ctx.model, d, p, ctx.resolution).map(|r| r.rate)),
        MethodArg::Oracle => {
            rate_or_inf(oracle_min_rate(ctx.model, d, p, ctx.resolution).map(|r| r.rate))
        }
        MethodArg::Simulate => simulated_rate(ctx, d, p, index),
    }
}

/// The curve as CSV text, header included.
pub fn sweep_curve(args: &CurveArgs) -> Result<String> {
    let model = args.model.build()?;
    let points = args.axis_points()?;
    let methods = ordered_methods(&args.methods);
    if methods.is_empty() {
        anyhow::bail!("select at least one method");
    }
    if methods.contains(&MethodArg::Simulate) {
        args.trials.config()?;
    }
    let ctx = PointContext {
        model: &model,
        resolution: args.resolution,
        n: args.trials.n,
        trials: args.trials.trials,
        seed: args.trials.seed,
    };
    let rows: Vec<String> = points
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let (d, p) = match args.axis {
                Axis::D => (x, args.perception),
                Axis::P => (args.distortion, x),
            };
            let mut cells = vec![fmt_value(d), fmt_value(p)];
            for &m in &methods {
                cells.push(fmt_value(evaluate(&ctx, m, d, p, i as u64)?));
            }
            Ok(cells.join(","))
        })
        .collect::<semrdp::Result<_>>()?;
    let mut out = header(&methods);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}
