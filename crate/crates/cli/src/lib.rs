//! Command-line front end for `semrdp`: curve sweeps, single-point oracle
//! queries, Monte Carlo runs and cross-method verification.

pub mod args;
pub mod config;
pub mod sweep;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Parser;
use semrdp::{oracle_min_rate, random_binning_trial, simulate_decoder, DecoderLaw, TrialReport};

use args::{Cli, Command, OracleArgs, SimulateArgs};
use sweep::fmt_value;

pub const THREADS_ENV: &str = "SEMRDP_THREADS";

/// Writes to `path`, or to standard output when there is none.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?;
    // a pool may already exist when running inside tests
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn parse_law(spec: &str) -> Result<DecoderLaw> {
    match spec.trim() {
        "copy" => return Ok(DecoderLaw::copy_observation()),
        "side" => return Ok(DecoderLaw::side_information()),
        "uniform" => return Ok(DecoderLaw::uniform()),
        _ => {}
    }
    let v = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("decoder law {spec:?}"))?;
    let [s0, t0, s1, t1] = v[..] else {
        bail!("decoder law needs four comma-separated entries, got {}", v.len());
    };
    Ok(DecoderLaw::new(s0, t0, s1, t1)?)
}

fn oracle_csv(args: &OracleArgs) -> Result<String> {
    let model = args.model.build()?;
    let r = oracle_min_rate(&model, args.distortion, args.perception, args.resolution)?;
    let law = r.law().expect("oracle reports a decoder law");
    let mut cells = vec![
        fmt_value(args.distortion),
        fmt_value(args.perception),
        fmt_value(r.rate),
        fmt_value(r.achieved_d),
        fmt_value(r.achieved_p),
    ];
    cells.extend(law.as_tuple().iter().map(|&v| fmt_value(v)));
    Ok(format!("D,P,rate,achieved_D,achieved_P,s0,t0,s1,t1\n{}\n", cells.join(",")))
}

pub const REPORT_HEADER: &str = "seed,n,trials,D,D_se,D_obs,D_obs_se,P_marginal,P_marginal_se,\
P_blockwise,P_blockwise_se,bin_decode_failures";

pub fn report_csv(r: &TrialReport) -> String {
    let cells = [
        r.seed.to_string(),
        r.n.to_string(),
        r.trials.to_string(),
        fmt_value(r.distortion.mean),
        fmt_value(r.distortion.std_error),
        fmt_value(r.observed_distortion.mean),
        fmt_value(r.observed_distortion.std_error),
        fmt_value(r.p_marginal.mean),
        fmt_value(r.p_marginal.std_error),
        fmt_value(r.p_blockwise.mean),
        fmt_value(r.p_blockwise.std_error),
        r.bin_decode_failures.to_string(),
    ];
    format!("{REPORT_HEADER}\n{}\n", cells.join(","))
}

fn simulate_csv(args: &SimulateArgs) -> Result<String> {
    let model = args.model.build()?;
    let law = match &args.law {
        Some(spec) => parse_law(spec)?,
        None => oracle_min_rate(&model, args.distortion, args.perception, args.resolution)?
            .law()
            .expect("oracle reports a decoder law"),
    };
    let cfg = args.trials.config()?;
    let report = match (args.r1, args.r2) {
        (Some(r1), Some(r2)) => random_binning_trial(&model, &cfg.with_rates(r1, r2)?, &law)?,
        _ => simulate_decoder(&model, &law, &cfg)?,
    };
    eprintln!(
        "note: P_marginal compares pooled symbol frequencies; it is a surrogate for, \
         not an estimate of, the block-level perception distance"
    );
    Ok(report_csv(&report))
}

/// Parses `argv` (config file merged in) and runs the chosen subcommand.
/// Returns the process exit code.
pub fn run(argv: Vec<OsString>) -> Result<i32> {
    let argv = config::merge_config(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            e.print()?;
            return Ok(code);
        }
    };
    init_threads()?;
    match cli.command {
        Command::Curve(a) => emit(a.out.as_deref(), &sweep::sweep_curve(&a)?)?,
        Command::Oracle(a) => emit(a.out.as_deref(), &oracle_csv(&a)?)?,
        Command::Simulate(a) => emit(a.out.as_deref(), &simulate_csv(&a)?)?,
        Command::Verify(a) => {
            let summary = verify::verify_report(&a)?;
            let text = summary.to_text();
            print!("{text}");
            if let Some(p) = &a.summary {
                emit(Some(p), &text)?;
            }
            if let Some(p) = &a.out {
                emit(Some(p), &summary.to_csv())?;
            }
            return Ok(if summary.passed() { 0 } else { 1 });
        }
    }
    Ok(0)
}
