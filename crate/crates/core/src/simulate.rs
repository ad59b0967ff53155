//! Monte Carlo validation of the rate-distortion-perception tradeoff.
//!
//! All randomness flows from a single 64-bit seed, shared by encoder and
//! decoder as their common randomness. Per-trial seeds are read from a
//! ChaCha keystream at a counter position equal to the trial index, so any
//! trial can be replayed in isolation and trials may run in parallel.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::SemanticModel;
use crate::probability::{conditional_mutual_information, JointDistribution};
use crate::solver::DecoderLaw;

/// Codebooks are capped at `2^MAX_CODEBOOK_BITS` entries.
pub const MAX_CODEBOOK_BITS: f64 = 24.0;

/// Default sub-block length for the empirical perception statistic.
pub const DEFAULT_SUB_BLOCK: usize = 100;

const STREAM_TRIAL_SEEDS: u64 = 0;
const STREAM_SOURCE: u64 = 1;
const STREAM_DECODER: u64 = 2;
const STREAM_CODEBOOK: u64 = 3;
const STREAM_BINNING: u64 = 4;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed of trial `index` under the master `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = rng_for(seed, STREAM_TRIAL_SEEDS);
    rng.set_word_pos(u128::from(index) * 2);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    /// Block length in source symbols.
    pub n: usize,
    pub trials: usize,
    /// Common randomness shared by encoder and decoder.
    pub seed: u64,
    /// Codebook rate, bits per symbol.
    pub rate_r1: f64,
    /// Bin rate, bits per symbol.
    pub rate_r2: f64,
    /// Source symbols per channel block; bookkeeping only.
    pub k: usize,
    /// Channel uses per channel block; bookkeeping only.
    pub m: usize,
    /// Sub-block length for the blockwise perception statistic. `None` picks
    /// [`DEFAULT_SUB_BLOCK`] when it divides `n`, else the whole block.
    pub sub_block: Option<usize>,
}

impl TrialConfig {
    pub fn new(n: usize, trials: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            n,
            trials,
            seed,
            rate_r1: 0.0,
            rate_r2: 0.0,
            k: 1,
            m: 1,
            sub_block: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_rates(mut self, rate_r1: f64, rate_r2: f64) -> Result<Self> {
        self.rate_r1 = rate_r1;
        self.rate_r2 = rate_r2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.trials == 0 {
            return Err(Error::Config("n and trials must be at least 1".into()));
        }
        if self.k == 0 || self.m == 0 {
            return Err(Error::Config("k and m must be at least 1".into()));
        }
        if !(self.rate_r2 >= 0.0) || !(self.rate_r1 >= self.rate_r2) {
            return Err(Error::Config(format!(
                "need R1 >= R2 >= 0, got R1 = {}, R2 = {}",
                self.rate_r1, self.rate_r2
            )));
        }
        if let Some(0) = self.sub_block {
            return Err(Error::Config("sub-block length must be positive".into()));
        }
        Ok(())
    }

    pub fn sub_block_len(&self) -> usize {
        match self.sub_block {
            Some(len) => len,
            None if self.n % DEFAULT_SUB_BLOCK == 0 => DEFAULT_SUB_BLOCK,
            None => self.n,
        }
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Mean and standard error of i.i.d. samples; needs at least two.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Config(
                "standard errors need at least two samples".into(),
            ));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok(Self {
            mean,
            std_error: (var / n).sqrt(),
        })
    }

    /// `|mean - target| <= sigmas * std_error`
    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.std_error
    }
}

/// Aggregate of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// `d(S, Ŝ)` per symbol.
    pub distortion: Estimate,
    /// `d(X, Ŝ)` per symbol.
    pub observed_distortion: Estimate,
    /// TV between pooled frequencies of `S` and `Ŝ`; the standard error is
    /// that of the signed frequency difference. This marginal
    /// statistic stands in for the n-letter strong perception TV, which is
    /// not computed.
    pub p_marginal: Estimate,
    /// Mean TV between within-sub-block empirical distributions.
    pub p_blockwise: Estimate,
    pub bin_decode_failures: usize,
    pub seeds_used: Vec<u64>,
}

/// One i.i.d. block of the source triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blocks {
    pub s: Vec<u8>,
    pub x: Vec<u8>,
    pub y: Vec<u8>,
}

fn bernoulli_bit(rng: &mut ChaCha8Rng, p_one: f64) -> u8 {
    u8::from(rng.gen::<f64>() < p_one)
}

/// Draws `n` i.i.d. symbols from the model along `S -> X -> Y`.
pub fn sample_block(model: &SemanticModel, n: usize, seed: u64) -> Blocks {
    let mut rng = rng_for(seed, STREAM_SOURCE);
    let x_flip = [model.q1(), model.q2()];
    let y_flip = [model.a(), model.b()];
    let mut out = Blocks {
        s: Vec::with_capacity(n),
        x: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let s = bernoulli_bit(&mut rng, model.pi());
        let x = s ^ bernoulli_bit(&mut rng, x_flip[s as usize]);
        let y = x ^ bernoulli_bit(&mut rng, y_flip[x as usize]);
        out.s.push(s);
        out.x.push(x);
        out.y.push(y);
    }
    out
}

/// Per-symbol stochastic decoding of `(X, Y)` through `law`.
pub fn apply_decoder(law: &DecoderLaw, x: &[u8], y: &[u8], seed: u64) -> Result<Vec<u8>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let mut rng = rng_for(seed, STREAM_DECODER);
    Ok(x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let p0 = law.prob_zero(xi as usize, yi as usize);
            u8::from(rng.gen::<f64>() >= p0)
        })
        .collect())
}

/// Distortion and perception statistics of one reconstructed block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMetrics {
    pub distortion: f64,
    pub p_marginal: f64,
    pub p_blockwise: f64,
}

fn fraction_zero(bits: &[u8]) -> f64 {
    bits.iter().filter(|&&b| b == 0).count() as f64 / bits.len() as f64
}

fn hamming_fraction(a: &[u8], b: &[u8]) -> f64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as f64 / a.len() as f64
}

pub fn empirical_metrics(s: &[u8], shat: &[u8], sub_block: usize) -> Result<EmpiricalMetrics> {
    if s.len() != shat.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: shat.len(),
        });
    }
    if s.is_empty() || sub_block == 0 || s.len() % sub_block != 0 {
        return Err(Error::Partition {
            len: s.len(),
            sub_block,
        });
    }
    let blocks = s.len() / sub_block;
    let p_blockwise = s
        .chunks(sub_block)
        .zip(shat.chunks(sub_block))
        .map(|(a, b)| (fraction_zero(a) - fraction_zero(b)).abs())
        .sum::<f64>()
        / blocks as f64;
    Ok(EmpiricalMetrics {
        distortion: hamming_fraction(s, shat),
        p_marginal: (fraction_zero(s) - fraction_zero(shat)).abs(),
        p_blockwise,
    })
}

/// Per-symbol residual `1[S≠Ŝ] - (1-2q) 1[X≠Ŝ] - q`, summarized as a mean
/// with its standard error.
pub fn transform_residual(s: &[u8], x: &[u8], shat: &[u8], q: f64) -> Result<Estimate> {
    if s.len() != x.len() || s.len() != shat.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: x.len().min(shat.len()),
        });
    }
    let samples: Vec<f64> = s
        .iter()
        .zip(x)
        .zip(shat)
        .map(|((&si, &xi), &zi)| {
            f64::from(u8::from(si != zi)) - (1.0 - 2.0 * q) * f64::from(u8::from(xi != zi)) - q
        })
        .collect();
    Estimate::from_samples(&samples)
}

/// Plug-in estimate of `I(X; Ŝ | Y)` from joint symbol counts.
pub fn empirical_conditional_rate(x: &[u8], y: &[u8], shat: &[u8]) -> Result<f64> {
    if x.len() != y.len() || x.len() != shat.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len().min(shat.len()),
        });
    }
    if x.is_empty() {
        return Err(Error::Config("empty blocks".into()));
    }
    let mut counts = vec![0.0; 8];
    for ((&xi, &yi), &zi) in x.iter().zip(y).zip(shat) {
        counts[(xi as usize * 2 + yi as usize) * 2 + zi as usize] += 1.0;
    }
    let total = x.len() as f64;
    let joint = JointDistribution::new(
        ["X", "Y", "Shat"],
        vec![2, 2, 2],
        counts.into_iter().map(|c| c / total).collect(),
    )?;
    conditional_mutual_information(&joint, &["X"], &["Shat"], &["Y"])
}

struct TrialOutcome {
    seed: u64,
    metrics: EmpiricalMetrics,
    observed_distortion: f64,
    signed_marginal: f64,
    zeros_s: usize,
    zeros_shat: usize,
    mismatches_s: usize,
    mismatches_x: usize,
    sub_block_tvs: Vec<f64>,
    failure: bool,
}

fn outcome(
    seed: u64,
    blocks: &Blocks,
    shat: &[u8],
    sub_block: usize,
    failure: bool,
) -> Result<TrialOutcome> {
    let metrics = empirical_metrics(&blocks.s, shat, sub_block)?;
    let count_ne = |a: &[u8]| a.iter().zip(shat).filter(|(x, y)| x != y).count();
    Ok(TrialOutcome {
        seed,
        metrics,
        observed_distortion: hamming_fraction(&blocks.x, shat),
        signed_marginal: fraction_zero(&blocks.s) - fraction_zero(shat),
        zeros_s: blocks.s.iter().filter(|&&b| b == 0).count(),
        zeros_shat: shat.iter().filter(|&&b| b == 0).count(),
        mismatches_s: count_ne(&blocks.s),
        mismatches_x: count_ne(&blocks.x),
        sub_block_tvs: blocks
            .s
            .chunks(sub_block)
            .zip(shat.chunks(sub_block))
            .map(|(a, b)| (fraction_zero(a) - fraction_zero(b)).abs())
            .collect(),
        failure,
    })
}

/// Where standard errors come from.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Spread {
    /// Symbols are i.i.d. across the whole run (memoryless decoding): use
    /// per-symbol and per-sub-block variances.
    Symbols,
    /// Symbols within a block are dependent (shared codebook): use the
    /// spread of per-trial statistics.
    Trials,
}

/// Mean and standard error of `N` i.i.d. values with the given first and
/// second raw moments.
fn moment_estimate(sum: f64, sum_sq: f64, count: f64) -> Result<Estimate> {
    if count < 2.0 {
        return Err(Error::Config(
            "standard errors need at least two samples".into(),
        ));
    }
    let mean = sum / count;
    let var = ((sum_sq / count - mean * mean) * count / (count - 1.0)).max(0.0);
    Ok(Estimate {
        mean,
        std_error: (var / count).sqrt(),
    })
}

fn aggregate(cfg: &TrialConfig, outcomes: Vec<TrialOutcome>, spread: Spread) -> Result<TrialReport> {
    let total = (cfg.n * outcomes.len()) as f64;
    let zeros_s: usize = outcomes.iter().map(|o| o.zeros_s).sum();
    let zeros_shat: usize = outcomes.iter().map(|o| o.zeros_shat).sum();
    let pooled_p = ((zeros_s as f64 - zeros_shat as f64) / total).abs();

    let (distortion, observed_distortion, p_marginal_se, p_blockwise) = match spread {
        Spread::Symbols => {
            let mis_s: usize = outcomes.iter().map(|o| o.mismatches_s).sum();
            let mis_x: usize = outcomes.iter().map(|o| o.mismatches_x).sum();
            // indicator variables: the second moment equals the first
            let d = moment_estimate(mis_s as f64, mis_s as f64, total)?;
            let dx = moment_estimate(mis_x as f64, mis_x as f64, total)?;
            // 1[S=0] - 1[Ŝ=0] squares to 1[S≠Ŝ]
            let signed = moment_estimate(zeros_s as f64 - zeros_shat as f64, mis_s as f64, total)?;
            let tvs: Vec<f64> = outcomes.iter().flat_map(|o| o.sub_block_tvs.iter().copied()).collect();
            (d, dx, signed.std_error, Estimate::from_samples(&tvs)?)
        }
        Spread::Trials => {
            let collect =
                |f: &dyn Fn(&TrialOutcome) -> f64| -> Vec<f64> { outcomes.iter().map(f).collect() };
            let signed = Estimate::from_samples(&collect(&|o| o.signed_marginal))?;
            (
                Estimate::from_samples(&collect(&|o| o.metrics.distortion))?,
                Estimate::from_samples(&collect(&|o| o.observed_distortion))?,
                signed.std_error,
                Estimate::from_samples(&collect(&|o| o.metrics.p_blockwise))?,
            )
        }
    };
    Ok(TrialReport {
        n: cfg.n,
        trials: cfg.trials,
        seed: cfg.seed,
        distortion,
        observed_distortion,
        p_marginal: Estimate {
            mean: pooled_p,
            std_error: p_marginal_se,
        },
        p_blockwise,
        bin_decode_failures: outcomes.iter().filter(|o| o.failure).count(),
        seeds_used: outcomes.iter().map(|o| o.seed).collect(),
    })
}

/// Runs `cfg.trials` independent blocks through a memoryless decoder.
pub fn simulate_decoder(
    model: &SemanticModel,
    law: &DecoderLaw,
    cfg: &TrialConfig,
) -> Result<TrialReport> {
    cfg.validate()?;
    let sub_block = cfg.sub_block_len();
    let outcomes = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(cfg.seed, t);
            let blocks = sample_block(model, cfg.n, seed);
            let shat = apply_decoder(law, &blocks.x, &blocks.y, seed)?;
            outcome(seed, &blocks, &shat, sub_block, false)
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate(cfg, outcomes, Spread::Symbols)
}

/// Bit-packed binary block.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Packed(Vec<u64>);

impl Packed {
    fn from_bits(bits: &[u8]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            words[i / 64] |= u64::from(b & 1) << (i % 64);
        }
        Packed(words)
    }

    fn to_bits(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| ((self.0[i / 64] >> (i % 64)) & 1) as u8).collect()
    }

    fn distance(&self, other: &Packed) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a ^ b).count_ones()).sum()
    }
}

fn argmin_distance<'a>(candidates: impl Iterator<Item = (usize, &'a Packed)>, target: &Packed) -> usize {
    let mut best = (u32::MAX, usize::MAX);
    for (idx, cw) in candidates {
        let d = cw.distance(target);
        if d < best.0 {
            best = (d, idx);
        }
    }
    best.1
}

/// Number of entries `round(2^(n R))`, at least one.
pub fn codebook_size(n: usize, rate: f64) -> usize {
    (n as f64 * rate).exp2().round().max(1.0) as usize
}

/// Random codebook with binning, at desk-scale block lengths.
///
/// Each trial draws `2^(n R1)` codewords i.i.d. from the reconstruction
/// marginal induced by `target_law`, spreads them evenly over `2^(n R2)` bins
/// by a random permutation, encodes `X^n` to its nearest codeword and sends
/// the bin index. The decoder returns the codeword in that bin nearest to its
/// side information `Y^n`. A bin-decode failure is counted whenever that
/// differs from the encoder's codeword.
pub fn random_binning_trial(
    model: &SemanticModel,
    cfg: &TrialConfig,
    target_law: &DecoderLaw,
) -> Result<TrialReport> {
    cfg.validate()?;
    let bits = cfg.n as f64 * cfg.rate_r1;
    if bits > MAX_CODEBOOK_BITS {
        return Err(Error::Resource(format!(
            "codebook of 2^{bits:.2} entries exceeds 2^{MAX_CODEBOOK_BITS}"
        )));
    }
    let codewords = codebook_size(cfg.n, cfg.rate_r1);
    let bins = codebook_size(cfg.n, cfg.rate_r2).min(codewords);
    let mut p_one = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let pxy = model.mass(0, x, y) + model.mass(1, x, y);
            p_one += pxy * (1.0 - target_law.prob_zero(x, y));
        }
    }
    let sub_block = cfg.sub_block_len();

    let outcomes = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(cfg.seed, t);
            let blocks = sample_block(model, cfg.n, seed);

            let mut rng = rng_for(seed, STREAM_CODEBOOK);
            let book: Vec<Packed> = (0..codewords)
                .map(|_| {
                    let bits: Vec<u8> = (0..cfg.n).map(|_| bernoulli_bit(&mut rng, p_one)).collect();
                    Packed::from_bits(&bits)
                })
                .collect();
            let mut order: Vec<usize> = (0..codewords).collect();
            order.shuffle(&mut rng_for(seed, STREAM_BINNING));
            let mut bin_of = vec![0usize; codewords];
            for (pos, &cw) in order.iter().enumerate() {
                bin_of[cw] = pos % bins;
            }

            let x = Packed::from_bits(&blocks.x);
            let y = Packed::from_bits(&blocks.y);
            let sent = argmin_distance(book.iter().enumerate(), &x);
            let bin = bin_of[sent];
            let chosen = argmin_distance(
                book.iter().enumerate().filter(|(i, _)| bin_of[*i] == bin),
                &y,
            );
            let shat = book[chosen].to_bits(cfg.n);
            outcome(seed, &blocks, &shat, sub_block, chosen != sent)
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate(cfg, outcomes, Spread::Trials)
}
