//! Closed-form rate functions for Bernoulli sources under Hamming distortion
//! and a total-variation perception constraint, and their composition for the
//! doubly symmetric semantic source with side information.
//!
//! A perception budget of `f64::INFINITY` means "unconstrained".

use crate::error::{Error, Result};
use crate::model::{distortion_transform, SemanticModel, TransformDirection};
use crate::probability::{binary_entropy, ternary_entropy, DOMAIN_SLACK};

/// Which computation produced a rate value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    Min2Solver,
    Oracle,
    Simulation,
}

/// A `(D, P, R)` triple and its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdpPoint {
    pub distortion: f64,
    pub perception: f64,
    pub rate: f64,
    pub method: Method,
}

impl RdpPoint {
    pub fn new(distortion: f64, perception: f64, rate: f64, method: Method) -> Result<Self> {
        if !(distortion >= 0.0) || !(perception >= 0.0) || !(rate >= 0.0) {
            return Err(Error::Domain(format!(
                "RdpPoint needs non-negative fields, got D = {distortion}, P = {perception}, R = {rate}"
            )));
        }
        Ok(Self {
            distortion,
            perception,
            rate,
            method,
        })
    }
}

/// Breakpoints of the piecewise rate functions.
///
/// `d1`/`d2` bound the middle (perception-active) branch of a Bernoulli(`pi_x`)
/// source; `d_prime` and `pi_x_prime` are the same boundaries mapped to
/// semantic distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseBreakpoints {
    pub d1: f64,
    pub d2: f64,
    pub d_prime: f64,
    pub pi_x_prime: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::Domain(format!("source parameter {p} must lie in (0, 1/2]")));
    }
    Ok(())
}

fn check_perception(perception: f64) -> Result<()> {
    if perception.is_nan() || perception < 0.0 {
        return Err(Error::Domain(format!("perception budget {perception} is negative")));
    }
    Ok(())
}

/// Lower breakpoint `P / (1 + 2P - 2p)`; tends to 1/2 as `P -> inf`.
pub fn lower_breakpoint(p: f64, perception: f64) -> f64 {
    if perception.is_infinite() {
        0.5
    } else {
        perception / (1.0 + 2.0 * perception - 2.0 * p)
    }
}

/// Upper breakpoint `2p(1-p) - (1-2p)P`.
pub fn upper_breakpoint(p: f64, perception: f64) -> f64 {
    let slope = 1.0 - 2.0 * p;
    if perception.is_infinite() {
        if slope == 0.0 {
            0.5
        } else {
            f64::NEG_INFINITY
        }
    } else {
        2.0 * p * (1.0 - p) - slope * perception
    }
}

/// Rate-distortion function of a Bernoulli(`pi`) source, clamped at zero for
/// `D >= pi`.
pub fn rdf_pi(pi: f64, distortion: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&pi) {
        return Err(Error::Domain(format!("pi = {pi} must lie in [0, 1/2]")));
    }
    if distortion.is_nan() || distortion < 0.0 {
        return Err(Error::Domain(format!("distortion {distortion} is negative")));
    }
    if distortion >= pi {
        return Ok(0.0);
    }
    Ok(binary_entropy(pi)? - binary_entropy(distortion)?)
}

/// Perception-active branch for a Bernoulli(`pi`) source:
/// `2 Hb(pi) + Hb(pi - P) - Ht((D-P)/2, pi) - Ht((D+P)/2, 1-pi)`.
pub fn rdpf_pi(pi: f64, distortion: f64, perception: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&pi) {
        return Err(Error::Domain(format!("pi = {pi} must lie in [0, 1/2]")));
    }
    check_perception(perception)?;
    if perception > pi + DOMAIN_SLACK {
        return Err(Error::Domain(format!("perception {perception} exceeds pi = {pi}")));
    }
    if distortion < perception - DOMAIN_SLACK {
        return Err(Error::Domain(format!(
            "distortion {distortion} is below perception {perception}"
        )));
    }
    let low = ((distortion - perception) / 2.0).max(0.0);
    let high = (distortion + perception) / 2.0;
    Ok(2.0 * binary_entropy(pi)? + binary_entropy((pi - perception).max(0.0))?
        - ternary_entropy(low, pi)?
        - ternary_entropy(high, 1.0 - pi)?)
}

/// Three-branch rate-distortion-perception function of a Bernoulli(`p`)
/// source.
pub fn rdpf_piecewise(p: f64, distortion: f64, perception: f64) -> Result<f64> {
    check_p(p)?;
    check_perception(perception)?;
    if distortion.is_nan() || distortion < 0.0 {
        return Err(Error::Domain(format!("distortion {distortion} is negative")));
    }
    if perception >= p {
        return rdf_pi(p, distortion);
    }
    let d1 = lower_breakpoint(p, perception);
    let d2 = upper_breakpoint(p, perception);
    if distortion <= d1 {
        rdf_pi(p, distortion)
    } else if distortion < d2 {
        Ok(rdpf_pi(p, distortion, perception)?.max(0.0))
    } else {
        Ok(0.0)
    }
}

/// Breakpoints for a doubly symmetric model at perception budget `P`.
pub fn breakpoints(model: &SemanticModel, perception: f64) -> Result<PiecewiseBreakpoints> {
    let (q, pi_x) = model.symmetric_params()?;
    check_perception(perception)?;
    let d1 = lower_breakpoint(pi_x, perception);
    Ok(PiecewiseBreakpoints {
        d1,
        d2: upper_breakpoint(pi_x, perception),
        d_prime: (1.0 - 2.0 * q) * d1 + q,
        pi_x_prime: (1.0 - 2.0 * q) * pi_x + q,
    })
}

/// Rate of the doubly symmetric semantic source with side information at
/// semantic distortion `D` and perception budget `P`.
///
/// Distortion is mapped to the observed domain, `D_x = (D - q)/(1 - 2q)`;
/// the perception budget is used as is, since `p_S = p_X` for this source.
/// The rate is zero from `pi_x'` on, follows the plain rate-distortion curve
/// below `D'` (or everywhere when `P >= pi_x'`), and the perception-active
/// branch in between.
pub fn theorem2_rate(model: &SemanticModel, distortion: f64, perception: f64) -> Result<f64> {
    let (q, pi_x) = model.symmetric_params()?;
    check_perception(perception)?;
    let dx = distortion_transform(distortion, q, TransformDirection::SemanticToObserved)?;
    let bp = breakpoints(model, perception)?;
    if distortion >= bp.pi_x_prime {
        return Ok(0.0);
    }
    // For P >= pi_x the lower breakpoint already sits at or above pi_x', so the
    // middle branch is empty and both P-ranges give the same curve.
    if perception >= bp.pi_x_prime || perception >= pi_x || distortion < bp.d_prime {
        return rdf_pi(pi_x, dx);
    }
    Ok(rdpf_pi(pi_x, dx, perception)?.max(0.0))
}
