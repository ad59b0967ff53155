//! Finite-alphabet probability primitives.
//!
//! Everything here works in bits (log base 2) with the convention
//! `0 · log 0 = 0`. Distributions are dense mass lists; the alphabets in this
//! crate never exceed four symbols per axis, so no sparse representation is
//! provided.

use crate::error::{Error, Result};

/// Normalization tolerance for mass lists.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Slack allowed on probability arguments before a domain error is raised.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// `-p log2 p`, zero at `p = 0`.
#[inline]
fn neg_plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

fn entropy_of_masses(masses: &[f64]) -> f64 {
    masses.iter().map(|&p| neg_plogp(p)).sum()
}

fn check_probability(name: &str, p: f64) -> Result<f64> {
    if !p.is_finite() || p < -DOMAIN_SLACK || p > 1.0 + DOMAIN_SLACK {
        return Err(Error::Domain(format!("{name} = {p} is not a probability")));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Entropy of a Bernoulli(`p`) variable.
pub fn binary_entropy(p: f64) -> Result<f64> {
    let p = check_probability("p", p)?;
    Ok(neg_plogp(p) + neg_plogp(1.0 - p))
}

/// Entropy of the ternary distribution `(x, y, 1 - x - y)`.
pub fn ternary_entropy(x: f64, y: f64) -> Result<f64> {
    let x = check_probability("x", x)?;
    let y = check_probability("y", y)?;
    let rest = 1.0 - x - y;
    if rest < -DOMAIN_SLACK {
        return Err(Error::Domain(format!(
            "ternary masses x = {x}, y = {y} exceed 1"
        )));
    }
    Ok(neg_plogp(x) + neg_plogp(y) + neg_plogp(rest.max(0.0)))
}

/// Probability masses over a small finite alphabet `{0, .., len-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    masses: Vec<f64>,
}

impl FiniteDistribution {
    /// Validates and wraps `masses`. Inputs are never renormalized here; use
    /// [`FiniteDistribution::renormalized`] for that.
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Domain("empty alphabet".into()));
        }
        for &m in &masses {
            if !m.is_finite() || !(0.0..=1.0).contains(&m) {
                return Err(Error::Domain(format!("mass {m} outside [0, 1]")));
            }
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { masses })
    }

    /// Scales non-negative weights to sum to one.
    pub fn renormalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain("weights must be finite and non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::NotNormalized { sum });
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    /// Bernoulli law with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        let p = check_probability("p", p)?;
        Ok(Self {
            masses: vec![1.0 - p, p],
        })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_masses(&self.masses)
    }
}

/// Total variation distance, computed as half the L1 distance.
pub fn tv_distance(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let l1: f64 = p
        .masses
        .iter()
        .zip(&q.masses)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok((0.5 * l1).min(1.0))
}

/// Joint law over labelled axes, stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    labels: Vec<String>,
    dims: Vec<usize>,
    masses: Vec<f64>,
}

impl JointDistribution {
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        dims: Vec<usize>,
        masses: Vec<f64>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != dims.len() {
            return Err(Error::Arity {
                expected: dims.len(),
                found: labels.len(),
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::OverlappingLabels(l.clone()));
            }
        }
        let size: usize = dims.iter().product();
        if size != masses.len() || dims.contains(&0) {
            return Err(Error::SizeMismatch {
                left: size,
                right: masses.len(),
            });
        }
        for &m in &masses {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::Domain(format!("joint mass {m} is negative")));
            }
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            labels,
            dims,
            masses,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Mass at a full index tuple.
    pub fn mass(&self, index: &[usize]) -> f64 {
        let mut flat = 0;
        for (i, &d) in index.iter().zip(&self.dims) {
            flat = flat * d + i;
        }
        self.masses[flat]
    }

    fn axis(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Marginal over `keep`, with axes in the order given.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointDistribution> {
        let axes = keep
            .iter()
            .map(|l| self.axis(l))
            .collect::<Result<Vec<_>>>()?;
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].contains(a) {
                return Err(Error::OverlappingLabels(keep[i].to_string()));
            }
        }
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut out = vec![0.0; out_dims.iter().product()];
        let mut index = vec![0usize; self.dims.len()];
        for &m in &self.masses {
            let mut flat = 0;
            for (&a, &d) in axes.iter().zip(&out_dims) {
                flat = flat * d + index[a];
            }
            out[flat] += m;
            // odometer increment, last axis fastest
            for k in (0..index.len()).rev() {
                index[k] += 1;
                if index[k] < self.dims[k] {
                    break;
                }
                index[k] = 0;
            }
        }
        Ok(JointDistribution {
            labels: keep.iter().map(|s| s.to_string()).collect(),
            dims: out_dims,
            masses: out,
        })
    }

    /// One-dimensional marginal as a [`FiniteDistribution`].
    pub fn distribution_of(&self, label: &str) -> Result<FiniteDistribution> {
        let m = self.marginal(&[label])?;
        Ok(FiniteDistribution { masses: m.masses })
    }

    /// Joint entropy of the listed axes (zero for an empty list).
    pub fn entropy_of(&self, labels: &[&str]) -> Result<f64> {
        if labels.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_of_masses(&self.marginal(labels)?.masses))
    }
}

fn check_disjoint(j: &JointDistribution, groups: &[&[&str]]) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for group in groups {
        for &l in *group {
            j.axis(l)?;
            if seen.contains(&l) {
                return Err(Error::OverlappingLabels(l.to_string()));
            }
            seen.push(l);
        }
    }
    Ok(())
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    a.iter().chain(b).copied().collect()
}

/// `H(targets | given)`.
pub fn conditional_entropy(j: &JointDistribution, targets: &[&str], given: &[&str]) -> Result<f64> {
    check_disjoint(j, &[targets, given])?;
    Ok(j.entropy_of(&union(targets, given))? - j.entropy_of(given)?)
}

/// `I(a; b | given)`.
pub fn conditional_mutual_information(
    j: &JointDistribution,
    a: &[&str],
    b: &[&str],
    given: &[&str],
) -> Result<f64> {
    check_disjoint(j, &[a, b, given])?;
    let h_ac = j.entropy_of(&union(a, given))?;
    let h_bc = j.entropy_of(&union(b, given))?;
    let h_abc = j.entropy_of(&union(&union(a, b), given))?;
    let h_c = j.entropy_of(given)?;
    Ok(h_ac + h_bc - h_abc - h_c)
}

/// `I(a; b)`.
pub fn mutual_information(j: &JointDistribution, a: &[&str], b: &[&str]) -> Result<f64> {
    conditional_mutual_information(j, a, b, &[])
}

/// Terms of the two chain-rule expansions of `I(S,X; Z | Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRuleTerms {
    pub i_sx_z_given_y: f64,
    pub i_sx_zy: f64,
    pub i_sx_y: f64,
    pub h_x_given_y: f64,
    pub h_s_given_xy: f64,
    pub h_z_given_y: f64,
    pub h_sxz_given_y: f64,
}

impl ChainRuleTerms {
    /// `I(S,X;Z|Y) - [I(S,X;Z,Y) - I(S,X;Y)]`
    pub fn difference_residual(&self) -> f64 {
        self.i_sx_z_given_y - (self.i_sx_zy - self.i_sx_y)
    }

    /// `I(S,X;Z|Y) - [H(X|Y) + H(S|X,Y) + H(Z|Y) - H(S,X,Z|Y)]`
    pub fn entropy_residual(&self) -> f64 {
        self.i_sx_z_given_y
            - (self.h_x_given_y + self.h_s_given_xy + self.h_z_given_y - self.h_sxz_given_y)
    }
}

/// Evaluates every term of both expansions independently from a joint over
/// the axes `S`, `X`, `Y`, `Z`.
pub fn chain_rule_decomposition(j: &JointDistribution) -> Result<ChainRuleTerms> {
    if j.labels().len() != 4 {
        return Err(Error::Arity {
            expected: 4,
            found: j.labels().len(),
        });
    }
    let (s, x, y, z) = ("S", "X", "Y", "Z");
    Ok(ChainRuleTerms {
        i_sx_z_given_y: conditional_mutual_information(j, &[s, x], &[z], &[y])?,
        i_sx_zy: mutual_information(j, &[s, x], &[z, y])?,
        i_sx_y: mutual_information(j, &[s, x], &[y])?,
        h_x_given_y: conditional_entropy(j, &[x], &[y])?,
        h_s_given_xy: conditional_entropy(j, &[s], &[x, y])?,
        h_z_given_y: conditional_entropy(j, &[z], &[y])?,
        h_sxz_given_y: conditional_entropy(j, &[s, x, z], &[y])?,
    })
}
