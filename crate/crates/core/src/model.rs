//! The binary semantic source: hidden `S`, indirect observation `X` and side
//! information `Y`, joined as the Markov chain `S -> X -> Y`.

use crate::error::{Error, Result};
use crate::probability::{FiniteDistribution, JointDistribution, DOMAIN_SLACK};

/// Tolerance used when checking symmetry hypotheses on derived fields.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Row-stochastic 2x2 matrix; row `i` is the law of the output given input `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: [FiniteDistribution; 2],
}

impl ChannelMatrix {
    /// Binary channel with `P(1|0) = flip0` and `P(0|1) = flip1`.
    pub fn binary(flip0: f64, flip1: f64) -> Result<Self> {
        Ok(Self {
            rows: [
                FiniteDistribution::bernoulli(flip0)?,
                FiniteDistribution::new(vec![flip1, 1.0 - flip1])?,
            ],
        })
    }

    pub fn row(&self, input: usize) -> &FiniteDistribution {
        &self.rows[input]
    }

    /// `P(output | input)`.
    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.rows[input].masses()[output]
    }

    /// `P(1|0)`
    pub fn crossover0(&self) -> f64 {
        self.prob(0, 1)
    }

    /// `P(0|1)`
    pub fn crossover1(&self) -> f64 {
        self.prob(1, 0)
    }
}

/// Parameters and derived conditionals of the `(S, X, Y)` source.
///
/// Inputs are the prior `pi = P(S=1)`, the observation channel `p(X|S)` with
/// crossovers `(q1, q2)` and the side channel `p(Y|X)` with crossovers
/// `(a, b)`. Everything else is derived by exact Bayes inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticModel {
    pi: f64,
    q1: f64,
    q2: f64,
    a: f64,
    b: f64,
    u: f64,
    v: f64,
    p_a: f64,
    p_b: f64,
    a_star: f64,
    b_star: f64,
    u_star: f64,
    v_star: f64,
    joint: JointDistribution,
}

fn arg(name: &str, value: f64) -> Result<f64> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(Error::Domain(format!("{name} = {value} outside [0, 1]")));
    }
    Ok(value)
}

impl SemanticModel {
    pub fn pi(&self) -> f64 {
        self.pi
    }
    pub fn q1(&self) -> f64 {
        self.q1
    }
    pub fn q2(&self) -> f64 {
        self.q2
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    /// `P(Y=1 | S=0)`, derived along the chain.
    pub fn u(&self) -> f64 {
        self.u
    }
    /// `P(Y=0 | S=1)`, derived along the chain.
    pub fn v(&self) -> f64 {
        self.v
    }
    /// `P(Y=0)`
    pub fn p_a(&self) -> f64 {
        self.p_a
    }
    /// `P(Y=1)`
    pub fn p_b(&self) -> f64 {
        self.p_b
    }
    /// `P(X=1 | Y=0)`
    pub fn a_star(&self) -> f64 {
        self.a_star
    }
    /// `P(X=0 | Y=1)`
    pub fn b_star(&self) -> f64 {
        self.b_star
    }
    /// `P(S=1 | Y=0)`
    pub fn u_star(&self) -> f64 {
        self.u_star
    }
    /// `P(S=0 | Y=1)`
    pub fn v_star(&self) -> f64 {
        self.v_star
    }

    /// Joint law over axes `S`, `X`, `Y`.
    pub fn joint(&self) -> &JointDistribution {
        &self.joint
    }

    /// `p(s, x, y)`
    pub fn mass(&self, s: usize, x: usize, y: usize) -> f64 {
        self.joint.mass(&[s, x, y])
    }

    /// `P(Y = y)`
    pub fn p_y(&self, y: usize) -> f64 {
        if y == 0 {
            self.p_a
        } else {
            self.p_b
        }
    }

    pub fn observation_channel(&self) -> ChannelMatrix {
        ChannelMatrix::binary(self.q1, self.q2).expect("validated at construction")
    }

    pub fn side_channel(&self) -> ChannelMatrix {
        ChannelMatrix::binary(self.a, self.b).expect("validated at construction")
    }

    /// `p(X|Y)` with crossovers `(a*, b*)`.
    pub fn posterior_x_given_y(&self) -> ChannelMatrix {
        ChannelMatrix::binary(self.a_star, self.b_star).expect("validated at construction")
    }

    /// `p(S|Y)` with crossovers `(u*, v*)`.
    pub fn posterior_s_given_y(&self) -> ChannelMatrix {
        ChannelMatrix::binary(self.u_star, self.v_star).expect("validated at construction")
    }

    /// Bayes error of guessing `S` from `(X, Y)`: the smallest expected
    /// Hamming distortion any decoder can reach. Equals `q` for a DSBS pair.
    pub fn distortion_floor(&self) -> f64 {
        let mut floor = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                floor += self.mass(0, x, y).min(self.mass(1, x, y));
            }
        }
        floor
    }

    /// Checks the doubly symmetric hypotheses (`pi = 1/2`, `q1 = q2 = q < 1/2`,
    /// `a* = b* = pi_x <= 1/2`, `u* = v* < 1/2`) and returns `(q, pi_x)`.
    pub fn symmetric_params(&self) -> Result<(f64, f64)> {
        let eq = |x: f64, y: f64| (x - y).abs() <= SYMMETRY_TOL;
        if !eq(self.pi, 0.5) {
            return Err(Error::Hypothesis(format!("pi = {} is not 1/2", self.pi)));
        }
        if !eq(self.q1, self.q2) {
            return Err(Error::Hypothesis(format!(
                "q1 = {} differs from q2 = {}",
                self.q1, self.q2
            )));
        }
        if self.q1 >= 0.5 {
            return Err(Error::Hypothesis(format!("q = {} is not below 1/2", self.q1)));
        }
        if !eq(self.a_star, self.b_star) || self.a_star > 0.5 + SYMMETRY_TOL {
            return Err(Error::Hypothesis(format!(
                "a* = {}, b* = {} are not equal and at most 1/2",
                self.a_star, self.b_star
            )));
        }
        if !eq(self.u_star, self.v_star) || self.u_star >= 0.5 {
            return Err(Error::Hypothesis(format!(
                "u* = {}, v* = {} are not equal and below 1/2",
                self.u_star, self.v_star
            )));
        }
        Ok((self.q1, self.a_star))
    }

    /// `pi_x`, the common value of `a*` and `b*` for symmetric models.
    pub fn pi_x(&self) -> Result<f64> {
        self.symmetric_params().map(|(_, pi_x)| pi_x)
    }

    /// `pi_x' = (1 - 2q) pi_x + q`, the zero-rate distortion level.
    pub fn pi_x_prime(&self) -> Result<f64> {
        let (q, pi_x) = self.symmetric_params()?;
        Ok((1.0 - 2.0 * q) * pi_x + q)
    }
}

/// Builds the source from the chain `S -> X -> Y`.
pub fn build_model(pi: f64, q1: f64, q2: f64, a: f64, b: f64) -> Result<SemanticModel> {
    let pi = arg("pi", pi)?;
    let q1 = arg("q1", q1)?;
    let q2 = arg("q2", q2)?;
    let a = arg("a", a)?;
    let b = arg("b", b)?;
    if pi > 0.5 {
        return Err(Error::Domain(format!("pi = {pi} exceeds 1/2")));
    }
    let p_s = [1.0 - pi, pi];
    let x_given_s = [[1.0 - q1, q1], [q2, 1.0 - q2]];
    let y_given_x = [[1.0 - a, a], [b, 1.0 - b]];

    let mut masses = Vec::with_capacity(8);
    for s in 0..2 {
        for x in 0..2 {
            for y in 0..2 {
                masses.push(p_s[s] * x_given_s[s][x] * y_given_x[x][y]);
            }
        }
    }
    let joint = JointDistribution::new(["S", "X", "Y"], vec![2, 2, 2], masses)?;
    let m = |s: usize, x: usize, y: usize| joint.mass(&[s, x, y]);

    let p_y = [
        (0..2).flat_map(|s| (0..2).map(move |x| (s, x))).map(|(s, x)| m(s, x, 0)).sum::<f64>(),
        (0..2).flat_map(|s| (0..2).map(move |x| (s, x))).map(|(s, x)| m(s, x, 1)).sum::<f64>(),
    ];
    for (symbol, &py) in p_y.iter().enumerate() {
        if py <= DOMAIN_SLACK {
            return Err(Error::DegenerateSideChannel { symbol: symbol as u8 });
        }
    }
    let a_star = (m(0, 1, 0) + m(1, 1, 0)) / p_y[0];
    let b_star = (m(0, 0, 1) + m(1, 0, 1)) / p_y[1];
    let u_star = (m(1, 0, 0) + m(1, 1, 0)) / p_y[0];
    let v_star = (m(0, 0, 1) + m(0, 1, 1)) / p_y[1];
    // p(Y|S) composed along the chain
    let u = (1.0 - q1) * a + q1 * (1.0 - b);
    let v = q2 * (1.0 - a) + (1.0 - q2) * b;

    Ok(SemanticModel {
        pi,
        q1,
        q2,
        a,
        b,
        u,
        v,
        p_a: p_y[0],
        p_b: p_y[1],
        a_star,
        b_star,
        u_star,
        v_star,
        joint,
    })
}

/// Doubly symmetric source: uniform `S`, observation crossover `q` and side
/// crossover `pi_x` on both symbols.
pub fn dsbs_model(q: f64, pi_x: f64) -> Result<SemanticModel> {
    if !(0.0..0.5).contains(&q) {
        return Err(Error::Domain(format!("q = {q} must lie in [0, 1/2)")));
    }
    if !(pi_x > 0.0 && pi_x <= 0.5) {
        return Err(Error::Domain(format!("pi_x = {pi_x} must lie in (0, 1/2]")));
    }
    build_model(0.5, q, q, pi_x, pi_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    /// `d(S, Ŝ) -> d(X, Ŝ)`
    SemanticToObserved,
    /// `d(X, Ŝ) -> d(S, Ŝ)`
    ObservedToSemantic,
}

/// Linear map between semantic and observed Hamming distortion for a DSBS
/// observation channel with crossover `q`.
pub fn distortion_transform(d: f64, q: f64, direction: TransformDirection) -> Result<f64> {
    if !(0.0..0.5).contains(&q) {
        return Err(Error::Domain(format!("q = {q} must lie in [0, 1/2)")));
    }
    if !d.is_finite() {
        return Err(Error::Domain(format!("distortion {d} is not finite")));
    }
    match direction {
        TransformDirection::SemanticToObserved => {
            if d < q {
                return Err(Error::Infeasible {
                    distortion: d,
                    floor: q,
                });
            }
            Ok((d - q) / (1.0 - 2.0 * q))
        }
        TransformDirection::ObservedToSemantic => Ok((1.0 - 2.0 * q) * d + q),
    }
}

/// Whether a source rate fits through a channel of the given capacity when
/// `k` source symbols map to `m` channel uses.
pub fn source_channel_feasible(
    rate_bits: f64,
    channel_capacity_bits: f64,
    k: usize,
    m: usize,
) -> Result<bool> {
    if k == 0 || m == 0 {
        return Err(Error::Domain("k and m must be positive".into()));
    }
    if !(rate_bits >= 0.0) || !(channel_capacity_bits >= 0.0) {
        return Err(Error::Domain("rate and capacity must be non-negative".into()));
    }
    Ok(rate_bits <= (k as f64 / m as f64) * channel_capacity_bits + 1e-12)
}
