//! Numerical minimization of `I(X; Ŝ | Y)` under distortion and perception
//! budgets.
//!
//! Two independent routes are provided:
//!
//! * [`oracle_min_rate`] searches stochastic decoders `p(Ŝ | X, Y)` directly
//!   and scores every candidate with exact information quantities and the
//!   exact total variation `D_TV(p_S, p_Ŝ)`.
//! * [`solve_min2`] optimizes the per-branch allocation of distortion and
//!   perception, `p_a R(d0, p0) + p_b R(d1, p1)`, using the closed-form
//!   Bernoulli rate functions on each side-information branch.
//!
//! Both use the same deterministic search: a coarse grid followed by one
//! refinement pass at a tenth of the step around the incumbent. Every
//! objective here is a sum of one term per side-information branch and every
//! constraint is a sum as well, so the grid search is carried out as an exact
//! pair search over two branch tables rather than a 4-D loop.

use rayon::prelude::*;

use crate::closed_form::rdpf_piecewise;
use crate::error::{Error, Result};
use crate::model::SemanticModel;
use crate::probability::{
    conditional_mutual_information, mutual_information, tv_distance, JointDistribution,
};

/// Slack applied to the distortion and perception constraints.
pub const CONSTRAINT_SLACK: f64 = 1e-12;

/// Largest branch table the search will allocate.
pub const MAX_BRANCH_ENTRIES: usize = 1 << 22;

/// Stochastic decoder for binary alphabets.
///
/// `s_y = P(Ŝ=0 | X=0, Y=y)` and `t_y = P(Ŝ=0 | X=1, Y=y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderLaw {
    pub s0: f64,
    pub t0: f64,
    pub s1: f64,
    pub t1: f64,
}

impl DecoderLaw {
    pub fn new(s0: f64, t0: f64, s1: f64, t1: f64) -> Result<Self> {
        for v in [s0, t0, s1, t1] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("decoder probability {v} outside [0, 1]")));
            }
        }
        Ok(Self { s0, t0, s1, t1 })
    }

    /// `Ŝ = X`
    pub fn copy_observation() -> Self {
        Self { s0: 1.0, t0: 0.0, s1: 1.0, t1: 0.0 }
    }

    /// `Ŝ = Y`
    pub fn side_information() -> Self {
        Self { s0: 1.0, t0: 1.0, s1: 0.0, t1: 0.0 }
    }

    /// `Ŝ` a fair coin independent of everything.
    pub fn uniform() -> Self {
        Self { s0: 0.5, t0: 0.5, s1: 0.5, t1: 0.5 }
    }

    /// `P(Ŝ=0 | X=x, Y=y)`
    pub fn prob_zero(&self, x: usize, y: usize) -> f64 {
        match (x, y) {
            (0, 0) => self.s0,
            (1, 0) => self.t0,
            (0, _) => self.s1,
            _ => self.t1,
        }
    }

    /// Lexicographic key `(s0, t0, s1, t1)`.
    pub fn as_tuple(&self) -> [f64; 4] {
        [self.s0, self.t0, self.s1, self.t1]
    }
}

/// Exact rate, distortion and perception of one decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderEvaluation {
    /// `I(X; Ŝ | Y)` in bits.
    pub rate: f64,
    /// `E[d_H(S, Ŝ)]`
    pub distortion: f64,
    /// `D_TV(p_S, p_Ŝ)`
    pub perception: f64,
}

/// Joint law over `S`, `X`, `Y`, `Shat`.
pub fn decoder_joint(model: &SemanticModel, law: &DecoderLaw) -> Result<JointDistribution> {
    let mut masses = Vec::with_capacity(16);
    for s in 0..2 {
        for x in 0..2 {
            for y in 0..2 {
                let m = model.mass(s, x, y);
                let z0 = law.prob_zero(x, y);
                masses.push(m * z0);
                masses.push(m * (1.0 - z0));
            }
        }
    }
    JointDistribution::new(["S", "X", "Y", "Shat"], vec![2, 2, 2, 2], masses)
}

pub fn evaluate_decoder(model: &SemanticModel, law: &DecoderLaw) -> Result<DecoderEvaluation> {
    let joint = decoder_joint(model, law)?;
    let rate = conditional_mutual_information(&joint, &["X"], &["Shat"], &["Y"])?;
    let pair = joint.marginal(&["S", "Shat"])?;
    let distortion = pair.mass(&[0, 1]) + pair.mass(&[1, 0]);
    let perception = tv_distance(
        &joint.distribution_of("S")?,
        &joint.distribution_of("Shat")?,
    )?;
    Ok(DecoderEvaluation {
        rate,
        distortion,
        perception,
    })
}

/// Per-branch view of a decoder: `d_y = d(X, Ŝ | Y=y)`,
/// `p_y = D_TV(p_{X|Y=y}, p_{Ŝ|Y=y})` and the signed deviation
/// `p_{X|Y=y}(0) - p_{Ŝ|Y=y}(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchMetrics {
    pub d: [f64; 2],
    pub p: [f64; 2],
    pub signed_deviation: [f64; 2],
}

pub fn branch_metrics(model: &SemanticModel, law: &DecoderLaw) -> BranchMetrics {
    let mut out = BranchMetrics {
        d: [0.0; 2],
        p: [0.0; 2],
        signed_deviation: [0.0; 2],
    };
    for y in 0..2 {
        let py = model.p_y(y);
        let px0 = (model.mass(0, 0, y) + model.mass(1, 0, y)) / py;
        let px1 = 1.0 - px0;
        let z0 = law.prob_zero(0, y);
        let z1 = law.prob_zero(1, y);
        out.d[y] = px0 * (1.0 - z0) + px1 * z1;
        let shat0 = px0 * z0 + px1 * z1;
        out.signed_deviation[y] = px0 - shat0;
        out.p[y] = out.signed_deviation[y].abs();
    }
    out
}

/// `|p_a p0 + p_b p1|` for signed per-branch deviations.
pub fn compose_branch_perception(p_a: f64, p0_signed: f64, p_b: f64, p1_signed: f64) -> f64 {
    (p_a * p0_signed + p_b * p1_signed).abs()
}

/// Per-branch distortion/perception budgets chosen by [`solve_min2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAllocation {
    pub d0: f64,
    pub d1: f64,
    pub p0: f64,
    pub p1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Minimizer {
    Law(DecoderLaw),
    Allocation(BranchAllocation),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverResult {
    pub rate: f64,
    pub achieved_d: f64,
    pub achieved_p: f64,
    pub argmin: Minimizer,
    pub grid_resolution: f64,
}

impl SolverResult {
    pub fn law(&self) -> Option<DecoderLaw> {
        match self.argmin {
            Minimizer::Law(l) => Some(l),
            Minimizer::Allocation(_) => None,
        }
    }

    pub fn allocation(&self) -> Option<BranchAllocation> {
        match self.argmin {
            Minimizer::Allocation(a) => Some(a),
            Minimizer::Law(_) => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Pair search
// ---------------------------------------------------------------------------

/// Contribution of one branch parameter pair to the objective and to the two
/// summed constraints.
#[derive(Debug, Clone, Copy)]
struct BranchEntry {
    rate: f64,
    cost: f64,
    mass: f64,
}

#[derive(Clone, Copy)]
struct Best {
    rate: f64,
    index: usize,
}

impl Best {
    const NONE: Best = Best {
        rate: f64::INFINITY,
        index: usize::MAX,
    };

    fn better(self, other: Best) -> Best {
        if other.rate < self.rate || (other.rate == self.rate && other.index < self.index) {
            other
        } else {
            self
        }
    }
}

/// Range-minimum tree over right-branch entries ordered by mass.
struct MinTree {
    size: usize,
    nodes: Vec<Best>,
}

impl MinTree {
    fn new(len: usize) -> Self {
        let size = len.next_power_of_two().max(1);
        Self {
            size,
            nodes: vec![Best::NONE; 2 * size],
        }
    }

    fn set(&mut self, pos: usize, value: Best) {
        let mut i = pos + self.size;
        self.nodes[i] = value;
        while i > 1 {
            i /= 2;
            self.nodes[i] = self.nodes[2 * i].better(self.nodes[2 * i + 1]);
        }
    }

    /// Minimum over positions `lo..hi`.
    fn query(&self, lo: usize, hi: usize) -> Best {
        let mut best = Best::NONE;
        let (mut l, mut r) = (lo + self.size, hi + self.size);
        while l < r {
            if l & 1 == 1 {
                best = best.better(self.nodes[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                best = best.better(self.nodes[r]);
            }
            l /= 2;
            r /= 2;
        }
        best
    }
}

/// Minimizes `left[i].rate + right[j].rate` subject to
/// `left[i].cost + right[j].cost <= budget` and
/// `left[i].mass + right[j].mass` in `[mass_lo, mass_hi]`.
///
/// Ties go to the smallest `(i, j)`. Exact: every pair is covered, in
/// `O(n log n)` via an offline sweep over the cost budget.
fn pair_search(
    left: &[BranchEntry],
    right: &[BranchEntry],
    budget: f64,
    mass_lo: f64,
    mass_hi: f64,
) -> Option<(usize, usize, f64)> {
    let mut by_mass: Vec<usize> = (0..right.len()).collect();
    by_mass.sort_by(|&a, &b| right[a].mass.total_cmp(&right[b].mass).then(a.cmp(&b)));
    let mut rank = vec![0usize; right.len()];
    for (r, &j) in by_mass.iter().enumerate() {
        rank[j] = r;
    }
    let sorted_mass: Vec<f64> = by_mass.iter().map(|&j| right[j].mass).collect();

    let mut by_cost: Vec<usize> = (0..right.len()).collect();
    by_cost.sort_by(|&a, &b| right[a].cost.total_cmp(&right[b].cost).then(a.cmp(&b)));

    let mut queries: Vec<usize> = (0..left.len()).collect();
    queries.sort_by(|&a, &b| left[b].cost.total_cmp(&left[a].cost).then(a.cmp(&b)));

    let mut tree = MinTree::new(right.len());
    let mut inserted = 0;
    let mut incumbent: Option<(usize, usize, f64)> = None;
    for &i in &queries {
        let allowance = budget + CONSTRAINT_SLACK - left[i].cost;
        while inserted < by_cost.len() && right[by_cost[inserted]].cost <= allowance {
            let j = by_cost[inserted];
            tree.set(rank[j], Best { rate: right[j].rate, index: j });
            inserted += 1;
        }
        if inserted == 0 {
            continue;
        }
        let lo = mass_lo - CONSTRAINT_SLACK - left[i].mass;
        let hi = mass_hi + CONSTRAINT_SLACK - left[i].mass;
        let start = sorted_mass.partition_point(|&m| m < lo);
        let end = sorted_mass.partition_point(|&m| m <= hi);
        if start >= end {
            continue;
        }
        let best = tree.query(start, end);
        if best.index == usize::MAX {
            continue;
        }
        let total = left[i].rate + best.rate;
        let replace = match incumbent {
            None => true,
            Some((bi, bj, br)) => total < br || (total == br && (i, best.index) < (bi, bj)),
        };
        if replace {
            incumbent = Some((i, best.index, total));
        }
    }
    incumbent
}

/// Grid values `lo, lo + step, .., hi` (endpoint included exactly).
fn axis_values(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step - 1e-9).ceil().max(0.0) as usize;
    let mut out: Vec<f64> = (0..count).map(|k| lo + k as f64 * step).collect();
    out.push(hi);
    out
}

/// Values within `±step` of `center` at `step / 10`, clipped to `[lo, hi]`.
fn refine_values(center: f64, step: f64, lo: f64, hi: f64) -> Vec<f64> {
    let fine = step / 10.0;
    let mut out: Vec<f64> = (-10..=10)
        .map(|k| (center + k as f64 * fine).clamp(lo, hi))
        .collect();
    out.dedup();
    out
}

fn check_resolution(resolution: f64) -> Result<()> {
    if !(1e-4..=0.1).contains(&resolution) {
        return Err(Error::Domain(format!(
            "resolution {resolution} must lie in [1e-4, 0.1]"
        )));
    }
    Ok(())
}

fn check_table_size(values: usize) -> Result<()> {
    if values.saturating_mul(values) > MAX_BRANCH_ENTRIES {
        return Err(Error::Resource(format!(
            "{values}^2 grid points per branch exceed the limit of {MAX_BRANCH_ENTRIES}"
        )));
    }
    Ok(())
}

fn check_targets(model: &SemanticModel, distortion: f64, perception: f64) -> Result<()> {
    if distortion.is_nan() || perception.is_nan() || perception < 0.0 {
        return Err(Error::Domain("targets must be numbers, P >= 0".into()));
    }
    let floor = model.distortion_floor();
    if distortion < floor - CONSTRAINT_SLACK {
        return Err(Error::Infeasible {
            distortion,
            floor,
        });
    }
    Ok(())
}

fn lex_less(a: (f64, [f64; 4]), b: (f64, [f64; 4])) -> bool {
    if a.0 != b.0 {
        return a.0 < b.0;
    }
    for k in 0..4 {
        if a.1[k] != b.1[k] {
            return a.1[k] < b.1[k];
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Oracle over decoder laws
// ---------------------------------------------------------------------------

struct LawBranch {
    /// `p(s, x, y)` for this `y`, indexed `[s][x]`.
    sx: [[f64; 2]; 2],
    py: f64,
}

impl LawBranch {
    fn new(model: &SemanticModel, y: usize) -> Self {
        let mut sx = [[0.0; 2]; 2];
        for (s, row) in sx.iter_mut().enumerate() {
            for (x, v) in row.iter_mut().enumerate() {
                *v = model.mass(s, x, y);
            }
        }
        Self { sx, py: model.p_y(y) }
    }

    fn entry(&self, s: f64, t: f64) -> BranchEntry {
        let law = [s, t];
        let px = [self.sx[0][0] + self.sx[1][0], self.sx[0][1] + self.sx[1][1]];
        let mut cost = 0.0;
        let mut mass = 0.0;
        for x in 0..2 {
            cost += self.sx[0][x] * (1.0 - law[x]) + self.sx[1][x] * law[x];
            mass += px[x] * law[x];
        }
        // I(X; Ŝ | Y=y) from the conditional joint of (X, Ŝ)
        let masses = vec![
            px[0] / self.py * s,
            px[0] / self.py * (1.0 - s),
            px[1] / self.py * t,
            px[1] / self.py * (1.0 - t),
        ];
        let joint = JointDistribution::new(["X", "Shat"], vec![2, 2], masses)
            .expect("conditional joint is normalized");
        let info = mutual_information(&joint, &["X"], &["Shat"]).expect("labels exist");
        BranchEntry {
            rate: self.py * info,
            cost,
            mass,
        }
    }

    fn table(&self, s_values: &[f64], t_values: &[f64]) -> Vec<BranchEntry> {
        s_values
            .par_iter()
            .flat_map_iter(|&s| t_values.iter().map(move |&t| (s, t)))
            .map(|(s, t)| self.entry(s, t))
            .collect()
    }
}

fn law_search(
    branches: &[LawBranch; 2],
    axes: [&[f64]; 4],
    distortion: f64,
    p_s0: f64,
    perception: f64,
) -> Option<(f64, DecoderLaw)> {
    let left = branches[0].table(axes[0], axes[1]);
    let right = branches[1].table(axes[2], axes[3]);
    let (i, j, rate) = pair_search(
        &left,
        &right,
        distortion,
        p_s0 - perception,
        p_s0 + perception,
    )?;
    let (n_t0, n_t1) = (axes[1].len(), axes[3].len());
    let law = DecoderLaw {
        s0: axes[0][i / n_t0],
        t0: axes[1][i % n_t0],
        s1: axes[2][j / n_t1],
        t1: axes[3][j % n_t1],
    };
    Some((rate, law))
}

/// Exhaustive grid search for the smallest `I(X; Ŝ | Y)` over decoders
/// meeting `E[d(S, Ŝ)] <= D` and `D_TV(p_S, p_Ŝ) <= P`.
pub fn oracle_min_rate(
    model: &SemanticModel,
    distortion: f64,
    perception: f64,
    resolution: f64,
) -> Result<SolverResult> {
    check_resolution(resolution)?;
    check_targets(model, distortion, perception)?;
    let coarse = axis_values(0.0, 1.0, resolution);
    check_table_size(coarse.len())?;
    let step = 1.0 / (coarse.len() - 1) as f64;
    let branches = [LawBranch::new(model, 0), LawBranch::new(model, 1)];
    let p_s0 = 1.0 - model.pi();

    let Some((coarse_rate, coarse_law)) = law_search(
        &branches,
        [&coarse, &coarse, &coarse, &coarse],
        distortion,
        p_s0,
        perception,
    ) else {
        let tables = [
            branches[0].table(&coarse, &coarse),
            branches[1].table(&coarse, &coarse),
        ];
        let min_cost = |t: &[BranchEntry]| t.iter().map(|e| e.cost).fold(f64::INFINITY, f64::min);
        let range = |t: &[BranchEntry]| {
            t.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                    (lo.min(e.mass), hi.max(e.mass))
                })
        };
        let (lo0, hi0) = range(&tables[0]);
        let (lo1, hi1) = range(&tables[1]);
        let min_p = (lo0 + lo1 - p_s0).max(p_s0 - hi0 - hi1).max(0.0);
        return Err(Error::NoFeasiblePoint {
            target_d: distortion,
            target_p: perception,
            min_d: min_cost(&tables[0]) + min_cost(&tables[1]),
            min_p,
        });
    };

    let fine: Vec<Vec<f64>> = coarse_law
        .as_tuple()
        .iter()
        .map(|&c| refine_values(c, step, 0.0, 1.0))
        .collect();
    let mut best = (coarse_rate, coarse_law);
    if let Some(refined) = law_search(
        &branches,
        [&fine[0], &fine[1], &fine[2], &fine[3]],
        distortion,
        p_s0,
        perception,
    ) {
        if lex_less((refined.0, refined.1.as_tuple()), (best.0, best.1.as_tuple())) {
            best = refined;
        }
    }

    let eval = evaluate_decoder(model, &best.1)?;
    Ok(SolverResult {
        rate: eval.rate,
        achieved_d: eval.distortion,
        achieved_p: eval.perception,
        argmin: Minimizer::Law(best.1),
        grid_resolution: resolution,
    })
}

// ---------------------------------------------------------------------------
// Branch-allocation program
// ---------------------------------------------------------------------------

struct AllocationBranch {
    source: f64,
    py: f64,
    q: f64,
}

impl AllocationBranch {
    fn entry(&self, d: f64, p: f64) -> BranchEntry {
        let rate = if self.source <= 0.0 {
            0.0
        } else {
            rdpf_piecewise(self.source, d, p).expect("grid arguments are in range")
        };
        BranchEntry {
            rate: self.py * rate,
            cost: self.py * ((1.0 - 2.0 * self.q) * d + self.q),
            mass: self.py * p,
        }
    }

    fn table(&self, d_values: &[f64], p_values: &[f64]) -> Vec<BranchEntry> {
        d_values
            .par_iter()
            .flat_map_iter(|&d| p_values.iter().map(move |&p| (d, p)))
            .map(|(d, p)| self.entry(d, p))
            .collect()
    }
}

fn allocation_search(
    branches: &[AllocationBranch; 2],
    axes: [&[f64]; 4],
    distortion: f64,
    perception: f64,
) -> Option<(f64, BranchAllocation, f64, f64)> {
    // axes: d0, p0, d1, p1
    let left = branches[0].table(axes[0], axes[1]);
    let right = branches[1].table(axes[2], axes[3]);
    let (i, j, rate) = pair_search(&left, &right, distortion, f64::NEG_INFINITY, perception)?;
    let (n_p0, n_p1) = (axes[1].len(), axes[3].len());
    let alloc = BranchAllocation {
        d0: axes[0][i / n_p0],
        p0: axes[1][i % n_p0],
        d1: axes[2][j / n_p1],
        p1: axes[3][j % n_p1],
    };
    Some((
        rate,
        alloc,
        left[i].cost + right[j].cost,
        left[i].mass + right[j].mass,
    ))
}

/// Minimizes `p_a R^(a*)(d0, p0) + p_b R^(b*)(d1, p1)` over
/// `(d0, d1, p0, p1) ∈ [0, 1/2]^4` subject to
/// `p_a((1-2q)d0 + q) + p_b((1-2q)d1 + q) <= D` and `p_a p0 + p_b p1 <= P`.
///
/// Branch perceptions are composed with aligned signs, which upper-bounds the
/// true marginal total variation.
pub fn solve_min2(
    model: &SemanticModel,
    distortion: f64,
    perception: f64,
    resolution: f64,
) -> Result<SolverResult> {
    check_resolution(resolution)?;
    if (model.q1() - model.q2()).abs() > crate::model::SYMMETRY_TOL || model.q1() >= 0.5 {
        return Err(Error::Hypothesis(format!(
            "branch program needs q1 = q2 < 1/2, got q1 = {}, q2 = {}",
            model.q1(),
            model.q2()
        )));
    }
    let q = model.q1();
    if distortion < q - CONSTRAINT_SLACK {
        return Err(Error::Infeasible {
            distortion,
            floor: q,
        });
    }
    check_targets(model, distortion, perception)?;
    let fold = |p: f64| if p > 0.5 { 1.0 - p } else { p };
    let branches = [
        AllocationBranch {
            source: fold(model.a_star()),
            py: model.p_a(),
            q,
        },
        AllocationBranch {
            source: fold(model.b_star()),
            py: model.p_b(),
            q,
        },
    ];
    let coarse = axis_values(0.0, 0.5, resolution);
    check_table_size(coarse.len())?;
    let step = 0.5 / (coarse.len() - 1) as f64;

    let Some(mut best) = allocation_search(
        &branches,
        [&coarse, &coarse, &coarse, &coarse],
        distortion,
        perception,
    ) else {
        return Err(Error::NoFeasiblePoint {
            target_d: distortion,
            target_p: perception,
            min_d: q,
            min_p: 0.0,
        });
    };
    let a = best.1;
    let fine: Vec<Vec<f64>> = [a.d0, a.p0, a.d1, a.p1]
        .iter()
        .map(|&c| refine_values(c, step, 0.0, 0.5))
        .collect();
    if let Some(refined) = allocation_search(
        &branches,
        [&fine[0], &fine[1], &fine[2], &fine[3]],
        distortion,
        perception,
    ) {
        let key = |r: &(f64, BranchAllocation, f64, f64)| (r.0, [r.1.d0, r.1.p0, r.1.d1, r.1.p1]);
        if lex_less(key(&refined), key(&best)) {
            best = refined;
        }
    }
    Ok(SolverResult {
        rate: best.0,
        achieved_d: best.2,
        achieved_p: best.3,
        argmin: Minimizer::Allocation(best.1),
        grid_resolution: resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::theorem2_rate;
    use crate::model::{build_model, dsbs_model};
    use crate::probability::binary_entropy;

    const INF: f64 = f64::INFINITY;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn copy_decoder_anchor() {
        for (q, pi_x) in [(0.1, 0.2), (0.0, 0.3), (0.2, 0.2)] {
            let m = dsbs_model(q, pi_x).unwrap();
            let e = evaluate_decoder(&m, &DecoderLaw::copy_observation()).unwrap();
            assert!(close(e.rate, binary_entropy(pi_x).unwrap(), 1e-12));
            assert!(close(e.distortion, q, 1e-15));
            assert!(e.perception.abs() < 1e-15);
        }
    }

    #[test]
    fn side_information_decoder() {
        let m = dsbs_model(0.1, 0.2).unwrap();
        let e = evaluate_decoder(&m, &DecoderLaw::side_information()).unwrap();
        assert!(e.rate.abs() < 1e-15);
        assert!(close(e.distortion, 0.26, 1e-15));
        assert!(e.perception.abs() < 1e-15);
    }

    #[test]
    fn uniform_decoder() {
        let m = dsbs_model(0.1, 0.2).unwrap();
        let e = evaluate_decoder(&m, &DecoderLaw::uniform()).unwrap();
        assert!(e.rate.abs() < 1e-15);
        assert!(close(e.distortion, 0.5, 1e-15));
        assert!(e.perception.abs() < 1e-15);
    }

    #[test]
    fn law_validation() {
        assert!(DecoderLaw::new(0.1, 1.2, 0.0, 0.0).is_err());
        let l = DecoderLaw::new(0.1, 0.2, 0.3, 0.4).unwrap();
        assert_eq!(l.prob_zero(1, 0), 0.2);
        assert_eq!(l.prob_zero(0, 1), 0.3);
    }

    #[test]
    fn compose_examples() {
        assert!(close(compose_branch_perception(0.5, 0.1, 0.5, 0.1), 0.1, 1e-15));
        assert_eq!(compose_branch_perception(0.5, 0.1, 0.5, -0.1), 0.0);
        assert!(close(compose_branch_perception(0.3, 0.2, 0.7, 0.0), 0.06, 1e-15));
    }

    #[test]
    fn compose_matches_exact_tv_for_dsbs() {
        let m = dsbs_model(0.1, 0.2).unwrap();
        for law in [
            DecoderLaw::new(0.9, 0.3, 0.6, 0.05).unwrap(),
            DecoderLaw::new(0.2, 0.7, 0.4, 0.4).unwrap(),
        ] {
            let b = branch_metrics(&m, &law);
            let e = evaluate_decoder(&m, &law).unwrap();
            let composed =
                compose_branch_perception(m.p_a(), b.signed_deviation[0], m.p_b(), b.signed_deviation[1]);
            assert!(close(composed, e.perception, 1e-12));
            let dx = m.p_a() * b.d[0] + m.p_b() * b.d[1];
            assert!(close(e.distortion, 0.8 * dx + 0.1, 1e-12));
        }
    }

    #[test]
    fn pair_search_matches_brute_force() {
        let entries = |seed: u64| -> Vec<BranchEntry> {
            let mut x = seed;
            (0..40)
                .map(|_| {
                    let mut next = || {
                        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        ((x >> 11) as f64) / ((1u64 << 53) as f64)
                    };
                    BranchEntry {
                        rate: (next() * 8.0).floor() / 8.0,
                        cost: next(),
                        mass: next(),
                    }
                })
                .collect()
        };
        for seed in 0..20 {
            let l = entries(seed);
            let r = entries(seed + 100);
            for (budget, lo, hi) in [(0.8, 0.6, 1.2), (0.3, 0.0, 0.5), (1.5, f64::NEG_INFINITY, 0.9)] {
                let mut brute: Option<(usize, usize, f64)> = None;
                for i in 0..l.len() {
                    for j in 0..r.len() {
                        let c = l[i].cost + r[j].cost;
                        let m = l[i].mass + r[j].mass;
                        if c <= budget + CONSTRAINT_SLACK
                            && m >= lo - CONSTRAINT_SLACK
                            && m <= hi + CONSTRAINT_SLACK
                        {
                            let t = l[i].rate + r[j].rate;
                            if brute.map_or(true, |(_, _, bt)| t < bt) {
                                brute = Some((i, j, t));
                            }
                        }
                    }
                }
                let fast = pair_search(&l, &r, budget, lo, hi);
                assert_eq!(fast, brute, "seed {seed}");
            }
        }
    }

    #[test]
    fn oracle_zero_rate_plateau() {
        let m = dsbs_model(0.1, 0.2).unwrap();
        let r = oracle_min_rate(&m, 0.26, 0.05, 0.02).unwrap();
        assert!(r.rate <= 1e-3, "rate {}", r.rate);
        assert!(r.achieved_d <= 0.26 + 1e-12);
    }

    #[test]
    fn oracle_rejects_unattainable_distortion() {
        let m = dsbs_model(0.1, 0.2).unwrap();
        for res in [0.01, 0.05] {
            assert!(matches!(
                oracle_min_rate(&m, 0.05, 0.05, res),
                Err(Error::Infeasible { .. })
            ));
        }
        assert!(matches!(oracle_min_rate(&m, 0.2, 0.05, 0.5), Err(Error::Domain(_))));
        assert!(matches!(oracle_min_rate(&m, 0.2, 0.05, 1e-4), Err(Error::Resource(_))));
    }

    #[test]
    fn oracle_constraints_hold() {
        let m = build_model(0.3, 0.1, 0.15, 0.2, 0.25).unwrap();
        for (d, p) in [(0.2, 0.02), (0.25, 0.1), (0.35, INF)] {
            let r = oracle_min_rate(&m, d, p, 0.05).unwrap();
            assert!(r.achieved_d <= d + 1e-9);
            assert!(r.achieved_p <= p + 1e-9);
            let e = evaluate_decoder(&m, &r.law().unwrap()).unwrap();
            assert_eq!(e.rate, r.rate);
        }
    }

    #[test]
    fn oracle_is_deterministic() {
        let m = dsbs_model(0.1, 0.2).unwrap();
        let a = oracle_min_rate(&m, 0.18, 0.03, 0.05).unwrap();
        let b = oracle_min_rate(&m, 0.18, 0.03, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oracle_unconstrained_matches_closed_form() {
        let m = dsbs_model(0.1, 0.2).unwrap();
        let r = oracle_min_rate(&m, 0.2, INF, 0.01).unwrap();
        let t = theorem2_rate(&m, 0.2, INF).unwrap();
        assert!((r.rate - t).abs() <= 0.01, "{} vs {}", r.rate, t);
        assert!(r.rate >= t - 1e-9);
    }

    #[test]
    fn min2_symmetric_optimum() {
        let m = dsbs_model(0.1, 0.2).unwrap();
        let r = solve_min2(&m, 0.2, 0.05, 0.01).unwrap();
        let a = r.allocation().unwrap();
        assert!(close(r.rate, 0.193705, 2e-3), "rate {}", r.rate);
        assert!(close(a.d0, 0.125, 1e-9) && close(a.d1, 0.125, 1e-9), "{a:?}");
        assert!(close(a.p0, 0.05, 1e-9) && close(a.p1, 0.05, 1e-9), "{a:?}");
        assert!(r.achieved_d <= 0.2 + 1e-9 && r.achieved_p <= 0.05 + 1e-9);
    }

    #[test]
    fn min2_unconstrained_and_plateau() {
        let m = dsbs_model(0.1, 0.2).unwrap();
        let r = solve_min2(&m, 0.2, INF, 0.01).unwrap();
        assert!(close(r.rate, theorem2_rate(&m, 0.2, INF).unwrap(), 2e-3));
        for p in [0.3, INF] {
            let r = solve_min2(&m, 0.3, p, 0.01).unwrap();
            assert_eq!(r.rate, 0.0);
        }
        assert!(matches!(solve_min2(&m, 0.05, 0.1, 0.01), Err(Error::Infeasible { .. })));
    }
}
