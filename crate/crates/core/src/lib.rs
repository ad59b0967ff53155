//! Rate-distortion-perception tradeoff for a binary semantic source observed
//! indirectly, with side information at both encoder and decoder.
//!
//! * [`probability`]: entropies, mutual information, total variation.
//! * [`model`]: the `(S, X, Y)` source and its derived conditionals.
//! * [`closed_form`]: closed-form rate functions.
//! * [`solver`]: the branch-allocation program and a brute-force oracle over
//!   stochastic decoders.
//! * [`simulate`]: Monte Carlo decoding and random-binning trials.

pub mod closed_form;
pub mod error;
pub mod model;
pub mod probability;
pub mod simulate;
pub mod solver;

pub use closed_form::{
    breakpoints, rdf_pi, rdpf_pi, rdpf_piecewise, theorem2_rate, Method, PiecewiseBreakpoints,
    RdpPoint,
};
pub use error::{Error, Result};
pub use model::{
    build_model, distortion_transform, dsbs_model, source_channel_feasible, ChannelMatrix,
    SemanticModel, TransformDirection,
};
pub use probability::{
    binary_entropy, chain_rule_decomposition, conditional_entropy,
    conditional_mutual_information, ternary_entropy, tv_distance, ChainRuleTerms,
    FiniteDistribution, JointDistribution,
};
pub use simulate::{
    apply_decoder, empirical_metrics, random_binning_trial, sample_block, simulate_decoder,
    Estimate, TrialConfig, TrialReport,
};
pub use solver::{
    compose_branch_perception, evaluate_decoder, oracle_min_rate, solve_min2, DecoderLaw,
    SolverResult,
};
