use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("masses sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("alphabet size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("unknown axis label `{0}`")]
    UnknownLabel(String),

    #[error("axis label `{0}` appears in more than one argument")]
    OverlappingLabels(String),

    #[error("expected {expected} axes, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("side channel is degenerate: P(Y={symbol}) = 0, conditional p(X|Y) undefined")]
    DegenerateSideChannel { symbol: u8 },

    #[error("distortion {distortion} is below the attainable floor {floor}")]
    Infeasible { distortion: f64, floor: f64 },

    #[error("model hypothesis violated: {0}")]
    Hypothesis(String),

    #[error(
        "no grid law meets D <= {target_d} and P <= {target_p}; \
         nearest: min D = {min_d}, min P = {min_p}"
    )]
    NoFeasiblePoint {
        target_d: f64,
        target_p: f64,
        min_d: f64,
        min_p: f64,
    },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("block length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sub-block length {sub_block} does not divide block length {len}")]
    Partition { len: usize, sub_block: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}
