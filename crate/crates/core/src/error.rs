use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid alternative domain [{mu_minus}, {mu_plus}]")]
    InvalidDomain { mu_minus: f64, mu_plus: f64 },

    #[error("grid must have at least one step")]
    EmptyGrid,

    #[error("ballot of voter `{voter}` is not a finite number")]
    NonFiniteBallot { voter: String },

    #[error("ballot {value} of voter `{voter}` lies outside [{mu_minus}, {mu_plus}]")]
    BallotOutOfRange {
        voter: String,
        value: f64,
        mu_minus: f64,
        mu_plus: f64,
    },

    #[error("duplicate voter id `{0}`")]
    DuplicateVoter(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("k = {k} is out of range for {n} active voters")]
    KOutOfRange { k: usize, n: usize },

    #[error("phantom table has no entry for {0}")]
    TableLookupMiss(String),

    #[error("no active voters and no empty-electorate value configured")]
    ZeroActiveVoters,

    #[error("{0} does not accept abstentions")]
    AbstentionNotSupported(&'static str),

    #[error("expected a profile over {expected} voters, got {found}")]
    ProfileLengthMismatch { expected: usize, found: usize },

    #[error("{what} supports at most {max} voters, got {n}")]
    TooManyVoters { what: &'static str, n: usize, max: usize },

    #[error("phantom value {value} lies outside [{mu_minus}, {mu_plus}]")]
    PhantomOutOfRange {
        value: f64,
        mu_minus: f64,
        mu_plus: f64,
    },

    #[error("phantom function is not monotone: α({lower}) = {lower_value} > α({upper}) = {upper_value}")]
    NotMonotone {
        lower: String,
        upper: String,
        lower_value: f64,
        upper_value: f64,
    },

    #[error("malformed phantom function: {0}")]
    MalformedPhantom(String),

    #[error("invalid grading curve: {0}")]
    InvalidCurve(String),

    #[error("weighted evaluation needs a continuous grading curve; jump of {jump} at t = {at}")]
    DiscontinuousWeightedCurve { at: f64, jump: f64 },

    #[error("{evaluations} rule evaluations exceed the exhaustive limit of {limit}")]
    Infeasible { evaluations: u128, limit: u128 },

    #[error("{first} returned {first_value} but {second} returned {second_value} on profile {profile:?}")]
    Disagreement {
        first: String,
        first_value: f64,
        second: String,
        second_value: f64,
        profile: Vec<Option<f64>>,
    },

    #[error("audit witness for {0} does not replay")]
    UnsoundWitness(String),

    #[error("norm exponent q = {0} is not allowed here")]
    InvalidNorm(f64),

    #[error("adaptive quadrature on [{a}, {b}] did not converge within the subinterval cap")]
    QuadratureNonConvergence { a: f64, b: f64 },

    #[error("density evaluation failed at x = {x}: {reason}")]
    DensityEvaluation { x: f64, reason: String },

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("G is not strictly increasing: G({x_lo}) = {g_lo} >= G({x_hi}) = {g_hi}")]
    NotStrictlyIncreasing {
        x_lo: f64,
        x_hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("Monte Carlo estimation needs at least 2 samples, got {0}")]
    InvalidSampleCount(usize),

    #[error("{0}")]
    UnsupportedAxiom(String),

    #[error("rule evaluation failed: {0}")]
    RuleFailure(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
