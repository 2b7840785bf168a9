use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("singular operator matrix")]
    Singular,

    #[error("not an order isomorphism: {direction} map sends a nonnegative function outside the cone")]
    NotOrderIsomorphism { direction: String },

    #[error("zero-set intersection at point {anchor} is empty")]
    EmptyIntersection { anchor: usize },

    #[error("ambiguous zero-set intersection at point {anchor}: best score {best:e}, runner-up {runner_up:e}")]
    AmbiguousIntersection { anchor: usize, best: f64, runner_up: f64 },

    #[error("internal contradiction: {0}")]
    InternalContradiction(String),

    #[error("weight is not strictly positive at codomain point {point}")]
    NonPositiveWeight { point: usize },

    #[error("representation residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("operation needs full families (pointwise products): {0}")]
    NeedsFullFamilies(String),

    #[error("family lacks constant functions")]
    MissingConstants,

    #[error("not an isometry: {0}")]
    NotAnIsometry(String),

    #[error("family is not g-invariant: clamp of {0} leaves the span")]
    NotInvariant(String),

    #[error("cannot separate point {point} from point {from}")]
    SeparationInfeasible { point: usize, from: usize },

    #[error("space has no metric")]
    NoMetric,

    #[error("generator `{generator}` is not evaluable at t = {t}")]
    NonEvaluable { generator: String, t: f64 },

    #[error("sequence {sequence} does not converge in generator `{generator}` (tail variation {variation:e})")]
    NonconvergentNet { sequence: usize, generator: String, variation: f64 },

    #[error("ambiguous boundary matching at codomain point {point}: best {best:e}, runner-up {runner_up:e}")]
    AmbiguousBoundary { point: usize, best: f64, runner_up: f64 },

    #[error("no boundary point matches codomain point {point} (closest distance {best:e})")]
    NoBoundaryMatch { point: usize, best: f64 },

    #[error("bounded-part screen failed: {0}")]
    BoundedScreen(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("local form inconclusive after {depth} bisections: {reason}")]
    Inconclusive { depth: usize, reason: String },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Whether the input was well formed and the mathematics said no.
    pub fn is_rejection(&self) -> bool {
        matches!(
            self,
            Error::NotOrderIsomorphism { .. }
                | Error::EmptyIntersection { .. }
                | Error::AmbiguousIntersection { .. }
                | Error::NonPositiveWeight { .. }
                | Error::ResidualTooLarge { .. }
                | Error::NotAnIsometry(_)
                | Error::NotInvariant(_)
                | Error::SeparationInfeasible { .. }
                | Error::NonconvergentNet { .. }
                | Error::AmbiguousBoundary { .. }
                | Error::NoBoundaryMatch { .. }
                | Error::BoundedScreen(_)
                | Error::Inconclusive { .. }
                | Error::MissingConstants
        )
    }
}
