use alloc::string::String;
use core::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Which diagonal entry vanishes on a leading indivisible interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefixKind {
    /// `h2 = 0`, the Hamiltonian is a multiple of `diag(1, 0)`.
    TypeZero,
    /// `h1 = 0`, the Hamiltonian is a multiple of `diag(0, 1)`.
    TypeHalfPi,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Argument outside the domain of the operation.
    Domain(String),
    /// Malformed construction data (panels, coefficients, knots).
    InvalidInput(String),
    /// Adaptive quadrature did not reach the requested tolerance.
    Quadrature { achieved: f64, requested: f64 },
    /// Structure the implementation does not handle.
    NotSupported(String),
    /// A leading indivisible interval must be split off first.
    IndivisibleStart { kind: PrefixKind, endpoint: f64 },
    /// The root bracket for the critical point could not be established.
    Bracket(String),
    /// The supplied `t_lo` violates `r <= (q/2)(m1 m2)^(-1/2)(t_lo)`.
    InvalidBracket { r: f64, r_max: f64 },
    /// `M/(m1+m2)` does not tend to a rank-one matrix at `a`.
    NoRankOneLimit { defect: f64 },
    /// A reparameterisation map decreased between samples.
    NotMonotone { at: f64 },
    /// The propagator could not meet its tolerance.
    StepFailure { t: f64 },
    /// `a(t,z) <= 0`: the Weyl disc is not a proper disc yet.
    DegenerateDisc { t: f64 },
    /// The Weyl disc stopped shrinking before the target radius.
    SlowShrink { radius: f64, t: f64 },
    /// Scalar parameter outside its admissible range.
    ParameterOutOfRange { name: &'static str, value: f64 },
    /// A convergence study near the endpoint did not stabilise.
    InconclusiveNearEndpoint(String),
    /// The potential is too large on `[a, x0]` for the transformation bound.
    PotentialTooLarge { x0: f64 },
    /// The auxiliary initial value problem failed.
    IvpFailure(String),
    /// Not enough samples for an estimate.
    InsufficientSamples { got: usize, need: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(s) => write!(f, "domain error: {s}"),
            Error::InvalidInput(s) => write!(f, "invalid input: {s}"),
            Error::Quadrature { achieved, requested } => write!(
                f,
                "quadrature reached error {achieved:e}, requested {requested:e}"
            ),
            Error::NotSupported(s) => write!(f, "not supported: {s}"),
            Error::IndivisibleStart { kind, endpoint } => write!(
                f,
                "Hamiltonian starts with an indivisible interval ({kind:?}) up to t = {endpoint}"
            ),
            Error::Bracket(s) => write!(f, "bracket error: {s}"),
            Error::InvalidBracket { r, r_max } => {
                write!(f, "invalid bracket: r = {r} exceeds {r_max}")
            }
            Error::NoRankOneLimit { defect } => {
                write!(f, "limit of M/tr M is not rank one (c1 c2 - c3^2 = {defect:e})")
            }
            Error::NotMonotone { at } => write!(f, "map is not increasing near {at}"),
            Error::StepFailure { t } => write!(f, "step size underflow at t = {t}"),
            Error::DegenerateDisc { t } => write!(f, "degenerate Weyl disc at t = {t}"),
            Error::SlowShrink { radius, t } => write!(
                f,
                "Weyl disc radius stalled at {radius:e} (t = {t})"
            ),
            Error::ParameterOutOfRange { name, value } => {
                write!(f, "parameter {name} = {value} out of range")
            }
            Error::InconclusiveNearEndpoint(s) => write!(f, "inconclusive near endpoint: {s}"),
            Error::PotentialTooLarge { x0 } => {
                write!(f, "potential too large: integral bounds fail at x0 = {x0}")
            }
            Error::IvpFailure(s) => write!(f, "initial value problem failed: {s}"),
            Error::InsufficientSamples { got, need } => {
                write!(f, "need at least {need} samples, got {got}")
            }
        }
    }
}

impl core::error::Error for Error {}
