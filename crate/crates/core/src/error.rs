use std::fmt;

/// Everything that can go wrong inside the kernel. Each variant carries a
/// stable machine-readable code (see [`KernelError::code`]) so callers can
/// match on failures without parsing messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelError {
    /// Text input did not match the polynomial grammar.
    Parse { message: String, position: usize },
    /// A substitution or evaluation was missing an image for a variable.
    MissingVariable { var: String },
    /// Morphism composition or pair comparison with incompatible shapes.
    TypeMismatch { expected: String, found: String },
    /// A presentation whose quotient is not nilpotent up to the probed order.
    NotNilpotent { monomial: String, k_max: u32 },
    /// The ideal contains 1, so the quotient is the zero ring.
    UnitIdeal,
    /// Buchberger's pair queue exceeded the configured cap.
    PairCapExceeded { cap: usize },
    /// ideal_decompose was asked for an element outside the ideal.
    NotInIdeal { remainder: String },
    /// A coefficient of the jet up to the requested order is nonzero.
    NonvanishingJet { sigma: Vec<u32>, coefficient: String },
    /// A map that had to be a monomorphism at a point is not one.
    NotMono { detail: String },
    /// An operation required a rectified morphism and got something else.
    NotRectified { detail: String },
    /// The linear part of an affine map does not have full column rank.
    RankDeficient { rank: usize, expected: usize },
    /// A morphism does not have the block shape the operation requires.
    Shape { detail: String },
    /// The predicate cannot decide this input and refuses to guess.
    UndecidableInput { detail: String },
    /// A truncated pro-plot family fails compatibility at some level.
    IncompatibleCone { level: usize, coordinate: String },
    /// A verified identity of a witness span failed to hold.
    WitnessViolation { identity: String },
    /// Catch-all for violated preconditions.
    InvalidInput { detail: String },
    /// Internal consistency failure; indicates a bug, not bad input.
    Internal { detail: String },
}

impl KernelError {
    pub fn invalid(detail: impl Into<String>) -> Self {
        KernelError::InvalidInput { detail: detail.into() }
    }

    pub fn internal(detail: impl Into<String>) -> Self {
        KernelError::Internal { detail: detail.into() }
    }

    pub fn shape(detail: impl Into<String>) -> Self {
        KernelError::Shape { detail: detail.into() }
    }

    /// Stable identifier for the error class, used in the CLI's JSON error
    /// objects.
    pub fn code(&self) -> &'static str {
        match self {
            KernelError::Parse { .. } => "parse",
            KernelError::MissingVariable { .. } => "missing_variable",
            KernelError::TypeMismatch { .. } => "type_mismatch",
            KernelError::NotNilpotent { .. } => "not_nilpotent",
            KernelError::UnitIdeal => "unit_ideal",
            KernelError::PairCapExceeded { .. } => "pair_cap_exceeded",
            KernelError::NotInIdeal { .. } => "not_in_ideal",
            KernelError::NonvanishingJet { .. } => "nonvanishing_jet",
            KernelError::NotMono { .. } => "not_mono",
            KernelError::NotRectified { .. } => "not_rectified",
            KernelError::RankDeficient { .. } => "rank_deficient",
            KernelError::Shape { .. } => "shape",
            KernelError::UndecidableInput { .. } => "undecidable_input",
            KernelError::IncompatibleCone { .. } => "incompatible_cone",
            KernelError::WitnessViolation { .. } => "witness_violation",
            KernelError::InvalidInput { .. } => "invalid_input",
            KernelError::Internal { .. } => "internal",
        }
    }
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::Parse { message, position } => {
                write!(f, "parse error at position {position}: {message}")
            }
            KernelError::MissingVariable { var } => {
                write!(f, "no image given for variable {var}")
            }
            KernelError::TypeMismatch { expected, found } => {
                write!(f, "type mismatch: expected {expected}, found {found}")
            }
            KernelError::NotNilpotent { monomial, k_max } => write!(
                f,
                "not nilpotent: {monomial} has nonzero normal form at degree bound k_max = {k_max}"
            ),
            KernelError::UnitIdeal => {
                write!(f, "the ideal contains 1; the quotient is the zero ring")
            }
            KernelError::PairCapExceeded { cap } => {
                write!(f, "Buchberger pair queue exceeded the cap of {cap}")
            }
            KernelError::NotInIdeal { remainder } => {
                write!(f, "element is not in the ideal; remainder {remainder}")
            }
            KernelError::NonvanishingJet { sigma, coefficient } => write!(
                f,
                "jet coefficient at sigma = {sigma:?} is {coefficient}, expected 0"
            ),
            KernelError::NotMono { detail } => write!(f, "not a monomorphism: {detail}"),
            KernelError::NotRectified { detail } => write!(f, "not rectified: {detail}"),
            KernelError::RankDeficient { rank, expected } => {
                write!(f, "linear part has rank {rank}, expected {expected}")
            }
            KernelError::Shape { detail } => write!(f, "shape error: {detail}"),
            KernelError::UndecidableInput { detail } => {
                write!(f, "cannot decide this input: {detail}")
            }
            KernelError::IncompatibleCone { level, coordinate } => write!(
                f,
                "pro-plot family incompatible at level {level}, coordinate {coordinate}"
            ),
            KernelError::WitnessViolation { identity } => {
                write!(f, "witness identity violated: {identity}")
            }
            KernelError::InvalidInput { detail } => write!(f, "invalid input: {detail}"),
            KernelError::Internal { detail } => write!(f, "internal error: {detail}"),
        }
    }
}

impl std::error::Error for KernelError {}

pub type Result<T> = std::result::Result<T, KernelError>;
