use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the composition engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid event `{name}`: {reason}")]
    InvalidEvent { name: String, reason: String },

    #[error(
        "event `{child}` spanning [{child_start}, {child_end}] does not fit inside `{parent}` spanning [{parent_start}, {parent_end}]"
    )]
    ContainmentViolation {
        parent: String,
        parent_start: f64,
        parent_end: f64,
        child: String,
        child_start: f64,
        child_end: f64,
    },

    #[error("property `{property}` does not accept {found} values")]
    TypeMismatch { property: String, found: &'static str },

    #[error("property `{property}` value {value} outside [{min}, {max}]")]
    RangeViolation {
        property: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cannot parse note name `{0}`")]
    NoteParse(String),

    #[error("instrument `{instrument}` has no property `{property}`")]
    PropertyUnknown {
        instrument: String,
        property: String,
    },

    #[error("unknown instrument `{0}`")]
    InstrumentUnknown(String),

    #[error("unknown tuning table `{0}`")]
    TuningUnknown(String),

    #[error("pitch of `{event}` cannot be resolved: {reason}")]
    PitchUnresolvable { event: String, reason: String },

    #[error("cannot select from an empty list")]
    EmptyList,

    #[error("chord has no pitches")]
    EmptyChord,

    #[error("{what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("probability matrix has no mass")]
    DegenerateMatrix,

    #[error("no feasible duration for section `{section}` at mark {mark}")]
    NoFeasibleDuration { section: String, mark: usize },

    #[error("section `{0}` cannot be scheduled: no start mark has probability mass")]
    SchedulingInfeasible(String),

    #[error("section `{0}` is not defined")]
    SectionUnknown(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
