//! Typed instrument control parameters.
//!
//! An [`Instrument`] is a string-indexed table of [`PropertyDescriptor`]s.
//! Every value written into an atomic event is checked against the
//! descriptor of the same name with [`PropertyDescriptor::validate`].
//!
//! Pitch has three accepted spellings: a frequency in Hz
//! ([`PropertyValue::Number`]), an index into a [`TuningTable`]
//! ([`PropertyValue::Index`]) or a note name such as `"C#4"`
//! ([`PropertyValue::Text`]). Note names use twelve-tone equal temperament
//! with MIDI numbering (C4 = 60, A4 = 69 = 440 Hz).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// MIDI note number of the reference pitch A4.
pub const REFERENCE_SEMITONE: f64 = 69.0;
/// Frequency of A4 in Hz.
pub const REFERENCE_HZ: f64 = 440.0;

/// Reserved property name carrying an event's start time.
pub const START_TIME: &str = "Start Time";
/// Reserved property name carrying an event's duration.
pub const DURATION: &str = "Duration";

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Number(f64),
    Index(usize),
    Text(String),
}

impl PropertyValue {
    pub fn value_type(&self) -> ValueType {
        match self {
            PropertyValue::Number(_) => ValueType::Number,
            PropertyValue::Index(_) => ValueType::Index,
            PropertyValue::Text(_) => ValueType::Text,
        }
    }

    /// Numeric view of the value, `None` for text.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            PropertyValue::Number(x) => Some(*x),
            PropertyValue::Index(i) => Some(*i as f64),
            PropertyValue::Text(_) => None,
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Number(x) => write!(f, "{x}"),
            PropertyValue::Index(i) => write!(f, "{i}"),
            PropertyValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for PropertyValue {
    fn from(x: f64) -> Self {
        PropertyValue::Number(x)
    }
}

impl From<&str> for PropertyValue {
    fn from(s: &str) -> Self {
        PropertyValue::Text(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueType {
    Number,
    Index,
    Text,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Number => "number",
            ValueType::Index => "index",
            ValueType::Text => "text",
        }
    }
}

impl FromStr for ValueType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "number" => Ok(ValueType::Number),
            "index" => Ok(ValueType::Index),
            "text" => Ok(ValueType::Text),
            other => Err(Error::invalid("value type", format!("unknown `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyKind {
    Frequency,
    Count,
    Level,
    Label,
    Time,
}

impl PropertyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PropertyKind::Frequency => "frequency",
            PropertyKind::Count => "count",
            PropertyKind::Level => "level",
            PropertyKind::Label => "label",
            PropertyKind::Time => "time",
        }
    }
}

impl FromStr for PropertyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frequency" => Ok(PropertyKind::Frequency),
            "count" => Ok(PropertyKind::Count),
            "level" => Ok(PropertyKind::Level),
            "label" => Ok(PropertyKind::Label),
            "time" => Ok(PropertyKind::Time),
            other => Err(Error::invalid("property kind", format!("unknown `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyDescriptor {
    name: String,
    kind: PropertyKind,
    accepted: BTreeSet<ValueType>,
    range: Option<(f64, f64)>,
}

impl PropertyDescriptor {
    pub fn new(
        name: impl Into<String>,
        kind: PropertyKind,
        accepted: impl IntoIterator<Item = ValueType>,
        range: Option<(f64, f64)>,
    ) -> Result<Self> {
        let name = name.into();
        let accepted: BTreeSet<_> = accepted.into_iter().collect();
        if name.is_empty() {
            return Err(Error::invalid("property descriptor", "empty name"));
        }
        if accepted.is_empty() {
            return Err(Error::invalid(
                "property descriptor",
                format!("`{name}` accepts no value types"),
            ));
        }
        if let Some((min, max)) = range {
            if !(min.is_finite() && max.is_finite() && min <= max) {
                return Err(Error::invalid(
                    "property descriptor",
                    format!("`{name}` has invalid range [{min}, {max}]"),
                ));
            }
        }
        Ok(Self {
            name,
            kind,
            accepted,
            range,
        })
    }

    /// A descriptor accepting only numbers, the common case.
    pub fn number(name: impl Into<String>, kind: PropertyKind) -> Self {
        Self::new(name, kind, [ValueType::Number], None).expect("non-empty accepted set")
    }

    /// A pitch descriptor accepting Hz, tuning indices and note names.
    pub fn pitch(name: impl Into<String>) -> Self {
        Self::new(
            name,
            PropertyKind::Frequency,
            [ValueType::Number, ValueType::Index, ValueType::Text],
            None,
        )
        .expect("non-empty accepted set")
    }

    pub fn with_range(mut self, min: f64, max: f64) -> Result<Self> {
        self.range = Some((min, max));
        Self::new(self.name, self.kind, self.accepted, self.range)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> PropertyKind {
        self.kind
    }

    pub fn accepts(&self, ty: ValueType) -> bool {
        self.accepted.contains(&ty)
    }

    pub fn accepted(&self) -> impl Iterator<Item = ValueType> + '_ {
        self.accepted.iter().copied()
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        self.range
    }

    /// Checks the variant and range of `value`, handing it back unchanged.
    pub fn validate(&self, value: PropertyValue) -> Result<PropertyValue> {
        let ty = value.value_type();
        if !self.accepts(ty) {
            return Err(Error::TypeMismatch {
                property: self.name.clone(),
                found: ty.as_str(),
            });
        }
        if let PropertyValue::Number(x) = value {
            if !x.is_finite() {
                return Err(Error::invalid(
                    "property value",
                    format!("`{}` is not finite", self.name),
                ));
            }
        }
        if let (Some((min, max)), Some(x)) = (self.range, value.as_f64()) {
            if x < min || x > max {
                return Err(Error::RangeViolation {
                    property: self.name.clone(),
                    value: x,
                    min,
                    max,
                });
            }
        }
        Ok(value)
    }
}

/// A named collection of property descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    name: String,
    tuning: Option<String>,
    descriptors: BTreeMap<String, PropertyDescriptor>,
}

impl Instrument {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            tuning: None,
            descriptors: BTreeMap::new(),
        }
    }

    /// The instrument with `Start Time`, `Duration` and `Pitch`.
    pub fn minimal(name: impl Into<String>) -> Self {
        Self::new(name)
            .with_property(PropertyDescriptor::number(START_TIME, PropertyKind::Time))
            .with_property(PropertyDescriptor::number(DURATION, PropertyKind::Time))
            .with_property(PropertyDescriptor::pitch("Pitch"))
    }

    pub fn with_tuning(mut self, tuning: impl Into<String>) -> Self {
        self.tuning = Some(tuning.into());
        self
    }

    pub fn with_property(mut self, desc: PropertyDescriptor) -> Self {
        self.register_property(desc);
        self
    }

    /// Stores `desc` under its name, returning any descriptor it replaced.
    pub fn register_property(&mut self, desc: PropertyDescriptor) -> Option<PropertyDescriptor> {
        self.descriptors.insert(desc.name.clone(), desc)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tuning(&self) -> Option<&str> {
        self.tuning.as_deref()
    }

    pub fn descriptor(&self, property: &str) -> Option<&PropertyDescriptor> {
        self.descriptors.get(property)
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &PropertyDescriptor> {
        self.descriptors.values()
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    /// Validates `value` against the descriptor called `property`.
    pub fn validate(&self, property: &str, value: PropertyValue) -> Result<PropertyValue> {
        self.descriptor(property)
            .ok_or_else(|| Error::PropertyUnknown {
                instrument: self.name.clone(),
                property: property.to_owned(),
            })?
            .validate(value)
    }
}

/// Zero-indexed table of strictly ascending positive frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningTable {
    name: String,
    frequencies: Vec<f64>,
}

impl TuningTable {
    pub fn new(name: impl Into<String>, frequencies: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if let Some(bad) = frequencies.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::invalid(
                "tuning table",
                format!("`{name}` has non-positive frequency {bad}"),
            ));
        }
        if frequencies.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "tuning table",
                format!("`{name}` is not strictly ascending"),
            ));
        }
        Ok(Self { name, frequencies })
    }

    /// Equal-tempered table covering MIDI notes `low..=high`.
    pub fn equal_tempered(name: impl Into<String>, low: i32, high: i32) -> Result<Self> {
        Self::new(
            name,
            (low..=high).map(|p| hz_from_semitone(p as f64)).collect(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn get(&self, index: usize) -> Result<f64> {
        self.frequencies
            .get(index)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.frequencies.len(),
            })
    }
}

pub fn hz_from_semitone(semitone: f64) -> f64 {
    REFERENCE_HZ * 2f64.powf((semitone - REFERENCE_SEMITONE) / 12.0)
}

pub fn semitone_from_hz(hz: f64) -> f64 {
    REFERENCE_SEMITONE + 12.0 * (hz / REFERENCE_HZ).log2()
}

/// Parses `<A-G>[#|b]<octave>` into a MIDI note number.
pub fn parse_note(name: &str) -> Result<i32> {
    let err = || Error::NoteParse(name.to_owned());
    let mut chars = name.chars();
    let pitch_class = match chars.next().ok_or_else(err)? {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => return Err(err()),
    };
    let rest = chars.as_str();
    let (accidental, octave) = match rest.as_bytes().first() {
        Some(b'#') => (1, &rest[1..]),
        Some(b'b') => (-1, &rest[1..]),
        _ => (0, rest),
    };
    if octave.is_empty() || octave.starts_with('+') {
        return Err(err());
    }
    let octave: i32 = octave.parse().map_err(|_| err())?;
    octave
        .checked_add(1)
        .and_then(|o| o.checked_mul(12))
        .and_then(|base| base.checked_add(pitch_class + accidental))
        .ok_or_else(err)
}

const SHARP_NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// Note name of a MIDI note number, spelled with sharps.
pub fn note_name(semitone: i32) -> String {
    let pc = semitone.rem_euclid(12) as usize;
    let octave = semitone.div_euclid(12) - 1;
    format!("{}{}", SHARP_NAMES[pc], octave)
}

/// Resolves any pitch spelling to Hz.
///
/// An [`PropertyValue::Index`] without a tuning table is treated as an
/// index into an empty table.
pub fn resolve_pitch(value: &PropertyValue, tuning: Option<&TuningTable>) -> Result<f64> {
    match value {
        PropertyValue::Number(hz) => Ok(*hz),
        PropertyValue::Index(i) => match tuning {
            Some(table) => table.get(*i),
            None => Err(Error::IndexOutOfRange { index: *i, len: 0 }),
        },
        PropertyValue::Text(name) => Ok(hz_from_semitone(parse_note(name)? as f64)),
    }
}

/// Resolves a pitch spelling to a (possibly fractional) MIDI note number.
pub fn resolve_semitone(value: &PropertyValue, tuning: Option<&TuningTable>) -> Result<f64> {
    match value {
        PropertyValue::Text(name) => Ok(parse_note(name)? as f64),
        other => {
            let hz = resolve_pitch(other, tuning)?;
            if hz > 0.0 {
                Ok(semitone_from_hz(hz))
            } else {
                Err(Error::invalid("pitch", format!("{hz} Hz is not positive")))
            }
        }
    }
}

/// Instruments and tuning tables of a piece, looked up by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Orchestra {
    instruments: BTreeMap<String, Instrument>,
    tunings: BTreeMap<String, TuningTable>,
}

impl Orchestra {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_instrument(&mut self, instrument: Instrument) -> Option<Instrument> {
        self.instruments
            .insert(instrument.name.clone(), instrument)
    }

    pub fn add_tuning(&mut self, tuning: TuningTable) -> Option<TuningTable> {
        self.tunings.insert(tuning.name.clone(), tuning)
    }

    pub fn instrument(&self, name: &str) -> Result<&Instrument> {
        self.instruments
            .get(name)
            .ok_or_else(|| Error::InstrumentUnknown(name.to_owned()))
    }

    pub fn instruments(&self) -> impl Iterator<Item = &Instrument> {
        self.instruments.values()
    }

    pub fn tuning(&self, name: &str) -> Result<&TuningTable> {
        self.tunings
            .get(name)
            .ok_or_else(|| Error::TuningUnknown(name.to_owned()))
    }

    pub fn tunings(&self) -> impl Iterator<Item = &TuningTable> {
        self.tunings.values()
    }

    /// The tuning table an instrument refers to, if any.
    pub fn tuning_of(&self, instrument: &Instrument) -> Result<Option<&TuningTable>> {
        instrument.tuning().map(|t| self.tuning(t)).transpose()
    }
}
