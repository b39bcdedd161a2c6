//! Piece configuration files.
//!
//! A configuration is a JSON document describing the instruments, the time
//! grid, the sections with their matrix weights, event generators and
//! transform steps, and the seed. [`load_config`] parses it into a fully
//! validated [`PieceConfig`]; see `docs/config-schema.md` for the format.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::error::Error;
use crate::generators::{Binding, Distribution, Envelope, EventGenerator, MarkovChain};
use crate::matrix::{
    AdjustmentPolicy, AffinityMatrix, DurationMatrix, Manifold, ProbabilityMatrix,
    ScheduleOrder, SectionSpec, TimeGrid,
};
use crate::property::{
    Instrument, Orchestra, PropertyDescriptor, PropertyKind, PropertyValue, TuningTable,
    ValueType, DURATION, START_TIME,
};
use crate::transform::AugmentMode;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("reference error: {0}")]
    Reference(String),
}

fn schema(at: impl std::fmt::Display, err: impl std::fmt::Display) -> ConfigError {
    ConfigError::Schema(format!("{at}: {err}"))
}

// Raw serde shapes.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    seed: u64,
    #[serde(default)]
    variants: Option<usize>,
    #[serde(default)]
    tunings: Vec<RawTuning>,
    instruments: Vec<RawInstrument>,
    grid: RawGrid,
    sections: Vec<RawSection>,
    #[serde(default)]
    durations: Option<RawDurations>,
    #[serde(default)]
    policy: Option<RawPolicy>,
    #[serde(default)]
    order: Option<RawOrder>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTuning {
    name: String,
    frequencies: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstrument {
    name: String,
    #[serde(default)]
    tuning: Option<String>,
    properties: Vec<RawProperty>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProperty {
    name: String,
    kind: String,
    accepts: Vec<String>,
    #[serde(default)]
    range: Option<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    marks: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDurations {
    span_weights: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    window: usize,
    attenuation: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawOrder {
    Listed(Vec<String>),
    Keyword(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    id: String,
    weight: f64,
    affinities: Vec<f64>,
    #[serde(default)]
    duration_affinities: Option<Vec<f64>>,
    #[serde(default = "default_pitch_property")]
    pitch_property: String,
    #[serde(default)]
    generators: Vec<RawGenerator>,
    #[serde(default)]
    transforms: Vec<TransformStep>,
}

fn default_pitch_property() -> String {
    "pitch".to_owned()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    name: String,
    instrument: String,
    count: RawDistribution,
    #[serde(default)]
    bindings: BTreeMap<String, RawBinding>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawDistribution {
    Uniform { min: f64, max: f64 },
    Fixed(f64),
    Weights(Vec<f64>),
    Exponential { rate: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawBinding {
    Distribution(RawDistribution),
    Envelope(Vec<(f64, f64)>),
    Value(Value),
    List {
        values: Vec<Value>,
        #[serde(default)]
        indices: Option<Vec<usize>>,
    },
    Markov {
        states: Vec<Value>,
        transition: Vec<Vec<f64>>,
        #[serde(default)]
        initial: usize,
    },
}

/// A transform applied to all atomic events of a section, in order.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformStep {
    Transpose { semitones: f64 },
    Invert { axis: f64 },
    Retrograde,
    Augment { factor: f64, mode: RawAugmentMode },
    Canon { voices: usize, delay: f64, interval: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawAugmentMode {
    Durations,
    PitchIntervals,
}

impl From<RawAugmentMode> for AugmentMode {
    fn from(m: RawAugmentMode) -> Self {
        match m {
            RawAugmentMode::Durations => AugmentMode::Durations,
            RawAugmentMode::PitchIntervals => AugmentMode::PitchIntervals,
        }
    }
}

/// One section of the piece and how to fill it.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionPlan {
    pub id: String,
    pub pitch_property: String,
    pub generators: Vec<EventGenerator>,
    pub transforms: Vec<TransformStep>,
}

/// A validated piece configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceConfig {
    pub name: String,
    pub seed: u64,
    pub variants: Option<usize>,
    pub orchestra: Orchestra,
    pub manifold: Manifold,
    pub order: ScheduleOrder,
    pub sections: Vec<SectionPlan>,
}

impl PieceConfig {
    pub fn end(&self) -> f64 {
        self.manifold.starts().grid().end()
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
            if e.is_data() {
                ConfigError::Schema(e.to_string())
            } else {
                ConfigError::Parse(e.to_string())
            }
        })?;
        build(raw)
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<PieceConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    PieceConfig::from_json(&text)
}

fn build(raw: RawConfig) -> Result<PieceConfig, ConfigError> {
    if raw.name.trim().is_empty() {
        return Err(schema("name", "must not be empty"));
    }
    if raw.variants == Some(0) {
        return Err(schema("variants", "must be at least 1"));
    }
    let orchestra = build_orchestra(&raw)?;

    let grid = TimeGrid::new(raw.grid.marks, raw.grid.weights).map_err(|e| schema("grid", e))?;
    let n = grid.starts();
    if raw.sections.is_empty() {
        return Err(schema("sections", "at least one section is required"));
    }

    let mut specs = Vec::new();
    let mut start_rows = Vec::new();
    let mut duration_rows = Vec::new();
    let mut plans = Vec::new();
    for section in raw.sections {
        let at = format!("section `{}`", section.id);
        specs.push(SectionSpec::new(&section.id, section.weight).map_err(|e| schema(&at, e))?);
        if section.affinities.len() != n {
            return Err(schema(&at, format!("needs {n} affinities, got {}", section.affinities.len())));
        }
        start_rows.push(section.affinities);
        let durations = section.duration_affinities.unwrap_or_else(|| vec![1.0; n]);
        if durations.len() != n {
            return Err(schema(&at, format!("needs {n} duration affinities, got {}", durations.len())));
        }
        duration_rows.push(durations);

        let mut names = BTreeSet::new();
        let mut generators = Vec::new();
        for g in section.generators {
            if !names.insert(g.name.clone()) {
                return Err(schema(&at, format!("duplicate generator `{}`", g.name)));
            }
            generators.push(build_generator(g, &orchestra, &at)?);
        }
        for step in &section.transforms {
            check_step(step).map_err(|e| schema(&at, e))?;
        }
        plans.push(SectionPlan {
            id: section.id,
            pitch_property: section.pitch_property,
            generators,
            transforms: section.transforms,
        });
    }

    let starts = AffinityMatrix::new(start_rows).map_err(|e| schema("affinities", e))?;
    let starts = ProbabilityMatrix::build(specs.clone(), grid, &starts).map_err(|e| match e {
        Error::DegenerateMatrix => schema("affinities", "no section can start at any mark"),
        other => schema("sections", other),
    })?;
    let span_weights = match raw.durations {
        Some(d) => d.span_weights,
        None => vec![1.0; n],
    };
    if span_weights.len() != n {
        return Err(schema("durations", format!("needs {n} span weights, got {}", span_weights.len())));
    }
    let duration_rows = AffinityMatrix::new(duration_rows).map_err(|e| schema("duration_affinities", e))?;
    let durations = DurationMatrix::build(&specs, &span_weights, &duration_rows)
        .map_err(|e| schema("durations", e))?;
    let policy = match raw.policy {
        Some(p) => AdjustmentPolicy::new(p.window, p.attenuation).map_err(|e| schema("policy", e))?,
        None => AdjustmentPolicy::default(),
    };
    let manifold = Manifold::new(starts, durations, policy).map_err(|e| schema("durations", e))?;

    let order = match raw.order {
        None => ScheduleOrder::Listed(specs.iter().map(|s| s.id().to_owned()).collect()),
        Some(RawOrder::Keyword(k)) if k == "drawn" => ScheduleOrder::Drawn,
        Some(RawOrder::Keyword(k)) => {
            return Err(schema("order", format!("expected a list of ids or \"drawn\", got `{k}`")))
        }
        Some(RawOrder::Listed(ids)) => {
            for id in &ids {
                if !specs.iter().any(|s| s.id() == id) {
                    return Err(ConfigError::Reference(format!("order names unknown section `{id}`")));
                }
            }
            let unique: BTreeSet<_> = ids.iter().collect();
            if unique.len() != ids.len() || ids.len() != specs.len() {
                return Err(schema("order", "must list every section exactly once"));
            }
            ScheduleOrder::Listed(ids)
        }
    };

    Ok(PieceConfig {
        name: raw.name,
        seed: raw.seed,
        variants: raw.variants,
        orchestra,
        manifold,
        order,
        sections: plans,
    })
}

fn build_orchestra(raw: &RawConfig) -> Result<Orchestra, ConfigError> {
    let mut orchestra = Orchestra::new();
    for t in &raw.tunings {
        let table = TuningTable::new(&t.name, t.frequencies.clone())
            .map_err(|e| schema(format!("tuning `{}`", t.name), e))?;
        if orchestra.add_tuning(table).is_some() {
            return Err(schema("tunings", format!("duplicate tuning `{}`", t.name)));
        }
    }
    if raw.instruments.is_empty() {
        return Err(schema("instruments", "at least one instrument is required"));
    }
    for ri in &raw.instruments {
        let at = format!("instrument `{}`", ri.name);
        if ri.name.trim().is_empty() {
            return Err(schema("instruments", "empty instrument name"));
        }
        let mut instr = Instrument::new(&ri.name);
        if let Some(t) = &ri.tuning {
            orchestra
                .tuning(t)
                .map_err(|_| ConfigError::Reference(format!("{at} uses unknown tuning `{t}`")))?;
            instr = instr.with_tuning(t);
        }
        for p in &ri.properties {
            let kind: PropertyKind = p.kind.parse().map_err(|e| schema(&at, e))?;
            let accepted = p
                .accepts
                .iter()
                .map(|a| a.parse::<ValueType>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| schema(&at, e))?;
            let desc = PropertyDescriptor::new(&p.name, kind, accepted, p.range)
                .map_err(|e| schema(&at, e))?;
            if instr.register_property(desc).is_some() {
                return Err(schema(&at, format!("duplicate property `{}`", p.name)));
            }
        }
        if orchestra.add_instrument(instr).is_some() {
            return Err(schema("instruments", format!("duplicate instrument `{}`", ri.name)));
        }
    }
    Ok(orchestra)
}

fn distribution(raw: RawDistribution) -> Result<Distribution, Error> {
    match raw {
        RawDistribution::Uniform { min, max } => Distribution::uniform(min, max),
        RawDistribution::Fixed(x) => Distribution::fixed(x),
        RawDistribution::Weights(w) => Distribution::weights(w),
        RawDistribution::Exponential { rate } => Distribution::exponential(rate),
    }
}

/// Reads a JSON scalar as a property value. Numbers become `Number` when the
/// descriptor takes numbers and `Index` when it only takes indices.
fn property_value(
    value: &Value,
    desc: Option<&PropertyDescriptor>,
) -> Result<PropertyValue, String> {
    let accepts = |ty| desc.map_or(ty == ValueType::Number, |d| d.accepts(ty));
    match value {
        Value::String(s) => Ok(PropertyValue::Text(s.clone())),
        Value::Number(num) => {
            if accepts(ValueType::Number) {
                num.as_f64()
                    .map(PropertyValue::Number)
                    .ok_or_else(|| format!("{num} is not a finite number"))
            } else if accepts(ValueType::Index) {
                num.as_u64()
                    .map(|i| PropertyValue::Index(i as usize))
                    .ok_or_else(|| format!("{num} is not a tuning index"))
            } else {
                Err(format!("{num}: property takes text only"))
            }
        }
        other => Err(format!("{other} is not a number or string")),
    }
}

fn build_generator(
    raw: RawGenerator,
    orchestra: &Orchestra,
    at: &str,
) -> Result<EventGenerator, ConfigError> {
    let at = format!("{at} generator `{}`", raw.name);
    let instr = orchestra.instrument(&raw.instrument).map_err(|_| {
        ConfigError::Reference(format!("{at} uses unknown instrument `{}`", raw.instrument))
    })?;
    let mut bindings = BTreeMap::new();
    for (key, rb) in raw.bindings {
        let desc = instr.descriptor(&key);
        if desc.is_none() && key != START_TIME && key != DURATION {
            return Err(ConfigError::Reference(format!(
                "{at} binds unknown property `{key}` of instrument `{}`",
                instr.name()
            )));
        }
        let here = format!("{at} binding `{key}`");
        let value = |v: &Value| property_value(v, desc).map_err(|e| schema(&here, e));
        let binding = match rb {
            RawBinding::Distribution(d) => {
                Binding::Distribution(distribution(d).map_err(|e| schema(&here, e))?)
            }
            RawBinding::Envelope(points) => {
                Binding::Envelope(Envelope::new(points).map_err(|e| schema(&here, e))?)
            }
            RawBinding::Value(v) => Binding::Fixed(value(&v)?),
            RawBinding::List { values, indices } => Binding::List {
                values: values.iter().map(value).collect::<Result<_, _>>()?,
                indices,
            },
            RawBinding::Markov {
                states,
                transition,
                initial,
            } => {
                let values: Vec<PropertyValue> = states.iter().map(value).collect::<Result<_, _>>()?;
                let labels = values.iter().map(|v| v.to_string()).collect();
                Binding::Markov {
                    chain: MarkovChain::new(labels, transition).map_err(|e| schema(&here, e))?,
                    values,
                    initial,
                }
            }
        };
        bindings.insert(key, binding);
    }
    let count = distribution(raw.count).map_err(|e| schema(&at, e))?;
    EventGenerator::new(raw.name, raw.instrument, count, bindings).map_err(|e| schema(&at, e))
}

fn check_step(step: &TransformStep) -> Result<(), String> {
    let finite = |name: &str, x: f64| {
        if x.is_finite() {
            Ok(())
        } else {
            Err(format!("{name} must be finite"))
        }
    };
    match *step {
        TransformStep::Transpose { semitones } => finite("semitones", semitones),
        TransformStep::Invert { axis } => finite("axis", axis),
        TransformStep::Retrograde => Ok(()),
        TransformStep::Augment { factor, .. } if factor > 0.0 && factor.is_finite() => Ok(()),
        TransformStep::Augment { factor, .. } => Err(format!("augment factor {factor} must be positive")),
        TransformStep::Canon { voices: 0, .. } => Err("canon needs at least one voice".into()),
        TransformStep::Canon { delay, interval, .. } => {
            finite("interval", interval)?;
            if delay >= 0.0 && delay.is_finite() {
                Ok(())
            } else {
                Err(format!("canon delay {delay} must be >= 0"))
            }
        }
    }
}
