//! Seeded value and event generators.
//!
//! Simple generators ([`Distribution`], [`Envelope`], [`MarkovChain`], value
//! lists) produce property values; an [`EventGenerator`] combines one of them
//! per property with a count distribution to fill a time window with atomic
//! events.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::event::{AtomicEvent, Event};
use crate::property::{Instrument, PropertyValue, ValueType, DURATION, START_TIME};
use crate::rng::RandomSource;

/// Index of the first weight whose normalized prefix sum exceeds `u`.
///
/// Falls back to the last positive weight when rounding leaves every prefix
/// at or below `u`. Returns `None` when no weight is positive.
pub fn pick_weighted(weights: &[f64], u: f64) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut prefix = 0.0;
    for (i, w) in weights.iter().enumerate() {
        prefix += w;
        if *w > 0.0 && prefix / total > u {
            return Some(i);
        }
    }
    weights.iter().rposition(|w| *w > 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Uniform { min: f64, max: f64 },
    DiscreteWeights(Vec<f64>),
    Exponential { rate: f64 },
}

impl Distribution {
    pub fn uniform(min: f64, max: f64) -> Result<Self> {
        Self::Uniform { min, max }.validated()
    }

    pub fn fixed(value: f64) -> Result<Self> {
        Self::uniform(value, value)
    }

    pub fn weights(weights: Vec<f64>) -> Result<Self> {
        Self::DiscreteWeights(weights).validated()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match &self {
            Self::Uniform { min, max } => min.is_finite() && max.is_finite() && min <= max,
            Self::DiscreteWeights(w) => {
                w.iter().all(|x| x.is_finite() && *x >= 0.0) && w.iter().sum::<f64>() > 0.0
            }
            Self::Exponential { rate } => rate.is_finite() && *rate > 0.0,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::invalid("distribution", format!("{self:?}")))
        }
    }

    /// Inverse-CDF transform of a unit draw `u` in `[0, 1)`.
    /// `DiscreteWeights` yields the chosen index.
    pub fn sample_at(&self, u: f64) -> f64 {
        match self {
            Self::Uniform { min, max } => min + u * (max - min),
            Self::DiscreteWeights(w) => pick_weighted(w, u).unwrap_or(0) as f64,
            Self::Exponential { rate } => -(1.0 - u).ln() / rate,
        }
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        self.sample_at(rng.next_unit())
    }

    /// Draws a non-negative count. Discrete weights count from one, so index
    /// `i` means `i + 1` items.
    pub fn count_of(&self, rng: &mut RandomSource) -> usize {
        let x = self.sample(rng);
        match self {
            Self::DiscreteWeights(_) => x as usize + 1,
            _ => x.round().max(0.0) as usize,
        }
    }
}

/// Piecewise-linear breakpoint function, constant beyond its ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    breakpoints: Vec<(f64, f64)>,
}

impl Envelope {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::invalid("envelope", "no breakpoints"));
        }
        if breakpoints
            .iter()
            .any(|(t, v)| !t.is_finite() || !v.is_finite())
        {
            return Err(Error::invalid("envelope", "non-finite breakpoint"));
        }
        if breakpoints.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("envelope", "times must strictly increase"));
        }
        Ok(Self { breakpoints })
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        let (first, last) = (bp[0], bp[bp.len() - 1]);
        if t <= first.0 {
            return first.1;
        }
        if t >= last.0 {
            return last.1;
        }
        // first index with time > t; t lies in [bp[i-1].0, bp[i].0)
        let i = bp.partition_point(|(bt, _)| *bt <= t);
        let (t0, v0) = bp[i - 1];
        let (t1, v1) = bp[i];
        if t == t0 {
            return v0;
        }
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    states: Vec<String>,
    transition: Vec<Vec<f64>>,
}

impl MarkovChain {
    pub fn new(states: Vec<String>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::invalid("markov chain", "no states"));
        }
        if transition.len() != n || transition.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "markov chain with {n} states needs a {n}x{n} transition matrix"
            )));
        }
        for (i, row) in transition.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(
                    "markov chain",
                    format!("row {i} is not a probability vector (sum {sum})"),
                ));
            }
        }
        Ok(Self { states, transition })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Samples the successor of `current`.
    ///
    /// # Panics
    /// If `current` is not a state index.
    pub fn step(&self, current: usize, rng: &mut RandomSource) -> usize {
        let row = &self.transition[current];
        pick_weighted(row, rng.next_unit()).expect("rows sum to one")
    }
}

pub enum Selector<'a> {
    Index(usize),
    Random(&'a mut RandomSource),
}

pub fn select_from_list(values: &[PropertyValue], selector: Selector<'_>) -> Result<PropertyValue> {
    if values.is_empty() {
        return Err(Error::EmptyList);
    }
    let index = match selector {
        Selector::Index(i) => i,
        Selector::Random(rng) => {
            let weights = vec![1.0; values.len()];
            pick_weighted(&weights, rng.next_unit()).expect("positive weights")
        }
    };
    values.get(index).cloned().ok_or(Error::IndexOutOfRange {
        index,
        len: values.len(),
    })
}

/// How one property of generated events gets its value.
#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Distribution(Distribution),
    /// Evaluated at the event's normalized position in the window.
    Envelope(Envelope),
    Fixed(PropertyValue),
    /// Explicit `indices` cycle through `values`; without them each event
    /// draws uniformly.
    List {
        values: Vec<PropertyValue>,
        indices: Option<Vec<usize>>,
    },
    /// Walks the chain from `initial`, one step per event in time order.
    /// `values[i]` is emitted for state `i`.
    Markov {
        chain: MarkovChain,
        values: Vec<PropertyValue>,
        initial: usize,
    },
}

impl Binding {
    fn validate(&self) -> Result<()> {
        match self {
            Binding::List { values, indices } => {
                if values.is_empty() {
                    return Err(Error::EmptyList);
                }
                if let Some(indices) = indices {
                    if indices.is_empty() {
                        return Err(Error::EmptyList);
                    }
                    if let Some(&index) = indices.iter().find(|i| **i >= values.len()) {
                        return Err(Error::IndexOutOfRange {
                            index,
                            len: values.len(),
                        });
                    }
                }
                Ok(())
            }
            Binding::Markov {
                chain,
                values,
                initial,
            } => {
                if values.len() != chain.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} values for {} markov states",
                        values.len(),
                        chain.len()
                    )));
                }
                if *initial >= chain.len() {
                    return Err(Error::IndexOutOfRange {
                        index: *initial,
                        len: chain.len(),
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Fills a window with atomic events for one instrument.
///
/// `Start Time` values are positions in the window normalized to `[0, 1]`
/// and default to a uniform draw. `Duration` values are seconds and default
/// to an even share of the window. Both are clamped so every event fits.
#[derive(Debug, Clone, PartialEq)]
pub struct EventGenerator {
    name: String,
    instrument: String,
    count: Distribution,
    bindings: BTreeMap<String, Binding>,
}

impl EventGenerator {
    pub fn new(
        name: impl Into<String>,
        instrument: impl Into<String>,
        count: Distribution,
        bindings: BTreeMap<String, Binding>,
    ) -> Result<Self> {
        let count = count.validated()?;
        for binding in bindings.values() {
            binding.validate()?;
        }
        Ok(Self {
            name: name.into(),
            instrument: instrument.into(),
            count,
            bindings,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instrument(&self) -> &str {
        &self.instrument
    }

    pub fn bindings(&self) -> &BTreeMap<String, Binding> {
        &self.bindings
    }

    /// Checks that every bound property exists on `instr`.
    pub fn check_against(&self, instr: &Instrument) -> Result<()> {
        for key in self.bindings.keys() {
            if key != START_TIME && key != DURATION && instr.descriptor(key).is_none() {
                return Err(Error::PropertyUnknown {
                    instrument: instr.name().to_owned(),
                    property: key.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn generate_events(
        &self,
        instr: &Instrument,
        window: (f64, f64),
        rng: &mut RandomSource,
    ) -> Result<Vec<AtomicEvent>> {
        let (w_start, w_end) = window;
        if !(w_start.is_finite() && w_end.is_finite() && 0.0 <= w_start && w_start <= w_end) {
            return Err(Error::invalid(
                "window",
                format!("[{w_start}, {w_end}] is not a valid time window"),
            ));
        }
        self.check_against(instr)?;
        let span = w_end - w_start;
        let count = self.count.count_of(rng);
        if count == 0 {
            return Ok(Vec::new());
        }

        let mut walkers = BTreeMap::new();
        let default_start = Binding::Distribution(Distribution::Uniform { min: 0.0, max: 1.0 });
        let start_binding = self.bindings.get(START_TIME).unwrap_or(&default_start);
        let mut starts = Vec::with_capacity(count);
        for k in 0..count {
            let ordinal = k as f64 / (count.max(2) - 1) as f64;
            let u = numeric(
                START_TIME,
                draw(start_binding, k, ordinal, rng, &mut walkers, START_TIME),
            )?;
            starts.push(w_start + u.clamp(0.0, 1.0) * span);
        }
        starts.sort_by(f64::total_cmp);

        let mut events = Vec::with_capacity(count);
        for (k, start) in starts.into_iter().enumerate() {
            let position = if span > 0.0 {
                (start - w_start) / span
            } else {
                0.0
            };
            let duration = match self.bindings.get(DURATION) {
                Some(b) => numeric(DURATION, draw(b, k, position, rng, &mut walkers, DURATION))?,
                None => span / count as f64,
            };
            let duration = duration.clamp(0.0, w_end - start);

            let mut properties = BTreeMap::new();
            for (key, binding) in &self.bindings {
                if key == START_TIME || key == DURATION {
                    continue;
                }
                let desc = instr.descriptor(key).expect("checked above");
                let value = match draw(binding, k, position, rng, &mut walkers, key) {
                    Drawn::Real(x) => {
                        if desc.accepts(ValueType::Number) {
                            PropertyValue::Number(x)
                        } else if desc.accepts(ValueType::Index) {
                            PropertyValue::Index(x.round().max(0.0) as usize)
                        } else {
                            return Err(Error::TypeMismatch {
                                property: key.clone(),
                                found: "number",
                            });
                        }
                    }
                    Drawn::Value(v) => v,
                };
                properties.insert(key.clone(), desc.validate(value)?);
            }
            let event = Event::new(format!("{}.{k:03}", self.name), start, duration)?;
            events.push(AtomicEvent::from_parts(event, instr.name(), properties));
        }
        Ok(events)
    }
}

enum Drawn {
    Real(f64),
    Value(PropertyValue),
}

fn numeric(property: &str, drawn: Drawn) -> Result<f64> {
    match drawn {
        Drawn::Real(x) => Ok(x),
        Drawn::Value(v) => v.as_f64().ok_or_else(|| Error::TypeMismatch {
            property: property.to_owned(),
            found: "text",
        }),
    }
}

fn draw(
    binding: &Binding,
    ordinal: usize,
    position: f64,
    rng: &mut RandomSource,
    walkers: &mut BTreeMap<String, usize>,
    key: &str,
) -> Drawn {
    match binding {
        Binding::Distribution(d) => Drawn::Real(d.sample(rng)),
        Binding::Envelope(env) => Drawn::Real(env.value_at(position)),
        Binding::Fixed(v) => Drawn::Value(v.clone()),
        Binding::List { values, indices } => {
            let selector = match indices {
                Some(idx) => Selector::Index(idx[ordinal % idx.len()]),
                None => Selector::Random(rng),
            };
            Drawn::Value(select_from_list(values, selector).expect("validated list binding"))
        }
        Binding::Markov {
            chain,
            values,
            initial,
        } => {
            let state = match walkers.get(key) {
                None => *initial,
                Some(&prev) => chain.step(prev, rng),
            };
            walkers.insert(key.to_owned(), state);
            Drawn::Value(values[state].clone())
        }
    }
}
