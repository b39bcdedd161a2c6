//! The event tree.
//!
//! Every level of a piece, from a single partial to the piece itself, is an
//! [`Event`] with a name, a start time and a duration in seconds. Compound
//! events contain other events of shorter or equal duration; atomic events
//! contain none and carry instrument property values instead. Sections,
//! phrases, chords and the like are all compound events distinguished only by
//! their names.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::property::{Instrument, PropertyValue};

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    name: String,
    start: f64,
    duration: f64,
}

impl Event {
    pub fn new(name: impl Into<String>, start: f64, duration: f64) -> Result<Self> {
        let name = name.into();
        let fail = |reason: String| Error::InvalidEvent {
            name: name.clone(),
            reason,
        };
        if name.is_empty() {
            return Err(fail("empty name".into()));
        }
        if !(start.is_finite() && start >= 0.0) {
            return Err(fail(format!("start {start} must be finite and non-negative")));
        }
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(fail(format!(
                "duration {duration} must be finite and non-negative"
            )));
        }
        Ok(Self {
            name,
            start,
            duration,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// `(start, start + duration)`.
    pub fn total_span(&self) -> (f64, f64) {
        (self.start, self.end())
    }

    /// Whether `other` has a shorter or equal duration and lies inside this
    /// event's interval.
    pub fn contains(&self, other: &Event) -> bool {
        other.duration <= self.duration && other.start >= self.start && other.end() <= self.end()
    }

    pub fn with_start(&self, start: f64) -> Result<Self> {
        Self::new(self.name.clone(), start, self.duration)
    }

    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        Self::new(self.name.clone(), self.start, duration)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Result<Self> {
        Self::new(name, self.start, self.duration)
    }

    fn order_key(&self, other: &Self) -> Ordering {
        self.start
            .total_cmp(&other.start)
            .then_with(|| self.name.cmp(&other.name))
    }
}

/// An event carrying property values for one instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicEvent {
    event: Event,
    instrument: String,
    properties: BTreeMap<String, PropertyValue>,
}

impl AtomicEvent {
    /// Builds an atomic event, validating every value against `instrument`.
    pub fn new(
        event: Event,
        instrument: &Instrument,
        properties: impl IntoIterator<Item = (String, PropertyValue)>,
    ) -> Result<Self> {
        let properties = properties
            .into_iter()
            .map(|(key, value)| {
                let value = instrument.validate(&key, value)?;
                Ok((key, value))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            event,
            instrument: instrument.name().to_owned(),
            properties,
        })
    }

    /// Builds an atomic event without consulting the instrument table.
    /// Rendering validates again, so this is only for trusted callers.
    pub fn from_parts(
        event: Event,
        instrument: impl Into<String>,
        properties: BTreeMap<String, PropertyValue>,
    ) -> Self {
        Self {
            event,
            instrument: instrument.into(),
            properties,
        }
    }

    pub fn event(&self) -> &Event {
        &self.event
    }

    pub fn name(&self) -> &str {
        self.event.name()
    }

    pub fn start(&self) -> f64 {
        self.event.start
    }

    pub fn duration(&self) -> f64 {
        self.event.duration
    }

    pub fn instrument(&self) -> &str {
        &self.instrument
    }

    pub fn properties(&self) -> &BTreeMap<String, PropertyValue> {
        &self.properties
    }

    pub fn property(&self, key: &str) -> Option<&PropertyValue> {
        self.properties.get(key)
    }

    pub fn with_event(&self, event: Event) -> Self {
        Self {
            event,
            ..self.clone()
        }
    }

    pub fn with_property(&self, key: impl Into<String>, value: PropertyValue) -> Self {
        let mut next = self.clone();
        next.properties.insert(key.into(), value);
        next
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventNode {
    Compound(CompoundEvent),
    Atomic(AtomicEvent),
}

impl EventNode {
    pub fn event(&self) -> &Event {
        match self {
            EventNode::Compound(c) => &c.event,
            EventNode::Atomic(a) => &a.event,
        }
    }
}

impl From<CompoundEvent> for EventNode {
    fn from(c: CompoundEvent) -> Self {
        EventNode::Compound(c)
    }
}

impl From<AtomicEvent> for EventNode {
    fn from(a: AtomicEvent) -> Self {
        EventNode::Atomic(a)
    }
}

/// An event containing an ordered list of shorter-or-equal events.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundEvent {
    event: Event,
    children: Vec<EventNode>,
}

impl CompoundEvent {
    pub fn new(event: Event) -> Self {
        Self {
            event,
            children: Vec::new(),
        }
    }

    pub fn event(&self) -> &Event {
        &self.event
    }

    pub fn name(&self) -> &str {
        self.event.name()
    }

    /// Children ordered by `(start, name)`.
    pub fn children(&self) -> &[EventNode] {
        &self.children
    }

    /// Inserts `child` after every sibling ordering at or before it.
    pub fn add_child(&mut self, child: impl Into<EventNode>) -> Result<()> {
        let child = child.into();
        let inner = child.event();
        if !self.event.contains(inner) {
            return Err(Error::ContainmentViolation {
                parent: self.event.name.clone(),
                parent_start: self.event.start,
                parent_end: self.event.end(),
                child: inner.name.clone(),
                child_start: inner.start,
                child_end: inner.end(),
            });
        }
        let at = self
            .children
            .partition_point(|c| c.event().order_key(inner) != Ordering::Greater);
        self.children.insert(at, child);
        Ok(())
    }

    /// Removes the first child equal to `child`.
    pub fn remove_child(&mut self, child: &EventNode) -> Option<EventNode> {
        let at = self.children.iter().position(|c| c == child)?;
        Some(self.children.remove(at))
    }

    /// Re-checks containment and ordering over the whole subtree.
    pub fn check(&self) -> Result<()> {
        for pair in self.children.windows(2) {
            if pair[0].event().order_key(pair[1].event()) == Ordering::Greater {
                return Err(Error::InvalidEvent {
                    name: self.event.name.clone(),
                    reason: "children out of (start, name) order".into(),
                });
            }
        }
        for child in &self.children {
            if !self.event.contains(child.event()) {
                let inner = child.event();
                return Err(Error::ContainmentViolation {
                    parent: self.event.name.clone(),
                    parent_start: self.event.start,
                    parent_end: self.event.end(),
                    child: inner.name.clone(),
                    child_start: inner.start,
                    child_end: inner.end(),
                });
            }
            if let EventNode::Compound(c) = child {
                c.check()?;
            }
        }
        Ok(())
    }

    fn collect_atomics<'a>(&'a self, out: &mut Vec<&'a AtomicEvent>) {
        for child in &self.children {
            match child {
                EventNode::Atomic(a) => out.push(a),
                EventNode::Compound(c) => c.collect_atomics(out),
            }
        }
    }

    /// Depth-first list of the atomic leaves in this subtree, unsorted.
    pub fn atomics(&self) -> Vec<&AtomicEvent> {
        let mut out = Vec::new();
        self.collect_atomics(&mut out);
        out
    }
}

/// The most inclusive compound event; starts at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    root: CompoundEvent,
}

impl Piece {
    pub fn new(name: impl Into<String>, duration: f64) -> Result<Self> {
        Ok(Self {
            root: CompoundEvent::new(Event::new(name, 0.0, duration)?),
        })
    }

    pub fn from_root(root: CompoundEvent) -> Result<Self> {
        if root.event.start != 0.0 {
            return Err(Error::InvalidEvent {
                name: root.event.name.clone(),
                reason: "a piece must start at 0".into(),
            });
        }
        root.check()?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &CompoundEvent {
        &self.root
    }

    pub fn name(&self) -> &str {
        self.root.name()
    }

    pub fn duration(&self) -> f64 {
        self.root.event.duration
    }

    pub fn add_child(&mut self, child: impl Into<EventNode>) -> Result<()> {
        self.root.add_child(child)
    }

    /// All atomic leaves sorted by `(start, instrument, name)`.
    pub fn flatten_atomics(&self) -> Vec<&AtomicEvent> {
        let mut atoms = self.root.atomics();
        atoms.sort_by(|a, b| {
            a.start()
                .total_cmp(&b.start())
                .then_with(|| a.instrument.cmp(&b.instrument))
                .then_with(|| a.name().cmp(b.name()))
        });
        atoms
    }
}
