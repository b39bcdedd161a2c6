//! Transposition, inversion, retrograde, augmentation, chord rearrangement
//! and canon over groups of atomic events.
//!
//! Pitch transforms work on Hz and note-name pitches and always write the
//! result back as Hz. Tuning-table indices must be resolved to Hz first
//! ([`EventGroup::resolve_pitches`]). Events without the group's pitch
//! property keep their pitch untouched.

use crate::error::{Error, Result};
use crate::event::AtomicEvent;
use crate::property::{
    hz_from_semitone, parse_note, semitone_from_hz, Orchestra, PropertyValue,
};

/// Pitches in MIDI semitone space (A4 = 69).
#[derive(Debug, Clone, PartialEq)]
pub struct PitchSet(pub Vec<f64>);

impl PitchSet {
    pub fn transpose(&self, interval: f64) -> Self {
        Self(self.0.iter().map(|p| p + interval).collect())
    }

    pub fn invert(&self, axis: f64) -> Self {
        Self(self.0.iter().map(|p| 2.0 * axis - p).collect())
    }

    /// The `k`-th inversion: the lowest pitch is raised an octave `k` times.
    /// `k` equal to the chord size transposes the chord up an octave.
    pub fn chord_invert(&self, k: usize) -> Result<Self> {
        if self.0.is_empty() {
            return Err(Error::EmptyChord);
        }
        let mut pitches = self.0.clone();
        pitches.sort_by(f64::total_cmp);
        let octaves = (k / pitches.len()) as f64;
        let rest = k % pitches.len();
        for (i, p) in pitches.iter_mut().enumerate() {
            *p += 12.0 * (octaves + if i < rest { 1.0 } else { 0.0 });
        }
        pitches.sort_by(f64::total_cmp);
        Ok(Self(pitches))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentMode {
    Durations,
    PitchIntervals,
}

/// Atomic events transformed together, with the span they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct EventGroup {
    events: Vec<AtomicEvent>,
    pitch_key: String,
    span: (f64, f64),
}

impl EventGroup {
    pub fn new(
        mut events: Vec<AtomicEvent>,
        pitch_key: impl Into<String>,
        span: (f64, f64),
    ) -> Result<Self> {
        let (lo, hi) = span;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(Error::invalid("event group", format!("bad span [{lo}, {hi}]")));
        }
        if let Some(e) = events
            .iter()
            .find(|e| e.start() < lo || e.event().end() > hi)
        {
            return Err(Error::ContainmentViolation {
                parent: "group".into(),
                parent_start: lo,
                parent_end: hi,
                child: e.name().to_owned(),
                child_start: e.start(),
                child_end: e.event().end(),
            });
        }
        sort_events(&mut events);
        Ok(Self {
            events,
            pitch_key: pitch_key.into(),
            span,
        })
    }

    /// A group spanning exactly its events.
    pub fn from_events(events: Vec<AtomicEvent>, pitch_key: impl Into<String>) -> Result<Self> {
        let lo = events.iter().map(|e| e.start()).fold(f64::INFINITY, f64::min);
        let hi = events
            .iter()
            .map(|e| e.event().end())
            .fold(f64::NEG_INFINITY, f64::max);
        let span = if events.is_empty() { (0.0, 0.0) } else { (lo, hi) };
        Self::new(events, pitch_key, span)
    }

    pub fn events(&self) -> &[AtomicEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<AtomicEvent> {
        self.events
    }

    pub fn pitch_key(&self) -> &str {
        &self.pitch_key
    }

    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Pitches in semitones, `None` for events without the pitch property.
    pub fn semitones(&self) -> Result<Vec<Option<f64>>> {
        self.events
            .iter()
            .map(|e| Ok(self.pitch_hz(e)?.map(semitone_from_hz)))
            .collect()
    }

    /// Rewrites every pitch as Hz using the instruments' tuning tables.
    pub fn resolve_pitches(&self, orchestra: &Orchestra) -> Result<Self> {
        self.map_events(|e| {
            let Some(value) = e.property(&self.pitch_key) else {
                return Ok(e.clone());
            };
            let unresolvable = |err: Error| Error::PitchUnresolvable {
                event: e.name().to_owned(),
                reason: err.to_string(),
            };
            let instrument = orchestra.instrument(e.instrument()).map_err(unresolvable)?;
            let tuning = orchestra.tuning_of(instrument).map_err(unresolvable)?;
            let hz = crate::property::resolve_pitch(value, tuning).map_err(unresolvable)?;
            Ok(e.with_property(self.pitch_key.clone(), PropertyValue::Number(hz)))
        })
    }

    fn pitch_hz(&self, e: &AtomicEvent) -> Result<Option<f64>> {
        let fail = |reason: String| Error::PitchUnresolvable {
            event: e.name().to_owned(),
            reason,
        };
        match e.property(&self.pitch_key) {
            None => Ok(None),
            Some(PropertyValue::Number(hz)) if *hz > 0.0 && hz.is_finite() => Ok(Some(*hz)),
            Some(PropertyValue::Number(hz)) => Err(fail(format!("{hz} Hz is not positive"))),
            Some(PropertyValue::Text(name)) => parse_note(name)
                .map(|p| Some(hz_from_semitone(p as f64)))
                .map_err(|err| fail(err.to_string())),
            Some(PropertyValue::Index(i)) => Err(fail(format!(
                "tuning index {i} must be resolved before transforming"
            ))),
        }
    }

    fn map_events(&self, f: impl Fn(&AtomicEvent) -> Result<AtomicEvent>) -> Result<Self> {
        let mut events = self
            .events
            .iter()
            .map(f)
            .collect::<Result<Vec<_>>>()?;
        sort_events(&mut events);
        Ok(Self {
            events,
            pitch_key: self.pitch_key.clone(),
            span: self.span,
        })
    }

    fn map_hz(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.map_events(|e| match self.pitch_hz(e)? {
            Some(hz) => Ok(e.with_property(self.pitch_key.clone(), PropertyValue::Number(f(hz)))),
            None => Ok(e.clone()),
        })
    }

    pub fn transpose(&self, semitones: f64) -> Result<Self> {
        let ratio = 2f64.powf(semitones / 12.0);
        self.map_hz(|hz| hz * ratio)
    }

    /// Reflects every pitch about `axis` (in semitones).
    pub fn invert(&self, axis: f64) -> Result<Self> {
        let axis_hz = hz_from_semitone(axis);
        self.map_hz(|hz| axis_hz * (axis_hz / hz))
    }

    /// Mirrors every event in time about the centre of the span.
    pub fn retrograde(&self) -> Result<Self> {
        let (lo, hi) = self.span;
        self.map_events(|e| {
            let start = (lo + hi - e.event().end()).max(lo);
            Ok(e.with_event(e.event().with_start(start)?))
        })
    }

    pub fn augment(&self, factor: f64, mode: AugmentMode) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::invalid(
                "augmentation",
                format!("factor {factor} must be positive"),
            ));
        }
        match mode {
            AugmentMode::Durations => {
                let (lo, hi) = self.span;
                let mut out = self.map_events(|e| {
                    let event = e
                        .event()
                        .with_start(lo + factor * (e.start() - lo))?
                        .with_duration(factor * e.duration())?;
                    Ok(e.with_event(event))
                })?;
                out.span = (lo, lo + factor * (hi - lo));
                Ok(out)
            }
            AugmentMode::PitchIntervals => {
                let anchor = self
                    .events
                    .iter()
                    .find_map(|e| self.pitch_hz(e).transpose())
                    .transpose()?;
                match anchor {
                    Some(anchor) => self.map_hz(|hz| anchor * (hz / anchor).powf(factor)),
                    None => Ok(self.clone()),
                }
            }
        }
    }

    /// Moves the whole group, span included, by `delta` seconds.
    pub fn shift(&self, delta: f64) -> Result<Self> {
        let mut out = self.map_events(|e| Ok(e.with_event(e.event().with_start(e.start() + delta)?)))?;
        out.span = (self.span.0 + delta, self.span.1 + delta);
        Ok(out)
    }

    /// Imitations of this group: voice `v` enters `v * delay` seconds later,
    /// transposed by `v * interval` semitones. Voice 0 is the group itself.
    pub fn canon(&self, voices: usize, delay: f64, interval: f64) -> Result<Vec<Self>> {
        if voices == 0 {
            return Err(Error::invalid("canon", "needs at least one voice"));
        }
        if !(delay.is_finite() && delay >= 0.0) {
            return Err(Error::invalid("canon", format!("delay {delay} must be >= 0")));
        }
        let mut out = vec![self.clone()];
        for v in 1..voices {
            out.push(self.shift(v as f64 * delay)?.transpose(v as f64 * interval)?);
        }
        Ok(out)
    }
}

fn sort_events(events: &mut [AtomicEvent]) {
    events.sort_by(|a, b| {
        a.start()
            .total_cmp(&b.start())
            .then_with(|| a.name().cmp(b.name()))
    });
}
