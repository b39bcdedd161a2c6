//! Text renderings of a piece.
//!
//! The synthesis score is a neutral event list, one line per atomic event:
//!
//! ```text
//! ; <piece> <duration>
//! i <instrument> <start> <duration> <key>=<value> ...
//! ```
//!
//! Numbers use fixed six-decimal notation, keys are sorted, frequency
//! properties are written as resolved Hz. Whitespace inside keys and text
//! values becomes `_`. The notation listing is an indented outline of the
//! event tree with pitches spelled as note names.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::event::{AtomicEvent, CompoundEvent, EventNode, Piece};
use crate::property::{
    note_name, resolve_pitch, semitone_from_hz, Orchestra, PropertyKind, PropertyValue,
};

/// Six-decimal fixed notation with negative zero folded to zero.
pub fn fmt6(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

fn token(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect()
}

pub fn render_synthesis_score(piece: &Piece, orchestra: &Orchestra) -> Result<String> {
    let mut out = format!("; {} {}\n", token(piece.name()), fmt6(piece.duration()));
    for atom in piece.flatten_atomics() {
        out.push_str(&score_line(atom, orchestra)?);
        out.push('\n');
    }
    Ok(out)
}

fn score_line(atom: &AtomicEvent, orchestra: &Orchestra) -> Result<String> {
    let instrument = orchestra.instrument(atom.instrument())?;
    let tuning = orchestra.tuning_of(instrument)?;
    let mut fields = Vec::with_capacity(atom.properties().len());
    for (key, value) in atom.properties() {
        let value = instrument.validate(key, value.clone())?;
        let desc = instrument.descriptor(key).expect("validated");
        let text = if desc.kind() == PropertyKind::Frequency {
            let hz = resolve_pitch(&value, tuning).map_err(|e| Error::PitchUnresolvable {
                event: atom.name().to_owned(),
                reason: e.to_string(),
            })?;
            fmt6(hz)
        } else {
            match &value {
                PropertyValue::Text(s) => token(s),
                other => fmt6(other.as_f64().expect("numeric")),
            }
        };
        fields.push((token(key), text));
    }
    fields.sort();
    let mut line = format!(
        "i {} {} {}",
        token(atom.instrument()),
        fmt6(atom.start()),
        fmt6(atom.duration())
    );
    for (key, text) in fields {
        let _ = write!(line, " {key}={text}");
    }
    Ok(line)
}

/// Nearest note name when the pitch is strictly within half a semitone of a
/// MIDI note in `0..=127`, otherwise the frequency itself.
pub fn spell_pitch(hz: f64) -> String {
    if hz > 0.0 && hz.is_finite() {
        let semitone = semitone_from_hz(hz);
        let nearest = semitone.round();
        if (semitone - nearest).abs() < 0.5 && (0.0..=127.0).contains(&nearest) {
            return note_name(nearest as i32);
        }
    }
    format!("{}Hz", fmt6(hz))
}

pub fn render_notation_text(piece: &Piece, orchestra: &Orchestra) -> String {
    let mut out = format!("# {} {}\n", token(piece.name()), fmt6(piece.duration()));
    outline(piece.root(), 0, orchestra, &mut out);
    out
}

fn outline(c: &CompoundEvent, depth: usize, orchestra: &Orchestra, out: &mut String) {
    let (start, end) = c.event().total_span();
    let _ = writeln!(
        out,
        "{:indent$}[{} {}..{}]",
        "",
        token(c.name()),
        fmt6(start),
        fmt6(end),
        indent = depth * 2
    );
    for child in c.children() {
        match child {
            EventNode::Compound(inner) => outline(inner, depth + 1, orchestra, out),
            EventNode::Atomic(a) => {
                let _ = writeln!(
                    out,
                    "{:indent$}{} {} {} {}",
                    "",
                    token(a.name()),
                    pitch_label(a, orchestra),
                    fmt6(a.start()),
                    fmt6(a.duration()),
                    indent = (depth + 1) * 2
                );
            }
        }
    }
}

/// Spelling of the first frequency property of `a`, `-` if it has none.
fn pitch_label(a: &AtomicEvent, orchestra: &Orchestra) -> String {
    let Ok(instrument) = orchestra.instrument(a.instrument()) else {
        return "-".into();
    };
    let pitch = a.properties().iter().find(|(key, _)| {
        instrument
            .descriptor(key)
            .is_some_and(|d| d.kind() == PropertyKind::Frequency)
    });
    match pitch {
        None => "-".into(),
        Some((_, value)) => {
            let tuning = orchestra.tuning_of(instrument).ok().flatten();
            match resolve_pitch(value, tuning) {
                Ok(hz) => spell_pitch(hz),
                Err(_) => token(&value.to_string()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::event::Event;
    use crate::property::{Instrument, PropertyDescriptor};

    fn orchestra() -> Orchestra {
        let mut o = Orchestra::new();
        for name in ["violin", "cello"] {
            o.add_instrument(
                Instrument::new(name)
                    .with_property(PropertyDescriptor::pitch("pitch"))
                    .with_property(
                        PropertyDescriptor::number("amplitude", PropertyKind::Level)
                            .with_range(0.0, 1.0)
                            .unwrap(),
                    ),
            );
        }
        o
    }

    fn note(instr: &str, name: &str, start: f64, dur: f64, pitch: PropertyValue) -> AtomicEvent {
        AtomicEvent::new(
            Event::new(name, start, dur).unwrap(),
            orchestra().instrument(instr).unwrap(),
            [
                ("pitch".to_owned(), pitch),
                ("amplitude".to_owned(), PropertyValue::Number(0.8)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_piece_has_header_only() {
        let piece = Piece::new("empty", 60.0).unwrap();
        let sco = render_synthesis_score(&piece, &orchestra()).unwrap();
        assert_eq!(sco, "; empty 60.000000\n");
    }

    #[test]
    fn single_event_line() {
        let mut piece = Piece::new("p", 10.0).unwrap();
        piece
            .add_child(note("violin", "n", 0.0, 2.5, "A4".into()))
            .unwrap();
        let sco = render_synthesis_score(&piece, &orchestra()).unwrap();
        assert_eq!(
            sco.lines().nth(1),
            Some("i violin 0.000000 2.500000 amplitude=0.800000 pitch=440.000000")
        );
    }

    #[test]
    fn equal_starts_order_by_instrument() {
        let mut piece = Piece::new("p", 10.0).unwrap();
        piece.add_child(note("violin", "a", 1.0, 1.0, "A4".into())).unwrap();
        piece.add_child(note("cello", "b", 1.0, 1.0, "A3".into())).unwrap();
        let sco = render_synthesis_score(&piece, &orchestra()).unwrap();
        let instruments: Vec<_> = sco.lines().skip(1).map(|l| l.split(' ').nth(1).unwrap()).collect();
        assert_eq!(instruments, ["cello", "violin"]);
    }

    #[test]
    fn render_revalidates() {
        let mut piece = Piece::new("p", 10.0).unwrap();
        let bad = AtomicEvent::from_parts(
            Event::new("x", 0.0, 1.0).unwrap(),
            "violin",
            BTreeMap::from([("amplitude".to_owned(), PropertyValue::Number(3.0))]),
        );
        piece.add_child(bad).unwrap();
        assert!(matches!(
            render_synthesis_score(&piece, &orchestra()),
            Err(Error::RangeViolation { .. })
        ));
        let mut piece = Piece::new("p", 10.0).unwrap();
        piece.add_child(note("violin", "n", 0.0, 1.0, PropertyValue::Index(3))).unwrap();
        assert!(matches!(
            render_synthesis_score(&piece, &orchestra()),
            Err(Error::PitchUnresolvable { .. })
        ));
    }

    #[test]
    fn pitch_spelling() {
        assert_eq!(spell_pitch(440.0), "A4");
        // 12 * log2(445 / 440) is about 0.196 semitones
        assert_eq!(spell_pitch(445.0), "A4");
        assert_eq!(spell_pitch(261.625_565_300_598_6), "C4");
        assert_eq!(spell_pitch(1.0), "1.000000Hz");
    }

    #[test]
    fn notation_outline() {
        let mut piece = Piece::new("p", 10.0).unwrap();
        let mut section = CompoundEvent::new(Event::new("A", 0.0, 5.0).unwrap());
        section
            .add_child(note("violin", "n0", 1.0, 1.0, "C4".into()))
            .unwrap();
        piece.add_child(section).unwrap();
        let txt = render_notation_text(&piece, &orchestra());
        assert_eq!(
            txt,
            "# p 10.000000\n[p 0.000000..10.000000]\n  [A 0.000000..5.000000]\n    n0 C4 1.000000 1.000000\n"
        );
    }

    #[test]
    fn negative_zero_is_plain_zero() {
        assert_eq!(fmt6(-0.0), "0.000000");
    }
}
