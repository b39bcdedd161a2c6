//! The manifold workflow: schedule sections, fill them with generated
//! events, transform, render. Each variant is driven by its own seed,
//! `base_seed + index`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{ConfigError, PieceConfig, SectionPlan, TransformStep};
use crate::error::Error;
use crate::event::{AtomicEvent, CompoundEvent, Event, Piece};
use crate::matrix::Assignment;
use crate::rng::RandomSource;
use crate::score::{fmt6, render_notation_text, render_synthesis_score};
use crate::transform::EventGroup;

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scheduling failed: {0}")]
    Scheduling(Error),
    #[error("composition failed: {0}")]
    Compose(Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ComposeError {
    /// Process exit code: 2 for bad configurations, 3 for infeasible
    /// schedules, 4 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ComposeError::Config(_) | ComposeError::Compose(_) => 2,
            ComposeError::Scheduling(_) => 3,
            ComposeError::Io { .. } => 4,
        }
    }
}

impl From<Error> for ComposeError {
    fn from(e: Error) -> Self {
        match e {
            Error::SchedulingInfeasible(_) | Error::NoFeasibleDuration { .. } => {
                ComposeError::Scheduling(e)
            }
            other => ComposeError::Compose(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub score: bool,
    pub notation: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self {
            score: true,
            notation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub index: usize,
    pub seed: u64,
    pub assignments: Vec<Assignment>,
    pub piece: Piece,
    pub score: String,
    pub notation: String,
}

impl Variant {
    pub fn summary(&self) -> String {
        let mut out = format!("variant {} seed {}\n", self.index, self.seed);
        let mut by_start: Vec<_> = self.assignments.iter().collect();
        by_start.sort_by(|a, b| a.start.total_cmp(&b.start));
        for a in by_start {
            let _ = writeln!(
                out,
                "  {} start {} duration {} marks {}..{}",
                a.section,
                fmt6(a.start),
                fmt6(a.duration),
                a.mark,
                a.mark + a.span
            );
        }
        out
    }
}

/// Composes variant `index` of `config`.
pub fn compose_variant(config: &PieceConfig, index: usize, base_seed: u64) -> Result<Variant, ComposeError> {
    let seed = base_seed.wrapping_add(index as u64);
    let mut rng = RandomSource::new(seed);
    let assignments = config.manifold.schedule(&config.order, &mut rng)?;

    let mut piece = Piece::new(&config.name, config.end())?;
    for plan in &config.sections {
        let a = assignments
            .iter()
            .find(|a| a.section == plan.id)
            .expect("every section is scheduled");
        piece.add_child(fill_section(config, plan, a, &mut rng)?)?;
    }
    let score = render_synthesis_score(&piece, &config.orchestra)?;
    let notation = render_notation_text(&piece, &config.orchestra);
    Ok(Variant {
        index,
        seed,
        assignments,
        piece,
        score,
        notation,
    })
}

pub fn compose(config: &PieceConfig, variants: usize, base_seed: u64) -> Result<Vec<Variant>, ComposeError> {
    (0..variants)
        .map(|v| compose_variant(config, v, base_seed))
        .collect()
}

fn fill_section(
    config: &PieceConfig,
    plan: &SectionPlan,
    a: &Assignment,
    rng: &mut RandomSource,
) -> Result<CompoundEvent, Error> {
    let window = (a.start, a.start + a.duration);
    let mut events = Vec::new();
    for generator in &plan.generators {
        let instrument = config.orchestra.instrument(generator.instrument())?;
        events.extend(generator.generate_events(instrument, window, rng)?);
    }
    if !plan.transforms.is_empty() {
        let mut group = EventGroup::new(events, &plan.pitch_property, window)?
            .resolve_pitches(&config.orchestra)?;
        for step in &plan.transforms {
            group = apply_step(&group, step, window)?;
        }
        events = trim(group.into_events(), window)?;
    }
    let mut section = CompoundEvent::new(Event::new(&plan.id, a.start, a.duration)?);
    for event in events {
        section.add_child(event)?;
    }
    Ok(section)
}

fn apply_step(group: &EventGroup, step: &TransformStep, window: (f64, f64)) -> Result<EventGroup, Error> {
    match *step {
        TransformStep::Transpose { semitones } => group.transpose(semitones),
        TransformStep::Invert { axis } => group.invert(axis),
        TransformStep::Retrograde => group.retrograde(),
        TransformStep::Augment { factor, mode } => group.augment(factor, mode.into()),
        TransformStep::Canon {
            voices,
            delay,
            interval,
        } => {
            let mut merged = Vec::new();
            for (v, voice) in group.canon(voices, delay, interval)?.into_iter().enumerate() {
                for e in voice.into_events() {
                    if v == 0 {
                        merged.push(e);
                    } else {
                        let renamed = e.event().renamed(format!("{}~{v}", e.name()))?;
                        merged.push(e.with_event(renamed));
                    }
                }
            }
            // later voices may run past the section; trimmed at the end
            let hi = merged
                .iter()
                .map(|e| e.event().end())
                .fold(window.1, f64::max);
            EventGroup::new(merged, group.pitch_key(), (group.span().0, hi))
        }
    }
}

/// Clips transformed events to the section: events starting after its end
/// are dropped and the rest are shortened to fit.
fn trim(events: Vec<AtomicEvent>, (lo, hi): (f64, f64)) -> Result<Vec<AtomicEvent>, Error> {
    let mut out = Vec::with_capacity(events.len());
    for e in events {
        let start = e.start();
        if start < lo || start > hi || (start == hi && e.duration() > 0.0) {
            continue;
        }
        let duration = e.duration().min(hi - start);
        out.push(e.with_event(e.event().with_duration(duration)?));
    }
    Ok(out)
}

pub fn score_path(dir: &Path, piece: &str, variant: usize) -> PathBuf {
    dir.join(format!("{piece}-v{variant}.sco"))
}

pub fn notation_path(dir: &Path, piece: &str, variant: usize) -> PathBuf {
    dir.join(format!("{piece}-v{variant}.txt"))
}

/// Writes the requested renderings of `variant` into `dir`, returning the
/// paths written.
pub fn write_variant(
    dir: &Path,
    piece: &str,
    variant: &Variant,
    formats: Formats,
) -> Result<Vec<PathBuf>, ComposeError> {
    fs::create_dir_all(dir).map_err(|source| ComposeError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    let outputs = [
        (formats.score, score_path(dir, piece, variant.index), &variant.score),
        (formats.notation, notation_path(dir, piece, variant.index), &variant.notation),
    ];
    for (wanted, path, text) in outputs {
        if !wanted {
            continue;
        }
        fs::write(&path, text).map_err(|source| ComposeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}
