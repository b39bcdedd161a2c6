//! Composition engine built on an event tree spanning every time scale.
//!
//! * [`event`]: compound and atomic events, the piece
//! * [`property`]: instruments, typed properties, pitch spellings
//! * [`generators`]: seeded distributions, envelopes, Markov chains, event generators
//! * [`matrix`]: start-time and duration probability matrices, section scheduling
//! * [`transform`]: transposition, inversion, retrograde, augmentation, canon
//! * [`score`]: synthesis score and notation listing
//! * [`config`] / [`compose`]: the configuration-driven variant pipeline

pub mod compose;
pub mod config;
pub mod error;
pub mod event;
pub mod generators;
pub mod matrix;
pub mod property;
pub mod rng;
pub mod score;
pub mod transform;

pub use error::{Error, Result};
