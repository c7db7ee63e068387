//! Emotion-dependent facial shape animation from affective speech.
//!
//! The pipeline is a cascade of two learned stages:
//!
//! ```text
//! WAV -> MFSC frames -> spectral images -> DERN (per-frame emotion) -> top-two decision
//!                                       \-> DSRN bank (one per emotion) -> fused windows
//!                                           -> overlap average -> PCA params -> landmarks
//! ```
//!
//! * [`audio`] turns PCM audio into z-scored 40-band log mel energies at 100 Hz.
//! * [`shape`] aligns 36-point lower-face landmarks (GPA) and learns the PCA shape space.
//! * [`nn`] is a small deterministic CNN engine (conv, pooling, dense, dropout, Adam).
//! * [`emotion`] aggregates frame labels into an utterance-level top-two decision.
//! * [`regression`] fuses the per-emotion regressors and overlap-averages their windows.
//! * [`corpus`], [`synth`] and [`pipeline`] wire everything into trainable experiments.

pub mod audio;
pub mod bench;
pub mod corpus;
pub mod emotion;
pub mod error;
pub mod nn;
pub mod pipeline;
pub mod regression;
pub mod render;
pub mod shape;
pub mod synth;
pub mod window;

pub use error::{Error, Result};

/// Number of mel bands per acoustic frame.
pub const MEL_BANDS: usize = 40;
/// Number of lower-face landmarks.
pub const LANDMARKS: usize = 36;
/// Acoustic (and upsampled visual) frame rate in Hz.
pub const FRAME_RATE: u32 = 100;
/// Landmark tracks are ingested at this rate.
pub const VIDEO_RATE: u32 = 25;
