//! Topological and spectral condition monitoring for high-frequency
//! vibration recordings.
//!
//! The crate turns raw acceleration time series into health indicators and
//! trend reports through a fixed pipeline:
//!
//! 1. [`signal`] — load, synthesize and segment timestamped recording chunks.
//! 2. [`embedding`] — reconstruct state space via time-delay embedding, with
//!    data-driven delay/dimension selection and point-cloud utilities.
//! 3. [`persistence`] — Vietoris-Rips persistent homology in dimensions 0-2,
//!    with a brute-force reference reduction for verification.
//! 4. [`indicators`] — scalar summaries of persistence diagrams (maximum
//!    persistence, amplitude, entropy, Betti-curve area, polynomial
//!    f-indicators) plus signal statistics.
//! 5. [`spectral`] — FFT magnitude spectra, per-band peak tracking, spectral
//!    distance, demodulated band RMS and spectrograms.
//! 6. [`monitor`] — baseline fitting over early recordings, z-score trend
//!    flagging, sliding-window dispersion and the batch pipeline.
//!
//! Core math is generic over the scalar type through [`Real`] (implemented by
//! `f32` and `f64`); the pipeline, file formats and CLI operate on the `f64`
//! aliases exported below.

pub mod embedding;
pub mod indicators;
pub mod monitor;
pub mod persistence;
pub mod scalar;
pub mod signal;
pub mod spectral;

pub use scalar::Real;

/// Concrete `f64` aliases used by the pipeline, file formats and CLI.
pub type TimeSeriesChunk = signal::TimeSeriesChunk<f64>;
pub type Dataset = signal::Dataset<f64>;
pub type PointCloud = embedding::PointCloud<f64>;
pub type PersistenceDiagram = persistence::PersistenceDiagram<f64>;
pub type PersistencePair = persistence::PersistencePair<f64>;
pub type BettiCurve = persistence::BettiCurve<f64>;
pub type Spectrum = spectral::Spectrum<f64>;
pub type Spectrogram = spectral::Spectrogram<f64>;
pub type PeakFeature = spectral::PeakFeature<f64>;

