//! Chunk ingestion, segmentation and synthetic test signals.
//!
//! A recording arrives as a [`TimeSeriesChunk`]: one timestamped block of
//! equally spaced acceleration samples. Chunks are immutable after
//! construction and every operation here is a pure function, so per-chunk
//! work parallelizes without coordination.
//!
//! Synthetic signals stand in for field recordings in tests and demos. They
//! are generated with a fixed, portable PRNG (ChaCha8 seeded explicitly, with
//! Gaussian noise via the Box-Muller transform) so that a `(spec, seed)` pair
//! produces bit-identical samples on every platform.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Errors from chunk construction, file I/O and synthesis.
#[derive(Debug, Error)]
pub enum SignalError {
    #[error("no samples")]
    Empty,
    #[error("sample rate must be positive, got {0}")]
    BadSampleRate(f64),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: cannot parse {value:?} as a number")]
    BadRow {
        path: String,
        row: usize,
        value: String,
    },
    #[error("{path}: row {row}: non-finite sample")]
    NonFiniteRow { path: String, row: usize },
    #[error("component frequency {freq_hz} Hz violates Nyquist limit {nyquist_hz} Hz")]
    NyquistViolation { freq_hz: f64, nyquist_hz: f64 },
    #[error("window of {window} samples does not fit in chunk of {len} samples")]
    WindowTooLong { window: usize, len: usize },
    #[error("window and stride must be at least one sample (window_s={window_s}, stride_s={stride_s})")]
    DegenerateWindow { window_s: f64, stride_s: f64 },
    #[error("chunk timestamps must be strictly increasing (index {0})")]
    UnsortedChunks(usize),
    #[error("invalid sidecar {path}: {source}")]
    BadSidecar {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

/// One timestamped high-frequency recording.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesChunk<T: Real> {
    samples: Vec<T>,
    sample_rate_hz: f64,
    /// Acquisition instant of the first sample.
    pub timestamp: DateTime<Utc>,
    /// Label of the originating sensor.
    pub sensor_id: String,
}

impl<T: Real> TimeSeriesChunk<T> {
    /// Builds a chunk, enforcing non-emptiness, a positive sample rate and
    /// finite samples.
    pub fn new(
        samples: Vec<T>,
        sample_rate_hz: f64,
        timestamp: DateTime<Utc>,
        sensor_id: impl Into<String>,
    ) -> Result<Self, SignalError> {
        if samples.is_empty() {
            return Err(SignalError::Empty);
        }
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(SignalError::BadSampleRate(sample_rate_hz));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(SignalError::NonFinite(i));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            timestamp,
            sensor_id: sensor_id.into(),
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced at construction
    }

    /// Recording length in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }
}

/// Failure mode attached to a labelled dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureKind {
    /// Ball-bearing failure.
    Bbf,
    /// Gear-tooth failure.
    Gtf,
}

/// Failure label: what failed and when.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureLabel {
    pub kind: FailureKind,
    pub failure_time: DateTime<Utc>,
}

/// A time-ordered collection of chunks from one sensor, optionally labelled
/// with the failure that ended the campaign.
#[derive(Debug, Clone)]
pub struct Dataset<T: Real> {
    chunks: Vec<TimeSeriesChunk<T>>,
    pub failure_label: Option<FailureLabel>,
}

impl<T: Real> Dataset<T> {
    /// Builds a dataset, requiring strictly increasing chunk timestamps.
    pub fn new(
        chunks: Vec<TimeSeriesChunk<T>>,
        failure_label: Option<FailureLabel>,
    ) -> Result<Self, SignalError> {
        for i in 1..chunks.len() {
            if chunks[i].timestamp <= chunks[i - 1].timestamp {
                return Err(SignalError::UnsortedChunks(i));
            }
        }
        Ok(Self {
            chunks,
            failure_label,
        })
    }

    pub fn chunks(&self) -> &[TimeSeriesChunk<T>] {
        &self.chunks
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }
}

/// One pure-tone component of a synthetic signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneComponent {
    pub freq_hz: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Amplitude modulation applied to the summed components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmSpec {
    pub mod_freq_hz: f64,
    pub depth: f64,
}

/// Frequency modulation applied to every component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmSpec {
    pub mod_freq_hz: f64,
    pub deviation_hz: f64,
}

/// Recipe for a synthetic test signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    #[serde(default)]
    pub components: Vec<ToneComponent>,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub am: Option<AmSpec>,
    #[serde(default)]
    pub fm: Option<FmSpec>,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
}

impl SignalSpec {
    /// Checks every involved frequency (components, FM deviation extremes,
    /// modulation rates) against the Nyquist limit.
    pub fn validate(&self) -> Result<(), SignalError> {
        let nyquist = self.sample_rate_hz / 2.0;
        let reject = |freq_hz: f64| -> Result<(), SignalError> {
            if freq_hz >= nyquist {
                Err(SignalError::NyquistViolation {
                    freq_hz,
                    nyquist_hz: nyquist,
                })
            } else {
                Ok(())
            }
        };
        for c in &self.components {
            reject(c.freq_hz)?;
            if let Some(fm) = &self.fm {
                reject(c.freq_hz + fm.deviation_hz)?;
            }
        }
        if let Some(am) = &self.am {
            reject(am.mod_freq_hz)?;
        }
        if let Some(fm) = &self.fm {
            reject(fm.mod_freq_hz)?;
        }
        Ok(())
    }
}

/// Standard normal variate via the Box-Muller transform.
///
/// Kept in-crate (rather than a distribution crate) so the byte-level output
/// of `(spec, seed)` is pinned by this code alone.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generates a deterministic synthetic chunk from a [`SignalSpec`].
///
/// Component `k` contributes `amplitude * sin(2π freq t + phase)`. With FM,
/// the instantaneous frequency becomes `freq + deviation * sin(2π f_m t)` and
/// the contribution uses its phase integral. AM multiplies the component sum
/// by `1 + depth * sin(2π f_m t)`, then Gaussian noise of the requested
/// standard deviation is added.
pub fn synthesize<T: Real>(
    spec: &SignalSpec,
    seed: u64,
    timestamp: DateTime<Utc>,
    sensor_id: &str,
) -> Result<TimeSeriesChunk<T>, SignalError> {
    spec.validate()?;
    let n = (spec.duration_s * spec.sample_rate_hz).round() as usize;
    if n == 0 {
        return Err(SignalError::Empty);
    }
    let dt = 1.0 / spec.sample_rate_hz;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * dt;
        let mut v = 0.0;
        for c in &spec.components {
            let phase = match &spec.fm {
                // Phase integral of freq + dev*sin(2π f_m t).
                Some(fm) if fm.mod_freq_hz != 0.0 => {
                    tau * c.freq_hz * t
                        + (fm.deviation_hz / fm.mod_freq_hz) * (1.0 - (tau * fm.mod_freq_hz * t).cos())
                }
                _ => tau * c.freq_hz * t,
            };
            v += c.amplitude * (phase + c.phase).sin();
        }
        if let Some(am) = &spec.am {
            v *= 1.0 + am.depth * (tau * am.mod_freq_hz * t).sin();
        }
        if spec.noise_std > 0.0 {
            v += spec.noise_std * gaussian(&mut rng);
        }
        samples.push(T::of(v));
    }
    TimeSeriesChunk::new(samples, spec.sample_rate_hz, timestamp, sensor_id)
}

/// On-disk encoding of a chunk's samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChunkFormat {
    /// One decimal sample per row, optional non-numeric header row.
    Csv,
    /// Little-endian 32-bit float stream.
    RawF32,
}

/// Acquisition metadata stored beside a chunk file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkMeta {
    pub sample_rate_hz: f64,
    pub timestamp: DateTime<Utc>,
    pub sensor_id: String,
}

/// Reads the JSON sidecar (`<stem>.json`) next to a chunk file, if present.
pub fn read_sidecar(chunk_path: &Path) -> Result<Option<ChunkMeta>, SignalError> {
    let sidecar = chunk_path.with_extension("json");
    if !sidecar.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&sidecar).map_err(|source| SignalError::Io {
        path: sidecar.display().to_string(),
        source,
    })?;
    let meta = serde_json::from_str(&text).map_err(|source| SignalError::BadSidecar {
        path: sidecar.display().to_string(),
        source,
    })?;
    Ok(Some(meta))
}

/// Loads a chunk from disk. Metadata comes from the caller (CLI flags or a
/// previously read sidecar).
pub fn load_chunk<T: Real>(
    path: &Path,
    format: ChunkFormat,
    meta: &ChunkMeta,
) -> Result<TimeSeriesChunk<T>, SignalError> {
    let samples = match format {
        ChunkFormat::Csv => read_csv_samples(path)?,
        ChunkFormat::RawF32 => read_raw_f32(path)?,
    };
    if samples.is_empty() {
        return Err(SignalError::Empty);
    }
    TimeSeriesChunk::new(
        samples,
        meta.sample_rate_hz,
        meta.timestamp,
        meta.sensor_id.clone(),
    )
}

fn read_csv_samples<T: Real>(path: &Path) -> Result<Vec<T>, SignalError> {
    let file = fs::File::open(path).map_err(|source| SignalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let row = idx + 1;
        let line = line.map_err(|source| SignalError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => samples.push(T::of(v)),
            Ok(_) => {
                return Err(SignalError::NonFiniteRow {
                    path: path.display().to_string(),
                    row,
                })
            }
            Err(_) => {
                // A non-numeric first row is treated as a header.
                if row == 1 {
                    continue;
                }
                return Err(SignalError::BadRow {
                    path: path.display().to_string(),
                    row,
                    value: field.to_string(),
                });
            }
        }
    }
    Ok(samples)
}

fn read_raw_f32<T: Real>(path: &Path) -> Result<Vec<T>, SignalError> {
    let mut file = fs::File::open(path).map_err(|source| SignalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|source| SignalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut samples = Vec::with_capacity(bytes.len() / 4);
    for (i, word) in bytes.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([word[0], word[1], word[2], word[3]]);
        if !v.is_finite() {
            return Err(SignalError::NonFiniteRow {
                path: path.display().to_string(),
                row: i + 1,
            });
        }
        samples.push(T::of(v as f64));
    }
    Ok(samples)
}

/// Writes samples as a little-endian 32-bit float stream plus a JSON sidecar.
///
/// `f32` chunks round-trip bit-identically through this format.
pub fn write_raw_f32<T: Real>(chunk: &TimeSeriesChunk<T>, path: &Path) -> Result<(), SignalError> {
    let mut bytes = Vec::with_capacity(chunk.len() * 4);
    for s in chunk.samples() {
        bytes.extend_from_slice(&(s.as_f64() as f32).to_le_bytes());
    }
    let io_err = |source| SignalError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(&bytes).map_err(|source| SignalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let meta = ChunkMeta {
        sample_rate_hz: chunk.sample_rate_hz(),
        timestamp: chunk.timestamp,
        sensor_id: chunk.sensor_id.clone(),
    };
    let sidecar = path.with_extension("json");
    fs::write(
        &sidecar,
        serde_json::to_string_pretty(&meta).expect("meta serializes"),
    )
    .map_err(|source| SignalError::Io {
        path: sidecar.display().to_string(),
        source,
    })?;
    Ok(())
}

/// Writes samples as CSV, one per row with a `sample` header.
pub fn write_csv<T: Real>(chunk: &TimeSeriesChunk<T>, path: &Path) -> Result<(), SignalError> {
    let mut out = String::from("sample\n");
    for s in chunk.samples() {
        out.push_str(&format!("{}\n", s));
    }
    fs::write(path, out).map_err(|source| SignalError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Splits a chunk into complete overlapping windows.
///
/// Window `i` covers samples `[i*stride, i*stride + window)`; a trailing
/// window that would run past the end is dropped rather than padded, since
/// padding would distort the embedding geometry downstream. Timestamps are
/// offset by the window start.
pub fn segment<T: Real>(
    chunk: &TimeSeriesChunk<T>,
    window_s: f64,
    stride_s: f64,
) -> Result<Vec<TimeSeriesChunk<T>>, SignalError> {
    let rate = chunk.sample_rate_hz();
    let window = (window_s * rate).round() as usize;
    let stride = (stride_s * rate).round() as usize;
    if window == 0 || stride == 0 {
        return Err(SignalError::DegenerateWindow { window_s, stride_s });
    }
    if window > chunk.len() {
        return Err(SignalError::WindowTooLong {
            window,
            len: chunk.len(),
        });
    }
    let n_windows = (chunk.len() - window) / stride + 1;
    let mut out = Vec::with_capacity(n_windows);
    for i in 0..n_windows {
        let start = i * stride;
        let offset_ns = (start as f64 / rate * 1e9).round() as i64;
        out.push(TimeSeriesChunk {
            samples: chunk.samples[start..start + window].to_vec(),
            sample_rate_hz: rate,
            timestamp: chunk.timestamp + Duration::nanoseconds(offset_ns),
            sensor_id: chunk.sensor_id.clone(),
        });
    }
    Ok(out)
}
