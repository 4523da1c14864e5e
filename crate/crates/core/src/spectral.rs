//! Frequency-domain health indicators.
//!
//! All spectra are one-sided magnitude spectra on the grid `k * rate / N`.
//! The `amplitude` normalization scales bins so a unit sinusoid shows up as a
//! unit peak; `counts` keeps raw FFT magnitudes. A [`Spectrum`] records which
//! normalization produced it and comparisons across tags are rejected.
//!
//! The demodulated band indicator reproduces the ISO-style pipeline: 4th
//! order zero-phase Butterworth band-pass 500-2000 Hz, envelope via the
//! analytic-signal magnitude, then the RMS of the envelope spectrum over
//! 1-150 Hz.

use std::fmt::Write as _;

use rustfft::num_complex::Complex64;
use rustfft::{num_complex::Complex, FftNum, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::signal::TimeSeriesChunk;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("spectra live on different frequency grids")]
    GridMismatch,
    #[error("spectra carry different normalizations and cannot be compared")]
    NormalizationMismatch,
    #[error("band [{lo_hz}, {hi_hz}] Hz must satisfy 0 <= lo < hi")]
    InvalidBand { lo_hz: f64, hi_hz: f64 },
    #[error("band [{lo_hz}, {hi_hz}] Hz exceeds the spectrum range (max {max_hz} Hz)")]
    BandOutOfRange { lo_hz: f64, hi_hz: f64, max_hz: f64 },
    #[error("band contains {bins} bins, need at least 3")]
    BandTooNarrow { bins: usize },
    #[error("window of {window} samples does not fit in chunk of {len} samples")]
    WindowTooLong { window: usize, len: usize },
    #[error("overlap fraction must lie in [0, 1), got {0}")]
    BadOverlap(f64),
    #[error("demodulated band RMS needs a sample rate above 4 kHz, got {0} Hz")]
    SampleRateTooLow(f64),
    #[error("demodulated band RMS needs at least 1 s of signal, got {0:.3} s")]
    ChunkTooShort(f64),
}

/// How the FFT magnitudes were scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Unit sinusoid maps to a unit peak (`2|X_k|/N`, endpoints `|X_k|/N`).
    Amplitude,
    /// Raw FFT magnitudes `|X_k|`.
    Counts,
}

/// One-sided magnitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Real> {
    freqs_hz: Vec<f64>,
    magnitudes: Vec<T>,
    normalization: Normalization,
    n_samples: usize,
}

impl<T: Real> Spectrum<T> {
    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs_hz
    }

    pub fn magnitudes(&self) -> &[T] {
        &self.magnitudes
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }

    pub fn bin_spacing_hz(&self) -> f64 {
        if self.freqs_hz.len() > 1 {
            self.freqs_hz[1] - self.freqs_hz[0]
        } else {
            0.0
        }
    }

    /// Time-domain energy `sum(x^2)` reconstructed from the spectrum via the
    /// Parseval identity for the stored normalization.
    pub fn signal_energy(&self) -> T {
        let n = T::of_usize(self.n_samples);
        let two = T::of(2.0);
        let nyquist_bin = self.n_samples % 2 == 0;
        let last = self.magnitudes.len() - 1;
        let mut acc = T::zero();
        for (k, &m) in self.magnitudes.iter().enumerate() {
            let interior = k != 0 && (k != last || !nyquist_bin);
            match self.normalization {
                Normalization::Amplitude => {
                    if interior {
                        acc += m * m * n / two;
                    } else {
                        acc += m * m * n;
                    }
                }
                Normalization::Counts => {
                    if interior {
                        acc += two * m * m / n;
                    } else {
                        acc += m * m / n;
                    }
                }
            }
        }
        acc
    }

    /// CSV rows `freq_hz,magnitude`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,magnitude\n");
        for (f, m) in self.freqs_hz.iter().zip(&self.magnitudes) {
            writeln!(out, "{},{}", f, m).expect("string write");
        }
        out
    }
}

/// Frequency band in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Band {
    pub fn new(lo_hz: f64, hi_hz: f64) -> Result<Self, SpectralError> {
        if !(lo_hz >= 0.0 && lo_hz < hi_hz) {
            return Err(SpectralError::InvalidBand { lo_hz, hi_hz });
        }
        Ok(Self { lo_hz, hi_hz })
    }
}

/// Dominant peak of a band: location, height and full width at half
/// prominence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakFeature<T: Real> {
    pub freq_hz: f64,
    pub height: T,
    pub width_hz: f64,
}

fn fft_forward<T: Real + FftNum>(samples: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = samples
        .iter()
        .map(|&s| Complex::new(s, T::zero()))
        .collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

fn one_sided<T: Real + FftNum>(
    spectrum: Vec<Complex<T>>,
    sample_rate_hz: f64,
    normalization: Normalization,
) -> Spectrum<T> {
    let n = spectrum.len();
    let bins = n / 2 + 1;
    let scale_interior = match normalization {
        Normalization::Amplitude => T::of(2.0) / T::of_usize(n),
        Normalization::Counts => T::one(),
    };
    let scale_edge = match normalization {
        Normalization::Amplitude => T::one() / T::of_usize(n),
        Normalization::Counts => T::one(),
    };
    let mut freqs_hz = Vec::with_capacity(bins);
    let mut magnitudes = Vec::with_capacity(bins);
    for (k, value) in spectrum.into_iter().take(bins).enumerate() {
        let edge = k == 0 || (n % 2 == 0 && k == n / 2);
        let scale = if edge { scale_edge } else { scale_interior };
        freqs_hz.push(k as f64 * sample_rate_hz / n as f64);
        magnitudes.push(value.norm() * scale);
    }
    Spectrum {
        freqs_hz,
        magnitudes,
        normalization,
        n_samples: n,
    }
}

/// One-sided amplitude spectrum of a chunk (bin spacing `rate / N`).
pub fn fft_magnitude<T: Real + FftNum>(chunk: &TimeSeriesChunk<T>) -> Spectrum<T> {
    one_sided(
        fft_forward(chunk.samples()),
        chunk.sample_rate_hz(),
        Normalization::Amplitude,
    )
}

/// One-sided raw-magnitude ("counts") spectrum of a chunk.
pub fn fft_magnitude_counts<T: Real + FftNum>(chunk: &TimeSeriesChunk<T>) -> Spectrum<T> {
    one_sided(
        fft_forward(chunk.samples()),
        chunk.sample_rate_hz(),
        Normalization::Counts,
    )
}

fn band_range<T: Real>(
    spectrum: &Spectrum<T>,
    band: Band,
) -> Result<std::ops::Range<usize>, SpectralError> {
    let max_hz = *spectrum.freqs_hz.last().expect("non-empty spectrum");
    if band.hi_hz > max_hz * (1.0 + 1e-12) {
        return Err(SpectralError::BandOutOfRange {
            lo_hz: band.lo_hz,
            hi_hz: band.hi_hz,
            max_hz,
        });
    }
    let start = spectrum.freqs_hz.partition_point(|&f| f < band.lo_hz);
    let end = spectrum.freqs_hz.partition_point(|&f| f <= band.hi_hz);
    Ok(start..end)
}

/// Locates the most dominant peak within a band.
///
/// The peak is the in-band magnitude argmax (ties break toward the lowest
/// frequency). Width is measured at half prominence, where the prominence
/// baseline is the higher of the lowest magnitudes on each side of the peak
/// within the band; crossings are interpolated linearly and clipped to the
/// band edges. A flat band therefore reports the full band as its width.
pub fn dominant_peak<T: Real>(
    spectrum: &Spectrum<T>,
    band: Band,
) -> Result<PeakFeature<T>, SpectralError> {
    let range = band_range(spectrum, band)?;
    if range.len() < 3 {
        return Err(SpectralError::BandTooNarrow { bins: range.len() });
    }
    let mags = &spectrum.magnitudes;
    let freqs = &spectrum.freqs_hz;

    let mut peak = range.start;
    for i in range.clone() {
        if mags[i] > mags[peak] {
            peak = i;
        }
    }
    let height = mags[peak];

    let fold_min = |lo: usize, hi: usize| -> T {
        (lo..hi).map(|i| mags[i]).fold(T::infinity(), |m, v| m.min(v))
    };
    let left_base = fold_min(range.start, peak + 1);
    let right_base = fold_min(peak, range.end);
    let prominence = height - left_base.max(right_base);
    let reference = height - prominence / T::of(2.0);

    // Walk outward for the first bin strictly below the reference level.
    let mut left_hz = freqs[range.start];
    for i in (range.start..peak).rev() {
        if mags[i] < reference {
            let span = (reference - mags[i]).as_f64();
            let rise = (mags[i + 1] - mags[i]).as_f64();
            let frac = if rise > 0.0 { span / rise } else { 0.0 };
            left_hz = freqs[i] + frac * (freqs[i + 1] - freqs[i]);
            break;
        }
    }
    let mut right_hz = freqs[range.end - 1];
    for i in (peak + 1)..range.end {
        if mags[i] < reference {
            let span = (reference - mags[i]).as_f64();
            let drop = (mags[i - 1] - mags[i]).as_f64();
            let frac = if drop > 0.0 { span / drop } else { 0.0 };
            right_hz = freqs[i] - frac * (freqs[i] - freqs[i - 1]);
            break;
        }
    }

    Ok(PeakFeature {
        freq_hz: freqs[peak],
        height,
        width_hz: (right_hz - left_hz).max(0.0),
    })
}

/// Euclidean distance between two magnitude vectors restricted to a band.
///
/// Both spectra must share the frequency grid and the normalization tag.
pub fn spectral_distance<T: Real>(
    s: &Spectrum<T>,
    baseline: &Spectrum<T>,
    band: Band,
) -> Result<T, SpectralError> {
    if s.freqs_hz != baseline.freqs_hz {
        return Err(SpectralError::GridMismatch);
    }
    if s.normalization != baseline.normalization {
        return Err(SpectralError::NormalizationMismatch);
    }
    let range = band_range(s, band)?;
    let mut acc = T::zero();
    for i in range {
        let d = s.magnitudes[i] - baseline.magnitudes[i];
        acc += d * d;
    }
    Ok(acc.sqrt())
}

/// Pointwise mean of spectra on one shared grid; used for baseline spectra.
pub fn mean_spectrum<T: Real>(spectra: &[Spectrum<T>]) -> Result<Spectrum<T>, SpectralError> {
    let first = spectra.first().ok_or(SpectralError::GridMismatch)?;
    let mut magnitudes = vec![T::zero(); first.len()];
    for s in spectra {
        if s.freqs_hz != first.freqs_hz {
            return Err(SpectralError::GridMismatch);
        }
        if s.normalization != first.normalization {
            return Err(SpectralError::NormalizationMismatch);
        }
        for (acc, &m) in magnitudes.iter_mut().zip(&s.magnitudes) {
            *acc += m;
        }
    }
    let inv = T::one() / T::of_usize(spectra.len());
    for m in magnitudes.iter_mut() {
        *m *= inv;
    }
    Ok(Spectrum {
        freqs_hz: first.freqs_hz.clone(),
        magnitudes,
        normalization: first.normalization,
        n_samples: first.n_samples,
    })
}

// ---------------------------------------------------------------------------
// Demodulated band RMS (ISO-style ECU2 indicator)
// ---------------------------------------------------------------------------

const DEMOD_BAND: Band = Band {
    lo_hz: 500.0,
    hi_hz: 2000.0,
};
const ENVELOPE_BAND: Band = Band {
    lo_hz: 1.0,
    hi_hz: 150.0,
};

/// Digital IIR filter as numerator/denominator coefficients in `z^-1`,
/// normalized to `a[0] = 1`.
struct Iir {
    b: Vec<f64>,
    a: Vec<f64>,
}

impl Iir {
    /// 4th-order Butterworth band-pass via the analog prototype and the
    /// bilinear transform.
    fn butterworth_bandpass(lo_hz: f64, hi_hz: f64, sample_rate_hz: f64) -> Self {
        let fs2 = 2.0 * sample_rate_hz;
        let warp = |f: f64| fs2 * (std::f64::consts::PI * f / sample_rate_hz).tan();
        let (w1, w2) = (warp(lo_hz), warp(hi_hz));
        let w0 = (w1 * w2).sqrt();
        let bw = w2 - w1;

        // Order-2 Butterworth prototype pole, upper half plane.
        let proto = Complex64::from_polar(1.0, 3.0 * std::f64::consts::FRAC_PI_4);
        let mut analog_poles = Vec::with_capacity(4);
        for p in [proto, proto.conj()] {
            // band-pass transform roots of s^2 - p*bw*s + w0^2 = 0
            let half = p * bw / 2.0;
            let disc = (half * half - Complex64::new(w0 * w0, 0.0)).sqrt();
            analog_poles.push(half + disc);
            analog_poles.push(half - disc);
        }
        let digital_poles: Vec<Complex64> = analog_poles
            .iter()
            .map(|&s| (Complex64::new(fs2, 0.0) + s) / (Complex64::new(fs2, 0.0) - s))
            .collect();

        // Zeros land at z = +1 (x2) and z = -1 (x2): (1 - z^-2)^2.
        let b = vec![1.0, 0.0, -2.0, 0.0, 1.0];
        let mut a_cplx = vec![Complex64::new(1.0, 0.0)];
        for &p in &digital_poles {
            let mut next = vec![Complex64::new(0.0, 0.0); a_cplx.len() + 1];
            for (k, &c) in a_cplx.iter().enumerate() {
                next[k] += c;
                next[k + 1] -= c * p;
            }
            a_cplx = next;
        }
        let a: Vec<f64> = a_cplx.iter().map(|c| c.re).collect();

        // Unit gain at the band center.
        let theta0 = 2.0 * (w0 / fs2).atan();
        let eval = |coeffs: &[f64]| -> Complex64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| Complex64::from_polar(c, -(k as f64) * theta0))
                .sum()
        };
        let gain = (eval(&a) / eval(&b)).norm();
        let b = b.into_iter().map(|c| c * gain).collect();
        Self { b, a }
    }

    /// Direct-form II transposed, zero initial conditions.
    fn filter(&self, x: &[f64]) -> Vec<f64> {
        let order = self.a.len().max(self.b.len()) - 1;
        let mut state = vec![0.0; order];
        let mut y = Vec::with_capacity(x.len());
        for &xn in x {
            let yn = self.b[0] * xn + state[0];
            for k in 0..order {
                let next = if k + 1 < order { state[k + 1] } else { 0.0 };
                let bk = self.b.get(k + 1).copied().unwrap_or(0.0);
                let ak = self.a.get(k + 1).copied().unwrap_or(0.0);
                state[k] = next + bk * xn - ak * yn;
            }
            y.push(yn);
        }
        y
    }

    /// Forward-backward filtering (zero phase), with odd-reflection padding
    /// to suppress edge transients.
    fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let pad = 3 * (self.a.len().max(self.b.len()) - 1);
        let pad = pad.min(x.len().saturating_sub(1));
        let mut ext = Vec::with_capacity(x.len() + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[x.len() - 1] - x[x.len() - 1 - i]);
        }
        let mut y = self.filter(&ext);
        y.reverse();
        let mut y = self.filter(&y);
        y.reverse();
        y[pad..y.len() - pad].to_vec()
    }
}

/// Envelope of a real signal as the magnitude of its analytic signal.
fn envelope(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, value) in buf.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == half) {
            // DC and Nyquist stay
        } else if k <= half {
            *value *= 2.0;
        } else {
            *value = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.norm() / n as f64).collect()
}

/// ISO-style demodulated band indicator: band-pass 500-2000 Hz (zero-phase
/// Butterworth), envelope via the analytic signal, then the RMS of the
/// envelope spectrum over 1-150 Hz.
///
/// Every stage is homogeneous of degree one, so scaling the input scales the
/// indicator by the same factor. Computation runs in `f64` regardless of the
/// chunk's scalar type.
pub fn band_rms_demodulated<T: Real>(chunk: &TimeSeriesChunk<T>) -> Result<T, SpectralError> {
    let rate = chunk.sample_rate_hz();
    if rate <= 4000.0 {
        return Err(SpectralError::SampleRateTooLow(rate));
    }
    if chunk.duration_s() < 1.0 {
        return Err(SpectralError::ChunkTooShort(chunk.duration_s()));
    }
    let x: Vec<f64> = chunk.samples().iter().map(|s| s.as_f64()).collect();
    let filtered = Iir::butterworth_bandpass(DEMOD_BAND.lo_hz, DEMOD_BAND.hi_hz, rate).filtfilt(&x);
    let env = envelope(&filtered);

    let spectrum = one_sided(fft_forward(&env), rate, Normalization::Amplitude);
    let range = band_range(&spectrum, ENVELOPE_BAND)?;
    let mut acc = 0.0;
    for i in range {
        let m = spectrum.magnitudes[i];
        acc += m * m / 2.0;
    }
    Ok(T::of(acc.sqrt()))
}

// ---------------------------------------------------------------------------
// Spectrogram
// ---------------------------------------------------------------------------

/// Short-time spectrum: one amplitude-normalized column per Hann window.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T: Real> {
    /// Window-center times in seconds from chunk start.
    pub times_s: Vec<f64>,
    pub freqs_hz: Vec<f64>,
    /// `columns[t][k]` is the magnitude in window `t`, frequency bin `k`.
    pub columns: Vec<Vec<T>>,
}

impl<T: Real> Spectrogram<T> {
    /// CSV matrix: header row of frequencies, then one row per window
    /// starting with its center time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s");
        for f in &self.freqs_hz {
            write!(out, ",{}", f).expect("string write");
        }
        out.push('\n');
        for (t, col) in self.times_s.iter().zip(&self.columns) {
            write!(out, "{}", t).expect("string write");
            for m in col {
                write!(out, ",{}", m).expect("string write");
            }
            out.push('\n');
        }
        out
    }
}

/// Hann-windowed short-time amplitude spectra.
pub fn spectrogram<T: Real + FftNum>(
    chunk: &TimeSeriesChunk<T>,
    window_s: f64,
    overlap_fraction: f64,
) -> Result<Spectrogram<T>, SpectralError> {
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(SpectralError::BadOverlap(overlap_fraction));
    }
    let rate = chunk.sample_rate_hz();
    let window = (window_s * rate).round() as usize;
    if window == 0 || window > chunk.len() {
        return Err(SpectralError::WindowTooLong {
            window,
            len: chunk.len(),
        });
    }
    let hop = ((window as f64) * (1.0 - overlap_fraction)).round().max(1.0) as usize;
    let hann: Vec<T> = (0..window)
        .map(|i| T::of(0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / window as f64).cos())))
        .collect();

    let n_windows = (chunk.len() - window) / hop + 1;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(window);
    let mut times_s = Vec::with_capacity(n_windows);
    let mut columns = Vec::with_capacity(n_windows);
    let mut freqs_hz = Vec::new();
    for w in 0..n_windows {
        let start = w * hop;
        let mut buf: Vec<Complex<T>> = chunk.samples()[start..start + window]
            .iter()
            .zip(&hann)
            .map(|(&s, &h)| Complex::new(s * h, T::zero()))
            .collect();
        fft.process(&mut buf);
        let spectrum = one_sided(buf, rate, Normalization::Amplitude);
        if w == 0 {
            freqs_hz = spectrum.freqs_hz;
        }
        times_s.push((start as f64 + window as f64 / 2.0) / rate);
        columns.push(spectrum.magnitudes);
    }
    Ok(Spectrogram {
        times_s,
        freqs_hz,
        columns,
    })
}
